#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eitsurf/double_cover.hpp"
#include "eitsurf/fem.hpp"
#include "eitsurf/trace_algebra.hpp"

namespace eit {

/// Gelfand spectrum of the trace algebra, realized as the point-evaluation
/// character cloud on the doubled surface: one point per vertex, carrying
/// the values of the extended generators.
struct CharacterCloud {
    Eigen::MatrixXcd values;           // points x generators
    std::vector<char> boundary_flag;   // on Gamma0+ or Gamma0-
    std::vector<char> hermitian_flag;  // filled by find_seam
    std::vector<int> sheet_label;      // -1 unknown, 0/1 components, 2 seam
    std::vector<double> cr_residual;   // per generator extension
    const DoubledSurface* truth = nullptr;  // ground-truth link (validation)

    int num_points() const { return static_cast<int>(values.rows()); }
    int num_generators() const { return static_cast<int>(values.cols()); }
};

/// Dirichlet data of the holomorphic extension of an element to the double
/// cover: eta on Gamma0+, conj(eta*) through tau on Gamma0-. Vectors are
/// aligned with the doubled mesh's two boundary loops.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> boundary_data_on_cover(
    const TraceAlgebraElement& a, const DoubledSurface& dbl);

/// Extends each generator harmonically (real and imaginary parts) across
/// the double cover and collects the point-evaluation cloud. Reports the
/// Cauchy-Riemann residual of every extension. Throws SeparationFailure if
/// the generators do not separate the Gamma0 samples.
CharacterCloud gelfand_embed(const DoubledSurface& dbl, HarmonicSolver& dbl_solver,
                             const std::vector<TraceAlgebraElement>& gens);

struct ShilovViolation {
    int gen_a = -1;
    int gen_b = -1;  // -1: single generator
    double max_all = 0.0;
    double max_boundary = 0.0;
};

struct ShilovReport {
    std::vector<ShilovViolation> violations;
    double worst_excess = 0.0;  // max over checks of max_all/max_boundary - 1
    bool ok() const { return violations.empty(); }
};

/// Maximum-modulus check: every generator and every product of two must
/// attain its maximum modulus at a boundary-flagged point within rel_slack.
ShilovReport shilov_check(const CharacterCloud& cloud, double rel_slack = 1e-6);

/// Points at which every informative hermitian generator takes real values
/// within tol (relative to that generator's imaginary range). Marks the
/// hermitian flags and returns the point set.
std::vector<int> find_seam(CharacterCloud& cloud, double tol);

struct SplitResult {
    int components = 0;
    std::vector<int> labels;  // 0/1 component, 2 seam
};

/// Removes the seam points and splits the remaining cloud by connectivity:
/// validation mode walks the doubled-mesh edges, blind mode a k-nearest
/// graph in generator space. Exactly two components are required.
SplitResult split_components(CharacterCloud& cloud, const std::vector<int>& seam,
                             bool use_mesh_edges = true, int knn = 8);

struct MetricFitPatch {
    Eigen::MatrixXd coords;  // points x 2 local chart
    Eigen::MatrixXd fields;  // points x (#harmonic samples)
};

struct MetricFit {
    Eigen::Matrix2d g;       // unit-determinant representative
    double residual = 0.0;   // smallest/largest singular value of the system
};

/// Least-squares solve of Delta_g(field) = 0 over the patch for the
/// unit-determinant metric representative (quadratic local models supply
/// the Hessians). Throws CriterionError when the system cannot pin the
/// direction (needs more generators).
MetricFit fit_conformal_metric(const MetricFitPatch& patch);

struct ModulusFit {
    double L = 0.0;         // ln(1/r)
    double residual = 0.0;  // relative misfit of the eigenvalue model
    bool ok = false;
};

/// Fits lambda_n = n coth(nL) (grounded) or n tanh(nL) (isolated) to the
/// paired eigenvalues; an annulus-shaped spectrum gives a small residual.
ModulusFit recover_annulus_modulus(const Eigen::VectorXd& ascending_eigenvalues,
                                   DNFlavor flavor);

/// Validation-mode reassembly: grows the labeled component through the
/// seam and maps it back through the projection; the result reproduces the
/// source-sheet mesh and supports re-assembling the DN operator.
SurfaceMesh rebuild_sheet_mesh(const DoubledSurface& dbl, const std::vector<int>& labels,
                               int component);

} // namespace eit
