#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "eitsurf/boundary_grid.hpp"
#include "eitsurf/fem.hpp"
#include "eitsurf/surface_mesh.hpp"

namespace eit {

enum class DNFlavor { Grounded, Isolated };

const char* to_string(DNFlavor f);
DNFlavor dn_flavor_from_string(const std::string& s);

/// Discrete Dirichlet-to-Neumann operator on Gamma0.
///
/// `schur` is the symmetric quadratic-form matrix: <Lambda f, g> in the
/// boundary quadrature equals f' schur g. The nodal action is
/// W^{-1} schur with W the diagonal of quadrature weights, so the operator
/// is self-adjoint in the quadrature inner product by construction.
struct DNOperator {
    DNFlavor flavor = DNFlavor::Grounded;
    std::shared_ptr<const BoundaryGrid> grid;
    Eigen::MatrixXd schur;
    uint64_t mesh_fingerprint = 0;

    int size() const { return static_cast<int>(schur.rows()); }

    /// Nodal values of the weak normal derivative of the harmonic extension.
    Eigen::VectorXd apply(const Eigen::VectorXd& f) const;

    /// Quadrature pairing <Lambda f, g>.
    double form(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
};

/// Schur complement of the metric stiffness onto the Gamma0 nodes with the
/// flavor's condition on the inner loops, symmetrized after assembly.
DNOperator assemble_dn(const HarmonicSolver& solver, DNFlavor flavor);
DNOperator assemble_dn(const SurfaceMesh& mesh, DNFlavor flavor);

struct DNSpectrum {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // W-orthonormal columns
};

/// First k eigenpairs of the quadrature-symmetrized operator.
DNSpectrum dn_spectrum(const DNOperator& op, int k);

/// Compression of the operator onto {1, cos(wks), sin(wks) : k <= n_modes},
/// orthonormalized in the boundary quadrature.
Eigen::MatrixXd dn_compressed(const DNOperator& op, int n_modes);

/// Richardson two-grid estimate of the discretization error of the DN
/// operator on the low Fourier modes; 10x this is the criterion tolerance
/// used by the trace-algebra membership tests.
double dn_error_estimate(const DNOperator& fine, const DNOperator& coarse, int n_modes);

/// CSV round trip, 17 significant digits (lossless for doubles).
void write_dn_csv(const DNOperator& op, std::ostream& out);
void write_dn_csv_file(const DNOperator& op, const std::string& path);
DNOperator read_dn_csv(std::istream& in);
DNOperator read_dn_csv_file(const std::string& path);

} // namespace eit
