#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "eitsurf/surface_mesh.hpp"

namespace eit {

/// Per-vertex real field on a fixed mesh.
struct ScalarField {
    Eigen::VectorXd values;
    uint64_t mesh_fingerprint = 0;
};

/// P1 Laplace-Beltrami solver with exact per-triangle metric stiffness.
/// Dirichlet conditions are imposed by row elimination (the reduced system
/// stays SPD); one factorization per elimination pattern is cached and
/// reused across right-hand sides.
class HarmonicSolver {
public:
    explicit HarmonicSolver(const SurfaceMesh& mesh);

    const SurfaceMesh& mesh() const { return mesh_; }
    const Eigen::SparseMatrix<double>& stiffness() const { return K_; }

    /// Harmonic field with Dirichlet data on the listed loops (values in
    /// loop vertex order) and the natural condition elsewhere.
    ScalarField solve_dirichlet(
        const std::vector<std::pair<int, Eigen::VectorXd>>& data) const;

    /// u = f on Gamma0, u = 0 on all inner loops.
    ScalarField solve_grounded(const Eigen::VectorXd& f_on_gamma0) const;

    /// v = h on Gamma0, natural condition on all inner loops.
    ScalarField solve_isolated(const Eigen::VectorXd& h_on_gamma0) const;

    /// Weak flux through each inner loop (stiffness action on the loop's
    /// nodal indicator), in stored loop order with Gamma0 skipped.
    Eigen::VectorXd hole_periods(const ScalarField& u) const;

    /// Weak flux through every loop, in stored loop order.
    Eigen::VectorXd loop_fluxes(const ScalarField& u) const;

private:
    struct Factor;
    const SurfaceMesh& mesh_;
    uint64_t fp_;
    Eigen::SparseMatrix<double> K_;
    mutable std::map<std::vector<int>, std::shared_ptr<Factor>> cache_;

    std::shared_ptr<Factor> factor_for(std::vector<int> dirichlet_loops) const;

    friend class DNAssembler;
};

/// L2 norm of (grad u - Phi grad v) over the mesh; Phi is the metric
/// rotation by 90 degrees (sign from rotation_orientation). On a doubled
/// surface this realizes the sheet-flipping rotation field.
double cr_residual(const SurfaceMesh& mesh, const ScalarField& u, const ScalarField& v);

/// Energy seminorm sqrt(u' K u).
double energy_norm(const HarmonicSolver& solver, const ScalarField& u);

} // namespace eit
