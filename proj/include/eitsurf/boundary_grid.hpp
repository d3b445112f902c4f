#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "eitsurf/surface_mesh.hpp"

namespace eit {

/// Arc-length sampling of one boundary loop: node ids in loop order,
/// cumulative arc length from the base vertex, and trapezoid quadrature
/// weights (positive, summing to the loop length).
struct BoundaryGrid {
    std::vector<int> nodes;
    Eigen::VectorXd s;
    Eigen::VectorXd weights;
    double length = 0.0;

    int size() const { return static_cast<int>(nodes.size()); }

    double integral(const Eigen::VectorXd& values) const {
        return weights.dot(values);
    }
    double mean(const Eigen::VectorXd& values) const {
        return integral(values) / length;
    }
    double norm(const Eigen::VectorXd& values) const {
        return std::sqrt(values.dot(weights.cwiseProduct(values)));
    }
    /// Samples a function of arc length at the nodes.
    Eigen::VectorXd sample(const std::function<double(double)>& f) const;
    /// Samples a function of the normalized angle 2*pi*s/length.
    Eigen::VectorXd sample_angle(const std::function<double(double)>& f) const;
};

/// Builds the arc-length grid of boundary loop `loop` of `mesh`.
BoundaryGrid make_boundary_grid(const SurfaceMesh& mesh, int loop);

/// Function sampled at the nodes of a boundary grid.
struct BoundaryTrace {
    std::shared_ptr<const BoundaryGrid> grid;
    Eigen::VectorXd values;
};

/// Fourier boundary calculus on one grid: the spectral tangential
/// derivative and the zero-mean antiderivative J, realized as dense nodal
/// matrices through trigonometric collocation at the arc-length nodes.
class BoundaryCalculus {
public:
    explicit BoundaryCalculus(std::shared_ptr<const BoundaryGrid> grid);

    const BoundaryGrid& grid() const { return *grid_; }
    std::shared_ptr<const BoundaryGrid> grid_ptr() const { return grid_; }

    /// d/ds along the loop; derivative of a constant is 0.
    Eigen::VectorXd derivative(const Eigen::VectorXd& values) const;

    /// The unique zero-mean periodic antiderivative. Throws MeanViolation
    /// when |integral| > tol_mean * ||values||_L2 * sqrt(length).
    Eigen::VectorXd integrate(const Eigen::VectorXd& values,
                              double tol_mean = 1e-3) const;

    /// J composed with the mean projection (always defined); the operator
    /// used inside compositions such as (Lambda J)^2.
    Eigen::VectorXd integrate_projected(const Eigen::VectorXd& values) const;

    /// Projection onto the modes {1, cos, sin : k <= kmax} in the
    /// collocation sense. Smooth-content extractor for residual norms.
    Eigen::VectorXd lowpass(const Eigen::VectorXd& values, int kmax) const;

    const Eigen::MatrixXd& derivative_matrix() const { return deriv_; }
    const Eigen::MatrixXd& integration_matrix() const { return integ_; }
    const Eigen::MatrixXd& lowpass_matrix(int kmax) const;

    int max_mode() const;

private:
    std::shared_ptr<const BoundaryGrid> grid_;
    Eigen::MatrixXd deriv_;
    Eigen::MatrixXd integ_;
    Eigen::MatrixXd basis_;           // T: trig basis at nodes
    Eigen::MatrixXd basis_inv_;       // T^{-1}
    mutable std::map<int, Eigen::MatrixXd> lowpass_cache_;
};

} // namespace eit
