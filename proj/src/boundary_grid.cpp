#include "eitsurf/boundary_grid.hpp"
#include "eitsurf/errors.hpp"

#include <cmath>
#include <numbers>

namespace eit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Eigen::VectorXd BoundaryGrid::sample(const std::function<double(double)>& f) const {
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v[i] = f(s[i]);
    return v;
}

Eigen::VectorXd BoundaryGrid::sample_angle(const std::function<double(double)>& f) const {
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v[i] = f(kTwoPi * s[i] / length);
    return v;
}

BoundaryGrid make_boundary_grid(const SurfaceMesh& mesh, int loop) {
    const auto& lp = mesh.boundary_loops.at(loop);
    const int n = static_cast<int>(lp.size());
    BoundaryGrid g;
    g.nodes = lp;
    g.s.resize(n);
    g.weights.resize(n);
    Eigen::VectorXd elen(n);
    for (int i = 0; i < n; ++i) elen[i] = mesh.edge_length(lp[i], lp[(i + 1) % n]);
    g.s[0] = 0.0;
    for (int i = 1; i < n; ++i) g.s[i] = g.s[i - 1] + elen[i - 1];
    g.length = g.s[n - 1] + elen[n - 1];
    for (int i = 0; i < n; ++i) g.weights[i] = (elen[(i + n - 1) % n] + elen[i]) / 2.0;
    return g;
}

// Trigonometric collocation at the nodes: with the basis
//   {1, cos(w k s), sin(w k s) : k = 1..kmax} (+ cos(w n/2 s) for even n),
// the interpolation matrix T is square; d/ds and J are realized as
// (basis derivative at nodes) * T^{-1}. On uniform grids this is the exact
// Fourier calculus; near-uniform mesh boundaries keep T well conditioned.
BoundaryCalculus::BoundaryCalculus(std::shared_ptr<const BoundaryGrid> grid)
    : grid_(std::move(grid)) {
    const BoundaryGrid& g = *grid_;
    const int n = g.size();
    if (n < 8) throw Error("boundary calculus needs at least 8 nodes");
    const double w = kTwoPi / g.length;
    const int kmax = (n - 1) / 2;
    const bool has_nyq = (n % 2 == 0);

    Eigen::MatrixXd T(n, n), Td(n, n), Tj(n, n);
    for (int i = 0; i < n; ++i) {
        double s = g.s[i];
        T(i, 0) = 1.0;
        Td(i, 0) = 0.0;
        Tj(i, 0) = 0.0;  // J drops the mean component
        for (int k = 1; k <= kmax; ++k) {
            double c = std::cos(w * k * s), sn = std::sin(w * k * s);
            T(i, 2 * k - 1) = c;
            T(i, 2 * k) = sn;
            Td(i, 2 * k - 1) = -w * k * sn;
            Td(i, 2 * k) = w * k * c;
            Tj(i, 2 * k - 1) = sn / (w * k);
            Tj(i, 2 * k) = -c / (w * k);
        }
        if (has_nyq) {
            int m = n / 2;
            T(i, n - 1) = std::cos(w * m * s);
            Td(i, n - 1) = -w * m * std::sin(w * m * s);
            Tj(i, n - 1) = std::sin(w * m * s) / (w * m);
        }
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
    Eigen::MatrixXd Tinv = lu.solve(Eigen::MatrixXd::Identity(n, n));
    double resid = (T * Tinv - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(resid < 1e-6))
        throw Error("boundary nodes too irregular for trigonometric collocation");
    deriv_ = Td * Tinv;
    integ_ = Tj * Tinv;
    basis_ = std::move(T);
    basis_inv_ = std::move(Tinv);
}

int BoundaryCalculus::max_mode() const { return (grid_->size() - 1) / 2; }

const Eigen::MatrixXd& BoundaryCalculus::lowpass_matrix(int kmax) const {
    const int n = grid_->size();
    kmax = std::min(kmax, max_mode());
    auto it = lowpass_cache_.find(kmax);
    if (it != lowpass_cache_.end()) return it->second;
    Eigen::MatrixXd Tcut = basis_;
    int keep = std::min(n, 2 * kmax + 1);
    if (keep < n) Tcut.rightCols(n - keep).setZero();
    return lowpass_cache_.emplace(kmax, Tcut * basis_inv_).first->second;
}

Eigen::VectorXd BoundaryCalculus::lowpass(const Eigen::VectorXd& values, int kmax) const {
    return lowpass_matrix(kmax) * values;
}

Eigen::VectorXd BoundaryCalculus::derivative(const Eigen::VectorXd& values) const {
    return deriv_ * values;
}

Eigen::VectorXd BoundaryCalculus::integrate(const Eigen::VectorXd& values,
                                            double tol_mean) const {
    double integral = grid_->integral(values);
    double bound = tol_mean * grid_->norm(values) * std::sqrt(grid_->length);
    if (std::abs(integral) > bound)
        throw MeanViolation(integral, grid_->norm(values));
    return integ_ * values;
}

Eigen::VectorXd BoundaryCalculus::integrate_projected(const Eigen::VectorXd& values) const {
    return integ_ * values;
}

} // namespace eit
