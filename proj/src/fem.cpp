#include "eitsurf/fem.hpp"
#include "eitsurf/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace eit {

namespace {

// Local P1 stiffness in the edge frame: (sqrt(det G)/2) D^T G^{ -1} D with
// D = [[-1,1,0],[-1,0,1]] mapping nodal values to the constant differential.
void local_stiffness(const Metric2& g, double K[3][3]) {
    double det = g.det();
    if (!(det > 0)) throw SolveError("degenerate metric tensor in assembly");
    double area = 0.5 * std::sqrt(det);
    // G^{-1} = [[g22,-g12],[-g12,g11]] / det
    double i11 = g.g22 / det, i12 = -g.g12 / det, i22 = g.g11 / det;
    // Differentials of the three hats: d(phi_0) = (-1,-1), d(phi_1) = (1,0), d(phi_2) = (0,1).
    const double d[3][2] = {{-1, -1}, {1, 0}, {0, 1}};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double q = d[a][0] * (i11 * d[b][0] + i12 * d[b][1]) +
                       d[a][1] * (i12 * d[b][0] + i22 * d[b][1]);
            K[a][b] = area * q;
        }
}

} // namespace

struct HarmonicSolver::Factor {
    std::vector<int> free_index;  // full -> reduced, -1 if fixed
    std::vector<int> free_list;   // reduced -> full
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

HarmonicSolver::HarmonicSolver(const SurfaceMesh& mesh)
    : mesh_(mesh), fp_(mesh.fingerprint()) {
    const int n = mesh.num_vertices();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        double Kl[3][3];
        local_stiffness(mesh.metric[t], Kl);
        const auto& tri = mesh.triangles[t];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                trips.emplace_back(tri[a], tri[b], Kl[a][b]);
    }
    K_.resize(n, n);
    K_.setFromTriplets(trips.begin(), trips.end());
}

std::shared_ptr<HarmonicSolver::Factor> HarmonicSolver::factor_for(
    std::vector<int> dirichlet_loops) const {
    std::sort(dirichlet_loops.begin(), dirichlet_loops.end());
    auto it = cache_.find(dirichlet_loops);
    if (it != cache_.end()) return it->second;

    const int n = mesh_.num_vertices();
    std::vector<char> fixed(n, 0);
    for (int l : dirichlet_loops)
        for (int v : mesh_.boundary_loops.at(l)) fixed[v] = 1;

    auto f = std::make_shared<Factor>();
    f->free_index.assign(n, -1);
    for (int v = 0; v < n; ++v) {
        if (!fixed[v]) {
            f->free_index[v] = static_cast<int>(f->free_list.size());
            f->free_list.push_back(v);
        }
    }
    const int m = static_cast<int>(f->free_list.size());
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < K_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator itK(K_, col); itK; ++itK) {
            int i = f->free_index[static_cast<int>(itK.row())];
            int j = f->free_index[col];
            if (i >= 0 && j >= 0) trips.emplace_back(i, j, itK.value());
        }
    }
    Eigen::SparseMatrix<double> Kuu(m, m);
    Kuu.setFromTriplets(trips.begin(), trips.end());
    f->ldlt.compute(Kuu);
    if (f->ldlt.info() != Eigen::Success)
        throw SolveError("stiffness factorization failed (degenerate mesh?)");
    cache_[dirichlet_loops] = f;
    return f;
}

ScalarField HarmonicSolver::solve_dirichlet(
    const std::vector<std::pair<int, Eigen::VectorXd>>& data) const {
    const int n = mesh_.num_vertices();
    std::vector<int> loops;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    for (const auto& [loop, vals] : data) {
        const auto& lp = mesh_.boundary_loops.at(loop);
        if (vals.size() != static_cast<Eigen::Index>(lp.size()))
            throw SolveError("Dirichlet data size does not match loop size");
        for (size_t i = 0; i < lp.size(); ++i) u[lp[i]] = vals[i];
        loops.push_back(loop);
    }
    auto f = factor_for(loops);
    Eigen::VectorXd w = K_ * u;
    Eigen::VectorXd rhs(f->free_list.size());
    for (size_t i = 0; i < f->free_list.size(); ++i) rhs[i] = -w[f->free_list[i]];
    Eigen::VectorXd x = f->ldlt.solve(rhs);
    if (f->ldlt.info() != Eigen::Success) throw SolveError("linear solve failed");
    for (size_t i = 0; i < f->free_list.size(); ++i) u[f->free_list[i]] = x[i];
    return ScalarField{std::move(u), fp_};
}

ScalarField HarmonicSolver::solve_grounded(const Eigen::VectorXd& f_on_gamma0) const {
    std::vector<std::pair<int, Eigen::VectorXd>> data;
    data.emplace_back(mesh_.gamma0_index, f_on_gamma0);
    for (int l = 0; l < mesh_.num_loops(); ++l) {
        if (l == mesh_.gamma0_index) continue;
        data.emplace_back(
            l, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh_.boundary_loops[l].size())));
    }
    return solve_dirichlet(data);
}

ScalarField HarmonicSolver::solve_isolated(const Eigen::VectorXd& h_on_gamma0) const {
    return solve_dirichlet({{mesh_.gamma0_index, h_on_gamma0}});
}

Eigen::VectorXd HarmonicSolver::loop_fluxes(const ScalarField& u) const {
    if (u.mesh_fingerprint != fp_) throw SolveError("field belongs to a different mesh");
    Eigen::VectorXd w = K_ * u.values;
    Eigen::VectorXd flux(mesh_.num_loops());
    for (int l = 0; l < mesh_.num_loops(); ++l) {
        double s = 0.0;
        for (int v : mesh_.boundary_loops[l]) s += w[v];
        flux[l] = s;
    }
    return flux;
}

Eigen::VectorXd HarmonicSolver::hole_periods(const ScalarField& u) const {
    Eigen::VectorXd flux = loop_fluxes(u);
    Eigen::VectorXd out(mesh_.num_holes());
    int k = 0;
    for (int l = 0; l < mesh_.num_loops(); ++l)
        if (l != mesh_.gamma0_index) out[k++] = flux[l];
    return out;
}

double cr_residual(const SurfaceMesh& mesh, const ScalarField& u, const ScalarField& v) {
    if (u.mesh_fingerprint != v.mesh_fingerprint)
        throw SolveError("cr_residual: fields belong to different meshes");
    if (u.values.size() != mesh.num_vertices() || v.values.size() != mesh.num_vertices())
        throw SolveError("cr_residual: field size does not match mesh");

    double acc = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        const Metric2& g = mesh.metric[t];
        double det = g.det();
        if (!(det > 0)) throw SolveError("degenerate metric tensor");
        double sq = std::sqrt(det);
        // Differentials (covectors) of the P1 fields.
        double du1 = u.values[tri[1]] - u.values[tri[0]];
        double du2 = u.values[tri[2]] - u.values[tri[0]];
        double dv1 = v.values[tri[1]] - v.values[tri[0]];
        double dv2 = v.values[tri[2]] - v.values[tri[0]];
        // Gradients (vectors): G^{-1} d.
        double gu1 = (g.g22 * du1 - g.g12 * du2) / det;
        double gu2 = (-g.g12 * du1 + g.g11 * du2) / det;
        double gv1 = (g.g22 * dv1 - g.g12 * dv2) / det;
        double gv2 = (-g.g12 * dv1 + g.g11 * dv2) / det;
        // Rotation by +90 degrees in the frame's own handedness:
        // Phi = sign / sqrt(det G) * [[-g12, -g22], [g11, g12]].
        double s = mesh.rotation_orientation / sq;
        double rv1 = s * (-g.g12 * gv1 - g.g22 * gv2);
        double rv2 = s * (g.g11 * gv1 + g.g12 * gv2);
        double w1 = gu1 - rv1, w2 = gu2 - rv2;
        double q = w1 * (g.g11 * w1 + g.g12 * w2) + w2 * (g.g12 * w1 + g.g22 * w2);
        acc += q * 0.5 * sq;
    }
    return std::sqrt(std::max(acc, 0.0));
}

double energy_norm(const HarmonicSolver& solver, const ScalarField& u) {
    return std::sqrt(std::max(0.0, u.values.dot(solver.stiffness() * u.values)));
}

} // namespace eit
