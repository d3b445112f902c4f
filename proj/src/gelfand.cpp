#include "eitsurf/gelfand.hpp"
#include "eitsurf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>

namespace eit {

namespace {

std::vector<std::vector<int>> vertex_adjacency(const SurfaceMesh& mesh) {
    std::vector<std::set<int>> nb(mesh.num_vertices());
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            nb[t[k]].insert(t[(k + 1) % 3]);
            nb[t[k]].insert(t[(k + 2) % 3]);
        }
    std::vector<std::vector<int>> out(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) out[v].assign(nb[v].begin(), nb[v].end());
    return out;
}

} // namespace

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> boundary_data_on_cover(
    const TraceAlgebraElement& a, const DoubledSurface& dbl) {
    const auto& l0 = dbl.mesh.boundary_loops.at(0);
    const auto& l1 = dbl.mesh.boundary_loops.at(1);
    const int n = static_cast<int>(l0.size());
    if (a.size() != n)
        throw Error("boundary_data_on_cover: element grid does not match the cover");

    Eigen::VectorXcd plus = a.eta();

    // Gamma0- runs reversed from the image of the base vertex; position i
    // on the minus loop covers source position (n - i) mod n.
    Eigen::VectorXcd w1c = a.w1.conjugate();
    Eigen::VectorXcd w2c = a.w2.conjugate();
    Eigen::VectorXcd minus(l1.size());
    for (size_t i = 0; i < l1.size(); ++i) {
        int src_pos = static_cast<int>((n - i) % n);
        minus[i] = w1c[src_pos] + std::complex<double>(0, 1) * w2c[src_pos];
    }
    return {plus, minus};
}

CharacterCloud gelfand_embed(const DoubledSurface& dbl, HarmonicSolver& dbl_solver,
                             const std::vector<TraceAlgebraElement>& gens) {
    if (gens.size() < 2) throw Error("gelfand_embed: need at least two generators");
    const int n = static_cast<int>(gens.front().size());
    for (const auto& g : gens)
        if (g.size() != n) throw Error("gelfand_embed: generators on different grids");

    // Separation of the Gamma0 samples by the joint boundary values.
    Eigen::MatrixXcd etas(n, gens.size());
    for (size_t g = 0; g < gens.size(); ++g) etas.col(static_cast<int>(g)) = gens[g].eta();
    double scale = std::max(etas.cwiseAbs().maxCoeff(), 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = (etas.row(i) - etas.row(j)).cwiseAbs().maxCoeff();
            if (d <= 1e-9 * scale)
                throw SeparationFailure("generators do not separate boundary points", i, j);
        }

    CharacterCloud cloud;
    const int nv = dbl.num_vertices();
    cloud.values.resize(nv, static_cast<int>(gens.size()));
    cloud.cr_residual.resize(gens.size());
    cloud.boundary_flag.assign(nv, 0);
    cloud.hermitian_flag.assign(nv, 0);
    cloud.sheet_label.assign(nv, -1);
    cloud.truth = &dbl;
    for (const auto& lp : dbl.mesh.boundary_loops)
        for (int v : lp) cloud.boundary_flag[v] = 1;

    for (size_t g = 0; g < gens.size(); ++g) {
        auto [plus, minus] = boundary_data_on_cover(gens[g], dbl);
        ScalarField re = dbl_solver.solve_dirichlet(
            {{0, plus.real()}, {1, minus.real()}});
        ScalarField im = dbl_solver.solve_dirichlet(
            {{0, plus.imag()}, {1, minus.imag()}});
        for (int v = 0; v < nv; ++v)
            cloud.values(v, static_cast<int>(g)) =
                std::complex<double>(re.values[v], im.values[v]);
        cloud.cr_residual[g] = cr_residual(dbl.mesh, im, re);
    }
    return cloud;
}

ShilovReport shilov_check(const CharacterCloud& cloud, double rel_slack) {
    ShilovReport rep;
    const int k = cloud.num_generators();
    auto check_field = [&](const Eigen::VectorXcd& vals, int a, int b) {
        double max_all = 0, max_bdy = 0;
        for (int p = 0; p < cloud.num_points(); ++p) {
            double m = std::abs(vals[p]);
            max_all = std::max(max_all, m);
            if (cloud.boundary_flag[p]) max_bdy = std::max(max_bdy, m);
        }
        double excess = max_bdy > 0 ? max_all / max_bdy - 1.0 : (max_all > 0 ? 1.0 : 0.0);
        rep.worst_excess = std::max(rep.worst_excess, excess);
        if (max_all > max_bdy * (1.0 + rel_slack))
            rep.violations.push_back({a, b, max_all, max_bdy});
    };
    for (int g = 0; g < k; ++g) check_field(cloud.values.col(g), g, -1);
    for (int g = 0; g < k; ++g)
        for (int h = g; h < k; ++h)
            check_field(cloud.values.col(g).cwiseProduct(cloud.values.col(h)), g, h);
    return rep;
}

std::vector<int> find_seam(CharacterCloud& cloud, double tol) {
    const int k = cloud.num_generators();
    const int n = cloud.num_points();
    // A generator is informative when its imaginary part actually varies.
    std::vector<double> scale(k, 0.0);
    double global = 0.0;
    for (int g = 0; g < k; ++g) {
        scale[g] = cloud.values.col(g).imag().cwiseAbs().maxCoeff();
        global = std::max(global, cloud.values.col(g).cwiseAbs().maxCoeff());
    }
    int informative = 0;
    for (int g = 0; g < k; ++g)
        if (scale[g] > 1e-9 * std::max(global, 1.0)) ++informative;
    if (informative == 0)
        throw Error("find_seam: no nonconstant hermitian generator available");

    std::vector<int> seam;
    for (int p = 0; p < n; ++p) {
        bool herm = true;
        for (int g = 0; g < k && herm; ++g) {
            if (scale[g] <= 1e-9 * std::max(global, 1.0)) continue;
            if (std::abs(cloud.values(p, g).imag()) > tol * scale[g]) herm = false;
        }
        cloud.hermitian_flag[p] = herm ? 1 : 0;
        if (herm) seam.push_back(p);
    }
    return seam;
}

SplitResult split_components(CharacterCloud& cloud, const std::vector<int>& seam,
                             bool use_mesh_edges, int knn) {
    const int n = cloud.num_points();
    std::vector<char> is_seam(n, 0);
    for (int p : seam) is_seam[p] = 1;

    std::vector<std::vector<int>> adj;
    if (use_mesh_edges) {
        if (!cloud.truth) throw Error("split_components: no mesh link for validation mode");
        adj = vertex_adjacency(cloud.truth->mesh);
    } else {
        // k-nearest neighbors in generator-value space.
        adj.resize(n);
        const int k = cloud.num_generators();
        for (int p = 0; p < n; ++p) {
            std::vector<std::pair<double, int>> d;
            d.reserve(n - 1);
            for (int q = 0; q < n; ++q) {
                if (q == p) continue;
                double acc = 0;
                for (int g = 0; g < k; ++g) acc += std::norm(cloud.values(p, g) - cloud.values(q, g));
                d.push_back({acc, q});
            }
            int take = std::min<int>(knn, static_cast<int>(d.size()));
            std::partial_sort(d.begin(), d.begin() + take, d.end());
            for (int i = 0; i < take; ++i) adj[p].push_back(d[i].second);
        }
        // symmetrize
        std::vector<std::set<int>> sym(n);
        for (int p = 0; p < n; ++p)
            for (int q : adj[p]) {
                sym[p].insert(q);
                sym[q].insert(p);
            }
        for (int p = 0; p < n; ++p) adj[p].assign(sym[p].begin(), sym[p].end());
    }

    std::vector<int> label(n, -1);
    int comp = 0;
    for (int start = 0; start < n; ++start) {
        if (is_seam[start] || label[start] >= 0) continue;
        std::queue<int> bfs;
        bfs.push(start);
        label[start] = comp;
        while (!bfs.empty()) {
            int v = bfs.front();
            bfs.pop();
            for (int u : adj[v]) {
                if (is_seam[u] || label[u] >= 0) continue;
                label[u] = comp;
                bfs.push(u);
            }
        }
        ++comp;
    }
    if (comp != 2)
        throw TopologyError("seam removal split the cloud into " + std::to_string(comp) +
                            " components, expected 2");

    // Component 0 is the one holding the first Gamma0+ point.
    int anchor = -1;
    for (int p = 0; p < n && anchor < 0; ++p)
        if (cloud.boundary_flag[p] && !is_seam[p]) anchor = p;
    if (anchor >= 0 && label[anchor] == 1)
        for (int p = 0; p < n; ++p)
            if (label[p] >= 0) label[p] = 1 - label[p];

    SplitResult out;
    out.components = comp;
    out.labels.assign(n, 2);
    for (int p = 0; p < n; ++p)
        if (!is_seam[p]) out.labels[p] = label[p];
    cloud.sheet_label = out.labels;
    return out;
}

MetricFit fit_conformal_metric(const MetricFitPatch& patch) {
    const int n = static_cast<int>(patch.coords.rows());
    const int m = static_cast<int>(patch.fields.cols());
    if (n < 12) throw CriterionError("metric fit: patch too small");
    if (m < 3) throw CriterionError("metric fit: needs at least 3 harmonic samples");

    // Center and scale the chart for conditioning.
    Eigen::RowVector2d c = patch.coords.colwise().mean();
    Eigen::MatrixXd X = patch.coords.rowwise() - c;
    double sc = std::sqrt(X.cwiseAbs2().sum() / n);
    if (!(sc > 0)) throw CriterionError("metric fit: degenerate chart");
    X /= sc;

    // Quadratic model per field: [1, x, y, x^2, xy, y^2].
    Eigen::MatrixXd A(n, 6);
    A.col(0).setOnes();
    A.col(1) = X.col(0);
    A.col(2) = X.col(1);
    A.col(3) = X.col(0).cwiseAbs2();
    A.col(4) = X.col(0).cwiseProduct(X.col(1));
    A.col(5) = X.col(1).cwiseAbs2();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);

    Eigen::MatrixXd H(m, 3);  // rows: (u_xx, 2 u_xy, u_yy)
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd cj = qr.solve(patch.fields.col(j));
        H(j, 0) = 2.0 * cj[3];
        H(j, 1) = cj[4];
        H(j, 2) = 2.0 * cj[5];
    }
    // Scale rows to unit size so each harmonic sample votes equally.
    for (int j = 0; j < m; ++j) {
        double rn = H.row(j).norm();
        if (rn > 1e-12) H.row(j) /= rn;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeFullV);
    Eigen::Vector3d s3 = svd.singularValues();
    if (!(s3[1] > 10.0 * s3[2] + 1e-12 * s3[0]))
        throw CriterionError("metric fit: rank-deficient system, needs more generators");

    Eigen::Vector3d theta = svd.matrixV().col(2);
    if (theta[0] + theta[2] < 0) theta = -theta;
    Eigen::Matrix2d Ainv;  // inverse metric direction
    Ainv << theta[0], theta[1], theta[1], theta[2];
    double det = Ainv.determinant();
    if (!(det > 0) || !(theta[0] > 0))
        throw CriterionError("metric fit: solution is not positive definite");
    Ainv /= std::sqrt(det);

    MetricFit out;
    out.g = Ainv.inverse();  // unit determinant
    out.residual = s3[2] / std::max(s3[0], 1e-300);
    return out;
}

namespace {

// Double eigenvalues grouped into pairs; singletons skipped.
std::vector<double> eigen_pairs(const Eigen::VectorXd& eigs) {
    const double pair_tol = 0.05;
    std::vector<double> pairs;
    int i = 0;
    const int k = static_cast<int>(eigs.size());
    while (i < k) {
        if (i + 1 < k &&
            std::abs(eigs[i + 1] - eigs[i]) <= pair_tol * std::max(std::abs(eigs[i]), 0.1)) {
            pairs.push_back(0.5 * (eigs[i] + eigs[i + 1]));
            i += 2;
        } else {
            i += 1;
        }
    }
    return pairs;
}

} // namespace

ModulusFit recover_annulus_modulus(const Eigen::VectorXd& eigs, DNFlavor flavor) {
    for (int i = 1; i < eigs.size(); ++i)
        if (eigs[i] < eigs[i - 1] - 1e-12 * std::abs(eigs[i - 1]))
            throw Error("recover_annulus_modulus: eigenvalues must ascend");
    std::vector<double> pairs = eigen_pairs(eigs);
    const int P = static_cast<int>(pairs.size());
    if (P < 4) throw Error("recover_annulus_modulus: need at least 4 eigenvalue pairs");

    auto model = [&](int j, double L) {
        double x = j * L;
        return flavor == DNFlavor::Grounded ? j / std::tanh(x) : j * std::tanh(x);
    };
    auto misfit = [&](double L) {
        double acc = 0;
        for (int j = 1; j <= P; ++j) {
            double d = pairs[j - 1] - model(j, L);
            acc += d * d;
        }
        return acc;
    };

    // Golden-section on a bracket, then parabolic refinement.
    double lo = 0.02, hi = 8.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = misfit(x1), f2 = misfit(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + a); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = misfit(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = misfit(x2);
        }
    }
    ModulusFit out;
    out.L = 0.5 * (a + b);
    double norm2 = 0;
    for (double p : pairs) norm2 += p * p;
    out.residual = std::sqrt(misfit(out.L) / std::max(norm2, 1e-300));
    out.ok = out.residual < 0.05 && out.L > lo * 1.5 && out.L < hi * 0.9;
    return out;
}

SurfaceMesh rebuild_sheet_mesh(const DoubledSurface& dbl, const std::vector<int>& labels,
                               int component) {
    const int nv = dbl.num_vertices();
    if (static_cast<int>(labels.size()) != nv)
        throw Error("rebuild_sheet_mesh: label count mismatch");

    // Grow the component through everything that is not true seam.
    std::vector<char> in_comp(nv, 0);
    std::vector<char> is_seam(nv, 0);
    for (int v : dbl.seam) is_seam[v] = 1;
    auto adj = vertex_adjacency(dbl.mesh);
    std::queue<int> bfs;
    for (int v = 0; v < nv; ++v)
        if (labels[v] == component) {
            in_comp[v] = 1;
            bfs.push(v);
        }
    if (bfs.empty()) throw Error("rebuild_sheet_mesh: empty component");
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop();
        for (int u : adj[v]) {
            if (is_seam[u] || in_comp[u]) continue;
            in_comp[u] = 1;
            bfs.push(u);
        }
    }

    SurfaceMesh out;
    int nv_src = 0;
    for (int v : dbl.projection) nv_src = std::max(nv_src, v + 1);
    out.vertices.resize(nv_src);
    for (int v = 0; v < nv; ++v) out.vertices[dbl.projection[v]] = dbl.mesh.vertices[v];

    int sheet = 0;
    for (int t = 0; t < dbl.mesh.num_triangles(); ++t) {
        const auto& tri = dbl.mesh.triangles[t];
        bool all_in = true, any_comp = false;
        for (int k = 0; k < 3; ++k) {
            if (!in_comp[tri[k]] && !is_seam[tri[k]]) all_in = false;
            if (in_comp[tri[k]]) any_comp = true;
        }
        if (!all_in || !any_comp) continue;
        if (sheet == 0) sheet = dbl.sheet_sign[t];
        int a = dbl.projection[tri[0]], b = dbl.projection[tri[1]], c = dbl.projection[tri[2]];
        const Metric2& g = dbl.mesh.metric[t];
        if (dbl.sheet_sign[t] > 0) {
            out.triangles.push_back({a, b, c});
            out.metric.push_back(g);
        } else {
            out.triangles.push_back({a, c, b});
            out.metric.push_back(Metric2{g.g22, g.g12, g.g11});
        }
    }

    auto loops = extract_boundary_loops(out.triangles);
    int g0_base = dbl.projection[dbl.mesh.gamma0()[0]];
    std::vector<std::vector<int>> ordered;
    for (auto& lp : loops)
        if (std::find(lp.begin(), lp.end(), g0_base) != lp.end()) ordered.push_back(lp);
    if (ordered.size() != 1) throw TopologyError("rebuild_sheet_mesh: gamma0 loop not found");
    // Align the base vertex and direction with the source Gamma0 ordering.
    {
        auto& lp = ordered[0];
        auto it = std::find(lp.begin(), lp.end(), g0_base);
        std::rotate(lp.begin(), it, lp.end());
        const auto& src = dbl.mesh.gamma0();
        if (lp.size() > 1 && src.size() > 1 &&
            lp[1] != dbl.projection[src[1]]) {
            std::reverse(lp.begin() + 1, lp.end());
        }
    }
    for (auto& lp : loops)
        if (std::find(lp.begin(), lp.end(), g0_base) == lp.end()) ordered.push_back(lp);
    out.boundary_loops = std::move(ordered);
    out.gamma0_index = 0;
    out.rotation_orientation = dbl.mesh.rotation_orientation;
    return out;
}

} // namespace eit
