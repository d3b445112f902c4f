#include "eitsurf/synthetic.hpp"
#include "eitsurf/delaunay.hpp"
#include "eitsurf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace eit {

namespace {

constexpr double kPi = std::numbers::pi;

using P2 = std::array<double, 2>;

struct Scatter {
    std::vector<P2> points;
    int n_rings = 0;             // ring points occupy indices [0, n_rings)
    std::vector<int> ring_loop;  // loop id per ring point (0 = outer)
};

bool inside_domain(const P2& p, const std::vector<Hole>& holes, double margin) {
    double rr = p[0] * p[0] + p[1] * p[1];
    if (rr >= (1.0 - margin) * (1.0 - margin)) return false;
    for (const auto& h : holes) {
        double dx = p[0] - h.cx, dy = p[1] - h.cy;
        double keep = h.r + margin;
        if (dx * dx + dy * dy <= keep * keep) return false;
    }
    return true;
}

Scatter scatter_points(const std::vector<Hole>& holes, double h) {
    Scatter sc;
    // Outer ring, exactly on the unit circle, uniform in angle.
    int n0 = std::max(16, static_cast<int>(std::llround(2.0 * kPi / h)));
    for (int i = 0; i < n0; ++i) {
        double a = 2.0 * kPi * i / n0;
        sc.points.push_back({std::cos(a), std::sin(a)});
        sc.ring_loop.push_back(0);
    }
    // Hole rings.
    for (size_t j = 0; j < holes.size(); ++j) {
        const Hole& hj = holes[j];
        int nj = std::max(12, static_cast<int>(std::llround(2.0 * kPi * hj.r / h)));
        for (int i = 0; i < nj; ++i) {
            double a = 2.0 * kPi * i / nj;
            sc.points.push_back({hj.cx + hj.r * std::cos(a), hj.cy + hj.r * std::sin(a)});
            sc.ring_loop.push_back(static_cast<int>(j) + 1);
        }
    }
    sc.n_rings = static_cast<int>(sc.points.size());

    // Hexagonal interior lattice with a standoff band near all boundaries.
    // A deterministic sub-h jitter breaks lattice cocircularities.
    double dy = h * std::sqrt(3.0) / 2.0;
    int rows = static_cast<int>(2.2 / dy) + 2;
    int idx = 0;
    for (int ry = -rows; ry <= rows; ++ry) {
        double y = ry * dy;
        double x0 = (ry % 2 == 0) ? 0.0 : h / 2.0;
        int cols = static_cast<int>(2.2 / h) + 2;
        for (int rx = -cols; rx <= cols; ++rx) {
            double x = x0 + rx * h;
            ++idx;
            double jx = 0.005 * h * std::sin(12.9898 * idx + 0.7);
            double jy = 0.005 * h * std::sin(78.233 * idx + 1.3);
            P2 p{x + jx, y + jy};
            if (inside_domain(p, holes, 0.55 * h)) sc.points.push_back(p);
        }
    }
    return sc;
}

bool centroid_in_domain(const P2& a, const P2& b, const P2& c,
                        const std::vector<Hole>& holes) {
    P2 g{(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0};
    double rr = g[0] * g[0] + g[1] * g[1];
    if (rr >= 1.0) return false;
    for (const auto& h : holes) {
        double dx = g[0] - h.cx, dy = g[1] - h.cy;
        if (dx * dx + dy * dy <= h.r * h.r) return false;
    }
    return true;
}

std::vector<std::array<int, 3>> triangulate_domain(const std::vector<P2>& pts,
                                                   const std::vector<Hole>& holes) {
    auto tris = delaunay_triangulate(pts);
    std::vector<std::array<int, 3>> kept;
    kept.reserve(tris.size());
    for (const auto& t : tris)
        if (centroid_in_domain(pts[t[0]], pts[t[1]], pts[t[2]], holes)) kept.push_back(t);
    return kept;
}

void smooth_interior(std::vector<P2>& pts, int n_rings,
                     const std::vector<std::array<int, 3>>& tris) {
    std::vector<std::set<int>> nbrs(pts.size());
    for (const auto& t : tris) {
        for (int k = 0; k < 3; ++k) {
            nbrs[t[k]].insert(t[(k + 1) % 3]);
            nbrs[t[k]].insert(t[(k + 2) % 3]);
        }
    }
    std::vector<P2> next = pts;
    for (size_t v = n_rings; v < pts.size(); ++v) {
        if (nbrs[v].empty()) continue;
        double sx = 0, sy = 0;
        for (int u : nbrs[v]) {
            sx += pts[u][0];
            sy += pts[u][1];
        }
        next[v] = {sx / nbrs[v].size(), sy / nbrs[v].size()};
    }
    pts = next;
}

double loop_signed_area(const std::vector<int>& loop, const std::vector<P2>& pts) {
    double a = 0.0;
    int n = static_cast<int>(loop.size());
    for (int i = 0; i < n; ++i) {
        const P2& p = pts[loop[i]];
        const P2& q = pts[loop[(i + 1) % n]];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return a / 2.0;
}

void rotate_to_base_vertex(std::vector<int>& loop, const std::vector<P2>& pts) {
    // Base vertex: rightmost relative to the loop centroid (least index on ties).
    double cx = 0, cy = 0;
    for (int v : loop) {
        cx += pts[v][0];
        cy += pts[v][1];
    }
    cx /= loop.size();
    cy /= loop.size();
    int best = 0;
    for (size_t i = 1; i < loop.size(); ++i) {
        double di = pts[loop[i]][0] - cx, db = pts[loop[best]][0] - cx;
        if (di > db + 1e-15 || (std::abs(di - db) <= 1e-15 && loop[i] < loop[best]))
            best = static_cast<int>(i);
    }
    std::rotate(loop.begin(), loop.begin() + best, loop.end());
}

} // namespace

std::vector<Hole> DomainDescriptor::resolved_holes() const {
    switch (kind) {
        case Kind::Disk:
            return {};
        case Kind::Annulus:
            return {Hole{0.0, 0.0, annulus_r}};
        case Kind::Holes:
            return holes;
    }
    return {};
}

SurfaceMesh build_synthetic(const DomainDescriptor& desc) {
    double h = desc.target_h;
    if (!(h > 0.0) || h > 0.4)
        throw MeshError("degenerate target edge length " + std::to_string(h));
    if (desc.kind == DomainDescriptor::Kind::Annulus &&
        !(desc.annulus_r > 0.0 && desc.annulus_r < 1.0))
        throw MeshError("annulus radius must lie in (0,1)");

    const std::vector<Hole> holes = desc.resolved_holes();
    for (size_t i = 0; i < holes.size(); ++i) {
        const Hole& a = holes[i];
        if (!(a.r > 0.0)) throw MeshError("non-positive hole radius");
        double d0 = std::hypot(a.cx, a.cy);
        if (d0 + a.r >= 1.0 - 2.0 * h)
            throw MeshError("hole touches or leaves the unit disk");
        for (size_t j = i + 1; j < holes.size(); ++j) {
            const Hole& b = holes[j];
            double d = std::hypot(a.cx - b.cx, a.cy - b.cy);
            if (d <= a.r + b.r + 2.0 * h) throw MeshError("overlapping holes");
        }
    }

    Scatter sc = scatter_points(holes, h);
    auto tris = triangulate_domain(sc.points, holes);
    for (int pass = 0; pass < 4; ++pass) {
        smooth_interior(sc.points, sc.n_rings, tris);
        tris = triangulate_domain(sc.points, holes);
    }

    // Compact to used vertices.
    std::vector<int> remap(sc.points.size(), -1);
    std::vector<P2> pts;
    std::vector<std::array<int, 3>> out_tris;
    for (const auto& t : tris) {
        std::array<int, 3> nt;
        for (int k = 0; k < 3; ++k) {
            if (remap[t[k]] < 0) {
                remap[t[k]] = static_cast<int>(pts.size());
                pts.push_back(sc.points[t[k]]);
            }
            nt[k] = remap[t[k]];
        }
        out_tris.push_back(nt);
    }

    auto loops = extract_boundary_loops(out_tris);
    if (loops.size() != holes.size() + 1)
        throw MeshError("loop extraction found " + std::to_string(loops.size()) +
                        " loops, expected " + std::to_string(holes.size() + 1));

    // Outer loop = largest |signed area|; hole loops matched to descriptor order.
    size_t outer = 0;
    double best = -1.0;
    for (size_t l = 0; l < loops.size(); ++l) {
        double a = std::abs(loop_signed_area(loops[l], pts));
        if (a > best) {
            best = a;
            outer = l;
        }
    }
    std::vector<std::vector<int>> ordered;
    ordered.push_back(loops[outer]);
    for (const auto& hj : holes) {
        int bestl = -1;
        double bestd = 1e30;
        for (size_t l = 0; l < loops.size(); ++l) {
            if (l == outer) continue;
            double cx = 0, cy = 0;
            for (int v : loops[l]) {
                cx += pts[v][0];
                cy += pts[v][1];
            }
            cx /= loops[l].size();
            cy /= loops[l].size();
            double d = std::hypot(cx - hj.cx, cy - hj.cy);
            if (d < bestd) {
                bestd = d;
                bestl = static_cast<int>(l);
            }
        }
        ordered.push_back(loops[bestl]);
    }
    for (auto& lp : ordered) rotate_to_base_vertex(lp, pts);

    SurfaceMesh mesh;
    mesh.vertices.reserve(pts.size());
    for (const auto& p : pts) mesh.vertices.push_back(Vec3(p[0], p[1], 0.0));
    mesh.triangles = std::move(out_tris);
    mesh.boundary_loops = std::move(ordered);
    mesh.gamma0_index = 0;
    mesh.rotation_orientation = +1;

    mesh.metric.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        Metric2 g = mesh.induced_metric(t);
        const auto& tri = mesh.triangles[t];
        double cx = (pts[tri[0]][0] + pts[tri[1]][0] + pts[tri[2]][0]) / 3.0;
        double cy = (pts[tri[0]][1] + pts[tri[1]][1] + pts[tri[2]][1]) / 3.0;
        if (desc.metric_field) {
            auto a = desc.metric_field(cx, cy);
            // Pull the xy tensor back to the edge frame: G = J^T A J.
            Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
            Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
            Eigen::Matrix2d A;
            A << a[0], a[1], a[1], a[2];
            Eigen::Matrix2d J;
            J << e1.x(), e2.x(), e1.y(), e2.y();
            Eigen::Matrix2d G = J.transpose() * A * J;
            g = Metric2{G(0, 0), G(0, 1), G(1, 1)};
        } else if (desc.conformal_factor) {
            double rho = desc.conformal_factor(cx, cy);
            if (!(rho > 0.0)) throw MeshError("conformal factor must be positive");
            g.g11 *= rho;
            g.g12 *= rho;
            g.g22 *= rho;
        }
        mesh.metric[t] = g;
    }

    auto diag = validate_mesh(mesh);
    if (!diag.ok())
        throw MeshError("generated mesh failed validation: " + diag.violations.front().what);
    return mesh;
}

} // namespace eit
