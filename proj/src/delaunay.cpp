#include "eitsurf/delaunay.hpp"
#include "eitsurf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eit {

namespace {

struct Tri {
    int v[3];       // CCW vertex indices
    int nbr[3];     // nbr[k] shares the edge opposite v[k]; -1 on hull
    bool alive = true;
};

// orient2d > 0 when c lies strictly left of a->b, with a relative guard
// against roundoff on nearly collinear triples.
double orient2d(const std::array<double, 2>& a, const std::array<double, 2>& b,
                const std::array<double, 2>& c) {
    double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    double mag = std::abs((b[0] - a[0]) * (c[1] - a[1])) +
                 std::abs((b[1] - a[1]) * (c[0] - a[0]));
    if (std::abs(det) <= 1e-14 * mag) return 0.0;
    return det;
}

// incircle > 0 when p is strictly inside the circumcircle of CCW (a,b,c).
double incircle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                const std::array<double, 2>& c, const std::array<double, 2>& p) {
    double ax = a[0] - p[0], ay = a[1] - p[1];
    double bx = b[0] - p[0], by = b[1] - p[1];
    double cx = c[0] - p[0], cy = c[1] - p[1];
    double a2 = ax * ax + ay * ay;
    double b2 = bx * bx + by * by;
    double c2 = cx * cx + cy * cy;
    double det = a2 * (bx * cy - by * cx) - b2 * (ax * cy - ay * cx) +
                 c2 * (ax * by - ay * bx);
    double mag = std::abs(a2 * bx * cy) + std::abs(a2 * by * cx) +
                 std::abs(b2 * ax * cy) + std::abs(b2 * ay * cx) +
                 std::abs(c2 * ax * by) + std::abs(c2 * ay * bx);
    if (std::abs(det) <= 1e-12 * mag) return 0.0;
    return det;
}

class Triangulator {
public:
    explicit Triangulator(const std::vector<std::array<double, 2>>& pts) : pts_(pts) {}

    std::vector<std::array<int, 3>> run() {
        const int n = static_cast<int>(pts_.size());
        if (n < 3) throw MeshError("delaunay: need at least 3 points");

        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : pts_) {
            lo = std::min({lo, p[0], p[1]});
            hi = std::max({hi, p[0], p[1]});
        }
        double span = std::max(hi - lo, 1.0);
        double cx = (lo + hi) / 2, cy = (lo + hi) / 2, r = 20.0 * span;
        int s0 = n, s1 = n + 1, s2 = n + 2, s3 = n + 3;
        pts_.push_back({cx - r, cy - r});
        pts_.push_back({cx + r, cy - r});
        pts_.push_back({cx + r, cy + r});
        pts_.push_back({cx - r, cy + r});
        tris_.push_back({{s0, s1, s2}, {-1, 1, -1}, true});
        tris_.push_back({{s0, s2, s3}, {-1, -1, 0}, true});

        // Insert in grid-sorted order so the walk starts near its target.
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        int cells = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n))));
        auto cell_of = [&](int i) {
            int gx = static_cast<int>((pts_[i][0] - lo) / span * cells);
            int gy = static_cast<int>((pts_[i][1] - lo) / span * cells);
            gx = std::clamp(gx, 0, cells - 1);
            gy = std::clamp(gy, 0, cells - 1);
            return (gy % 2 == 0) ? gy * cells + gx : gy * cells + (cells - 1 - gx);
        };
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return cell_of(a) < cell_of(b); });

        int last = 0;
        for (int idx : order) last = insert(idx, last);

        std::vector<std::array<int, 3>> out;
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
            out.push_back({t.v[0], t.v[1], t.v[2]});
        }
        return out;
    }

private:
    std::vector<std::array<double, 2>> pts_;
    std::vector<Tri> tris_;

    int locate(int p, int start) const {
        int cur = start;
        int steps = 0;
        const int max_steps = static_cast<int>(tris_.size()) + 8;
        while (true) {
            if (!tris_[cur].alive) {
                cur = first_alive();
                continue;
            }
            const Tri& t = tris_[cur];
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                int a = t.v[(k + 1) % 3], b = t.v[(k + 2) % 3];
                if (orient2d(pts_[a], pts_[b], pts_[p]) < 0.0) {
                    next = t.nbr[k];
                    break;
                }
            }
            if (next == -1) return cur;
            cur = next;
            if (++steps > max_steps) return scan(p);
        }
    }

    int first_alive() const {
        for (size_t i = 0; i < tris_.size(); ++i)
            if (tris_[i].alive) return static_cast<int>(i);
        throw MeshError("delaunay: no triangles");
    }

    int scan(int p) const {
        for (size_t i = 0; i < tris_.size(); ++i) {
            if (!tris_[i].alive) continue;
            const Tri& t = tris_[i];
            bool inside = true;
            for (int k = 0; k < 3; ++k) {
                int a = t.v[(k + 1) % 3], b = t.v[(k + 2) % 3];
                if (orient2d(pts_[a], pts_[b], pts_[p]) < 0.0) inside = false;
            }
            if (inside) return static_cast<int>(i);
        }
        throw MeshError("delaunay: point location failed");
    }

    int neighbor_index(int t, int nb) const {
        for (int k = 0; k < 3; ++k)
            if (tris_[t].nbr[k] == nb) return k;
        return -1;
    }

    int insert(int p, int hint) {
        int seed = locate(p, hint);

        // Cavity: triangles whose circumcircles strictly contain p, grown by
        // BFS from the containing triangle. Ties (incircle == 0) stay outside.
        std::vector<int> cavity{seed};
        std::vector<char> in_cavity(tris_.size(), 0);
        in_cavity[seed] = 1;
        for (size_t head = 0; head < cavity.size(); ++head) {
            const Tri t = tris_[cavity[head]];
            for (int k = 0; k < 3; ++k) {
                int nb = t.nbr[k];
                if (nb < 0 || in_cavity[nb]) continue;
                const Tri& u = tris_[nb];
                if (incircle(pts_[u.v[0]], pts_[u.v[1]], pts_[u.v[2]], pts_[p]) > 0.0) {
                    in_cavity[nb] = 1;
                    cavity.push_back(nb);
                }
            }
        }

        // Shrink until every cavity boundary edge is strictly visible from p;
        // the seed triangle always remains.
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t ci = 0; ci < cavity.size(); ++ci) {
                int ti = cavity[ci];
                if (!in_cavity[ti]) continue;
                const Tri& t = tris_[ti];
                for (int k = 0; k < 3; ++k) {
                    int nb = t.nbr[k];
                    bool bdry = (nb < 0) || !in_cavity[nb];
                    if (!bdry) continue;
                    int a = t.v[(k + 1) % 3], b = t.v[(k + 2) % 3];
                    if (orient2d(pts_[a], pts_[b], pts_[p]) <= 0.0 && ti != seed) {
                        in_cavity[ti] = 0;
                        changed = true;
                        break;
                    }
                }
            }
        }
        std::vector<int> final_cavity;
        for (int ti : cavity)
            if (in_cavity[ti]) final_cavity.push_back(ti);

        // Collect boundary edges (a,b) with the outside neighbor.
        struct BEdge {
            int a, b, outside;
        };
        std::vector<BEdge> ring;
        for (int ti : final_cavity) {
            const Tri& t = tris_[ti];
            for (int k = 0; k < 3; ++k) {
                int nb = t.nbr[k];
                if (nb >= 0 && in_cavity[nb]) continue;
                ring.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], nb});
            }
        }
        for (int ti : final_cavity) tris_[ti].alive = false;

        // Fan new triangles (a, b, p) and stitch neighbor links.
        std::vector<int> fresh;
        fresh.reserve(ring.size());
        for (const auto& e : ring) {
            Tri nt;
            nt.v[0] = e.a;
            nt.v[1] = e.b;
            nt.v[2] = p;
            nt.nbr[0] = -1;  // across (b,p), set below
            nt.nbr[1] = -1;  // across (p,a), set below
            nt.nbr[2] = e.outside;
            int id = static_cast<int>(tris_.size());
            tris_.push_back(nt);
            fresh.push_back(id);
            if (e.outside >= 0) {
                int k = neighbor_index_edge(e.outside, e.b, e.a);
                tris_[e.outside].nbr[k] = id;
            }
        }
        // Link fan triangles by shared vertices (edge (b,p) of one is (p,a) of the next).
        for (int i : fresh) {
            for (int j : fresh) {
                if (i == j) continue;
                if (tris_[i].v[1] == tris_[j].v[0]) tris_[i].nbr[0] = j;  // edge (b,p)
                if (tris_[i].v[0] == tris_[j].v[1]) tris_[i].nbr[1] = j;  // edge (p,a)
            }
        }
        return fresh.empty() ? first_alive() : fresh.front();
    }

    // Index k of triangle t such that edge opposite v[k] equals (a,b) in some order.
    int neighbor_index_edge(int t, int a, int b) const {
        for (int k = 0; k < 3; ++k) {
            int u = tris_[t].v[(k + 1) % 3], w = tris_[t].v[(k + 2) % 3];
            if ((u == a && w == b) || (u == b && w == a)) return k;
        }
        throw MeshError("delaunay: broken adjacency");
    }
};

} // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(
    const std::vector<std::array<double, 2>>& points) {
    Triangulator t(points);
    return t.run();
}

} // namespace eit
