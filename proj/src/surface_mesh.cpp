#include "eitsurf/surface_mesh.hpp"
#include "eitsurf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace eit {

Metric2 SurfaceMesh::induced_metric(int t) const {
    const auto& tri = triangles[t];
    Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    Metric2 g;
    g.g11 = e1.dot(e1);
    g.g12 = e1.dot(e2);
    g.g22 = e2.dot(e2);
    return g;
}

int SurfaceMesh::euler_characteristic() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    }
    return num_vertices() - static_cast<int>(edges.size()) + num_triangles();
}

double SurfaceMesh::edge_length(int a, int b) const {
    // Locate a triangle containing the edge and express (b-a) in its frame.
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = triangles[t];
        int ia = -1, ib = -1;
        for (int k = 0; k < 3; ++k) {
            if (tri[k] == a) ia = k;
            if (tri[k] == b) ib = k;
        }
        if (ia < 0 || ib < 0) continue;
        // Coefficients of (p_b - p_a) in the frame (e1, e2) at vertex 0:
        // vertex k has frame coordinates (0,0), (1,0), (0,1) for k = 0,1,2.
        static const double coord[3][2] = {{0, 0}, {1, 0}, {0, 1}};
        double c1 = coord[ib][0] - coord[ia][0];
        double c2 = coord[ib][1] - coord[ia][1];
        const Metric2& g = metric[t];
        double q = c1 * c1 * g.g11 + 2.0 * c1 * c2 * g.g12 + c2 * c2 * g.g22;
        return std::sqrt(std::max(q, 0.0));
    }
    throw MeshError("edge_length: edge (" + std::to_string(a) + "," +
                    std::to_string(b) + ") not found in any triangle");
}

double SurfaceMesh::loop_length(int loop) const {
    const auto& lp = boundary_loops[loop];
    double len = 0.0;
    int n = static_cast<int>(lp.size());
    for (int i = 0; i < n; ++i) len += edge_length(lp[i], lp[(i + 1) % n]);
    return len;
}

double SurfaceMesh::triangle_area(int t) const {
    return 0.5 * std::sqrt(std::max(metric[t].det(), 0.0));
}

std::vector<char> SurfaceMesh::boundary_vertex_mask() const {
    std::vector<char> mask(num_vertices(), 0);
    for (const auto& lp : boundary_loops)
        for (int v : lp) mask[v] = 1;
    return mask;
}

uint64_t SurfaceMesh::fingerprint() const {
    // FNV-1a over the combinatorial and geometric payload.
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, size_t n) {
        const unsigned char* c = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= c[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& v : vertices) mix(v.data(), 3 * sizeof(double));
    for (const auto& t : triangles) mix(t.data(), 3 * sizeof(int));
    for (const auto& m : metric) mix(&m, sizeof(Metric2));
    int nl = num_loops();
    mix(&nl, sizeof(int));
    mix(&gamma0_index, sizeof(int));
    return h;
}

// ---------------------------------------------------------------------------

MeshDiagnostics validate_mesh(const SurfaceMesh& mesh, double eps_g) {
    MeshDiagnostics d;
    d.loop_count = mesh.num_loops();

    if (mesh.triangles.size() != mesh.metric.size())
        d.violations.push_back({"metric count does not match triangle count"});

    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (!mesh.vertices[v].allFinite()) {
            d.violations.push_back({"non-finite vertex position at " + std::to_string(v)});
            break;
        }

    // Directed edge census: every undirected edge must carry one or two
    // directed copies, and two copies must run in opposite directions.
    std::map<std::pair<int, int>, int> directed;
    bool index_ok = true;
    for (const auto& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= mesh.num_vertices()) index_ok = false;
            int a = t[k], b = t[(k + 1) % 3];
            directed[{a, b}] += 1;
        }
    }
    if (!index_ok) d.violations.push_back({"triangle vertex index out of range"});

    bool orient_ok = true;
    std::set<std::pair<int, int>> boundary_edges;
    for (const auto& [e, cnt] : directed) {
        auto rev = directed.find({e.second, e.first});
        int rcnt = rev == directed.end() ? 0 : rev->second;
        if (cnt > 1) {
            orient_ok = false;  // same directed edge twice: flipped triangle
        } else if (rcnt == 0) {
            boundary_edges.insert(e);
        }
        if (cnt + rcnt > 2)
            d.violations.push_back({"edge shared by more than two triangles"});
    }
    d.orientation_consistent = orient_ok;
    if (!orient_ok)
        d.violations.push_back({"inconsistent triangle orientation (duplicated directed edge)"});

    // Boundary loops must partition the boundary edges as simple disjoint cycles.
    std::set<std::pair<int, int>> loop_edges;
    std::set<int> loop_vertices;
    bool loops_disjoint = true;
    for (const auto& lp : mesh.boundary_loops) {
        int n = static_cast<int>(lp.size());
        if (n < 3) d.violations.push_back({"boundary loop with fewer than 3 vertices"});
        for (int i = 0; i < n; ++i) {
            if (!loop_vertices.insert(lp[i]).second) loops_disjoint = false;
            loop_edges.insert({lp[i], lp[(i + 1) % n]});
        }
    }
    if (!loops_disjoint)
        d.violations.push_back({"boundary loops are not disjoint simple cycles"});
    if (orient_ok && index_ok) {
        for (const auto& e : boundary_edges) {
            if (!loop_edges.count(e) && !loop_edges.count({e.second, e.first}))
                d.violations.push_back({"boundary edge (" + std::to_string(e.first) + "," +
                                        std::to_string(e.second) + ") not covered by any loop"});
        }
        if (loop_edges.size() != boundary_edges.size())
            d.violations.push_back({"loop edge count differs from boundary edge count"});
    }

    if (mesh.gamma0_index < 0 || mesh.gamma0_index >= mesh.num_loops())
        d.violations.push_back({"gamma0 index out of range"});
    if (mesh.rotation_orientation != 1 && mesh.rotation_orientation != -1)
        d.violations.push_back({"rotation orientation must be +1 or -1"});

    // Metric SPD bounds and triangle quality.
    double emin = std::numeric_limits<double>::infinity();
    double emax = 0.0;
    double qmin = std::numeric_limits<double>::infinity();
    bool spd_ok = true;
    for (size_t t = 0; t < mesh.metric.size(); ++t) {
        const Metric2& g = mesh.metric[t];
        double tr = g.g11 + g.g22;
        double det = g.det();
        double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
        double l1 = tr / 2.0 - disc, l2 = tr / 2.0 + disc;
        emin = std::min(emin, l1);
        emax = std::max(emax, l2);
        if (!(l1 >= eps_g && l2 <= 1.0 / eps_g)) spd_ok = false;

        // Quality from metric edge lengths: 2 r_in / r_circ = (b+c-a)(c+a-b)(a+b-c)/(abc).
        double a = std::sqrt(std::max(g.g11, 0.0));
        double b = std::sqrt(std::max(g.g22, 0.0));
        double cc = std::sqrt(std::max(g.g11 - 2 * g.g12 + g.g22, 0.0));
        double denom = a * b * cc;
        double q = denom > 0 ? (b + cc - a) * (cc + a - b) * (a + b - cc) / denom : 0.0;
        qmin = std::min(qmin, q);
    }
    d.metric_eig_min = emin;
    d.metric_eig_max = emax;
    d.min_triangle_quality = mesh.metric.empty() ? 0.0 : qmin;
    if (!spd_ok)
        d.violations.push_back({"metric tensor outside SPD eigenvalue bounds"});

    return d;
}

std::vector<std::vector<int>> extract_boundary_loops(
    const std::vector<std::array<int, 3>>& triangles) {
    std::set<std::pair<int, int>> directed;
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k) directed.insert({t[k], t[(k + 1) % 3]});

    std::map<int, int> next;
    for (const auto& e : directed) {
        if (!directed.count({e.second, e.first})) {
            if (next.count(e.first))
                throw MeshError("boundary is not a union of simple cycles");
            next[e.first] = e.second;
        }
    }
    std::vector<std::vector<int>> loops;
    std::set<int> used;
    for (const auto& [start, ignored] : next) {
        (void)ignored;
        if (used.count(start)) continue;
        std::vector<int> loop;
        int v = start;
        do {
            loop.push_back(v);
            used.insert(v);
            auto it = next.find(v);
            if (it == next.end()) throw MeshError("open boundary chain");
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }
    return loops;
}

// ---------------------------------------------------------------------------
// SURF2 format
//   SURF2 <nv> <nt> <nloops>
//   v x y z
//   t i j k
//   m tri g11 g12 g22        (optional; absent records mean induced metric)
//   loop id v0 v1 ...
//   gamma0 id

void write_surf2(const SurfaceMesh& mesh, std::ostream& out) {
    char buf[128];
    out << "SURF2 " << mesh.num_vertices() << " " << mesh.num_triangles() << " "
        << mesh.num_loops() << "\n";
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& t : mesh.triangles)
        out << "t " << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Metric2& g = mesh.metric[t];
        std::snprintf(buf, sizeof buf, "m %d %.17g %.17g %.17g\n", t, g.g11, g.g12, g.g22);
        out << buf;
    }
    for (int l = 0; l < mesh.num_loops(); ++l) {
        out << "loop " << l;
        for (int v : mesh.boundary_loops[l]) out << " " << v;
        out << "\n";
    }
    out << "gamma0 " << mesh.gamma0_index << "\n";
}

void write_surf2_file(const SurfaceMesh& mesh, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    write_surf2(mesh, f);
}

SurfaceMesh read_surf2(std::istream& in) {
    SurfaceMesh mesh;
    std::string line;
    long lineno = 0;
    int nv = -1, nt = -1, nloops = -1;
    bool header_seen = false;
    std::vector<char> metric_set;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag.empty()) continue;
        if (!header_seen) {
            if (tag != "SURF2") throw IoError("expected SURF2 header", lineno);
            if (!(ss >> nv >> nt >> nloops) || nv < 0 || nt < 0 || nloops < 0)
                throw IoError("malformed SURF2 header", lineno);
            header_seen = true;
            mesh.vertices.reserve(nv);
            mesh.triangles.reserve(nt);
            metric_set.assign(nt, 0);
            continue;
        }
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) throw IoError("malformed vertex record", lineno);
            mesh.vertices.push_back(Vec3(x, y, z));
        } else if (tag == "t") {
            int i, j, k;
            if (!(ss >> i >> j >> k)) throw IoError("malformed triangle record", lineno);
            mesh.triangles.push_back({i, j, k});
        } else if (tag == "m") {
            int t;
            Metric2 g;
            if (!(ss >> t >> g.g11 >> g.g12 >> g.g22))
                throw IoError("malformed metric record", lineno);
            if (t < 0 || t >= nt) throw IoError("metric record for unknown triangle", lineno);
            if (mesh.metric.empty()) mesh.metric.resize(nt);
            mesh.metric[t] = g;
            metric_set[t] = 1;
        } else if (tag == "loop") {
            int id;
            if (!(ss >> id)) throw IoError("malformed loop record", lineno);
            if (id != static_cast<int>(mesh.boundary_loops.size()))
                throw IoError("loop records out of order", lineno);
            std::vector<int> lp;
            int v;
            while (ss >> v) lp.push_back(v);
            if (lp.empty()) throw IoError("empty loop record", lineno);
            mesh.boundary_loops.push_back(std::move(lp));
        } else if (tag == "gamma0") {
            if (!(ss >> mesh.gamma0_index)) throw IoError("malformed gamma0 record", lineno);
        } else {
            throw IoError("unknown record '" + tag + "'", lineno);
        }
    }
    if (!header_seen) throw IoError("missing SURF2 header");
    if (mesh.num_vertices() != nv) throw IoError("vertex count mismatch with header");
    if (mesh.num_triangles() != nt) throw IoError("triangle count mismatch with header");
    if (mesh.num_loops() != nloops) throw IoError("loop count mismatch with header");

    if (mesh.metric.empty()) {
        mesh.metric.resize(nt);
        for (int t = 0; t < nt; ++t) mesh.metric[t] = mesh.induced_metric(t);
    } else {
        for (int t = 0; t < nt; ++t)
            if (!metric_set[t]) mesh.metric[t] = mesh.induced_metric(t);
    }
    return mesh;
}

SurfaceMesh read_surf2_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    return read_surf2(f);
}

} // namespace eit
