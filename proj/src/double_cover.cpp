#include "eitsurf/double_cover.hpp"
#include "eitsurf/errors.hpp"

#include <algorithm>

namespace eit {

bool DoubledSurface::on_seam(int v) const {
    return std::binary_search(seam.begin(), seam.end(), v);
}

DoubledSurface double_cover(const SurfaceMesh& src) {
    if (src.num_holes() < 1)
        throw MeshError("double_cover: nothing to glue (no inner boundary)");

    const int nv = src.num_vertices();
    std::vector<char> seam_mask(nv, 0);
    for (int l = 0; l < src.num_loops(); ++l) {
        if (l == src.gamma0_index) continue;
        for (int v : src.boundary_loops[l]) seam_mask[v] = 1;
    }

    DoubledSurface d;
    // Sheet+ keeps the source vertex ids; non-seam vertices get a second copy.
    std::vector<int> minus_id(nv, -1);
    d.mesh.vertices = src.vertices;
    d.projection.resize(nv);
    for (int v = 0; v < nv; ++v) d.projection[v] = v;
    for (int v = 0; v < nv; ++v) {
        if (seam_mask[v]) {
            minus_id[v] = v;
        } else {
            minus_id[v] = static_cast<int>(d.mesh.vertices.size());
            d.mesh.vertices.push_back(src.vertices[v]);
            d.projection.push_back(v);
        }
    }
    d.involution.resize(d.mesh.vertices.size());
    for (int v = 0; v < nv; ++v) {
        d.involution[v] = minus_id[v];
        if (minus_id[v] != v) d.involution[minus_id[v]] = v;
    }
    for (int v = 0; v < nv; ++v)
        if (seam_mask[v]) d.seam.push_back(v);
    std::sort(d.seam.begin(), d.seam.end());

    const int nt = src.num_triangles();
    d.mesh.triangles.reserve(2 * nt);
    d.mesh.metric.reserve(2 * nt);
    d.sheet_sign.reserve(2 * nt);
    d.tri_source.reserve(2 * nt);
    d.tri_tau.resize(2 * nt);
    for (int t = 0; t < nt; ++t) {
        d.mesh.triangles.push_back(src.triangles[t]);
        d.mesh.metric.push_back(src.metric[t]);
        d.sheet_sign.push_back(+1);
        d.tri_source.push_back(t);
    }
    for (int t = 0; t < nt; ++t) {
        const auto& tri = src.triangles[t];
        // Reversed copy (i,k,j): the frame swaps (e1,e2), so the pushforward
        // metric is the entry swap of the source tensor -- exact.
        d.mesh.triangles.push_back(
            {minus_id[tri[0]], minus_id[tri[2]], minus_id[tri[1]]});
        const Metric2& g = src.metric[t];
        d.mesh.metric.push_back(Metric2{g.g22, g.g12, g.g11});
        d.sheet_sign.push_back(-1);
        d.tri_source.push_back(t);
        d.tri_tau[t] = nt + t;
        d.tri_tau[nt + t] = t;
    }

    // Boundary: Gamma0+ keeps the source order; Gamma0- runs reversed from
    // the image of the base vertex (induced orientation of the other sheet).
    const auto& g0 = src.gamma0();
    d.mesh.boundary_loops.push_back(g0);
    std::vector<int> g0m;
    g0m.reserve(g0.size());
    g0m.push_back(minus_id[g0[0]]);
    for (int i = static_cast<int>(g0.size()) - 1; i >= 1; --i)
        g0m.push_back(minus_id[g0[i]]);
    d.mesh.boundary_loops.push_back(std::move(g0m));
    d.mesh.gamma0_index = 0;
    d.mesh.rotation_orientation = src.rotation_orientation;
    return d;
}

SurfaceMesh extract_sheet(const DoubledSurface& dbl, int sign) {
    if (sign != 1 && sign != -1) throw MeshError("extract_sheet: sign must be +1/-1");
    SurfaceMesh out;
    // The projection maps each sheet bijectively onto the source vertex set.
    int nv_src = 0;
    for (int v : dbl.projection) nv_src = std::max(nv_src, v + 1);
    out.vertices.resize(nv_src);
    for (int v = 0; v < dbl.mesh.num_vertices(); ++v)
        out.vertices[dbl.projection[v]] = dbl.mesh.vertices[v];

    for (int t = 0; t < dbl.mesh.num_triangles(); ++t) {
        if (dbl.sheet_sign[t] != sign) continue;
        const auto& tri = dbl.mesh.triangles[t];
        int a = dbl.projection[tri[0]], b = dbl.projection[tri[1]], c = dbl.projection[tri[2]];
        const Metric2& g = dbl.mesh.metric[t];
        if (sign == +1) {
            out.triangles.push_back({a, b, c});
            out.metric.push_back(g);
        } else {
            // Undo the (i,k,j) reversal and the frame swap.
            out.triangles.push_back({a, c, b});
            out.metric.push_back(Metric2{g.g22, g.g12, g.g11});
        }
    }

    auto loops = extract_boundary_loops(out.triangles);
    // Order: Gamma0 first (contains the projected base vertex of Gamma0+),
    // then the seam loops; every loop starts at its least vertex id.
    for (auto& lp : loops) {
        auto it = std::min_element(lp.begin(), lp.end());
        std::rotate(lp.begin(), it, lp.end());
    }
    int g0_base = dbl.projection[dbl.mesh.gamma0()[0]];
    std::vector<std::vector<int>> ordered;
    for (auto& lp : loops)
        if (std::find(lp.begin(), lp.end(), g0_base) != lp.end()) ordered.push_back(lp);
    if (ordered.size() != 1) throw MeshError("extract_sheet: gamma0 loop not found");
    for (auto& lp : loops)
        if (std::find(lp.begin(), lp.end(), g0_base) == lp.end()) ordered.push_back(lp);
    out.boundary_loops = std::move(ordered);
    out.gamma0_index = 0;
    out.rotation_orientation = dbl.mesh.rotation_orientation;
    return out;
}

} // namespace eit
