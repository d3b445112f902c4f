#pragma once

#include <vector>

#include "eitsurf/surface_mesh.hpp"

namespace eit {

/// Two copies of a holed surface glued along all inner boundary components.
/// The involution tau swaps the sheets and fixes the seam pointwise; the
/// pushforward metric is tau-invariant; the rotation field flips sign
/// across the sheets (recorded per triangle in sheet_sign).
struct DoubledSurface {
    SurfaceMesh mesh;                 // boundary = Gamma0+ u Gamma0-
    std::vector<int> projection;      // vertex -> source vertex
    std::vector<int> involution;      // vertex -> tau(vertex)
    std::vector<int> seam;            // fixed points of tau, sorted
    std::vector<int> sheet_sign;      // per triangle: +1 / -1
    std::vector<int> tri_source;      // triangle -> source triangle
    std::vector<int> tri_tau;         // triangle -> partner under tau

    int num_vertices() const { return mesh.num_vertices(); }
    bool on_seam(int v) const;
};

/// Glues two copies of `mesh` along all of its inner boundary loops.
/// Requires at least one hole.
DoubledSurface double_cover(const SurfaceMesh& mesh);

/// Selects one sheet (+1 or -1) and re-attaches the seam, mapping vertex
/// ids back through the projection. For either sign the result reproduces
/// the source mesh combinatorics.
SurfaceMesh extract_sheet(const DoubledSurface& dbl, int sign);

} // namespace eit
