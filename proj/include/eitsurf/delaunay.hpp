#pragma once

#include <array>
#include <vector>

namespace eit {

/// Delaunay triangulation of a planar point set (Bowyer-Watson).
/// Returns CCW triangles as index triples into `points`.
std::vector<std::array<int, 3>> delaunay_triangulate(
    const std::vector<std::array<double, 2>>& points);

} // namespace eit
