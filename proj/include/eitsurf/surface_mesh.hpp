#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eit {

using Vec3 = Eigen::Vector3d;

/// Symmetric 2x2 metric tensor expressed in a triangle's edge frame
/// (e1 = p1 - p0, e2 = p2 - p0).
struct Metric2 {
    double g11 = 1.0;
    double g12 = 0.0;
    double g22 = 1.0;

    double det() const { return g11 * g22 - g12 * g12; }
};

/// Triangulated metric surface with labeled boundary loops.
///
/// Triangles are consistently oriented; the metric is piecewise constant
/// (one SPD tensor per triangle, defaulting to the induced embedding
/// metric). Boundary loops are stored in induced orientation starting at a
/// fixed base vertex; loop `gamma0_index` is the accessible component.
struct SurfaceMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Metric2> metric;              // size = triangles.size()
    std::vector<std::vector<int>> boundary_loops;
    int gamma0_index = 0;
    int rotation_orientation = +1;            // sign of the rotation field

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_loops() const { return static_cast<int>(boundary_loops.size()); }
    int num_holes() const { return num_loops() - 1; }

    const std::vector<int>& gamma0() const { return boundary_loops[gamma0_index]; }

    /// Induced embedding metric of triangle t (Gram matrix of the edge frame).
    Metric2 induced_metric(int t) const;

    /// Euler characteristic V - E + F.
    int euler_characteristic() const;

    /// Metric length of the directed edge (a,b); the edge must belong to
    /// some triangle. Uses that triangle's metric tensor.
    double edge_length(int a, int b) const;

    /// Metric length of boundary loop `loop`.
    double loop_length(int loop) const;

    /// Metric area of triangle t: sqrt(det g)/2.
    double triangle_area(int t) const;

    /// True if vertex v lies on some boundary loop.
    std::vector<char> boundary_vertex_mask() const;

    uint64_t fingerprint() const;
};

struct MeshViolation {
    std::string what;
};

struct MeshDiagnostics {
    int loop_count = 0;
    bool orientation_consistent = false;
    double metric_eig_min = 0.0;
    double metric_eig_max = 0.0;
    double min_triangle_quality = 0.0;   // 2 r_in / r_circ, in [0,1]
    std::vector<MeshViolation> violations;

    bool ok() const { return violations.empty(); }
};

/// Structural validation. Reports violations, never repairs.
/// `eps_g`: admissible metric eigenvalue range is [eps_g, 1/eps_g].
MeshDiagnostics validate_mesh(const SurfaceMesh& mesh, double eps_g = 1e-6);

/// Chains the once-traversed directed edges of a consistently oriented
/// triangle set into boundary cycles (induced orientation).
std::vector<std::vector<int>> extract_boundary_loops(
    const std::vector<std::array<int, 3>>& triangles);

/// SURF2 text format.
void write_surf2(const SurfaceMesh& mesh, std::ostream& out);
void write_surf2_file(const SurfaceMesh& mesh, const std::string& path);
SurfaceMesh read_surf2(std::istream& in);
SurfaceMesh read_surf2_file(const std::string& path);

} // namespace eit
