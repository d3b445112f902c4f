#include <doctest.h>

#include <algorithm>
#include <set>

#include "eitsurf/double_cover.hpp"
#include "eitsurf/errors.hpp"
#include "eitsurf/synthetic.hpp"

using namespace eit;

namespace {

SurfaceMesh annulus(double h = 0.1) { return build_synthetic(DomainDescriptor::annulus(0.5, h)); }

SurfaceMesh two_holes(double h = 0.08) {
    return build_synthetic(
        DomainDescriptor::with_holes({{0.45, 0.0, 0.2}, {-0.45, 0.0, 0.2}}, h));
}

// Canonical loop form: rotate so the least vertex id leads.
std::vector<int> canon(std::vector<int> lp) {
    auto it = std::min_element(lp.begin(), lp.end());
    std::rotate(lp.begin(), it, lp.end());
    return lp;
}

} // namespace

TEST_CASE("doubled annulus: chi = 0, two boundary loops") {
    SurfaceMesh m = annulus();
    DoubledSurface d = double_cover(m);
    CHECK(d.mesh.euler_characteristic() == 2 * m.euler_characteristic());
    CHECK(d.mesh.num_loops() == 2);
    CHECK(validate_mesh(d.mesh).ok());
}

TEST_CASE("doubled two-hole disk: chi = -2, genus 1, two loops") {
    SurfaceMesh m = two_holes();
    REQUIRE(m.euler_characteristic() == -1);
    DoubledSurface d = double_cover(m);
    CHECK(d.mesh.euler_characteristic() == -2);
    CHECK(d.mesh.num_loops() == 2);
    // chi = 2 - 2g - b: -2 = 2 - 2g - 2 -> g = 1.
    CHECK(validate_mesh(d.mesh).ok());
}

TEST_CASE("involution structure") {
    SurfaceMesh m = annulus();
    DoubledSurface d = double_cover(m);

    for (int v = 0; v < d.num_vertices(); ++v) {
        CHECK(d.involution[d.involution[v]] == v);             // tau o tau = id
        CHECK(d.projection[d.involution[v]] == d.projection[v]);
        if (d.on_seam(v)) {
            CHECK(d.involution[v] == v);
        } else {
            CHECK(d.involution[v] != v);
        }
    }
    // Seam vertices project onto the inner loop.
    std::set<int> inner(m.boundary_loops[1].begin(), m.boundary_loops[1].end());
    for (int v : d.seam) CHECK(inner.count(d.projection[v]) == 1);
    CHECK(d.seam.size() == inner.size());
}

TEST_CASE("pushforward metric is tau-invariant, exactly") {
    SurfaceMesh m = two_holes();
    DoubledSurface d = double_cover(m);
    for (int t = 0; t < d.mesh.num_triangles(); ++t) {
        int tt = d.tri_tau[t];
        CHECK(d.sheet_sign[t] == -d.sheet_sign[tt]);
        // The tau copy swaps the frame legs; pulling back swaps g11/g22.
        const Metric2& a = d.mesh.metric[t];
        const Metric2& b = d.mesh.metric[tt];
        CHECK(a.g11 == b.g22);
        CHECK(a.g22 == b.g11);
        CHECK(a.g12 == b.g12);
    }
}

TEST_CASE("arc length of both Gamma0 copies equals the source") {
    SurfaceMesh m = annulus();
    DoubledSurface d = double_cover(m);
    double src = m.loop_length(0);
    CHECK(d.mesh.loop_length(0) == doctest::Approx(src).epsilon(1e-12));
    CHECK(d.mesh.loop_length(1) == doctest::Approx(src).epsilon(1e-12));
}

TEST_CASE("sheet extraction reproduces the source combinatorics") {
    SurfaceMesh m = two_holes();
    DoubledSurface d = double_cover(m);
    for (int sign : {+1, -1}) {
        SurfaceMesh s = extract_sheet(d, sign);
        REQUIRE(s.num_vertices() == m.num_vertices());
        REQUIRE(s.num_triangles() == m.num_triangles());
        std::multiset<std::array<int, 3>> a(m.triangles.begin(), m.triangles.end());
        std::multiset<std::array<int, 3>> b(s.triangles.begin(), s.triangles.end());
        CHECK(a == b);
        REQUIRE(s.num_loops() == m.num_loops());
        for (int l = 0; l < m.num_loops(); ++l)
            CHECK(canon(m.boundary_loops[l]) == canon(s.boundary_loops[l]));
        CHECK(validate_mesh(s).ok());
    }
}

TEST_CASE("double_cover rejects hole-free meshes") {
    SurfaceMesh disk = build_synthetic(DomainDescriptor::disk(0.15));
    CHECK_THROWS_AS(double_cover(disk), MeshError);
}
