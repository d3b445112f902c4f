#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "eitsurf/errors.hpp"
#include "eitsurf/surface_mesh.hpp"
#include "eitsurf/synthetic.hpp"

using namespace eit;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("disk mesh: one loop, chi = 1") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::disk(0.1));
    CHECK(m.num_loops() == 1);
    CHECK(m.euler_characteristic() == 1);
    auto d = validate_mesh(m);
    CHECK(d.ok());
    CHECK(d.loop_count == 1);
}

TEST_CASE("annulus mesh: two loops, chi = 0, outer length -> 2 pi") {
    double prev_err = 1e30;
    for (double h : {0.2, 0.1, 0.05}) {
        SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, h));
        REQUIRE(m.num_loops() == 2);
        CHECK(m.euler_characteristic() == 0);
        CHECK(validate_mesh(m).ok());
        double err = std::abs(m.loop_length(0) - 2 * kPi);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-2);
}

TEST_CASE("two-hole mesh: three loops, chi = -1") {
    auto desc = DomainDescriptor::with_holes({{0.45, 0.0, 0.2}, {-0.45, 0.0, 0.2}}, 0.05);
    SurfaceMesh m = build_synthetic(desc);
    CHECK(m.num_loops() == 3);
    CHECK(m.euler_characteristic() == -1);
    CHECK(validate_mesh(m).ok());
    // Hole loops follow descriptor order.
    double cx1 = 0;
    for (int v : m.boundary_loops[1]) cx1 += m.vertices[v].x();
    cx1 /= m.boundary_loops[1].size();
    CHECK(cx1 == doctest::Approx(0.45).epsilon(0.05));
}

TEST_CASE("mesh quality stays reasonable") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.05));
    auto d = validate_mesh(m);
    CHECK(d.min_triangle_quality > 0.3);
}

TEST_CASE("generator rejects bad descriptors") {
    CHECK_THROWS_AS(build_synthetic(DomainDescriptor::annulus(0.0, 0.05)), MeshError);
    CHECK_THROWS_AS(build_synthetic(DomainDescriptor::annulus(1.2, 0.05)), MeshError);
    CHECK_THROWS_AS(build_synthetic(DomainDescriptor::disk(0.0)), MeshError);
    CHECK_THROWS_AS(build_synthetic(DomainDescriptor::disk(-0.1)), MeshError);
    // Overlapping holes.
    auto overlap = DomainDescriptor::with_holes({{0.2, 0.0, 0.3}, {-0.2, 0.0, 0.3}}, 0.05);
    CHECK_THROWS_AS(build_synthetic(overlap), MeshError);
    // Hole outside the disk.
    auto outside = DomainDescriptor::with_holes({{0.9, 0.0, 0.3}}, 0.05);
    CHECK_THROWS_AS(build_synthetic(outside), MeshError);
    // Non-positive radius.
    auto degenerate = DomainDescriptor::with_holes({{0.0, 0.0, -0.1}}, 0.05);
    CHECK_THROWS_AS(build_synthetic(degenerate), MeshError);
}

TEST_CASE("validate_mesh reports injected defects") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.1));

    SUBCASE("flipped triangle -> orientation failure") {
        std::swap(m.triangles[0][0], m.triangles[0][1]);
        auto d = validate_mesh(m);
        CHECK_FALSE(d.ok());
        CHECK_FALSE(d.orientation_consistent);
    }
    SUBCASE("zero-determinant metric -> SPD failure") {
        m.metric[0] = Metric2{1.0, 1.0, 1.0};
        auto d = validate_mesh(m);
        CHECK_FALSE(d.ok());
    }
    SUBCASE("valid mesh passes") {
        auto d = validate_mesh(m);
        CHECK(d.ok());
        CHECK(d.loop_count == 2);
    }
}

TEST_CASE("SURF2 round trip") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.4, 0.1));
    std::stringstream ss;
    write_surf2(m, ss);
    SurfaceMesh r = read_surf2(ss);
    REQUIRE(r.num_vertices() == m.num_vertices());
    REQUIRE(r.num_triangles() == m.num_triangles());
    REQUIRE(r.num_loops() == m.num_loops());
    CHECK(r.gamma0_index == m.gamma0_index);
    for (int v = 0; v < m.num_vertices(); ++v)
        CHECK((r.vertices[v] - m.vertices[v]).norm() == 0.0);
    for (int t = 0; t < m.num_triangles(); ++t) {
        CHECK(r.triangles[t] == m.triangles[t]);
        CHECK(r.metric[t].g11 == m.metric[t].g11);
        CHECK(r.metric[t].g12 == m.metric[t].g12);
        CHECK(r.metric[t].g22 == m.metric[t].g22);
    }
    CHECK(r.boundary_loops == m.boundary_loops);
    CHECK(r.fingerprint() == m.fingerprint());
}

TEST_CASE("SURF2 reader rejects unknown records") {
    std::stringstream ss;
    ss << "SURF2 3 1 0\nv 0 0 0\nv 1 0 0\nv 0 1 0\nt 0 1 2\nbogus 1 2\n";
    CHECK_THROWS_AS(read_surf2(ss), IoError);
}

TEST_CASE("conformal factor scales the metric") {
    auto desc = DomainDescriptor::annulus(0.5, 0.1);
    desc.conformal_factor = [](double, double) { return 4.0; };
    SurfaceMesh m = build_synthetic(desc);
    // Lengths scale by 2.
    CHECK(m.loop_length(0) == doctest::Approx(2 * 2 * kPi).epsilon(1e-2));
    CHECK(validate_mesh(m).ok());
}
