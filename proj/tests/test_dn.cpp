#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "eitsurf/dn_operator.hpp"
#include "eitsurf/errors.hpp"
#include "eitsurf/synthetic.hpp"

using namespace eit;

namespace {

constexpr double kPi = std::numbers::pi;
const double kLn2 = std::log(2.0);

// Analytic DN eigenvalues on the r=0.5 annulus (L = ln 2):
// grounded: 1/L, n coth(nL); isolated: 0, n tanh(nL).
double ann_gr(int n) { return n == 0 ? 1.0 / kLn2 : n / std::tanh(n * kLn2); }
double ann_is(int n) { return n == 0 ? 0.0 : n * std::tanh(n * kLn2); }

} // namespace

TEST_CASE("annulus DN spectra match separation of variables") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.04));
    HarmonicSolver solver(m);

    SUBCASE("grounded") {
        DNOperator op = assemble_dn(solver, DNFlavor::Grounded);
        DNSpectrum sp = dn_spectrum(op, 5);
        // Ascending: 1/ln2, 5/3 x2, 2 coth(2 ln 2) x2.
        CHECK(sp.values[0] == doctest::Approx(ann_gr(0)).epsilon(0.01));
        CHECK(sp.values[1] == doctest::Approx(5.0 / 3.0).epsilon(0.01));
        CHECK(sp.values[2] == doctest::Approx(5.0 / 3.0).epsilon(0.01));
        CHECK(sp.values[3] == doctest::Approx(ann_gr(2)).epsilon(0.01));
        CHECK(sp.values[4] == doctest::Approx(ann_gr(2)).epsilon(0.01));
    }
    SUBCASE("isolated") {
        DNOperator op = assemble_dn(solver, DNFlavor::Isolated);
        DNSpectrum sp = dn_spectrum(op, 5);
        CHECK(std::abs(sp.values[0]) < 1e-8);  // constants in the kernel
        CHECK(sp.values[1] == doctest::Approx(0.6).epsilon(0.01));
        CHECK(sp.values[2] == doctest::Approx(0.6).epsilon(0.01));
        CHECK(sp.values[3] == doctest::Approx(ann_is(2)).epsilon(0.01));
        CHECK(sp.values[4] == doctest::Approx(ann_is(2)).epsilon(0.01));
        // The kernel eigenvector is the constant one.
        Eigen::VectorXd v0 = sp.vectors.col(0);
        double mean = v0.mean();
        CHECK((v0.array() - mean).abs().maxCoeff() < 1e-6 * std::abs(mean));
    }
}

TEST_CASE("disk DN eigenvalues are 0,1,1,2,2,...") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::disk(0.04));
    DNOperator op = assemble_dn(m, DNFlavor::Grounded);
    DNSpectrum sp = dn_spectrum(op, 7);
    CHECK(std::abs(sp.values[0]) < 1e-8);
    for (int k = 1; k <= 2; ++k) CHECK(sp.values[k] == doctest::Approx(1.0).epsilon(0.01));
    for (int k = 3; k <= 4; ++k) CHECK(sp.values[k] == doctest::Approx(2.0).epsilon(0.01));
    for (int k = 5; k <= 6; ++k) CHECK(sp.values[k] == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("DN symmetry and positivity in the quadrature inner product") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.08));
    HarmonicSolver solver(m);
    for (DNFlavor fl : {DNFlavor::Grounded, DNFlavor::Isolated}) {
        DNOperator op = assemble_dn(solver, fl);
        const BoundaryGrid& g = *op.grid;
        Eigen::VectorXd f = g.sample_angle([](double t) { return std::cos(t) + 0.2; });
        Eigen::VectorXd q = g.sample_angle([](double t) { return std::sin(2 * t) - 0.7; });
        // <Lambda f, q> = <f, Lambda q>
        CHECK(op.form(f, q) == doctest::Approx(op.form(q, f)).epsilon(1e-10));
        // <Lambda f, f> >= 0
        CHECK(op.form(f, f) >= -1e-10);
    }
}

TEST_CASE("grounded flavor with holes: <Lambda 1, 1> > 0, trivial kernel") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.08));
    DNOperator op = assemble_dn(m, DNFlavor::Grounded);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(op.size());
    // <Lambda 1, 1> = 2 pi / ln 2 on the annulus.
    CHECK(op.form(one, one) == doctest::Approx(2 * kPi / kLn2).epsilon(0.01));
    DNSpectrum sp = dn_spectrum(op, 1);
    CHECK(sp.values[0] > 1.0);  // bounded away from zero
}

TEST_CASE("isolated flavor: constants in kernel, range orthogonal to constants") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.08));
    DNOperator op = assemble_dn(m, DNFlavor::Isolated);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(op.size());
    CHECK(op.apply(one).lpNorm<Eigen::Infinity>() < 1e-9);
    Eigen::VectorXd f = op.grid->sample_angle([](double t) { return std::cos(3 * t) + 1.0; });
    // integral of Lambda f = <Lambda f, 1> = <f, Lambda 1> = 0
    CHECK(std::abs(op.grid->integral(op.apply(f))) < 1e-9);
}

TEST_CASE("eigenvalue convergence under refinement, order >= 1.8") {
    std::vector<double> errs;
    for (double h : {0.16, 0.08, 0.04}) {
        SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, h));
        DNOperator op = assemble_dn(m, DNFlavor::Grounded);
        DNSpectrum sp = dn_spectrum(op, 3);
        double e = std::abs(sp.values[0] - ann_gr(0)) + std::abs(sp.values[1] - ann_gr(1)) +
                   std::abs(sp.values[2] - ann_gr(1));
        errs.push_back(e);
    }
    CHECK(std::log2(errs[1] / errs[2]) >= 1.8);
}

TEST_CASE("DN CSV round trip is bit-faithful") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.15));
    DNOperator op = assemble_dn(m, DNFlavor::Isolated);
    std::stringstream ss;
    write_dn_csv(op, ss);
    DNOperator r = read_dn_csv(ss);
    CHECK(r.flavor == op.flavor);
    REQUIRE(r.size() == op.size());
    CHECK(r.grid->length == op.grid->length);
    CHECK((r.grid->s - op.grid->s).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((r.grid->weights - op.grid->weights).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((r.schur - op.schur).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("truncated DN CSV raises a parse error with a line number") {
    SurfaceMesh m = build_synthetic(DomainDescriptor::annulus(0.5, 0.2));
    DNOperator op = assemble_dn(m, DNFlavor::Grounded);
    std::stringstream ss;
    write_dn_csv(op, ss);
    std::string text = ss.str();
    text.resize(text.size() / 2);
    std::stringstream cut(text);
    try {
        read_dn_csv(cut);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(e.line_number > 0);
    }
}
