#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "eitsurf/errors.hpp"
#include "eitsurf/pipeline.hpp"

using namespace eit;

namespace {

ExperimentConfig annulus_config(double h = 0.06) {
    ExperimentConfig c;
    c.domain = DomainDescriptor::annulus(0.5, h);
    c.flavor = DNFlavor::Grounded;
    c.validation = true;
    c.n_modes = 8;
    c.k_generators = 4;
    return c;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("eit_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("annulus validation pipeline: verdict and modulus") {
    PipelineResult r = run_pipeline(annulus_config());
    CHECK(r.verdict == Verdict::HolesGrounded);
    CHECK(r.reconstructed);
    CHECK(std::abs(r.modulus - std::log(2.0)) / std::log(2.0) < 0.02);
    CHECK(r.components == 2);
    CHECK(r.seam_size > 0);
    CHECK(r.dn_rematch < 0.05);
    // Every report numeric carries tolerance and stage.
    const auto& mod = r.report["modulus"];
    CHECK(mod.contains("value"));
    CHECK(mod.contains("tolerance"));
    CHECK(mod.contains("stage"));
}

TEST_CASE("isolated flavor pipeline") {
    ExperimentConfig c = annulus_config();
    c.flavor = DNFlavor::Isolated;
    PipelineResult r = run_pipeline(c);
    CHECK(r.verdict == Verdict::HolesIsolated);
    CHECK(r.reconstructed);
    CHECK(std::abs(r.modulus - std::log(2.0)) / std::log(2.0) < 0.02);
}

TEST_CASE("disk pipeline: NoHoles, reconstruction skipped with a reason") {
    ExperimentConfig c = annulus_config();
    c.domain = DomainDescriptor::disk(0.06);
    PipelineResult r = run_pipeline(c);
    CHECK(r.verdict == Verdict::NoHoles);
    CHECK_FALSE(r.reconstructed);
    CHECK_FALSE(r.skip_reason.empty());
    CHECK(r.report["reconstruction"]["skipped"].get<bool>());
}

TEST_CASE("zero kernel tolerance propagates Indeterminate") {
    ExperimentConfig c = annulus_config(0.08);
    c.tol_kernel = 0.0;
    CHECK_THROWS_AS(run_pipeline(c), IndeterminateError);
}

TEST_CASE("determinism: identical config gives byte-identical reports") {
    ExperimentConfig c = annulus_config(0.08);
    c.seed = 7;
    PipelineResult a = run_pipeline(c);
    PipelineResult b = run_pipeline(c);
    CHECK(report_to_string(a.report) == report_to_string(b.report));
}

TEST_CASE("config JSON round trip") {
    ExperimentConfig c = annulus_config(0.07);
    c.out_dir = "somewhere";
    c.seed = 42;
    c.tol_kernel = 0.25;
    ExperimentConfig d = ExperimentConfig::from_json(c.to_json());
    CHECK(d.domain.kind == c.domain.kind);
    CHECK(d.domain.annulus_r == c.domain.annulus_r);
    CHECK(d.domain.target_h == c.domain.target_h);
    CHECK(d.flavor == c.flavor);
    CHECK(d.validation == c.validation);
    CHECK(d.tol_kernel == c.tol_kernel);
    CHECK(d.out_dir == c.out_dir);
    CHECK(d.seed == c.seed);
}

TEST_CASE("config loader rejects bad input") {
    using nlohmann::json;
    SUBCASE("wrong schema version") {
        json j = annulus_config().to_json();
        j["schema_version"] = 99;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), IoError);
    }
    SUBCASE("unknown mode") {
        json j = annulus_config().to_json();
        j["mode"] = "interactive";
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), IoError);
    }
    SUBCASE("non-positive mean tolerance") {
        json j = annulus_config().to_json();
        j["tolerances"]["mean"] = 0.0;
        CHECK_THROWS_AS(ExperimentConfig::from_json(j), IoError);
    }
}

TEST_CASE("artifacts are written and the mesh file round-trips the pipeline") {
    TempDir tmp;
    ExperimentConfig c = annulus_config(0.08);
    c.out_dir = tmp.path.string();
    PipelineResult r = run_pipeline(c);
    CHECK(r.reconstructed);
    for (const char* name : {"mesh.surf2", "dn.csv", "traces.csv", "cloud.csv", "report.json"})
        CHECK(std::filesystem::exists(tmp.path / name));

    // Validation mode from the saved mesh file (no coarse companion).
    ExperimentConfig c2 = annulus_config(0.08);
    c2.mesh_path = (tmp.path / "mesh.surf2").string();
    PipelineResult r2 = run_pipeline(c2);
    CHECK(r2.verdict == Verdict::HolesGrounded);
    CHECK(r2.reconstructed);
}

TEST_CASE("blind mode stops after classification, modulus and traces") {
    TempDir tmp;
    // Produce a DN file through a validation run.
    ExperimentConfig c = annulus_config(0.08);
    c.out_dir = tmp.path.string();
    run_pipeline(c);

    ExperimentConfig blind;
    blind.validation = false;
    blind.dn_csv = (tmp.path / "dn.csv").string();
    blind.flavor = DNFlavor::Grounded;
    blind.n_modes = 8;
    blind.k_generators = 4;
    PipelineResult r = run_pipeline(blind);
    CHECK(r.verdict == Verdict::HolesGrounded);
    CHECK_FALSE(r.reconstructed);
    CHECK(std::abs(r.modulus - std::log(2.0)) / std::log(2.0) < 0.05);
    CHECK(r.report["stages"].contains("criteria"));
    CHECK_FALSE(r.report["stages"].contains("embed"));
}

TEST_CASE("aborted stage is recorded in the partial report") {
    TempDir tmp;
    ExperimentConfig c = annulus_config(0.08);
    c.tol_kernel = 0.0;
    c.out_dir = tmp.path.string();
    CHECK_THROWS(run_pipeline(c));
    std::ifstream f(tmp.path / "report.json");
    REQUIRE(f.good());
    nlohmann::json rep;
    f >> rep;
    CHECK(rep["aborted_stage"] == "detect");
}
