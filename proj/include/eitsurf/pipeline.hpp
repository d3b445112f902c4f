#pragma once

#include <cstdint>
#include <string>

#include "eitsurf/detector.hpp"
#include "eitsurf/dn_operator.hpp"
#include "eitsurf/gelfand.hpp"
#include "eitsurf/synthetic.hpp"
#include "eitsurf/trace_algebra.hpp"

#include <json.hpp>

namespace eit {

/// Single-file configuration of one experiment run. Negative (or absent)
/// kernel/criterion tolerances mean "calibrate from the two-grid error
/// estimate"; an explicit zero is a degenerate threshold and propagates
/// an indeterminate classification.
struct ExperimentConfig {
    DomainDescriptor domain;       // validation mode input
    std::string mesh_path;         // validation alternative: load SURF2 mesh
    std::string dn_csv;            // blind mode input
    DNFlavor flavor = DNFlavor::Grounded;
    bool validation = true;

    double tol_mean = 1e-3;
    double tol_kernel = -1.0;      // < 0: auto
    double tol_const = 1e-3;
    double criterion_tol = -1.0;   // < 0: auto
    double seam_tol = 0.05;
    int n_modes = 8;
    int k_generators = 4;
    std::string out_dir;           // empty: no artifacts written
    uint64_t seed = 0;             // reserved for randomized search restarts

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
};

/// Structured result: summary values plus the full per-stage report, where
/// every numeric entry carries its tolerance and producing stage.
struct PipelineResult {
    Verdict verdict = Verdict::NoHoles;
    bool reconstructed = false;
    std::string skip_reason;
    double modulus = 0.0;
    int seam_size = 0;
    int components = 0;
    double metric_fit_residual = 0.0;
    double dn_rematch = 0.0;
    nlohmann::json report;
};

/// Executes mesh -> DN -> detect -> criteria/traces -> cover -> embed ->
/// seam -> split -> modulus -> metric -> reassembly, writing artifacts to
/// config.out_dir when set. A stage failure is annotated with the stage
/// name and rethrown after the partial report is saved.
PipelineResult run_pipeline(const ExperimentConfig& config);

/// Serializes the report deterministically (sorted keys, round-trip floats).
std::string report_to_string(const nlohmann::json& report);

} // namespace eit
