#include "eitsurf/pipeline.hpp"
#include "eitsurf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <queue>
#include <set>

namespace eit {

namespace {

using nlohmann::json;

json entry(double value, double tolerance, const std::string& stage) {
    return json{{"value", value}, {"tolerance", tolerance}, {"stage", stage}};
}

json entry(int value, const std::string& stage) {
    return json{{"value", value}, {"tolerance", 0}, {"stage", stage}};
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream f(dir + "/" + name);
    if (!f) throw IoError("cannot write artifact " + name);
    f << text;
}

std::string traces_csv(const BoundaryGrid& g, const std::vector<TraceAlgebraElement>& els) {
    char buf[64];
    std::string out = "s";
    for (size_t e = 0; e < els.size(); ++e) {
        out += ",re" + std::to_string(e) + ",im" + std::to_string(e);
    }
    out += "\n";
    for (int i = 0; i < g.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", g.s[i]);
        out += buf;
        for (const auto& el : els) {
            std::complex<double> v = el.w1[i] + std::complex<double>(0, 1) * el.w2[i];
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g", v.real(), v.imag());
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::string cloud_csv(const CharacterCloud& cloud) {
    char buf[64];
    std::string out = "id";
    for (int g = 0; g < cloud.num_generators(); ++g)
        out += ",re" + std::to_string(g) + ",im" + std::to_string(g);
    out += ",boundary,hermitian,label\n";
    for (int p = 0; p < cloud.num_points(); ++p) {
        out += std::to_string(p);
        for (int g = 0; g < cloud.num_generators(); ++g) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g", cloud.values(p, g).real(),
                          cloud.values(p, g).imag());
            out += buf;
        }
        out += "," + std::to_string(int(cloud.boundary_flag[p]));
        out += "," + std::to_string(int(cloud.hermitian_flag[p]));
        out += "," + std::to_string(cloud.sheet_label.empty() ? -1 : cloud.sheet_label[p]);
        out += "\n";
    }
    return out;
}

// Interior patch for the metric fit: chart from generator 0 (real and
// imaginary part are isothermal-type coordinates), harmonic samples from
// the remaining generators.
MetricFitPatch cloud_patch(const CharacterCloud& cloud, const DoubledSurface& dbl,
                           const std::vector<int>& labels) {
    // Pick the sheet-0 vertex farthest from boundary and seam.
    const int nv = dbl.num_vertices();
    std::vector<int> dist(nv, -1);
    std::queue<int> bfs;
    for (int v = 0; v < nv; ++v)
        if (cloud.boundary_flag[v] || dbl.on_seam(v)) {
            dist[v] = 0;
            bfs.push(v);
        }
    std::vector<std::vector<int>> adj(nv);
    for (const auto& t : dbl.mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            adj[t[k]].push_back(t[(k + 1) % 3]);
            adj[t[k]].push_back(t[(k + 2) % 3]);
        }
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop();
        for (int u : adj[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                bfs.push(u);
            }
    }
    int center = -1;
    for (int v = 0; v < nv; ++v) {
        if (labels[v] != 0) continue;
        if (center < 0 || dist[v] > dist[center]) center = v;
    }
    if (center < 0) throw Error("metric patch: no interior vertex available");

    // Two-ring neighborhood.
    std::vector<int> patch{center};
    std::vector<char> seen(nv, 0);
    seen[center] = 1;
    for (int ring = 0; ring < 2; ++ring) {
        std::vector<int> next;
        for (int v : patch)
            for (int u : adj[v])
                if (!seen[u]) {
                    seen[u] = 1;
                    next.push_back(u);
                }
        patch.insert(patch.end(), next.begin(), next.end());
    }

    const int k = cloud.num_generators();
    MetricFitPatch out;
    out.coords.resize(patch.size(), 2);
    out.fields.resize(patch.size(), 2 * (k - 1));
    for (size_t i = 0; i < patch.size(); ++i) {
        out.coords(i, 0) = cloud.values(patch[i], 0).real();
        out.coords(i, 1) = cloud.values(patch[i], 0).imag();
        for (int g = 1; g < k; ++g) {
            out.fields(i, 2 * (g - 1)) = cloud.values(patch[i], g).real();
            out.fields(i, 2 * (g - 1) + 1) = cloud.values(patch[i], g).imag();
        }
    }
    return out;
}

} // namespace

json ExperimentConfig::to_json() const {
    json j;
    j["schema_version"] = 1;
    json dom;
    switch (domain.kind) {
        case DomainDescriptor::Kind::Disk: dom["kind"] = "disk"; break;
        case DomainDescriptor::Kind::Annulus: dom["kind"] = "annulus"; break;
        case DomainDescriptor::Kind::Holes: dom["kind"] = "holes"; break;
    }
    dom["r"] = domain.annulus_r;
    dom["h"] = domain.target_h;
    json holes = json::array();
    for (const auto& h : domain.holes) holes.push_back({h.cx, h.cy, h.r});
    dom["holes"] = holes;
    j["domain"] = dom;
    j["mesh_path"] = mesh_path;
    j["dn_csv"] = dn_csv;
    j["flavor"] = to_string(flavor);
    j["mode"] = validation ? "validation" : "blind";
    j["tolerances"] = {{"mean", tol_mean},     {"kernel", tol_kernel},
                       {"const", tol_const},   {"criterion", criterion_tol},
                       {"seam", seam_tol}};
    j["n_modes"] = n_modes;
    j["generators"] = k_generators;
    j["out_dir"] = out_dir;
    j["seed"] = seed;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (j.value("schema_version", 0) != 1)
        throw IoError("unsupported config schema version");
    ExperimentConfig c;
    const json& dom = j.at("domain");
    std::string kind = dom.value("kind", "disk");
    if (kind == "disk") c.domain.kind = DomainDescriptor::Kind::Disk;
    else if (kind == "annulus") c.domain.kind = DomainDescriptor::Kind::Annulus;
    else if (kind == "holes") c.domain.kind = DomainDescriptor::Kind::Holes;
    else throw IoError("unknown domain kind '" + kind + "'");
    c.domain.annulus_r = dom.value("r", 0.5);
    c.domain.target_h = dom.value("h", 0.05);
    if (dom.contains("holes"))
        for (const auto& h : dom["holes"])
            c.domain.holes.push_back({h.at(0).get<double>(), h.at(1).get<double>(),
                                      h.at(2).get<double>()});
    c.mesh_path = j.value("mesh_path", std::string());
    c.dn_csv = j.value("dn_csv", std::string());
    c.flavor = dn_flavor_from_string(j.value("flavor", "grounded"));
    std::string mode = j.value("mode", "validation");
    if (mode != "validation" && mode != "blind") throw IoError("unknown mode '" + mode + "'");
    c.validation = mode == "validation";
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        c.tol_mean = t.value("mean", c.tol_mean);
        c.tol_kernel = t.value("kernel", c.tol_kernel);
        c.tol_const = t.value("const", c.tol_const);
        c.criterion_tol = t.value("criterion", c.criterion_tol);
        c.seam_tol = t.value("seam", c.seam_tol);
    }
    c.n_modes = j.value("n_modes", c.n_modes);
    c.k_generators = j.value("generators", c.k_generators);
    c.out_dir = j.value("out_dir", std::string());
    c.seed = j.value("seed", 0);
    if (!(c.tol_mean > 0) || !(c.tol_const > 0) || !(c.seam_tol >= 0))
        throw IoError("config tolerances must be positive");
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IoError(std::string("config parse failure: ") + e.what());
    }
    return from_json(j);
}

std::string report_to_string(const json& report) { return report.dump(2) + "\n"; }

PipelineResult run_pipeline(const ExperimentConfig& config) {
    PipelineResult result;
    json& rep = result.report;
    rep["schema_version"] = 1;
    rep["config"] = config.to_json();
    json& stages = rep["stages"];
    stages = json::object();
    std::string stage = "setup";

    auto save_partial = [&]() {
        if (!config.out_dir.empty())
            write_text(config.out_dir, "report.json", report_to_string(rep));
    };

    try {
        // ------------------------------------------------------------------
        // Inputs: mesh (validation) or DN matrix (blind).
        std::optional<SurfaceMesh> mesh, coarse_mesh;
        std::optional<HarmonicSolver> solver;
        DNOperator op;
        std::optional<DNOperator> coarse_op;

        if (config.validation) {
            stage = "mesh";
            if (!config.mesh_path.empty()) {
                mesh = read_surf2_file(config.mesh_path);
            } else {
                mesh = build_synthetic(config.domain);
                DomainDescriptor cd = config.domain;
                cd.target_h = 2 * config.domain.target_h;
                coarse_mesh = build_synthetic(cd);
            }
            auto diag = validate_mesh(*mesh);
            if (!diag.ok()) throw MeshError("mesh failed validation");
            stages["mesh"]["vertices"] = entry(mesh->num_vertices(), "mesh");
            stages["mesh"]["triangles"] = entry(mesh->num_triangles(), "mesh");
            stages["mesh"]["loops"] = entry(mesh->num_loops(), "mesh");
            stages["mesh"]["euler_characteristic"] = entry(mesh->euler_characteristic(), "mesh");
            if (!config.out_dir.empty()) {
                std::filesystem::create_directories(config.out_dir);
                write_surf2_file(*mesh, config.out_dir + "/mesh.surf2");
            }

            stage = "dn";
            solver.emplace(*mesh);
            op = assemble_dn(*solver, config.flavor);
            if (coarse_mesh) coarse_op = assemble_dn(*coarse_mesh, config.flavor);
            if (!config.out_dir.empty()) write_dn_csv_file(op, config.out_dir + "/dn.csv");
        } else {
            stage = "dn";
            op = read_dn_csv_file(config.dn_csv);
            if (op.flavor != config.flavor)
                throw IoError("DN file flavor does not match the configured flavor");
        }
        stages["dn"]["boundary_nodes"] = entry(op.size(), "dn");
        stages["dn"]["boundary_length"] = entry(op.grid->length, 0.0, "dn");

        // ------------------------------------------------------------------
        stage = "detect";
        BoundaryCalculus calc(op.grid);
        double tol_kernel = config.tol_kernel;
        if (tol_kernel < 0) {
            if (coarse_op) {
                BoundaryCalculus ccalc(coarse_op->grid);
                tol_kernel =
                    10.0 * kernel_error_estimate(op, calc, *coarse_op, ccalc, config.n_modes);
            } else {
                tol_kernel = 1e-3;
            }
        }
        Classification cls = classify(op, calc, config.n_modes, tol_kernel, config.tol_const);
        result.verdict = cls.verdict;
        stages["detect"]["verdict"] = to_string(cls.verdict);
        stages["detect"]["kernel_dim"] = entry(cls.kernel_dim, "detect");
        stages["detect"]["lambda1_norm"] = entry(cls.lambda1_norm, config.tol_const, "detect");
        stages["detect"]["sigma_max"] = entry(cls.sigma_max, tol_kernel, "detect");
        stages["detect"]["tol_kernel"] = entry(tol_kernel, 0.0, "detect");
        rep["verdict"] = to_string(cls.verdict);

        stage = "boundary_length";
        {
            int k = std::min(12, op.size());
            DNSpectrum sp = dn_spectrum(op, k);
            double lhat = recover_boundary_length(sp.values, k);
            stages["boundary_length"]["length"] = entry(lhat, 0.01 * lhat, "boundary_length");
        }

        if (cls.verdict == Verdict::NoHoles) {
            result.skip_reason =
                "single-boundary-component case: outside the holed-surface reconstruction";
            rep["reconstruction"] = {{"skipped", true}, {"reason", result.skip_reason}};
            save_partial();
            return result;
        }

        // ------------------------------------------------------------------
        stage = "criteria";
        double criterion_tol = config.criterion_tol;
        if (criterion_tol < 0) {
            // Without a companion grid the discretization error is unknown;
            // a generous fixed tolerance still sits far below the infinite
            // marker of the mean-flux prefilter.
            criterion_tol = coarse_op ? 10.0 * dn_error_estimate(op, *coarse_op, 8) : 5e-2;
        }
        stages["criteria"]["criterion_tol"] = entry(criterion_tol, 0.0, "criteria");
        AdmissibleBasis basis =
            config.validation
                ? admissible_basis_validation(*solver, op, calc, config.k_generators,
                                              criterion_tol)
                : admissible_basis_blind(op, calc, config.k_generators, criterion_tol);
        stages["criteria"]["admissible_found"] =
            entry(static_cast<int>(basis.traces.size()), "criteria");
        stages["criteria"]["complete"] = basis.complete;
        if (basis.traces.size() < 2)
            throw CriterionError("admissible search produced fewer than 2 generators");

        stage = "traces";
        std::vector<TraceAlgebraElement> gens;
        json residuals = json::array();
        for (const auto& f : basis.traces) {
            gens.push_back(make_element(op, calc, f, 0.0, criterion_tol));
            residuals.push_back(entry(gens.back().residual1, criterion_tol, "traces"));
        }
        stages["traces"]["criterion_residuals"] = residuals;
        if (!config.out_dir.empty())
            write_text(config.out_dir, "traces.csv", traces_csv(*op.grid, gens));

        stage = "modulus";
        {
            int k = std::min(12, op.size());
            DNSpectrum sp = dn_spectrum(op, k);
            // A spectrum that fails to pair up is itself a non-annulus
            // signature: flag it instead of aborting.
            try {
                ModulusFit fit = recover_annulus_modulus(sp.values, config.flavor);
                result.modulus = fit.L;
                rep["modulus"] = entry(fit.L, 0.02 * std::max(fit.L, 1e-12), "modulus");
                stages["modulus"]["L"] = entry(fit.L, 0.02 * std::max(fit.L, 1e-12), "modulus");
                stages["modulus"]["fit_residual"] = entry(fit.residual, 0.05, "modulus");
                stages["modulus"]["annulus_like"] = fit.ok;
            } catch (const Error& e) {
                result.modulus = 0.0;
                rep["modulus"] = entry(0.0, 0.0, "modulus");
                stages["modulus"]["annulus_like"] = false;
                stages["modulus"]["reason"] = e.what();
            }
        }

        if (!config.validation) {
            result.skip_reason = "blind mode stops at classification, modulus and traces";
            rep["reconstruction"] = {{"skipped", true}, {"reason", result.skip_reason}};
            save_partial();
            return result;
        }

        // ------------------------------------------------------------------
        stage = "cover";
        DoubledSurface dbl = double_cover(*mesh);
        stages["cover"]["euler_characteristic"] =
            entry(dbl.mesh.euler_characteristic(), "cover");
        stages["cover"]["boundary_loops"] = entry(dbl.mesh.num_loops(), "cover");
        stages["cover"]["seam_vertices"] = entry(static_cast<int>(dbl.seam.size()), "cover");

        stage = "embed";
        HarmonicSolver dbl_solver(dbl.mesh);
        CharacterCloud cloud = gelfand_embed(dbl, dbl_solver, gens);
        json crres = json::array();
        for (double c : cloud.cr_residual) crres.push_back(entry(c, 0.0, "embed"));
        stages["embed"]["cr_residuals"] = crres;
        ShilovReport shilov = shilov_check(cloud, 1e-6);
        stages["embed"]["shilov_ok"] = shilov.ok();
        stages["embed"]["shilov_excess"] = entry(shilov.worst_excess, 1e-6, "embed");
        if (!shilov.ok())
            throw Error("maximum principle violated on the character cloud");

        stage = "seam";
        std::vector<int> seam = find_seam(cloud, config.seam_tol);
        result.seam_size = static_cast<int>(seam.size());
        rep["seam_size"] = entry(result.seam_size, "seam");
        stages["seam"]["found"] = entry(result.seam_size, "seam");
        if (seam.empty())
            throw TopologyError("holes detected but the hermitian seam is empty");
        {
            std::set<int> fs(seam.begin(), seam.end());
            int hit = 0;
            for (int v : dbl.seam)
                if (fs.count(v)) ++hit;
            stages["seam"]["recall"] =
                entry(double(hit) / dbl.seam.size(), 0.01, "seam");
        }

        stage = "split";
        SplitResult split = split_components(cloud, seam, /*use_mesh_edges=*/true);
        result.components = split.components;
        rep["components"] = entry(split.components, "split");
        stages["split"]["components"] = entry(split.components, "split");
        if (!config.out_dir.empty())
            write_text(config.out_dir, "cloud.csv", cloud_csv(cloud));

        stage = "metric";
        {
            MetricFitPatch patch = cloud_patch(cloud, dbl, split.labels);
            MetricFit fit = fit_conformal_metric(patch);
            result.metric_fit_residual = fit.residual;
            rep["metric_fit_residual"] = entry(fit.residual, 0.0, "metric");
            stages["metric"]["g11"] = entry(fit.g(0, 0), 0.0, "metric");
            stages["metric"]["g12"] = entry(fit.g(0, 1), 0.0, "metric");
            stages["metric"]["g22"] = entry(fit.g(1, 1), 0.0, "metric");
            stages["metric"]["fit_residual"] = entry(fit.residual, 0.0, "metric");
        }

        stage = "reassembly";
        {
            SurfaceMesh sheet = rebuild_sheet_mesh(dbl, split.labels, 0);
            DNOperator rec = assemble_dn(sheet, config.flavor);
            int w = std::min(8, (std::min(rec.size(), op.size()) - 2) / 4);
            Eigen::MatrixXd a = dn_compressed(op, w);
            Eigen::MatrixXd b = dn_compressed(rec, w);
            result.dn_rematch = (a - b).norm() / a.norm();
            stages["reassembly"]["dn_rematch"] = entry(result.dn_rematch, 0.05, "reassembly");
            stages["reassembly"]["modes"] = entry(w, "reassembly");
        }

        result.reconstructed = true;
        rep["reconstruction"] = {{"skipped", false}, {"reason", ""}};
        save_partial();
        return result;
    } catch (...) {
        rep["aborted_stage"] = stage;
        save_partial();
        throw;
    }
}

} // namespace eit
