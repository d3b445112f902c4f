// Command-line front end: mesh generation, DN assembly, hole detection,
// criteria evaluation, trace libraries, and the full reconstruction
// pipeline. Exit codes: 0 ok, 2 invariant violation, 3 indeterminate
// classification, 4 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eitsurf/errors.hpp"
#include "eitsurf/pipeline.hpp"

using namespace eit;
using nlohmann::json;

namespace {

Hole parse_hole(const std::string& s) {
    std::istringstream ss(s);
    Hole h;
    char c1, c2;
    if (!(ss >> h.cx >> c1 >> h.cy >> c2 >> h.r) || c1 != ',' || c2 != ',')
        throw IoError("hole must be given as cx,cy,r");
    return h;
}

Eigen::VectorXd read_trace_csv(const std::string& path, int expected) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open trace " + path);
    std::vector<double> vals;
    std::string line;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line[0] == 's') continue;
        std::istringstream ss(line);
        std::string sfield, vfield;
        if (!std::getline(ss, sfield, ',') || !std::getline(ss, vfield, ','))
            throw IoError("trace line must be 's,value'", lineno);
        vals.push_back(std::stod(vfield));
    }
    if (static_cast<int>(vals.size()) != expected)
        throw IoError("trace has " + std::to_string(vals.size()) + " samples, DN expects " +
                      std::to_string(expected));
    return Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
}

int run(int argc, char** argv) {
    CLI::App app{"EIT toolkit for surfaces with internal holes"};
    app.require_subcommand(1);

    // mesh gen
    auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
    auto* gen = mesh_cmd->add_subcommand("gen", "generate a synthetic domain");
    std::string kind = "annulus", mesh_out = "mesh.surf2";
    double radius = 0.5, h = 0.05;
    std::vector<std::string> hole_specs;
    gen->add_option("--kind", kind, "disk|annulus|holes");
    gen->add_option("--r", radius, "annulus inner radius");
    gen->add_option("--hole", hole_specs, "hole as cx,cy,r (repeatable)");
    gen->add_option("--edge", h, "target edge length");
    gen->add_option("--out", mesh_out, "output SURF2 file");

    // dn assemble
    auto* dn_cmd = app.add_subcommand("dn", "DN operator utilities");
    auto* assemble = dn_cmd->add_subcommand("assemble", "assemble a DN operator");
    std::string dn_mesh, dn_out = "dn.csv", flavor = "grounded";
    assemble->add_option("--mesh", dn_mesh, "input SURF2 mesh")->required();
    assemble->add_option("--flavor", flavor, "grounded|isolated");
    assemble->add_option("--out", dn_out, "output DN CSV");

    // detect
    auto* detect = app.add_subcommand("detect", "classify boundary data");
    std::string det_dn;
    int modes = 8;
    double tol_kernel = 1e-3, tol_const = 1e-3;
    detect->add_option("--dn", det_dn, "input DN CSV")->required();
    detect->add_option("--modes", modes, "Fourier mode cutoff");
    detect->add_option("--tol", tol_kernel, "near-kernel tolerance");
    detect->add_option("--tol-const", tol_const, "constant-image tolerance");

    // criteria
    auto* criteria = app.add_subcommand("criteria", "evaluate the membership criterion");
    std::string cr_dn, cr_trace;
    criteria->add_option("--dn", cr_dn, "input DN CSV")->required();
    criteria->add_option("--trace", cr_trace, "trace CSV (s,value)")->required();

    // traces
    auto* traces = app.add_subcommand("traces", "emit an admissible element library");
    std::string tr_dn, tr_out = "traces.csv";
    int tr_count = 4;
    double tr_tol = 1e-2;
    traces->add_option("--dn", tr_dn, "input DN CSV")->required();
    traces->add_option("--count", tr_count, "number of elements");
    traces->add_option("--tol", tr_tol, "criterion tolerance");
    traces->add_option("--out", tr_out, "output CSV");

    // reconstruct / pipeline
    auto* reconstruct = app.add_subcommand("reconstruct", "run the determination steps");
    std::string rc_mesh, rc_dn, rc_mode = "validation", rc_out, rc_flavor = "grounded";
    double rc_h = 0.05;
    reconstruct->add_option("--mesh", rc_mesh, "input SURF2 mesh (validation mode)");
    reconstruct->add_option("--dn", rc_dn, "input DN CSV (blind mode)");
    reconstruct->add_option("--mode", rc_mode, "validation|blind");
    reconstruct->add_option("--flavor", rc_flavor, "grounded|isolated");
    reconstruct->add_option("--out", rc_out, "artifact directory");
    (void)rc_h;

    auto* pipeline = app.add_subcommand("pipeline", "run the full pipeline from a config");
    std::string cfg_path;
    pipeline->add_option("--config", cfg_path, "JSON config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        DomainDescriptor d;
        if (kind == "disk") d = DomainDescriptor::disk(h);
        else if (kind == "annulus") d = DomainDescriptor::annulus(radius, h);
        else if (kind == "holes") {
            std::vector<Hole> holes;
            for (const auto& s : hole_specs) holes.push_back(parse_hole(s));
            d = DomainDescriptor::with_holes(holes, h);
        } else
            throw IoError("unknown kind '" + kind + "'");
        SurfaceMesh m = build_synthetic(d);
        write_surf2_file(m, mesh_out);
        std::cout << "wrote " << mesh_out << " (" << m.num_vertices() << " vertices, "
                  << m.num_triangles() << " triangles, " << m.num_loops() << " loops)\n";
    } else if (assemble->parsed()) {
        SurfaceMesh m = read_surf2_file(dn_mesh);
        auto diag = validate_mesh(m);
        if (!diag.ok()) throw MeshError("mesh failed validation: " + diag.violations[0].what);
        DNOperator op = assemble_dn(m, dn_flavor_from_string(flavor));
        write_dn_csv_file(op, dn_out);
        std::cout << "wrote " << dn_out << " (" << op.size() << " boundary nodes)\n";
    } else if (detect->parsed()) {
        DNOperator op = read_dn_csv_file(det_dn);
        BoundaryCalculus calc(op.grid);
        Classification c = classify(op, calc, modes, tol_kernel, tol_const);
        json j{{"verdict", to_string(c.verdict)},
               {"kernel_dim", c.kernel_dim},
               {"lambda1_norm", c.lambda1_norm},
               {"thresholds", {{"kernel", c.tol_kernel}, {"const", c.tol_const}}}};
        std::cout << j.dump(2) << "\n";
    } else if (criteria->parsed()) {
        DNOperator op = read_dn_csv_file(cr_dn);
        BoundaryCalculus calc(op.grid);
        Eigen::VectorXd t = read_trace_csv(cr_trace, op.size());
        json j;
        if (op.flavor == DNFlavor::Grounded) {
            GroundedResidual r = residual_grounded(op, calc, t);
            j = {{"mean_flux", r.mean_flux},
                 {"residual", std::isinf(r.residual_norm) ? -1.0 : r.residual_norm},
                 {"rejected_by_mean", std::isinf(r.residual_norm)}};
        } else {
            IsolatedResidual r = residual_isolated(op, calc, t);
            j = {{"c_h", r.c_h}, {"residual", r.residual_norm}, {"no_solution", r.no_solution}};
        }
        std::cout << j.dump(2) << "\n";
    } else if (traces->parsed()) {
        DNOperator op = read_dn_csv_file(tr_dn);
        BoundaryCalculus calc(op.grid);
        AdmissibleBasis basis = admissible_basis_blind(op, calc, tr_count, tr_tol);
        std::vector<TraceAlgebraElement> els;
        for (const auto& f : basis.traces) els.push_back(make_element(op, calc, f, 0.0, tr_tol));
        std::ofstream out(tr_out);
        if (!out) throw IoError("cannot write " + tr_out);
        char buf[64];
        out << "s";
        for (size_t e = 0; e < els.size(); ++e) out << ",re" << e << ",im" << e;
        out << "\n";
        for (int i = 0; i < op.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", op.grid->s[i]);
            out << buf;
            for (const auto& el : els) {
                std::complex<double> v = el.eta()[i];
                std::snprintf(buf, sizeof buf, ",%.17g,%.17g", v.real(), v.imag());
                out << buf;
            }
            out << "\n";
        }
        std::cout << "wrote " << tr_out << " (" << els.size() << " elements"
                  << (basis.complete ? "" : ", partial") << ")\n";
    } else if (reconstruct->parsed()) {
        ExperimentConfig cfg;
        cfg.flavor = dn_flavor_from_string(rc_flavor);
        cfg.out_dir = rc_out;
        if (rc_mode == "validation") {
            if (rc_mesh.empty()) throw IoError("validation mode needs --mesh");
            cfg.validation = true;
            cfg.mesh_path = rc_mesh;
        } else {
            if (rc_dn.empty()) throw IoError("blind mode needs --dn");
            cfg.validation = false;
            cfg.dn_csv = rc_dn;
        }
        PipelineResult r = run_pipeline(cfg);
        std::cout << report_to_string(r.report);
    } else if (pipeline->parsed()) {
        ExperimentConfig cfg = ExperimentConfig::load(cfg_path);
        PipelineResult r = run_pipeline(cfg);
        std::cout << report_to_string(r.report);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const IndeterminateError& e) {
        std::cerr << "indeterminate: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
