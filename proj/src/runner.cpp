#include "nball/config.hpp"
#include "nball/error.hpp"
#include "nball/radial_pde.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace nball {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write(const fs::path& path, const std::string& content)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

fs::path prepare_dir(const RunConfig& cfg)
{
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
    return fs::path(cfg.output_dir);
}

json rate_json(const RateFit& f) { return json{{"rate", f.rate}, {"r_squared", f.r_squared}}; }

json verify_kernels_section(const RunConfig& cfg, bool& ok)
{
    const KernelParams p = cfg.params();
    const RadialGrid grid(p.radius, cfg.verify_intervals);
    const double c = p.gain();
    json out;
    out["intervals"] = cfg.verify_intervals;
    out["min_order"] = 1.8;
    json reports = json::array();
    for (int l : cfg.verify_degrees)
        for (auto kind : {KernelKind::control, KernelKind::inverse, KernelKind::observer, KernelKind::observer_inverse}) {
            const auto r = verify_kernel_pde(p, l, kind, grid);
            const bool lower = kind == KernelKind::control || kind == KernelKind::inverse;
            const double diag_tol = 1e-12 * std::max(1.0, c * p.radius);
            bool pass = r.passed && r.diagonal_error <= diag_tol;
            if (lower) pass = pass && r.origin_value <= 1e-12 && r.origin_slope <= 1e-12;
            ok = ok && pass;
            reports.push_back(json{{"kind", to_string(kind)},
                                   {"l", l},
                                   {"grids", r.intervals},
                                   {"max_residual", r.max_residual},
                                   {"order", r.order},
                                   {"diagonal_error", r.diagonal_error},
                                   {"origin_value", r.origin_value},
                                   {"origin_slope", r.origin_slope},
                                   {"origin_slope_fd", r.origin_slope_fd},
                                   {"passed", pass}});
        }
    out["kernels"] = reports;
    json cands = json::array();
    for (int l : cfg.verify_degrees)
        for (auto cand : {ObserverCandidate::rho_prefactor, ObserverCandidate::inverse_weight,
                          ObserverCandidate::direct_weight}) {
            const auto r = verify_observer_candidate(p, l, cand, grid);
            cands.push_back(json{{"candidate", to_string(cand)}, {"l", l}, {"order", r.order},
                                 {"max_residual", r.max_residual}, {"satisfies_pde", r.passed}});
        }
    out["observer_candidates"] = cands;
    out["observer_form_in_use"] = to_string(ObserverCandidate::direct_weight);
    return out;
}

json verify_transforms_section(const RunConfig& cfg, bool& ok)
{
    const KernelParams p = cfg.params();
    const RadialGrid grid(p.radius, cfg.intervals);
    const double h = grid.h();
    json out;
    json trips = json::array();
    const std::pair<KernelKind, KernelKind> pairs[] = {{KernelKind::control, KernelKind::inverse},
                                                      {KernelKind::observer, KernelKind::observer_inverse}};
    for (const auto& [fwd, inv] : pairs) {
        double worst = 0.0;
        std::mt19937_64 seeds(cfg.seed);
        std::map<int, std::pair<KernelTable, KernelTable>> tables;
        for (int l = 0; l <= cfg.l_max; ++l)
            tables.emplace(l, std::make_pair(KernelTable(p, l, fwd, grid), KernelTable(p, l, inv, grid)));
        for (int b = 0; b < 20; ++b)
            for (const auto& st : multimode_initial(p.dimension, cfg.l_max, grid, seeds())) {
                const auto& [tf, ti] = tables.at(st.index.l);
                const auto back = apply_mode_transform(apply_mode_transform(st, tf, TransformDirection::forward), ti,
                                                       TransformDirection::inverse);
                double err = 0.0, scale = 0.0;
                for (std::size_t i = 0; i < st.values.size(); ++i) {
                    err = std::max(err, std::fabs(back.values[i] - st.values[i]));
                    scale = std::max(scale, std::fabs(st.values[i]));
                }
                worst = std::max(worst, err / scale);
            }
        const bool pass = worst <= 5.0 * h * h;
        ok = ok && pass;
        trips.push_back(json{{"forward", to_string(fwd)}, {"inverse", to_string(inv)}, {"max_relative_error", worst},
                             {"tolerance", 5.0 * h * h}, {"passed", pass}});
    }
    out["round_trips"] = trips;
    json probes = json::array();
    if (p.dimension == 2 || p.dimension == 3) {
        for (auto kind : {KernelKind::control, KernelKind::inverse, KernelKind::observer, KernelKind::observer_inverse}) {
            const auto b = transform_bound_probe(p, kind, grid, cfg.l_max, cfg.batch_size, cfg.seed);
            bool pass = b.within();
            if (kind == KernelKind::control) pass = pass && b.max_ratio_l2 >= 1.0 - 1e-6;
            ok = ok && pass;
            probes.push_back(json{{"kind", to_string(kind)},
                                  {"samples", b.samples},
                                  {"max_ratio_l2", b.max_ratio_l2},
                                  {"min_ratio_l2", b.min_ratio_l2},
                                  {"bound_l2", b.bound_l2},
                                  {"max_ratio_h1", b.max_ratio_h1},
                                  {"bound_h1", b.bound_h1},
                                  {"passed", pass}});
        }
    } else {
        out["bound_probe_skipped"] = "bound probes need n = 2 or 3";
    }
    out["bound_probes"] = probes;
    return out;
}

json cross_validate_section(const RunConfig& cfg, bool& ok)
{
    if (cfg.n != 2) throw ConfigError("cross-validate needs n = 2");
    json out = json::array();
    for (auto ctrl : {Controller::none, Controller::full_state}) {
        RunConfig c = cfg;
        c.controller = ctrl;
        c.horizon = cfg.oracle_horizon;
        Scenario s = make_scenario(c);
        s.snapshot_interval = 0.0;
        const auto rep = run_scenario(s);
        DiskOracleConfig dc;
        dc.radial = cfg.disk_radial;
        dc.angular = cfg.disk_angular;
        dc.dt = cfg.dt;
        dc.horizon = cfg.oracle_horizon;
        dc.output_interval = cfg.output_interval;
        const auto orc = disk_oracle_run(s, dc);
        const std::size_t count = std::min(orc.t.size(), rep.norms.size());
        double worst_l2 = 0.0, worst_u = 0.0, variance = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            if (std::fabs(orc.t[i] - rep.norms[i].t) > 1e-9) throw SolverError("cross-validate: output times differ");
            worst_l2 = std::max(worst_l2, std::fabs(orc.l2_u[i] - rep.norms[i].l2_u) / rep.norms[i].l2_u);
            variance = std::max(variance, orc.angular_variance[i]);
            if (ctrl == Controller::full_state && i > 0) {
                const auto uh = assemble_boundary_control(rep.controls, rep.norms[i].t, orc.theta);
                double diff = 0.0, scale = 0.0;
                for (std::size_t j = 0; j < uh.size(); ++j) {
                    diff = std::max(diff, std::fabs(uh[j] - orc.control[i][j]));
                    scale = std::max(scale, std::fabs(uh[j]));
                }
                worst_u = std::max(worst_u, diff / scale);
            }
        }
        const bool pass = worst_l2 <= 0.02 && worst_u <= 0.02;
        ok = ok && pass;
        out.push_back(json{{"controller", to_string(ctrl)},
                           {"samples", count},
                           {"max_relative_l2_gap", worst_l2},
                           {"max_relative_control_gap", worst_u},
                           {"tolerance", 0.02},
                           {"passed", pass}});
    }
    return out;
}

std::string norms_csv(const SimReport& rep)
{
    std::ostringstream o;
    o << "t,l2_u,h1_u,h1_uhat,h1_utilde\n";
    for (const auto& n : rep.norms)
        o << num(n.t) << ',' << num(n.l2_u) << ',' << num(n.h1_u) << ',' << num(n.h1_uhat) << ',' << num(n.h1_utilde) << '\n';
    return o.str();
}

std::string controls_csv(const SimReport& rep)
{
    std::ostringstream o;
    o << "t,l,m,U\n";
    for (const auto& c : rep.controls) o << num(c.t) << ',' << c.l << ',' << c.m << ',' << num(c.U) << '\n';
    return o.str();
}

std::string snapshots_csv(const SimReport& rep, const RadialGrid& grid)
{
    std::ostringstream o;
    o << "t,l,m,r,value\n";
    for (const auto& snap : rep.snapshots)
        for (const auto& st : snap.plant)
            for (int i = 0; i < grid.size(); ++i)
                o << num(snap.t) << ',' << st.index.l << ',' << st.index.m << ',' << num(grid.node(i)) << ','
                  << num(st.values[i]) << '\n';
    return o.str();
}

} // namespace

RunResult run_command(const std::string& command, const RunConfig& cfg)
{
    validate_config(cfg);
    const json config = json::parse(config_to_json(cfg));
    RunResult result;
    bool ok = true;
    json verification;
    verification["command"] = command;

    if (command == "simulate") {
        const Scenario s = make_scenario(cfg);
        const auto dir = prepare_dir(cfg);
        const SimReport rep = run_scenario(s);
        atomic_write(dir / "norms.csv", norms_csv(rep));
        atomic_write(dir / "controls.csv", controls_csv(rep));
        atomic_write(dir / "snapshots.csv", snapshots_csv(rep, s.grid()));
        json summary;
        summary["command"] = command;
        summary["config"] = config;
        const double threshold = dirichlet_threshold(s.params, 0);
        summary["instability_threshold"] = threshold;
        summary["open_loop_rate_expected"] = s.params.lambda - threshold;
        json rates;
        for (const auto& [k, f] : rep.rates) rates[k] = rate_json(f);
        summary["rates"] = rates;
        const auto& last = rep.norms.back();
        summary["final"] = json{{"t", last.t}, {"l2_u", last.l2_u}, {"h1_u", last.h1_u}, {"h1_uhat", last.h1_uhat},
                                {"h1_utilde", last.h1_utilde}};
        summary["channels"] = s.initial.size();
        if (cfg.verify_kernels) verification["kernels"] = verify_kernels_section(cfg, ok);
        if (cfg.verify_transforms) verification["transforms"] = verify_transforms_section(cfg, ok);
        if (cfg.cross_validate) verification["cross_validation"] = cross_validate_section(cfg, ok);
        const bool any = cfg.verify_kernels || cfg.verify_transforms || cfg.cross_validate;
        if (any) {
            verification["passed"] = ok;
            summary["verification_passed"] = ok;
            summary["verification"] = verification;
            atomic_write(dir / "verification.json", verification.dump(2) + "\n");
        }
        result.summary_json = summary.dump(2) + "\n";
        atomic_write(dir / "summary.json", result.summary_json);
    } else if (command == "verify-kernels" || command == "verify-transforms" || command == "cross-validate") {
        verification["config"] = config;
        if (command == "verify-kernels") verification["kernels"] = verify_kernels_section(cfg, ok);
        if (command == "verify-transforms") verification["transforms"] = verify_transforms_section(cfg, ok);
        if (command == "cross-validate") verification["cross_validation"] = cross_validate_section(cfg, ok);
        verification["passed"] = ok;
        const auto dir = prepare_dir(cfg);
        result.summary_json = verification.dump(2) + "\n";
        atomic_write(dir / "verification.json", result.summary_json);
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    result.exit_code = ok ? 0 : 3;
    return result;
}

} // namespace nball
