// Command-line front end; talks to the library only through nball.h.
#include "nball/nball.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

using json = nlohmann::json;

int exit_for(nball_status st)
{
    switch (st) {
    case NBALL_OK: return 0;
    case NBALL_ERR_CONFIG:
    case NBALL_ERR_ARGUMENT: return 2;
    case NBALL_ERR_VERIFICATION: return 3;
    default: return 4;
    }
}

const char* kind_for(nball_status st)
{
    switch (st) {
    case NBALL_ERR_CONFIG:
    case NBALL_ERR_ARGUMENT: return "config";
    case NBALL_ERR_VERIFICATION: return "verification";
    case NBALL_ERR_SOLVER: return "solver";
    case NBALL_ERR_IO: return "io";
    default: return "internal";
    }
}

int fail(int code, const std::string& kind, const std::string& message, const json& detail = nullptr)
{
    json rec{{"status", "error"}, {"exit_code", code}, {"kind", kind}, {"message", message}};
    if (!detail.is_null()) rec["detail"] = detail;
    std::cerr << rec.dump() << std::endl;
    return code;
}

void print_summary(const std::string& command, const json& s)
{
    if (command == "simulate") {
        const auto& c = s["config"];
        std::printf("simulate: n=%d controller=%s lambda=%.6g channels=%d horizon=%.6g\n", c["n"].get<int>(),
                    c["controller"].get<std::string>().c_str(), c["lambda"].get<double>(), s["channels"].get<int>(),
                    c["horizon"].get<double>());
        std::printf("  instability threshold %.6g, open-loop growth expected %.6g\n",
                    s["instability_threshold"].get<double>(), s["open_loop_rate_expected"].get<double>());
        for (const auto& [key, fit] : s["rates"].items())
            std::printf("  decay rate %-16s %12.6g  (r^2 %.4f)\n", key.c_str(), fit["rate"].get<double>(),
                        fit["r_squared"].get<double>());
        const auto& f = s["final"];
        std::printf("  final t=%.6g |u|_L2=%.6g |u|_H1=%.6g\n", f["t"].get<double>(), f["l2_u"].get<double>(),
                    f["h1_u"].get<double>());
        if (s.contains("verification_passed"))
            std::printf("  verification %s\n", s["verification_passed"].get<bool>() ? "passed" : "FAILED");
        return;
    }
    if (s.contains("kernels"))
        for (const auto& r : s["kernels"]["kernels"])
            std::printf("  %-16s l=%d order %.3f %s\n", r["kind"].get<std::string>().c_str(), r["l"].get<int>(),
                        r["order"].get<double>(), r["passed"].get<bool>() ? "ok" : "FAIL");
    if (s.contains("transforms")) {
        for (const auto& r : s["transforms"]["round_trips"])
            std::printf("  round trip %s/%s error %.3g (tol %.3g) %s\n", r["forward"].get<std::string>().c_str(),
                        r["inverse"].get<std::string>().c_str(), r["max_relative_error"].get<double>(),
                        r["tolerance"].get<double>(), r["passed"].get<bool>() ? "ok" : "FAIL");
        for (const auto& r : s["transforms"]["bound_probes"])
            std::printf("  bound %-16s L2 %.4g <= %.4g  H1 %.4g <= %.4g %s\n", r["kind"].get<std::string>().c_str(),
                        r["max_ratio_l2"].get<double>(), r["bound_l2"].get<double>(), r["max_ratio_h1"].get<double>(),
                        r["bound_h1"].get<double>(), r["passed"].get<bool>() ? "ok" : "FAIL");
    }
    if (s.contains("cross_validation"))
        for (const auto& r : s["cross_validation"])
            std::printf("  oracle %-12s L2 gap %.3g control gap %.3g %s\n", r["controller"].get<std::string>().c_str(),
                        r["max_relative_l2_gap"].get<double>(), r["max_relative_control_gap"].get<double>(),
                        r["passed"].get<bool>() ? "ok" : "FAIL");
    std::printf("%s: %s\n", command.c_str(), s["passed"].get<bool>() ? "passed" : "FAILED");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Backstepping boundary control of reaction-diffusion on the n-ball"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;
    bool quiet = false;
    app.add_option("-c,--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "override as key=value (repeatable)");
    app.add_flag("-q,--quiet", quiet, "no human-readable summary");

    struct Flag {
        const char* name;
        const char* key;
        std::string value;
    };
    std::vector<Flag> shortcuts = {{"--n", "n", {}},           {"--radius", "radius", {}},
                                   {"--epsilon", "epsilon", {}}, {"--lambda", "lambda", {}},
                                   {"--controller", "controller", {}}, {"--horizon", "horizon", {}},
                                   {"--dt", "dt", {}},         {"--intervals", "intervals", {}},
                                   {"--l-max", "l_max", {}},   {"--seed", "seed", {}},
                                   {"--output-dir", "output_dir", {}}, {"--initial", "initial", {}}};
    for (auto& f : shortcuts) app.add_option(f.name, f.value, std::string("sets ") + f.key);

    const char* commands[] = {"simulate", "verify-kernels", "verify-transforms", "cross-validate"};
    for (const char* c : commands) app.add_subcommand(c, std::string("run ") + c)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return fail(2, "config", e.what());
    }
    const std::string command = app.get_subcommands().front()->get_name();

    nball_config* cfg = nullptr;
    if (nball_config_create(&cfg) != NBALL_OK) return fail(4, "internal", nball_last_error());
    auto cleanup = [&](int code) {
        nball_config_destroy(cfg);
        return code;
    };
    if (!config_path.empty()) {
        const auto st = nball_config_load_file(cfg, config_path.c_str());
        if (st != NBALL_OK) return cleanup(fail(exit_for(st), kind_for(st), nball_last_error()));
    }
    // Flags win over the file; explicit --set entries are applied last.
    for (const auto& f : shortcuts) {
        if (f.value.empty()) continue;
        const auto st = nball_config_set(cfg, f.key, f.value.c_str());
        if (st != NBALL_OK) return cleanup(fail(exit_for(st), kind_for(st), nball_last_error()));
    }
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) return cleanup(fail(2, "config", "--set expects key=value, got '" + kv + "'"));
        const auto st = nball_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (st != NBALL_OK) return cleanup(fail(exit_for(st), kind_for(st), nball_last_error()));
    }

    nball_result* res = nullptr;
    const auto st = nball_run(cfg, command.c_str(), &res);
    if (st != NBALL_OK) return cleanup(fail(exit_for(st), kind_for(st), nball_last_error()));
    const int code = nball_result_exit_code(res);
    json summary = json::parse(nball_result_summary(res), nullptr, false);
    nball_result_destroy(res);
    if (!quiet && !summary.is_discarded()) print_summary(command, summary);
    if (code != 0) {
        json failed = json::array();
        if (!summary.is_discarded()) {
            const json& v = summary.contains("verification") ? summary["verification"] : summary;
            auto collect = [&](const json& arr) {
                for (const auto& r : arr)
                    if (r.contains("passed") && !r["passed"].get<bool>()) failed.push_back(r);
            };
            if (v.contains("kernels")) collect(v["kernels"]["kernels"]);
            if (v.contains("transforms")) {
                collect(v["transforms"]["round_trips"]);
                collect(v["transforms"]["bound_probes"]);
            }
            if (v.contains("cross_validation")) collect(v["cross_validation"]);
        }
        return cleanup(fail(code, "verification", command + ": verification failed", failed));
    }
    return cleanup(0);
}
