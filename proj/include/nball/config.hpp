#pragma once

#include "nball/closedloop.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nball {

struct RunConfig {
    int n = 2;
    double radius = 1.0;
    double epsilon = 1.0;
    double lambda = 0.0;  // 0 means 1.5 x the open-loop instability threshold
    double target_damping = 0.0;
    int intervals = 256;
    double dt = 1e-3;
    int l_max = 8;
    double horizon = 2.0;
    Controller controller = Controller::output_feedback;
    std::string initial = "multimode";  // multimode | eigenmode
    int initial_degree = 0;
    double amplitude = 1.0;
    std::uint64_t seed = 1;
    double output_interval = 0.01;
    double snapshot_interval = 0.0;
    int startup_steps = 2;
    std::string output_dir = "nball_out";
    bool verify_kernels = false;
    bool verify_transforms = false;
    bool cross_validate = false;
    int verify_intervals = 64;
    std::vector<int> verify_degrees = {0, 1, 2, 5};
    int batch_size = 100;
    int disk_radial = 128;
    int disk_angular = 64;
    double oracle_horizon = 1.0;

    double resolved_lambda() const;
    KernelParams params() const;
};

// Sets one key from its text form; throws ConfigError naming the key.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);
const std::vector<std::string>& config_keys();

// Flat "key = value" text; '#' starts a comment. Errors carry the line number.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "config");
RunConfig parse_config_file(const std::string& path);
void validate_config(const RunConfig& cfg);

// JSON echo with lambda resolved; from_json accepts the same document.
std::string config_to_json(const RunConfig& cfg, int indent = 2);
RunConfig config_from_json(const std::string& text);

Scenario make_scenario(const RunConfig& cfg);

struct RunResult {
    int exit_code = 0;         // 0 ok, 3 verification failure
    std::string summary_json;  // summary.json or verification.json content
};

// simulate | verify-kernels | verify-transforms | cross-validate; writes into cfg.output_dir.
RunResult run_command(const std::string& command, const RunConfig& cfg);

} // namespace nball
