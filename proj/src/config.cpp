#include "nball/config.hpp"

#include "nball/error.hpp"
#include "nball/radial_pde.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nball {
namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& v)
{
    long long out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void positive(const std::string& key, double v)
{
    if (!(v > 0.0)) throw ConfigError(key + " must be positive");
}

struct Entry {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    enum { number, integer, boolean, text, list } type;
};

const std::map<std::string, Entry>& entries()
{
    static const std::map<std::string, Entry> table = [] {
        std::map<std::string, Entry> t;
        auto real = [&t](const std::string& k, double RunConfig::*f, bool strictly_positive) {
            t[k] = {[k, f, strictly_positive](RunConfig& c, const std::string& v) {
                        const double x = to_double(k, v);
                        if (strictly_positive) positive(k, x);
                        else if (x < 0.0) throw ConfigError(k + " must be >= 0");
                        c.*f = x;
                    },
                    [f](const RunConfig& c) { return fmt(c.*f); }, Entry::number};
        };
        auto integer = [&t](const std::string& k, int RunConfig::*f, int lo) {
            t[k] = {[k, f, lo](RunConfig& c, const std::string& v) {
                        const long long x = to_int(k, v);
                        if (x < lo || x > 1000000) throw ConfigError(k + " must be >= " + std::to_string(lo));
                        c.*f = static_cast<int>(x);
                    },
                    [f](const RunConfig& c) { return std::to_string(c.*f); }, Entry::integer};
        };
        auto flag = [&t](const std::string& k, bool RunConfig::*f) {
            t[k] = {[k, f](RunConfig& c, const std::string& v) { c.*f = to_bool(k, v); },
                    [f](const RunConfig& c) { return std::string(c.*f ? "true" : "false"); }, Entry::boolean};
        };
        integer("n", &RunConfig::n, 2);
        real("radius", &RunConfig::radius, true);
        real("epsilon", &RunConfig::epsilon, true);
        t["lambda"] = {[](RunConfig& c, const std::string& v) {
                           if (v == "auto") {
                               c.lambda = 0.0;
                               return;
                           }
                           const double x = to_double("lambda", v);
                           positive("lambda", x);
                           c.lambda = x;
                       },
                       [](const RunConfig& c) { return c.lambda > 0.0 ? fmt(c.lambda) : std::string("auto"); },
                       Entry::number};
        real("target_damping", &RunConfig::target_damping, false);
        integer("intervals", &RunConfig::intervals, 8);
        real("dt", &RunConfig::dt, true);
        integer("l_max", &RunConfig::l_max, 0);
        real("horizon", &RunConfig::horizon, true);
        t["controller"] = {[](RunConfig& c, const std::string& v) {
                               try {
                                   c.controller = controller_from_string(v);
                               } catch (const InvalidArgument&) {
                                   throw ConfigError("controller: expected none, full_state or output_feedback, got '" + v + "'");
                               }
                           },
                           [](const RunConfig& c) { return std::string(to_string(c.controller)); }, Entry::text};
        t["initial"] = {[](RunConfig& c, const std::string& v) {
                            if (v != "multimode" && v != "eigenmode")
                                throw ConfigError("initial: expected multimode or eigenmode, got '" + v + "'");
                            c.initial = v;
                        },
                        [](const RunConfig& c) { return c.initial; }, Entry::text};
        integer("initial_degree", &RunConfig::initial_degree, 0);
        real("amplitude", &RunConfig::amplitude, true);
        t["seed"] = {[](RunConfig& c, const std::string& v) {
                         const long long x = to_int("seed", v);
                         if (x < 0) throw ConfigError("seed must be >= 0");
                         c.seed = static_cast<std::uint64_t>(x);
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }, Entry::integer};
        real("output_interval", &RunConfig::output_interval, true);
        real("snapshot_interval", &RunConfig::snapshot_interval, false);
        integer("startup_steps", &RunConfig::startup_steps, 0);
        t["output_dir"] = {[](RunConfig& c, const std::string& v) {
                               if (v.empty()) throw ConfigError("output_dir must not be empty");
                               c.output_dir = v;
                           },
                           [](const RunConfig& c) { return c.output_dir; }, Entry::text};
        flag("verify_kernels", &RunConfig::verify_kernels);
        flag("verify_transforms", &RunConfig::verify_transforms);
        flag("cross_validate", &RunConfig::cross_validate);
        integer("verify_intervals", &RunConfig::verify_intervals, 63);
        t["verify_degrees"] = {[](RunConfig& c, const std::string& v) {
                                   std::vector<int> out;
                                   std::stringstream ss(v);
                                   std::string item;
                                   while (std::getline(ss, item, ',')) {
                                       const long long x = to_int("verify_degrees", trim(item));
                                       if (x < 0) throw ConfigError("verify_degrees entries must be >= 0");
                                       out.push_back(static_cast<int>(x));
                                   }
                                   if (out.empty()) throw ConfigError("verify_degrees must list at least one degree");
                                   c.verify_degrees = out;
                               },
                               [](const RunConfig& c) {
                                   std::string s;
                                   for (std::size_t i = 0; i < c.verify_degrees.size(); ++i)
                                       s += (i ? "," : "") + std::to_string(c.verify_degrees[i]);
                                   return s;
                               },
                               Entry::list};
        integer("batch_size", &RunConfig::batch_size, 1);
        integer("disk_radial", &RunConfig::disk_radial, 8);
        integer("disk_angular", &RunConfig::disk_angular, 8);
        real("oracle_horizon", &RunConfig::oracle_horizon, true);
        return t;
    }();
    return table;
}

} // namespace

double RunConfig::resolved_lambda() const
{
    if (lambda > 0.0) return lambda;
    KernelParams p;
    p.epsilon = epsilon;
    p.radius = radius;
    p.dimension = n;
    return 1.5 * dirichlet_threshold(p, 0);
}

KernelParams RunConfig::params() const
{
    KernelParams p;
    p.epsilon = epsilon;
    p.lambda = resolved_lambda();
    p.radius = radius;
    p.dimension = n;
    p.target_damping = target_damping;
    return p;
}

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, e] : entries()) k.push_back(name);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value)
{
    const auto it = entries().find(key);
    if (it == entries().end()) throw ConfigError("unknown key '" + key + "'");
    it->second.set(cfg, trim(value));
}

std::string get_config_value(const RunConfig& cfg, const std::string& key)
{
    const auto it = entries().find(key);
    if (it == entries().end()) throw ConfigError("unknown key '" + key + "'");
    return it->second.get(cfg);
}

void validate_config(const RunConfig& cfg)
{
    if (cfg.n < 2) throw ConfigError("n must be >= 2");
    positive("radius", cfg.radius);
    positive("epsilon", cfg.epsilon);
    if (cfg.lambda < 0.0) throw ConfigError("lambda must be positive");
    positive("dt", cfg.dt);
    positive("horizon", cfg.horizon);
    if (cfg.dt > cfg.horizon) throw ConfigError("dt must not exceed horizon");
    if (cfg.output_interval < cfg.dt) throw ConfigError("output_interval must be >= dt");
    if (cfg.initial == "eigenmode" && cfg.initial_degree > cfg.l_max)
        throw ConfigError("initial_degree must not exceed l_max");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin)
{
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (seen.count(key)) throw ConfigError(where + "duplicate key '" + key + "' (first at line " + std::to_string(seen[key]) + ")");
        seen[key] = lineno;
        try {
            set_config_value(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string config_to_json(const RunConfig& cfg, int indent)
{
    nlohmann::ordered_json j;
    for (const auto& [key, e] : entries()) {
        const std::string v = key == "lambda" ? fmt(cfg.resolved_lambda()) : e.get(cfg);
        switch (e.type) {
        case Entry::number: j[key] = std::stod(v); break;
        case Entry::integer: j[key] = std::stoll(v); break;
        case Entry::boolean: j[key] = v == "true"; break;
        case Entry::text: j[key] = v; break;
        case Entry::list: j[key] = cfg.verify_degrees; break;
        }
    }
    return j.dump(indent);
}

RunConfig config_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("JSON config must be an object");
    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        std::string v;
        if (value.is_string()) {
            v = value.get<std::string>();
        } else if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) v += (i ? "," : "") + value[i].dump();
        } else if (value.is_number_float()) {
            v = fmt(value.get<double>());
        } else {
            v = value.dump();
        }
        set_config_value(cfg, key, v);
    }
    validate_config(cfg);
    return cfg;
}

Scenario make_scenario(const RunConfig& cfg)
{
    validate_config(cfg);
    Scenario s;
    s.params = cfg.params();
    s.intervals = cfg.intervals;
    s.dt = cfg.dt;
    s.horizon = cfg.horizon;
    s.controller = cfg.controller;
    s.output_interval = cfg.output_interval;
    s.snapshot_interval = cfg.snapshot_interval;
    s.startup_steps = cfg.startup_steps;
    const RadialGrid grid = s.grid();
    if (cfg.initial == "eigenmode")
        s.initial = eigenmode_initial(cfg.n, cfg.initial_degree, grid, cfg.amplitude);
    else
        s.initial = multimode_initial(cfg.n, cfg.l_max, grid, cfg.seed, cfg.amplitude);
    return s;
}

} // namespace nball
