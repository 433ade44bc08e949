#include "nball/nball.h"

#include "nball/config.hpp"
#include "nball/error.hpp"
#include "nball/kernels.hpp"
#include "nball/radial_pde.hpp"
#include "nball/special.hpp"

#include <cstring>
#include <new>
#include <string>

struct nball_config {
    nball::RunConfig cfg;
};

struct nball_result {
    int exit_code = 0;
    std::string summary;
};

namespace {

thread_local std::string g_last_error;

template <class F>
nball_status guarded(F&& f)
{
    try {
        f();
        g_last_error.clear();
        return NBALL_OK;
    } catch (const nball::ConfigError& e) {
        g_last_error = e.what();
        return NBALL_ERR_CONFIG;
    } catch (const nball::InvalidArgument& e) {
        g_last_error = e.what();
        return NBALL_ERR_ARGUMENT;
    } catch (const nball::SolverError& e) {
        g_last_error = e.what();
        return NBALL_ERR_SOLVER;
    } catch (const nball::IoError& e) {
        g_last_error = e.what();
        return NBALL_ERR_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return NBALL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NBALL_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return NBALL_ERR_INTERNAL;
    }
}

nball_status null_arg(const char* what)
{
    g_last_error = std::string("null argument: ") + what;
    return NBALL_ERR_ARGUMENT;
}

nball_status copy_out(const std::string& s, char* buf, size_t len, size_t* needed)
{
    if (needed) *needed = s.size() + 1;
    if (!buf || len == 0) return NBALL_OK;
    if (len < s.size() + 1) {
        g_last_error = "buffer too small";
        return NBALL_ERR_ARGUMENT;
    }
    std::memcpy(buf, s.c_str(), s.size() + 1);
    return NBALL_OK;
}

nball::KernelParams to_params(const nball_params* p)
{
    nball::KernelParams k;
    k.epsilon = p->epsilon;
    k.lambda = p->lambda;
    k.radius = p->radius;
    k.dimension = p->dimension;
    k.target_damping = p->target_damping;
    k.validate();
    return k;
}

} // namespace

extern "C" {

const char* nball_last_error(void) { return g_last_error.c_str(); }

const char* nball_version(void) { return "1.0.0"; }

nball_status nball_config_create(nball_config** out)
{
    if (!out) return null_arg("out");
    return guarded([&] { *out = new nball_config(); });
}

void nball_config_destroy(nball_config* cfg) { delete cfg; }

nball_status nball_config_load_file(nball_config* cfg, const char* path)
{
    if (!cfg) return null_arg("cfg");
    if (!path) return null_arg("path");
    return guarded([&] { cfg->cfg = nball::parse_config_file(path); });
}

nball_status nball_config_set(nball_config* cfg, const char* key, const char* value)
{
    if (!cfg) return null_arg("cfg");
    if (!key || !value) return null_arg("key/value");
    return guarded([&] {
        nball::RunConfig next = cfg->cfg;
        nball::set_config_value(next, key, value);
        cfg->cfg = next;
    });
}

nball_status nball_config_get(const nball_config* cfg, const char* key, char* buf, size_t len, size_t* needed)
{
    if (!cfg) return null_arg("cfg");
    if (!key) return null_arg("key");
    std::string v;
    const auto st = guarded([&] { v = nball::get_config_value(cfg->cfg, key); });
    return st != NBALL_OK ? st : copy_out(v, buf, len, needed);
}

nball_status nball_config_to_json(const nball_config* cfg, char* buf, size_t len, size_t* needed)
{
    if (!cfg) return null_arg("cfg");
    std::string v;
    const auto st = guarded([&] { v = nball::config_to_json(cfg->cfg); });
    return st != NBALL_OK ? st : copy_out(v, buf, len, needed);
}

nball_status nball_run(const nball_config* cfg, const char* command, nball_result** out)
{
    if (!cfg) return null_arg("cfg");
    if (!command) return null_arg("command");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guarded([&] {
        auto r = nball::run_command(command, cfg->cfg);
        auto* res = new nball_result();
        res->exit_code = r.exit_code;
        res->summary = std::move(r.summary_json);
        *out = res;
    });
}

int nball_result_exit_code(const nball_result* res) { return res ? res->exit_code : -1; }

const char* nball_result_summary(const nball_result* res) { return res ? res->summary.c_str() : ""; }

void nball_result_destroy(nball_result* res) { delete res; }

nball_status nball_kernel(const nball_params* p, int kind, int l, double r, double rho, double* out)
{
    if (!p || !out) return null_arg("params/out");
    return guarded([&] {
        if (kind < 0 || kind > 3) throw nball::InvalidArgument("kernel kind must be 0..3");
        *out = nball::kernel_mode(static_cast<nball::KernelKind>(kind), to_params(p), l, r, rho);
    });
}

nball_status nball_injection_gain(const nball_params* p, int l, double r, double* out)
{
    if (!p || !out) return null_arg("params/out");
    return guarded([&] { *out = nball::output_injection_gain(to_params(p), l, r); });
}

nball_status nball_threshold(const nball_params* p, int l, double* out)
{
    if (!p || !out) return null_arg("params/out");
    return guarded([&] {
        if (l < 0) throw nball::InvalidArgument("degree must be >= 0");
        *out = nball::dirichlet_threshold(to_params(p), l);
    });
}

nball_status nball_bessel_i1(double x, double* out)
{
    if (!out) return null_arg("out");
    return guarded([&] { *out = nball::bessel_i1(x); });
}

nball_status nball_bessel_j1(double x, double* out)
{
    if (!out) return null_arg("out");
    return guarded([&] { *out = nball::bessel_j1(x); });
}

} // extern "C"
