#include "nball/closedloop.hpp"

#include "nball/error.hpp"
#include "nball/harmonics.hpp"
#include "nball/radial_pde.hpp"
#include "nball/special.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace nball {

const char* to_string(Controller c)
{
    switch (c) {
    case Controller::none: return "none";
    case Controller::full_state: return "full_state";
    case Controller::output_feedback: return "output_feedback";
    }
    return "?";
}

Controller controller_from_string(const std::string& s)
{
    for (auto c : {Controller::none, Controller::full_state, Controller::output_feedback})
        if (s == to_string(c)) return c;
    throw InvalidArgument("unknown controller '" + s + "'");
}

void Scenario::validate() const
{
    params.validate();
    if (intervals < 8) throw InvalidArgument("intervals must be >= 8");
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    if (!(output_interval > 0.0)) throw InvalidArgument("output_interval must be positive");
    if (startup_steps < 0) throw InvalidArgument("startup_steps must be >= 0");
    if (initial.empty()) throw InvalidArgument("scenario has no active channels");
    for (const auto& st : initial) {
        const auto& ix = st.index;
        if (ix.n != params.dimension) throw InvalidArgument("channel dimension differs from params");
        if (ix.l < 0 || ix.m < 0 || ix.m >= mode_count(ix.l, ix.n)) throw InvalidArgument("channel order out of range");
        if (static_cast<int>(st.values.size()) != intervals + 1)
            throw InvalidArgument("initial profile does not match the grid");
        const double scale = std::max(1.0, std::fabs(*std::max_element(st.values.begin(), st.values.end())));
        if (ix.l > 0 && std::fabs(st.values.front()) > 1e-12 * scale)
            throw InvalidArgument("initial profile of a degree >= 1 channel must vanish at r = 0");
        if (controller == Controller::none && std::fabs(st.values.back()) > 1e-12 * scale)
            throw InvalidArgument("open-loop initial data must vanish at r = R");
    }
    if (!observer_initial.empty()) {
        if (observer_initial.size() != initial.size()) throw InvalidArgument("observer initial data must match channels");
        for (std::size_t i = 0; i < initial.size(); ++i)
            if (!(observer_initial[i].index == initial[i].index) ||
                observer_initial[i].values.size() != initial[i].values.size())
                throw InvalidArgument("observer initial data must match channels");
    }
}

namespace {

std::vector<double> r_weights(const RadialGrid& grid, int n)
{
    std::vector<double> w(grid.size());
    for (int i = 0; i < grid.size(); ++i) w[i] = grid.h() * std::pow(grid.node(i), n - 1);
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

double mode_l2_sq(const std::vector<double>& u, const std::vector<double>& w)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += w[i] * u[i] * u[i];
    return acc;
}

double mode_h1_sq(const ModeState& st, const RadialGrid& grid, const std::vector<double>& w)
{
    const auto& u = st.values;
    const int n = st.index.n, l = st.index.l, m = grid.intervals();
    const double h = grid.h();
    const double mu = static_cast<double>(l) * (l + n - 2);
    if (l > 0) {
        double scale = 0.0;
        for (double v : u) scale = std::max(scale, std::fabs(v));
        if (std::fabs(u[0]) > 1e-9 * scale)
            throw InvalidArgument("h1_norm: degree " + std::to_string(l) + " channel is nonzero at r = 0");
    }
    // The weight r^{n-1} vanishes at r = 0, so the origin contributes nothing for n >= 2.
    double acc = 0.0;
    for (int i = 1; i <= m; ++i) {
        const double r = grid.node(i);
        const double du = i < m ? (u[i + 1] - u[i - 1]) / (2.0 * h) : (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * h);
        acc += w[i] * ((1.0 + mu / (r * r)) * u[i] * u[i] + du * du);
    }
    return acc;
}

// Row of weighted control-kernel values at r = R, identical to the table's last row.
std::vector<double> control_functional(const KernelParams& p, int l, const RadialGrid& grid)
{
    const int m = grid.intervals();
    const auto w = row_weights(grid.size(), grid.h());
    std::vector<double> k(grid.size());
    for (int j = 0; j < m; ++j) k[j] = w[j] * control_kernel_mode(p, l, p.radius, grid.node(j));
    k[m] = w[m] * (-(p.lambda + p.target_damping) * p.radius / (2.0 * p.epsilon));
    return k;
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

std::vector<ModeState> difference(const std::vector<ModeState>& a, const std::vector<ModeState>& b)
{
    auto out = a;
    for (std::size_t c = 0; c < a.size(); ++c)
        for (std::size_t i = 0; i < a[c].values.size(); ++i) out[c].values[i] -= b[c].values[i];
    return out;
}

// Per-degree caches shared by all orders m of that degree.
struct DegreeData {
    std::unique_ptr<ChannelPropagator> prop;
    std::vector<double> k;
};

std::map<int, DegreeData> degree_data(const Scenario& s, const RadialGrid& grid)
{
    std::map<int, DegreeData> out;
    for (const auto& st : s.initial) {
        const int l = st.index.l;
        if (out.count(l)) continue;
        DegreeData d;
        d.prop = std::make_unique<ChannelPropagator>(s.params, l, grid, s.dt);
        d.k = control_functional(s.params, l, grid);
        out.emplace(l, std::move(d));
    }
    return out;
}

std::string channel_name(const ModeIndex& ix)
{
    return "(l=" + std::to_string(ix.l) + ", m=" + std::to_string(ix.m) + ")";
}

} // namespace

double l2_norm(const std::vector<ModeState>& modes, const RadialGrid& grid)
{
    if (modes.empty()) return 0.0;
    const auto w = r_weights(grid, modes.front().index.n);
    double acc = 0.0;
    for (const auto& st : modes) {
        if (static_cast<int>(st.values.size()) != grid.size()) throw InvalidArgument("l2_norm: profile does not match grid");
        acc += mode_l2_sq(st.values, w);
    }
    return std::sqrt(acc);
}

double h1_norm(const std::vector<ModeState>& modes, const RadialGrid& grid)
{
    if (modes.empty()) return 0.0;
    const auto w = r_weights(grid, modes.front().index.n);
    double acc = 0.0;
    for (const auto& st : modes) {
        if (static_cast<int>(st.values.size()) != grid.size()) throw InvalidArgument("h1_norm: profile does not match grid");
        acc += mode_h1_sq(st, grid, w);
    }
    return std::sqrt(acc);
}

RateFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& values, double t0, double t1)
{
    if (t.size() != values.size()) throw InvalidArgument("fit_decay_rate: series length mismatch");
    const double tol = 1e-9 * std::max(1.0, std::fabs(t1));
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 - tol || t[i] > t1 + tol) continue;
        if (!(values[i] > 0.0)) throw InvalidArgument("fit_decay_rate: non-positive value in window");
        x.push_back(t[i]);
        y.push_back(std::log(values[i]));
    }
    if (x.size() < 2) throw InvalidArgument("fit_decay_rate: fewer than two samples in window");
    const double nx = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= nx;
    my /= nx;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("fit_decay_rate: degenerate time window");
    const double slope = sxy / sxx;
    RateFit fit;
    fit.rate = -slope;
    const double ss_res = std::max(0.0, syy - slope * sxy);
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

std::vector<ModeState> multimode_initial(int n, int l_max, const RadialGrid& grid, std::uint64_t seed,
                                         double amplitude)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<ModeState> out;
    const double R = grid.radius();
    for (const auto& ix : enumerate_modes(n, l_max)) {
        const double draw = uni(rng);
        const double c = (draw < 0.0 ? -1.0 : 1.0) * (0.5 + 0.5 * std::fabs(draw));
        const double a1 = 0.5 * uni(rng), a2 = 0.5 * uni(rng);
        ModeState st{ix, std::vector<double>(grid.size(), 0.0), 0.0};
        for (int i = 0; i < grid.intervals(); ++i) {
            const double s = grid.node(i) / R;
            st.values[i] = amplitude / (1.0 + ix.l) * c * std::pow(s, ix.l) * (1.0 - s) * (1.0 + a1 * s + a2 * s * s);
        }
        out.push_back(std::move(st));
    }
    return out;
}

std::vector<ModeState> eigenmode_initial(int n, int l, const RadialGrid& grid, double amplitude)
{
    ModeState st{{n, l, 0}, dirichlet_eigenmode(n, l, grid), 0.0};
    for (double& v : st.values) v *= amplitude;
    return {st};
}

void make_boundary_compatible(std::vector<ModeState>& modes, const KernelParams& p, const RadialGrid& grid)
{
    std::map<int, std::vector<double>> rows;
    for (auto& st : modes) {
        const int l = st.index.l;
        if (!rows.count(l)) rows[l] = control_functional(p, l, grid);
        const auto& k = rows[l];
        std::vector<double> bump(grid.size());
        for (int i = 0; i < grid.size(); ++i) bump[i] = std::pow(grid.node(i) / grid.radius(), l + 2);
        bump.back() = 1.0;
        const double den = 1.0 - dot(k, bump);
        if (den == 0.0) throw SolverError("make_boundary_compatible: singular correction for " + channel_name(st.index));
        const double alpha = (dot(k, st.values) - st.values.back()) / den;
        for (int i = 0; i < grid.size(); ++i) st.values[i] += alpha * bump[i];
    }
}

SimReport run_scenario(const Scenario& s)
{
    s.validate();
    const RadialGrid grid = s.grid();
    auto data = degree_data(s, grid);
    std::vector<ModeState> u = s.initial;
    std::vector<ModeState> uhat = s.observer_initial;
    if (uhat.empty()) {
        uhat = u;
        for (auto& st : uhat) std::fill(st.values.begin(), st.values.end(), 0.0);
    }
    const bool observer = s.controller == Controller::output_feedback;
    int l_top = 0;
    for (const auto& st : u) l_top = std::max(l_top, st.index.l);
    const auto w = r_weights(grid, s.params.dimension);

    SimReport rep;
    std::vector<double> U(u.size(), 0.0);
    for (std::size_t c = 0; c < u.size(); ++c) {
        const auto& k = data.at(u[c].index.l).k;
        if (s.controller == Controller::full_state) U[c] = dot(k, u[c].values);
        if (observer) U[c] = dot(k, uhat[c].values);
    }

    auto record = [&](double t) {
        NormSample ns;
        ns.t = t;
        ns.l2_by_degree.assign(l_top + 1, 0.0);
        for (const auto& st : u) ns.l2_by_degree[st.index.l] += mode_l2_sq(st.values, w);
        for (double& v : ns.l2_by_degree) v = std::sqrt(v);
        ns.l2_u = l2_norm(u, grid);
        ns.h1_u = h1_norm(u, grid);
        if (observer) {
            ns.h1_uhat = h1_norm(uhat, grid);
            ns.h1_utilde = h1_norm(difference(u, uhat), grid);
        }
        rep.norms.push_back(std::move(ns));
        for (std::size_t c = 0; c < u.size(); ++c) rep.controls.push_back({t, u[c].index.l, u[c].index.m, U[c]});
    };

    const long steps = std::max(1L, std::lround(s.horizon / s.dt));
    const long out_every = std::max(1L, std::lround(s.output_interval / s.dt));
    const long snap_every = s.snapshot_interval > 0.0 ? std::max(1L, std::lround(s.snapshot_interval / s.dt)) : 0;
    record(0.0);
    if (snap_every) rep.snapshots.push_back({0.0, u});
    for (long step = 0; step < steps; ++step) {
        const bool startup = step < s.startup_steps;
        for (std::size_t c = 0; c < u.size(); ++c) {
            const auto& d = data.at(u[c].index.l);
            try {
                switch (s.controller) {
                case Controller::none: d.prop->step_plant(u[c].values, 0.0, startup); break;
                case Controller::full_state: U[c] = d.prop->step_full_state(u[c].values, d.k, startup); break;
                case Controller::output_feedback:
                    U[c] = d.prop->step_output_feedback(u[c].values, uhat[c].values, d.k, startup);
                    break;
                }
            } catch (const SolverError& e) {
                throw SolverError(std::string(e.what()) + " in channel " + channel_name(u[c].index));
            }
            for (double v : u[c].values)
                if (!std::isfinite(v)) throw SolverError("non-finite state in channel " + channel_name(u[c].index));
        }
        const double t = (step + 1) * s.dt;
        for (auto& st : u) st.time = t;
        for (auto& st : uhat) st.time = t;
        if ((step + 1) % out_every == 0 || step + 1 == steps) {
            if (rep.norms.back().t < t - 0.5 * s.dt) record(t);
        }
        if (snap_every && (step + 1) % snap_every == 0) rep.snapshots.push_back({t, u});
    }
    const double t_end = steps * s.dt;
    if (rep.snapshots.empty() || rep.snapshots.back().t < t_end - 0.5 * s.dt) rep.snapshots.push_back({t_end, u});
    rep.final_plant = u;
    rep.final_observer = uhat;

    std::vector<double> ts;
    for (const auto& ns : rep.norms) ts.push_back(ns.t);
    auto fit = [&](const std::string& key, auto get) {
        std::vector<double> v;
        for (const auto& ns : rep.norms) v.push_back(get(ns));
        try {
            rep.rates[key] = fit_decay_rate(ts, v, 0.5 * t_end, t_end);
        } catch (const InvalidArgument&) {
            // series hit zero inside the window; no rate
        }
    };
    fit("l2_u", [](const NormSample& ns) { return ns.l2_u; });
    fit("h1_u", [](const NormSample& ns) { return ns.h1_u; });
    for (int l = 0; l <= l_top; ++l)
        fit("l2_degree_" + std::to_string(l), [l](const NormSample& ns) { return ns.l2_by_degree[l]; });
    if (observer) {
        fit("h1_uhat", [](const NormSample& ns) { return ns.h1_uhat; });
        fit("h1_utilde", [](const NormSample& ns) { return ns.h1_utilde; });
        fit("h1_u_plus_uhat", [](const NormSample& ns) { return ns.h1_u + ns.h1_uhat; });
    }
    return rep;
}

TrackingReport target_tracking(const Scenario& s_in)
{
    Scenario s = s_in;
    s.controller = Controller::full_state;
    s.validate();
    const RadialGrid grid = s.grid();
    auto data = degree_data(s, grid);
    std::map<int, KernelTable> tables;
    for (const auto& [l, d] : data) tables.emplace(l, KernelTable(s.params, l, KernelKind::control, grid));

    TrackingReport rep;
    rep.h = grid.h();
    rep.dt = s.dt;
    std::vector<ModeState> u = s.initial, w;
    for (const auto& st : u) {
        for (double v : st.values) rep.initial_sup = std::max(rep.initial_sup, std::fabs(v));
        w.push_back(apply_mode_transform(st, tables.at(st.index.l), TransformDirection::forward));
    }
    const long steps = std::max(1L, std::lround(s.horizon / s.dt));
    for (long step = 0; step < steps; ++step) {
        const bool startup = step < s.startup_steps;
        for (std::size_t c = 0; c < u.size(); ++c) {
            const auto& d = data.at(u[c].index.l);
            d.prop->step_full_state(u[c].values, d.k, startup);
            d.prop->step_target(w[c].values, startup);
            const auto wt = apply_mode_transform(u[c], tables.at(u[c].index.l), TransformDirection::forward);
            for (std::size_t i = 0; i < wt.values.size(); ++i)
                rep.max_discrepancy = std::max(rep.max_discrepancy, std::fabs(wt.values[i] - w[c].values[i]));
        }
    }
    return rep;
}

void transform_bounds(const KernelParams& p, KernelKind kind, double& bound_l2, double& bound_h1)
{
    p.validate();
    const double c = p.gain(), R = p.radius, n = p.dimension;
    const bool modified = kind == KernelKind::control || kind == KernelKind::observer;
    const double xmax = std::sqrt(c) * R;
    // C_I bounds c f(x); C_J bounds d_r of it, c^2 r |f'(x)/x| with f' / x = I2/x^2 or -J2/x^2.
    const double ci = modified ? c * bessel_i1_over_x(xmax) : 0.5 * c;
    const double cj = modified ? c * c * R * bessel_i2_over_x2(xmax) : c * c * R / 8.0;
    const double R4 = R * R * R * R;
    bound_l2 = std::sqrt(2.0 + R4 * ci * ci / (2.0 * n));
    bound_h1 = std::sqrt(5.0 + ci * ci * R4 / n + 3.0 * R4 * cj * cj / (4.0 * n));
}

BoundProbe transform_bound_probe(const KernelParams& p, KernelKind kind, const RadialGrid& grid, int l_max,
                                 int batch, std::uint64_t seed)
{
    if (p.dimension != 2 && p.dimension != 3) throw InvalidArgument("transform_bound_probe: n must be 2 or 3");
    if (batch < 1) throw InvalidArgument("transform_bound_probe: empty batch");
    std::map<int, KernelTable> tables;
    for (int l = 0; l <= l_max; ++l) tables.emplace(l, KernelTable(p, l, kind, grid));
    const auto dir = (kind == KernelKind::control || kind == KernelKind::observer) ? TransformDirection::forward
                                                                                 : TransformDirection::inverse;
    BoundProbe out;
    out.kind = kind;
    out.samples = batch;
    out.min_ratio_l2 = 1e300;
    transform_bounds(p, kind, out.bound_l2, out.bound_h1);
    std::mt19937_64 seeds(seed);
    for (int b = 0; b < batch; ++b) {
        const auto f = multimode_initial(p.dimension, l_max, grid, seeds());
        std::vector<ModeState> tf;
        for (const auto& st : f) tf.push_back(apply_mode_transform(st, tables.at(st.index.l), dir));
        const double r2 = l2_norm(tf, grid) / l2_norm(f, grid);
        const double r1 = h1_norm(tf, grid) / h1_norm(f, grid);
        if (!std::isfinite(r2) || !std::isfinite(r1)) throw SolverError("transform_bound_probe: non-finite ratio");
        out.max_ratio_l2 = std::max(out.max_ratio_l2, r2);
        out.min_ratio_l2 = std::min(out.min_ratio_l2, r2);
        out.max_ratio_h1 = std::max(out.max_ratio_h1, r1);
    }
    return out;
}

std::vector<double> assemble_boundary_control(const std::vector<ControlSample>& controls, double t,
                                              const std::vector<double>& theta)
{
    std::vector<double> out(theta.size(), 0.0);
    for (const auto& cs : controls) {
        if (std::fabs(cs.t - t) > 1e-9) continue;
        for (std::size_t j = 0; j < theta.size(); ++j)
            out[j] += cs.U * harmonic_value({2, cs.l, cs.m}, AngularPoint{{theta[j]}});
    }
    return out;
}

} // namespace nball
