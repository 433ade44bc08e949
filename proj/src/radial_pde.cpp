#include "nball/radial_pde.hpp"

#include "nball/error.hpp"
#include "nball/special.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nball {

std::vector<double> Tridiagonal::apply(const std::vector<double>& u) const
{
    const int n = size();
    if (static_cast<int>(u.size()) != n) throw InvalidArgument("Tridiagonal::apply: size mismatch");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double v = diag[i] * u[i];
        if (i > 0) v += sub[i] * u[i - 1];
        if (i + 1 < n) v += super[i] * u[i + 1];
        out[i] = v;
    }
    return out;
}

Tridiagonal assemble_radial_operator(const KernelParams& p, int l, const RadialGrid& grid, double reaction)
{
    if (l < 0) throw InvalidArgument("assemble_radial_operator: degree must be >= 0");
    if (p.dimension < 2) throw InvalidArgument("assemble_radial_operator: dimension must be >= 2");
    const int sz = grid.size(), m = grid.intervals(), n = p.dimension;
    const double h = grid.h(), eps = p.epsilon;
    const double mu = static_cast<double>(l) * (l + n - 2);
    Tridiagonal op{std::vector<double>(sz, 0.0), std::vector<double>(sz, 0.0), std::vector<double>(sz, 0.0)};
    if (l == 0) {
        op.diag[0] = -2.0 * n * eps / (h * h) + reaction;
        op.super[0] = 2.0 * n * eps / (h * h);
    }
    for (int i = 1; i < m; ++i) {
        const double r = grid.node(i);
        const double wl = std::pow((i - 0.5) / i, n - 1);
        const double wr = std::pow((i + 0.5) / i, n - 1);
        op.sub[i] = eps * wl / (h * h);
        op.super[i] = eps * wr / (h * h);
        op.diag[i] = -eps * (wl + wr) / (h * h) - eps * mu / (r * r) + reaction;
    }
    return op;
}

double largest_eigenvalue(const Tridiagonal& op, int l)
{
    const int first = l == 0 ? 0 : 1;
    const int last = op.size() - 2;
    const int count = last - first + 1;
    if (count < 1) throw InvalidArgument("largest_eigenvalue: operator too small");
    std::vector<double> d(count), e2(count, 0.0);
    for (int k = 0; k < count; ++k) {
        d[k] = op.diag[first + k];
        if (k + 1 < count) {
            const double prod = op.super[first + k] * op.sub[first + k + 1];
            if (prod < 0.0) throw SolverError("largest_eigenvalue: operator not symmetrizable");
            e2[k] = prod;
        }
    }
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < count; ++k) {
        const double rad = std::sqrt(e2[k]) + (k > 0 ? std::sqrt(e2[k - 1]) : 0.0);
        lo = std::min(lo, d[k] - rad);
        hi = std::max(hi, d[k] + rad);
    }
    // Number of eigenvalues below x.
    auto below = [&](double x) {
        int c = 0;
        double q = 1.0;
        for (int k = 0; k < count; ++k) {
            q = d[k] - x - (k > 0 ? e2[k - 1] / q : 0.0);
            if (q == 0.0) q = -1e-300;
            if (q < 0.0) ++c;
        }
        return c;
    };
    for (int it = 0; it < 300 && hi - lo > 1e-14 * std::max(1.0, std::fabs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (below(mid) == count)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double dirichlet_threshold(const KernelParams& p, int l)
{
    const double j = first_bessel_zero(l + 0.5 * p.dimension - 1.0);
    return p.epsilon * (j / p.radius) * (j / p.radius);
}

std::vector<double> dirichlet_eigenmode(int n, int l, const RadialGrid& grid)
{
    const double nu = l + 0.5 * n - 1.0;
    const double k = first_bessel_zero(nu) / grid.radius();
    std::vector<double> u(grid.size(), 0.0);
    for (int i = 1; i < grid.intervals(); ++i) {
        const double r = grid.node(i);
        u[i] = std::pow(r, 1.0 - 0.5 * n) * bessel_j(nu, k * r);
    }
    if (l == 0) u[0] = std::pow(0.5 * k, nu) / std::tgamma(nu + 1.0);
    double mx = 0.0;
    for (double v : u) mx = std::max(mx, std::fabs(v));
    for (double& v : u) v /= mx;
    return u;
}

double boundary_slope(const std::vector<double>& u, double h)
{
    const std::size_t m = u.size() - 1;
    if (u.size() < 3) throw InvalidArgument("boundary_slope: need at least 3 nodes");
    return (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * h);
}

ChannelPropagator::ChannelPropagator(const KernelParams& p, int l, const RadialGrid& grid, double dt, double theta)
    : params_(p), l_(l), grid_(grid), dt_(dt)
{
    p.validate();
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(theta >= 0.5 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0.5, 1]");
    gain_.assign(grid.size(), 0.0);
    for (int i = 0; i < grid.intervals(); ++i) gain_[i] = output_injection_gain(p, l, grid.node(i));
    if (l > 0) gain_[0] = 0.0;
    const auto plant = assemble_radial_operator(p, l, grid, p.lambda);
    const auto target = assemble_radial_operator(p, l, grid, -p.target_damping);
    main_ = make_stage(plant, dt, theta, true);
    start_ = make_stage(plant, 0.5 * dt, 1.0, true);
    target_main_ = make_stage(target, dt, theta, false);
    target_start_ = make_stage(target, 0.5 * dt, 1.0, false);
}

ChannelPropagator::Stage ChannelPropagator::make_stage(const Tridiagonal& op, double dt, double theta,
                                                        bool observer) const
{
    Stage s;
    s.dt = dt;
    s.theta = theta;
    s.op = op;
    const int sz = grid_.size(), m = grid_.intervals();
    std::vector<double> a(sz, 0.0), b(sz, 1.0), c(sz, 0.0);
    for (int i = (l_ == 0 ? 0 : 1); i < m; ++i) {
        a[i] = -theta * dt * op.sub[i];
        b[i] = 1.0 - theta * dt * op.diag[i];
        c[i] = -theta * dt * op.super[i];
    }
    s.cp.assign(sz, 0.0);
    s.inv.assign(sz, 0.0);
    for (int i = 0; i < sz; ++i) {
        const double den = b[i] - (i > 0 ? a[i] * s.cp[i - 1] : 0.0);
        if (den == 0.0 || !std::isfinite(den)) throw SolverError("degenerate radial system for l=" + std::to_string(l_));
        s.inv[i] = 1.0 / den;
        s.cp[i] = c[i] / den;
    }
    s.lsub = std::move(a);
    s.phi = solve(s, std::vector<double>(sz, 0.0), 1.0);
    if (observer) {
        std::vector<double> rhs(sz, 0.0);
        for (int i = 0; i < m; ++i) rhs[i] = theta * dt * gain_[i];
        s.q = solve(s, rhs, 0.0);
        s.dq = slope_tail(s.q);
        const double sphi = boundary_slope(s.phi, grid_.h());
        for (int i = 0; i < m; ++i) rhs[i] = theta * dt * gain_[i] * sphi;
        s.obs_phi = observer_solve(s, rhs, 1.0);
    }
    return s;
}

std::vector<double> ChannelPropagator::solve(const Stage& s, std::vector<double> rhs, double boundary_value) const
{
    const int sz = grid_.size();
    if (l_ > 0) rhs[0] = 0.0;
    rhs[sz - 1] = boundary_value;
    rhs[0] *= s.inv[0];
    for (int i = 1; i < sz; ++i) rhs[i] = (rhs[i] - s.lsub[i] * rhs[i - 1]) * s.inv[i];
    for (int i = sz - 2; i >= 0; --i) rhs[i] -= s.cp[i] * rhs[i + 1];
    return rhs;
}

std::vector<double> ChannelPropagator::explicit_rhs(const Stage& s, const std::vector<double>& u) const
{
    if (static_cast<int>(u.size()) != grid_.size()) throw InvalidArgument("mode profile does not match grid");
    std::vector<double> rhs(u);
    if (s.theta < 1.0) {
        const auto au = s.op.apply(u);
        const double w = (1.0 - s.theta) * s.dt;
        for (int i = 0; i < grid_.intervals(); ++i) rhs[i] += w * au[i];
    }
    return rhs;
}

double ChannelPropagator::slope_tail(const std::vector<double>& v) const
{
    const int m = grid_.intervals();
    return (-4.0 * v[m - 1] + v[m - 2]) / (2.0 * grid_.h());
}

std::vector<double> ChannelPropagator::observer_rhs(const Stage& s, const std::vector<double>& uhat, double y_old,
                                                    double y_new) const
{
    auto rhs = explicit_rhs(s, uhat);
    const double innov_old = s.theta < 1.0 ? (1.0 - s.theta) * s.dt * (y_old - boundary_slope(uhat, grid_.h())) : 0.0;
    const double innov_new = s.theta * s.dt * y_new;
    for (int i = 0; i < grid_.intervals(); ++i) rhs[i] += gain_[i] * (innov_old + innov_new);
    return rhs;
}

std::vector<double> ChannelPropagator::observer_solve(const Stage& s, std::vector<double> rhs,
                                                      double boundary_value) const
{
    // The implicit injection -theta dt p (d . u) is rank one: move the u_m part to the
    // right side, then Sherman-Morrison on the remaining two-entry row vector.
    const double known = s.theta * s.dt * 3.0 * boundary_value / (2.0 * grid_.h());
    for (int i = 0; i < grid_.intervals(); ++i) rhs[i] -= gain_[i] * known;
    auto z = solve(s, std::move(rhs), boundary_value);
    const double alpha = slope_tail(z) / (1.0 + s.dq);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= alpha * s.q[i];
    return z;
}

void ChannelPropagator::plant_stage(const Stage& s, std::vector<double>& u, double b) const
{
    u = solve(s, explicit_rhs(s, u), b);
}

void ChannelPropagator::observer_stage(const Stage& s, std::vector<double>& uhat, double b, double y_old,
                                       double y_new) const
{
    uhat = observer_solve(s, observer_rhs(s, uhat, y_old, y_new), b);
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace

double ChannelPropagator::full_state_stage(const Stage& s, std::vector<double>& u, const std::vector<double>& k) const
{
    // The new state is affine in the boundary value: u' = x0 + U phi, and U = k . u'.
    const auto x0 = solve(s, explicit_rhs(s, u), 0.0);
    const double den = 1.0 - dot(k, s.phi);
    if (den == 0.0) throw SolverError("closed-loop boundary equation is singular for l=" + std::to_string(l_));
    const double U = dot(k, x0) / den;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = x0[i] + U * s.phi[i];
    return U;
}

double ChannelPropagator::output_feedback_stage(const Stage& s, std::vector<double>& u, std::vector<double>& uhat,
                                                const std::vector<double>& k) const
{
    const double h = grid_.h();
    const double y_old = boundary_slope(u, h);
    const auto x0 = solve(s, explicit_rhs(s, u), 0.0);
    const auto z0 = observer_solve(s, observer_rhs(s, uhat, y_old, boundary_slope(x0, h)), 0.0);
    const double den = 1.0 - dot(k, s.obs_phi);
    if (den == 0.0) throw SolverError("output-feedback boundary equation is singular for l=" + std::to_string(l_));
    const double U = dot(k, z0) / den;
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = x0[i] + U * s.phi[i];
        uhat[i] = z0[i] + U * s.obs_phi[i];
    }
    return U;
}

void ChannelPropagator::step_plant(std::vector<double>& u, double boundary_value, bool startup) const
{
    if (startup) {
        plant_stage(start_, u, boundary_value);
        plant_stage(start_, u, boundary_value);
    } else {
        plant_stage(main_, u, boundary_value);
    }
}

void ChannelPropagator::step_observer(std::vector<double>& uhat, double boundary_value, double y_old, double y_new,
                                      bool startup) const
{
    if (startup) {
        // Half-step measurement taken as the average of the two levels.
        const double y_mid = 0.5 * (y_old + y_new);
        observer_stage(start_, uhat, boundary_value, y_old, y_mid);
        observer_stage(start_, uhat, boundary_value, y_mid, y_new);
    } else {
        observer_stage(main_, uhat, boundary_value, y_old, y_new);
    }
}

double ChannelPropagator::step_full_state(std::vector<double>& u, const std::vector<double>& k, bool startup) const
{
    if (!startup) return full_state_stage(main_, u, k);
    full_state_stage(start_, u, k);
    return full_state_stage(start_, u, k);
}

double ChannelPropagator::step_output_feedback(std::vector<double>& u, std::vector<double>& uhat,
                                               const std::vector<double>& k, bool startup) const
{
    if (!startup) return output_feedback_stage(main_, u, uhat, k);
    output_feedback_stage(start_, u, uhat, k);
    return output_feedback_stage(start_, u, uhat, k);
}

void ChannelPropagator::step_target(std::vector<double>& w, bool startup) const
{
    if (startup) {
        plant_stage(target_start_, w, 0.0);
        plant_stage(target_start_, w, 0.0);
    } else {
        plant_stage(target_main_, w, 0.0);
    }
}

namespace {

RadialGrid grid_for(const ModeState& st, const KernelParams& p)
{
    if (st.index.n != p.dimension) throw InvalidArgument("mode dimension differs from kernel parameters");
    if (st.values.size() < 3) throw InvalidArgument("mode profile needs at least 3 nodes");
    return RadialGrid(p.radius, static_cast<int>(st.values.size()) - 1);
}

} // namespace

ModeState step_plant_mode(const ModeState& state, const KernelParams& p, double dt, double boundary_value)
{
    ChannelPropagator prop(p, state.index.l, grid_for(state, p), dt);
    ModeState out = state;
    prop.step_plant(out.values, boundary_value);
    out.time += dt;
    return out;
}

ModeState step_observer_mode(const ModeState& state, const KernelParams& p, double dt, double boundary_value,
                             double measurement_old, double measurement_new)
{
    ChannelPropagator prop(p, state.index.l, grid_for(state, p), dt);
    ModeState out = state;
    prop.step_observer(out.values, boundary_value, measurement_old, measurement_new);
    out.time += dt;
    return out;
}

double compute_mode_control(const ModeState& state, const KernelTable& table)
{
    if (table.kind() != KernelKind::control) throw InvalidArgument("compute_mode_control: needs a control table");
    if (table.degree() != state.index.l) throw InvalidArgument("compute_mode_control: degree mismatch");
    return table.integrate_row(table.grid().intervals(), state.values);
}

ModeState apply_mode_transform(const ModeState& state, const KernelTable& table, TransformDirection direction)
{
    const KernelKind kind = table.kind();
    const bool forward_kind = kind == KernelKind::control || kind == KernelKind::observer;
    if (forward_kind != (direction == TransformDirection::forward))
        throw InvalidArgument(std::string("apply_mode_transform: ") + to_string(kind) + " table does not match direction");
    if (table.degree() != state.index.l) throw InvalidArgument("apply_mode_transform: degree mismatch");
    if (static_cast<int>(state.values.size()) != table.grid().size())
        throw InvalidArgument("apply_mode_transform: profile does not match grid");
    const double sign = forward_kind ? -1.0 : 1.0;
    ModeState out = state;
    for (int i = 0; i < table.grid().size(); ++i) out.values[i] += sign * table.integrate_row(i, state.values);
    return out;
}

} // namespace nball
