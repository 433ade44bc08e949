#include "nball/kernels.hpp"

#include "nball/error.hpp"
#include "nball/special.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

namespace nball {
namespace {

using Closed = std::function<double(double, double)>;

void check_lower(const KernelParams& p, double r, double rho, const char* what)
{
    if (!(rho >= 0.0) || !(rho <= r)) throw InvalidArgument(std::string(what) + ": requires 0 <= rho <= r");
    if (r > p.radius * (1.0 + 1e-12)) throw InvalidArgument(std::string(what) + ": r exceeds the radius");
}

void check_upper(const KernelParams& p, double r, double rho, const char* what)
{
    if (!(r >= 0.0) || !(r <= rho)) throw InvalidArgument(std::string(what) + ": requires 0 <= r <= rho");
    if (rho > p.radius * (1.0 + 1e-12)) throw InvalidArgument(std::string(what) + ": rho exceeds the radius");
}

// -rho (rho/r)^{l+n-2} c f(sqrt(c (r^2 - rho^2)))
double lower_form(const KernelParams& p, int l, double r, double rho, double (*f)(double))
{
    if (r == 0.0) return 0.0;
    const double c = p.gain();
    const double x = std::sqrt(c * std::max(0.0, r * r - rho * rho));
    return -rho * std::pow(rho / r, l + p.dimension - 2) * c * f(x);
}

// -r (r/rho)^{l-1} c f(sqrt(c (rho^2 - r^2)))
double upper_form(const KernelParams& p, int l, double r, double rho, double (*f)(double))
{
    if (rho == 0.0) return 0.0;
    const double c = p.gain();
    const double x = std::sqrt(c * std::max(0.0, rho * rho - r * r));
    const double pre = l == 0 ? rho : r * std::pow(r / rho, l - 1);
    return -pre * c * f(x);
}

double ipow(double x, int k) { return std::pow(x, k); }

// Left side minus right side of the kernel PDE at (r, rho), spacing h.
double pde_residual(const Closed& F, int n, int l, double sigma_c, double r, double rho, double h)
{
    const int a = n - 1;
    const double mu = static_cast<double>(l) * (l + n - 2);
    const double f0 = F(r, rho);
    const double radial = (ipow(r + 0.5 * h, a) * (F(r + h, rho) - f0) -
                           ipow(r - 0.5 * h, a) * (f0 - F(r - h, rho))) / (h * h * ipow(r, a));
    auto G = [&](double s) { return F(r, s) / ipow(s, a); };
    const double g0 = f0 / ipow(rho, a);
    const double angular = (ipow(rho + 0.5 * h, a) * (G(rho + h) - g0) -
                            ipow(rho - 0.5 * h, a) * (g0 - G(rho - h))) / (h * h);
    return radial - angular - mu * (1.0 / (r * r) - 1.0 / (rho * rho)) * f0 - sigma_c * f0;
}

ResidualReport run_residual(const Closed& F, bool lower, const KernelParams& p, int l, double sigma_c,
                            const RadialGrid& grid)
{
    if (grid.size() < 64) throw InvalidArgument("verify_kernel_pde: grid needs at least 64 points");
    const int m = grid.intervals();
    ResidualReport rep;
    rep.l = l;
    for (int level = 0; level < 3; ++level) {
        const double h = grid.h() / (1 << level);
        double worst = 0.0;
        for (int i = 2; i <= m - 2; ++i)
            for (int j = 2; j <= m - 2; ++j) {
                if (lower ? (j > i - 2) : (j < i + 2)) continue;
                const double res = pde_residual(F, p.dimension, l, sigma_c, grid.node(i), grid.node(j), h);
                worst = std::max(worst, std::fabs(res));
            }
        rep.intervals.push_back(m << level);
        rep.max_residual.push_back(worst);
    }
    rep.order = 1e300;
    for (std::size_t k = 0; k + 1 < rep.max_residual.size(); ++k)
        rep.order = std::min(rep.order, std::log2(rep.max_residual[k] / rep.max_residual[k + 1]));
    if (!std::isfinite(rep.order)) rep.order = 0.0;
    rep.passed = rep.order >= 1.8;

    const double c = p.gain(), h = grid.h();
    for (int i = 0; i < grid.size(); ++i) {
        const double r = grid.node(i);
        rep.diagonal_error = std::max(rep.diagonal_error, std::fabs(F(r, r) + 0.5 * c * r));
    }
    for (int i = 1; i < grid.size(); ++i) {
        const double s = grid.node(i);
        if (lower) {
            rep.origin_value = std::max(rep.origin_value, std::fabs(F(s, 0.0)));
            if (s >= 2.0 * h) {
                const double d = (-3.0 * F(s, 0.0) + 4.0 * F(s, h) - F(s, 2.0 * h)) / (2.0 * h);
                rep.origin_slope_fd = std::max(rep.origin_slope_fd, std::fabs((p.dimension - 2) * d));
            }
        } else {
            rep.origin_value = std::max(rep.origin_value, std::fabs(F(0.0, s)));
            if (s >= 2.0 * h) {
                const double d = (-3.0 * F(0.0, s) + 4.0 * F(h, s) - F(2.0 * h, s)) / (2.0 * h);
                rep.origin_slope_fd = std::max(rep.origin_slope_fd, std::fabs(d));
            }
        }
    }
    return rep;
}

} // namespace

void KernelParams::validate() const
{
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
    if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
    if (dimension < 2) throw InvalidArgument("dimension must be >= 2");
    if (!(target_damping >= 0.0)) throw InvalidArgument("target_damping must be >= 0");
}

const char* to_string(KernelKind k)
{
    switch (k) {
    case KernelKind::control: return "control";
    case KernelKind::inverse: return "inverse";
    case KernelKind::observer: return "observer";
    case KernelKind::observer_inverse: return "observer_inverse";
    }
    return "?";
}

KernelKind kernel_kind_from_string(const std::string& s)
{
    for (auto k : {KernelKind::control, KernelKind::inverse, KernelKind::observer, KernelKind::observer_inverse})
        if (s == to_string(k)) return k;
    throw InvalidArgument("unknown kernel kind '" + s + "'");
}

double control_kernel_mode(const KernelParams& p, int l, double r, double rho)
{
    check_lower(p, r, rho, "control_kernel_mode");
    return lower_form(p, l, r, rho, bessel_i1_over_x);
}

double inverse_kernel_mode(const KernelParams& p, int l, double r, double rho)
{
    check_lower(p, r, rho, "inverse_kernel_mode");
    return lower_form(p, l, r, rho, bessel_j1_over_x);
}

double observer_kernel_mode(const KernelParams& p, int l, double r, double rho)
{
    check_upper(p, r, rho, "observer_kernel_mode");
    return upper_form(p, l, r, rho, bessel_i1_over_x);
}

double observer_inverse_kernel_mode(const KernelParams& p, int l, double r, double rho)
{
    check_upper(p, r, rho, "observer_inverse_kernel_mode");
    return upper_form(p, l, r, rho, bessel_j1_over_x);
}

double kernel_mode(KernelKind kind, const KernelParams& p, int l, double r, double rho)
{
    switch (kind) {
    case KernelKind::control: return control_kernel_mode(p, l, r, rho);
    case KernelKind::inverse: return inverse_kernel_mode(p, l, r, rho);
    case KernelKind::observer: return observer_kernel_mode(p, l, r, rho);
    case KernelKind::observer_inverse: return observer_inverse_kernel_mode(p, l, r, rho);
    }
    throw InvalidArgument("kernel_mode: bad kind");
}

double output_injection_gain(const KernelParams& p, int l, double r)
{
    return p.epsilon * observer_kernel_mode(p, l, r, p.radius);
}

namespace {

// -c (a^2 - b^2) I1ox(sqrt(c (a^2 - b^2))) / (Area |x - xi|^n), a >= b.
double physical_form(const KernelParams& p, double a, double b, double x_norm, double xi_norm, double omega)
{
    const double d2 = x_norm * x_norm + xi_norm * xi_norm - 2.0 * x_norm * xi_norm * std::cos(omega);
    const double s2 = a * a - b * b;
    if (!(d2 > 0.0)) {
        if (s2 == 0.0) throw InvalidArgument("physical kernel: singular diagonal point");
        throw InvalidArgument("physical kernel: coincident points");
    }
    const double c = p.gain();
    return -c * s2 * bessel_i1_over_x(std::sqrt(c * s2)) / (sphere_area(p.dimension) * std::pow(d2, 0.5 * p.dimension));
}

} // namespace

double physical_control_kernel(const KernelParams& p, double x_norm, double xi_norm, double omega)
{
    if (!(xi_norm >= 0.0 && xi_norm <= x_norm)) throw InvalidArgument("physical_control_kernel: requires 0 <= |xi| <= |x|");
    return physical_form(p, x_norm, xi_norm, x_norm, xi_norm, omega);
}

double physical_observer_kernel(const KernelParams& p, double x_norm, double xi_norm, double omega)
{
    if (!(x_norm >= 0.0 && x_norm <= xi_norm)) throw InvalidArgument("physical_observer_kernel: requires 0 <= |x| <= |xi|");
    return physical_form(p, xi_norm, x_norm, x_norm, xi_norm, omega);
}

double physical_injection_kernel(const KernelParams& p, double x_norm, double omega)
{
    return p.epsilon * physical_observer_kernel(p, x_norm, p.radius, omega);
}

const char* to_string(ObserverCandidate c)
{
    switch (c) {
    case ObserverCandidate::rho_prefactor: return "rho_prefactor";
    case ObserverCandidate::inverse_weight: return "inverse_weight";
    case ObserverCandidate::direct_weight: return "direct_weight";
    }
    return "?";
}

double observer_candidate(ObserverCandidate cand, const KernelParams& p, int l, double r, double rho)
{
    check_upper(p, r, rho, "observer_candidate");
    switch (cand) {
    case ObserverCandidate::rho_prefactor: {
        if (r == 0.0) return 0.0;
        const double c = p.gain();
        const double x = std::sqrt(c * std::max(0.0, rho * rho - r * r));
        return -rho * std::pow(rho / r, l - 1) * c * bessel_i1_over_x(x);
    }
    case ObserverCandidate::inverse_weight:
        if (rho == 0.0) return 0.0;
        return std::pow(r / rho, p.dimension - 1) * lower_form(p, l, rho, r, bessel_i1_over_x);
    case ObserverCandidate::direct_weight:
        if (r == 0.0) return upper_form(p, l, r, rho, bessel_i1_over_x);
        return std::pow(rho / r, p.dimension - 1) * lower_form(p, l, rho, r, bessel_i1_over_x);
    }
    throw InvalidArgument("observer_candidate: bad candidate");
}

ResidualReport verify_kernel_pde(const KernelParams& p, int l, KernelKind kind, const RadialGrid& grid)
{
    p.validate();
    const bool lower = kind == KernelKind::control || kind == KernelKind::inverse;
    // P solves the PDE with -c, its inverse with +c; K with +c, L with -c.
    const double sigma = (kind == KernelKind::control || kind == KernelKind::observer_inverse) ? 1.0 : -1.0;
    Closed F = [&](double r, double rho) { return kernel_mode(kind, p, l, r, rho); };
    auto rep = run_residual(F, lower, p, l, sigma * p.gain(), grid);
    rep.kind = kind;
    const double c = p.gain();
    const int n = p.dimension;
    for (int i = 1; i < grid.size(); ++i) {
        const double s = grid.node(i);
        double slope = 0.0;
        if (lower) {
            // d_rho K(r, 0) is -c f(sqrt(c) r) when l + n - 2 = 0 and 0 otherwise.
            if (l + n - 2 == 0) {
                const double x = std::sqrt(c) * s;
                slope = (n - 2) * -c * (kind == KernelKind::control ? bessel_i1_over_x(x) : bessel_j1_over_x(x));
            }
        } else if (l == 1) {
            const double x = std::sqrt(c) * s;
            slope = -c * (kind == KernelKind::observer ? bessel_i1_over_x(x) : bessel_j1_over_x(x));
        }
        rep.origin_slope = std::max(rep.origin_slope, std::fabs(slope));
    }
    return rep;
}

ResidualReport verify_observer_candidate(const KernelParams& p, int l, ObserverCandidate cand,
                                         const RadialGrid& grid)
{
    p.validate();
    Closed F = [&](double r, double rho) { return observer_candidate(cand, p, l, r, rho); };
    auto rep = run_residual(F, false, p, l, -p.gain(), grid);
    rep.kind = KernelKind::observer;
    return rep;
}

std::vector<double> row_weights(int count, double h)
{
    if (count <= 1) return std::vector<double>(std::max(count, 0), 0.0);
    std::vector<double> w(count, h);
    if (count >= 6) {
        const double end[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
        for (int k = 0; k < 3; ++k) w[k] = w[count - 1 - k] = end[k] * h;
    } else {
        w.front() = w.back() = 0.5 * h;
    }
    return w;
}

KernelTable::KernelTable(const KernelParams& p, int l, KernelKind kind, const RadialGrid& grid)
    : params_(p), l_(l), kind_(kind), grid_(grid)
{
    p.validate();
    if (l < 0) throw InvalidArgument("KernelTable: degree must be >= 0");
    if (std::fabs(grid.radius() - p.radius) > 1e-12 * p.radius)
        throw InvalidArgument("KernelTable: grid radius differs from kernel radius");
    const int sz = grid.size();
    values_.assign(static_cast<std::size_t>(sz) * sz, 0.0);
    weights_.assign(static_cast<std::size_t>(sz) * sz, 0.0);
    for (int i = 0; i < sz; ++i) {
        const double r = grid.node(i);
        const int b = row_begin(i), e = row_end(i);
        const auto w = row_weights(e - b, grid.h());
        for (int j = b; j < e; ++j) {
            values_[idx(i, j)] = j == i ? -(p.lambda + p.target_damping) * r / (2.0 * p.epsilon)
                                        : kernel_mode(kind, p, l, r, grid.node(j));
            weights_[idx(i, j)] = w[j - b];
        }
    }
}

double KernelTable::integrate_row(int i, const std::vector<double>& f) const
{
    if (static_cast<int>(f.size()) != grid_.size()) throw InvalidArgument("integrate_row: profile does not match grid");
    double acc = 0.0;
    for (int j = row_begin(i), e = row_end(i); j < e; ++j) acc += weights_[idx(i, j)] * values_[idx(i, j)] * f[j];
    return acc;
}

void KernelTable::write_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    char buf[32];
    for (int i = 0; i < grid_.size(); ++i) {
        for (int j = 0; j < grid_.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", values_[idx(i, j)]);
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

KernelTable build_kernel_table(const KernelParams& p, int l, KernelKind kind, const RadialGrid& grid)
{
    return KernelTable(p, l, kind, grid);
}

} // namespace nball
