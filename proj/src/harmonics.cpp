#include "nball/harmonics.hpp"

#include "nball/error.hpp"
#include "nball/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace nball {
namespace {

constexpr double kPi = std::numbers::pi;

void check_reconstruction_dim(int n, const char* what)
{
    if (n != 2 && n != 3)
        throw InvalidArgument(std::string(what) + ": explicit harmonics exist only for n = 2, 3");
}

// Normalized associated Legendre values N_l^k(x) for 0 <= l <= lmax at fixed k.
std::vector<double> normalized_legendre_column(int lmax, int k, double x)
{
    std::vector<double> col(lmax + 1, 0.0);
    if (k > lmax) return col;
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    double pkk = 1.0 / std::sqrt(4.0 * kPi);
    for (int j = 1; j <= k; ++j) pkk *= std::sqrt((2.0 * j + 1) / (2.0 * j)) * s;
    col[k] = pkk;
    if (k + 1 <= lmax) col[k + 1] = std::sqrt(2.0 * k + 3) * x * pkk;
    auto a = [k](int l) { return std::sqrt((4.0 * l * l - 1) / (static_cast<double>(l) * l - static_cast<double>(k) * k)); };
    for (int l = k + 2; l <= lmax; ++l) col[l] = a(l) * (x * col[l - 1] - col[l - 2] / a(l - 1));
    return col;
}

} // namespace

int mode_count(int l, int n)
{
    if (n < 2) throw InvalidArgument("mode_count: dimension must be >= 2");
    if (l < 0) throw InvalidArgument("mode_count: degree must be >= 0");
    if (l == 0) return 1;
    // (2l+n-2)/l * C(l+n-3, l-1)
    long double c = 1.0L;
    const int top = l + n - 3, k = l - 1;
    for (int j = 1; j <= k; ++j) c = c * (top - k + j) / j;
    return static_cast<int>(std::llround((2.0L * l + n - 2) * c / l));
}

std::vector<ModeIndex> enumerate_modes(int n, int l_max)
{
    if (l_max < 0) throw InvalidArgument("enumerate_modes: l_max must be >= 0");
    std::vector<ModeIndex> out;
    for (int l = 0; l <= l_max; ++l)
        for (int m = 0, count = mode_count(l, n); m < count; ++m) out.push_back({n, l, m});
    return out;
}

std::vector<double> unit_vector(const AngularPoint& p)
{
    const int n = p.dimension();
    if (n < 2) throw InvalidArgument("unit_vector: need at least one angle");
    const auto& t = p.theta;
    std::vector<double> x(n);
    double tail = 1.0; // product of sin(theta_j) for j >= current
    for (int k = n; k >= 3; --k) {
        x[k - 1] = std::cos(t[k - 2]) * tail;
        tail *= std::sin(t[k - 2]);
    }
    x[0] = std::cos(t[0]) * tail;
    x[1] = std::sin(t[0]) * tail;
    return x;
}

double geodesic_angle(const AngularPoint& a, const AngularPoint& b)
{
    if (a.theta.size() != b.theta.size() || a.theta.empty())
        throw InvalidArgument("geodesic_angle: points must share the same dimension");
    double c = std::cos(a.theta[0] - b.theta[0]);
    for (std::size_t i = 1; i < a.theta.size(); ++i)
        c = std::cos(a.theta[i]) * std::cos(b.theta[i]) + std::sin(a.theta[i]) * std::sin(b.theta[i]) * c;
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double addition_sum(int l, int n, double omega)
{
    const double t = std::clamp(std::cos(omega), -1.0, 1.0);
    return mode_count(l, n) / sphere_area(n) * legendre_pn(l, n, t);
}

double poisson_factor(double s, double omega, int n)
{
    if (!(s >= 0.0 && s < 1.0)) throw InvalidArgument("poisson_factor: requires 0 <= s < 1");
    if (n < 2) throw InvalidArgument("poisson_factor: dimension must be >= 2");
    const double d2 = 1.0 + s * s - 2.0 * s * std::cos(omega);
    return (1.0 - s * s) / std::pow(d2, 0.5 * n);
}

double harmonic_value(const ModeIndex& idx, const AngularPoint& p)
{
    check_reconstruction_dim(idx.n, "harmonic_value");
    if (p.dimension() != idx.n) throw InvalidArgument("harmonic_value: point dimension mismatch");
    if (idx.l < 0 || idx.m < 0 || idx.m >= mode_count(idx.l, idx.n))
        throw InvalidArgument("harmonic_value: order out of range");
    const double phi = p.theta[0];
    if (idx.n == 2) {
        if (idx.l == 0) return 1.0 / std::sqrt(2.0 * kPi);
        const double c = 1.0 / std::sqrt(kPi);
        return idx.m == 0 ? c * std::cos(idx.l * phi) : c * std::sin(idx.l * phi);
    }
    const double x = std::cos(p.theta[1]);
    const int k = (idx.m + 1) / 2;
    const double nk = normalized_legendre_column(idx.l, k, x)[idx.l];
    if (idx.m == 0) return nk;
    return std::numbers::sqrt2 * nk * (idx.m % 2 == 1 ? std::cos(k * phi) : std::sin(k * phi));
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights)
{
    if (count < 1) throw InvalidArgument("gauss_legendre: need at least one node");
    nodes.assign(count, 0.0);
    weights.assign(count, 0.0);
    // P_count(x) and its derivative by the three-term recurrence.
    auto eval = [count](double x, double& dp) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= count; ++k) {
            const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = count * (x * p1 - p0) / (x * x - 1.0);
        return p1;
    };
    for (int i = 0; i < (count + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (count + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            const double dx = eval(x, dp) / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        eval(x, dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = weights[count - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

SphereGrid SphereGrid::make(int n, int n_theta1, int n_theta2)
{
    check_reconstruction_dim(n, "SphereGrid");
    if (n_theta1 < 1 || n_theta2 < 1) throw InvalidArgument("SphereGrid: sizes must be positive");
    SphereGrid g;
    g.n = n;
    g.n_theta1 = n_theta1;
    g.n_theta2 = n == 2 ? 1 : n_theta2;
    const double dphi = 2.0 * kPi / n_theta1;
    if (n == 2) {
        for (int j = 0; j < n_theta1; ++j) {
            g.points.push_back({{j * dphi}});
            g.weights.push_back(dphi);
        }
        return g;
    }
    std::vector<double> x, w;
    gauss_legendre(g.n_theta2, x, w);
    for (int i = 0; i < g.n_theta2; ++i)
        for (int j = 0; j < n_theta1; ++j) {
            g.points.push_back({{j * dphi, std::acos(x[i])}});
            g.weights.push_back(w[i] * dphi);
        }
    return g;
}

SphereGrid SphereGrid::for_degree(int n, int l_max)
{
    return make(n, 2 * l_max + 2, l_max + 1);
}

SampledField sample_field(const std::function<double(double, const AngularPoint&)>& f,
                          const RadialGrid& grid, const SphereGrid& sphere)
{
    SampledField out{grid, sphere, {}};
    out.values.reserve(static_cast<std::size_t>(grid.size()) * sphere.points.size());
    for (int i = 0; i < grid.size(); ++i)
        for (const auto& p : sphere.points) out.values.push_back(f(grid.node(i), p));
    return out;
}

std::vector<ModeState> analyze(const SampledField& field, int l_max)
{
    const auto& sph = field.sphere;
    check_reconstruction_dim(sph.n, "analyze");
    if (sph.n_theta1 < 2 * l_max + 2)
        throw InvalidArgument("analyze: need at least 2*l_max+2 points in theta_1, got " +
                              std::to_string(sph.n_theta1));
    if (sph.n == 3 && sph.n_theta2 < l_max + 1)
        throw InvalidArgument("analyze: need at least l_max+1 Gauss points in theta_2");
    const auto modes = enumerate_modes(sph.n, l_max);
    const std::size_t np = sph.points.size();
    std::vector<ModeState> out;
    out.reserve(modes.size());
    for (const auto& idx : modes) {
        std::vector<double> y(np);
        for (std::size_t k = 0; k < np; ++k) y[k] = harmonic_value(idx, sph.points[k]) * sph.weights[k];
        ModeState st{idx, std::vector<double>(field.grid.size(), 0.0), 0.0};
        for (int i = 0; i < field.grid.size(); ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < np; ++k) acc += field.at(i, static_cast<int>(k)) * y[k];
            st.values[i] = acc;
        }
        out.push_back(std::move(st));
    }
    return out;
}

double synthesize(const std::vector<ModeState>& modes, const RadialGrid& grid, double r,
                  const AngularPoint& p)
{
    if (modes.empty()) return 0.0;
    if (!(r >= 0.0 && r <= grid.radius() * (1.0 + 1e-14)))
        throw InvalidArgument("synthesize: radius outside grid");
    const double s = std::min(r / grid.h(), static_cast<double>(grid.intervals()));
    const int i0 = std::min(static_cast<int>(s), grid.intervals() - 1);
    const double f = s - i0;
    double acc = 0.0;
    for (const auto& st : modes) {
        if (static_cast<int>(st.values.size()) != grid.size())
            throw InvalidArgument("synthesize: mode profile does not match grid");
        const double v = (1.0 - f) * st.values[i0] + f * st.values[i0 + 1];
        if (v != 0.0) acc += v * harmonic_value(st.index, p);
    }
    return acc;
}

} // namespace nball
