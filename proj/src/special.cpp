#include "nball/special.hpp"

#include "nball/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace nball {
namespace {

// Above this the asymptotic expansions are accurate to ~1e-15; at 12
// the optimally truncated I1 series is still off by ~1e-11.
constexpr double kSwitch = 17.0;

// sum_k s^k / (k! (k+a)!) with s = +-(x/2)^2, in long double.
long double ratio_series(long double s, int a)
{
    long double term = 1.0L;
    for (int k = 1; k <= a; ++k) term /= k;
    long double sum = term;
    for (int k = 1; k < 400; ++k) {
        term *= s / (static_cast<long double>(k) * (k + a));
        sum += term;
        if (std::fabs(term) <= 1e-21L * std::fabs(sum)) break;
    }
    return sum;
}

double i1_asymptotic(double x)
{
    const double mu = 4.0;
    double t = 1.0, sum = 1.0;
    for (int k = 0; k < 60; ++k) {
        const double next = -t * (mu - (2.0 * k + 1) * (2.0 * k + 1)) / ((k + 1) * 8.0 * x);
        if (std::fabs(next) >= std::fabs(t)) break;
        t = next;
        sum += t;
        if (std::fabs(t) < 1e-17 * std::fabs(sum)) break;
    }
    return std::exp(x) / std::sqrt(2.0 * std::numbers::pi * x) * sum;
}

double j1_asymptotic(double x)
{
    const double mu = 4.0;
    double s = 1.0, p = 1.0, q = 0.0;
    for (int k = 0; k < 60; ++k) {
        const double next = s * (mu - (2.0 * k + 1) * (2.0 * k + 1)) / ((k + 1) * 8.0 * x);
        if (std::fabs(next) >= std::fabs(s) && k > 0) break;
        s = next;
        switch ((k + 1) % 4) {
        case 0: p += s; break;
        case 1: q += s; break;
        case 2: p -= s; break;
        default: q -= s; break;
        }
        if (std::fabs(s) < 1e-18) break;
    }
    const double chi = x - 0.75 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

void require_nonnegative(double x, const char* what)
{
    if (!(x >= 0.0)) throw InvalidArgument(std::string(what) + ": argument must be >= 0");
}

} // namespace

double bessel_i1_over_x(double x)
{
    require_nonnegative(x, "bessel_i1_over_x");
    if (x < kSwitch) {
        const long double h = 0.5L * x;
        return static_cast<double>(0.5L * ratio_series(h * h, 1));
    }
    return i1_asymptotic(x) / x;
}

double bessel_i1(double x)
{
    require_nonnegative(x, "bessel_i1");
    if (x < kSwitch) return x * bessel_i1_over_x(x);
    return i1_asymptotic(x);
}

double bessel_j1_over_x(double x)
{
    require_nonnegative(x, "bessel_j1_over_x");
    if (x < kSwitch) {
        const long double h = 0.5L * x;
        return static_cast<double>(0.5L * ratio_series(-h * h, 1));
    }
    return j1_asymptotic(x) / x;
}

double bessel_j1(double x)
{
    require_nonnegative(x, "bessel_j1");
    if (x < kSwitch) return x * bessel_j1_over_x(x);
    return j1_asymptotic(x);
}

double bessel_i2_over_x2(double x)
{
    require_nonnegative(x, "bessel_i2_over_x2");
    const long double h = 0.5L * x;
    return static_cast<double>(0.25L * ratio_series(h * h, 2));
}

double bessel_j(double nu, double x)
{
    if (nu < 0.0) throw InvalidArgument("bessel_j: order must be >= 0");
    require_nonnegative(x, "bessel_j");
    if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    const long double h = 0.5L * x;
    long double term = std::pow(h, static_cast<long double>(nu)) / std::tgamma(static_cast<long double>(nu) + 1.0L);
    long double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= -h * h / (static_cast<long double>(k) * (k + nu));
        sum += term;
        if (std::fabs(term) <= 1e-22L * std::fabs(sum) && k > h) break;
    }
    return static_cast<double>(sum);
}

double first_bessel_zero(double nu)
{
    if (nu < 0.0) throw InvalidArgument("first_bessel_zero: order must be >= 0");
    double a = std::max(nu, 0.1);
    double fa = bessel_j(nu, a);
    const double step = 0.05;
    double b = a + step;
    double fb = bessel_j(nu, b);
    while (fa * fb > 0.0) {
        a = b;
        fa = fb;
        b += step;
        fb = bessel_j(nu, b);
        if (b > nu + 50.0) throw SolverError("first_bessel_zero: no sign change found");
    }
    for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double c = 0.5 * (a + b);
        const double fc = bessel_j(nu, c);
        if (fc == 0.0) return c;
        if (fa * fc < 0.0) {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
    }
    return 0.5 * (a + b);
}

double gamma_half_integer(int k)
{
    if (k < 1) throw InvalidArgument("gamma_half_integer: k must be >= 1");
    // Gamma(k/2): step down by 1 (k by 2) to Gamma(1) or Gamma(1/2).
    double g = (k % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
    for (int j = (k % 2 == 0) ? 2 : 1; j + 2 <= k; j += 2) g *= 0.5 * j;
    return g;
}

double sphere_area(int n)
{
    if (n < 2) throw InvalidArgument("sphere_area: dimension must be >= 2");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / gamma_half_integer(n);
}

double legendre_pn(int l, int n, double t)
{
    if (l < 0) throw InvalidArgument("legendre_pn: degree must be >= 0");
    if (n < 2) throw InvalidArgument("legendre_pn: dimension must be >= 2");
    if (!(t >= -1.0 && t <= 1.0)) throw InvalidArgument("legendre_pn: t outside [-1, 1]");
    if (l == 0) return 1.0;
    double p0 = 1.0, p1 = t;
    for (int k = 1; k < l; ++k) {
        const double p2 = ((2.0 * k + n - 2) * t * p1 - k * p0) / (k + n - 2);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

} // namespace nball
