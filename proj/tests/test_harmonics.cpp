#include "nball/error.hpp"
#include "nball/harmonics.hpp"
#include "nball/special.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

using namespace nball;

namespace {

AngularPoint pt2(double t) { return AngularPoint{{t}}; }
AngularPoint pt3(double phi, double theta) { return AngularPoint{{phi, theta}}; }

AngularPoint random_point(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AngularPoint p;
    p.theta.push_back(2 * oracle::pi * u(rng));
    for (int i = 2; i < n; ++i) p.theta.push_back(oracle::pi * u(rng));
    return p;
}

} // namespace

TEST(Harmonics, ModeCountExamples)
{
    EXPECT_EQ(mode_count(0, 5), 1);
    EXPECT_EQ(mode_count(3, 2), 2);
    EXPECT_EQ(mode_count(2, 3), 5);
    for (int l = 0; l <= 50; ++l) EXPECT_EQ(mode_count(l, 3), 2 * l + 1);
    for (int n = 2; n <= 7; ++n)
        for (int l = 0; l <= 12; ++l) EXPECT_EQ(mode_count(l, n), oracle::mode_count_brute(l, n)) << l << ' ' << n;
    EXPECT_THROW(mode_count(1, 1), InvalidArgument);
}

TEST(Harmonics, EnumerateModesOrderedAndComplete)
{
    for (int n : {2, 3, 4}) {
        const auto modes = enumerate_modes(n, 6);
        std::size_t expect = 0;
        for (int l = 0; l <= 6; ++l) expect += mode_count(l, n);
        ASSERT_EQ(modes.size(), expect);
        for (std::size_t i = 1; i < modes.size(); ++i) {
            const auto& a = modes[i - 1];
            const auto& b = modes[i];
            EXPECT_TRUE(a.l < b.l || (a.l == b.l && a.m + 1 == b.m));
            EXPECT_LT(b.m, mode_count(b.l, n));
        }
    }
}

TEST(Harmonics, GeodesicAngleExamples)
{
    EXPECT_EQ(geodesic_angle(pt2(1.3), pt2(1.3)), 0.0);
    EXPECT_NEAR(geodesic_angle(pt2(0.0), pt2(oracle::pi)), oracle::pi, 1e-15);
    const auto a = pt3(0.7, 1.1);
    EXPECT_NEAR(geodesic_angle(a, a), 0.0, 1e-7);
}

TEST(Harmonics, GeodesicAngleMatchesRectangularDotProduct)
{
    std::mt19937_64 rng(11);
    for (int k = 0; k < 500; ++k) {
        const auto a = random_point(3, rng), b = random_point(3, rng);
        auto xyz = [](const AngularPoint& p) {
            return std::array<double, 3>{std::sin(p.theta[1]) * std::cos(p.theta[0]),
                                         std::sin(p.theta[1]) * std::sin(p.theta[0]), std::cos(p.theta[1])};
        };
        const auto x = xyz(a), y = xyz(b);
        const double c = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        const double w = std::acos(c);
        if (std::sin(w) < 1e-3) continue;
        EXPECT_NEAR(geodesic_angle(a, b), w, 1e-12);
    }
    for (int n : {4, 5}) {
        for (int k = 0; k < 200; ++k) {
            const auto a = random_point(n, rng), b = random_point(n, rng);
            const auto x = unit_vector(a), y = unit_vector(b);
            double c = 0.0, nx = 0.0;
            for (int i = 0; i < n; ++i) {
                c += x[i] * y[i];
                nx += x[i] * x[i];
            }
            EXPECT_NEAR(nx, 1.0, 1e-14);
            if (std::fabs(c) > 0.999) continue;
            EXPECT_NEAR(geodesic_angle(a, b), std::acos(c), 1e-12);
        }
    }
}

TEST(Harmonics, AdditionSumExamples)
{
    for (double w : {0.0, 0.4, 2.0, oracle::pi}) {
        EXPECT_NEAR(addition_sum(0, 3, w), 1.0 / (4 * oracle::pi), 1e-15);
        EXPECT_NEAR(addition_sum(1, 2, w), std::cos(w) / oracle::pi, 1e-15);
    }
    // n = 2, l = 2 by brute force over the circle pair.
    for (double a = 0.0; a < 6.0; a += 0.7)
        for (double b = 0.0; b < 6.0; b += 0.9) {
            const double brute = (std::cos(2 * a) * std::cos(2 * b) + std::sin(2 * a) * std::sin(2 * b)) / oracle::pi;
            EXPECT_NEAR(addition_sum(2, 2, geodesic_angle(pt2(a), pt2(b))), brute, 1e-14);
        }
}

TEST(Harmonics, AdditionTheoremWithExplicitBasis)
{
    std::mt19937_64 rng(5);
    for (int n : {2, 3})
        for (int l = 0; l <= 4; ++l)
            for (int k = 0; k < 100; ++k) {
                const auto a = random_point(n, rng), b = random_point(n, rng);
                double sum = 0.0;
                for (int m = 0; m < mode_count(l, n); ++m)
                    sum += harmonic_value({n, l, m}, a) * harmonic_value({n, l, m}, b);
                EXPECT_NEAR(sum, addition_sum(l, n, geodesic_angle(a, b)), 1e-9);
            }
}

TEST(Harmonics, SphereHarmonicsMatchCartesianPolynomials)
{
    std::mt19937_64 rng(9);
    for (int l = 0; l <= 2; ++l) {
        const auto ref = random_point(3, rng);
        auto cart = [&](const AngularPoint& p) {
            const double st = std::sin(p.theta[1]);
            return oracle::sphere_harmonics_cartesian(l, st * std::cos(p.theta[0]), st * std::sin(p.theta[0]),
                                                      std::cos(p.theta[1]));
        };
        const auto yref = cart(ref);
        for (int m = 0; m < 2 * l + 1; ++m) {
            const double sign = harmonic_value({3, l, m}, ref) / yref[m] > 0 ? 1.0 : -1.0;
            for (int k = 0; k < 50; ++k) {
                const auto p = random_point(3, rng);
                EXPECT_NEAR(harmonic_value({3, l, m}, p), sign * cart(p)[m], 1e-12) << l << ' ' << m;
            }
        }
    }
}

TEST(Harmonics, OrthonormalUnderSphereGrid)
{
    for (int n : {2, 3}) {
        const int lmax = 6;
        const auto sph = SphereGrid::for_degree(n, lmax);
        const auto modes = enumerate_modes(n, lmax);
        double total = 0.0;
        for (double w : sph.weights) total += w;
        EXPECT_NEAR(total, sphere_area(n), 1e-12);
        for (const auto& a : modes)
            for (const auto& b : modes) {
                double s = 0.0;
                for (std::size_t k = 0; k < sph.points.size(); ++k)
                    s += sph.weights[k] * harmonic_value(a, sph.points[k]) * harmonic_value(b, sph.points[k]);
                EXPECT_NEAR(s, a == b ? 1.0 : 0.0, 1e-12);
            }
    }
}

TEST(Harmonics, PoissonFactorExamples)
{
    for (double w : {0.0, 1.0, 3.0}) EXPECT_EQ(poisson_factor(0.0, w, 3), 1.0);
    for (int n : {2, 3, 4, 6})
        for (double s : {0.1, 0.5, 0.9})
            EXPECT_NEAR(poisson_factor(s, 0.0, n), (1 + s) / std::pow(1 - s, n - 1), 1e-12 * poisson_factor(s, 0.0, n));
    double partial = 0.0;
    for (int l = 0; l < 60; ++l) partial += mode_count(l, 3) * std::pow(0.5, l) * std::legendre(l, 0.5);
    EXPECT_NEAR(poisson_factor(0.5, oracle::pi / 3, 3), partial, 1e-10);
}

TEST(Harmonics, PoissonPartialSumsWithinTailBound)
{
    // |P_{l,n}| <= 1, so the remainder is bounded by the tail of sum N(l, n) s^l.
    const int L = 60;
    for (int n : {2, 3, 4})
        for (double s = 0.05; s <= 0.9 + 1e-12; s += 0.05) {
            double tail = 0.0;
            for (int l = L + 1; l < 4000; ++l) tail += mode_count(l, n) * std::pow(s, l);
            for (double w = 0.0; w <= oracle::pi; w += oracle::pi / 37) {
                double partial = 0.0;
                for (int l = 0; l <= L; ++l) partial += mode_count(l, n) * std::pow(s, l) * legendre_pn(l, n, std::cos(w));
                EXPECT_LE(std::fabs(poisson_factor(s, w, n) - partial), tail * (1 + 1e-9) + 1e-12) << n << ' ' << s;
            }
        }
}

TEST(Harmonics, PoissonRejectsOutsideUnitInterval)
{
    EXPECT_THROW(poisson_factor(1.0, 0.3, 2), InvalidArgument);
    EXPECT_THROW(poisson_factor(-0.1, 0.3, 2), InvalidArgument);
}

TEST(Harmonics, AnalyzeSingleHarmonicAndConstant)
{
    const RadialGrid grid(1.0, 16);
    const int lmax = 4;
    const auto sph = SphereGrid::for_degree(2, lmax);
    const auto f = sample_field([](double r, const AngularPoint& p) { return r * std::cos(p.theta[0]) / std::sqrt(oracle::pi); },
                                grid, sph);
    const auto modes = analyze(f, lmax);
    for (const auto& st : modes)
        for (int i = 0; i < grid.size(); ++i) {
            const double expect = (st.index.l == 1 && st.index.m == 0) ? grid.node(i) : 0.0;
            EXPECT_NEAR(st.values[i], expect, 1e-10);
        }
    const auto c = analyze(sample_field([](double, const AngularPoint&) { return 2.5; }, grid, sph), lmax);
    for (const auto& st : c)
        for (double v : st.values) EXPECT_NEAR(v, st.index.l == 0 ? 2.5 * std::sqrt(2 * oracle::pi) : 0.0, 1e-12);
}

TEST(Harmonics, AnalyzeSynthesizeRoundTrip)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int n : {2, 3}) {
        const int lmax = 5;
        const RadialGrid grid(1.0, 20);
        auto modes = enumerate_modes(n, lmax);
        std::vector<std::array<double, 3>> coef(modes.size());
        for (auto& c : coef) c = {g(rng), g(rng), g(rng)};
        auto field = [&](double r, const AngularPoint& p) {
            double acc = 0.0;
            for (std::size_t k = 0; k < modes.size(); ++k)
                acc += std::pow(r, modes[k].l) * (coef[k][0] + coef[k][1] * r + coef[k][2] * r * r) *
                       harmonic_value(modes[k], p);
            return acc;
        };
        const auto sph = SphereGrid::for_degree(n, lmax);
        const auto an = analyze(sample_field(field, grid, sph), lmax);
        ASSERT_EQ(an.size(), modes.size());
        for (int t = 0; t < 200; ++t) {
            const double r = grid.node(static_cast<int>(rng() % grid.size()));
            const auto p = random_point(n, rng);
            EXPECT_NEAR(synthesize(an, grid, r, p), field(r, p), 1e-9);
        }
        // Bigger angular grids change nothing for band-limited data.
        const auto an2 = analyze(sample_field(field, grid, SphereGrid::make(n, 4 * lmax + 3, n == 3 ? 2 * lmax + 3 : 1)), lmax);
        for (std::size_t k = 0; k < an.size(); ++k)
            for (int i = 0; i < grid.size(); ++i) EXPECT_NEAR(an[k].values[i], an2[k].values[i], 1e-11);
    }
}

TEST(Harmonics, SynthesizeTrivialCases)
{
    const RadialGrid grid(2.0, 10);
    std::vector<ModeState> zero;
    for (const auto& ix : enumerate_modes(3, 2)) zero.push_back({ix, std::vector<double>(grid.size(), 0.0), 0.0});
    EXPECT_EQ(synthesize(zero, grid, 1.3, pt3(0.2, 0.5)), 0.0);
    std::vector<ModeState> radial{{{3, 0, 0}, std::vector<double>(grid.size()), 0.0}};
    for (int i = 0; i < grid.size(); ++i) radial[0].values[i] = 1.0 + grid.node(i);
    const double v = synthesize(radial, grid, 1.0, pt3(0.0, 0.3));
    EXPECT_NEAR(v, 2.0 / std::sqrt(4 * oracle::pi), 1e-14);
    for (double a = 0.0; a < 6.0; a += 0.5) EXPECT_NEAR(synthesize(radial, grid, 1.0, pt3(a, a / 2)), v, 1e-14);
}

TEST(Harmonics, SynthesizeExplicitLowDegreeSphere)
{
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    const RadialGrid grid(1.0, 8);
    std::vector<ModeState> modes;
    for (const auto& ix : enumerate_modes(3, 2)) {
        ModeState st{ix, std::vector<double>(grid.size()), 0.0};
        const double c = g(rng);
        for (int i = 0; i < grid.size(); ++i) st.values[i] = c * std::pow(grid.node(i), ix.l);
        modes.push_back(st);
    }
    const auto ref = random_point(3, rng);
    auto cart = [](int l, const AngularPoint& p) {
        const double st = std::sin(p.theta[1]);
        return oracle::sphere_harmonics_cartesian(l, st * std::cos(p.theta[0]), st * std::sin(p.theta[0]), std::cos(p.theta[1]));
    };
    for (int t = 0; t < 100; ++t) {
        const auto p = random_point(3, rng);
        const int i = static_cast<int>(rng() % grid.size());
        double direct = 0.0;
        for (const auto& st : modes) {
            const double sign = harmonic_value(st.index, ref) / cart(st.index.l, ref)[st.index.m] > 0 ? 1.0 : -1.0;
            direct += st.values[i] * sign * cart(st.index.l, p)[st.index.m];
        }
        EXPECT_NEAR(synthesize(modes, grid, grid.node(i), p), direct, 1e-12);
    }
}

TEST(Harmonics, AnalyzeRejectsCoarseAngularGrid)
{
    const RadialGrid grid(1.0, 4);
    const auto f = sample_field([](double, const AngularPoint&) { return 1.0; }, grid, SphereGrid::make(2, 9));
    EXPECT_THROW(analyze(f, 4), InvalidArgument);
    EXPECT_NO_THROW(analyze(f, 3));
    const auto f3 = sample_field([](double, const AngularPoint&) { return 1.0; }, grid, SphereGrid::make(3, 10, 3));
    EXPECT_THROW(analyze(f3, 4), InvalidArgument);
}

TEST(Harmonics, GaussLegendreIntegratesPolynomials)
{
    std::vector<double> x, w;
    gauss_legendre(12, x, w);
    for (int k = 0; k <= 23; ++k) {
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += w[i] * std::pow(x[i], k);
        EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-14);
    }
}
