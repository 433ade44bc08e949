#include "nball/error.hpp"
#include "nball/harmonics.hpp"
#include "nball/kernels.hpp"
#include "nball/special.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

using namespace nball;

namespace {

KernelParams unit_params(int n, double lambda = 1.0)
{
    KernelParams p;
    p.dimension = n;
    p.lambda = lambda;
    return p;
}

KernelParams desk(int n)
{
    KernelParams p;
    p.dimension = n;
    p.lambda = 8.5;
    p.epsilon = 0.7;
    p.radius = 1.3;
    return p;
}

} // namespace

TEST(Kernels, ParamsValidation)
{
    KernelParams p;
    EXPECT_NO_THROW(p.validate());
    p.lambda = -1.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = KernelParams{};
    p.epsilon = 0.0;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = KernelParams{};
    p.dimension = 1;
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Kernels, KindNamesRoundTrip)
{
    for (auto k : {KernelKind::control, KernelKind::inverse, KernelKind::observer, KernelKind::observer_inverse})
        EXPECT_EQ(kernel_kind_from_string(to_string(k)), k);
    EXPECT_THROW(kernel_kind_from_string("bogus"), InvalidArgument);
}

TEST(Kernels, ControlKernelClosedForm)
{
    for (int n : {2, 3, 5}) {
        const auto p = desk(n);
        const double lam = p.lambda, eps = p.epsilon, R = p.radius;
        for (int l : {0, 1, 3})
            for (double r = 0.05; r <= R; r += 0.11) {
                EXPECT_NEAR(control_kernel_mode(p, l, r, r), -lam * r / (2 * eps), 1e-14);
                for (double rho = 0.0; rho < r; rho += 0.07) {
                    const double ref = oracle::control_kernel(lam, eps, n, l, r, rho);
                    EXPECT_NEAR(control_kernel_mode(p, l, r, rho), ref, 1e-12 * std::max(1.0, std::fabs(ref)));
                }
            }
        EXPECT_EQ(control_kernel_mode(p, 1, 0.7, 0.0), 0.0);
        EXPECT_EQ(control_kernel_mode(p, 0, 0.0, 0.0), 0.0);
        EXPECT_THROW(control_kernel_mode(p, 0, 0.5, 0.6), InvalidArgument);
    }
}

TEST(Kernels, ControlKernelVanishesAsLambdaVanishes)
{
    for (double lam : {1e-3, 1e-6, 1e-9}) {
        const auto p = unit_params(3, lam);
        for (double r = 0.1; r <= 1.0; r += 0.1)
            for (double rho = 0.0; rho <= r; rho += 0.05) EXPECT_LE(std::fabs(control_kernel_mode(p, 2, r, rho)), lam);
    }
}

TEST(Kernels, InverseKernelClosedForm)
{
    for (int n : {2, 4}) {
        const auto p = desk(n);
        for (int l : {0, 2})
            for (double r = 0.05; r <= p.radius; r += 0.13) {
                EXPECT_NEAR(inverse_kernel_mode(p, l, r, r), -p.lambda * r / (2 * p.epsilon), 1e-14);
                EXPECT_EQ(inverse_kernel_mode(p, l, r, 0.0), 0.0);
                for (double rho = 0.0; rho < r; rho += 0.09) {
                    const double ref = oracle::inverse_kernel(p.lambda, p.epsilon, n, l, r, rho);
                    EXPECT_NEAR(inverse_kernel_mode(p, l, r, rho), ref, 1e-12 * std::max(1.0, std::fabs(ref)));
                }
            }
        EXPECT_THROW(inverse_kernel_mode(p, 0, 0.5, 0.6), InvalidArgument);
    }
}

TEST(Kernels, InverseKernelOscillatesControlDoesNot)
{
    // x = sqrt(c (r^2 - rho^2)) passes the first J1 zero (3.83) for c = 25, r = 1, rho = 0.
    auto p = unit_params(2, 25.0);
    int k_sign_changes = 0, l_sign_changes = 0;
    double pk = 0.0, pl = 0.0;
    for (double rho = 0.001; rho < 1.0; rho += 0.001) {
        const double k = control_kernel_mode(p, 0, 1.0, rho), l = inverse_kernel_mode(p, 0, 1.0, rho);
        if (pk != 0.0 && (k > 0) != (pk > 0)) ++k_sign_changes;
        if (pl != 0.0 && (l > 0) != (pl > 0)) ++l_sign_changes;
        pk = k;
        pl = l;
    }
    EXPECT_EQ(k_sign_changes, 0);
    EXPECT_GE(l_sign_changes, 1);
}

TEST(Kernels, ObserverKernelIsWeightedSwapOfControl)
{
    for (int n : {2, 3, 4}) {
        const auto p = desk(n);
        for (int l : {0, 1, 2, 5})
            for (double rho = 0.1; rho <= p.radius; rho += 0.1) {
                EXPECT_NEAR(observer_kernel_mode(p, l, rho, rho), -p.lambda * rho / (2 * p.epsilon), 1e-14);
                for (double r = 0.05; r < rho; r += 0.05) {
                    const double ref = std::pow(rho / r, n - 1) * oracle::control_kernel(p.lambda, p.epsilon, n, l, rho, r);
                    EXPECT_NEAR(observer_kernel_mode(p, l, r, rho), ref, 1e-12 * std::max(1.0, std::fabs(ref)));
                    const double iref = std::pow(rho / r, n - 1) * oracle::inverse_kernel(p.lambda, p.epsilon, n, l, rho, r);
                    EXPECT_NEAR(observer_inverse_kernel_mode(p, l, r, rho), iref, 1e-12 * std::max(1.0, std::fabs(iref)));
                }
            }
        EXPECT_THROW(observer_kernel_mode(p, 0, 0.6, 0.5), InvalidArgument);
    }
}

TEST(Kernels, ObserverKernelAtOrigin)
{
    // P(0, rho) = 0 for l >= 1 and d_r P(0, rho) = 0 for l >= 2; l = 0 is regular but nonzero.
    const auto p = desk(3);
    const double h = 1e-5;
    for (double rho = 0.2; rho <= p.radius; rho += 0.2) {
        for (int l : {1, 2, 5}) EXPECT_EQ(observer_kernel_mode(p, l, 0.0, rho), 0.0);
        for (int l : {2, 5}) {
            const double d = (-3 * observer_kernel_mode(p, l, 0.0, rho) + 4 * observer_kernel_mode(p, l, h, rho) -
                              observer_kernel_mode(p, l, 2 * h, rho)) / (2 * h);
            EXPECT_NEAR(d, 0.0, 1e-8);
        }
        const double c = p.lambda / p.epsilon;
        EXPECT_NEAR(observer_kernel_mode(p, 0, 0.0, rho), -rho * c * oracle::i1_over_x(std::sqrt(c) * rho), 1e-12);
    }
}

TEST(Kernels, OutputInjectionGain)
{
    for (int n : {2, 3}) {
        const auto p = desk(n);
        for (int l : {0, 1, 4}) {
            EXPECT_NEAR(output_injection_gain(p, l, p.radius), -p.lambda * p.radius / 2, 1e-13);
            for (double r = 0.0; r <= p.radius; r += 0.1)
                EXPECT_NEAR(output_injection_gain(p, l, r), p.epsilon * observer_kernel_mode(p, l, r, p.radius), 1e-15);
        }
        for (int l : {1, 4}) EXPECT_EQ(output_injection_gain(p, l, 0.0), 0.0);
    }
}

TEST(Kernels, PhysicalControlKernelEqualsHarmonicSeries)
{
    for (int n : {2, 3}) {
        const auto p = desk(n);
        for (double x = 0.4; x <= p.radius; x += 0.3)
            for (double s : {0.1, 0.3, 0.6})
                for (double w : {0.0, 0.5, 1.7, oracle::pi}) {
                    const double xi = s * x;
                    double series = 0.0;
                    for (int l = 0; l <= 60; ++l)
                        series += control_kernel_mode(p, l, x, xi) * std::pow(xi, 1 - n) * addition_sum(l, n, w);
                    const double direct = physical_control_kernel(p, x, xi, w);
                    EXPECT_NEAR(direct, series, 1e-6 * std::max(1.0, std::fabs(direct))) << n << ' ' << x << ' ' << s;
                }
    }
}

TEST(Kernels, PhysicalControlKernelSpecialPoints)
{
    for (int n : {2, 3, 4}) {
        const auto p = desk(n);
        const double c = p.lambda / p.epsilon;
        for (double x = 0.2; x <= p.radius; x += 0.2) {
            const double ref = -std::sqrt(c) * oracle::i1(std::sqrt(c) * x) * std::pow(x, 1 - n) / oracle::sphere_area(n);
            EXPECT_NEAR(physical_control_kernel(p, x, 0.0, 1.0), ref, 1e-12 * std::fabs(ref));
        }
        EXPECT_THROW(physical_control_kernel(p, 1.0, 1.0, 0.0), InvalidArgument);
        auto q = p;
        q.lambda = 1e-12;
        EXPECT_LT(std::fabs(physical_control_kernel(q, 1.0, 0.5, 0.3)), 1e-10);
    }
}

TEST(Kernels, PhysicalObserverAndInjectionEqualHarmonicSeries)
{
    for (int n : {2, 3}) {
        const auto p = desk(n);
        for (double x = 0.1; x <= 0.6 * p.radius; x += 0.15)
            for (double w : {0.0, 0.8, 2.5}) {
                // density against the surface measure of the radius-R sphere
                double inj = 0.0, obs = 0.0;
                const double xi = 0.9 * p.radius;
                for (int l = 0; l <= 150; ++l) {
                    inj += output_injection_gain(p, l, x) * std::pow(p.radius, 1 - n) * addition_sum(l, n, w);
                    obs += observer_kernel_mode(p, l, x, xi) * std::pow(xi, 1 - n) * addition_sum(l, n, w);
                }
                EXPECT_NEAR(physical_injection_kernel(p, x, w), inj, 1e-8 * std::max(1.0, std::fabs(inj)));
                EXPECT_NEAR(physical_observer_kernel(p, x, xi, w), obs, 1e-8 * std::max(1.0, std::fabs(obs)));
            }
    }
}

TEST(Kernels, ControlResidualOrderTwoOnUnitProblem)
{
    const auto r = verify_kernel_pde(unit_params(2), 0, KernelKind::control, RadialGrid(1.0, 64));
    EXPECT_TRUE(r.passed);
    EXPECT_NEAR(r.order, 2.0, 0.1);
    EXPECT_LT(r.diagonal_error, 1e-12);
    EXPECT_LT(r.origin_value, 1e-12);
    EXPECT_LT(std::fabs(r.origin_slope), 1e-12);
    ASSERT_EQ(r.intervals.size(), 3u);
    EXPECT_EQ(r.intervals[0], 64);
    EXPECT_EQ(r.intervals[2], 256);
}

TEST(Kernels, AllKindsSatisfyTheirPdes)
{
    for (int n : {2, 3, 4})
        for (int l : {0, 1, 2, 5})
            for (auto kind : {KernelKind::control, KernelKind::inverse, KernelKind::observer, KernelKind::observer_inverse}) {
                const auto r = verify_kernel_pde(desk(n), l, kind, RadialGrid(1.3, 64));
                EXPECT_TRUE(r.passed) << to_string(kind) << " n=" << n << " l=" << l << " order " << r.order;
                EXPECT_LT(r.diagonal_error, 1e-12);
            }
}

TEST(Kernels, ResidualNeedsEnoughPoints)
{
    EXPECT_THROW(verify_kernel_pde(unit_params(2), 0, KernelKind::control, RadialGrid(1.0, 32)), InvalidArgument);
}

TEST(Kernels, ObserverCandidatesDiscriminated)
{
    // Only the direct (rho/r)^{n-1} K(rho, r) weighting solves the observer kernel equation.
    for (int n : {2, 3, 4})
        for (int l : {0, 2, 5}) {
            const RadialGrid g(1.0, 64);
            const auto p = unit_params(n);
            EXPECT_TRUE(verify_observer_candidate(p, l, ObserverCandidate::direct_weight, g).passed);
            const auto a = verify_observer_candidate(p, l, ObserverCandidate::rho_prefactor, g);
            const auto b = verify_observer_candidate(p, l, ObserverCandidate::inverse_weight, g);
            EXPECT_LT(a.order, 1.0) << n << ' ' << l;
            EXPECT_LT(b.order, 1.0) << n << ' ' << l;
            EXPECT_FALSE(a.passed);
            EXPECT_FALSE(b.passed);
        }
    const auto p = unit_params(3);
    for (double rho = 0.2; rho <= 1.0; rho += 0.2)
        for (double r = 0.1; r < rho; r += 0.1)
            EXPECT_NEAR(observer_candidate(ObserverCandidate::direct_weight, p, 2, r, rho), observer_kernel_mode(p, 2, r, rho), 1e-15);
}

TEST(Kernels, RowWeightsExactForCubics)
{
    const double h = 0.01;
    for (int count : {6, 7, 20, 513}) {
        const auto w = row_weights(count, h);
        const double len = (count - 1) * h;
        double s0 = 0.0, s3 = 0.0;
        for (int j = 0; j < count; ++j) {
            s0 += w[j];
            s3 += w[j] * std::pow(j * h, 3);
        }
        EXPECT_NEAR(s0, len, 1e-13);
        EXPECT_NEAR(s3, std::pow(len, 4) / 4, 1e-12);
    }
    const auto w2 = row_weights(3, h);
    EXPECT_NEAR(w2[0], h / 2, 1e-16);
    EXPECT_NEAR(w2[1], h, 1e-16);
    EXPECT_TRUE(row_weights(1, h).size() == 1 && row_weights(1, h)[0] == 0.0);
}

TEST(Kernels, TableDiagonalAndZeroRow)
{
    const auto p = desk(3);
    const RadialGrid g(p.radius, 40);
    for (auto kind : {KernelKind::control, KernelKind::inverse, KernelKind::observer, KernelKind::observer_inverse}) {
        const auto t = build_kernel_table(p, 2, kind, g);
        for (int i = 0; i < g.size(); ++i) EXPECT_EQ(t.value(i, i), -p.lambda * g.node(i) / (2 * p.epsilon));
        EXPECT_EQ(t.lower(), kind == KernelKind::control || kind == KernelKind::inverse);
    }
    const auto t = build_kernel_table(p, 0, KernelKind::control, g);
    EXPECT_EQ(t.row_begin(0), 0);
    EXPECT_EQ(t.row_end(0), 1);
    EXPECT_EQ(t.value(0, 0), 0.0);
    EXPECT_EQ(t.integrate_row(0, std::vector<double>(g.size(), 1.0)), 0.0);
}

TEST(Kernels, TableRowMatchesAdaptiveQuadrature)
{
    const auto p = unit_params(2);
    const RadialGrid g(1.0, 511);  // 512 points
    for (int l : {0, 1, 3}) {
        const auto t = build_kernel_table(p, l, KernelKind::control, g);
        const std::vector<double> one(g.size(), 1.0);
        for (int i : {511, 300, 77}) {
            const double r = g.node(i);
            const double ref = oracle::integrate([&](double rho) { return oracle::control_kernel(1, 1, 2, l, r, rho); }, 0.0, r);
            EXPECT_NEAR(t.integrate_row(i, one), ref, 1e-8) << l << ' ' << i;
        }
        const auto o = build_kernel_table(p, l, KernelKind::observer, g);
        for (int i : {200, 400}) {
            const double r = g.node(i);
            const double ref = oracle::integrate(
                [&](double rho) { return std::pow(rho / r, 1) * oracle::control_kernel(1, 1, 2, l, rho, r); }, r, 1.0);
            EXPECT_NEAR(o.integrate_row(i, one), ref, 1e-8);
        }
    }
}

TEST(Kernels, TableCsvExport)
{
    const RadialGrid g(1.0, 8);
    const auto t = build_kernel_table(unit_params(2), 1, KernelKind::control, g);
    const std::string path = ::testing::TempDir() + "nball_kernel_table.csv";
    t.write_csv(path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        int commas = 0;
        for (char ch : line) commas += ch == ',';
        EXPECT_EQ(commas, g.size() - 1);
    }
    EXPECT_EQ(rows, g.size());
    std::remove(path.c_str());
    EXPECT_THROW(t.write_csv("/nonexistent-dir/x.csv"), IoError);
}
