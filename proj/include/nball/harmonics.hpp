#pragma once

#include "nball/types.hpp"

#include <functional>
#include <vector>

namespace nball {

// Number of independent degree-l harmonics on S^{n-1}.
int mode_count(int l, int n);
// All (l, m) channels with l <= l_max, ordered by l then m.
std::vector<ModeIndex> enumerate_modes(int n, int l_max);

// Ultraspherical angles: theta_1 in [0, 2pi], theta_i in [0, pi] for i >= 2.
struct AngularPoint {
    std::vector<double> theta;
    int dimension() const { return static_cast<int>(theta.size()) + 1; }
};

std::vector<double> unit_vector(const AngularPoint& p);
double geodesic_angle(const AngularPoint& a, const AngularPoint& b);

// N(l,n)/Area(S^{n-1}) * P_{l,n}(cos omega).
double addition_sum(int l, int n, double omega);
// (1 - s^2) / (1 + s^2 - 2 s cos omega)^{n/2}, 0 <= s < 1.
double poisson_factor(double s, double omega, int n);

// Real orthonormal harmonic Y_lm, n = 2 or 3.
// n = 2: m = 0 -> cos(l t), m = 1 -> sin(l t) (l = 0 has only m = 0).
// n = 3: m = 0 -> zonal, m = 2k-1 -> cos(k phi) part, m = 2k -> sin(k phi) part.
// The complex pair Y_{l,+-k} maps to (Y_{l,2k-1} -+ i Y_{l,2k}) / sqrt(2).
double harmonic_value(const ModeIndex& idx, const AngularPoint& p);

// Tensor quadrature on S^1 (uniform) or S^2 (uniform x Gauss-Legendre in cos).
struct SphereGrid {
    int n = 2;
    int n_theta1 = 0;
    int n_theta2 = 1;
    std::vector<AngularPoint> points;
    std::vector<double> weights;

    static SphereGrid make(int n, int n_theta1, int n_theta2 = 1);
    // Smallest grid that integrates products of degree <= l_max harmonics exactly.
    static SphereGrid for_degree(int n, int l_max);
};

// Field values on radial x angular tensor nodes, index [i * points + k].
struct SampledField {
    RadialGrid grid;
    SphereGrid sphere;
    std::vector<double> values;

    double at(int i, int k) const { return values[static_cast<std::size_t>(i) * sphere.points.size() + k]; }
};

SampledField sample_field(const std::function<double(double, const AngularPoint&)>& f,
                          const RadialGrid& grid, const SphereGrid& sphere);

std::vector<ModeState> analyze(const SampledField& field, int l_max);

// Truncated series at (r, p); linear interpolation between radial nodes.
double synthesize(const std::vector<ModeState>& modes, const RadialGrid& grid, double r,
                  const AngularPoint& p);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace nball
