#pragma once

// Special functions used by the kernels. All pure, no caching.

namespace nball {

double bessel_i1(double x);
double bessel_i1_over_x(double x);   // 1/2 at x = 0
double bessel_j1(double x);
double bessel_j1_over_x(double x);   // 1/2 at x = 0
double bessel_i2_over_x2(double x);  // 1/8 at x = 0

// J_nu(x) for nu >= 0 by power series; meant for moderate x (< ~30).
double bessel_j(double nu, double x);
// First positive zero of J_nu, nu >= 0.
double first_bessel_zero(double nu);

// Gamma(k/2) for integer k >= 1, exact recursion from 1 or sqrt(pi).
double gamma_half_integer(int k);
// Surface area of the unit (n-1)-sphere.
double sphere_area(int n);

// Legendre polynomial of degree l in n dimensions, P_{l,n}(1) = 1.
double legendre_pn(int l, int n, double t);

} // namespace nball
