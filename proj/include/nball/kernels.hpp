#pragma once

#include "nball/types.hpp"

#include <string>
#include <vector>

namespace nball {

struct KernelParams {
    double epsilon = 1.0;
    double lambda = 1.0;
    double radius = 1.0;
    int dimension = 2;
    // Optional extra damping c in the target system w_t = eps Lap w - c w.
    double target_damping = 0.0;

    void validate() const;
    // (lambda + target_damping) / epsilon, the constant in every kernel.
    double gain() const { return (lambda + target_damping) / epsilon; }
};

enum class KernelKind { control, inverse, observer, observer_inverse };

const char* to_string(KernelKind k);
KernelKind kernel_kind_from_string(const std::string& s);

// K(r, rho), 0 <= rho <= r <= R.
double control_kernel_mode(const KernelParams& p, int l, double r, double rho);
// L(r, rho), 0 <= rho <= r <= R.
double inverse_kernel_mode(const KernelParams& p, int l, double r, double rho);
// P(r, rho) = (rho/r)^{n-1} K(rho, r), 0 <= r <= rho <= R.
double observer_kernel_mode(const KernelParams& p, int l, double r, double rho);
// Inverse of the P-transform: (rho/r)^{n-1} L(rho, r).
double observer_inverse_kernel_mode(const KernelParams& p, int l, double r, double rho);
double kernel_mode(KernelKind kind, const KernelParams& p, int l, double r, double rho);

// p(r) = eps * P(r, R).
double output_injection_gain(const KernelParams& p, int l, double r);

// Point kernels in physical space; x_norm = |x|, xi_norm = |xi|, omega the angle between.
double physical_control_kernel(const KernelParams& p, double x_norm, double xi_norm, double omega);
double physical_observer_kernel(const KernelParams& p, double x_norm, double xi_norm, double omega);
// Factor multiplying (y - d_r u_hat(R)) in the observer: injection at x from boundary point at angle omega.
double physical_injection_kernel(const KernelParams& p, double x_norm, double omega);

// Observer-kernel forms compared by the residual test.
enum class ObserverCandidate {
    rho_prefactor,   // -rho (rho/r)^{l-1} c I1(x)/x
    inverse_weight,  // (r/rho)^{n-1} K(rho, r)
    direct_weight,   // (rho/r)^{n-1} K(rho, r), the form used by the library
};

const char* to_string(ObserverCandidate c);
double observer_candidate(ObserverCandidate c, const KernelParams& p, int l, double r, double rho);

struct ResidualReport {
    KernelKind kind = KernelKind::control;
    int l = 0;
    std::vector<int> intervals;         // m, 2m, 4m
    std::vector<double> max_residual;   // per grid
    double order = 0.0;                 // worst log2 ratio between successive grids
    double diagonal_error = 0.0;        // max |F(r,r) + c r / 2| on the base grid
    double origin_value = 0.0;          // max |K(r,0)| (control, inverse) or |P(0,rho)| (observer kinds)
    double origin_slope = 0.0;          // exact (n-2) d_rho K(r,0); d_r P(0,rho) for observer kinds
    double origin_slope_fd = 0.0;       // same by one-sided 2nd-order differences
    bool passed = false;                // order >= 1.8
};

// Residual of the kernel PDE for a closed form, sampled at base-grid nodes at
// least 2h from the diagonal and the axes, with differences at h, h/2, h/4.
ResidualReport verify_kernel_pde(const KernelParams& p, int l, KernelKind kind, const RadialGrid& grid);
ResidualReport verify_observer_candidate(const KernelParams& p, int l, ObserverCandidate c,
                                         const RadialGrid& grid);

// Dense kernel samples with per-row quadrature weights.
// Rows integrate over [0, r_i] (control, inverse) or [r_i, R] (observer kinds).
class KernelTable {
public:
    KernelTable() = default;
    KernelTable(const KernelParams& p, int l, KernelKind kind, const RadialGrid& grid);

    KernelKind kind() const { return kind_; }
    int degree() const { return l_; }
    const RadialGrid& grid() const { return grid_; }
    const KernelParams& params() const { return params_; }

    double value(int i, int j) const { return values_[idx(i, j)]; }
    double weight(int i, int j) const { return weights_[idx(i, j)]; }
    int row_begin(int i) const { return lower() ? 0 : i; }
    int row_end(int i) const { return lower() ? i + 1 : grid_.size(); }
    bool lower() const { return kind_ == KernelKind::control || kind_ == KernelKind::inverse; }

    // sum_j w_ij K_ij f_j over the row support.
    double integrate_row(int i, const std::vector<double>& f) const;

    void write_csv(const std::string& path) const;

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * grid_.size() + j; }

    KernelParams params_;
    int l_ = 0;
    KernelKind kind_ = KernelKind::control;
    RadialGrid grid_;
    std::vector<double> values_;
    std::vector<double> weights_;
};

KernelTable build_kernel_table(const KernelParams& p, int l, KernelKind kind, const RadialGrid& grid);

// Trapezoid with Gregory end corrections on count >= 6 equispaced nodes, plain trapezoid otherwise.
std::vector<double> row_weights(int count, double h);

} // namespace nball
