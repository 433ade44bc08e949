#pragma once

#include "nball/kernels.hpp"
#include "nball/types.hpp"

#include <vector>

namespace nball {

// Row i: sub[i] u_{i-1} + diag[i] u_i + super[i] u_{i+1}.
struct Tridiagonal {
    std::vector<double> sub, diag, super;

    int size() const { return static_cast<int>(diag.size()); }
    std::vector<double> apply(const std::vector<double>& u) const;
};

// eps r^{1-n} d_r(r^{n-1} d_r) - eps l(l+n-2)/r^2 + reaction, conservative form.
// Row 0: symmetric limit 2 n eps (u_1 - u_0)/h^2 for l = 0, zero row (pinned) for l >= 1.
// Row m is left zero for the boundary condition.
Tridiagonal assemble_radial_operator(const KernelParams& p, int l, const RadialGrid& grid, double reaction);

// Largest eigenvalue of the operator with u(R) = 0 (and u(0) = 0 for l >= 1), by Sturm bisection.
double largest_eigenvalue(const Tridiagonal& op, int l);

// eps (j_{l+n/2-1,1} / R)^2: decay rate of the slowest Dirichlet heat mode of degree l.
double dirichlet_threshold(const KernelParams& p, int l);
// r^{1-n/2} J_{l+n/2-1}(j r / R) scaled to unit maximum.
std::vector<double> dirichlet_eigenmode(int n, int l, const RadialGrid& grid);

// One-sided second-order slope at r = R.
double boundary_slope(const std::vector<double>& u, double h);

// Crank-Nicolson step of the plant mode with u(R) = boundary_value.
ModeState step_plant_mode(const ModeState& state, const KernelParams& p, double dt, double boundary_value);
// Crank-Nicolson step of the observer mode; measurements at the old and new time levels.
ModeState step_observer_mode(const ModeState& state, const KernelParams& p, double dt, double boundary_value,
                             double measurement_old, double measurement_new);

// U = int_0^R K(R, rho) u(rho) d rho.
double compute_mode_control(const ModeState& state, const KernelTable& table);

enum class TransformDirection { forward, inverse };
// forward: w = u - int K u (control) or u~ = w~ - int P w~ (observer).
// inverse: u = w + int L w (inverse) or w~ = u~ + int R u~ (observer_inverse).
ModeState apply_mode_transform(const ModeState& state, const KernelTable& table, TransformDirection direction);

// Theta-scheme stepper for one channel with factorizations and boundary responses cached.
// Startup steps replace one step by two backward-Euler half steps.
class ChannelPropagator {
public:
    ChannelPropagator(const KernelParams& p, int l, const RadialGrid& grid, double dt, double theta = 0.5);

    int degree() const { return l_; }
    const RadialGrid& grid() const { return grid_; }
    double dt() const { return dt_; }

    void step_plant(std::vector<double>& u, double boundary_value, bool startup = false) const;
    void step_observer(std::vector<double>& uhat, double boundary_value, double y_old, double y_new,
                       bool startup = false) const;
    // Plant under U = k . u at the new level, solved exactly. Returns the final U.
    double step_full_state(std::vector<double>& u, const std::vector<double>& k, bool startup = false) const;
    // Plant and observer under U = k . uhat at the new level with y = boundary slope of u. Returns U.
    double step_output_feedback(std::vector<double>& u, std::vector<double>& uhat, const std::vector<double>& k,
                                bool startup = false) const;
    // Plant with u(R) = 0 and reaction replaced by -target_damping (target system).
    void step_target(std::vector<double>& w, bool startup = false) const;

private:
    struct Stage {
        double dt = 0.0;
        double theta = 0.5;
        Tridiagonal op;           // A for this stage's reaction
        std::vector<double> lsub; // sub-diagonal of I - theta dt A, identity boundary rows
        std::vector<double> cp;   // Thomas factors of that matrix
        std::vector<double> inv;
        std::vector<double> phi;  // response to unit boundary value, zero interior rhs
        std::vector<double> q;    // (I - theta dt A)^{-1} theta dt p
        double dq = 0.0;          // d~ . q
        std::vector<double> obs_phi;  // observer response to b = 1 with y_new = slope(phi)
    };

    Stage make_stage(const Tridiagonal& op, double dt, double theta, bool observer) const;
    std::vector<double> solve(const Stage& s, std::vector<double> rhs, double boundary_value) const;
    std::vector<double> explicit_rhs(const Stage& s, const std::vector<double>& u) const;
    std::vector<double> observer_solve(const Stage& s, std::vector<double> rhs, double boundary_value) const;
    std::vector<double> observer_rhs(const Stage& s, const std::vector<double>& uhat, double y_old,
                                     double y_new) const;
    double slope_tail(const std::vector<double>& v) const;  // d . v without the u_m term

    void plant_stage(const Stage& s, std::vector<double>& u, double b) const;
    void observer_stage(const Stage& s, std::vector<double>& uhat, double b, double y_old, double y_new) const;
    double full_state_stage(const Stage& s, std::vector<double>& u, const std::vector<double>& k) const;
    double output_feedback_stage(const Stage& s, std::vector<double>& u, std::vector<double>& uhat,
                                 const std::vector<double>& k) const;

    KernelParams params_;
    int l_ = 0;
    RadialGrid grid_;
    double dt_ = 0.0;
    std::vector<double> gain_;
    Stage main_, start_, target_main_, target_start_;
};

} // namespace nball
