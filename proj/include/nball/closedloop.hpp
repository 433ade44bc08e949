#pragma once

#include "nball/kernels.hpp"
#include "nball/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nball {

enum class Controller { none, full_state, output_feedback };
const char* to_string(Controller c);
Controller controller_from_string(const std::string& s);

struct Scenario {
    KernelParams params;
    int intervals = 256;
    double dt = 1e-3;
    double horizon = 2.0;
    Controller controller = Controller::output_feedback;
    std::vector<ModeState> initial;           // one profile per active channel
    std::vector<ModeState> observer_initial;  // empty means u_hat(0) = 0
    double output_interval = 0.01;
    double snapshot_interval = 0.0;           // 0: final snapshot only
    int startup_steps = 2;                    // steps split into two backward-Euler halves

    RadialGrid grid() const { return RadialGrid(params.radius, intervals); }
    void validate() const;
};

struct NormSample {
    double t = 0.0;
    double l2_u = 0.0;
    double h1_u = 0.0;
    double h1_uhat = 0.0;
    double h1_utilde = 0.0;
    std::vector<double> l2_by_degree;  // plant L2 restricted to each degree l
};

struct ControlSample {
    double t = 0.0;
    int l = 0;
    int m = 0;
    double U = 0.0;
};

struct Snapshot {
    double t = 0.0;
    std::vector<ModeState> plant;
};

struct RateFit {
    double rate = 0.0;       // -slope of log(norm)
    double r_squared = 0.0;
};

struct SimReport {
    std::vector<NormSample> norms;
    std::vector<ControlSample> controls;
    std::vector<Snapshot> snapshots;
    std::map<std::string, RateFit> rates;
    std::vector<ModeState> final_plant;
    std::vector<ModeState> final_observer;
};

double l2_norm(const std::vector<ModeState>& modes, const RadialGrid& grid);
// Throws when a degree >= 1 channel is nonzero at r = 0.
double h1_norm(const std::vector<ModeState>& modes, const RadialGrid& grid);

SimReport run_scenario(const Scenario& s);

// Least-squares slope of log(values) on [t0, t1].
RateFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& values, double t0, double t1);

// Profiles A/(1+l) c (r/R)^l (1 - r/R) (1 + a1 r/R + a2 (r/R)^2) with seeded random c, a1, a2.
std::vector<ModeState> multimode_initial(int n, int l_max, const RadialGrid& grid, std::uint64_t seed,
                                         double amplitude = 1.0);
// Single channel (l, 0) carrying the first Dirichlet eigenfunction.
std::vector<ModeState> eigenmode_initial(int n, int l, const RadialGrid& grid, double amplitude = 1.0);
// Adds alpha (r/R)^{l+2} per channel so that u(R) = int K(R, .) u, i.e. w(R) = 0.
void make_boundary_compatible(std::vector<ModeState>& modes, const KernelParams& p, const RadialGrid& grid);

struct TrackingReport {
    double max_discrepancy = 0.0;  // sup over time, channels and nodes
    double initial_sup = 0.0;      // sup |u_0|
    double h = 0.0;
    double dt = 0.0;
};

// Full-state loop transformed by K each step versus the target system run directly.
TrackingReport target_tracking(const Scenario& s);

struct BoundProbe {
    KernelKind kind = KernelKind::control;
    int samples = 0;
    double max_ratio_l2 = 0.0;
    double min_ratio_l2 = 0.0;
    double max_ratio_h1 = 0.0;
    double bound_l2 = 0.0;
    double bound_h1 = 0.0;
    bool within() const { return max_ratio_l2 <= bound_l2 && max_ratio_h1 <= bound_h1; }
};

// Analytic transform bounds from the sup of the kernel's Bessel factor and of its r-derivative.
void transform_bounds(const KernelParams& p, KernelKind kind, double& bound_l2, double& bound_h1);

BoundProbe transform_bound_probe(const KernelParams& p, KernelKind kind, const RadialGrid& grid, int l_max,
                                 int batch, std::uint64_t seed);

// Direct polar finite-difference simulation of the disk (n = 2).
struct DiskOracleConfig {
    int radial = 128;     // radial intervals
    int angular = 64;     // angular nodes
    double dt = 1e-3;
    double horizon = 1.0;
    double output_interval = 0.01;
};

struct DiskOracleReport {
    std::vector<double> t;
    std::vector<double> l2_u;
    std::vector<double> angular_variance;      // max over rings of the variance in angle
    std::vector<std::vector<double>> control;  // U(t, theta_j) per output time
    std::vector<double> theta;
};

DiskOracleReport disk_oracle_run(const Scenario& s, const DiskOracleConfig& cfg);

// U(theta) = sum over channels of U_lm Y_lm(theta) for n = 2.
std::vector<double> assemble_boundary_control(const std::vector<ControlSample>& controls, double t,
                                              const std::vector<double>& theta);

} // namespace nball
