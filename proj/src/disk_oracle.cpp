#include "nball/closedloop.hpp"
#include "nball/error.hpp"
#include "nball/harmonics.hpp"
#include "nball/kernels.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <numbers>

namespace nball {
namespace {

using SpMat = Eigen::SparseMatrix<double>;

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol)
{
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson_rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40);
}

struct Stage {
    double dt = 0.0;
    double theta = 0.5;
    Eigen::SparseLU<SpMat> lu;
    Eigen::MatrixXd sb;    // (I - theta dt A)^{-1} B
    Eigen::MatrixXd minv;  // (I - theta dt Q SB - Qb)^{-1}
};

class DiskModel {
public:
    DiskModel(const KernelParams& p, const DiskOracleConfig& cfg, bool control)
        : p_(p), M_(cfg.radial), N_(cfg.angular), h_(p.radius / cfg.radial), dth_(2.0 * std::numbers::pi / cfg.angular),
          control_(control)
    {
        if (M_ < 4 || N_ < 4) throw InvalidArgument("disk oracle grid too small");
        nu_ = 1 + (M_ - 1) * N_;
        assemble();
        if (control_) assemble_quadrature();
    }

    int unknowns() const { return nu_; }
    int idx(int i, int j) const { return 1 + (i - 1) * N_ + ((j % N_) + N_) % N_; }
    double radius(int i) const { return i * h_; }
    int angular() const { return N_; }
    int radial() const { return M_; }

    void init_stage(Stage& s, double dt, double theta) const
    {
        s.dt = dt;
        s.theta = theta;
        SpMat I(nu_, nu_);
        I.setIdentity();
        SpMat lhs = I - theta * dt * A_;
        s.lu.compute(lhs);
        if (s.lu.info() != Eigen::Success) throw SolverError("disk oracle: sparse factorization failed");
        if (!control_) return;
        s.sb.resize(nu_, N_);
        for (int j = 0; j < N_; ++j) {
            Eigen::VectorXd col = B_.col(j);
            s.sb.col(j) = s.lu.solve(col);
        }
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(N_, N_) - theta * dt * (Q_ * s.sb) - Qb_;
        s.minv = m.inverse();
    }

    // One theta step; b holds the boundary values and is updated by the control when enabled.
    void step(const Stage& s, Eigen::VectorXd& u, Eigen::VectorXd& b) const
    {
        Eigen::VectorXd rhs = u;
        if (s.theta < 1.0) rhs += (1.0 - s.theta) * s.dt * (A_ * u + B_ * b);
        Eigen::VectorXd v = s.lu.solve(rhs);
        if (s.lu.info() != Eigen::Success) throw SolverError("disk oracle: sparse solve failed");
        if (control_) {
            b = s.minv * (Q_ * v);
            u = v + s.theta * s.dt * s.sb * b;
        } else {
            u = v;
        }
    }

    Eigen::VectorXd control(const Eigen::VectorXd& u, const Eigen::VectorXd& b) const
    {
        if (!control_) return Eigen::VectorXd::Zero(N_);
        return Q_ * u + Qb_ * b;
    }

    double l2(const Eigen::VectorXd& u, const Eigen::VectorXd& b) const
    {
        double acc = 0.0;
        for (int i = 1; i < M_; ++i)
            for (int j = 0; j < N_; ++j) acc += h_ * radius(i) * dth_ * u[idx(i, j)] * u[idx(i, j)];
        acc += 0.5 * h_ * p_.radius * dth_ * b.squaredNorm();
        return std::sqrt(acc);
    }

    double angular_variance(const Eigen::VectorXd& u) const
    {
        double worst = 0.0;
        for (int i = 1; i < M_; ++i) {
            double mean = 0.0, sq = 0.0;
            for (int j = 0; j < N_; ++j) mean += u[idx(i, j)];
            mean /= N_;
            for (int j = 0; j < N_; ++j) sq += (u[idx(i, j)] - mean) * (u[idx(i, j)] - mean);
            worst = std::max(worst, sq / N_);
        }
        return worst;
    }

private:
    void assemble()
    {
        const double eps = p_.epsilon, h2 = h_ * h_;
        std::vector<Eigen::Triplet<double>> a, bt;
        a.emplace_back(0, 0, -4.0 * eps / h2 + p_.lambda);
        for (int j = 0; j < N_; ++j) a.emplace_back(0, idx(1, j), 4.0 * eps / (N_ * h2));
        for (int i = 1; i < M_; ++i) {
            const double r = radius(i);
            const double wl = (r - 0.5 * h_) / (r * h2), wr = (r + 0.5 * h_) / (r * h2);
            const double wa = 1.0 / (r * r * dth_ * dth_);
            for (int j = 0; j < N_; ++j) {
                const int row = idx(i, j);
                a.emplace_back(row, row, -eps * (wl + wr + 2.0 * wa) + p_.lambda);
                a.emplace_back(row, idx(i, j - 1), eps * wa);
                a.emplace_back(row, idx(i, j + 1), eps * wa);
                a.emplace_back(row, i == 1 ? 0 : idx(i - 1, j), eps * wl);
                if (i + 1 < M_)
                    a.emplace_back(row, idx(i + 1, j), eps * wr);
                else
                    bt.emplace_back(row, j, eps * wr);
            }
        }
        A_.resize(nu_, nu_);
        A_.setFromTriplets(a.begin(), a.end());
        B_.resize(nu_, N_);
        B_.setFromTriplets(bt.begin(), bt.end());
    }

    // U(theta_j) = sum over radial cells of h rho int k(R, rho, theta_j - phi) u(rho, phi) dphi,
    // u linear in phi between nodes and averaged between the two bounding rings.
    void assemble_quadrature()
    {
        Q_ = Eigen::MatrixXd::Zero(N_, nu_);
        Qb_ = Eigen::MatrixXd::Zero(N_, N_);
        const double R = p_.radius;
        for (int i = 0; i < M_; ++i) {
            const double rho = (i + 0.5) * h_;
            std::vector<double> w(N_);
            for (int d = 0; d < N_; ++d) {
                auto f = [&](double s) {
                    return physical_control_kernel(p_, R, rho, d * dth_ + s) * (1.0 - std::fabs(s) / dth_);
                };
                const double scale = std::fabs(physical_control_kernel(p_, R, rho, d * dth_)) + 1e-300;
                w[d] = adaptive_simpson(f, -dth_, 0.0, 1e-12 * scale * dth_) +
                       adaptive_simpson(f, 0.0, dth_, 1e-12 * scale * dth_);
            }
            const double wr = 0.5 * h_ * rho;
            for (int j = 0; j < N_; ++j)
                for (int k = 0; k < N_; ++k) {
                    const double c = wr * w[((j - k) % N_ + N_) % N_];
                    if (i == 0)
                        Q_(j, 0) += c;
                    else
                        Q_(j, idx(i, k)) += c;
                    if (i + 1 < M_)
                        Q_(j, idx(i + 1, k)) += c;
                    else
                        Qb_(j, k) += c;
                }
        }
    }

    KernelParams p_;
    int M_, N_;
    double h_, dth_;
    bool control_;
    int nu_ = 0;
    SpMat A_, B_;
    Eigen::MatrixXd Q_, Qb_;
};

} // namespace

DiskOracleReport disk_oracle_run(const Scenario& s, const DiskOracleConfig& cfg)
{
    s.validate();
    if (s.params.dimension != 2) throw InvalidArgument("disk oracle needs n = 2");
    if (s.controller == Controller::output_feedback)
        throw InvalidArgument("disk oracle supports controller none or full_state");
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0)) throw InvalidArgument("disk oracle: dt and horizon must be positive");
    const bool control = s.controller == Controller::full_state;
    DiskModel model(s.params, cfg, control);
    const RadialGrid src = s.grid();
    const int N = model.angular(), M = model.radial();

    DiskOracleReport rep;
    for (int j = 0; j < N; ++j) rep.theta.push_back(j * 2.0 * std::numbers::pi / N);
    Eigen::VectorXd u(model.unknowns()), b(N);
    u[0] = synthesize(s.initial, src, 0.0, AngularPoint{{0.0}});
    for (int i = 1; i < M; ++i)
        for (int j = 0; j < N; ++j) u[model.idx(i, j)] = synthesize(s.initial, src, model.radius(i), AngularPoint{{rep.theta[j]}});
    for (int j = 0; j < N; ++j) b[j] = synthesize(s.initial, src, s.params.radius, AngularPoint{{rep.theta[j]}});

    Stage main, start;
    model.init_stage(main, cfg.dt, 0.5);
    if (s.startup_steps > 0) model.init_stage(start, 0.5 * cfg.dt, 1.0);

    auto record = [&](double t) {
        rep.t.push_back(t);
        rep.l2_u.push_back(model.l2(u, b));
        rep.angular_variance.push_back(model.angular_variance(u));
        const Eigen::VectorXd U = model.control(u, b);
        rep.control.emplace_back(U.data(), U.data() + U.size());
    };
    const long steps = std::max(1L, std::lround(cfg.horizon / cfg.dt));
    const long out_every = std::max(1L, std::lround(cfg.output_interval / cfg.dt));
    record(0.0);
    for (long step = 0; step < steps; ++step) {
        if (step < s.startup_steps) {
            model.step(start, u, b);
            model.step(start, u, b);
        } else {
            model.step(main, u, b);
        }
        if ((step + 1) % out_every == 0) record((step + 1) * cfg.dt);
    }
    return rep;
}

} // namespace nball
