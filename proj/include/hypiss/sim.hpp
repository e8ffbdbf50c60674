#ifndef HYPISS_SIM_HPP
#define HYPISS_SIM_HPP

// First-order upwind simulator for the boundary-controlled hyperbolic system,
// with C0/C1 norm tracking, the p-family and sup-norm Lyapunov functionals,
// and fading-memory ISS envelope verification / fitting.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypiss/certifier.hpp" // FProfile, IssGains
#include "hypiss/errors.hpp"
#include "hypiss/model.hpp"
#include "hypiss/optimize.hpp"

namespace hypiss {

struct DisturbanceSpec {
    // Boundary disturbance d(t): one function per component (empty -> zero).
    std::vector<std::function<double(double)>> boundary;
    // Analytic d'(t) when available; otherwise centered differences are used.
    std::vector<std::function<double(double)>> boundary_prime;
    // Optional internal disturbance d2(t, x) per component.
    std::vector<std::function<double(double, double)>> internal;
    double bound = 0.0; // declared sup bound

    double at(int i, double t) const {
        if (static_cast<size_t>(i) >= boundary.size() || !boundary[static_cast<size_t>(i)])
            return 0.0;
        return boundary[static_cast<size_t>(i)](t);
    }
    double prime(int i, double t) const {
        if (static_cast<size_t>(i) < boundary_prime.size() &&
            boundary_prime[static_cast<size_t>(i)])
            return boundary_prime[static_cast<size_t>(i)](t);
        const double h = 1e-5;
        return (at(i, t + h) - at(i, std::max(0.0, t - h))) /
               (t - h >= 0.0 ? 2.0 * h : h);
    }
    double internal_at(int i, double t, double x) const {
        if (static_cast<size_t>(i) >= internal.size() || !internal[static_cast<size_t>(i)])
            return 0.0;
        return internal[static_cast<size_t>(i)](t, x);
    }
    bool has_internal() const {
        for (const auto& f : internal)
            if (f) return true;
        return false;
    }
    bool empty_boundary() const {
        for (const auto& f : boundary)
            if (f) return false;
        return true;
    }
};

struct Trajectory {
    SpatialGrid grid;
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> snapshots; // each n x grid.count()
    std::vector<double> c0_norms;
    std::vector<double> c1_norms;
    std::vector<Eigen::Vector3d> lyapunov; // optional (W1p, W2p, V) per time
};

enum class SimMode { Linear, Semilinear, QuasilinearDiagonal };

struct SimOptions {
    SimMode mode = SimMode::Linear;
    double cfl = 0.9;
    int record_every = 1;
    bool strict_compatibility = false; // throw instead of warn on violation
    double compatibility_tol = 1e-6;
};

// (c0, c1) sup norms of a snapshot: c1 adds the worst finite-difference slope
// (centered interior, one-sided ends).
inline std::pair<double, double> c_norms(const Eigen::MatrixXd& u, const SpatialGrid& grid) {
    const double h = grid.spacing();
    double c0 = u.cwiseAbs().maxCoeff();
    double slope = 0.0;
    const int c = static_cast<int>(u.cols());
    for (int i = 0; i < u.rows(); ++i) {
        slope = std::max(slope, std::abs(u(i, 1) - u(i, 0)) / h);
        for (int j = 1; j < c - 1; ++j)
            slope = std::max(slope, std::abs(u(i, j + 1) - u(i, j - 1)) / (2.0 * h));
        slope = std::max(slope, std::abs(u(i, c - 1) - u(i, c - 2)) / h);
    }
    return {c0, c0 + slope};
}

namespace detail {

// Outgoing boundary trace: (u_i(L) for positive speeds, u_i(0) for negative).
inline Eigen::VectorXd outgoing_trace(const SystemSpec& sys, const Eigen::MatrixXd& u) {
    Eigen::VectorXd v(sys.n);
    const int last = static_cast<int>(u.cols()) - 1;
    for (int i = 0; i < sys.n; ++i) v(i) = i < sys.m ? u(i, last) : u(i, 0);
    return v;
}

inline Eigen::VectorXd reflect(const SystemSpec& sys, const Eigen::VectorXd& outgoing) {
    if (sys.nonlinear && sys.nonlinear->g) return sys.nonlinear->g(outgoing);
    return sys.boundary_jacobian * outgoing;
}

// Per-point characteristic speeds for the requested mode.
inline Eigen::VectorXd speeds_at(const SystemSpec& sys, SimMode mode,
                                 const Eigen::VectorXd& u, double x) {
    if (mode == SimMode::QuasilinearDiagonal) {
        if (!sys.nonlinear || !sys.nonlinear->a_diag)
            throw NonDiagonalQuasilinear(
                "quasilinear mode requires diagonal speed closures");
        return sys.nonlinear->a_diag(u, x);
    }
    return sys.lambda_at(x);
}

inline Eigen::VectorXd source_at(const SystemSpec& sys, SimMode mode,
                                 const Eigen::VectorXd& u, double x) {
    if (mode != SimMode::Linear && sys.nonlinear && sys.nonlinear->b)
        return sys.nonlinear->b(u, x);
    return sys.source_jacobian_at(x) * u;
}

} // namespace detail

inline Trajectory simulate(const SystemSpec& sys, Eigen::MatrixXd u0,
                           const DisturbanceSpec& dist, const SpatialGrid& grid, double T,
                           SimOptions opt = {}) {
    const int n = sys.n;
    const int c = grid.count();
    if (u0.rows() != n || u0.cols() != c)
        throw DimensionMismatch("u0 must be n x grid.count()");
    if (opt.cfl <= 0.0 || opt.cfl > 0.9) throw CFLViolation("CFL number must be in (0, 0.9]");
    const double h = grid.spacing();

    // Zeroth-order compatibility: incoming traces of u0 must match the
    // reflected outgoing traces plus d(0).
    {
        Eigen::VectorXd incoming = detail::reflect(sys, detail::outgoing_trace(sys, u0));
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            double have = i < sys.m ? u0(i, 0) : u0(i, c - 1);
            worst = std::max(worst, std::abs(have - incoming(i) - dist.at(i, 0.0)));
        }
        if (worst > opt.compatibility_tol && opt.strict_compatibility)
            throw CompatibilityViolation("initial data incompatible with boundary condition");
    }

    Trajectory traj;
    traj.grid = grid;
    auto record = [&](double t, const Eigen::MatrixXd& u) {
        traj.times.push_back(t);
        traj.snapshots.push_back(u);
        auto [c0, c1] = c_norms(u, grid);
        traj.c0_norms.push_back(c0);
        traj.c1_norms.push_back(c1);
    };
    record(0.0, u0);

    Eigen::MatrixXd u = std::move(u0);
    Eigen::MatrixXd unew(n, c);
    double t = 0.0;
    long step_index = 0;
    while (t < T - 1e-14) {
        // CFL step against the current worst speed (re-sampled every step so
        // quasilinear speed changes are honoured).
        double smax = 0.0;
        for (int j = 0; j < c; ++j)
            smax = std::max(smax, detail::speeds_at(sys, opt.mode, u.col(j),
                                                    grid.points[static_cast<size_t>(j)])
                                      .cwiseAbs()
                                      .maxCoeff());
        if (smax <= 0.0) throw SpeedSignViolation("all characteristic speeds vanished");
        double dt = std::min(opt.cfl * h / smax, T - t);

        for (int j = 0; j < c; ++j) {
            double x = grid.points[static_cast<size_t>(j)];
            Eigen::VectorXd lam = detail::speeds_at(sys, opt.mode, u.col(j), x);
            Eigen::VectorXd src = detail::source_at(sys, opt.mode, u.col(j), x);
            for (int i = 0; i < n; ++i) {
                double adv;
                if (lam(i) > 0.0)
                    adv = j > 0 ? lam(i) * (u(i, j) - u(i, j - 1)) / h : 0.0;
                else
                    adv = j < c - 1 ? lam(i) * (u(i, j + 1) - u(i, j)) / h : 0.0;
                unew(i, j) = u(i, j) + dt * (-adv - src(i) + dist.internal_at(i, t, x));
            }
        }
        // Boundary condition at the new time level.
        double tnew = t + dt;
        Eigen::VectorXd incoming = detail::reflect(sys, detail::outgoing_trace(sys, unew));
        for (int i = 0; i < n; ++i) {
            double value = incoming(i) + dist.at(i, tnew);
            if (i < sys.m)
                unew(i, 0) = value;
            else
                unew(i, c - 1) = value;
        }
        u.swap(unew);
        t = tnew;
        ++step_index;
        if (step_index % opt.record_every == 0 || t >= T - 1e-14) record(t, u);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Lyapunov functionals.

namespace detail {

// Finite-difference x-derivative of one component row (centered / one-sided).
inline Eigen::VectorXd row_derivative(const Eigen::MatrixXd& u, int i, double h) {
    const int c = static_cast<int>(u.cols());
    Eigen::VectorXd d(c);
    d(0) = (u(i, 1) - u(i, 0)) / h;
    for (int j = 1; j < c - 1; ++j) d(j) = (u(i, j + 1) - u(i, j - 1)) / (2.0 * h);
    d(c - 1) = (u(i, c - 1) - u(i, c - 2)) / h;
    return d;
}

// log of the composite-trapezoid integral of sum_i exp(logterm(i, j)),
// evaluated stably in log space; returns -inf for identically zero data.
inline double log_trapezoid(const Eigen::MatrixXd& logterm, double h) {
    double peak = logterm.maxCoeff();
    if (!std::isfinite(peak)) return -kInf;
    double acc = 0.0;
    const int c = static_cast<int>(logterm.cols());
    for (int j = 0; j < c; ++j) {
        double col = 0.0;
        for (int i = 0; i < logterm.rows(); ++i) col += std::exp(logterm(i, j) - peak);
        acc += (j == 0 || j == c - 1) ? 0.5 * col : col;
    }
    return peak + std::log(acc * h);
}

inline Eigen::MatrixXd weighted_log_terms(const SystemSpec& sys, const SpatialGrid& grid,
                                          const Eigen::MatrixXd& field, const FProfile& f,
                                          double mu, double p) {
    const int n = static_cast<int>(field.rows());
    Orientation o = Orientation::from(sys);
    Eigen::MatrixXd lt(n, field.cols());
    for (int j = 0; j < field.cols(); ++j) {
        double x = grid.points[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) {
            double mag = std::abs(field(i, j));
            lt(i, j) = mag > 0.0 ? p * std::log(f.values(i, j)) - 2.0 * p * mu * o.s(i) * x +
                                       2.0 * p * std::log(mag)
                                 : -kInf;
        }
    }
    return lt;
}

// Substitute time derivative -A(u, x) u_x, component-wise (A diagonal).
inline Eigen::MatrixXd substitute_time_derivative(const SystemSpec& sys,
                                                  const SpatialGrid& grid,
                                                  const Eigen::MatrixXd& u) {
    const int n = static_cast<int>(u.rows());
    Eigen::MatrixXd v(n, u.cols());
    const double h = grid.spacing();
    for (int i = 0; i < n; ++i) v.row(i) = row_derivative(u, i, h).transpose();
    for (int j = 0; j < u.cols(); ++j) {
        double x = grid.points[static_cast<size_t>(j)];
        Eigen::VectorXd lam = sys.nonlinear && sys.nonlinear->a_diag
                                  ? sys.nonlinear->a_diag(u.col(j), x)
                                  : sys.lambda_at(x);
        v.col(j) = (-lam.array() * v.col(j).array()).matrix();
    }
    return v;
}

} // namespace detail

// (W_{1,p}, W_{2,p}) for one snapshot: p-integral norms of the weighted state
// and of the substitute time derivative -A u_x.
inline std::pair<double, double> lyapunov_w(const SystemSpec& sys, const SpatialGrid& grid,
                                            const Eigen::MatrixXd& u, const FProfile& f,
                                            double mu, double p) {
    if (p < 1.0) throw Error("p must be >= 1");
    const double h = grid.spacing();
    double l1 = detail::log_trapezoid(detail::weighted_log_terms(sys, grid, u, f, mu, p), h);
    Eigen::MatrixXd ut = detail::substitute_time_derivative(sys, grid, u);
    double l2 = detail::log_trapezoid(detail::weighted_log_terms(sys, grid, ut, f, mu, p), h);
    auto finish = [&](double logint) {
        return std::isfinite(logint) ? std::exp(logint / (2.0 * p)) : 0.0;
    };
    return {finish(l1), finish(l2)};
}

// V: weighted sup norm of the state plus weighted sup of -A u_x.
inline double lyapunov_v(const SystemSpec& sys, const SpatialGrid& grid,
                         const Eigen::MatrixXd& u, const FProfile& f, double mu) {
    Orientation o = Orientation::from(sys);
    Eigen::MatrixXd ut = detail::substitute_time_derivative(sys, grid, u);
    double first = 0.0, second = 0.0;
    for (int j = 0; j < u.cols(); ++j) {
        double x = grid.points[static_cast<size_t>(j)];
        for (int i = 0; i < u.rows(); ++i) {
            double w = std::sqrt(f.values(i, j)) * std::exp(-mu * o.s(i) * x);
            first = std::max(first, w * std::abs(u(i, j)));
            second = std::max(second, w * std::abs(ut(i, j)));
        }
    }
    return first + second;
}

// ---------------------------------------------------------------------------
// ISS envelope verification and fitting.

struct EnvelopeReport {
    bool holds = false;
    double worst_time = -1.0;
    double worst_ratio = 0.0;
    std::optional<IssGains> fitted;
    std::string note;
};

namespace detail {

// Fading-memory disturbance terms B_k(t) = sup_{tau <= t} e^{-gamma (t - tau)}
// max_i |d_i^{(k)}(tau)|, scanned over the recorded times; plus internal terms.
struct EnvelopeData {
    std::vector<double> times;
    std::vector<double> lhs;      // trajectory norm at each time
    std::vector<double> d_sup;    // max_i |d_i| at each time
    std::vector<double> dp_sup;   // max_i |d_i'| (q = 1 only)
    double u0_norm = 0.0;

    double rhs(double c1, double c2, double gamma, size_t k) const {
        double t = times[k];
        double fading = 0.0;
        for (size_t j = 0; j <= k; ++j) {
            double decay = std::exp(-gamma * (t - times[j]));
            double term = d_sup[j] + (dp_sup.empty() ? 0.0 : dp_sup[j]);
            fading = std::max(fading, decay * term);
        }
        return c1 * std::exp(-gamma * t) * u0_norm + c2 * fading;
    }
};

inline EnvelopeData collect_envelope_data(const Trajectory& traj,
                                          const DisturbanceSpec& dist, int q) {
    if (traj.times.empty()) throw HorizonMismatch("empty trajectory");
    EnvelopeData d;
    d.times = traj.times;
    d.lhs = q == 0 ? traj.c0_norms : traj.c1_norms;
    d.u0_norm = d.lhs.front();
    const int n = static_cast<int>(traj.snapshots.front().rows());
    for (double t : traj.times) {
        double s = 0.0, sp = 0.0;
        for (int i = 0; i < n; ++i) {
            s = std::max(s, std::abs(dist.at(i, t)));
            if (q == 1) sp = std::max(sp, std::abs(dist.prime(i, t)));
        }
        if (dist.has_internal())
            for (int i = 0; i < n; ++i)
                for (double x : traj.grid.points)
                    s = std::max(s, std::abs(dist.internal_at(i, t, x)));
        d.d_sup.push_back(s);
        if (q == 1) d.dp_sup.push_back(sp);
    }
    return d;
}

} // namespace detail

inline EnvelopeReport envelope_check(const Trajectory& traj, const DisturbanceSpec& dist,
                                     const IssGains& gains, int q = 0) {
    detail::EnvelopeData data = detail::collect_envelope_data(traj, dist, q);
    EnvelopeReport rep;
    rep.worst_ratio = 0.0;
    bool any = false;
    for (size_t k = 0; k < data.times.size(); ++k) {
        double rhs = data.rhs(gains.C1, gains.C2, gains.gamma, k);
        if (rhs <= 0.0) continue;
        any = true;
        double ratio = data.lhs[k] / rhs;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_time = data.times[k];
        }
    }
    if (!any) {
        rep.note = "vacuous window";
        rep.holds = true;
        return rep;
    }
    rep.holds = rep.worst_ratio <= 1.0;
    return rep;
}

// Fits (C1, C2, gamma) across one or more trajectories: for each candidate
// rate, the minimal (C1, C2) covering all snapshots is found on a small C1
// grid, then the loosest-fitting candidate with the largest viable rate wins.
// A safety factor keeps the fit from being razor-thin on held-out data.
inline IssGains envelope_fit(const std::vector<Trajectory>& trajs,
                             const std::vector<DisturbanceSpec>& dists, int q = 0,
                             double safety = 1.05) {
    if (trajs.empty() || trajs.size() != dists.size())
        throw HorizonMismatch("need matching trajectory/disturbance lists");
    std::vector<detail::EnvelopeData> data;
    for (size_t i = 0; i < trajs.size(); ++i)
        data.push_back(detail::collect_envelope_data(trajs[i], dists[i], q));

    double t_max = 0.0;
    for (const auto& d : data) t_max = std::max(t_max, d.times.back());
    IssGains best;
    double best_score = kInf;
    for (int gi = 0; gi < 24; ++gi) {
        double gamma = std::exp(std::log(1e-2) +
                                (std::log(10.0 / std::max(t_max, 1.0)) - std::log(1e-2)) *
                                    gi / 23.0);
        for (double c1 : {1.0, 1.5, 2.0, 4.0, 8.0, 16.0}) {
            double c2 = 0.0;
            bool feasible = true;
            for (const auto& d : data) {
                for (size_t k = 0; k < d.times.size(); ++k) {
                    double base = c1 * std::exp(-gamma * d.times[k]) * d.u0_norm;
                    double need = d.lhs[k] - base;
                    if (need <= 0.0) continue;
                    double fade = d.rhs(0.0, 1.0, gamma, k); // pure disturbance term
                    if (fade <= 0.0) {
                        feasible = false;
                        break;
                    }
                    c2 = std::max(c2, need / fade);
                }
                if (!feasible) break;
            }
            if (!feasible) continue;
            // Prefer tight constants and a fast rate.
            double score = c1 + c2 - 0.5 * gamma * t_max / (1.0 + c1 + c2);
            if (score < best_score) {
                best_score = score;
                best.C1 = c1;
                best.C2 = std::max(c2 * safety, 1e-12);
                best.gamma = gamma;
                best.rate_certified = false;
            }
        }
    }
    if (best_score == kInf) throw Error("envelope fit infeasible");
    return best;
}

} // namespace hypiss

#endif
