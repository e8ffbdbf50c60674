#ifndef HYPISS_CERTIFIER_HPP
#define HYPISS_CERTIFIER_HPP

// Certification pipeline: integrates the interior weight system taken with
// equality, checks the interior and boundary inequalities, optimizes the free
// diagonal scaling, and assembles explicit ISS gains. Also the maximal
// ISS-length estimator for reflection-free boundary conditions.

#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypiss/errors.hpp"
#include "hypiss/model.hpp"
#include "hypiss/ode.hpp"
#include "hypiss/optimize.hpp"
#include "hypiss/planar.hpp" // ConditionReport
#include "hypiss/scaling.hpp"

namespace hypiss {

struct FProfile {
    SpatialGrid grid;
    Eigen::MatrixXd values;          // n x grid.count(), strictly positive
    std::optional<double> blow_up;   // abscissa where positivity/finiteness failed

    int components() const { return static_cast<int>(values.rows()); }
    double at_endpoint(int i, double endpoint) const {
        return endpoint == 0.0 ? values(i, 0) : values(i, values.cols() - 1);
    }
};

struct IssGains {
    double C1 = 0.0;
    double C2 = 0.0;
    double gamma = 0.0;
    bool rate_certified = false; // gamma uses the reported-form constant alpha0
};

struct Certificate {
    FProfile f;
    Eigen::VectorXd delta;
    double theta = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
    double ratio = 0.0;
    IssGains gains;
    std::string mode; // "homogeneous" | "inhomogeneous"
};

// Right-hand side of the equality weight system:
//   f_i' = -(2/Lambda_i) ( -M_ii f_i + sum_{k != i} |M_ik| f_i^{3/2} / sqrt(f_k) ).
inline Eigen::VectorXd f_system_rhs(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& M,
                                    const Eigen::VectorXd& f) {
    const int n = static_cast<int>(f.size());
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        double coupling = -M(i, i) * f(i);
        double fi32 = f(i) * std::sqrt(f(i));
        for (int k = 0; k < n; ++k) {
            if (k == i) continue;
            coupling += std::abs(M(i, k)) * fi32 / std::sqrt(f(k));
        }
        d(i) = -2.0 * coupling / lambda(i);
    }
    return d;
}

// Integrates the equality system left-to-right from x = 0 with all components
// anchored at the given initial values. Blow-up (overflow past 1e12 or loss of
// positivity below 1e-12) stops the integration and is recorded.
inline FProfile integrate_f_system(const SystemSpec& sys, const Eigen::VectorXd& init,
                                   const SpatialGrid& grid, double max_step = 1e-3) {
    const int n = sys.n;
    if (init.size() != n) throw DimensionMismatch("init must have n entries");
    for (int i = 0; i < n; ++i)
        if (!(init(i) > 0.0)) throw NonPositiveInit("initial weights must be positive");

    FProfile prof;
    prof.grid = grid;
    prof.values.resize(n, grid.count());
    prof.values.col(0) = init;

    auto rhs = [&](double x, const Eigen::VectorXd& f) {
        return f_system_rhs(sys.lambda_at(x), sys.source_jacobian_at(x), f);
    };
    auto valid = [](const Eigen::VectorXd& f) {
        return f.minCoeff() > kPositivityFloor && f.maxCoeff() < kOverflowCap;
    };

    Eigen::VectorXd f = init;
    double x = 0.0;
    for (int j = 1; j < grid.count(); ++j) {
        double target = grid.points[static_cast<size_t>(j)];
        double h = std::min(max_step, target - x);
        BlowUpResult r = integrate_until_blowup(rhs, x, f, target, h, valid);
        if (r.blew_up) {
            prof.blow_up = r.x_end;
            prof.values.conservativeResize(n, j);
            return prof;
        }
        x = r.x_end;
        f = r.y_end;
        prof.values.col(j) = f;
    }
    return prof;
}

namespace detail {

// Columns of finite differences of a sampled profile: centered O(h^2) in the
// interior, second-order one-sided at the endpoints.
inline Eigen::MatrixXd fd_derivative(const Eigen::MatrixXd& v, double h) {
    const int n = static_cast<int>(v.rows());
    const int c = static_cast<int>(v.cols());
    Eigen::MatrixXd d(n, c);
    for (int i = 0; i < n; ++i) {
        d(i, 0) = (-3.0 * v(i, 0) + 4.0 * v(i, 1) - v(i, 2)) / (2.0 * h);
        for (int j = 1; j < c - 1; ++j) d(i, j) = (v(i, j + 1) - v(i, j - 1)) / (2.0 * h);
        d(i, c - 1) = (3.0 * v(i, c - 1) - 4.0 * v(i, c - 2) + v(i, c - 3)) / (2.0 * h);
    }
    return d;
}

// Bound on the finite-difference truncation error, h^2 |f'''| / 3 with f'''
// estimated from third differences. Equality solutions of the interior system
// must pass the check despite this discretization error.
inline double fd_error_allowance(const Eigen::MatrixXd& v, double h, double lambda_max) {
    double third = 0.0;
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j + 3 < v.cols(); ++j)
            third = std::max(third, std::abs(v(i, j + 3) - 3.0 * v(i, j + 2) +
                                             3.0 * v(i, j + 1) - v(i, j)));
    return 2.0 * lambda_max * third / (3.0 * h);
}

} // namespace detail

// Interior inequality: Lambda_i f_i' <= -2(-M_ii f_i + sum |M_ik| f_i^{3/2}/sqrt(f_k))
// at every grid point; margin is the worst slack RHS - LHS.
inline ConditionReport check_interior(const SystemSpec& sys, const FProfile& f) {
    if (f.blow_up) throw BlowUpPresent("profile blew up before x = L");
    const int n = f.components();
    const int c = static_cast<int>(f.values.cols());
    const double h = f.grid.spacing();
    Eigen::MatrixXd fp = detail::fd_derivative(f.values, h);

    ConditionReport rep;
    rep.margin = kInf;
    double lambda_max = 0.0;
    for (int j = 0; j < c; ++j) {
        double x = f.grid.points[static_cast<size_t>(j)];
        Eigen::VectorXd lam = sys.lambda_at(x);
        lambda_max = std::max(lambda_max, lam.cwiseAbs().maxCoeff());
        Eigen::MatrixXd M = sys.source_jacobian_at(x);
        Eigen::VectorXd rhs_target = f_system_rhs(lam, M, f.values.col(j));
        for (int i = 0; i < n; ++i) {
            double lhs = lam(i) * fp(i, j);
            double rhs = lam(i) * rhs_target(i); // equals -2(...) by construction
            double slack = rhs - lhs;
            if (slack < rep.margin) {
                rep.margin = slack;
                rep.worst_location =
                    "component " + std::to_string(i + 1) + " at x=" + std::to_string(x);
            }
        }
    }
    double tol = 1e-9 + detail::fd_error_allowance(f.values, h, lambda_max);
    rep.holds = rep.margin > -tol;
    return rep;
}

// Boundary reflection norm: each reflected (incoming) wave, weighted by
// sqrt(f_i) at its entry point, must contract relative to the outgoing
// weights sqrt(f_k) at their exit points:
//   theta := max_i sqrt(f_i(L - l_i)) * sum_k |J_ik| / sqrt(f_k(l_k)) < 1.
inline ConditionReport check_boundary(const FProfile& f, const Eigen::MatrixXd& J,
                                      const Orientation& orientation) {
    const int n = f.components();
    const double L = f.grid.length();
    double theta = 0.0;
    for (int i = 0; i < n; ++i) {
        double w_in = std::sqrt(f.at_endpoint(i, L - orientation.l(i)));
        double row = 0.0;
        for (int k = 0; k < n; ++k)
            row += std::abs(J(i, k)) / std::sqrt(f.at_endpoint(k, orientation.l(k)));
        theta = std::max(theta, w_in * row);
    }
    ConditionReport rep;
    rep.margin = 1.0 - theta;
    rep.holds = rep.margin > 0.0;
    rep.worst_location = "theta=" + std::to_string(theta);
    return rep;
}

inline double boundary_ratio(const FProfile& f, const Eigen::VectorXd& delta,
                             const Orientation& orientation) {
    const int n = f.components();
    double lo = kInf, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        double d2 = delta(i) * delta(i);
        lo = std::min(lo, f.at_endpoint(i, orientation.l(i)) / d2);
        hi = std::max(hi, f.at_endpoint(i, f.grid.length() - orientation.l(i)) / d2);
    }
    return lo / hi;
}

// Outgoing weights sqrt(f_i(l_i)); stored with the certificate so the
// boundary contraction can be re-checked from the weight profile alone.
inline Eigen::VectorXd outgoing_weights(const FProfile& f, const Orientation& orientation) {
    Eigen::VectorXd delta(f.components());
    for (int i = 0; i < f.components(); ++i)
        delta(i) = std::sqrt(f.at_endpoint(i, orientation.l(i)));
    return delta;
}

inline IssGains compute_gains(const SystemSpec& sys, const FProfile& f,
                              const Eigen::VectorXd& delta, double theta, double alpha,
                              double mu, double alpha0 = 1.0) {
    (void)delta;
    (void)theta;
    if (!(mu > 0.0)) throw NonPositiveMu("mu must be positive");
    Orientation o = Orientation::from(sys);
    double w_min = kInf, w_max = 0.0;
    double lam_min = kInf, lam_max = 0.0;
    for (int j = 0; j < f.grid.count(); ++j) {
        double x = f.grid.points[static_cast<size_t>(j)];
        Eigen::VectorXd lam = sys.lambda_at(x).cwiseAbs();
        lam_min = std::min(lam_min, lam.minCoeff());
        lam_max = std::max(lam_max, lam.maxCoeff());
        for (int i = 0; i < sys.n; ++i) {
            double w = std::sqrt(f.values(i, j)) * std::exp(-mu * o.s(i) * x);
            w_min = std::min(w_min, w);
            w_max = std::max(w_max, w);
        }
    }
    double c_min = w_min * std::min(1.0, lam_min);
    double c_max = w_max * std::max(1.0, lam_max);
    double boundary_weight = 0.0;
    for (int i = 0; i < sys.n; ++i) {
        double endpoint = sys.L - o.l(i);
        boundary_weight = std::max(boundary_weight, std::sqrt(f.at_endpoint(i, endpoint)) *
                                                        std::exp(mu * endpoint));
    }
    IssGains g;
    g.C1 = c_max / c_min;
    g.C2 = (1.0 / c_min) * (1.0 + 1.0 / alpha) * boundary_weight;
    g.gamma = mu * alpha0 / 4.0;
    g.rate_certified = false;
    return g;
}

struct CertifyOptions {
    double mu = 0.0;             // 0 -> default 0.05 / L
    int grid_points = 257;
    std::vector<double> init_sweep = {1e-2, 1e-1, 1.0, 10.0, 1e2};
    double alpha0 = 1.0;
    double max_step = 1e-3;
};

struct CertifyResult {
    std::optional<Certificate> certificate;
    ConditionReport interior;
    ConditionReport boundary;
    std::string reason;

    bool success() const { return certificate.has_value(); }
};

namespace detail {

inline bool is_homogeneous(const SystemSpec& sys, const SpatialGrid& grid) {
    for (double x : grid.points)
        if (sys.source_jacobian_at(x).cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
}

inline double pick_alpha(double theta) {
    if (theta <= 0.0) return 1e6; // no reflection: (1 + 1/alpha) -> 1
    return 0.5 * (1.0 / theta - 1.0);
}

// Enumerates the cartesian product of sweep values over n components.
inline bool next_combo(std::vector<size_t>& idx, size_t base) {
    for (size_t d = 0; d < idx.size(); ++d) {
        if (++idx[d] < base) return true;
        idx[d] = 0;
    }
    return false;
}

} // namespace detail

inline CertifyResult certify(const SystemSpec& sys, CertifyOptions opt = {}) {
    CertifyResult out;
    double mu = opt.mu > 0.0 ? opt.mu : 0.05 / sys.L;
    SpatialGrid grid = SpatialGrid::uniform(sys.L, opt.grid_points);
    Orientation orient = Orientation::from(sys);

    if (detail::is_homogeneous(sys, grid)) {
        ScalingResult rho = rho_inf(sys.boundary_jacobian);
        if (rho.value >= 1.0) {
            out.reason = "rho_inf(G'(0)) = " + std::to_string(rho.value) + " >= 1";
            out.boundary.margin = 1.0 - rho.value;
            return out;
        }
        Certificate cert;
        cert.mode = "homogeneous";
        cert.delta = rho.delta;
        cert.theta = scaled_inf_norm(sys.boundary_jacobian, rho.delta);
        cert.ratio = 1.0;
        cert.mu = mu;
        cert.f.grid = grid;
        cert.f.values.resize(sys.n, grid.count());
        for (int i = 0; i < sys.n; ++i)
            cert.f.values.row(i).setConstant(rho.delta(i) * rho.delta(i));
        cert.alpha = detail::pick_alpha(cert.theta);
        cert.gains = compute_gains(sys, cert.f, cert.delta, cert.theta, cert.alpha, mu,
                                   opt.alpha0);
        out.certificate = std::move(cert);
        out.interior = {true, 0.0, "homogeneous"};
        out.boundary = {true, 1.0 - out.certificate->theta, "homogeneous"};
        return out;
    }

    // Inhomogeneous: sweep anchored initial weights over a log grid, keep the
    // best boundary margin among interior-passing profiles.
    out.interior.margin = -kInf;
    out.boundary.margin = -kInf;
    std::vector<size_t> idx(static_cast<size_t>(sys.n), 0);
    bool more = true;
    double best_margin = -kInf;
    std::optional<Certificate> best;
    std::set<std::string> seen; // certificates are scale-invariant in f
    while (more) {
        Eigen::VectorXd init(sys.n);
        for (int i = 0; i < sys.n; ++i)
            init(i) = opt.init_sweep[idx[static_cast<size_t>(i)]];
        more = detail::next_combo(idx, opt.init_sweep.size());

        std::string key;
        for (int i = 0; i < sys.n; ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.12g,", init(i) / init(0));
            key += buf;
        }
        if (!seen.insert(key).second) continue;

        FProfile f = integrate_f_system(sys, init, grid, opt.max_step);
        if (f.blow_up) continue;
        ConditionReport interior = check_interior(sys, f);
        if (interior.margin > out.interior.margin) out.interior = interior;
        if (!interior.holds) continue;
        ConditionReport boundary = check_boundary(f, sys.boundary_jacobian, orient);
        if (boundary.margin > out.boundary.margin) out.boundary = boundary;
        if (!boundary.holds || boundary.margin <= best_margin) continue;

        best_margin = boundary.margin;
        Certificate cert;
        cert.mode = "inhomogeneous";
        cert.delta = outgoing_weights(f, orient);
        cert.theta = 1.0 - boundary.margin;
        cert.ratio = boundary_ratio(f, cert.delta, orient);
        cert.f = std::move(f);
        cert.mu = mu;
        cert.alpha = detail::pick_alpha(cert.theta);
        cert.gains =
            compute_gains(sys, cert.f, cert.delta, cert.theta, cert.alpha, mu, opt.alpha0);
        best = std::move(cert);
    }
    if (best) {
        out.certificate = std::move(best);
    } else if (out.interior.margin == -kInf) {
        out.reason = "all swept weight profiles blew up before x = L";
    } else if (out.boundary.margin == -kInf) {
        out.reason = "interior inequality failed for every swept profile";
    } else {
        out.reason = "boundary inequality failed for every surviving profile";
    }
    return out;
}

// Maximal-ISS-length estimate: integrates the equality system rightward with
// f_i(0) = C for positive speeds and a small positive floor eps0 = eps0_factor*C
// replacing the zero initial value for negative speeds; returns the largest x
// reached before blow-up, capped at cap.
inline double max_iss_length(const SystemSpec& sys, double C, double step = 1e-4,
                             double cap = 50.0, double eps0_factor = 1e-8) {
    if (!(C > 0.0)) throw NonPositiveInit("C must be positive");
    Eigen::VectorXd init(sys.n);
    for (int i = 0; i < sys.n; ++i) init(i) = i < sys.m ? C : eps0_factor * C;
    auto rhs = [&](double x, const Eigen::VectorXd& f) {
        return f_system_rhs(sys.lambda_at(x), sys.source_jacobian_at(x), f);
    };
    auto valid = [](const Eigen::VectorXd& f) {
        return f.minCoeff() > kPositivityFloor && f.maxCoeff() < kOverflowCap;
    };
    BlowUpResult r = integrate_until_blowup(rhs, 0.0, init, cap, step, valid);
    return r.x_end;
}

} // namespace hypiss

#endif
