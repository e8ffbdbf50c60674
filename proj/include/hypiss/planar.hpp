#ifndef HYPISS_PLANAR_HPP
#define HYPISS_PLANAR_HPP

// Explicit treatment of 2x2 systems: the scalar Riccati profile eta whose
// survival on [0,1] with eta(1) < 1/|k2| characterizes the certification
// conditions, the Karafyllis-Krstic small-gain criterion, the implication and
// strictness experiments comparing the two, and the majorizing h-ODE with its
// three closed-form branches.

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hypiss/errors.hpp"
#include "hypiss/expr.hpp"
#include "hypiss/ode.hpp"

namespace hypiss {

struct ConditionReport {
    bool holds = false;
    double margin = 0.0;
    std::string worst_location;
};

struct PlanarParams {
    Coefficient a;
    Coefficient b;
    double lambda1 = 1.0;  // > 0
    double lambda2 = -1.0; // < 0
    double k1 = 0.0;
    double k2 = 0.0;

    double c1_at(double x) const { return std::abs(a(x)) / lambda1; }
    double c2_at(double x) const { return std::abs(b(x)) / std::abs(lambda2); }
    bool constant_coefficients() const { return a.is_constant() && b.is_constant(); }
};

struct RiccatiProfile {
    std::vector<double> x;
    std::vector<double> eta;
    double x_end = 0.0;
    bool blew_up = false;

    double eta_at_end() const { return eta.empty() ? 0.0 : eta.back(); }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Blow-up abscissa of eta' = c1 + c2*eta^2, eta(0) = |k1|.
inline double blowup_x1(double c1, double c2, double k1) {
    k1 = std::abs(k1);
    if (c2 <= 0.0) return kInf;                    // linear growth, no escape
    if (c1 <= 0.0) return k1 > 0.0 ? 1.0 / (c2 * k1) : kInf;
    return (M_PI / 2.0 - std::atan(std::sqrt(c2 / c1) * k1)) / std::sqrt(c1 * c2);
}

inline double eta_closed_form(double c1, double c2, double k1, double x) {
    k1 = std::abs(k1);
    if (x >= blowup_x1(c1, c2, k1)) throw BeyondBlowUp("eta evaluated at or past blow-up");
    if (c1 <= 0.0 && c2 <= 0.0) return k1;
    if (c2 <= 0.0) return k1 + c1 * x;
    if (c1 <= 0.0) return k1 / (1.0 - c2 * k1 * x);
    return std::sqrt(c1 / c2) *
           std::tan(std::atan(std::sqrt(c2 / c1) * k1) + std::sqrt(c1 * c2) * x);
}

inline RiccatiProfile eta_numeric(const PlanarParams& p, double x_max, double base_step = 1e-4,
                                  int record_points = 257) {
    RiccatiProfile prof;
    auto rhs = [&](double x, const Eigen::VectorXd& y) {
        Eigen::VectorXd d(1);
        d(0) = p.c1_at(x) + p.c2_at(x) * y(0) * y(0);
        return d;
    };
    auto valid = [](const Eigen::VectorXd& y) { return y(0) < kOverflowCap; };

    Eigen::VectorXd y(1);
    y(0) = std::abs(p.k1);
    double x = 0.0;
    prof.x.push_back(0.0);
    prof.eta.push_back(y(0));
    for (int j = 1; j < record_points; ++j) {
        double target = x_max * static_cast<double>(j) / (record_points - 1);
        BlowUpResult r = integrate_until_blowup(rhs, x, y, target, base_step, valid);
        if (r.blew_up) {
            prof.blew_up = true;
            prof.x_end = r.x_end;
            return prof;
        }
        x = r.x_end;
        y = r.y_end;
        prof.x.push_back(x);
        prof.eta.push_back(y(0));
    }
    prof.x_end = x_max;
    return prof;
}

// Certification conditions for the 2x2 system. Constant coefficients use the
// closed-form chain (interior bound, k1 bound, k2 bound); variable
// coefficients integrate the Riccati profile. margin = 1 - eta(1)*|k2|, or -1
// when eta escapes before x = 1. A zero margin is flagged as the boundary of
// the condition rather than a pass.
inline ConditionReport check_planar(const PlanarParams& p) {
    ConditionReport rep;
    const double k1 = std::abs(p.k1), k2 = std::abs(p.k2);
    double eta1;
    if (p.constant_coefficients()) {
        const double c1 = p.c1_at(0.0), c2 = p.c2_at(0.0);
        double root = std::sqrt(c1 * c2);
        if (M_PI / 2.0 - root < 0.0) {
            rep.margin = -1.0;
            rep.worst_location = "interior condition";
            return rep;
        }
        double x1 = blowup_x1(c1, c2, k1);
        if (x1 <= 1.0) {
            rep.margin = -1.0;
            rep.worst_location = "k1 bound (blow-up before x=1)";
            return rep;
        }
        eta1 = eta_closed_form(c1, c2, k1, 1.0);
    } else {
        RiccatiProfile prof = eta_numeric(p, 1.0);
        if (prof.blew_up) {
            rep.margin = -1.0;
            rep.worst_location = "blow-up at x=" + std::to_string(prof.x_end);
            return rep;
        }
        eta1 = prof.eta_at_end();
    }
    // k2 = 0 means the bound eta(1) < 1/|k2| is vacuous once eta exists.
    rep.margin = 1.0 - eta1 * k2;
    rep.holds = rep.margin > 0.0;
    rep.worst_location = rep.margin == 0.0 ? "boundary of condition" : "k2 bound";
    return rep;
}

// Karafyllis-Krstic small-gain condition with tuning parameter K; the domain
// is normalized to length 1. A and B are computed by grid maximization.
inline bool kk_holds(const PlanarParams& p, double K, int grid_points = 256) {
    if (!(K > 0.0)) throw NonPositiveK("K must be positive");
    double A = 0.0, B = 0.0;
    for (int j = 0; j < grid_points; ++j) {
        double z = static_cast<double>(j) / (grid_points - 1);
        A = std::max(A, std::abs(p.a(z) * std::exp(2.0 * K * z)));
        B = std::max(B, std::abs(p.b(z) * std::exp(-2.0 * K * z)));
    }
    const double k1 = std::abs(p.k1), k2 = std::abs(p.k2);
    bool first = (k1 + k2) * std::exp(-K) < 1.0;
    double lhs2 =
        (std::sqrt((std::exp(2.0 * K) - std::exp(K)) / (std::abs(p.lambda2) * K) * B) +
         std::sqrt(k2)) *
        (std::sqrt((1.0 - std::exp(-K)) / (p.lambda1 * K) * A) + std::sqrt(k1));
    return first && lhs2 < 1.0;
}

inline std::vector<double> default_kk_grid(int points = 64, double k_min = 1e-3,
                                           double k_max = 1e2) {
    std::vector<double> grid(static_cast<size_t>(points));
    for (int j = 0; j < points; ++j)
        grid[static_cast<size_t>(j)] =
            k_min * std::pow(k_max / k_min, static_cast<double>(j) / (points - 1));
    return grid;
}

// First K on the grid satisfying the small-gain condition; "none on grid"
// is not a proof of nonexistence.
inline std::optional<double> kk_exists(const PlanarParams& p,
                                       const std::vector<double>& k_grid = default_kk_grid()) {
    for (double K : k_grid)
        if (kk_holds(p, K)) return K;
    return std::nullopt;
}

// Samples constant-coefficient planar systems and counts violations of the
// implication "small-gain condition holds for some K => check_planar holds".
inline int implication_experiment(std::uint64_t seed, int trials,
                                  const std::vector<double>& k_grid = default_kk_grid()) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.0, 2.0);
    std::uniform_real_distribution<double> speed(0.2, 2.0);
    std::uniform_real_distribution<double> refl(0.0, 1.5);
    int violations = 0;
    for (int t = 0; t < trials; ++t) {
        PlanarParams p;
        p.a = Coefficient(mag(rng));
        p.b = Coefficient(mag(rng));
        p.lambda1 = speed(rng);
        p.lambda2 = -speed(rng);
        p.k1 = refl(rng);
        p.k2 = refl(rng);
        if (kk_exists(p, k_grid) && !check_planar(p).holds) ++violations;
    }
    return violations;
}

// Appendix-E style witness: k2 = 1/eta(1) - eps such that our conditions hold
// while the small-gain condition fails for every K on the grid. Returns
// nothing when no such eps exists (in particular for a = b = 0, where the two
// conditions are equivalent).
inline std::optional<PlanarParams>
strictness_witness(double a, double b, double lambda1, double lambda2, double k1,
                   const std::vector<double>& eps_grid,
                   const std::vector<double>& k_grid = default_kk_grid()) {
    PlanarParams base;
    base.a = Coefficient(a);
    base.b = Coefficient(b);
    base.lambda1 = lambda1;
    base.lambda2 = lambda2;
    base.k1 = k1;
    const double c1 = base.c1_at(0.0), c2 = base.c2_at(0.0);
    if (blowup_x1(c1, c2, k1) <= 1.0) return std::nullopt;
    double eta1 = eta_closed_form(c1, c2, k1, 1.0);
    if (eta1 <= 0.0) return std::nullopt; // a = b = 0 with k1 = 0: no finite threshold
    for (double eps : eps_grid) {
        PlanarParams cand = base;
        cand.k2 = 1.0 / eta1 - eps;
        if (cand.k2 <= 0.0) continue;
        if (check_planar(cand).holds && !kk_exists(cand, k_grid)) return cand;
    }
    return std::nullopt;
}

// Appendix-F h-ODE h' = A1 + B1 h^2 + 2K h, h(0) = 0: closed-form value and
// escape abscissa x5, in the three branches split by sign(A1*B1 - K^2).
inline double x5_escape(double A1, double B1, double K) {
    if (!(K > 0.0)) throw NonPositiveK("K must be positive");
    if (B1 <= 0.0) return kInf; // linear equation
    const double D = A1 * B1 - K * K;
    if (D > 0.0) {
        double w = std::sqrt(D);
        return std::atan(w / K) / w;
    }
    if (D < 0.0) {
        double w = std::sqrt(-D);
        if (w >= K) return kInf; // A1 = 0: h stays at 0
        return std::atanh(w / K) / w;
    }
    return 1.0 / K; // K^2 = A1*B1
}

inline double h_closed_form(double A1, double B1, double K, double x) {
    if (!(K > 0.0)) throw NonPositiveK("K must be positive");
    if (x >= x5_escape(A1, B1, K)) throw BeyondBlowUp("h evaluated at or past escape");
    if (B1 <= 0.0) return (A1 / (2.0 * K)) * (std::exp(2.0 * K * x) - 1.0);
    const double D = A1 * B1 - K * K;
    if (D > 0.0) {
        double w = std::sqrt(D);
        return (w * std::tan(std::atan(K / w) + w * x) - K) / B1;
    }
    if (D < 0.0) {
        double w = std::sqrt(-D);
        return A1 * std::sinh(w * x) / (w * std::cosh(w * x) - K * std::sinh(w * x));
    }
    return A1 * x / (1.0 - K * x);
}

} // namespace hypiss

#endif
