#ifndef HYPISS_SCALING_HPP
#define HYPISS_SCALING_HPP

// Diagonal-scaling matrix functionals rho_inf and rho_2: the infimum over
// positive diagonals Delta of the operator norm of Delta*K*Delta^{-1}.
//
// For the infinity norm the infimum equals the Perron root of |K|: the norm
// depends on K only through |K|, and for irreducible |K| the Perron
// eigenvector v gives the minimizer Delta = diag(1/v). When |K| is reducible
// the infimum may not be attained; the value is still the Perron root and is
// reported with converged = false.

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hypiss/errors.hpp"
#include "hypiss/optimize.hpp"

namespace hypiss {

struct ScalingResult {
    double value = 0.0;
    Eigen::VectorXd delta;
    int iterations = 0;
    bool converged = false;
};

// Operator infinity norm of Delta*K*Delta^{-1}: max over rows i of
// sum_j |K_ij| * delta_i / delta_j.
inline double scaled_inf_norm(const Eigen::MatrixXd& K, const Eigen::VectorXd& delta) {
    const int n = static_cast<int>(K.rows());
    if (delta.size() != n) throw DimensionMismatch("delta size mismatch");
    for (int i = 0; i < n; ++i)
        if (!(delta(i) > 0.0)) throw NonPositiveDelta("delta entries must be positive");
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(K(i, j)) * delta(i) / delta(j);
        worst = std::max(worst, row);
    }
    return worst;
}

inline double spectral_norm(const Eigen::MatrixXd& K) {
    return K.jacobiSvd().singularValues()(0);
}

inline double scaled_two_norm(const Eigen::MatrixXd& K, const Eigen::VectorXd& delta) {
    const int n = static_cast<int>(K.rows());
    for (int i = 0; i < n; ++i)
        if (!(delta(i) > 0.0)) throw NonPositiveDelta("delta entries must be positive");
    Eigen::MatrixXd scaled = K;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) scaled(i, j) *= delta(i) / delta(j);
    return spectral_norm(scaled);
}

// Perron root of |K| by shifted power iteration (|K| + I keeps the dominant
// eigenvalue simple-signed and the iteration monotone on nonnegative vectors).
inline ScalingResult rho_inf(const Eigen::MatrixXd& K) {
    const int n = static_cast<int>(K.rows());
    Eigen::MatrixXd absK = K.cwiseAbs();
    Eigen::MatrixXd shifted = absK + Eigen::MatrixXd::Identity(n, n);

    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    double lam = 1.0;
    int it = 0;
    const int max_it = 200000;
    const double residual_tol = 1e-12;
    for (; it < max_it; ++it) {
        Eigen::VectorXd w = shifted * v;
        lam = w.maxCoeff();
        if (lam <= 0.0) break;
        w /= lam;
        double residual = (w - v).lpNorm<Eigen::Infinity>();
        v = w;
        if (residual <= residual_tol) break;
    }

    ScalingResult res;
    res.value = std::max(0.0, lam - 1.0);
    res.iterations = it;
    // Delta = 1/v with tiny components clamped; attainment is judged by
    // whether this delta actually achieves the value.
    double vmax = v.maxCoeff();
    Eigen::VectorXd delta(n);
    const double clamp = 1e-14;
    for (int i = 0; i < n; ++i) delta(i) = 1.0 / std::max(v(i), clamp * vmax);
    res.delta = delta / delta.minCoeff();
    res.converged = std::abs(scaled_inf_norm(K, res.delta) - res.value) <= 1e-6 * (1.0 + res.value);
    return res;
}

// Upper bound on the diagonal-scaling infimum of the spectral norm, by
// multi-start Nelder-Mead in log(delta) with delta_1 fixed to 1.
inline ScalingResult rho_two(const Eigen::MatrixXd& K, int starts = 16, int max_evals = 10000,
                             std::uint64_t seed = 42) {
    const int n = static_cast<int>(K.rows());
    ScalingResult res;
    if (n == 1) {
        res.value = std::abs(K(0, 0));
        res.delta = Eigen::VectorXd::Ones(1);
        res.converged = true;
        return res;
    }
    auto to_delta = [n](const Eigen::VectorXd& logd) {
        Eigen::VectorXd d(n);
        d(0) = 1.0;
        for (int i = 1; i < n; ++i) d(i) = std::exp(logd(i - 1));
        return d;
    };
    auto objective = [&](const Eigen::VectorXd& logd) {
        return scaled_two_norm(K, to_delta(logd));
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.5);
    Eigen::VectorXd best_logd = Eigen::VectorXd::Zero(n - 1);
    double best = objective(best_logd);
    int evals = 1;
    const int per_start = std::max(50, max_evals / std::max(1, starts));

    // Seed from the rho_inf minimizer and from unit scaling, then random.
    std::vector<Eigen::VectorXd> seeds;
    seeds.push_back(Eigen::VectorXd::Zero(n - 1));
    ScalingResult inf_res = rho_inf(K);
    {
        Eigen::VectorXd logd(n - 1);
        for (int i = 1; i < n; ++i) logd(i - 1) = std::log(inf_res.delta(i) / inf_res.delta(0));
        seeds.push_back(logd);
    }
    while (static_cast<int>(seeds.size()) < starts) {
        Eigen::VectorXd logd(n - 1);
        for (int i = 0; i < n - 1; ++i) logd(i) = gauss(rng);
        seeds.push_back(logd);
    }
    bool any_converged = false;
    for (const auto& s : seeds) {
        if (evals >= max_evals) break;
        NelderMeadResult r =
            nelder_mead(objective, s, 0.5, std::min(per_start, max_evals - evals), 1e-13);
        evals += r.evaluations;
        any_converged = any_converged || r.converged;
        if (r.value < best) {
            best = r.value;
            best_logd = r.x;
        }
    }
    // Local polish from the best point.
    if (evals < max_evals) {
        NelderMeadResult r = nelder_mead(objective, best_logd, 0.05, max_evals - evals, 1e-14);
        evals += r.evaluations;
        if (r.value < best) {
            best = r.value;
            best_logd = r.x;
        }
    }
    res.value = best;
    res.delta = to_delta(best_logd);
    res.iterations = evals;
    res.converged = any_converged;
    return res;
}

} // namespace hypiss

#endif
