#ifndef HYPISS_MODEL_HPP
#define HYPISS_MODEL_HPP

// Hyperbolic system specification: n components with x-dependent speeds
// Lambda_i(x), source Jacobian M(x) at the origin, boundary reflection
// Jacobian J, and optional nonlinear closures used only by the simulator.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypiss/errors.hpp"
#include "hypiss/expr.hpp"

namespace hypiss {

struct SpatialGrid {
    std::vector<double> points;

    static SpatialGrid uniform(double L, int count) {
        if (count < 2) throw DimensionMismatch("grid needs at least 2 points");
        SpatialGrid g;
        g.points.resize(static_cast<size_t>(count));
        for (int j = 0; j < count; ++j)
            g.points[static_cast<size_t>(j)] = L * static_cast<double>(j) / (count - 1);
        g.points.back() = L;
        return g;
    }

    int count() const { return static_cast<int>(points.size()); }
    double length() const { return points.back(); }
    double spacing() const { return points[1] - points[0]; }
};

// Optional nonlinear closures; the simulator rejects anything but diagonal
// quasilinear A, so A is represented by its diagonal.
struct NonlinearClosures {
    // a_diag(u, x) -> n speeds; present only when A genuinely depends on u.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> a_diag;
    // b(u, x) -> n source values; B(0, x) must vanish.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> b;
    // g(outgoing) -> n incoming boundary values; G(0) = 0.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g;
};

struct SystemSpec {
    int n = 0;
    int m = 0;
    double L = 1.0;
    std::vector<Coefficient> lambda;                  // n functions of x
    std::vector<std::vector<Coefficient>> source_jacobian; // n x n functions of x
    Eigen::MatrixXd boundary_jacobian;                // J = G'(0)
    std::optional<NonlinearClosures> nonlinear;

    Eigen::VectorXd lambda_at(double x) const {
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) out(i) = lambda[static_cast<size_t>(i)](x);
        return out;
    }
    Eigen::MatrixXd source_jacobian_at(double x) const {
        Eigen::MatrixXd out(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) = source_jacobian[static_cast<size_t>(i)][static_cast<size_t>(j)](x);
        return out;
    }
};

struct Orientation {
    Eigen::VectorXd s; // +1 for positive-speed components, -1 otherwise
    Eigen::VectorXd l; // reflection endpoint l_i: L for positive speeds, 0 otherwise

    static Orientation from(const SystemSpec& sys) {
        Orientation o;
        o.s.resize(sys.n);
        o.l.resize(sys.n);
        for (int i = 0; i < sys.n; ++i) {
            bool positive = i < sys.m;
            o.s(i) = positive ? 1.0 : -1.0;
            o.l(i) = positive ? sys.L : 0.0;
        }
        return o;
    }
};

// Validates a SystemSpec on a sampled grid: speed signs, no speed collisions,
// finite source entries, and consistency of the nonlinear closures at u = 0.
inline SystemSpec build_system(SystemSpec raw, int check_points = 256) {
    if (raw.n <= 0) throw DimensionMismatch("n must be positive");
    if (raw.m < 0 || raw.m > raw.n) throw DimensionMismatch("m must lie in [0, n]");
    if (raw.L <= 0) throw DimensionMismatch("L must be positive");
    if (static_cast<int>(raw.lambda.size()) != raw.n)
        throw DimensionMismatch("lambda must have n entries");
    if (static_cast<int>(raw.source_jacobian.size()) != raw.n)
        throw DimensionMismatch("source_jacobian must be n x n");
    for (const auto& row : raw.source_jacobian)
        if (static_cast<int>(row.size()) != raw.n)
            throw DimensionMismatch("source_jacobian must be n x n");
    if (raw.boundary_jacobian.rows() != raw.n || raw.boundary_jacobian.cols() != raw.n)
        throw DimensionMismatch("boundary_jacobian must be n x n");

    SpatialGrid grid = SpatialGrid::uniform(raw.L, check_points);
    for (double x : grid.points) {
        Eigen::VectorXd lam = raw.lambda_at(x);
        for (int i = 0; i < raw.n; ++i) {
            if (!std::isfinite(lam(i)))
                throw EvaluationFailure("lambda_" + std::to_string(i + 1) +
                                        " non-finite at x=" + std::to_string(x));
            bool want_positive = i < raw.m;
            if ((want_positive && lam(i) <= 0.0) || (!want_positive && lam(i) >= 0.0))
                throw SpeedSignViolation("lambda_" + std::to_string(i + 1) +
                                         " has wrong sign at x=" + std::to_string(x));
        }
        for (int i = 0; i < raw.n; ++i)
            for (int j = i + 1; j < raw.n; ++j)
                if (lam(i) == lam(j))
                    throw SpeedCollision("lambda_" + std::to_string(i + 1) + " = lambda_" +
                                         std::to_string(j + 1) + " at x=" + std::to_string(x));
        Eigen::MatrixXd M = raw.source_jacobian_at(x);
        if (!M.allFinite())
            throw EvaluationFailure("source_jacobian non-finite at x=" + std::to_string(x));
        if (raw.nonlinear) {
            Eigen::VectorXd zero = Eigen::VectorXd::Zero(raw.n);
            const double tol = 1e-9;
            if (raw.nonlinear->a_diag) {
                Eigen::VectorXd a0 = raw.nonlinear->a_diag(zero, x);
                if ((a0 - lam).lpNorm<Eigen::Infinity>() > tol)
                    throw EvaluationFailure("A(0,x) does not match diag(Lambda(x)) at x=" +
                                            std::to_string(x));
            }
            if (raw.nonlinear->b) {
                Eigen::VectorXd b0 = raw.nonlinear->b(zero, x);
                if (b0.lpNorm<Eigen::Infinity>() > tol)
                    throw EvaluationFailure("B(0,x) != 0 at x=" + std::to_string(x));
            }
        }
    }
    return raw;
}

struct CoefficientTables {
    Eigen::MatrixXd lambda;              // n x grid.count()
    std::vector<Eigen::MatrixXd> source; // grid.count() matrices, each n x n
};

inline CoefficientTables sample_coefficients(const SystemSpec& sys, const SpatialGrid& grid) {
    CoefficientTables t;
    t.lambda.resize(sys.n, grid.count());
    t.source.reserve(static_cast<size_t>(grid.count()));
    for (int j = 0; j < grid.count(); ++j) {
        double x = grid.points[static_cast<size_t>(j)];
        Eigen::VectorXd lam = sys.lambda_at(x);
        Eigen::MatrixXd M = sys.source_jacobian_at(x);
        if (!lam.allFinite() || !M.allFinite())
            throw EvaluationFailure("coefficient non-finite at x=" + std::to_string(x));
        t.lambda.col(j) = lam;
        t.source.push_back(std::move(M));
    }
    return t;
}

} // namespace hypiss

#endif
