#ifndef HYPISS_TEST_HELPERS_HPP
#define HYPISS_TEST_HELPERS_HPP

#include <vector>

#include <Eigen/Dense>

#include <hypiss/model.hpp>

namespace test {

// Constant-coefficient system with speeds lam, source Jacobian M, boundary
// Jacobian J (all constants), length L.
inline hypiss::SystemSpec make_system(const std::vector<double>& lam,
                                      const Eigen::MatrixXd& M, const Eigen::MatrixXd& J,
                                      double L = 1.0) {
    hypiss::SystemSpec raw;
    raw.n = static_cast<int>(lam.size());
    raw.m = 0;
    for (double l : lam)
        if (l > 0.0) ++raw.m;
    raw.L = L;
    for (double l : lam) raw.lambda.emplace_back(l);
    for (int i = 0; i < raw.n; ++i) {
        std::vector<hypiss::Coefficient> row;
        for (int j = 0; j < raw.n; ++j) row.emplace_back(M(i, j));
        raw.source_jacobian.push_back(std::move(row));
    }
    raw.boundary_jacobian = J;
    return hypiss::build_system(std::move(raw));
}

// The standard 2x2 coupled pair: speeds (lam1, lam2), antisymmetric coupling
// through a and b, boundary reflections k1 (at x=0 from component 2's trace)
// and k2 (at x=L from component 1's trace).
inline hypiss::SystemSpec make_2x2(double a, double b, double lam1, double lam2, double k1,
                                   double k2, double L = 1.0) {
    Eigen::MatrixXd M(2, 2);
    M << 0.0, a, b, 0.0;
    Eigen::MatrixXd J(2, 2);
    J << 0.0, k1, k2, 0.0;
    return make_system({lam1, lam2}, M, J, L);
}

} // namespace test

#endif
