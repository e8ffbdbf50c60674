#ifndef HYPISS_OPTIMIZE_HPP
#define HYPISS_OPTIMIZE_HPP

// Derivative-free minimization (Nelder-Mead) used for the diagonal-scaling
// searches; all searches run in log coordinates so positivity is structural.

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace hypiss {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0, double step = 0.5,
                                    int max_evals = 2000, double tol = 1e-12) {
    const int n = static_cast<int>(x0.size());
    NelderMeadResult res;
    if (n == 0) {
        res.x = x0;
        res.value = f(x0);
        res.evaluations = 1;
        res.converged = true;
        return res;
    }
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(x0);
    vals.push_back(f(x0));
    int evals = 1;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p = x0;
        p(i) += step;
        pts.push_back(p);
        vals.push_back(f(p));
        ++evals;
    }
    std::vector<int> order(pts.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    };
    while (evals < max_evals) {
        sort_simplex();
        int best = order.front(), worst = order.back(), second = order[order.size() - 2];
        if (std::abs(vals[worst] - vals[best]) <= tol * (1.0 + std::abs(vals[best]))) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int idx : order)
            if (idx != worst) centroid += pts[static_cast<size_t>(idx)];
        centroid /= static_cast<double>(n);

        Eigen::VectorXd refl = centroid + (centroid - pts[static_cast<size_t>(worst)]);
        double frefl = f(refl);
        ++evals;
        if (frefl < vals[static_cast<size_t>(best)]) {
            Eigen::VectorXd expa = centroid + 2.0 * (centroid - pts[static_cast<size_t>(worst)]);
            double fexpa = f(expa);
            ++evals;
            if (fexpa < frefl) {
                pts[static_cast<size_t>(worst)] = expa;
                vals[static_cast<size_t>(worst)] = fexpa;
            } else {
                pts[static_cast<size_t>(worst)] = refl;
                vals[static_cast<size_t>(worst)] = frefl;
            }
        } else if (frefl < vals[static_cast<size_t>(second)]) {
            pts[static_cast<size_t>(worst)] = refl;
            vals[static_cast<size_t>(worst)] = frefl;
        } else {
            Eigen::VectorXd contr =
                centroid + 0.5 * (pts[static_cast<size_t>(worst)] - centroid);
            double fcontr = f(contr);
            ++evals;
            if (fcontr < vals[static_cast<size_t>(worst)]) {
                pts[static_cast<size_t>(worst)] = contr;
                vals[static_cast<size_t>(worst)] = fcontr;
            } else {
                // shrink toward best
                for (int idx : order) {
                    if (idx == best) continue;
                    pts[static_cast<size_t>(idx)] =
                        pts[static_cast<size_t>(best)] +
                        0.5 * (pts[static_cast<size_t>(idx)] - pts[static_cast<size_t>(best)]);
                    vals[static_cast<size_t>(idx)] = f(pts[static_cast<size_t>(idx)]);
                    ++evals;
                }
            }
        }
    }
    sort_simplex();
    res.x = pts[static_cast<size_t>(order.front())];
    res.value = vals[static_cast<size_t>(order.front())];
    res.evaluations = evals;
    return res;
}

} // namespace hypiss

#endif
