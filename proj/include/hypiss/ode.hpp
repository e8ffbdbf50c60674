#ifndef HYPISS_ODE_HPP
#define HYPISS_ODE_HPP

// Fixed-step RK4 with blow-up detection, plus a step-halving variant that
// localizes the escape point of solutions with finite-time blow-up.

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace hypiss {

constexpr double kOverflowCap = 1e12;
constexpr double kPositivityFloor = 1e-12;

inline bool rk4_step(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                     double x, double h, const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    Eigen::VectorXd k1 = f(x, y);
    Eigen::VectorXd k2 = f(x + 0.5 * h, y + 0.5 * h * k1);
    Eigen::VectorXd k3 = f(x + 0.5 * h, y + 0.5 * h * k2);
    Eigen::VectorXd k4 = f(x + h, y + h * k3);
    out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return out.allFinite();
}

struct BlowUpResult {
    double x_end = 0.0;       // last abscissa with a valid state
    Eigen::VectorXd y_end;
    bool blew_up = false;
};

// Integrates y' = f(x, y) from (x0, y0) until x_max or until the state leaves
// the admissible window given by `valid`. Near the escape the step is halved
// down to h_min so the reported x_end brackets the blow-up tightly.
inline BlowUpResult
integrate_until_blowup(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                       double x0, const Eigen::VectorXd& y0, double x_max, double h,
                       const std::function<bool(const Eigen::VectorXd&)>& valid,
                       double h_min = 1e-12) {
    BlowUpResult res;
    res.x_end = x0;
    res.y_end = y0;
    double x = x0;
    Eigen::VectorXd y = y0;
    double step = h;
    while (x < x_max) {
        double hh = std::min(step, x_max - x);
        Eigen::VectorXd next;
        bool finite = rk4_step(f, x, hh, y, next);
        if (finite && valid(next)) {
            x += hh;
            y = next;
            res.x_end = x;
            res.y_end = y;
            continue;
        }
        if (hh <= h_min) {
            res.blew_up = true;
            return res;
        }
        step = hh * 0.5;
    }
    return res;
}

} // namespace hypiss

#endif
