#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace eitstore {

struct StepSizeUnderflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double dt_max = 0.0;  // required, > 0
    double dt_initial = 0.0;  // 0 -> dt_max / 100
};

// Dormand-Prince 5(4) with standard coefficients. State must support
// Eigen-style arithmetic and .cwiseAbs().maxCoeff(). Observer is called as
// obs(t, y) at t_begin and after every accepted step. forced_times must be
// sorted; steps are clipped so those instants are hit exactly.
template <class State, class Rhs, class Observer>
void integrate_dopri5(Rhs&& f, State y, double t_begin, double t_end,
                      const OdeOptions& opt, Observer&& obs,
                      std::span<const double> forced_times = {}) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    if (!(opt.dt_max > 0.0)) throw std::invalid_argument("integrate_dopri5: dt_max must be > 0");
    if (!(t_end >= t_begin)) throw std::invalid_argument("integrate_dopri5: t_span must be ordered");

    const double dt_min = 1e-6 * opt.dt_max;
    double t = t_begin;
    double dt = opt.dt_initial > 0.0 ? opt.dt_initial : opt.dt_max / 100.0;
    dt = std::min(dt, opt.dt_max);

    std::size_t next_forced = 0;
    while (next_forced < forced_times.size() && forced_times[next_forced] <= t_begin)
        ++next_forced;

    obs(t, y);
    State k1 = f(t, y);  // FSAL
    while (t < t_end) {
        double dt_cap = t_end - t;
        if (next_forced < forced_times.size())
            dt_cap = std::min(dt_cap, forced_times[next_forced] - t);
        const double h = std::min(dt, dt_cap);

        State k2 = f(t + c2 * h, State(y + h * (a21 * k1)));
        State k3 = f(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
        State k4 = f(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        State k5 = f(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        State k6 = f(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        State k7 = f(t + h, y_new);
        State err_state = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale =
            opt.atol + opt.rtol * std::max(y.cwiseAbs().maxCoeff(), y_new.cwiseAbs().maxCoeff());
        const double err = err_state.cwiseAbs().maxCoeff() / scale;

        if (err <= 1.0) {
            t += h;
            y = std::move(y_new);
            k1 = std::move(k7);
            if (next_forced < forced_times.size() &&
                t >= forced_times[next_forced] - 1e-14 * std::abs(t))
                ++next_forced;
            obs(t, y);
        }
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        dt = h * std::clamp(grow, 0.2, 5.0);
        dt = std::min(dt, opt.dt_max);
        if (dt < dt_min)
            throw StepSizeUnderflowError(
                "integrate_dopri5: step size fell below 1e-6 * dt_max (stiffness "
                "misconfiguration)");
    }
}

}  // namespace eitstore
