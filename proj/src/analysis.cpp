#include "eitstore/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eitstore {

namespace {
double trapezoid(const std::vector<double>& t, const std::vector<double>& y,
                 const TimeWindow& window) {
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (t[i] < window.begin || t[i + 1] > window.end) continue;
        area += 0.5 * (y[i] + y[i + 1]) * (t[i + 1] - t[i]);
    }
    return area;
}
}  // namespace

double storage_efficiency(const SimulationResult& result) {
    const TimeWindow full{result.time.front(), result.time.back()};
    const double reference = energy_in_window(result.time, result.reference_out, full);
    if (reference <= 0.0) throw std::invalid_argument("storage_efficiency: zero reference energy");
    return energy_in_window(result.time, result.probe_out, result.retrieved_window) / reference;
}

double storage_efficiency(const std::vector<double>& time,
                          const std::vector<double>& probe_intensity,
                          const TimeWindow& retrieved_window,
                          const std::vector<double>& ref_time,
                          const std::vector<double>& ref_intensity) {
    const TimeWindow full{ref_time.front(), ref_time.back()};
    const double reference = trapezoid(ref_time, ref_intensity, full);
    if (reference <= 0.0) throw std::invalid_argument("storage_efficiency: zero reference energy");
    return trapezoid(time, probe_intensity, retrieved_window) / reference;
}

double leak_level(const SimulationResult& result) {
    const TimeWindow full{result.time.front(), result.time.back()};
    const double input = energy_in_window(result.time, result.reference_out, full);
    if (input <= 0.0) throw std::invalid_argument("leak_level: zero input energy");
    return energy_in_window(result.time, result.probe_out, result.leak_window) / input;
}

ExponentialFit fit_exponential_decay(const std::vector<EfficiencyPoint>& points) {
    if (points.size() < 3) throw FitError("fit_exponential_decay: need >= 3 points");
    for (const auto& pt : points)
        if (!(pt.efficiency > 0.0))
            throw FitError("fit_exponential_decay: efficiencies must be > 0");

    const std::size_t n = points.size();
    // Log-linear initial guess: ln eff = ln A - k tau.
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (const auto& pt : points) {
        const double l = std::log(pt.efficiency);
        st += pt.storage_time;
        sl += l;
        stt += pt.storage_time * pt.storage_time;
        stl += pt.storage_time * l;
    }
    const double det = n * stt - st * st;
    if (det == 0.0) throw FitError("fit_exponential_decay: storage times must be distinct");
    double k = -(n * stl - st * sl) / det;
    double log_a = (sl * stt - st * stl) / det;
    double a = std::exp(log_a);

    // Levenberg-Marquardt on (A, k) with plain least squares in linear
    // efficiency (a log fit would over-weight low, noisy points).
    auto chi2 = [&](double a_, double k_) {
        double s = 0.0;
        for (const auto& pt : points) {
            const double r = pt.efficiency - a_ * std::exp(-k_ * pt.storage_time);
            s += r * r;
        }
        return s;
    };
    double eff_scale2 = 0.0;
    for (const auto& pt : points) eff_scale2 += pt.efficiency * pt.efficiency;
    double lambda = 1e-3;
    double cost = chi2(a, k);
    bool converged = cost <= 1e-24 * eff_scale2;  // log-linear init already exact
    for (int iter = 0; iter < 200 && !converged; ++iter) {
        double jaa = 0, jak = 0, jkk = 0, ga = 0, gk = 0;
        for (const auto& pt : points) {
            const double e = std::exp(-k * pt.storage_time);
            const double r = pt.efficiency - a * e;
            const double da = e;
            const double dk = -a * pt.storage_time * e;
            jaa += da * da;
            jak += da * dk;
            jkk += dk * dk;
            ga += da * r;
            gk += dk * r;
        }
        const double d = (jaa * (1 + lambda)) * (jkk * (1 + lambda)) - jak * jak;
        if (d == 0.0) break;
        const double step_a = (ga * jkk * (1 + lambda) - gk * jak) / d;
        const double step_k = (gk * jaa * (1 + lambda) - ga * jak) / d;
        const double cost_new = chi2(a + step_a, k + step_k);
        if (cost_new < cost) {
            a += step_a;
            k += step_k;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (cost - cost_new < 1e-14 * (cost + 1e-24 * eff_scale2)) converged = true;
            cost = cost_new;
        } else {
            lambda *= 10.0;
            // Residual can no longer be reduced: converged at a (possibly
            // perfect) minimum rather than failed, as long as the remaining
            // cost is not dominated by a bad model far from the data.
            if (lambda > 1e12) {
                converged = cost <= eff_scale2;
                break;
            }
        }
    }
    if (!converged)
        throw FitError("fit_exponential_decay: no convergence after bounded iterations");

    ExponentialFit fit;
    fit.amplitude = a;
    fit.rms_residual = std::sqrt(cost / n);
    const double tau_span = std::max_element(points.begin(), points.end(),
                                             [](auto& x, auto& y) {
                                                 return x.storage_time < y.storage_time;
                                             })->storage_time;
    if (k <= 0.0 || k * tau_span < 1e-9) {
        fit.decaying = false;
        fit.decay_time = std::numeric_limits<double>::infinity();
    } else {
        fit.decay_time = 1.0 / k;
    }
    return fit;
}

std::vector<std::pair<double, double>> phase_vs_detuning_curve(
    double gamma_raman, double gamma_opt, std::complex<double> rabi_coupling,
    const std::vector<double>& detunings) {
    std::vector<std::pair<double, double>> curve;
    curve.reserve(detunings.size());
    const double denom = std::norm(rabi_coupling) + gamma_raman * gamma_opt;
    for (double d : detunings)
        curve.emplace_back(d, std::abs(std::atan(gamma_raman * d / denom)));
    return curve;
}

}  // namespace eitstore
