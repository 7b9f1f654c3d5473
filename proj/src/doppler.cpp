#include "eitstore/doppler.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eitstore {

double VelocityGrid::weight_sum() const {
    double s = 0.0;
    for (const auto& c : classes) s += c.weight;
    return s;
}

VelocityGrid make_grid(double hwhm, int n_classes, double span_sigmas) {
    if (n_classes < 1 || n_classes % 2 == 0)
        throw std::invalid_argument("make_grid: n_classes must be odd and >= 1");
    if (!(span_sigmas > 0.0)) throw std::invalid_argument("make_grid: span_sigmas must be > 0");
    if (hwhm < 0.0) throw std::invalid_argument("make_grid: hwhm must be >= 0");

    VelocityGrid grid;
    grid.hwhm = hwhm;
    if (n_classes == 1 || hwhm == 0.0) {
        grid.classes = {{0.0, 1.0}};
        return grid;
    }

    const double sigma = hwhm / std::sqrt(2.0 * std::log(2.0));
    const double span = span_sigmas * sigma;
    const double dx = 2.0 * span / (n_classes - 1);
    grid.classes.reserve(n_classes);
    double total = 0.0;
    for (int i = 0; i < n_classes; ++i) {
        const double x = -span + i * dx;
        const double trap = (i == 0 || i == n_classes - 1) ? 0.5 : 1.0;
        const double w = trap * std::exp(-0.5 * (x / sigma) * (x / sigma));
        grid.classes.push_back({x, w});
        total += w;
    }
    for (auto& c : grid.classes) c.weight /= total;
    // Enforce exact shift symmetry of the interior grid.
    grid.classes[n_classes / 2].shift = 0.0;
    return grid;
}

std::complex<double> average_response(
    const VelocityGrid& grid, const std::function<std::complex<double>(double)>& response) {
    std::complex<double> acc{0.0, 0.0};
    for (const auto& c : grid.classes) acc += c.weight * response(c.shift);
    return acc;
}

double effective_gamma(const VelocityGrid& grid, std::optional<double> override_rate) {
    if (override_rate) return *override_rate;
    return kEffectiveGammaCalibration * grid.hwhm;
}

VelocityGrid apply_pumped_fraction(const VelocityGrid& grid, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("apply_pumped_fraction: fraction must be in (0, 1]");
    if (fraction == 1.0 || grid.hwhm == 0.0) return grid;

    // Central-quantile cutoff: |shift| <= x* with erf(x*/(sigma sqrt 2)) = fraction.
    const double sigma = grid.hwhm / std::sqrt(2.0 * std::log(2.0));
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::erf(mid / std::sqrt(2.0)) < fraction ? lo : hi) = mid;
    }
    const double cutoff = 0.5 * (lo + hi) * sigma;

    VelocityGrid out;
    out.hwhm = grid.hwhm;
    double total = 0.0;
    for (const auto& c : grid.classes) {
        if (std::abs(c.shift) <= cutoff) {
            out.classes.push_back(c);
            total += c.weight;
        }
    }
    if (out.classes.empty() || total <= 0.0)
        throw std::invalid_argument("apply_pumped_fraction: window removed all classes");
    for (auto& c : out.classes) c.weight /= total;
    return out;
}

}  // namespace eitstore
