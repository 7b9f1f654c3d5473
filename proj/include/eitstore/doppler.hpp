#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace eitstore {

/// Discretized Maxwell-Boltzmann velocity distribution expressed as weighted
/// Doppler-shift classes. Weights are strictly positive and sum to 1; for
/// symmetric grids the shift list equals its own negation as a set.
struct VelocityGrid {
    struct Class {
        double shift = 0.0;   // Doppler shift (rad/s)
        double weight = 1.0;  // dimensionless
    };
    std::vector<Class> classes;
    double hwhm = 0.0;  // Doppler half width at half maximum (rad/s)

    double weight_sum() const;
};

/// Uniform grid over +-span_sigmas * sigma of the Gaussian profile with
/// sigma = hwhm / sqrt(2 ln 2), trapezoidal weights renormalized to sum 1.
/// n_classes must be odd so a zero-shift class exists.
VelocityGrid make_grid(double hwhm, int n_classes, double span_sigmas);

/// Weighted average of `response` over the grid, in fixed class order.
/// The caller feeding Lambda responses must add the class shift to BOTH
/// detunings (co-propagating geometry; delta_R invariant).
std::complex<double> average_response(
    const VelocityGrid& grid,
    const std::function<std::complex<double>(double)>& response);

/// Effective optical decay rate for closed-form shortcuts: the configured
/// override if present, otherwise hwhm scaled by the paper-empirical
/// calibration factor 0.4/0.9 (the 0.9 GHz Doppler HWHM maps onto an
/// effective Gamma/2pi of 0.4 GHz; asserted, not derived).
double effective_gamma(const VelocityGrid& grid,
                       std::optional<double> override_rate = std::nullopt);

inline constexpr double kEffectiveGammaCalibration = 0.4 / 0.9;

/// Phenomenological pumped-fraction window: keeps the central `fraction` of
/// the Gaussian mass (optical pumping is effective over only part of the
/// Doppler profile); weights renormalized to sum 1. fraction = 1 is all-pass.
VelocityGrid apply_pumped_fraction(const VelocityGrid& grid, double fraction);

}  // namespace eitstore
