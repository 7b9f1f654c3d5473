#pragma once

#include <vector>

#include "eitstore/protocol.hpp"

namespace eitstore {

struct EfficiencyPoint {
    double storage_time = 0.0;  // s
    double detuning = 0.0;      // rad/s
    double efficiency = 0.0;    // in [0, 1]
};

/// Ratio of the area under the retrieved signal to the area under the
/// no-atoms reference pulse (trapezoidal integration on the common grid).
double storage_efficiency(const SimulationResult& result);
double storage_efficiency(const std::vector<double>& time,
                          const std::vector<double>& probe_intensity,
                          const TimeWindow& retrieved_window,
                          const std::vector<double>& ref_time,
                          const std::vector<double>& ref_intensity);

/// Leak area divided by the incoming (no-atoms) pulse area.
double leak_level(const SimulationResult& result);

struct ExponentialFit {
    double amplitude = 0.0;
    double decay_time = 0.0;  // s; +inf when non-decaying
    double rms_residual = 0.0;
    bool decaying = true;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least-squares fit of A exp(-tau/T_d) to efficiency-vs-storage-time data
/// (Levenberg-Marquardt on linear efficiency with a log-linear initial
/// guess). Constant data is flagged non-decaying with T_d = +inf.
ExponentialFit fit_exponential_decay(const std::vector<EfficiencyPoint>& points);

/// Raman rate inferred from a measured efficiency decay time using the
/// convention Gamma_R = 1/T_d (the 11 us <-> 14 kHz correspondence). Note
/// the simulation itself produces T_d = 1/(2 Gamma_R) because detected
/// energy is quadratic in the stored coherence.
inline double raman_rate_from_decay_time(double decay_time) { return 1.0 / decay_time; }

/// |arctan(Gamma_R Delta / (|Omega_C|^2 + Gamma_R Gamma))| per detuning.
std::vector<std::pair<double, double>> phase_vs_detuning_curve(
    double gamma_raman, double gamma_opt, std::complex<double> rabi_coupling,
    const std::vector<double>& detunings);

inline double optical_depth(double alpha_l) {
    if (alpha_l < 0.0) throw std::invalid_argument("optical_depth: alpha_l must be >= 0");
    return 0.5 * alpha_l;
}

/// T d gamma; >> 1 means the adiabatic storage regime.
inline double adiabaticity_parameter(double pulse_duration, double depth, double gamma_pol) {
    if (pulse_duration < 0.0 || depth < 0.0 || gamma_pol < 0.0)
        throw std::invalid_argument("adiabaticity_parameter: inputs must be >= 0");
    return pulse_duration * depth * gamma_pol;
}

}  // namespace eitstore
