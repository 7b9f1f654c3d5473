#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eitstore/protocol.hpp"

namespace eitstore {

/// Homodyne detection model parameters. The interference term uses the
/// measured contrast alpha in place of the ideal factor 2:
///   I = I_C + I_P + alpha sqrt(I_C I_P) cos(delta_phi)
struct HomodyneConfig {
    double lo_intensity = 1.0;    // I_C, detector units
    double contrast = 1.65;       // alpha in (0, 2]
    double scan_frequency = 0.02;  // Hz (piezo scan; must be slow vs the protocol)
    double scan_amplitude = 10.0 * 3.14159265358979323846;  // rad
    double sample_rate = 250e6;   // Hz
    double noise_rms = 0.0;       // additive Gaussian, detector units

    void validate() const {
        if (!(contrast > 0.0) || contrast > 2.0)
            throw std::invalid_argument("HomodyneConfig: contrast must be in (0, 2]");
        if (!(lo_intensity >= 0.0))
            throw std::invalid_argument("HomodyneConfig: lo_intensity must be >= 0");
        if (!(sample_rate > 0.0))
            throw std::invalid_argument("HomodyneConfig: sample_rate must be > 0");
    }

    bool scan_is_slow(double duration) const { return scan_frequency * duration <= 0.01; }
};

/// Sampled probe amplitude at the detector, the unit the homodyne pipeline
/// consumes.
struct SampledField {
    std::vector<double> time;                  // s
    std::vector<std::complex<double>> amplitude;  // sqrt(detector units)

    double duration() const { return time.empty() ? 0.0 : time.back() - time.front(); }
};

struct DetectorTrace {
    std::vector<double> time;       // s
    std::vector<double> intensity;  // detector units
    double lo_phase = 0.0;          // rad, constant per trace
    std::int64_t shot_id = 0;
    bool slow_scan_violated = false;  // set when scan_frequency * duration > 0.01
};

struct EnvelopePair {
    std::vector<double> time;
    std::vector<double> upper;
    std::vector<double> lower;
};

struct PhaseCoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Resample `field` on a uniform grid at cfg.sample_rate and apply the
/// two-beam interference formula against a local oscillator of fixed phase.
/// Noise draws are keyed on (seed, shot_id, sample) and are reproducible
/// regardless of evaluation order.
DetectorTrace synthesize_trace(const SampledField& field, const HomodyneConfig& cfg,
                               double lo_phase, std::int64_t shot_id = 0,
                               std::uint64_t seed = 0);

/// Per-time-bin extrema over traces accumulated at many local-oscillator
/// phases. Requires >= 8 distinct phases covering the full circle.
EnvelopePair extract_envelopes(const std::vector<DetectorTrace>& traces);

struct InversionResult {
    std::vector<double> time;
    std::vector<double> probe_intensity;  // I_P per bin
    std::vector<double> residual;         // |(up-low) - 2 alpha sqrt(I_C I_P)|
    std::vector<char> clamped;            // I_P < 0 clamped to 0 (noise below floor)
};

/// Recover the probe intensity from the envelope pair:
///   I_P = (upper + lower)/2 - I_C
InversionResult invert_interference(const EnvelopePair& env, double lo_intensity,
                                    double contrast);

/// Contrast estimate from a cw calibration segment with known probe
/// intensity: alpha = (upper - lower) / (2 sqrt(I_C I_P)) averaged over the
/// segment.
double estimate_contrast(const std::vector<DetectorTrace>& traces,
                         const TimeWindow& cal_window, double lo_intensity,
                         double cal_probe_intensity);

/// Fit the window-integrated interference term against cos(phi - lo_phase)
/// across traces, per window, and return phi_retrieved - phi_leak wrapped
/// to (-pi, pi]. Invariant under a global lo_phase offset.
double extract_relative_phase(const std::vector<DetectorTrace>& traces,
                              const TimeWindow& leak_window,
                              const TimeWindow& retrieved_window);

// --- Trace file format (columnar text, one trace per shot_id) ---
// header: time_s,intensity,lo_phase_rad,shot_id
// Doubles are written with 17 significant digits; noiseless synthetic data
// round-trips bit exactly.
void write_traces(const std::string& path, const std::vector<DetectorTrace>& traces);
std::vector<DetectorTrace> read_traces(const std::string& path);

}  // namespace eitstore
