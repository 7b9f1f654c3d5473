#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "eitstore/bloch.hpp"
#include "eitstore/doppler.hpp"
#include "eitstore/homodyne.hpp"
#include "eitstore/protocol.hpp"
#include "eitstore/timeline.hpp"
#include "eitstore/units.hpp"

namespace eitstore {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

/// Scenario description loaded from a sectioned key=value file. All
/// frequencies in the file are ordinary frequencies in Hz (the paper quotes
/// every rate as X/2pi); conversion to rad/s happens exactly once, in the
/// to_*() accessors. Unknown keys are rejected with a line-anchored error.
struct ScenarioConfig {
    // [system] (Hz, except phases in rad)
    double gamma_raman_hz = 14e3;
    double gamma_opt_hz = 0.4e9;
    double gamma_pol_hz = 1.4e8 / two_pi;  // gamma ~ 1.4e8 1/s
    double rabi_coupling_hz = 23e6;
    double rabi_coupling_phase_rad = 0.0;
    std::optional<double> rabi_coupling_read_hz;  // default: same as storage coupling
    double rabi_coupling_read_phase_rad = 0.0;
    double rabi_probe_hz = 1e6;
    double rabi_probe_phase_rad = 0.0;
    double detuning_probe_hz = 0.0;
    double detuning_coupling_hz = 0.0;

    // [cell]
    double cell_length_m = 0.06;
    double absorption_depth = 6.8;
    int n_slices = 32;
    double pumped_fraction = 1.0;
    bool attenuate_coupling = false;
    double coupling_beer_alpha = 0.0;

    // [timeline] (s)
    double probe_rise_time_s = 2e-6;
    double probe_cutoff_time_s = 5e-6;
    double coupling_off_time_s = 5e-6;
    double storage_time_s = 3e-6;
    double ramp_time_s = 10e-9;

    // [doppler]
    double hwhm_hz = 0.9e9;
    int n_classes = 9;
    double span_sigmas = 3.0;
    std::optional<double> effective_gamma_override_hz;

    // [homodyne]
    double lo_intensity = 1.0;
    double contrast = 1.65;
    double scan_frequency_hz = 0.02;
    double scan_amplitude_rad = 10.0 * 3.14159265358979323846;
    double sample_rate_hz = 250e6;
    double noise_rms = 0.0;
    int n_phases = 64;

    // [run]
    std::uint64_t seed = 1;
    double dt_s = 2e-9;
    double retrieval_duration_s = 0.0;  // 0 -> 5 probe rise times

    // [sweep]
    enum class SweepAxis { detuning, storage_time, coupling_power };
    enum class SweepMode { simulate, closed_form };
    SweepAxis sweep_axis = SweepAxis::detuning;
    SweepMode sweep_mode = SweepMode::simulate;
    double sweep_start = 0.0;   // axis units: Hz / s / relative power
    double sweep_stop = 2.2e9;
    int sweep_points = 12;

    LambdaParams to_lambda_params() const;
    CellConfig to_cell() const;
    FieldTimeline to_timeline() const;
    VelocityGrid to_grid() const;
    HomodyneConfig to_homodyne() const;
    RunOptions to_run_options() const;

    /// Cross-field validation (type invariants on load).
    void validate() const;
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

/// Emit a normalized config file; reloading it yields an identical
/// in-memory scenario.
std::string render_config(const ScenarioConfig& cfg);
void save_config(const ScenarioConfig& cfg, const std::string& path);

std::string to_string(ScenarioConfig::SweepAxis axis);
std::string to_string(ScenarioConfig::SweepMode mode);

}  // namespace eitstore
