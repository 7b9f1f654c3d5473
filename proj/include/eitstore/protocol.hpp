#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "eitstore/bloch.hpp"
#include "eitstore/doppler.hpp"
#include "eitstore/timeline.hpp"

namespace eitstore {

struct CellConfig {
    double length = 0.06;           // m
    double absorption_depth = 6.8;  // alpha*L on the probe transition, line center
    int n_slices = 32;
    double pumped_fraction = 1.0;  // in (0, 1]
    bool attenuate_coupling = false;
    double coupling_beer_alpha = 0.0;  // intensity Beer exponent per meter

    void validate() const {
        if (absorption_depth < 0.0)
            throw std::invalid_argument("CellConfig: absorption_depth must be >= 0");
        if (n_slices < 1) throw std::invalid_argument("CellConfig: n_slices must be >= 1");
        if (!(length > 0.0)) throw std::invalid_argument("CellConfig: length must be > 0");
        if (!(pumped_fraction > 0.0) || pumped_fraction > 1.0)
            throw std::invalid_argument("CellConfig: pumped_fraction must be in (0, 1]");
    }
};

struct TimeWindow {
    double begin = 0.0;
    double end = 0.0;
    bool contains(double t) const { return t >= begin && t <= end; }
};

struct SimulationResult {
    std::vector<double> time;                       // s
    std::vector<std::complex<double>> probe_out;    // Omega_P at cell exit
    std::vector<std::complex<double>> reference_out;  // no-atoms run
    std::vector<char> coupling_on;                  // 0/1 per sample
    TimeWindow leak_window;
    TimeWindow retrieved_window;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rotating frame used for the readout stage. The readout beam sets its own
/// frame: the retrieved pulse is emitted at the readout frequency carrying
/// the stored phase, so the default treats the readout beam as resonant
/// (zero optical detunings once the coupling reopens). `storage` keeps the
/// storage-beam detunings through readout instead, which adds the coupling
/// light shift |Omega_C2|^2 Delta/(Gamma^2+Delta^2) to the retrieved field
/// as a linear phase drift.
enum class ReadoutFrame { readout_resonant, storage };

struct RunOptions {
    double dt = 2e-9;                  // global propagation step (s)
    double retrieval_duration = 0.0;   // sim time after coupling reopen; 0 -> 5 rise times
    int ramp_substeps = 8;             // substeps across each switching ramp
    ReadoutFrame readout_frame = ReadoutFrame::readout_resonant;
};

/// Coupling constant of the slice-to-slice probe update
///   dOmega_P/dz = i kappa <sigma_{e,+1}>,
/// calibrated so the cw, coupling-off, line-center intensity transmission of
/// the discretized cell equals exp(-absorption_depth).
double calibrate_kappa(const LambdaParams& p, const CellConfig& cell, const VelocityGrid& grid);

/// End-to-end storage simulation: the cell is split into n_slices, each
/// holding one Doppler-averaged ensemble integrated with the exact
/// piecewise-constant-field propagator; the probe amplitude is updated
/// slice to slice. Returns exit amplitude vs time plus a no-atoms reference.
SimulationResult run_storage(const FieldTimeline& timeline, const CellConfig& cell,
                             const LambdaParams& p, const VelocityGrid& grid,
                             const RunOptions& opts = {});

/// cw intensity transmission of the pumped cell at Raman detuning delta_r,
/// from the per-slice weak-probe susceptibility (linear in the probe, so
/// p.rabi_probe is ignored).
double cw_transmission(const LambdaParams& p, const CellConfig& cell,
                       const VelocityGrid& grid, double delta_r);

struct NoPeakError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// FWHM (rad/s) of the cw probe transmission peak vs Raman detuning.
double transparency_window(const LambdaParams& p, const CellConfig& cell,
                           const VelocityGrid& grid = VelocityGrid{{{0.0, 1.0}}, 0.0});

/// Decay time of the simulated storage efficiency vs storage time. The
/// Lindblad rate Gamma_R acts on the coherence amplitude, and detected
/// energy is quadratic in the retrieved field, so the model produces
/// efficiency ~ exp(-2 Gamma_R tau).
inline double expected_efficiency_decay_time(const LambdaParams& p) {
    return 1.0 / (2.0 * p.gamma_raman);
}

// --- Helpers over sampled complex amplitudes ---

/// Trapezoidal energy integral of |amp|^2 restricted to `window`.
double energy_in_window(const std::vector<double>& time,
                        const std::vector<std::complex<double>>& amp,
                        const TimeWindow& window);

/// Energy-weighted mean phase of `amp` over `window`, wrapped to (-pi, pi].
double mean_phase(const std::vector<double>& time,
                  const std::vector<std::complex<double>>& amp,
                  const TimeWindow& window);

/// arg(retrieved) - arg(leak), wrapped to (-pi, pi].
double retrieved_minus_leak_phase(const SimulationResult& result);

}  // namespace eitstore
