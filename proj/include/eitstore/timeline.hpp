#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace eitstore {

/// Piecewise time profiles of the coupling and probe complex Rabi
/// frequencies implementing the storage protocol:
///   - coupling on from the start,
///   - probe rises exponentially and is cut off abruptly,
///   - coupling switched off at coupling_off_time for a storage time tau,
///   - readout coupling switched on afterwards.
/// Abrupt switches are realized as short linear ramps (ramp_time) to keep
/// the integrator well-posed.
struct FieldTimeline {
    double probe_rise_time = 2e-6;    // exponential leading-edge time constant (s)
    double probe_cutoff_time = 5e-6;  // s
    std::complex<double> probe_peak_rabi{0.0, 0.0};

    std::complex<double> coupling_on_rabi{0.0, 0.0};
    double coupling_off_time = 5e-6;  // s
    double storage_time = 3e-6;       // tau (s)
    std::complex<double> coupling_read_rabi{0.0, 0.0};

    double ramp_time = 10e-9;  // switch ramp duration (s)

    void validate() const {
        if (cw_) return;
        if (!(probe_rise_time > 0.0))
            throw std::invalid_argument("FieldTimeline: probe_rise_time must be > 0");
        if (!(probe_cutoff_time > 0.0) || probe_cutoff_time > coupling_off_time)
            throw std::invalid_argument(
                "FieldTimeline: need 0 < probe_cutoff_time <= coupling_off_time");
        if (storage_time < 0.0)
            throw std::invalid_argument("FieldTimeline: storage_time must be >= 0");
        if (!(ramp_time > 0.0))
            throw std::invalid_argument("FieldTimeline: ramp_time must be > 0");
    }

    double coupling_reopen_time() const { return coupling_off_time + storage_time; }

    std::complex<double> coupling_at(double t) const;
    std::complex<double> probe_at(double t) const;

    struct Fields {
        std::complex<double> coupling;
        std::complex<double> probe;
    };
    Fields at(double t) const { return {coupling_at(t), probe_at(t)}; }

    // True while the (storage or readout) coupling field is nominally on.
    bool coupling_on(double t) const;

    // Switching instants (ramp boundaries); integrators align steps on these.
    std::vector<double> event_times() const;

    /// Degenerate timeline with both fields constant for all t; used for
    /// steady-state and relaxation studies.
    static FieldTimeline constant_fields(std::complex<double> omega_c,
                                         std::complex<double> omega_p);

    bool is_constant() const { return cw_; }

  private:
    bool cw_ = false;
};

}  // namespace eitstore
