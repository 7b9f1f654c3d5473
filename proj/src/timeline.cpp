#include "eitstore/timeline.hpp"

#include <algorithm>
#include <cmath>

namespace eitstore {

namespace {
// Linear ramp factor from 1 to 0 over [t0, t0 + ramp].
double ramp_down(double t, double t0, double ramp) {
    if (t <= t0) return 1.0;
    if (t >= t0 + ramp) return 0.0;
    return 1.0 - (t - t0) / ramp;
}
}  // namespace

std::complex<double> FieldTimeline::probe_at(double t) const {
    if (cw_) return probe_peak_rabi;
    if (t >= probe_cutoff_time + ramp_time) return 0.0;
    const double envelope = std::exp((std::min(t, probe_cutoff_time) - probe_cutoff_time) /
                                     probe_rise_time);
    return probe_peak_rabi * envelope * ramp_down(t, probe_cutoff_time, ramp_time);
}

std::complex<double> FieldTimeline::coupling_at(double t) const {
    if (cw_) return coupling_on_rabi;
    const double reopen = coupling_reopen_time();
    if (t < coupling_off_time + ramp_time)
        return coupling_on_rabi * ramp_down(t, coupling_off_time, ramp_time);
    if (t < reopen) return 0.0;
    return coupling_read_rabi * (1.0 - ramp_down(t, reopen, ramp_time));
}

bool FieldTimeline::coupling_on(double t) const {
    if (cw_) return std::abs(coupling_on_rabi) > 0.0;
    return t < coupling_off_time || t >= coupling_reopen_time();
}

std::vector<double> FieldTimeline::event_times() const {
    if (cw_) return {};
    const double reopen = coupling_reopen_time();
    std::vector<double> ev = {probe_cutoff_time,        probe_cutoff_time + ramp_time,
                              coupling_off_time,        coupling_off_time + ramp_time,
                              reopen,                   reopen + ramp_time};
    std::sort(ev.begin(), ev.end());
    ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
    return ev;
}

FieldTimeline FieldTimeline::constant_fields(std::complex<double> omega_c,
                                             std::complex<double> omega_p) {
    FieldTimeline tl;
    tl.coupling_on_rabi = omega_c;
    tl.coupling_read_rabi = omega_c;
    tl.probe_peak_rabi = omega_p;
    tl.cw_ = true;
    return tl;
}

}  // namespace eitstore
