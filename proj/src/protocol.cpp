#include "eitstore/protocol.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

#include "eitstore/units.hpp"

namespace eitstore {

namespace {

// Weak-probe, coupling-off linear response: sigma_{e,+1}/Omega_P of one
// velocity class at probe detuning delta.
complexd linear_chi(double gamma_opt, double delta) {
    return complexd(0.0, -1.0) / complexd(gamma_opt, -delta);
}

// Weak-probe susceptibility sigma_{e,+1}/Omega_P of one velocity class with
// the population pinned in |+1> (the pumped medium before the probe has had
// time to redistribute it). Reduces to linear_chi when the coupling is off.
complexd eit_chi(const LambdaParams& p) {
    const complexd d_opt(p.gamma_opt, -p.detuning_probe);
    const complexd d_raman(p.gamma_raman, -p.raman_detuning());
    return complexd(0.0, -1.0) * d_raman / (d_opt * d_raman + std::norm(p.rabi_coupling));
}

VelocityGrid effective_grid(const CellConfig& cell, const VelocityGrid& grid) {
    return apply_pumped_fraction(grid, cell.pumped_fraction);
}

struct SliceChain {
    double kappa = 0.0;
    double dz = 0.0;
};

// Doppler-averaged probe-leg coherence of one slice ensemble.
complexd averaged_probe_coherence(const VelocityGrid& grid,
                                  const std::vector<DensityMatrix3>& states) {
    complexd acc{0.0, 0.0};
    for (std::size_t c = 0; c < grid.classes.size(); ++c)
        acc += grid.classes[c].weight * states[c].probe_optical_coherence();
    return acc;
}

}  // namespace

double calibrate_kappa(const LambdaParams& p, const CellConfig& cell, const VelocityGrid& grid0) {
    p.validate();
    cell.validate();
    if (cell.absorption_depth == 0.0) return 0.0;
    const VelocityGrid grid = effective_grid(cell, grid0);

    const complexd chi_bar = average_response(
        grid, [&](double shift) { return linear_chi(p.gamma_opt, shift); });
    const double a = chi_bar.real();
    const double b = chi_bar.imag();
    const double dz = cell.length / cell.n_slices;
    // The slice update is Crank-Nicolson in z (the atoms see the mid-slice
    // field), so the per-slice amplitude factor is the Pade form
    //   F = (1 + i kappa dz chi/2) / (1 - i kappa dz chi/2),
    // and |F| must equal r. With u = kappa dz and chi = a + ib this reduces
    // to the quadratic (1-r^2) n2/4 u^2 - b (1+r^2) u + (1-r^2) = 0.
    const double r = std::exp(-0.5 * cell.absorption_depth / cell.n_slices);
    const double norm2 = a * a + b * b;
    const double qa = (1.0 - r * r) * norm2 / 4.0;
    const double qb = -b * (1.0 + r * r);
    const double qc = 1.0 - r * r;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0)
        throw std::invalid_argument(
            "calibrate_kappa: requested absorption depth not reachable with this slice count");
    // Numerically stable quadratic roots; keep the weak-coupling branch.
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    double u = 0.0;
    bool have_u = false;
    if (q != 0.0) {
        u = qc / q;
        have_u = true;
    }
    if (qa != 0.0) {
        const double u2 = q / qa;
        if (!have_u || std::abs(u2) < std::abs(u)) u = u2;
    }
    return u / dz;
}

double cw_transmission(const LambdaParams& p, const CellConfig& cell, const VelocityGrid& grid0,
                       double delta_r) {
    p.validate();
    cell.validate();
    const VelocityGrid grid = effective_grid(cell, grid0);
    const double kappa = calibrate_kappa(p, cell, grid0);
    const double dz = cell.length / cell.n_slices;

    LambdaParams q = p;
    q.detuning_probe = p.detuning_coupling + delta_r;

    complexd probe(1.0, 0.0);  // response is linear in the probe amplitude
    for (int k = 0; k < cell.n_slices; ++k) {
        double couple_att = 1.0;
        if (cell.attenuate_coupling)
            couple_att = std::exp(-0.5 * cell.coupling_beer_alpha * (k + 0.5) * dz);
        LambdaParams local = q;
        local.rabi_coupling *= couple_att;
        const complexd chi = average_response(
            grid, [&](double shift) { return eit_chi(local.doppler_shifted(shift)); });
        const complexd w = complexd(0.0, 0.5) * kappa * dz * chi;
        probe *= (1.0 + w) / (1.0 - w);
    }
    return std::norm(probe);
}

double transparency_window(const LambdaParams& p, const CellConfig& cell,
                           const VelocityGrid& grid) {
    p.validate();
    if (!(std::abs(p.rabi_coupling) > 0.0))
        throw std::invalid_argument("transparency_window: |Omega_C| must be > 0");

    const double w0 = p.gamma_raman + std::norm(p.rabi_coupling) / p.gamma_opt;
    auto transmission = [&](double dr) { return cw_transmission(p, cell, grid, dr); };

    double span = 20.0 * w0;
    const int n_scan = 201;
    for (int attempt = 0; attempt < 4; ++attempt) {
        std::vector<double> dr(n_scan), tr(n_scan);
        for (int i = 0; i < n_scan; ++i) {
            dr[i] = -span + 2.0 * span * i / (n_scan - 1);
            tr[i] = transmission(dr[i]);
        }
        const auto it_max = std::max_element(tr.begin(), tr.end());
        const int i_peak = static_cast<int>(it_max - tr.begin());
        const double t_peak = *it_max;
        const double t_base = std::min(tr.front(), tr.back());
        if (t_peak - t_base < 1e-6)
            throw NoPeakError("transparency_window: transmission contrast < 1e-6");
        const double half = 0.5 * (t_peak + t_base);

        // Find the half-level crossings on each side of the peak.
        int lo = i_peak, hi = i_peak;
        while (lo > 0 && tr[lo] > half) --lo;
        while (hi < n_scan - 1 && tr[hi] > half) ++hi;
        if (tr[lo] > half || tr[hi] > half) {
            span *= 4.0;  // window wider than the scan; retry
            continue;
        }
        auto bisect = [&](double a, double b) {
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (a + b);
                if (transmission(mid) > half)
                    a = mid;  // still inside the peak; crossing is further out
                else
                    b = mid;
                if (std::abs(b - a) < 1e-9 * w0) break;
            }
            return 0.5 * (a + b);
        };
        const double left = bisect(dr[i_peak], dr[lo]);
        const double right = bisect(dr[i_peak], dr[hi]);
        return std::abs(right - left);
    }
    throw NoPeakError("transparency_window: could not bracket the transmission peak");
}

SimulationResult run_storage(const FieldTimeline& timeline, const CellConfig& cell,
                             const LambdaParams& p, const VelocityGrid& grid0,
                             const RunOptions& opts) {
    p.validate();
    cell.validate();
    timeline.validate();
    if (timeline.is_constant())
        throw std::invalid_argument("run_storage: timeline must implement the storage protocol");
    if (!(opts.dt > 0.0)) throw std::invalid_argument("run_storage: dt must be > 0");

    const VelocityGrid grid = effective_grid(cell, grid0);
    const double kappa = calibrate_kappa(p, cell, grid0);
    const int n_slices = cell.n_slices;
    const std::size_t n_classes = grid.classes.size();
    const double dz = cell.length / n_slices;

    const double retrieval =
        opts.retrieval_duration > 0.0 ? opts.retrieval_duration : 5.0 * timeline.probe_rise_time;
    const double t_end = timeline.coupling_reopen_time() + timeline.ramp_time + retrieval;

    // Time grid: uniform base step, with every switching ramp subdivided.
    std::vector<double> times;
    for (double t = 0.0; t < t_end; t += opts.dt) times.push_back(t);
    times.push_back(t_end);
    const int sub = std::max(1, opts.ramp_substeps);
    for (double ev : timeline.event_times()) {
        const double ramp_start = ev - timeline.ramp_time;
        for (int i = 0; i <= sub; ++i) {
            const double t = ramp_start + timeline.ramp_time * i / sub;
            if (t > 0.0 && t < t_end) times.push_back(t);
        }
    }
    std::sort(times.begin(), times.end());
    const double t_tol = 1e-3 * std::min(opts.dt, timeline.ramp_time / sub);
    times.erase(std::unique(times.begin(), times.end(),
                            [&](double a, double b) { return b - a < t_tol; }),
                times.end());
    const std::size_t n_t = times.size();

    // Pumped medium: every atom starts in the |+1> ground sublevel.
    std::vector<std::vector<DensityMatrix3>> states(
        n_slices, std::vector<DensityMatrix3>(n_classes, DensityMatrix3::pure(kLevelPlus)));

    // Cached exact propagators, keyed on the frozen fields and step length.
    struct PropCacheEntry {
        complexd oc{0.0, 0.0}, op{0.0, 0.0};
        double dt = -1.0;
        bool readout = false;
        Matrix9cd prop;
        bool valid = false;
    };
    std::vector<PropCacheEntry> cache(static_cast<std::size_t>(n_slices) * n_classes);

    std::vector<double> couple_att(n_slices, 1.0);
    if (cell.attenuate_coupling)
        for (int k = 0; k < n_slices; ++k)
            couple_att[k] = std::exp(-0.5 * cell.coupling_beer_alpha * (k + 0.5) * dz);

    SimulationResult result;
    result.time = times;
    result.probe_out.resize(n_t);
    result.reference_out.resize(n_t);
    result.coupling_on.resize(n_t);

    const double peak = std::abs(timeline.probe_peak_rabi);
    const double divergence_limit = 10.0 * std::max(peak, 1e-300);

    std::vector<complexd> slice_input(n_slices);
    for (std::size_t j = 0; j < n_t; ++j) {
        const double t = times[j];
        const complexd probe_in = timeline.probe_at(t);
        result.reference_out[j] = probe_in;
        result.coupling_on[j] = timeline.coupling_on(t) ? 1 : 0;

        complexd om = probe_in;
        for (int k = 0; k < n_slices; ++k) {
            const complexd emission =
                complexd(0.0, 1.0) * kappa * dz * averaged_probe_coherence(grid, states[k]);
            // Crank-Nicolson in z: the atoms in slice k are driven by the
            // mid-slice field, halfway between the entering and exiting one.
            slice_input[k] = om + 0.5 * emission;
            om += emission;
            if (peak > 0.0 && std::abs(om) > divergence_limit)
                throw DivergenceError(
                    "run_storage: slice amplitude exceeded 10x input peak (reduce dt or "
                    "increase n_slices)");
        }
        result.probe_out[j] = om;

        if (j + 1 == n_t) break;
        const double dt_step = times[j + 1] - t;
        const double t_mid = t + 0.5 * dt_step;
        const complexd oc_mid = timeline.coupling_at(t_mid);
        // Once the readout beam takes over it defines the rotating frame.
        const bool readout_frame =
            opts.readout_frame == ReadoutFrame::readout_resonant &&
            t_mid >= timeline.coupling_reopen_time();
        for (int k = 0; k < n_slices; ++k) {
            const complexd oc_local = oc_mid * couple_att[k];
            const complexd op_local = slice_input[k];
            for (std::size_t c = 0; c < n_classes; ++c) {
                PropCacheEntry& entry = cache[static_cast<std::size_t>(k) * n_classes + c];
                if (!entry.valid || entry.oc != oc_local || entry.op != op_local ||
                    entry.dt != dt_step || entry.readout != readout_frame) {
                    LambdaParams q = p.doppler_shifted(grid.classes[c].shift);
                    if (readout_frame) {
                        // Keep the class's Doppler shift; drop the laser detuning.
                        q.detuning_probe -= p.detuning_probe;
                        q.detuning_coupling -= p.detuning_coupling;
                    }
                    const Eigen::Matrix3cd h = build_hamiltonian(oc_local, op_local,
                                                                 q.detuning_probe,
                                                                 q.detuning_coupling);
                    entry.prop = Matrix9cd(liouvillian(h, q) * dt_step).exp();
                    entry.oc = oc_local;
                    entry.op = op_local;
                    entry.dt = dt_step;
                    entry.readout = readout_frame;
                    entry.valid = true;
                }
                Vector9cd v;
                const Eigen::Matrix3cd& m = states[k][c].m;
                for (int idx = 0; idx < 9; ++idx) v(idx) = m(idx / 3, idx % 3);
                v = entry.prop * v;
                Eigen::Matrix3cd& out = states[k][c].m;
                for (int idx = 0; idx < 9; ++idx) out(idx / 3, idx % 3) = v(idx);
                out = 0.5 * (out + out.adjoint().eval());
            }
        }
    }

    result.leak_window = {0.0, timeline.coupling_off_time};
    result.retrieved_window = {timeline.coupling_reopen_time(), t_end};
    return result;
}

double energy_in_window(const std::vector<double>& time,
                        const std::vector<std::complex<double>>& amp, const TimeWindow& window) {
    double energy = 0.0;
    for (std::size_t i = 0; i + 1 < time.size(); ++i) {
        if (time[i] < window.begin || time[i + 1] > window.end) continue;
        energy += 0.5 * (std::norm(amp[i]) + std::norm(amp[i + 1])) * (time[i + 1] - time[i]);
    }
    return energy;
}

double mean_phase(const std::vector<double>& time,
                  const std::vector<std::complex<double>>& amp, const TimeWindow& window) {
    complexd acc{0.0, 0.0};
    for (std::size_t i = 0; i + 1 < time.size(); ++i) {
        if (time[i] < window.begin || time[i + 1] > window.end) continue;
        const complexd mid = 0.5 * (amp[i] + amp[i + 1]);
        acc += std::abs(mid) * mid * (time[i + 1] - time[i]);
    }
    return std::arg(acc);
}

double retrieved_minus_leak_phase(const SimulationResult& result) {
    const double leak = mean_phase(result.time, result.probe_out, result.leak_window);
    const double retrieved = mean_phase(result.time, result.probe_out, result.retrieved_window);
    return wrap_angle(retrieved - leak);
}

}  // namespace eitstore
