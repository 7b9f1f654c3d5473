#include "eitstore/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "eitstore/csv.hpp"
#include "eitstore/rng.hpp"
#include "eitstore/units.hpp"

namespace eitstore {

namespace {

std::complex<double> interp_amplitude(const SampledField& field, double t) {
    const auto& ts = field.time;
    if (t <= ts.front()) return field.amplitude.front();
    if (t >= ts.back()) return field.amplitude.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin());
    const double f = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return field.amplitude[i - 1] + f * (field.amplitude[i] - field.amplitude[i - 1]);
}

void require_common_grid(const std::vector<DetectorTrace>& traces) {
    for (const auto& tr : traces)
        if (tr.time.size() != traces.front().time.size() || tr.time != traces.front().time)
            throw std::invalid_argument("traces must share one time grid");
}

}  // namespace

DetectorTrace synthesize_trace(const SampledField& field, const HomodyneConfig& cfg,
                               double lo_phase, std::int64_t shot_id, std::uint64_t seed) {
    cfg.validate();
    if (field.time.size() < 2 || field.time.size() != field.amplitude.size())
        throw std::invalid_argument("synthesize_trace: need a sampled field with >= 2 points");

    DetectorTrace trace;
    trace.lo_phase = lo_phase;
    trace.shot_id = shot_id;
    trace.slow_scan_violated = !cfg.scan_is_slow(field.duration());

    const double dt = 1.0 / cfg.sample_rate;
    const std::size_t n = static_cast<std::size_t>(field.duration() / dt) + 1;
    trace.time.reserve(n);
    trace.intensity.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = field.time.front() + i * dt;
        const std::complex<double> amp = interp_amplitude(field, t);
        const double ip = std::norm(amp);
        double intensity = cfg.lo_intensity + ip +
                           cfg.contrast * std::sqrt(cfg.lo_intensity * ip) *
                               std::cos(std::arg(amp) - lo_phase);
        if (cfg.noise_rms > 0.0)
            intensity += cfg.noise_rms *
                         counter_gaussian(seed, static_cast<std::uint64_t>(shot_id), i);
        trace.time.push_back(t);
        trace.intensity.push_back(intensity);
    }
    return trace;
}

EnvelopePair extract_envelopes(const std::vector<DetectorTrace>& traces) {
    if (traces.size() < 8)
        throw PhaseCoverageError("extract_envelopes: need >= 8 traces at distinct lo phases");
    require_common_grid(traces);

    std::vector<double> phases;
    phases.reserve(traces.size());
    for (const auto& tr : traces) {
        double ph = std::fmod(tr.lo_phase, two_pi);
        if (ph < 0.0) ph += two_pi;
        phases.push_back(ph);
    }
    std::sort(phases.begin(), phases.end());
    phases.erase(std::unique(phases.begin(), phases.end()), phases.end());
    if (phases.size() < 8)
        throw PhaseCoverageError("extract_envelopes: need >= 8 distinct lo phases");
    double max_gap = two_pi - phases.back() + phases.front();
    for (std::size_t i = 1; i < phases.size(); ++i)
        max_gap = std::max(max_gap, phases[i] - phases[i - 1]);
    if (max_gap > two_pi / 8 + 1e-12)
        throw PhaseCoverageError(
            "extract_envelopes: lo_phase values do not cover the full 2pi scan");

    EnvelopePair env;
    env.time = traces.front().time;
    const std::size_t n = env.time.size();
    env.upper.assign(n, -std::numeric_limits<double>::infinity());
    env.lower.assign(n, std::numeric_limits<double>::infinity());
    for (const auto& tr : traces) {
        for (std::size_t i = 0; i < n; ++i) {
            env.upper[i] = std::max(env.upper[i], tr.intensity[i]);
            env.lower[i] = std::min(env.lower[i], tr.intensity[i]);
        }
    }
    return env;
}

InversionResult invert_interference(const EnvelopePair& env, double lo_intensity,
                                    double contrast) {
    if (!(contrast > 0.0)) throw std::invalid_argument("invert_interference: contrast must be > 0");
    InversionResult out;
    out.time = env.time;
    const std::size_t n = env.time.size();
    out.probe_intensity.resize(n);
    out.residual.resize(n);
    out.clamped.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double ip = 0.5 * (env.upper[i] + env.lower[i]) - lo_intensity;
        if (ip < 0.0) {
            ip = 0.0;
            out.clamped[i] = 1;  // noise below floor
        }
        out.probe_intensity[i] = ip;
        out.residual[i] = std::abs((env.upper[i] - env.lower[i]) -
                                   2.0 * contrast * std::sqrt(lo_intensity * ip));
    }
    return out;
}

double estimate_contrast(const std::vector<DetectorTrace>& traces, const TimeWindow& cal_window,
                         double lo_intensity, double cal_probe_intensity) {
    if (cal_probe_intensity <= 1e-12 * std::max(lo_intensity, 1.0))
        throw std::invalid_argument("estimate_contrast: calibration probe intensity too small");
    // Reuse the envelope extraction for its grid and phase-coverage checks.
    extract_envelopes(traces);
    // The calibration segment is cw, so each trace is first time-averaged
    // over the window; taking per-bin extrema instead would latch onto the
    // noise tails and bias the contrast upward.
    double upper = -std::numeric_limits<double>::infinity();
    double lower = std::numeric_limits<double>::infinity();
    for (const auto& tr : traces) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < tr.time.size(); ++i) {
            if (!cal_window.contains(tr.time[i])) continue;
            acc += tr.intensity[i];
            ++count;
        }
        if (count == 0)
            throw std::invalid_argument("estimate_contrast: calibration window contains no samples");
        const double mean = acc / count;
        upper = std::max(upper, mean);
        lower = std::min(lower, mean);
    }
    return (upper - lower) / (2.0 * std::sqrt(lo_intensity * cal_probe_intensity));
}

double extract_relative_phase(const std::vector<DetectorTrace>& traces,
                              const TimeWindow& leak_window,
                              const TimeWindow& retrieved_window) {
    if (traces.size() < 3)
        throw DegenerateFitError("extract_relative_phase: need >= 3 traces");
    require_common_grid(traces);

    // Window-integrated intensity of trace j is c0 + K cos(phi_w - theta_j);
    // fit {1, cos, sin} by least squares and read phi_w = atan2.
    auto window_phase = [&](const TimeWindow& window) {
        const std::size_t m = traces.size();
        std::vector<double> w(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& tr = traces[j];
            for (std::size_t i = 0; i + 1 < tr.time.size(); ++i) {
                if (tr.time[i] < window.begin || tr.time[i + 1] > window.end) continue;
                w[j] += 0.5 * (tr.intensity[i] + tr.intensity[i + 1]) *
                        (tr.time[i + 1] - tr.time[i]);
            }
        }
        double s1 = 0, sc = 0, ss = 0, scc = 0, sss = 0, scs = 0, sw = 0, swc = 0, sws = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const double c = std::cos(traces[j].lo_phase);
            const double s = std::sin(traces[j].lo_phase);
            s1 += 1;
            sc += c;
            ss += s;
            scc += c * c;
            sss += s * s;
            scs += c * s;
            sw += w[j];
            swc += w[j] * c;
            sws += w[j] * s;
        }
        Eigen::Matrix3d normal;
        normal << s1, sc, ss, sc, scc, scs, ss, scs, sss;
        Eigen::Vector3d rhs(sw, swc, sws);
        const Eigen::Vector3d sol = normal.fullPivLu().solve(rhs);
        const double amplitude = std::hypot(sol(1), sol(2));

        double resid2 = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double fit = sol(0) + sol(1) * std::cos(traces[j].lo_phase) +
                               sol(2) * std::sin(traces[j].lo_phase);
            resid2 += (w[j] - fit) * (w[j] - fit);
        }
        const double noise_floor = std::sqrt(resid2 / m);
        if (amplitude < std::max(3.0 * noise_floor, 1e-12 * std::abs(sol(0))))
            throw DegenerateFitError(
                "extract_relative_phase: interference amplitude below 3x noise floor");
        return std::atan2(sol(2), sol(1));
    };

    return wrap_angle(window_phase(retrieved_window) - window_phase(leak_window));
}

void write_traces(const std::string& path, const std::vector<DetectorTrace>& traces) {
    CsvWriter csv(path, {"time_s", "intensity", "lo_phase_rad", "shot_id"});
    for (const auto& tr : traces)
        for (std::size_t i = 0; i < tr.time.size(); ++i)
            csv.row({format_double(tr.time[i]), format_double(tr.intensity[i]),
                     format_double(tr.lo_phase), std::to_string(tr.shot_id)});
}

std::vector<DetectorTrace> read_traces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "time_s,intensity,lo_phase_rad,shot_id")
        throw std::runtime_error("trace file: bad or missing header in " + path);

    std::vector<DetectorTrace> traces;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[3];
        for (int k = 0; k < 3; ++k) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("trace file: short row");
            vals[k] = std::stod(cell);
        }
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("trace file: short row");
        const std::int64_t shot = std::stoll(cell);
        if (traces.empty() || traces.back().shot_id != shot) {
            DetectorTrace tr;
            tr.shot_id = shot;
            tr.lo_phase = vals[2];
            traces.push_back(std::move(tr));
        }
        traces.back().time.push_back(vals[0]);
        traces.back().intensity.push_back(vals[1]);
    }
    return traces;
}

}  // namespace eitstore
