// Command-line front end: storage simulation, parameter sweeps, and
// homodyne trace processing with CSV output.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "eitstore/analysis.hpp"
#include "eitstore/config.hpp"
#include "eitstore/csv.hpp"
#include "eitstore/homodyne.hpp"
#include "eitstore/ode.hpp"
#include "eitstore/protocol.hpp"
#include "eitstore/units.hpp"

namespace fs = std::filesystem;
using namespace eitstore;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitTraces = 4;

TimeWindow parse_window(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("window", "expected begin:end, got '" + s + "'");
    try {
        return TimeWindow{std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("window", "expected begin:end, got '" + s + "'");
    }
}

void write_result_csv(const fs::path& path, const SimulationResult& r) {
    CsvWriter csv(path.string(),
                  {"time_s", "re_out", "im_out", "re_ref", "im_ref", "coupling_on"});
    for (std::size_t i = 0; i < r.time.size(); ++i)
        csv.row({format_double(r.time[i]), format_double(r.probe_out[i].real()),
                 format_double(r.probe_out[i].imag()), format_double(r.reference_out[i].real()),
                 format_double(r.reference_out[i].imag()), r.coupling_on[i] ? "1" : "0"});
}

struct PointResult {
    double axis_value = 0.0;
    double efficiency = 0.0;
    double leak = 0.0;
    double phase = 0.0;
};

ScenarioConfig apply_axis(ScenarioConfig cfg, ScenarioConfig::SweepAxis axis, double value) {
    switch (axis) {
        case ScenarioConfig::SweepAxis::detuning:
            // Optical detuning at Raman resonance: shift both beams together.
            cfg.detuning_probe_hz = value;
            cfg.detuning_coupling_hz = value;
            break;
        case ScenarioConfig::SweepAxis::storage_time:
            cfg.storage_time_s = value;
            break;
        case ScenarioConfig::SweepAxis::coupling_power:
            // Axis value is relative power; Rabi frequency scales as sqrt.
            cfg.rabi_coupling_hz *= std::sqrt(value);
            if (cfg.rabi_coupling_read_hz) *cfg.rabi_coupling_read_hz *= std::sqrt(value);
            break;
    }
    return cfg;
}

PointResult sweep_point(const ScenarioConfig& base, ScenarioConfig::SweepAxis axis,
                        double value) {
    PointResult out;
    out.axis_value = value;
    const ScenarioConfig cfg = apply_axis(base, axis, value);
    if (base.sweep_mode == ScenarioConfig::SweepMode::closed_form) {
        const LambdaParams p = cfg.to_lambda_params();
        out.phase = phase_vs_detuning_curve(p.gamma_raman, p.gamma_opt, p.rabi_coupling,
                                            {p.detuning_probe})[0].second;
        out.efficiency = std::exp(-cfg.storage_time_s / expected_efficiency_decay_time(p));
        out.leak = 0.0;
        return out;
    }
    const SimulationResult r =
        run_storage(cfg.to_timeline(), cfg.to_cell(), cfg.to_lambda_params(),
                    cfg.to_grid(), cfg.to_run_options());
    out.efficiency = storage_efficiency(r);
    out.leak = leak_level(r);
    out.phase = retrieved_minus_leak_phase(r);
    return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, bool emit_traces) {
    ScenarioConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    fs::create_directories(out_dir);

    const SimulationResult r =
        run_storage(cfg.to_timeline(), cfg.to_cell(), cfg.to_lambda_params(), cfg.to_grid(),
                    cfg.to_run_options());
    write_result_csv(fs::path(out_dir) / "result.csv", r);

    const double efficiency = storage_efficiency(r);
    const double leak = leak_level(r);
    const double phase = retrieved_minus_leak_phase(r);

    std::ofstream summary(fs::path(out_dir) / "summary.txt");
    if (!summary) throw std::runtime_error("cannot write summary in " + out_dir);
    summary << "efficiency = " << format_double(efficiency) << "\n"
            << "leak_level = " << format_double(leak) << "\n"
            << "phase_rad = " << format_double(phase) << "\n"
            << "leak_window_begin_s = " << format_double(r.leak_window.begin) << "\n"
            << "leak_window_end_s = " << format_double(r.leak_window.end) << "\n"
            << "retrieved_window_begin_s = " << format_double(r.retrieved_window.begin) << "\n"
            << "retrieved_window_end_s = " << format_double(r.retrieved_window.end) << "\n";

    if (emit_traces) {
        double peak = 0.0;
        for (const auto& a : r.probe_out) peak = std::max(peak, std::abs(a));
        if (peak <= 0.0) throw std::runtime_error("no output field to emit traces for");
        const HomodyneConfig hcfg = cfg.to_homodyne();
        // Detector units: put the probe peak at half the local-oscillator
        // intensity so both interference terms are well resolved.
        const double scale = std::sqrt(0.5 * hcfg.lo_intensity) / peak;
        SampledField field;
        field.time = r.time;
        field.amplitude.reserve(r.probe_out.size());
        for (const auto& a : r.probe_out) field.amplitude.push_back(scale * a);

        std::vector<DetectorTrace> traces;
        traces.reserve(cfg.n_phases);
        for (int k = 0; k < cfg.n_phases; ++k)
            traces.push_back(synthesize_trace(field, hcfg, two_pi * k / cfg.n_phases, k,
                                              cfg.seed));
        write_traces((fs::path(out_dir) / "traces.csv").string(), traces);
        summary << "trace_scale = " << format_double(scale) << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, std::optional<std::string> axis,
              std::optional<int> points, std::optional<double> start,
              std::optional<double> stop) {
    ScenarioConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (axis) {
        if (*axis == "detuning") cfg.sweep_axis = ScenarioConfig::SweepAxis::detuning;
        else if (*axis == "storage_time")
            cfg.sweep_axis = ScenarioConfig::SweepAxis::storage_time;
        else if (*axis == "coupling_power")
            cfg.sweep_axis = ScenarioConfig::SweepAxis::coupling_power;
        else throw ConfigError(0, "unknown sweep axis '" + *axis + "'");
    }
    if (points) cfg.sweep_points = *points;
    if (start) cfg.sweep_start = *start;
    if (stop) cfg.sweep_stop = *stop;
    cfg.validate();
    fs::create_directories(out_dir);

    std::vector<double> values(cfg.sweep_points);
    for (int i = 0; i < cfg.sweep_points; ++i)
        values[i] = cfg.sweep_points == 1
                        ? cfg.sweep_start
                        : cfg.sweep_start + (cfg.sweep_stop - cfg.sweep_start) * i /
                                                (cfg.sweep_points - 1);

    // Work pool; results land in axis order regardless of completion order.
    std::vector<PointResult> results(values.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const unsigned n_workers = std::max(1u, std::min<unsigned>(
        std::thread::hardware_concurrency(), static_cast<unsigned>(values.size())));
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < n_workers; ++w)
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= values.size()) return;
                try {
                    results[i] = sweep_point(cfg, cfg.sweep_axis, values[i]);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);

    CsvWriter csv((fs::path(out_dir) / "sweep.csv").string(),
                  {"axis_value", "efficiency", "leak_level", "phase_rad"});
    for (const auto& p : results)
        csv.row({format_double(p.axis_value), format_double(p.efficiency),
                 format_double(p.leak), format_double(p.phase)});
    return 0;
}

int cmd_process_traces(const std::string& traces_path, const std::string& out_dir,
                       double lo_intensity, std::optional<double> alpha,
                       bool estimate_alpha, std::optional<std::string> cal_window_s,
                       std::optional<double> cal_ip,
                       std::optional<std::string> leak_window_s,
                       std::optional<std::string> retrieved_window_s) {
    const std::vector<DetectorTrace> traces = read_traces(traces_path);
    fs::create_directories(out_dir);

    double contrast;
    if (estimate_alpha) {
        if (!cal_window_s || !cal_ip)
            throw std::runtime_error(
                "--estimate-contrast requires --cal-window and --cal-ip");
        contrast = estimate_contrast(traces, parse_window(*cal_window_s), lo_intensity,
                                     *cal_ip);
    } else if (alpha) {
        contrast = *alpha;
    } else {
        throw std::runtime_error("provide --alpha or --estimate-contrast");
    }

    const EnvelopePair env = extract_envelopes(traces);
    const InversionResult inv = invert_interference(env, lo_intensity, contrast);

    CsvWriter csv((fs::path(out_dir) / "probe_intensity.csv").string(),
                  {"time_s", "probe_intensity", "residual", "clamped"});
    for (std::size_t i = 0; i < inv.time.size(); ++i)
        csv.row({format_double(inv.time[i]), format_double(inv.probe_intensity[i]),
                 format_double(inv.residual[i]), inv.clamped[i] ? "1" : "0"});

    std::ofstream summary(fs::path(out_dir) / "summary.txt");
    if (!summary) throw std::runtime_error("cannot write summary in " + out_dir);
    summary << "contrast = " << format_double(contrast) << "\n";
    if (leak_window_s && retrieved_window_s) {
        const double phase = extract_relative_phase(traces, parse_window(*leak_window_s),
                                                    parse_window(*retrieved_window_s));
        summary << "phase_rad = " << format_double(phase) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Light-storage simulator and homodyne trace processor"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", traces_path;
    std::optional<std::uint64_t> seed;
    bool emit_traces = false;

    auto* sim = app.add_subcommand("simulate", "Run the storage protocol once");
    sim->add_option("--config", config_path, "scenario file")->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--seed", seed, "override [run] seed");
    sim->add_flag("--emit-traces", emit_traces, "also synthesize homodyne traces");

    std::optional<std::string> axis;
    std::optional<int> points;
    std::optional<double> start, stop;
    auto* swp = app.add_subcommand("sweep", "Sweep one axis, one protocol run per point");
    swp->add_option("--config", config_path, "scenario file")->required();
    swp->add_option("--out", out_dir, "output directory");
    swp->add_option("--seed", seed, "override [run] seed");
    swp->add_option("--axis", axis, "detuning | storage_time | coupling_power");
    swp->add_option("--points", points, "number of sweep points");
    swp->add_option("--start", start, "axis start (Hz / s / relative power)");
    swp->add_option("--stop", stop, "axis stop");

    double lo_intensity = 1.0;
    std::optional<double> alpha, cal_ip;
    bool estimate_alpha = false;
    std::optional<std::string> cal_window, leak_window, retrieved_window;
    auto* proc = app.add_subcommand("process-traces",
                                    "Recover probe intensity and phase from traces");
    proc->add_option("--traces", traces_path, "trace file")->required();
    proc->add_option("--out", out_dir, "output directory");
    proc->add_option("--ic", lo_intensity, "local oscillator intensity")->required();
    proc->add_option("--alpha", alpha, "interference contrast");
    proc->add_flag("--estimate-contrast", estimate_alpha,
                   "estimate contrast from a calibration segment");
    proc->add_option("--cal-window", cal_window, "calibration window begin:end (s)");
    proc->add_option("--cal-ip", cal_ip, "known probe intensity in the calibration window");
    proc->add_option("--leak-window", leak_window, "leak window begin:end (s)");
    proc->add_option("--retrieved-window", retrieved_window,
                     "retrieved window begin:end (s)");

    std::string norm_out;
    auto* norm = app.add_subcommand("normalize-config",
                                    "Reload and re-emit a scenario file in canonical form");
    norm->add_option("--config", config_path, "scenario file")->required();
    norm->add_option("--out", norm_out, "output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir, seed, emit_traces);
        if (swp->parsed())
            return cmd_sweep(config_path, out_dir, seed, axis, points, start, stop);
        if (proc->parsed())
            return cmd_process_traces(traces_path, out_dir, lo_intensity, alpha,
                                      estimate_alpha, cal_window, cal_ip, leak_window,
                                      retrieved_window);
        if (norm->parsed()) {
            save_config(load_config(config_path), norm_out);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const StepSizeUnderflowError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const PhaseCoverageError& e) {
        std::cerr << "trace error: " << e.what() << "\n";
        return kExitTraces;
    } catch (const DegenerateFitError& e) {
        std::cerr << "trace error: " << e.what() << "\n";
        return kExitTraces;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTraces;
    }
    return 0;
}
