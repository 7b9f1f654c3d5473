#include "eitstore/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "eitstore/csv.hpp"
#include "eitstore/units.hpp"

namespace eitstore {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& v, int line) {
    int x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
    std::uint64_t x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(line, "expected an unsigned integer, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(line, "expected true/false, got '" + v + "'");
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, int)>;

std::map<std::string, Setter> build_setters() {
    std::map<std::string, Setter> s;
    auto dbl = [&](const std::string& key, double ScenarioConfig::* field) {
        s[key] = [field](ScenarioConfig& c, const std::string& v, int line) {
            c.*field = parse_double(v, line);
        };
    };
    auto opt_dbl = [&](const std::string& key, std::optional<double> ScenarioConfig::* field) {
        s[key] = [field](ScenarioConfig& c, const std::string& v, int line) {
            c.*field = parse_double(v, line);
        };
    };
    auto integer = [&](const std::string& key, int ScenarioConfig::* field) {
        s[key] = [field](ScenarioConfig& c, const std::string& v, int line) {
            c.*field = parse_int(v, line);
        };
    };

    dbl("system.gamma_raman_hz", &ScenarioConfig::gamma_raman_hz);
    dbl("system.gamma_opt_hz", &ScenarioConfig::gamma_opt_hz);
    dbl("system.gamma_pol_hz", &ScenarioConfig::gamma_pol_hz);
    dbl("system.rabi_coupling_hz", &ScenarioConfig::rabi_coupling_hz);
    dbl("system.rabi_coupling_phase_rad", &ScenarioConfig::rabi_coupling_phase_rad);
    opt_dbl("system.rabi_coupling_read_hz", &ScenarioConfig::rabi_coupling_read_hz);
    dbl("system.rabi_coupling_read_phase_rad", &ScenarioConfig::rabi_coupling_read_phase_rad);
    dbl("system.rabi_probe_hz", &ScenarioConfig::rabi_probe_hz);
    dbl("system.rabi_probe_phase_rad", &ScenarioConfig::rabi_probe_phase_rad);
    dbl("system.detuning_probe_hz", &ScenarioConfig::detuning_probe_hz);
    dbl("system.detuning_coupling_hz", &ScenarioConfig::detuning_coupling_hz);

    dbl("cell.cell_length_m", &ScenarioConfig::cell_length_m);
    dbl("cell.absorption_depth", &ScenarioConfig::absorption_depth);
    integer("cell.n_slices", &ScenarioConfig::n_slices);
    dbl("cell.pumped_fraction", &ScenarioConfig::pumped_fraction);
    s["cell.attenuate_coupling"] = [](ScenarioConfig& c, const std::string& v, int line) {
        c.attenuate_coupling = parse_bool(v, line);
    };
    dbl("cell.coupling_beer_alpha", &ScenarioConfig::coupling_beer_alpha);

    dbl("timeline.probe_rise_time_s", &ScenarioConfig::probe_rise_time_s);
    dbl("timeline.probe_cutoff_time_s", &ScenarioConfig::probe_cutoff_time_s);
    dbl("timeline.coupling_off_time_s", &ScenarioConfig::coupling_off_time_s);
    dbl("timeline.storage_time_s", &ScenarioConfig::storage_time_s);
    dbl("timeline.ramp_time_s", &ScenarioConfig::ramp_time_s);

    dbl("doppler.hwhm_hz", &ScenarioConfig::hwhm_hz);
    integer("doppler.n_classes", &ScenarioConfig::n_classes);
    dbl("doppler.span_sigmas", &ScenarioConfig::span_sigmas);
    opt_dbl("doppler.effective_gamma_override_hz",
            &ScenarioConfig::effective_gamma_override_hz);

    dbl("homodyne.lo_intensity", &ScenarioConfig::lo_intensity);
    dbl("homodyne.contrast", &ScenarioConfig::contrast);
    dbl("homodyne.scan_frequency_hz", &ScenarioConfig::scan_frequency_hz);
    dbl("homodyne.scan_amplitude_rad", &ScenarioConfig::scan_amplitude_rad);
    dbl("homodyne.sample_rate_hz", &ScenarioConfig::sample_rate_hz);
    dbl("homodyne.noise_rms", &ScenarioConfig::noise_rms);
    integer("homodyne.n_phases", &ScenarioConfig::n_phases);

    s["run.seed"] = [](ScenarioConfig& c, const std::string& v, int line) {
        c.seed = parse_u64(v, line);
    };
    dbl("run.dt_s", &ScenarioConfig::dt_s);
    dbl("run.retrieval_duration_s", &ScenarioConfig::retrieval_duration_s);

    s["sweep.axis"] = [](ScenarioConfig& c, const std::string& v, int line) {
        if (v == "detuning") c.sweep_axis = ScenarioConfig::SweepAxis::detuning;
        else if (v == "storage_time") c.sweep_axis = ScenarioConfig::SweepAxis::storage_time;
        else if (v == "coupling_power") c.sweep_axis = ScenarioConfig::SweepAxis::coupling_power;
        else throw ConfigError(line, "unknown sweep axis '" + v + "'");
    };
    s["sweep.mode"] = [](ScenarioConfig& c, const std::string& v, int line) {
        if (v == "simulate") c.sweep_mode = ScenarioConfig::SweepMode::simulate;
        else if (v == "closed_form") c.sweep_mode = ScenarioConfig::SweepMode::closed_form;
        else throw ConfigError(line, "unknown sweep mode '" + v + "'");
    };
    dbl("sweep.start", &ScenarioConfig::sweep_start);
    dbl("sweep.stop", &ScenarioConfig::sweep_stop);
    integer("sweep.points", &ScenarioConfig::sweep_points);
    return s;
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> s = build_setters();
    return s;
}

bool known_section(const std::string& name) {
    return name == "system" || name == "cell" || name == "timeline" ||
           name == "doppler" || name == "homodyne" || name == "run" ||
           name == "sweep";
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto h = line.find_first_of("#;"); h != std::string::npos)
            line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(line_no, "malformed section header '" + raw + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!known_section(section))
                throw ConfigError(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, "expected key = value, got '" + raw + "'");
        if (section.empty())
            throw ConfigError(line_no, "key outside of any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "empty key");
        const auto it = setters().find(section + "." + key);
        if (it == setters().end())
            throw ConfigError(line_no, "unknown key '" + key + "' in [" + section + "]");
        it->second(cfg, value, line_no);
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(line_no, e.what());
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void ScenarioConfig::validate() const {
    auto req = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    req(gamma_raman_hz > 0, "gamma_raman_hz must be > 0");
    req(gamma_opt_hz > 0, "gamma_opt_hz must be > 0");
    req(gamma_pol_hz > 0, "gamma_pol_hz must be > 0");
    req(rabi_coupling_hz >= 0, "rabi_coupling_hz must be >= 0");
    req(rabi_probe_hz >= 0, "rabi_probe_hz must be >= 0");
    req(!rabi_coupling_read_hz || *rabi_coupling_read_hz >= 0,
        "rabi_coupling_read_hz must be >= 0");
    req(cell_length_m > 0, "cell_length_m must be > 0");
    req(absorption_depth >= 0, "absorption_depth must be >= 0");
    req(n_slices >= 1, "n_slices must be >= 1");
    req(pumped_fraction > 0 && pumped_fraction <= 1, "pumped_fraction must be in (0, 1]");
    req(coupling_beer_alpha >= 0, "coupling_beer_alpha must be >= 0");
    req(probe_rise_time_s > 0, "probe_rise_time_s must be > 0");
    req(probe_cutoff_time_s > 0, "probe_cutoff_time_s must be > 0");
    req(coupling_off_time_s >= probe_cutoff_time_s,
        "coupling_off_time_s must be >= probe_cutoff_time_s");
    req(storage_time_s >= 0, "storage_time_s must be >= 0");
    req(ramp_time_s > 0, "ramp_time_s must be > 0");
    req(hwhm_hz >= 0, "hwhm_hz must be >= 0");
    req(n_classes >= 1 && n_classes % 2 == 1, "n_classes must be odd and >= 1");
    req(span_sigmas > 0, "span_sigmas must be > 0");
    req(!effective_gamma_override_hz || *effective_gamma_override_hz > 0,
        "effective_gamma_override_hz must be > 0");
    req(lo_intensity > 0, "lo_intensity must be > 0");
    req(contrast > 0 && contrast <= 2, "contrast must be in (0, 2]");
    req(scan_frequency_hz > 0, "scan_frequency_hz must be > 0");
    req(scan_amplitude_rad > 0, "scan_amplitude_rad must be > 0");
    req(sample_rate_hz > 0, "sample_rate_hz must be > 0");
    req(noise_rms >= 0, "noise_rms must be >= 0");
    req(n_phases >= 8, "n_phases must be >= 8");
    req(dt_s > 0, "dt_s must be > 0");
    req(retrieval_duration_s >= 0, "retrieval_duration_s must be >= 0");
    req(sweep_points >= 1, "sweep_points must be >= 1");
}

LambdaParams ScenarioConfig::to_lambda_params() const {
    LambdaParams p;
    p.gamma_opt = hz_to_angular(gamma_opt_hz);
    p.gamma_raman = hz_to_angular(gamma_raman_hz);
    p.gamma_pol = hz_to_angular(gamma_pol_hz);
    p.rabi_coupling = std::polar(hz_to_angular(rabi_coupling_hz), rabi_coupling_phase_rad);
    p.rabi_coupling_read =
        std::polar(hz_to_angular(rabi_coupling_read_hz.value_or(rabi_coupling_hz)),
                   rabi_coupling_read_phase_rad);
    p.rabi_probe = std::polar(hz_to_angular(rabi_probe_hz), rabi_probe_phase_rad);
    p.detuning_probe = hz_to_angular(detuning_probe_hz);
    p.detuning_coupling = hz_to_angular(detuning_coupling_hz);
    return p;
}

CellConfig ScenarioConfig::to_cell() const {
    CellConfig c;
    c.length = cell_length_m;
    c.absorption_depth = absorption_depth;
    c.n_slices = n_slices;
    c.pumped_fraction = pumped_fraction;
    c.attenuate_coupling = attenuate_coupling;
    c.coupling_beer_alpha = coupling_beer_alpha;
    return c;
}

FieldTimeline ScenarioConfig::to_timeline() const {
    FieldTimeline t;
    t.probe_rise_time = probe_rise_time_s;
    t.probe_cutoff_time = probe_cutoff_time_s;
    t.probe_peak_rabi = std::polar(hz_to_angular(rabi_probe_hz), rabi_probe_phase_rad);
    t.coupling_on_rabi = std::polar(hz_to_angular(rabi_coupling_hz), rabi_coupling_phase_rad);
    t.coupling_off_time = coupling_off_time_s;
    t.storage_time = storage_time_s;
    t.coupling_read_rabi =
        std::polar(hz_to_angular(rabi_coupling_read_hz.value_or(rabi_coupling_hz)),
                   rabi_coupling_read_phase_rad);
    t.ramp_time = ramp_time_s;
    return t;
}

VelocityGrid ScenarioConfig::to_grid() const {
    return make_grid(hz_to_angular(hwhm_hz), n_classes, span_sigmas);
}

HomodyneConfig ScenarioConfig::to_homodyne() const {
    HomodyneConfig h;
    h.lo_intensity = lo_intensity;
    h.contrast = contrast;
    h.scan_frequency = scan_frequency_hz;
    h.scan_amplitude = scan_amplitude_rad;
    h.sample_rate = sample_rate_hz;
    h.noise_rms = noise_rms;
    return h;
}

RunOptions ScenarioConfig::to_run_options() const {
    RunOptions r;
    r.dt = dt_s;
    r.retrieval_duration = retrieval_duration_s;
    return r;
}

std::string to_string(ScenarioConfig::SweepAxis axis) {
    switch (axis) {
        case ScenarioConfig::SweepAxis::detuning: return "detuning";
        case ScenarioConfig::SweepAxis::storage_time: return "storage_time";
        case ScenarioConfig::SweepAxis::coupling_power: return "coupling_power";
    }
    throw std::logic_error("unreachable sweep axis");
}

std::string to_string(ScenarioConfig::SweepMode mode) {
    switch (mode) {
        case ScenarioConfig::SweepMode::simulate: return "simulate";
        case ScenarioConfig::SweepMode::closed_form: return "closed_form";
    }
    throw std::logic_error("unreachable sweep mode");
}

std::string render_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    auto kv = [&](const char* key, double v) {
        out << key << " = " << format_double(v) << "\n";
    };
    out << "[system]\n";
    kv("gamma_raman_hz", cfg.gamma_raman_hz);
    kv("gamma_opt_hz", cfg.gamma_opt_hz);
    kv("gamma_pol_hz", cfg.gamma_pol_hz);
    kv("rabi_coupling_hz", cfg.rabi_coupling_hz);
    kv("rabi_coupling_phase_rad", cfg.rabi_coupling_phase_rad);
    if (cfg.rabi_coupling_read_hz) kv("rabi_coupling_read_hz", *cfg.rabi_coupling_read_hz);
    kv("rabi_coupling_read_phase_rad", cfg.rabi_coupling_read_phase_rad);
    kv("rabi_probe_hz", cfg.rabi_probe_hz);
    kv("rabi_probe_phase_rad", cfg.rabi_probe_phase_rad);
    kv("detuning_probe_hz", cfg.detuning_probe_hz);
    kv("detuning_coupling_hz", cfg.detuning_coupling_hz);
    out << "\n[cell]\n";
    kv("cell_length_m", cfg.cell_length_m);
    kv("absorption_depth", cfg.absorption_depth);
    out << "n_slices = " << cfg.n_slices << "\n";
    kv("pumped_fraction", cfg.pumped_fraction);
    out << "attenuate_coupling = " << (cfg.attenuate_coupling ? "true" : "false") << "\n";
    kv("coupling_beer_alpha", cfg.coupling_beer_alpha);
    out << "\n[timeline]\n";
    kv("probe_rise_time_s", cfg.probe_rise_time_s);
    kv("probe_cutoff_time_s", cfg.probe_cutoff_time_s);
    kv("coupling_off_time_s", cfg.coupling_off_time_s);
    kv("storage_time_s", cfg.storage_time_s);
    kv("ramp_time_s", cfg.ramp_time_s);
    out << "\n[doppler]\n";
    kv("hwhm_hz", cfg.hwhm_hz);
    out << "n_classes = " << cfg.n_classes << "\n";
    kv("span_sigmas", cfg.span_sigmas);
    if (cfg.effective_gamma_override_hz)
        kv("effective_gamma_override_hz", *cfg.effective_gamma_override_hz);
    out << "\n[homodyne]\n";
    kv("lo_intensity", cfg.lo_intensity);
    kv("contrast", cfg.contrast);
    kv("scan_frequency_hz", cfg.scan_frequency_hz);
    kv("scan_amplitude_rad", cfg.scan_amplitude_rad);
    kv("sample_rate_hz", cfg.sample_rate_hz);
    kv("noise_rms", cfg.noise_rms);
    out << "n_phases = " << cfg.n_phases << "\n";
    out << "\n[run]\n";
    out << "seed = " << cfg.seed << "\n";
    kv("dt_s", cfg.dt_s);
    kv("retrieval_duration_s", cfg.retrieval_duration_s);
    out << "\n[sweep]\n";
    out << "axis = " << to_string(cfg.sweep_axis) << "\n";
    out << "mode = " << to_string(cfg.sweep_mode) << "\n";
    kv("start", cfg.sweep_start);
    kv("stop", cfg.sweep_stop);
    out << "points = " << cfg.sweep_points << "\n";
    return out.str();
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << render_config(cfg);
}

}  // namespace eitstore
