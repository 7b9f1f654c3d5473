#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "eitstore/analysis.hpp"
#include "eitstore/rng.hpp"
#include "eitstore/units.hpp"

using namespace eitstore;

namespace {

std::vector<EfficiencyPoint> exponential_points(double amplitude, double td, int n,
                                                double t0 = 1e-6, double t1 = 30e-6) {
    std::vector<EfficiencyPoint> pts;
    for (int i = 0; i < n; ++i) {
        const double tau = t0 + (t1 - t0) * i / (n - 1);
        pts.push_back({tau, 0.0, amplitude * std::exp(-tau / td)});
    }
    return pts;
}

SimulationResult synthetic_result() {
    // Leak pulse (amplitude 0.6) then a retrieved pulse (amplitude 0.3),
    // against a unit-amplitude reference pulse occupying the leak span.
    SimulationResult r;
    const int n = 4001;
    const double T = 20e-6;
    for (int i = 0; i < n; ++i) {
        const double t = T * i / (n - 1);
        r.time.push_back(t);
        std::complex<double> out = 0.0, ref = 0.0;
        if (t < 8e-6) {
            out = 0.6;
            ref = 1.0;
        } else if (t > 11e-6 && t < 15e-6) {
            out = 0.3;
        }
        r.probe_out.push_back(out);
        r.reference_out.push_back(ref);
        r.coupling_on.push_back(t < 8e-6 || t > 11e-6);
    }
    r.leak_window = {0.0, 8e-6};
    r.retrieved_window = {11e-6, 15e-6};
    return r;
}

}  // namespace

TEST_CASE("storage_efficiency: zero retrieved signal") {
    auto r = synthetic_result();
    for (std::size_t i = 0; i < r.time.size(); ++i)
        if (r.time[i] > 10e-6) r.probe_out[i] = 0.0;
    CHECK(storage_efficiency(r) == 0.0);
}

TEST_CASE("storage_efficiency: retrieved equal to reference gives 1") {
    SimulationResult r;
    const int n = 1001;
    for (int i = 0; i < n; ++i) {
        const double t = 10e-6 * i / (n - 1);
        r.time.push_back(t);
        const std::complex<double> v = (t > 6e-6) ? 0.5 : 0.0;
        r.probe_out.push_back(v);
        r.reference_out.push_back((t > 6e-6) ? 0.5 : 0.0);
        r.coupling_on.push_back(1);
    }
    r.leak_window = {0.0, 5e-6};
    r.retrieved_window = {6e-6, 10e-6};
    CHECK(storage_efficiency(r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("storage_efficiency: area ratio on synthetic pulses") {
    // retrieved energy = 0.3^2 * 4us; reference energy = 1 * 8us -> 0.045
    auto r = synthetic_result();
    CHECK(storage_efficiency(r) == doctest::Approx(0.09 * 4.0 / 8.0).epsilon(1e-3));
}

TEST_CASE("storage_efficiency: intensity-trace overload matches") {
    auto r = synthetic_result();
    std::vector<double> ip, ref;
    for (std::size_t i = 0; i < r.time.size(); ++i) {
        ip.push_back(std::norm(r.probe_out[i]));
        ref.push_back(std::norm(r.reference_out[i]));
    }
    const double a = storage_efficiency(r);
    const double b = storage_efficiency(r.time, ip, r.retrieved_window, r.time, ref);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("leak_level: transparent and absorbing limits") {
    auto r = synthetic_result();
    // transparent: leak equals reference
    for (std::size_t i = 0; i < r.time.size(); ++i) r.probe_out[i] = r.reference_out[i];
    CHECK(leak_level(r) == doctest::Approx(1.0).epsilon(1e-12));
    for (auto& v : r.probe_out) v = 0.0;
    CHECK(leak_level(r) == 0.0);
}

TEST_CASE("leak_level: matches an independent quadrature") {
    auto r = synthetic_result();
    // direct trapezoid of |out|^2 / |ref|^2 over the leak window
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < r.time.size(); ++i) {
        if (!(r.time[i] >= 0.0 && r.time[i + 1] <= 8e-6)) continue;
        const double dt = r.time[i + 1] - r.time[i];
        num += 0.5 * dt * (std::norm(r.probe_out[i]) + std::norm(r.probe_out[i + 1]));
        den += 0.5 * dt * (std::norm(r.reference_out[i]) + std::norm(r.reference_out[i + 1]));
    }
    CHECK(leak_level(r) == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("decay fit: exact synthetic data recovered") {
    auto fit = fit_exponential_decay(exponential_points(0.2, 11e-6, 12));
    CHECK(fit.decaying);
    CHECK(fit.decay_time == doctest::Approx(11e-6).epsilon(1e-3));
    CHECK(fit.amplitude == doctest::Approx(0.2).epsilon(1e-3));
    CHECK(fit.rms_residual < 1e-12);
}

TEST_CASE("decay fit: constant data flagged non-decaying") {
    std::vector<EfficiencyPoint> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({1e-6 * (i + 1), 0.0, 0.11});
    auto fit = fit_exponential_decay(pts);
    CHECK(!fit.decaying);
    CHECK(std::isinf(fit.decay_time));
    CHECK(fit.amplitude == doctest::Approx(0.11).epsilon(1e-6));
}

TEST_CASE("decay fit: robust to 5% multiplicative noise") {
    // 95th percentile of |T_fit - T_true|/T_true over 100 seeds must be < 10%
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto pts = exponential_points(0.2, 11e-6, 12);
        for (std::size_t i = 0; i < pts.size(); ++i)
            pts[i].efficiency *= 1.0 + 0.05 * counter_gaussian(seed, 500, i);
        auto fit = fit_exponential_decay(pts);
        errors.push_back(std::abs(fit.decay_time - 11e-6) / 11e-6);
    }
    std::sort(errors.begin(), errors.end());
    CHECK(errors[94] < 0.10);
}

TEST_CASE("decay fit: scale equivariance") {
    auto pts = exponential_points(0.2, 7.3e-6, 10);
    auto base = fit_exponential_decay(pts);
    for (auto& p : pts) p.efficiency *= 3.7;
    auto scaled = fit_exponential_decay(pts);
    CHECK(scaled.decay_time == doctest::Approx(base.decay_time).epsilon(1e-9));
    CHECK(scaled.amplitude == doctest::Approx(3.7 * base.amplitude).epsilon(1e-9));
}

TEST_CASE("decay fit: too few points rejected") {
    CHECK_THROWS_AS((void)fit_exponential_decay(exponential_points(0.2, 11e-6, 2)), FitError);
}

TEST_CASE("raman rate convention: 11.4 us decay maps to 14 kHz") {
    const double td = 1.0 / hz_to_angular(14e3);  // 11.37 us
    CHECK(angular_to_hz(raman_rate_from_decay_time(td)) == doctest::Approx(14e3).epsilon(1e-12));
    CHECK(td * 1e6 == doctest::Approx(11.37).epsilon(1e-2));
}

TEST_CASE("phase curve: frozen reference values") {
    const double gr = hz_to_angular(14e3);
    auto zero_power = phase_vs_detuning_curve(gr, hz_to_angular(0.4e9), 0.0,
                                              {0.0, hz_to_angular(2.2e9)});
    CHECK(zero_power[0].second == 0.0);
    CHECK(zero_power[1].second == doctest::Approx(1.3909428270024183).epsilon(1e-12));
    auto dashed = phase_vs_detuning_curve(gr, hz_to_angular(0.42e9), hz_to_angular(23e6),
                                          {hz_to_angular(2.2e9)});
    CHECK(dashed[0].second == doctest::Approx(0.057519490956362689).epsilon(1e-12));
}

TEST_CASE("phase curve: |.| of an odd function, monotone, bounded") {
    const double gr = hz_to_angular(14e3);
    std::vector<double> detunings;
    for (int i = -6; i <= 6; ++i) detunings.push_back(hz_to_angular(i * 0.5e9));
    auto curve = phase_vs_detuning_curve(gr, hz_to_angular(0.4e9), hz_to_angular(23e6),
                                         detunings);
    const std::size_t mid = curve.size() / 2;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        CHECK(curve[i].second >= 0.0);
        CHECK(curve[i].second < std::numbers::pi / 2);
        if (curve[i].first > 0.0) CHECK(curve[i].second >= curve[i - 1].second);
        CHECK(curve[i].second ==
              doctest::Approx(curve[curve.size() - 1 - i].second).epsilon(1e-12));
    }
    CHECK(curve[mid].second == 0.0);
}

TEST_CASE("phase curve: strictly decreasing in coupling power at fixed detuning") {
    const double gr = hz_to_angular(14e3);
    const std::vector<double> d{hz_to_angular(2.2e9)};
    double prev = phase_vs_detuning_curve(gr, hz_to_angular(0.4e9), 0.0, d)[0].second;
    for (double mhz : {5.0, 23.0, 46.0, 80.0}) {
        double cur =
            phase_vs_detuning_curve(gr, hz_to_angular(0.4e9), hz_to_angular(mhz * 1e6), d)[0]
                .second;
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("diagnostics: optical depth and adiabaticity arithmetic") {
    CHECK(optical_depth(7.0) == 3.5);
    CHECK(optical_depth(0.0) == 0.0);
    CHECK(optical_depth(6.8) == 3.4);
    CHECK_THROWS_AS((void)optical_depth(-1.0), std::invalid_argument);
    CHECK(adiabaticity_parameter(2e-6, 3.5, 1.4e8) == 980.0);
    CHECK(adiabaticity_parameter(4e-6, 3.5, 1.4e8) == 1960.0);
    CHECK(adiabaticity_parameter(0.0, 3.5, 1.4e8) == 0.0);
    CHECK(adiabaticity_parameter(2e-6, 0.0, 1.4e8) == 0.0);
}
