#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "eitstore/bloch.hpp"
#include "eitstore/doppler.hpp"
#include "eitstore/units.hpp"

using namespace eitstore;

namespace {

std::complex<double> coherence_response(double shift) {
    LambdaParams p;
    p.gamma_raman = hz_to_angular(14e3);
    p.gamma_opt = hz_to_angular(1.4e8 / two_pi);  // homogeneous linewidth
    p.gamma_pol = 1.4e8;
    p.rabi_coupling = hz_to_angular(23e6);
    p.rabi_probe = hz_to_angular(1e6);
    p = p.doppler_shifted(shift);  // both detunings move; delta_R invariant
    return steady_state_raman_coherence(p).value;
}

}  // namespace

TEST_CASE("make_grid: degenerate single-class grid") {
    auto g = make_grid(hz_to_angular(0.9e9), 1, 4.0);
    REQUIRE(g.classes.size() == 1);
    CHECK(g.classes[0].shift == 0.0);
    CHECK(g.classes[0].weight == 1.0);
}

TEST_CASE("make_grid: Gaussian width from the Doppler HWHM") {
    // sigma = hwhm / sqrt(2 ln 2); 0.9 GHz -> 764389620.2592171 Hz
    auto g = make_grid(hz_to_angular(0.9e9), 201, 4.0);
    const double sigma = g.hwhm / std::sqrt(2.0 * std::log(2.0));
    CHECK(angular_to_hz(sigma) == doctest::Approx(764389620.2592171).epsilon(1e-12));
    // grid spans +-4 sigma
    double max_shift = 0.0;
    for (const auto& c : g.classes) max_shift = std::max(max_shift, std::abs(c.shift));
    CHECK(max_shift == doctest::Approx(4.0 * sigma).epsilon(1e-12));
}

TEST_CASE("make_grid: weights positive, sum to 1, shifts symmetric") {
    for (int n : {1, 3, 21, 201}) {
        auto g = make_grid(hz_to_angular(0.9e9), n, 4.0);
        REQUIRE(static_cast<int>(g.classes.size()) == n);
        double sum = 0.0;
        for (const auto& c : g.classes) {
            CHECK(c.weight > 0.0);
            sum += c.weight;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        // shift set equals its own negation
        for (const auto& c : g.classes) {
            bool found = std::any_of(g.classes.begin(), g.classes.end(), [&](const auto& d) {
                return std::abs(d.shift + c.shift) <= 1e-9 * g.hwhm + 1e-30;
            });
            CHECK(found);
        }
    }
}

TEST_CASE("make_grid: even class count rejected") {
    CHECK_THROWS_AS((void)make_grid(hz_to_angular(0.9e9), 8, 4.0), std::invalid_argument);
    CHECK_THROWS_AS((void)make_grid(hz_to_angular(0.9e9), 0, 4.0), std::invalid_argument);
}

TEST_CASE("average_response: constant response passes through") {
    auto g = make_grid(hz_to_angular(0.9e9), 21, 4.0);
    auto avg = average_response(g, [](double) { return std::complex<double>{2.5, -1.0}; });
    CHECK(std::abs(avg - std::complex<double>{2.5, -1.0}) < 1e-12);
}

TEST_CASE("average_response: odd response on a symmetric grid cancels") {
    auto g = make_grid(hz_to_angular(0.9e9), 41, 4.0);
    auto avg = average_response(g, [](double x) { return std::complex<double>{x, x * x * x}; });
    CHECK(std::abs(avg.real()) < 1e-12 * g.hwhm);
    CHECK(std::abs(avg.imag()) < 1e-12 * std::pow(g.hwhm, 3));
}

TEST_CASE("average_response: quadrature converged at 201 classes") {
    auto g201 = make_grid(hz_to_angular(0.9e9), 201, 4.0);
    auto g401 = make_grid(hz_to_angular(0.9e9), 401, 4.0);
    auto a = average_response(g201, coherence_response);
    auto b = average_response(g401, coherence_response);
    CHECK(std::abs(a - b) < 1e-6 * std::abs(b));
}

TEST_CASE("average_response: magnitude monotone convergent in class count") {
    double prev_err = 1e300;
    auto ref = average_response(make_grid(hz_to_angular(0.9e9), 801, 4.0), coherence_response);
    for (int n : {51, 101, 201, 401}) {
        auto v = average_response(make_grid(hz_to_angular(0.9e9), n, 4.0), coherence_response);
        double err = std::abs(v - ref);
        CHECK(err <= prev_err * (1.0 + 1e-12));
        prev_err = err;
    }
}

TEST_CASE("effective_gamma: paper calibration factor 0.4/0.9") {
    auto g = make_grid(hz_to_angular(0.9e9), 21, 4.0);
    CHECK(angular_to_hz(effective_gamma(g)) == doctest::Approx(0.4e9).epsilon(1e-12));
}

TEST_CASE("effective_gamma: override wins") {
    auto g = make_grid(hz_to_angular(0.9e9), 21, 4.0);
    CHECK(effective_gamma(g, hz_to_angular(0.42e9)) == hz_to_angular(0.42e9));
}

TEST_CASE("effective_gamma: zero width maps to zero") {
    VelocityGrid g{{{0.0, 1.0}}, 0.0};
    CHECK(effective_gamma(g) == 0.0);
}

TEST_CASE("apply_pumped_fraction: all-pass at fraction 1, renormalized otherwise") {
    auto g = make_grid(hz_to_angular(0.9e9), 41, 4.0);
    auto full = apply_pumped_fraction(g, 1.0);
    REQUIRE(full.classes.size() == g.classes.size());
    for (std::size_t i = 0; i < g.classes.size(); ++i)
        CHECK(full.classes[i].weight == doctest::Approx(g.classes[i].weight).epsilon(1e-12));

    auto half = apply_pumped_fraction(g, 0.5);
    CHECK(half.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(half.classes.size() < g.classes.size());
    // central mass kept: every retained |shift| below every discarded |shift|
    double kept_max = 0.0;
    for (const auto& c : half.classes) kept_max = std::max(kept_max, std::abs(c.shift));
    int dropped_below = 0;
    for (const auto& c : g.classes)
        if (std::abs(c.shift) < kept_max - 1e-6) {
            bool kept = std::any_of(half.classes.begin(), half.classes.end(), [&](const auto& d) {
                return std::abs(d.shift - c.shift) < 1e-6;
            });
            if (!kept) ++dropped_below;
        }
    CHECK(dropped_below == 0);
}

TEST_CASE("doppler shift leaves the Raman detuning invariant") {
    LambdaParams p;
    p.gamma_raman = 1.0;
    p.gamma_opt = 2.0;
    p.gamma_pol = 3.0;
    p.detuning_probe = 5.0;
    p.detuning_coupling = 2.0;
    for (double s : {-3e9, 0.0, 7e8}) {
        CHECK(p.doppler_shifted(s).raman_detuning() == p.raman_detuning());
    }
}
