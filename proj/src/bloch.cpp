#include "eitstore/bloch.hpp"

#include <cmath>

#include "eitstore/ode.hpp"
#include "eitstore/units.hpp"

namespace eitstore {

RamanCoherence steady_state_raman_coherence(const LambdaParams& p) {
    p.validate();
    const complexd denom =
        (complexd(p.gamma_raman, p.raman_detuning())) * (complexd(p.gamma_opt, p.detuning_probe)) +
        std::norm(p.rabi_coupling);
    if (std::abs(denom) < 1e-30)
        throw DegenerateDenominatorError(
            "steady_state_raman_coherence: degenerate denominator (unphysical parameter set)");
    return {-p.rabi_coupling * std::conj(p.rabi_probe) / denom, CoherenceFrame::rotating};
}

double eit_phase_shift(const LambdaParams& p) {
    const double denom = std::norm(p.rabi_coupling) + p.gamma_raman * p.gamma_opt;
    if (!(denom > 0.0))
        throw std::invalid_argument("eit_phase_shift: |Omega_C|^2 + Gamma_R Gamma must be > 0");
    return std::atan(p.gamma_raman * p.detuning_probe / denom);
}

Eigen::Matrix3cd build_hamiltonian(complexd omega_c, complexd omega_p, double delta_p,
                                   double delta_c) {
    Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
    h(kLevelE, kLevelMinus) = omega_c;
    h(kLevelMinus, kLevelE) = std::conj(omega_c);
    h(kLevelE, kLevelPlus) = omega_p;
    h(kLevelPlus, kLevelE) = std::conj(omega_p);
    h(kLevelE, kLevelE) = -delta_p;
    h(kLevelMinus, kLevelMinus) = -(delta_p - delta_c);
    return h;
}

Eigen::Matrix3cd master_equation_rhs(const Eigen::Matrix3cd& rho,
                                     const Eigen::Matrix3cd& hamiltonian,
                                     const LambdaParams& p) {
    const complexd minus_i(0.0, -1.0);
    Eigen::Matrix3cd d = minus_i * (hamiltonian * rho - rho * hamiltonian);

    d(kLevelE, kLevelMinus) -= p.gamma_opt * rho(kLevelE, kLevelMinus);
    d(kLevelMinus, kLevelE) -= p.gamma_opt * rho(kLevelMinus, kLevelE);
    d(kLevelE, kLevelPlus) -= p.gamma_opt * rho(kLevelE, kLevelPlus);
    d(kLevelPlus, kLevelE) -= p.gamma_opt * rho(kLevelPlus, kLevelE);

    d(kLevelMinus, kLevelPlus) -= p.gamma_raman * rho(kLevelMinus, kLevelPlus);
    d(kLevelPlus, kLevelMinus) -= p.gamma_raman * rho(kLevelPlus, kLevelMinus);

    // Excited population decays at gamma, repopulating the two ground
    // sublevels 50/50 (trace preserving).
    const complexd pop_e = rho(kLevelE, kLevelE);
    d(kLevelE, kLevelE) -= p.gamma_pol * pop_e;
    d(kLevelMinus, kLevelMinus) += 0.5 * p.gamma_pol * pop_e;
    d(kLevelPlus, kLevelPlus) += 0.5 * p.gamma_pol * pop_e;
    return d;
}

Matrix9cd liouvillian(const Eigen::Matrix3cd& hamiltonian, const LambdaParams& p) {
    Matrix9cd l;
    for (int k = 0; k < 9; ++k) {
        Eigen::Matrix3cd basis = Eigen::Matrix3cd::Zero();
        basis(k / 3, k % 3) = 1.0;
        const Eigen::Matrix3cd col = master_equation_rhs(basis, hamiltonian, p);
        for (int j = 0; j < 9; ++j) l(j, k) = col(j / 3, j % 3);
    }
    return l;
}

DensityMatrix3 steady_state_full(const LambdaParams& p) {
    const Eigen::Matrix3cd h = build_hamiltonian(p.rabi_coupling, p.rabi_probe,
                                                 p.detuning_probe, p.detuning_coupling);
    Matrix9cd a = liouvillian(h, p);
    // Replace the first row with the unit-trace constraint.
    Vector9cd b = Vector9cd::Zero();
    for (int k = 0; k < 9; ++k) a(0, k) = (k % 4 == 0) ? 1.0 : 0.0;
    b(0) = 1.0;
    const Vector9cd x = a.fullPivLu().solve(b);
    DensityMatrix3 rho;
    for (int j = 0; j < 9; ++j) rho.m(j / 3, j % 3) = x(j);
    return rho;
}

std::vector<TrajectorySample> evolve_density_matrix(const DensityMatrix3& rho0,
                                                    const FieldTimeline& timeline,
                                                    const LambdaParams& p, double t_begin,
                                                    double t_end, double dt_max) {
    p.validate();
    timeline.validate();
    if (!(t_end >= t_begin))
        throw std::invalid_argument("evolve_density_matrix: t_span must be ordered");
    if (!(dt_max > 0.0)) throw std::invalid_argument("evolve_density_matrix: dt_max must be > 0");

    std::vector<double> events;
    for (double ev : timeline.event_times())
        if (ev > t_begin && ev < t_end) events.push_back(ev);

    auto rhs = [&](double t, const Eigen::Matrix3cd& rho) {
        const auto fields = timeline.at(t);
        const Eigen::Matrix3cd h = build_hamiltonian(fields.coupling, fields.probe,
                                                     p.detuning_probe, p.detuning_coupling);
        return Eigen::Matrix3cd(master_equation_rhs(rho, h, p));
    };

    OdeOptions opt;
    opt.dt_max = dt_max;
    std::vector<TrajectorySample> trajectory;
    integrate_dopri5(
        rhs, Eigen::Matrix3cd(rho0.m), t_begin, t_end, opt,
        [&](double t, const Eigen::Matrix3cd& y) {
            trajectory.push_back({t, DensityMatrix3{0.5 * (y + y.adjoint())}});
        },
        events);
    return trajectory;
}

RetrievedAmplitude retrieval_first_order(complexd sigma_raman, complexd omega_c2, double t) {
    if (t < 0.0) throw std::invalid_argument("retrieval_first_order: t must be >= 0");
    RetrievedAmplitude out;
    out.amplitude = complexd(0.0, -1.0) * omega_c2 * std::conj(sigma_raman) * t;
    out.relative_phase = wrap_angle(std::arg(omega_c2) - std::arg(sigma_raman));
    return out;
}

}  // namespace eitstore
