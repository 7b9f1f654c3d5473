#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "eitstore/timeline.hpp"

namespace eitstore {

using complexd = std::complex<double>;
using Matrix9cd = Eigen::Matrix<complexd, 9, 9>;
using Vector9cd = Eigen::Matrix<complexd, 9, 1>;

// Basis ordering used everywhere: {|e>, |-1>, |+1>}.
inline constexpr int kLevelE = 0;
inline constexpr int kLevelMinus = 1;
inline constexpr int kLevelPlus = 2;

/// Physical rates and detunings of the three-level Lambda system.
/// All values are angular frequencies in rad/s.
struct LambdaParams {
    double gamma_opt = 0.0;    // optical coherence decay rate Gamma
    double gamma_raman = 0.0;  // Raman coherence decay rate Gamma_R
    double gamma_pol = 0.0;    // polarization decay rate gamma
    complexd rabi_coupling{0.0, 0.0};       // Omega_C (storage)
    complexd rabi_coupling_read{0.0, 0.0};  // Omega_C2 (readout)
    complexd rabi_probe{0.0, 0.0};          // Omega_P
    double detuning_probe = 0.0;            // Delta_P
    double detuning_coupling = 0.0;         // Delta_C

    // Raman (two-photon) detuning, by definition Delta_P - Delta_C.
    double raman_detuning() const { return detuning_probe - detuning_coupling; }

    void validate() const {
        if (!(gamma_opt > 0.0)) throw std::invalid_argument("LambdaParams: gamma_opt must be > 0");
        if (gamma_raman < 0.0) throw std::invalid_argument("LambdaParams: gamma_raman must be >= 0");
        if (!(gamma_pol > 0.0)) throw std::invalid_argument("LambdaParams: gamma_pol must be > 0");
    }

    // Same params with a Doppler shift added to both optical detunings
    // (co-propagating beams: the Raman detuning is invariant).
    LambdaParams doppler_shifted(double shift) const {
        LambdaParams q = *this;
        q.detuning_probe += shift;
        q.detuning_coupling += shift;
        return q;
    }
};

/// 3x3 complex density matrix of one atom / velocity class.
struct DensityMatrix3 {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();

    static DensityMatrix3 pure(int level) {
        DensityMatrix3 rho;
        rho.m(level, level) = 1.0;
        return rho;
    }

    double trace_real() const { return m.trace().real(); }

    double hermiticity_defect() const { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(0.5 * (m + m.adjoint()));
        return es.eigenvalues().minCoeff();
    }

    // Ground-state (Raman) coherence sigma_{1,-1} = <+1| rho |-1>.
    complexd raman_coherence() const { return m(kLevelPlus, kLevelMinus); }
    // Probe-leg optical coherence sigma_{e,+1} = <e| rho |+1>.
    complexd probe_optical_coherence() const { return m(kLevelE, kLevelPlus); }
};

enum class CoherenceFrame { rotating, lab };

struct RamanCoherence {
    complexd value{0.0, 0.0};
    CoherenceFrame frame = CoherenceFrame::rotating;
};

struct DegenerateDenominatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Steady-state Raman coherence excited by a weak probe in the presence of
/// a strong coupling field (rotating frame):
///   sigma = -Omega_C Omega_P^* / [(Gamma_R + i delta_R)(Gamma + i Delta_P) + |Omega_C|^2]
RamanCoherence steady_state_raman_coherence(const LambdaParams& p);

/// Phase imprinted on the stored coherence at nonzero optical detuning,
/// at Raman resonance (delta_R ignored):
///   phi = arctan(Gamma_R Delta_P / (|Omega_C|^2 + Gamma_R Gamma))
/// Sign follows the sign of Delta_P; result in (-pi/2, pi/2).
double eit_phase_shift(const LambdaParams& p);

/// Rotating-frame Lambda Hamiltonian in units of angular frequency,
/// basis {|e>, |-1>, |+1>}. The coupling field drives |-1> <-> |e>,
/// the probe drives |+1> <-> |e>. With omega_p = 0 and zero detunings this
/// reduces to the bare readout Hamiltonian (single off-diagonal pair).
Eigen::Matrix3cd build_hamiltonian(complexd omega_c, complexd omega_p,
                                   double delta_p, double delta_c);

/// Right-hand side of the master equation
///   d rho/dt = -i [H, rho] + R(rho)
/// where R applies Gamma to optical coherences, Gamma_R to the Raman
/// coherence, and gamma to the excited population with 50/50 repopulation
/// of the two ground sublevels (trace preserving).
Eigen::Matrix3cd master_equation_rhs(const Eigen::Matrix3cd& rho,
                                     const Eigen::Matrix3cd& hamiltonian,
                                     const LambdaParams& p);

/// The same generator as a 9x9 matrix acting on the row-major flattened rho.
Matrix9cd liouvillian(const Eigen::Matrix3cd& hamiltonian, const LambdaParams& p);

/// Exact steady state of the full master equation (trace-normalized null
/// vector of the Liouvillian).
DensityMatrix3 steady_state_full(const LambdaParams& p);

struct TrajectorySample {
    double t = 0.0;
    DensityMatrix3 rho;
};

/// Integrate the master equation over t_span with the fields supplied by
/// `timeline`. Adaptive embedded Runge-Kutta; samples are the accepted step
/// end points plus all timeline event times inside the span.
std::vector<TrajectorySample> evolve_density_matrix(const DensityMatrix3& rho0,
                                                    const FieldTimeline& timeline,
                                                    const LambdaParams& p,
                                                    double t_begin, double t_end,
                                                    double dt_max);

struct RetrievedAmplitude {
    complexd amplitude{0.0, 0.0};  // Omega_r, arbitrary units
    double relative_phase = 0.0;   // arg Omega_C2 - arg sigma_{1,-1}, in (-pi, pi]
};

/// First-order perturbative retrieval: the readout coupling converts the
/// stored Raman coherence into an emitted amplitude growing linearly in t.
/// Valid for |Omega_C2| t <~ 1 (documented, not enforced).
RetrievedAmplitude retrieval_first_order(complexd sigma_raman, complexd omega_c2, double t);

}  // namespace eitstore
