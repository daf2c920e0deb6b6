// models.hpp: Two-level atom under spontaneous emission and under phase
// damping: Kraus channel factories, matching master equations, closed-form
// distributions and microscopic bath couplings.
//
// Basis ordering is (|g⟩, |e⟩), σ_z = |e⟩⟨e| − |g⟩⟨g| and H_S = −(ω/2)σ_z, so
// U_S(t) = diag(e^{-iωt/2}, e^{iωt/2}). The initial state is
// |ψ_S⟩ = cos(θ/2)|e⟩ + sin(θ/2)|g⟩.

#pragma once

#include <cstddef>
#include <utility>

#include "gpd/channels.hpp"
#include "gpd/distribution.hpp"
#include "gpd/hilbert.hpp"
#include "gpd/weakcoupling.hpp"

namespace gpd::models {

inline constexpr Eigen::Index kGround = 0;
inline constexpr Eigen::Index kExcited = 1;

CMatrix sigma_z();
CMatrix sigma_x();
CMatrix sigma_y();
CMatrix lowering();  // |g⟩⟨e|
CMatrix raising();   // |e⟩⟨g|
CMatrix excited_projector();
CMatrix ground_projector();
CVector initial_state(double theta);
Schedule atom_hamiltonian(double omega);

// 2π sin²(θ/2), on the branch continuous from θ = 0.
double closed_system_gp(double theta);

struct TwoLevelAtomParams {
    double omega = 1.0;
    double gamma0 = 0.0;
    double n_thermal = 0.0;
    double theta = 0.0;

    double gamma_n() const { return (2.0 * n_thermal + 1.0) * gamma0; }
    double period() const { return 2.0 * kPi / omega; }
    double p0() const { return (n_thermal + 1.0) / (2.0 * n_thermal + 1.0); }
    double p2() const { return n_thermal / (2.0 * n_thermal + 1.0); }
    void validate() const;
};

// K0..K3 with weights p0 = p1 = (n+1)/(2n+1), p2 = p3 = n/(2n+1).
KrausChannel se_kraus_channel(const TwoLevelAtomParams& p);

// L1 = √(γ0(n+1)) |g⟩⟨e|, L2 = √(γ0 n) |e⟩⟨g|.
LindbladModel se_lindblad_model(const TwoLevelAtomParams& p);

// Closed-form atoms after one period t = 2π/ω,
//   f± = −e^{−πγ_n/ω} ⟨e^{∓πγ_nσ_z/ω}⟩_S ⟨e^{∓2πγ_nσ_z/ω}⟩_S^{±iω/(2γ_n)}.
// With σ_z = |e⟩⟨e| − |g⟩⟨g| the no-jump element K0 (decaying |e⟩) lands on
// f+ and K2 (decaying |g⟩) on f−. The base of the complex power is a positive
// real expectation value, so the principal real logarithm is used.
struct SpontaneousEmissionAtoms {
    Complex f_plus;   // Z of the K0 branch, weight p0
    Complex f_minus;  // Z of the K2 branch, weight p2
    double p0;
    double p2;
};

SpontaneousEmissionAtoms se_closed_form_atoms(const TwoLevelAtomParams& p);

// (P_Z, P_H) after one period from the closed forms. At n = 0 only the K0
// atom is present.
std::pair<PhaseDistribution, PhaseDistribution> se_distributions(const TwoLevelAtomParams& p);

// Same distributions evaluated numerically: Kraus trajectories on a grid
// through the phase functional.
std::pair<PhaseDistribution, PhaseDistribution> se_numeric_distributions(
    const TwoLevelAtomParams& p, std::size_t steps_per_period = 4096);

// Zero-temperature GP π + (ω/2γ0) ln⟨ψ_S|e^{−2πγ0σ_z/ω}|ψ_S⟩.
double se_zero_temperature_gp(const TwoLevelAtomParams& p);

// Weak-coupling mean GP β[ψ_S] + π²(γ0/ω) sin²θ (unwrapped β[ψ_S]).
double se_weak_coupling_gp(const TwoLevelAtomParams& p);

// Vacuum radiation bath of `n_modes` two-level modes (Fock 0/1) coupled in
// the rotating-wave form H_I = −Σ_k g_k (a_k σ+ + a_k† σ−). The reservoir is
// the vacuum; the other Fock states are listed with zero weight.
weak::WeakCouplingModel se_vacuum_bath(const TwoLevelAtomParams& p, std::size_t n_modes = 3,
                                       double coupling = 0.01);

struct PhaseDampingParams {
    double omega = 1.0;
    double alpha = 0.0;
    double theta = 0.0;

    double period() const { return 2.0 * kPi / omega; }
    // (1 + √(1 − e^{−2αt}))^{1/2} ∈ [1, √2]
    double r_factor(double t) const;
    void validate() const;
};

// Two elements with weights ½, ½.
KrausChannel pd_kraus_channel(const PhaseDampingParams& p);

// Master equation reproducing pd_kraus_channel: L = (√α / 2) σ_z, which decays
// the coherence as e^{−αt} in this normalization.
LindbladModel pd_lindblad_model(const PhaseDampingParams& p);

struct PhaseDampingMoments {
    // exact two-atom values after one period
    Complex mean_gp_z;  // e^{i⟨β⟩} = ⟨z⟩/|⟨z⟩|
    Complex mean_gp_h;  // ⟨e^{iβ}⟩
    double spread_w;
    // first-order reference formulas in α/ω
    Complex reference_mean_gp_z;  // e^{iβ0}(1 + (2iπ²α/3ω) cosθ sin²θ)
    Complex reference_mean_gp_h;  // e^{iβ0}(1 + (2π²α/ω) sin²θ (i cosθ − (4/9) sin²θ))
    double reference_spread_w;    // 16π² sin⁴θ α/(9ω)
    // leading small-α behaviour of the exact two-atom spread, 16π³ sin⁴θ α/(9ω)
    double leading_spread_w;
    double beta0;                 // closed-system GP
};

PhaseDampingMoments pd_moments(const PhaseDampingParams& p, std::size_t steps_per_period = 4096);

// Dephasing bath H_I = σ_z Σ_k g_k a_k†a_k with modes truncated to
// `fock_levels` levels and populations thermal with mean occupation n̄.
weak::WeakCouplingModel pd_thermal_bath(const PhaseDampingParams& p, double n_mean,
                                        std::size_t n_modes = 2, std::size_t fock_levels = 3,
                                        double coupling = 0.01);

} // namespace gpd::models
