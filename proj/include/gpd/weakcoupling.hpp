// weakcoupling.hpp: Second-order expansion of the geometric phase for a
// weakly coupled reservoir.
//
// With U_SR = U_S U_R Ũ and Ũ = 1 + A + B + O(H_I³) in the interaction picture,
//
//   A(t) = -i ∫₀ᵗ H̃_I,     B(t) = -∫₀ᵗ dt' ∫₀^{t'} dt'' H̃_I(t') H̃_I(t''),
//
// and, provided ⟨r|R_μ|r⟩ = 0 for every reservoir state, Z[ψ_r] =
// Z[ψ_S](1 + ⟨ΔZ⟩_{r,S}) with
//
//   ΔZ = U_S B / ⟨U_S⟩_S − (B − B†)/2 + i ∫₀ᵗ (B†ΔH̃_S + ΔH̃_S B) dt'.
//
// B and ΔH̃_S inside the integral are both taken at the running time t'.

#pragma once

#include <cstddef>
#include <vector>

#include "gpd/channels.hpp"
#include "gpd/hilbert.hpp"
#include "gpd/phase.hpp"

namespace gpd::weak {

// One term of H_I = -Σ_μ R_μ ⊗ S_μ; r acts on H_R, s on H_S.
struct Coupling {
    CMatrix r;
    CMatrix s;
};

class WeakCouplingModel {
public:
    // `res` must consist of eigenstates of h_r with matching energies.
    WeakCouplingModel(Schedule h_s, CMatrix h_r, std::vector<Coupling> couplings,
                      ReservoirSpec res, CVector psi_s);

    const Schedule& h_s() const { return h_s_; }
    const CMatrix& h_r() const { return h_r_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }
    const ReservoirSpec& reservoir() const { return res_; }
    const CVector& psi_s() const { return psi_s_; }
    std::size_t dim_s() const { return h_s_.dim(); }
    std::size_t dim_r() const { return static_cast<std::size_t>(h_r_.rows()); }

    // Joint H_I = -Σ S_μ ⊗ R_μ (system index outer).
    CMatrix interaction() const;
    // H_S(t) ⊗ 1 + 1 ⊗ H_R + H_I
    Schedule joint_hamiltonian() const;

    // max_{r,μ} |⟨r|R_μ|r⟩|
    double rcond_violation() const;
    // Throws RCondViolated when rcond_violation() > tol.
    void require_rcond(double tol = 1e-10) const;

    // Same model with every coupling scaled by λ.
    WeakCouplingModel scaled(double lambda) const;
    // Same model over a different reservoir decomposition.
    WeakCouplingModel with_reservoir(ReservoirSpec res) const;

private:
    Schedule h_s_;
    CMatrix h_r_;
    std::vector<Coupling> couplings_;
    ReservoirSpec res_;
    CVector psi_s_;
};

// Operators sampled on a grid. The joint-space members (h_i_tilde, a, b) are
// empty when the operators were reconstructed from a master equation, where
// only reservoir averages exist.
struct PerturbationOperators {
    TimeGrid grid;
    std::size_t dim_s = 0;
    std::size_t dim_r = 0;
    std::vector<CMatrix> u_s;        // U_S(t_k)
    std::vector<CMatrix> h_s_tilde;  // U_S† H_S U_S
    std::vector<CMatrix> h_i_tilde;  // U_R† U_S† H_I U_S U_R
    std::vector<CMatrix> a;          // A(t_k)
    std::vector<CMatrix> b;          // B(t_k)
    std::vector<CMatrix> b_avg;      // ⟨B⟩_R = Σ p_r ⟨r|B|r⟩
    std::vector<CMatrix> b_dot_avg;  // ⟨Ḃ⟩_R

    bool has_joint() const { return !b.empty(); }
};

// A by cumulative trapezoid of H̃_I; B = -i ∫ H̃_I A by a second cumulative
// trapezoid. Overall second order in the grid spacing.
PerturbationOperators build_ab(const WeakCouplingModel& model, const TimeGrid& grid);

// Reservoir averages recomputed for another decomposition of ρ_R.
void average_over(PerturbationOperators& ops, const ReservoirSpec& res);

// Markov-limit reconstruction: ⟨Ḃ⟩_R(t) = U_S†(−iΔH − Σ L†L)U_S, integrated
// on the grid. This is the identification below read backwards.
PerturbationOperators markov_operators(const LindbladModel& model, const TimeGrid& grid);

struct LindbladIdentification {
    CMatrix delta_h;      // ΔH
    CMatrix dissipation;  // Σ_α L_α†L_α
};

// Splits U_S⟨Ḃ⟩_R U_S† = -iΔH − Σ L†L at grid index k (default: last) into its
// anti-Hermitian and Hermitian parts. A dissipative part that is not positive
// semidefinite raises InconsistentModel.
LindbladIdentification lindblad_identification(const PerturbationOperators& ops);
LindbladIdentification lindblad_identification(const PerturbationOperators& ops, std::size_t k);

// ‖identification − model‖_F for both parts, summed.
double identification_mismatch(const LindbladIdentification& id, const LindbladModel& model);

// ⟨ΔZ⟩ over ρ_SR(0) at the end of the grid, from the reservoir-averaged B.
Complex delta_z(const PerturbationOperators& ops, const CVector& psi_s);
// Same, after checking the reservoir condition on the microscopic model.
Complex delta_z(const PerturbationOperators& ops, const WeakCouplingModel& model);
// ⟨ψ_S|⟨r|ΔZ|r⟩|ψ_S⟩ for a single reservoir state (needs joint operators).
Complex delta_z_conditional(const PerturbationOperators& ops, const CVector& psi_s,
                            const CVector& r);

// Geometric phase β[ψ_S] of the uncoupled path U_S(t)|ψ_S⟩.
double unperturbed_phase(const PerturbationOperators& ops, const CVector& psi_s);

inline constexpr double kPerturbativeGuard = 0.1;

// e^{inβ₀}(1 + i n Im⟨ΔZ⟩), shared by both measures at this order. Logs a
// warning when |Im⟨ΔZ⟩| exceeds kPerturbativeGuard.
Complex perturbative_moment(Complex delta_z, double beta0, int n);

} // namespace gpd::weak
