// channels.hpp: Open-system dynamics: Lindblad integration, Kraus channels and
// the conditional no-jump trajectories ⟨r|U_SR(t)|r⟩|ψ_s⟩.
//
// The master equation uses the normalization
//
//   ρ̇ = -i[H_S + ΔH, ρ] - Σ_α (L_α†L_α ρ + ρ L_α†L_α - 2 L_α ρ L_α†)
//
// with no factor ½ in front of the anticommutator; all rates are read in
// this convention.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "gpd/hilbert.hpp"
#include "gpd/phase.hpp"

namespace gpd {

struct ReservoirState {
    double weight;  // p_r
    CVector state;  // |r⟩, normalized
    double energy;  // E_r
};

inline constexpr double kEnergyRelTol = 1e-9;

// ρ_R(0) = Σ p_r |r⟩⟨r| with the states grouped into degeneracy blocks by
// energy. Eigen-mixtures are orthonormal; decompositions produced by
// redecompose() need not be, so orthonormality is only enforced on request.
class ReservoirSpec {
public:
    explicit ReservoirSpec(std::vector<ReservoirState> states, bool require_orthonormal = true);

    // Eigenstates of a Hermitian H_R with the given populations, in
    // ascending energy order.
    static ReservoirSpec from_hamiltonian(const CMatrix& h_r, const std::vector<double>& weights);

    // Single pure reservoir state.
    static ReservoirSpec pure(const CVector& r, double energy = 0.0);

    const std::vector<ReservoirState>& states() const { return states_; }
    std::size_t size() const { return states_.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(states_.front().state.size()); }
    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
    // Index of the block containing state i.
    std::size_t block_of(std::size_t i) const;

    CMatrix density() const;
    bool orthonormal(double tol = 1e-10) const;

private:
    std::vector<ReservoirState> states_;
    std::vector<std::vector<std::size_t>> blocks_;
};

// True when |a - b| < kEnergyRelTol · max(1, |a|, |b|).
bool same_energy(double a, double b);

struct SystemState {
    double weight;  // q_s
    CVector state;  // |ψ_s⟩
};

class SystemEnsemble {
public:
    explicit SystemEnsemble(std::vector<SystemState> states);
    static SystemEnsemble pure(const CVector& psi);

    const std::vector<SystemState>& states() const { return states_; }
    std::size_t dim() const { return static_cast<std::size_t>(states_.front().state.size()); }
    CMatrix density() const;

private:
    std::vector<SystemState> states_;
};

struct KrausElement {
    double weight;  // p_i
    Schedule op;    // K_i(t)
};

// ρ ↦ Σ p_i K_i(t) ρ K_i(t)†
class KrausChannel {
public:
    explicit KrausChannel(std::vector<KrausElement> elements);

    const std::vector<KrausElement>& elements() const { return elements_; }
    std::size_t dim() const { return elements_.front().op.dim(); }

    // ‖Σ p_i K_i(t)†K_i(t) − 1‖_F
    double completeness_error(double t) const;

private:
    std::vector<KrausElement> elements_;
};

class LindbladModel {
public:
    LindbladModel(Schedule h_s, CMatrix delta_h, std::vector<CMatrix> jumps);

    const Schedule& h_s() const { return h_s_; }
    const CMatrix& delta_h() const { return delta_h_; }
    const std::vector<CMatrix>& jumps() const { return jumps_; }
    std::size_t dim() const { return h_s_.dim(); }

    // Σ_α L_α†L_α
    CMatrix dissipator_sum() const;
    // H_S(t) + ΔH − i Σ L†L, the generator of the no-jump evolution.
    Schedule effective_hamiltonian() const;

private:
    Schedule h_s_;
    CMatrix delta_h_;
    std::vector<CMatrix> jumps_;
};

CMatrix lindblad_rhs(const CMatrix& rho, const LindbladModel& model, double t);

inline constexpr double kTraceDriftLimit = 1e-6;

// Classical RK4 on the grid, Hermiticity restored after every step. Throws
// IntegrationDiverged if the trace drifts by more than kTraceDriftLimit.
std::vector<CMatrix> integrate_lindblad(const LindbladModel& model, const CMatrix& rho0,
                                        const TimeGrid& grid);

inline constexpr double kCompletenessTol = 1e-9;

CMatrix apply_kraus(const KrausChannel& channel, const CMatrix& rho0, double t);

// Orthonormal basis with b_0 = r; the remaining vectors come from
// Gram–Schmidt over the standard basis with the largest-|r_i| vector dropped.
std::vector<CVector> adapted_basis(const CVector& r);

struct WeightedTrajectory {
    double weight;
    Trajectory trajectory;
    std::size_t label_r = 0;  // reservoir index or Kraus element index
    std::size_t label_s = 0;  // system ensemble index
};

// |ψ_{r,s}(t_k)⟩ = ⟨r|U_SR(t_k)|r⟩|ψ_s⟩ with weight p_r q_s. Only the
// b_R = 0 element of the adapted basis is kept.
std::vector<WeightedTrajectory> conditional_trajectories(const std::vector<CMatrix>& joint_u,
                                                         const TimeGrid& grid,
                                                         const ReservoirSpec& res,
                                                         const SystemEnsemble& sys);

// Every Kraus operator ⟨b_R(r)|U|r⟩ of the adapted basis for reservoir state
// r (element 0 is the kept one). Used to check the resummation of the
// discarded b_R ≠ 0 terms.
std::vector<CMatrix> conditional_kraus(const CMatrix& joint_u, const ReservoirSpec& res,
                                       std::size_t r_index, std::size_t dim_s);

// Trajectories K_i(t_k)|ψ⟩ with weights p_i. Elements that annihilate |ψ⟩
// at the first grid point (jump operators with K_i(0) = 0) carry no phase
// and are excluded.
std::vector<WeightedTrajectory> kraus_trajectories(const KrausChannel& channel,
                                                   const CVector& psi, const TimeGrid& grid);

// Smallest eigenvalue of the Hermitian part of ρ.
double min_eigenvalue(const CMatrix& rho);

} // namespace gpd
