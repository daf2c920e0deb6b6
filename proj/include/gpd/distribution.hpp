// distribution.hpp: Atomic GP distributions P_Z and P_H, their moments, the
// Holevo spread W and the degenerate-block decomposition machinery.
//
// P_Z(z) = Σ p_r q_s δ(z − Z[ψ_{r,s}])            mean GP: arg ⟨z⟩_Z
// P_H(s) = Σ p_r q_s δ(e^{is} − Z/|Z|)             mean GP: arg ⟨e^{is}⟩_H
// W      = |⟨e^{iβ}⟩|⁻² − 1
//
// Atoms are kept exactly as weighted lists; nothing is binned or merged
// unless merge_atoms() is called.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "gpd/channels.hpp"
#include "gpd/hilbert.hpp"
#include "gpd/phase.hpp"

namespace gpd {

enum class DistributionKind { kZ, kH };

struct Atom {
    double weight;
    Complex value;
    std::size_t label_r = 0;
    std::size_t label_s = 0;
};

class PhaseDistribution {
public:
    PhaseDistribution(DistributionKind kind, std::vector<Atom> atoms);

    DistributionKind kind() const { return kind_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double total_weight() const;

private:
    DistributionKind kind_;
    std::vector<Atom> atoms_;
};

// One atom per trajectory: Z[ψ] for kZ (a vanishing Z is a legal atom) or
// Z/|Z| for kH (a vanishing Z raises UndefinedGP).
PhaseDistribution build_distribution(const std::vector<WeightedTrajectory>& trajs,
                                     DistributionKind kind,
                                     PhaseQuadrature rule = PhaseQuadrature::kConnection);

// P_H from the atoms of a P_Z distribution.
PhaseDistribution to_holevo(const PhaseDistribution& pz);

// Coincident atoms (|Δvalue| ≤ tol) combined into one with summed weight.
PhaseDistribution merge_atoms(const PhaseDistribution& dist, double tol = 1e-12);

struct MomentReport {
    DistributionKind kind;
    // Z-measure side, filled for kZ distributions.
    std::vector<Complex> z_moments;     // ⟨zⁿ⟩_Z, n = 1..n_max
    std::vector<Complex> z_normalized;  // ⟨zⁿ⟩_Z / |⟨z⟩_Z|ⁿ
    std::optional<double> mean_gp_z;    // arg ⟨z⟩_Z in (-π, π]
    // H-measure side; for kZ it is derived from the normalized atoms when no
    // atom vanishes.
    std::vector<Complex> h_moments;     // ⟨e^{ins}⟩_H
    std::optional<Complex> mean_gp_h;   // ⟨e^{iβ}⟩
    std::optional<double> spread_w;     // |⟨e^{iβ}⟩|⁻² − 1
};

MomentReport moments(const PhaseDistribution& dist, std::size_t n_max = 2);

// W from a first H-moment; zero when |m| ≥ 1 through rounding.
double holevo_spread(Complex first_h_moment);

// D(E)·Σ_{r∈block} p_r ⟨ψ_S|⟨r|U|r⟩|ψ_S⟩, the contribution of one
// degeneracy block to ⟨z⟩_Z. `block` lists reservoir indices; they must share
// one energy or InvalidBlock is thrown.
Complex block_first_moment(const CMatrix& joint_u, const ReservoirSpec& res, const CVector& psi_s,
                           const std::vector<std::size_t>& block, Complex dynamic_factor);

// P_Z whose atoms use a dynamic-phase factor shared by each energy shell:
// z_r = D(E_r) ⟨ψ_S|⟨r|U|r⟩|ψ_S⟩.
PhaseDistribution common_phase_distribution(const CMatrix& joint_u, const ReservoirSpec& res,
                                            const CVector& psi_s,
                                            const std::function<Complex(double)>& dynamic_factor);

// D(E) = exp(-i ∫ Im⟨φ|φ̇⟩/⟨φ|φ⟩) for the uncoupled path φ(t) = e^{-iEt} U_S(t)|ψ_S⟩.
Complex uncoupled_dynamic_factor(const std::vector<CMatrix>& u_s, const TimeGrid& grid,
                                 const CVector& psi_s, double energy);

struct BlockRotation {
    std::size_t block;  // index into ReservoirSpec::blocks()
    CMatrix unitary;    // acts on the block's weighted states
};

// New pure-state decomposition of the same ρ_R: within each listed block the
// vectors √p_k|r_k⟩ are mixed by the unitary, √p'_j|r'_j⟩ = Σ_k V_jk √p_k|r_k⟩.
// Zero-weight results are dropped. Throws InvalidDecomposition when ρ_R is
// not reproduced within 1e-12.
ReservoirSpec redecompose(const ReservoirSpec& res, const std::vector<BlockRotation>& rotations);

// Haar-random unitary (QR of a complex Ginibre matrix with phase fix).
CMatrix haar_unitary(std::size_t dim, std::mt19937_64& rng);
// Haar-random real orthogonal matrix.
CMatrix random_orthogonal(std::size_t dim, std::mt19937_64& rng);

} // namespace gpd
