// phase.hpp: Geometric phase of a non-unitary, non-cyclic pure-state path
//
//   Z[ψ] = D[ψ] ⟨ψ(0)|ψ(t)⟩,   D[ψ] = exp(-i ∫ Im⟨ψ|ψ̇⟩/⟨ψ|ψ⟩ dt'),   β = arg Z.
//
// β is undefined when Z vanishes; z_functional throws UndefinedGP there
// instead of returning a meaningless angle.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gpd/hilbert.hpp"

namespace gpd {

// Sampled path |ψ(t_k)⟩ on a grid; norms may decay below one.
class Trajectory {
public:
    Trajectory(TimeGrid grid, std::vector<CVector> states);

    const TimeGrid& grid() const { return grid_; }
    const std::vector<CVector>& states() const { return states_; }
    const CVector& front() const { return states_.front(); }
    const CVector& back() const { return states_.back(); }
    std::size_t dim() const { return static_cast<std::size_t>(states_.front().size()); }

    // Smallest ‖ψ(t_k)‖ over the grid.
    double min_norm() const;

private:
    TimeGrid grid_;
    std::vector<CVector> states_;
};

// Builds U(t_k)|ψ0⟩ for a propagator sequence on `grid`.
Trajectory evolve(const std::vector<CMatrix>& propagators, const TimeGrid& grid,
                  const CVector& psi0);

enum class PhaseQuadrature {
    // Σ_k arg⟨ψ_k|ψ_{k+1}⟩: second order, exactly gauge invariant on the grid.
    kConnection,
    // Trapezoid over Im⟨ψ|ψ̇⟩/⟨ψ|ψ⟩ with centered differences (one-sided
    // second-order stencils at both ends).
    kTrapezoidCentered,
};

struct PhaseResult {
    Complex z;            // Z[ψ]
    double beta;          // principal arg Z in (-π, π]
    double dynamic_phase; // ∫ Im⟨ψ|ψ̇⟩/⟨ψ|ψ⟩ dt', so D = exp(-i·dynamic_phase)
    Complex overlap;      // ⟨ψ(0)|ψ(t)⟩
};

inline constexpr double kMinTrajectoryNorm = 1e-12;
inline constexpr double kDefaultZTolerance = 1e-9;

double dynamic_phase(const Trajectory& traj,
                     PhaseQuadrature rule = PhaseQuadrature::kConnection);

// |Z| below z_rel_tol·‖ψ(0)‖·‖ψ(t)‖ raises UndefinedGP.
PhaseResult z_functional(const Trajectory& traj,
                         PhaseQuadrature rule = PhaseQuadrature::kConnection,
                         double z_rel_tol = kDefaultZTolerance);

// e^{iα(t_k)} ψ(t_k); α given per grid point.
Trajectory gauge_transform(const Trajectory& traj, std::span<const double> alpha);
Trajectory gauge_transform(const Trajectory& traj, const std::function<double(double)>& alpha);

// arg in (-π, π]
double principal_arg(Complex z);
double principal_angle(double angle);

// Representative of `angle` (mod 2π) nearest to `reference`.
double unwrap_near(double angle, double reference);

// Continuous branch along a sweep: each value is moved by multiples of 2π to
// the branch nearest its predecessor. The first value is kept as is.
std::vector<double> unwrap_sequence(std::span<const double> angles);

} // namespace gpd
