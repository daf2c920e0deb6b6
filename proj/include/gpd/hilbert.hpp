// hilbert.hpp: Dense complex linear algebra and time-ordered propagation
//
// Tensor-product convention: on H_S ⊗ H_R the system index is the slow
// (outer) index, i.e. joint index = s * dim_R + r. kron(A_S, B_R), partial
// traces and partial inner products all follow this layout.

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gpd {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

// Uniform time grid [t_start, t_end] split into n_steps intervals.
class TimeGrid {
public:
    TimeGrid(double t_start, double t_end, std::size_t n_steps);

    // Grid over [0, periods * 2π/ω] with `steps_per_period` steps each.
    static TimeGrid periods(double omega, double periods = 1.0,
                            std::size_t steps_per_period = 4096);

    double t_start() const { return t_start_; }
    double t_end() const { return t_end_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t size() const { return n_steps_ + 1; }
    double dt() const { return (t_end_ - t_start_) / static_cast<double>(n_steps_); }
    double duration() const { return t_end_ - t_start_; }
    double at(std::size_t k) const;
    double midpoint(std::size_t k) const { return at(k) + 0.5 * dt(); }

    bool operator==(const TimeGrid&) const = default;

private:
    double t_start_;
    double t_end_;
    std::size_t n_steps_;
};

// Time-dependent operator H(t). `hermitian` declares that every sample must
// be Hermitian; sample() verifies it.
class Schedule {
public:
    using Evaluator = std::function<CMatrix(double)>;

    Schedule(Evaluator f, std::size_t dim, bool hermitian = true);
    static Schedule constant(const CMatrix& m, bool hermitian = true);

    CMatrix at(double t) const;
    std::size_t dim() const { return dim_; }
    bool hermitian() const { return hermitian_; }

    // Samples on every grid point; throws InvalidOperand if a Hermitian
    // schedule produces a non-Hermitian sample.
    std::vector<CMatrix> sample(const TimeGrid& grid) const;

private:
    Evaluator f_;
    std::size_t dim_;
    bool hermitian_;
};

CMatrix identity(std::size_t dim);
CMatrix dagger(const CMatrix& m);
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix commutator(const CMatrix& a, const CMatrix& b);
double frobenius(const CMatrix& m);

bool all_finite(const CMatrix& m);
bool all_finite(const CVector& v);

// ‖M − M†‖_F ≤ rel_tol · max(1, ‖M‖_F)
bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12);
bool is_anti_hermitian(const CMatrix& m, double rel_tol = 1e-12);
double unitarity_error(const CMatrix& u);

// exp(M). Hermitian and anti-Hermitian inputs go through an eigendecomposition
// of the Hermitian generator; anything else uses Padé scaling-and-squaring.
CMatrix matexp(const CMatrix& m);

// exp(-i H dt) for Hermitian H.
CMatrix unitary_step(const CMatrix& h, double dt);

// U(t_k) for every grid point from the ordered product of midpoint step
// exponentials exp(-i H(t_{k+1/2}) Δt). U(t_0) = 1.
std::vector<CMatrix> time_ordered_propagator(const Schedule& h, const TimeGrid& grid);

// Same product for a non-Hermitian effective generator H_eff (no-jump
// evolution); the result is generally not unitary.
std::vector<CMatrix> nonunitary_propagator(const Schedule& h_eff, const TimeGrid& grid);

// ⟨bra_R| U |ket_R⟩ as an operator on H_S; U acts on H_S ⊗ H_R.
CMatrix partial_inner(const CVector& bra_r, const CMatrix& u, const CVector& ket_r,
                      std::size_t dim_s, std::size_t dim_r);

// Tr_R(M) and Tr_S(M) for M on H_S ⊗ H_R.
CMatrix partial_trace_r(const CMatrix& m, std::size_t dim_s, std::size_t dim_r);
CMatrix partial_trace_s(const CMatrix& m, std::size_t dim_s, std::size_t dim_r);

CMatrix projector(const CVector& v);

// Trapezoidal cumulative integral of matrix samples on a uniform grid.
std::vector<CMatrix> cumulative_trapezoid(std::span<const CMatrix> samples, double dt);

} // namespace gpd
