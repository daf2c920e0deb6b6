// hilbert.cpp: Dense linear algebra substrate

#include "gpd/hilbert.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "gpd/errors.hpp"

namespace gpd {

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t n_steps)
    : t_start_(t_start), t_end_(t_end), n_steps_(n_steps) {
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
        throw InvalidOperand("time grid needs finite t_end > t_start");
    }
    if (n_steps == 0) throw InvalidOperand("time grid needs n_steps >= 1");
}

TimeGrid TimeGrid::periods(double omega, double periods, std::size_t steps_per_period) {
    if (!(omega > 0.0) || !(periods > 0.0)) {
        throw InvalidOperand("periods() needs omega > 0 and periods > 0");
    }
    const auto steps = static_cast<std::size_t>(
        std::llround(periods * static_cast<double>(steps_per_period)));
    return TimeGrid(0.0, periods * 2.0 * kPi / omega, std::max<std::size_t>(steps, 1));
}

double TimeGrid::at(std::size_t k) const {
    if (k == n_steps_) return t_end_;
    return t_start_ + static_cast<double>(k) * dt();
}

Schedule::Schedule(Evaluator f, std::size_t dim, bool hermitian)
    : f_(std::move(f)), dim_(dim), hermitian_(hermitian) {
    if (!f_) throw InvalidOperand("schedule needs an evaluator");
    if (dim == 0) throw DimensionError("schedule dimension must be positive");
}

Schedule Schedule::constant(const CMatrix& m, bool hermitian) {
    if (m.rows() != m.cols()) throw DimensionError("schedule operator must be square");
    return Schedule([m](double) { return m; }, static_cast<std::size_t>(m.rows()), hermitian);
}

CMatrix Schedule::at(double t) const {
    CMatrix m = f_(t);
    if (static_cast<std::size_t>(m.rows()) != dim_ || m.rows() != m.cols()) {
        std::ostringstream os;
        os << "schedule returned " << m.rows() << "x" << m.cols() << ", expected " << dim_;
        throw DimensionError(os.str());
    }
    return m;
}

std::vector<CMatrix> Schedule::sample(const TimeGrid& grid) const {
    std::vector<CMatrix> out;
    out.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CMatrix m = at(grid.at(k));
        if (hermitian_ && !is_hermitian(m)) {
            std::ostringstream os;
            os << "schedule not Hermitian at t=" << grid.at(k);
            throw InvalidOperand(os.str());
        }
        out.push_back(std::move(m));
    }
    return out;
}

CMatrix identity(std::size_t dim) {
    return CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

CMatrix dagger(const CMatrix& m) { return m.adjoint(); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

double frobenius(const CMatrix& m) { return m.norm(); }

bool all_finite(const CMatrix& m) { return m.allFinite(); }
bool all_finite(const CVector& v) { return v.allFinite(); }

bool is_hermitian(const CMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).norm() <= rel_tol * std::max(1.0, m.norm());
}

bool is_anti_hermitian(const CMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    return (m + m.adjoint()).norm() <= rel_tol * std::max(1.0, m.norm());
}

double unitarity_error(const CMatrix& u) {
    return (u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())).norm();
}

namespace {

// exp(i·s·K) for Hermitian K through its eigenbasis.
CMatrix exp_hermitian_generator(const CMatrix& k, Complex s) {
    const CMatrix sym = 0.5 * (k + k.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym);
    if (eig.info() != Eigen::Success) throw InvalidOperand("eigendecomposition failed");
    const Eigen::VectorXcd phases =
        (s * eig.eigenvalues().cast<Complex>()).array().exp().matrix();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

} // namespace

CMatrix matexp(const CMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("matexp needs a square matrix");
    if (!m.allFinite()) throw InvalidOperand("matexp operand has non-finite entries");
    if (m.rows() == 0) return m;
    if (is_hermitian(m, 1e-14)) return exp_hermitian_generator(m, Complex{1.0, 0.0});
    // M = iK with K = -iM Hermitian
    if (is_anti_hermitian(m, 1e-14)) return exp_hermitian_generator(-kI * m, kI);
    return m.exp();
}

CMatrix unitary_step(const CMatrix& h, double dt) {
    if (!h.allFinite()) throw InvalidOperand("generator has non-finite entries");
    return exp_hermitian_generator(h, Complex{0.0, -dt});
}

namespace {

std::vector<CMatrix> ordered_product(const Schedule& h, const TimeGrid& grid, bool unitary) {
    std::vector<CMatrix> out;
    out.reserve(grid.size());
    out.push_back(identity(h.dim()));
    const double dt = grid.dt();
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const CMatrix hk = h.at(grid.midpoint(k));
        CMatrix step;
        if (unitary) {
            if (!is_hermitian(hk)) throw InvalidOperand("propagator generator not Hermitian");
            step = unitary_step(hk, dt);
        } else {
            step = matexp(Complex{0.0, -dt} * hk);
        }
        out.push_back(step * out.back());
    }
    return out;
}

} // namespace

std::vector<CMatrix> time_ordered_propagator(const Schedule& h, const TimeGrid& grid) {
    return ordered_product(h, grid, true);
}

std::vector<CMatrix> nonunitary_propagator(const Schedule& h_eff, const TimeGrid& grid) {
    return ordered_product(h_eff, grid, false);
}

CMatrix partial_inner(const CVector& bra_r, const CMatrix& u, const CVector& ket_r,
                      std::size_t dim_s, std::size_t dim_r) {
    const auto ds = static_cast<Eigen::Index>(dim_s);
    const auto dr = static_cast<Eigen::Index>(dim_r);
    if (u.rows() != ds * dr || u.cols() != ds * dr) {
        throw DimensionError("joint operator does not match dim_S * dim_R");
    }
    if (bra_r.size() != dr || ket_r.size() != dr) {
        throw DimensionError("reservoir vectors do not match dim_R");
    }
    CMatrix out(ds, ds);
    for (Eigen::Index s = 0; s < ds; ++s) {
        for (Eigen::Index sp = 0; sp < ds; ++sp) {
            out(s, sp) = bra_r.dot(u.block(s * dr, sp * dr, dr, dr) * ket_r);
        }
    }
    return out;
}

CMatrix partial_trace_r(const CMatrix& m, std::size_t dim_s, std::size_t dim_r) {
    const auto ds = static_cast<Eigen::Index>(dim_s);
    const auto dr = static_cast<Eigen::Index>(dim_r);
    if (m.rows() != ds * dr || m.cols() != ds * dr) throw DimensionError("partial_trace_r");
    CMatrix out(ds, ds);
    for (Eigen::Index s = 0; s < ds; ++s) {
        for (Eigen::Index sp = 0; sp < ds; ++sp) {
            out(s, sp) = m.block(s * dr, sp * dr, dr, dr).trace();
        }
    }
    return out;
}

CMatrix partial_trace_s(const CMatrix& m, std::size_t dim_s, std::size_t dim_r) {
    const auto ds = static_cast<Eigen::Index>(dim_s);
    const auto dr = static_cast<Eigen::Index>(dim_r);
    if (m.rows() != ds * dr || m.cols() != ds * dr) throw DimensionError("partial_trace_s");
    CMatrix out = CMatrix::Zero(dr, dr);
    for (Eigen::Index s = 0; s < ds; ++s) out += m.block(s * dr, s * dr, dr, dr);
    return out;
}

CMatrix projector(const CVector& v) { return v * v.adjoint(); }

std::vector<CMatrix> cumulative_trapezoid(std::span<const CMatrix> samples, double dt) {
    std::vector<CMatrix> out;
    if (samples.empty()) return out;
    out.reserve(samples.size());
    out.push_back(CMatrix::Zero(samples[0].rows(), samples[0].cols()));
    for (std::size_t k = 1; k < samples.size(); ++k) {
        out.push_back(out.back() + 0.5 * dt * (samples[k - 1] + samples[k]));
    }
    return out;
}

} // namespace gpd
