// phase.cpp: Samuel–Bhandari functional on sampled paths

#include "gpd/phase.hpp"

#include <cmath>
#include <sstream>

#include "gpd/errors.hpp"

namespace gpd {

Trajectory::Trajectory(TimeGrid grid, std::vector<CVector> states)
    : grid_(grid), states_(std::move(states)) {
    if (states_.size() != grid_.size()) {
        std::ostringstream os;
        os << "trajectory has " << states_.size() << " states for " << grid_.size()
           << " grid points";
        throw DimensionError(os.str());
    }
    const auto dim = states_.front().size();
    if (dim == 0) throw DimensionError("trajectory states must be non-empty");
    for (const auto& s : states_) {
        if (s.size() != dim) throw DimensionError("trajectory states differ in dimension");
        if (!s.allFinite()) throw InvalidOperand("trajectory state has non-finite entries");
    }
}

double Trajectory::min_norm() const {
    double m = states_.front().norm();
    for (const auto& s : states_) m = std::min(m, s.norm());
    return m;
}

Trajectory evolve(const std::vector<CMatrix>& propagators, const TimeGrid& grid,
                  const CVector& psi0) {
    if (propagators.size() != grid.size()) {
        throw DimensionError("propagator sequence does not match grid");
    }
    std::vector<CVector> states;
    states.reserve(propagators.size());
    for (const auto& u : propagators) {
        if (u.cols() != psi0.size()) throw DimensionError("propagator/state mismatch");
        states.push_back(u * psi0);
    }
    return Trajectory(grid, std::move(states));
}

namespace {

void require_nondegenerate(const Trajectory& traj) {
    const auto& st = traj.states();
    for (std::size_t k = 0; k < st.size(); ++k) {
        if (st[k].norm() < kMinTrajectoryNorm) {
            std::ostringstream os;
            os << "state norm " << st[k].norm() << " at t=" << traj.grid().at(k);
            throw DegenerateTrajectory(os.str());
        }
    }
}

double connection_sum(const Trajectory& traj) {
    const auto& st = traj.states();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < st.size(); ++k) {
        const Complex ov = st[k].dot(st[k + 1]);
        if (std::abs(ov) < 1e-12 * st[k].norm() * st[k + 1].norm()) {
            std::ostringstream os;
            os << "consecutive states orthogonal near t=" << traj.grid().at(k)
               << "; grid too coarse";
            throw DegenerateTrajectory(os.str());
        }
        acc += std::arg(ov);
    }
    return acc;
}

double trapezoid_centered(const Trajectory& traj) {
    const auto& st = traj.states();
    const std::size_t n = traj.grid().n_steps();
    const double h = traj.grid().dt();

    auto derivative = [&](std::size_t k) -> CVector {
        if (n == 1) return (st[1] - st[0]) / h;
        if (k == 0) return (-3.0 * st[0] + 4.0 * st[1] - st[2]) / (2.0 * h);
        if (k == n) return (3.0 * st[n] - 4.0 * st[n - 1] + st[n - 2]) / (2.0 * h);
        return (st[k + 1] - st[k - 1]) / (2.0 * h);
    };

    double acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double f = st[k].dot(derivative(k)).imag() / st[k].squaredNorm();
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        acc += w * f;
    }
    return acc * h;
}

} // namespace

double dynamic_phase(const Trajectory& traj, PhaseQuadrature rule) {
    require_nondegenerate(traj);
    switch (rule) {
    case PhaseQuadrature::kConnection:
        return connection_sum(traj);
    case PhaseQuadrature::kTrapezoidCentered:
        return trapezoid_centered(traj);
    }
    throw InvalidOperand("unknown quadrature rule");
}

PhaseResult z_functional(const Trajectory& traj, PhaseQuadrature rule, double z_rel_tol) {
    const double dyn = dynamic_phase(traj, rule);
    const Complex overlap = traj.front().dot(traj.back());
    const Complex z = std::exp(Complex{0.0, -dyn}) * overlap;
    const double eps = z_rel_tol * traj.front().norm() * traj.back().norm();
    if (std::abs(z) < eps) {
        std::ostringstream os;
        os << "|Z| = " << std::abs(z) << " below " << eps << " at t=" << traj.grid().t_end();
        throw UndefinedGP(os.str());
    }
    return PhaseResult{z, principal_arg(z), dyn, overlap};
}

Trajectory gauge_transform(const Trajectory& traj, std::span<const double> alpha) {
    if (alpha.size() != traj.states().size()) {
        throw DimensionError("gauge needs one angle per grid point");
    }
    std::vector<CVector> out;
    out.reserve(alpha.size());
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (!std::isfinite(alpha[k])) throw InvalidOperand("gauge angle not finite");
        out.push_back(std::exp(Complex{0.0, alpha[k]}) * traj.states()[k]);
    }
    return Trajectory(traj.grid(), std::move(out));
}

Trajectory gauge_transform(const Trajectory& traj, const std::function<double(double)>& alpha) {
    std::vector<double> a(traj.grid().size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = alpha(traj.grid().at(k));
    return gauge_transform(traj, a);
}

double principal_arg(Complex z) {
    const double a = std::arg(z);
    return a <= -kPi ? a + 2.0 * kPi : a;
}

double principal_angle(double angle) {
    double a = std::remainder(angle, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

double unwrap_near(double angle, double reference) {
    return reference + std::remainder(angle - reference, 2.0 * kPi);
}

std::vector<double> unwrap_sequence(std::span<const double> angles) {
    std::vector<double> out(angles.begin(), angles.end());
    for (std::size_t k = 1; k < out.size(); ++k) out[k] = unwrap_near(out[k], out[k - 1]);
    return out;
}

} // namespace gpd
