// weakcoupling.cpp: Operators A, B and the ΔZ functional

#include "gpd/weakcoupling.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "gpd/errors.hpp"

namespace gpd::weak {

WeakCouplingModel::WeakCouplingModel(Schedule h_s, CMatrix h_r, std::vector<Coupling> couplings,
                                     ReservoirSpec res, CVector psi_s)
    : h_s_(std::move(h_s)), h_r_(std::move(h_r)), couplings_(std::move(couplings)),
      res_(std::move(res)), psi_s_(std::move(psi_s)) {
    const auto ds = static_cast<Eigen::Index>(h_s_.dim());
    const auto dr = h_r_.rows();
    if (h_r_.cols() != dr || dr == 0) throw DimensionError("H_R must be square");
    if (!is_hermitian(h_r_)) throw InvalidOperand("H_R must be Hermitian");
    if (psi_s_.size() != ds) throw DimensionError("ψ_S does not match H_S");
    if (std::abs(psi_s_.norm() - 1.0) > 1e-10) throw InvalidState("ψ_S must be normalized");
    if (static_cast<Eigen::Index>(res_.dim()) != dr) throw DimensionError("reservoir spec vs H_R");
    for (const auto& c : couplings_) {
        if (c.r.rows() != dr || c.r.cols() != dr) throw DimensionError("R_μ dimension");
        if (c.s.rows() != ds || c.s.cols() != ds) throw DimensionError("S_μ dimension");
    }
    if (!is_hermitian(interaction())) throw InvalidOperand("H_I must be Hermitian");
    for (const auto& r : res_.states()) {
        const double resid = (h_r_ * r.state - r.energy * r.state).norm();
        if (resid > 1e-9 * std::max(1.0, h_r_.norm())) {
            throw InvalidState("reservoir states must be eigenstates of H_R");
        }
    }
}

CMatrix WeakCouplingModel::interaction() const {
    const auto d = static_cast<Eigen::Index>(dim_s() * dim_r());
    CMatrix h = CMatrix::Zero(d, d);
    for (const auto& c : couplings_) h -= kron(c.s, c.r);
    return h;
}

Schedule WeakCouplingModel::joint_hamiltonian() const {
    const CMatrix static_part = kron(identity(dim_s()), h_r_) + interaction();
    const std::size_t dr = dim_r();
    return Schedule(
        [hs = h_s_, static_part, dr](double t) -> CMatrix {
            return kron(hs.at(t), identity(dr)) + static_part;
        },
        dim_s() * dim_r());
}

double WeakCouplingModel::rcond_violation() const {
    double worst = 0.0;
    for (const auto& r : res_.states()) {
        for (const auto& c : couplings_) {
            worst = std::max(worst, std::abs(r.state.dot(c.r * r.state)));
        }
    }
    return worst;
}

void WeakCouplingModel::require_rcond(double tol) const {
    const double v = rcond_violation();
    if (v > tol) {
        std::ostringstream os;
        os << "max |<r|R_mu|r>| = " << v << "; the second-order GP formula does not apply";
        throw RCondViolated(os.str());
    }
}

WeakCouplingModel WeakCouplingModel::scaled(double lambda) const {
    std::vector<Coupling> c = couplings_;
    for (auto& term : c) term.r *= lambda;
    return WeakCouplingModel(h_s_, h_r_, std::move(c), res_, psi_s_);
}

WeakCouplingModel WeakCouplingModel::with_reservoir(ReservoirSpec res) const {
    return WeakCouplingModel(h_s_, h_r_, couplings_, std::move(res), psi_s_);
}

namespace {

std::vector<CMatrix> reservoir_average(const std::vector<CMatrix>& joint, const ReservoirSpec& res,
                                       std::size_t dim_s) {
    std::vector<CMatrix> out;
    out.reserve(joint.size());
    for (const auto& m : joint) {
        CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(dim_s), static_cast<Eigen::Index>(dim_s));
        for (const auto& r : res.states()) {
            acc += r.weight * partial_inner(r.state, m, r.state, dim_s, res.dim());
        }
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<CMatrix> interaction_picture_hs(const Schedule& h_s, const std::vector<CMatrix>& u_s,
                                            const TimeGrid& grid) {
    std::vector<CMatrix> out;
    out.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        out.push_back(u_s[k].adjoint() * h_s.at(grid.at(k)) * u_s[k]);
    }
    return out;
}

} // namespace

PerturbationOperators build_ab(const WeakCouplingModel& model, const TimeGrid& grid) {
    PerturbationOperators ops{grid, 0, 0, {}, {}, {}, {}, {}, {}, {}};
    ops.dim_s = model.dim_s();
    ops.dim_r = model.dim_r();
    ops.u_s = time_ordered_propagator(model.h_s(), grid);
    ops.h_s_tilde = interaction_picture_hs(model.h_s(), ops.u_s, grid);

    Eigen::SelfAdjointEigenSolver<CMatrix> eig_r(0.5 * (model.h_r() + model.h_r().adjoint()));
    const CMatrix h_i = model.interaction();
    ops.h_i_tilde.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.at(k);
        const Eigen::VectorXcd phases =
            (Complex{0.0, -t} * eig_r.eigenvalues().cast<Complex>()).array().exp().matrix();
        const CMatrix u_r = eig_r.eigenvectors() * phases.asDiagonal() * eig_r.eigenvectors().adjoint();
        const CMatrix u = kron(ops.u_s[k], u_r);
        ops.h_i_tilde.push_back(u.adjoint() * h_i * u);
    }

    ops.a = cumulative_trapezoid(ops.h_i_tilde, grid.dt());
    for (auto& a : ops.a) a *= -kI;

    std::vector<CMatrix> integrand;
    integrand.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) integrand.push_back(-kI * ops.h_i_tilde[k] * ops.a[k]);
    ops.b = cumulative_trapezoid(integrand, grid.dt());

    ops.b_avg = reservoir_average(ops.b, model.reservoir(), ops.dim_s);
    ops.b_dot_avg = reservoir_average(integrand, model.reservoir(), ops.dim_s);
    return ops;
}

void average_over(PerturbationOperators& ops, const ReservoirSpec& res) {
    if (!ops.has_joint()) throw InvalidOperand("reservoir averages need joint operators");
    if (res.dim() != ops.dim_r) throw DimensionError("reservoir dimension");
    std::vector<CMatrix> b_dot;
    b_dot.reserve(ops.grid.size());
    for (std::size_t k = 0; k < ops.grid.size(); ++k) b_dot.push_back(-kI * ops.h_i_tilde[k] * ops.a[k]);
    ops.b_avg = reservoir_average(ops.b, res, ops.dim_s);
    ops.b_dot_avg = reservoir_average(b_dot, res, ops.dim_s);
}

PerturbationOperators markov_operators(const LindbladModel& model, const TimeGrid& grid) {
    PerturbationOperators ops{grid, 0, 0, {}, {}, {}, {}, {}, {}, {}};
    ops.dim_s = model.dim();
    ops.u_s = time_ordered_propagator(model.h_s(), grid);
    ops.h_s_tilde = interaction_picture_hs(model.h_s(), ops.u_s, grid);
    const CMatrix generator = -kI * model.delta_h() - model.dissipator_sum();
    ops.b_dot_avg.reserve(grid.size());
    for (const auto& u : ops.u_s) ops.b_dot_avg.push_back(u.adjoint() * generator * u);
    ops.b_avg = cumulative_trapezoid(ops.b_dot_avg, grid.dt());
    return ops;
}

LindbladIdentification lindblad_identification(const PerturbationOperators& ops) {
    return lindblad_identification(ops, ops.grid.n_steps());
}

LindbladIdentification lindblad_identification(const PerturbationOperators& ops, std::size_t k) {
    if (k >= ops.b_dot_avg.size()) throw InvalidOperand("grid index out of range");
    const CMatrix m = ops.u_s[k] * ops.b_dot_avg[k] * ops.u_s[k].adjoint();
    LindbladIdentification id{0.5 * kI * (m - m.adjoint()), -0.5 * (m + m.adjoint())};
    const double lowest = min_eigenvalue(id.dissipation);
    if (lowest < -1e-9 * std::max(1.0, id.dissipation.norm())) {
        std::ostringstream os;
        os << "Σ L†L has eigenvalue " << lowest << " at t=" << ops.grid.at(k);
        throw InconsistentModel(os.str());
    }
    return id;
}

double identification_mismatch(const LindbladIdentification& id, const LindbladModel& model) {
    return (id.delta_h - model.delta_h()).norm() + (id.dissipation - model.dissipator_sum()).norm();
}

namespace {

Complex delta_z_from(const PerturbationOperators& ops, const CVector& psi,
                     const std::vector<CMatrix>& b) {
    if (psi.size() != static_cast<Eigen::Index>(ops.dim_s)) throw DimensionError("ψ_S dimension");
    const std::size_t last = ops.grid.n_steps();
    const CMatrix& u = ops.u_s[last];
    const Complex u_mean = psi.dot(u * psi);
    if (std::abs(u_mean) < kDefaultZTolerance) throw UndefinedGP("<U_S>_S vanishes");

    const Complex term1 = psi.dot(u * b[last] * psi) / u_mean;
    const Complex term2 = -0.5 * psi.dot((b[last] - b[last].adjoint()) * psi);

    std::vector<CMatrix> integrand;
    integrand.reserve(ops.grid.size());
    for (std::size_t k = 0; k < ops.grid.size(); ++k) {
        const CMatrix& hs = ops.h_s_tilde[k];
        const CMatrix dh = hs - psi.dot(hs * psi) * identity(ops.dim_s);
        integrand.push_back(b[k].adjoint() * dh + dh * b[k]);
    }
    const CMatrix integral = cumulative_trapezoid(integrand, ops.grid.dt()).back();
    const Complex term3 = kI * psi.dot(integral * psi);
    return term1 + term2 + term3;
}

} // namespace

Complex delta_z(const PerturbationOperators& ops, const CVector& psi_s) {
    return delta_z_from(ops, psi_s, ops.b_avg);
}

Complex delta_z(const PerturbationOperators& ops, const WeakCouplingModel& model) {
    model.require_rcond();
    return delta_z_from(ops, model.psi_s(), ops.b_avg);
}

Complex delta_z_conditional(const PerturbationOperators& ops, const CVector& psi_s,
                            const CVector& r) {
    if (!ops.has_joint()) throw InvalidOperand("conditional ΔZ needs joint operators");
    std::vector<CMatrix> b_r;
    b_r.reserve(ops.b.size());
    for (const auto& b : ops.b) b_r.push_back(partial_inner(r, b, r, ops.dim_s, ops.dim_r));
    return delta_z_from(ops, psi_s, b_r);
}

double unperturbed_phase(const PerturbationOperators& ops, const CVector& psi_s) {
    return z_functional(evolve(ops.u_s, ops.grid, psi_s)).beta;
}

Complex perturbative_moment(Complex dz, double beta0, int n) {
    if (std::abs(dz.imag()) > kPerturbativeGuard) {
        std::clog << "warning: Im<dZ> = " << dz.imag()
                  << " is outside the perturbative regime\n";
    }
    return std::exp(Complex{0.0, n * beta0}) * (1.0 + kI * static_cast<double>(n) * dz.imag());
}

} // namespace gpd::weak
