// channels.cpp: Master equation, Kraus channels and conditional trajectories

#include "gpd/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gpd/errors.hpp"

namespace gpd {

bool same_energy(double a, double b) {
    return std::abs(a - b) < kEnergyRelTol * std::max({1.0, std::abs(a), std::abs(b)});
}

ReservoirSpec::ReservoirSpec(std::vector<ReservoirState> states, bool require_orthonormal)
    : states_(std::move(states)) {
    if (states_.empty()) throw InvalidState("reservoir needs at least one state");
    const auto dim = states_.front().state.size();
    double total = 0.0;
    for (const auto& s : states_) {
        if (s.state.size() != dim || dim == 0) throw DimensionError("reservoir state dimensions differ");
        if (!(s.weight >= 0.0) || !std::isfinite(s.weight)) throw InvalidState("reservoir weight must be >= 0");
        if (!std::isfinite(s.energy)) throw InvalidState("reservoir energy must be finite");
        if (std::abs(s.state.norm() - 1.0) > 1e-10) throw InvalidState("reservoir states must be normalized");
        total += s.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "reservoir weights sum to " << total;
        throw InvalidState(os.str());
    }
    if (require_orthonormal && !orthonormal()) throw InvalidState("reservoir states not orthonormal");

    // Group by energy; sorting first makes the grouping transitive-safe.
    std::vector<std::size_t> order(states_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
        return states_[a].energy < states_[b].energy;
    });
    for (std::size_t idx : order) {
        if (!blocks_.empty() && same_energy(states_[blocks_.back().front()].energy, states_[idx].energy)) {
            blocks_.back().push_back(idx);
        } else {
            blocks_.push_back({idx});
        }
    }
    for (auto& b : blocks_) std::sort(b.begin(), b.end());
}

ReservoirSpec ReservoirSpec::from_hamiltonian(const CMatrix& h_r, const std::vector<double>& weights) {
    if (!is_hermitian(h_r)) throw InvalidOperand("H_R must be Hermitian");
    if (static_cast<Eigen::Index>(weights.size()) != h_r.rows()) {
        throw DimensionError("one weight per reservoir eigenstate required");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (h_r + h_r.adjoint()));
    std::vector<ReservoirState> states;
    for (Eigen::Index i = 0; i < h_r.rows(); ++i) {
        states.push_back({weights[static_cast<std::size_t>(i)], eig.eigenvectors().col(i),
                          eig.eigenvalues()(i)});
    }
    return ReservoirSpec(std::move(states));
}

ReservoirSpec ReservoirSpec::pure(const CVector& r, double energy) {
    return ReservoirSpec({{1.0, r, energy}});
}

std::size_t ReservoirSpec::block_of(std::size_t i) const {
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (std::find(blocks_[b].begin(), blocks_[b].end(), i) != blocks_[b].end()) return b;
    }
    throw InvalidBlock("state index out of range");
}

CMatrix ReservoirSpec::density() const {
    CMatrix rho = CMatrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    for (const auto& s : states_) rho += s.weight * projector(s.state);
    return rho;
}

bool ReservoirSpec::orthonormal(double tol) const {
    for (std::size_t i = 0; i < states_.size(); ++i) {
        for (std::size_t j = 0; j < states_.size(); ++j) {
            const Complex g = states_[i].state.dot(states_[j].state);
            if (std::abs(g - (i == j ? 1.0 : 0.0)) > tol) return false;
        }
    }
    return true;
}

SystemEnsemble::SystemEnsemble(std::vector<SystemState> states) : states_(std::move(states)) {
    if (states_.empty()) throw InvalidState("system ensemble needs at least one state");
    const auto dim = states_.front().state.size();
    double total = 0.0;
    for (const auto& s : states_) {
        if (s.state.size() != dim || dim == 0) throw DimensionError("system state dimensions differ");
        if (!(s.weight >= 0.0)) throw InvalidState("system weight must be >= 0");
        if (std::abs(s.state.norm() - 1.0) > 1e-10) throw InvalidState("system states must be normalized");
        total += s.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidState("system weights must sum to 1");
}

SystemEnsemble SystemEnsemble::pure(const CVector& psi) { return SystemEnsemble({{1.0, psi}}); }

CMatrix SystemEnsemble::density() const {
    CMatrix rho = CMatrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    for (const auto& s : states_) rho += s.weight * projector(s.state);
    return rho;
}

KrausChannel::KrausChannel(std::vector<KrausElement> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) throw InvalidChannel("channel needs at least one element");
    for (const auto& e : elements_) {
        if (!(e.weight >= 0.0)) throw InvalidChannel("Kraus weights must be >= 0");
        if (e.op.dim() != elements_.front().op.dim()) throw DimensionError("Kraus operator dimensions differ");
    }
}

double KrausChannel::completeness_error(double t) const {
    CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    for (const auto& e : elements_) {
        const CMatrix k = e.op.at(t);
        acc += e.weight * k.adjoint() * k;
    }
    return (acc - identity(dim())).norm();
}

LindbladModel::LindbladModel(Schedule h_s, CMatrix delta_h, std::vector<CMatrix> jumps)
    : h_s_(std::move(h_s)), delta_h_(std::move(delta_h)), jumps_(std::move(jumps)) {
    const auto d = static_cast<Eigen::Index>(h_s_.dim());
    if (delta_h_.size() == 0) delta_h_ = CMatrix::Zero(d, d);
    if (delta_h_.rows() != d || delta_h_.cols() != d) throw DimensionError("ΔH dimension");
    if (!is_hermitian(delta_h_)) throw InvalidOperand("ΔH must be Hermitian");
    for (const auto& l : jumps_) {
        if (l.rows() != d || l.cols() != d) throw DimensionError("jump operator dimension");
        if (!l.allFinite()) throw InvalidOperand("jump operator has non-finite entries");
    }
}

CMatrix LindbladModel::dissipator_sum() const {
    const auto d = static_cast<Eigen::Index>(dim());
    CMatrix acc = CMatrix::Zero(d, d);
    for (const auto& l : jumps_) acc += l.adjoint() * l;
    return acc;
}

Schedule LindbladModel::effective_hamiltonian() const {
    const CMatrix shift = delta_h_ - kI * dissipator_sum();
    return Schedule([h = h_s_, shift](double t) -> CMatrix { return h.at(t) + shift; }, dim(), false);
}

CMatrix lindblad_rhs(const CMatrix& rho, const LindbladModel& model, double t) {
    const CMatrix h = model.h_s().at(t) + model.delta_h();
    CMatrix out = -kI * commutator(h, rho);
    for (const auto& l : model.jumps()) {
        const CMatrix ll = l.adjoint() * l;
        out -= ll * rho + rho * ll - 2.0 * l * rho * l.adjoint();
    }
    return out;
}

std::vector<CMatrix> integrate_lindblad(const LindbladModel& model, const CMatrix& rho0,
                                        const TimeGrid& grid) {
    if (rho0.rows() != static_cast<Eigen::Index>(model.dim()) || rho0.cols() != rho0.rows()) {
        throw DimensionError("ρ0 does not match the model dimension");
    }
    if (!is_hermitian(rho0, 1e-10)) throw InvalidState("ρ0 must be Hermitian");
    const Complex trace0 = rho0.trace();

    std::vector<CMatrix> out;
    out.reserve(grid.size());
    out.push_back(rho0);
    const double h = grid.dt();
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double t = grid.at(k);
        const CMatrix& rho = out.back();
        const CMatrix k1 = lindblad_rhs(rho, model, t);
        const CMatrix k2 = lindblad_rhs(rho + 0.5 * h * k1, model, t + 0.5 * h);
        const CMatrix k3 = lindblad_rhs(rho + 0.5 * h * k2, model, t + 0.5 * h);
        const CMatrix k4 = lindblad_rhs(rho + h * k3, model, t + h);
        CMatrix next = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        next = 0.5 * (next + next.adjoint());
        if (!next.allFinite() || std::abs(next.trace() - trace0) > kTraceDriftLimit) {
            std::ostringstream os;
            os << "trace drift " << std::abs(next.trace() - trace0) << " at t=" << t + h;
            throw IntegrationDiverged(os.str());
        }
        out.push_back(std::move(next));
    }
    return out;
}

CMatrix apply_kraus(const KrausChannel& channel, const CMatrix& rho0, double t) {
    if (rho0.rows() != static_cast<Eigen::Index>(channel.dim())) throw DimensionError("ρ0 vs channel");
    const double err = channel.completeness_error(t);
    if (err > kCompletenessTol) {
        std::ostringstream os;
        os << "Σ p K†K deviates from 1 by " << err << " at t=" << t;
        throw InvalidChannel(os.str());
    }
    CMatrix out = CMatrix::Zero(rho0.rows(), rho0.cols());
    for (const auto& e : channel.elements()) {
        const CMatrix k = e.op.at(t);
        out += e.weight * k * rho0 * k.adjoint();
    }
    return out;
}

std::vector<CVector> adapted_basis(const CVector& r) {
    const double norm = r.norm();
    if (r.size() == 0 || norm < 1e-14) throw InvalidState("adapted basis needs a non-zero vector");
    if (std::abs(norm - 1.0) > 1e-10) throw InvalidState("adapted basis needs a normalized vector");
    const Eigen::Index dim = r.size();

    Eigen::Index pivot = 0;
    r.cwiseAbs().maxCoeff(&pivot);

    std::vector<CVector> basis{r};
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (i == pivot) continue;
        CVector v = CVector::Unit(dim, i);
        // two passes of modified Gram–Schmidt
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) v -= b.dot(v) * b;
        }
        basis.push_back(v / v.norm());
    }
    return basis;
}

std::vector<WeightedTrajectory> conditional_trajectories(const std::vector<CMatrix>& joint_u,
                                                         const TimeGrid& grid,
                                                         const ReservoirSpec& res,
                                                         const SystemEnsemble& sys) {
    if (joint_u.size() != grid.size()) throw DimensionError("propagators do not match grid");
    const std::size_t dim_s = sys.dim();
    const std::size_t dim_r = res.dim();
    if (static_cast<std::size_t>(joint_u.front().rows()) != dim_s * dim_r) {
        throw DimensionError("joint dimension must equal dim_S * dim_R");
    }

    std::vector<WeightedTrajectory> out;
    for (std::size_t ri = 0; ri < res.size(); ++ri) {
        const auto& r = res.states()[ri];
        std::vector<CMatrix> kept;
        kept.reserve(joint_u.size());
        for (const auto& u : joint_u) kept.push_back(partial_inner(r.state, u, r.state, dim_s, dim_r));
        for (std::size_t si = 0; si < sys.states().size(); ++si) {
            const auto& s = sys.states()[si];
            Trajectory traj = evolve(kept, grid, s.state);
            if (traj.min_norm() < kMinTrajectoryNorm) {
                std::ostringstream os;
                os << "conditional state (r=" << ri << ", s=" << si << ") vanishes";
                throw DegenerateTrajectory(os.str());
            }
            out.push_back({r.weight * s.weight, std::move(traj), ri, si});
        }
    }
    return out;
}

std::vector<CMatrix> conditional_kraus(const CMatrix& joint_u, const ReservoirSpec& res,
                                       std::size_t r_index, std::size_t dim_s) {
    if (r_index >= res.size()) throw InvalidState("reservoir index out of range");
    const CVector& r = res.states()[r_index].state;
    std::vector<CMatrix> out;
    for (const auto& b : adapted_basis(r)) out.push_back(partial_inner(b, joint_u, r, dim_s, res.dim()));
    return out;
}

std::vector<WeightedTrajectory> kraus_trajectories(const KrausChannel& channel,
                                                   const CVector& psi, const TimeGrid& grid) {
    std::vector<WeightedTrajectory> out;
    for (std::size_t i = 0; i < channel.elements().size(); ++i) {
        const auto& e = channel.elements()[i];
        std::vector<CVector> states;
        states.reserve(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) states.push_back(e.op.at(grid.at(k)) * psi);
        if (states.front().norm() < kMinTrajectoryNorm * std::max(1.0, psi.norm())) continue;
        out.push_back({e.weight, Trajectory(grid, std::move(states)), i, 0});
    }
    return out;
}

double min_eigenvalue(const CMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

} // namespace gpd
