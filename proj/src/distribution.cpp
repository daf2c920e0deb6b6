// distribution.cpp: Atomic phase distributions and decomposition freedom

#include "gpd/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpd/errors.hpp"

namespace gpd {

PhaseDistribution::PhaseDistribution(DistributionKind kind, std::vector<Atom> atoms)
    : kind_(kind), atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw InvalidOperand("distribution needs at least one atom");
    for (const auto& a : atoms_) {
        if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw InvalidOperand("atom weight must be >= 0");
        if (!std::isfinite(a.value.real()) || !std::isfinite(a.value.imag())) {
            throw InvalidOperand("atom value not finite");
        }
        if (kind_ == DistributionKind::kH && std::abs(std::abs(a.value) - 1.0) > 1e-12) {
            throw InvalidOperand("P_H atoms must lie on the unit circle");
        }
    }
    if (std::abs(total_weight() - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "atom weights sum to " << total_weight();
        throw InvalidOperand(os.str());
    }
}

double PhaseDistribution::total_weight() const {
    double w = 0.0;
    for (const auto& a : atoms_) w += a.weight;
    return w;
}

PhaseDistribution build_distribution(const std::vector<WeightedTrajectory>& trajs,
                                     DistributionKind kind, PhaseQuadrature rule) {
    if (trajs.empty()) throw InvalidOperand("no trajectories");
    std::vector<Atom> atoms;
    atoms.reserve(trajs.size());
    for (const auto& wt : trajs) {
        if (!(wt.trajectory.grid() == trajs.front().trajectory.grid())) {
            throw InvalidOperand("trajectories must share one grid");
        }
        Complex value;
        if (kind == DistributionKind::kH) {
            const PhaseResult pr = z_functional(wt.trajectory, rule);
            value = pr.z / std::abs(pr.z);
        } else {
            const double dyn = dynamic_phase(wt.trajectory, rule);
            value = std::exp(Complex{0.0, -dyn}) * wt.trajectory.front().dot(wt.trajectory.back());
        }
        atoms.push_back({wt.weight, value, wt.label_r, wt.label_s});
    }
    return PhaseDistribution(kind, std::move(atoms));
}

PhaseDistribution to_holevo(const PhaseDistribution& pz) {
    if (pz.kind() == DistributionKind::kH) return pz;
    double scale = 0.0;
    for (const auto& a : pz.atoms()) scale = std::max(scale, std::abs(a.value));
    std::vector<Atom> atoms;
    for (const auto& a : pz.atoms()) {
        const double m = std::abs(a.value);
        if (m == 0.0 || m < kDefaultZTolerance * scale) {
            throw UndefinedGP("P_H needs the phase of every atom; an atom has Z = 0");
        }
        atoms.push_back({a.weight, a.value / m, a.label_r, a.label_s});
    }
    return PhaseDistribution(DistributionKind::kH, std::move(atoms));
}

PhaseDistribution merge_atoms(const PhaseDistribution& dist, double tol) {
    std::vector<Atom> merged;
    for (const auto& a : dist.atoms()) {
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const Atom& m) { return std::abs(m.value - a.value) <= tol; });
        if (it == merged.end()) {
            merged.push_back(a);
        } else {
            it->weight += a.weight;
        }
    }
    return PhaseDistribution(dist.kind(), std::move(merged));
}

double holevo_spread(Complex first_h_moment) {
    const double m2 = std::norm(first_h_moment);
    if (m2 == 0.0) throw UndefinedGP("first H-moment vanishes; spread is infinite");
    return std::max(0.0, 1.0 / m2 - 1.0);
}

namespace {

std::vector<Complex> raw_moments(const std::vector<Atom>& atoms, std::size_t n_max,
                                 bool normalize_atoms) {
    std::vector<Complex> out(n_max, Complex{0.0, 0.0});
    for (const auto& a : atoms) {
        const Complex v = normalize_atoms ? a.value / std::abs(a.value) : a.value;
        Complex p{1.0, 0.0};
        for (std::size_t n = 0; n < n_max; ++n) {
            p *= v;
            out[n] += a.weight * p;
        }
    }
    return out;
}

bool sharp(const std::vector<Atom>& atoms) {
    return std::all_of(atoms.begin(), atoms.end(),
                       [&](const Atom& a) { return a.value == atoms.front().value; });
}

} // namespace

MomentReport moments(const PhaseDistribution& dist, std::size_t n_max) {
    n_max = std::max<std::size_t>(n_max, 1);
    MomentReport rep{};
    rep.kind = dist.kind();
    const auto& atoms = dist.atoms();

    bool have_h = dist.kind() == DistributionKind::kH;
    if (dist.kind() == DistributionKind::kZ) {
        rep.z_moments = raw_moments(atoms, n_max, false);
        double scale = 0.0;
        for (const auto& a : atoms) scale += a.weight * std::abs(a.value);
        const Complex first = rep.z_moments.front();
        if (std::abs(first) <= kDefaultZTolerance * scale || std::abs(first) == 0.0) {
            throw UndefinedGP("first Z-moment vanishes; mean GP undefined");
        }
        rep.mean_gp_z = principal_arg(first);
        double norm_n = 1.0;
        for (std::size_t n = 0; n < n_max; ++n) {
            norm_n *= std::abs(first);
            rep.z_normalized.push_back(rep.z_moments[n] / norm_n);
        }
        have_h = std::all_of(atoms.begin(), atoms.end(), [&](const Atom& a) {
            return std::abs(a.value) > kDefaultZTolerance * scale;
        });
    }
    if (have_h) {
        rep.h_moments = raw_moments(atoms, n_max, dist.kind() == DistributionKind::kZ);
        rep.mean_gp_h = rep.h_moments.front();
        rep.spread_w = sharp(atoms) ? 0.0 : holevo_spread(rep.h_moments.front());
    }
    return rep;
}

Complex block_first_moment(const CMatrix& joint_u, const ReservoirSpec& res, const CVector& psi_s,
                           const std::vector<std::size_t>& block, Complex dynamic_factor) {
    if (block.empty()) throw InvalidBlock("empty block");
    const std::size_t dim_s = static_cast<std::size_t>(psi_s.size());
    const double e0 = res.states().at(block.front()).energy;
    Complex acc{0.0, 0.0};
    for (std::size_t idx : block) {
        if (idx >= res.size()) throw InvalidBlock("block index out of range");
        const auto& r = res.states()[idx];
        if (!same_energy(r.energy, e0)) {
            std::ostringstream os;
            os << "block mixes energies " << e0 << " and " << r.energy;
            throw InvalidBlock(os.str());
        }
        acc += r.weight * psi_s.dot(partial_inner(r.state, joint_u, r.state, dim_s, res.dim()) * psi_s);
    }
    return dynamic_factor * acc;
}

PhaseDistribution common_phase_distribution(const CMatrix& joint_u, const ReservoirSpec& res,
                                            const CVector& psi_s,
                                            const std::function<Complex(double)>& dynamic_factor) {
    const std::size_t dim_s = static_cast<std::size_t>(psi_s.size());
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto& r = res.states()[i];
        const Complex z = dynamic_factor(r.energy) *
                          psi_s.dot(partial_inner(r.state, joint_u, r.state, dim_s, res.dim()) * psi_s);
        atoms.push_back({r.weight, z, i, 0});
    }
    return PhaseDistribution(DistributionKind::kZ, std::move(atoms));
}

Complex uncoupled_dynamic_factor(const std::vector<CMatrix>& u_s, const TimeGrid& grid,
                                 const CVector& psi_s, double energy) {
    std::vector<CVector> states;
    states.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        states.push_back(std::exp(Complex{0.0, -energy * grid.at(k)}) * (u_s.at(k) * psi_s));
    }
    const double dyn = dynamic_phase(Trajectory(grid, std::move(states)));
    return std::exp(Complex{0.0, -dyn});
}

ReservoirSpec redecompose(const ReservoirSpec& res, const std::vector<BlockRotation>& rotations) {
    std::vector<bool> rotated(res.blocks().size(), false);
    std::vector<ReservoirState> out;

    for (const auto& rot : rotations) {
        if (rot.block >= res.blocks().size()) throw InvalidBlock("block index out of range");
        if (rotated[rot.block]) throw InvalidBlock("block rotated twice");
        rotated[rot.block] = true;
        const auto& idx = res.blocks()[rot.block];
        const auto m = static_cast<Eigen::Index>(idx.size());
        if (rot.unitary.rows() != m || rot.unitary.cols() != m) {
            throw DimensionError("block unitary does not match block size");
        }
        const double energy = res.states()[idx.front()].energy;
        for (Eigen::Index j = 0; j < m; ++j) {
            CVector v = CVector::Zero(static_cast<Eigen::Index>(res.dim()));
            for (Eigen::Index k = 0; k < m; ++k) {
                const auto& r = res.states()[idx[static_cast<std::size_t>(k)]];
                v += rot.unitary(j, k) * std::sqrt(r.weight) * r.state;
            }
            const double w = v.squaredNorm();
            if (w <= 1e-300) continue;
            out.push_back({w, v / std::sqrt(w), energy});
        }
    }
    for (std::size_t b = 0; b < res.blocks().size(); ++b) {
        if (rotated[b]) continue;
        for (std::size_t i : res.blocks()[b]) out.push_back(res.states()[i]);
    }

    // renormalize accumulated rounding in the weights before validation
    double total = 0.0;
    for (const auto& s : out) total += s.weight;
    for (auto& s : out) s.weight /= total;

    ReservoirSpec result(std::move(out), false);
    const double err = (result.density() - res.density()).norm();
    if (err > 1e-12) {
        std::ostringstream os;
        os << "redecomposition changes ρ_R by " << err;
        throw InvalidDecomposition(os.str());
    }
    return result;
}

CMatrix haar_unitary(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    CMatrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex{gauss(rng), gauss(rng)};
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        const Complex diag = r(j, j);
        if (std::abs(diag) > 0.0) q.col(j) *= diag / std::abs(diag);
    }
    return q;
}

CMatrix random_orthogonal(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return q.cast<Complex>();
}

} // namespace gpd
