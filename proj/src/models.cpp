// models.cpp: Spontaneous emission and phase damping of a two-level atom

#include "gpd/models.hpp"

#include <cmath>
#include <sstream>

#include "gpd/errors.hpp"

namespace gpd::models {

CMatrix sigma_z() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(kGround, kGround) = -1.0;
    m(kExcited, kExcited) = 1.0;
    return m;
}

CMatrix lowering() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(kGround, kExcited) = 1.0;
    return m;
}

CMatrix raising() { return lowering().adjoint(); }
CMatrix sigma_x() { return raising() + lowering(); }
CMatrix sigma_y() { return -kI * (raising() - lowering()); }

CMatrix excited_projector() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(kExcited, kExcited) = 1.0;
    return m;
}

CMatrix ground_projector() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(kGround, kGround) = 1.0;
    return m;
}

CVector initial_state(double theta) {
    CVector psi(2);
    psi(kGround) = std::sin(0.5 * theta);
    psi(kExcited) = std::cos(0.5 * theta);
    return psi;
}

Schedule atom_hamiltonian(double omega) { return Schedule::constant(-0.5 * omega * sigma_z()); }

double closed_system_gp(double theta) {
    const double s = std::sin(0.5 * theta);
    return 2.0 * kPi * s * s;
}

void TwoLevelAtomParams::validate() const {
    std::ostringstream os;
    if (!(omega > 0.0) || !std::isfinite(omega)) os << "omega must be > 0; ";
    if (!(gamma0 >= 0.0) || !std::isfinite(gamma0)) os << "gamma0 must be >= 0; ";
    if (!(n_thermal >= 0.0) || !std::isfinite(n_thermal)) os << "n_thermal must be >= 0; ";
    if (!(theta >= 0.0 && theta <= kPi)) os << "theta must lie in [0, pi]; ";
    if (!os.str().empty()) throw InvalidOperand(os.str());
}

void PhaseDampingParams::validate() const {
    std::ostringstream os;
    if (!(omega > 0.0) || !std::isfinite(omega)) os << "omega must be > 0; ";
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) os << "alpha must be >= 0; ";
    if (!(theta >= 0.0 && theta <= kPi)) os << "theta must lie in [0, pi]; ";
    if (!os.str().empty()) throw InvalidOperand(os.str());
}

double PhaseDampingParams::r_factor(double t) const {
    return std::sqrt(1.0 + std::sqrt(-std::expm1(-2.0 * alpha * t)));
}

namespace {

CMatrix diag_ge(Complex g, Complex e) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(kGround, kGround) = g;
    m(kExcited, kExcited) = e;
    return m;
}

// ln⟨ψ_S|e^{aσ_z}|ψ_S⟩ without cancellation for small a.
double log_expect_exp_sz(double theta, double a) {
    const double c2 = std::pow(std::cos(0.5 * theta), 2);
    const double s2 = std::pow(std::sin(0.5 * theta), 2);
    return std::log1p(c2 * std::expm1(a) + s2 * std::expm1(-a));
}

double expect_exp_sz(double theta, double a) { return std::exp(log_expect_exp_sz(theta, a)); }

// (ω/2γ) ln⟨e^{−2πγσ_z/ω}⟩, continuous through γ = 0 where it is −π cosθ.
double scaled_log_term(double theta, double gamma, double omega) {
    if (gamma == 0.0) return -kPi * std::cos(theta);
    return omega / (2.0 * gamma) * log_expect_exp_sz(theta, -2.0 * kPi * gamma / omega);
}

} // namespace

KrausChannel se_kraus_channel(const TwoLevelAtomParams& p) {
    p.validate();
    const double w = p.omega;
    const double g = p.gamma_n();
    auto jump_amp = [g](double t) { return std::sqrt(-std::expm1(-2.0 * g * t)); };

    Schedule k0([w, g](double t) {
        return diag_ge(std::exp(Complex{0.0, -0.5 * w * t}), std::exp(Complex{-g * t, 0.5 * w * t}));
    }, 2, false);
    Schedule k1([jump_amp](double t) -> CMatrix { return jump_amp(t) * lowering(); }, 2, false);
    Schedule k2([w, g](double t) {
        return diag_ge(std::exp(Complex{-g * t, -0.5 * w * t}), std::exp(Complex{0.0, 0.5 * w * t}));
    }, 2, false);
    Schedule k3([jump_amp](double t) -> CMatrix { return jump_amp(t) * raising(); }, 2, false);

    return KrausChannel({{p.p0(), k0}, {p.p0(), k1}, {p.p2(), k2}, {p.p2(), k3}});
}

LindbladModel se_lindblad_model(const TwoLevelAtomParams& p) {
    p.validate();
    return LindbladModel(atom_hamiltonian(p.omega), CMatrix::Zero(2, 2),
                         {std::sqrt(p.gamma0 * (p.n_thermal + 1.0)) * lowering(),
                          std::sqrt(p.gamma0 * p.n_thermal) * raising()});
}

SpontaneousEmissionAtoms se_closed_form_atoms(const TwoLevelAtomParams& p) {
    p.validate();
    const double x = kPi * p.gamma_n() / p.omega;
    const double pre = std::exp(-x);
    // exponent (±iω/2γ_n)·ln⟨e^{∓2πγ_nσ_z/ω}⟩
    const double phase_plus = scaled_log_term(p.theta, p.gamma_n(), p.omega);
    const double phase_minus = scaled_log_term(p.theta, -p.gamma_n(), p.omega);
    const Complex f_plus = -pre * expect_exp_sz(p.theta, -x) * std::exp(Complex{0.0, phase_plus});
    const Complex f_minus = -pre * expect_exp_sz(p.theta, x) * std::exp(Complex{0.0, phase_minus});
    return {f_plus, f_minus, p.p0(), p.p2()};
}

namespace {

std::pair<PhaseDistribution, PhaseDistribution> pair_from(std::vector<Atom> atoms) {
    PhaseDistribution pz(DistributionKind::kZ, std::move(atoms));
    PhaseDistribution ph = to_holevo(pz);
    return {std::move(pz), std::move(ph)};
}

} // namespace

std::pair<PhaseDistribution, PhaseDistribution> se_distributions(const TwoLevelAtomParams& p) {
    const auto f = se_closed_form_atoms(p);
    std::vector<Atom> atoms{{f.p0, f.f_plus, 0, 0}};
    if (f.p2 > 0.0) atoms.push_back({f.p2, f.f_minus, 2, 0});
    return pair_from(std::move(atoms));
}

std::pair<PhaseDistribution, PhaseDistribution> se_numeric_distributions(
    const TwoLevelAtomParams& p, std::size_t steps_per_period) {
    const TimeGrid grid = TimeGrid::periods(p.omega, 1.0, steps_per_period);
    auto trajs = kraus_trajectories(se_kraus_channel(p), initial_state(p.theta), grid);
    std::erase_if(trajs, [](const WeightedTrajectory& t) { return t.weight == 0.0; });
    PhaseDistribution pz = build_distribution(trajs, DistributionKind::kZ);
    PhaseDistribution ph = to_holevo(pz);
    return {std::move(pz), std::move(ph)};
}

double se_zero_temperature_gp(const TwoLevelAtomParams& p) {
    p.validate();
    return kPi + scaled_log_term(p.theta, p.gamma0, p.omega);
}

double se_weak_coupling_gp(const TwoLevelAtomParams& p) {
    p.validate();
    const double s = std::sin(p.theta);
    return closed_system_gp(p.theta) + kPi * kPi * (p.gamma0 / p.omega) * s * s;
}

namespace {

// Single-mode operator embedded at position `mode` of `n_modes` modes.
CMatrix embed(const CMatrix& op, std::size_t mode, std::size_t n_modes) {
    const auto levels = static_cast<std::size_t>(op.rows());
    CMatrix out = CMatrix::Identity(1, 1);
    for (std::size_t k = 0; k < n_modes; ++k) out = kron(out, k == mode ? op : identity(levels));
    return out;
}

CMatrix annihilation(std::size_t levels) {
    CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(levels), static_cast<Eigen::Index>(levels));
    for (std::size_t n = 1; n < levels; ++n) {
        a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

double mode_frequency(double omega, std::size_t k, std::size_t n_modes) {
    if (n_modes == 1) return omega;
    return omega * (0.75 + 0.5 * static_cast<double>(k) / static_cast<double>(n_modes - 1));
}

// Fock product states as reservoir eigenstates of H_R = Σ ω_k n_k.
ReservoirSpec fock_reservoir(const std::vector<double>& freqs, std::size_t levels,
                             const std::vector<double>& mode_populations) {
    const std::size_t n_modes = freqs.size();
    std::size_t dim = 1;
    for (std::size_t k = 0; k < n_modes; ++k) dim *= levels;
    std::vector<ReservoirState> states;
    for (std::size_t idx = 0; idx < dim; ++idx) {
        std::size_t rest = idx;
        double energy = 0.0;
        double weight = 1.0;
        for (std::size_t k = n_modes; k-- > 0;) {
            const std::size_t n = rest % levels;
            rest /= levels;
            energy += freqs[k] * static_cast<double>(n);
            weight *= mode_populations[n];
        }
        states.push_back({weight, CVector::Unit(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(idx)),
                          energy});
    }
    double total = 0.0;
    for (const auto& s : states) total += s.weight;
    for (auto& s : states) s.weight /= total;
    return ReservoirSpec(std::move(states));
}

} // namespace

weak::WeakCouplingModel se_vacuum_bath(const TwoLevelAtomParams& p, std::size_t n_modes,
                                       double coupling) {
    p.validate();
    if (n_modes == 0) throw InvalidOperand("bath needs at least one mode");
    const std::size_t levels = 2;
    const CMatrix a = annihilation(levels);
    std::vector<double> freqs;
    const auto dim = static_cast<Eigen::Index>(std::pow(levels, n_modes));
    CMatrix h_r = CMatrix::Zero(dim, dim);
    CMatrix quad_x = CMatrix::Zero(dim, dim);
    CMatrix quad_y = CMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < n_modes; ++k) {
        freqs.push_back(mode_frequency(p.omega, k, n_modes));
        const CMatrix ak = embed(a, k, n_modes);
        h_r += freqs.back() * ak.adjoint() * ak;
        quad_x += 0.5 * coupling * (ak + ak.adjoint());
        quad_y += 0.5 * coupling * kI * (ak - ak.adjoint());
    }
    // a σ+ + a† σ− = ½[(a + a†) σ_x + i(a − a†) σ_y]
    std::vector<weak::Coupling> couplings{{quad_x, sigma_x()}, {quad_y, sigma_y()}};
    ReservoirSpec res = fock_reservoir(freqs, levels, {1.0, 0.0});
    return weak::WeakCouplingModel(atom_hamiltonian(p.omega), h_r, std::move(couplings), std::move(res),
                                   initial_state(p.theta));
}

KrausChannel pd_kraus_channel(const PhaseDampingParams& p) {
    p.validate();
    const double w = p.omega;
    const double al = p.alpha;
    Schedule k0([p, w, al](double t) {
        const double r = p.r_factor(t);
        return diag_ge(std::exp(Complex{-al * t, -0.5 * w * t}) / r, r * std::exp(Complex{0.0, 0.5 * w * t}));
    }, 2, false);
    Schedule k1([p, w, al](double t) {
        const double r = p.r_factor(t);
        return diag_ge(r * std::exp(Complex{0.0, -0.5 * w * t}), std::exp(Complex{-al * t, 0.5 * w * t}) / r);
    }, 2, false);
    return KrausChannel({{0.5, k0}, {0.5, k1}});
}

LindbladModel pd_lindblad_model(const PhaseDampingParams& p) {
    p.validate();
    return LindbladModel(atom_hamiltonian(p.omega), CMatrix::Zero(2, 2),
                         {0.5 * std::sqrt(p.alpha) * sigma_z()});
}

PhaseDampingMoments pd_moments(const PhaseDampingParams& p, std::size_t steps_per_period) {
    p.validate();
    const TimeGrid grid = TimeGrid::periods(p.omega, 1.0, steps_per_period);
    const auto trajs = kraus_trajectories(pd_kraus_channel(p), initial_state(p.theta), grid);
    const PhaseDistribution pz = build_distribution(trajs, DistributionKind::kZ);
    const MomentReport rep = moments(pz, 1);

    PhaseDampingMoments out{};
    out.mean_gp_z = std::exp(Complex{0.0, *rep.mean_gp_z});
    out.mean_gp_h = *rep.mean_gp_h;
    out.spread_w = *rep.spread_w;

    const double s = std::sin(p.theta);
    const double c = std::cos(p.theta);
    const double ratio = p.alpha / p.omega;
    out.beta0 = closed_system_gp(p.theta);
    const Complex e0 = std::exp(Complex{0.0, out.beta0});
    out.reference_mean_gp_z = e0 * (1.0 + kI * (2.0 * kPi * kPi * ratio / 3.0) * c * s * s);
    out.reference_mean_gp_h =
        e0 * (1.0 + (2.0 * kPi * kPi * ratio) * s * s * (kI * c - (4.0 / 9.0) * s * s));
    out.reference_spread_w = 16.0 * kPi * kPi * std::pow(s, 4) * ratio / 9.0;
    out.leading_spread_w = 16.0 * kPi * kPi * kPi * std::pow(s, 4) * ratio / 9.0;
    return out;
}

weak::WeakCouplingModel pd_thermal_bath(const PhaseDampingParams& p, double n_mean,
                                        std::size_t n_modes, std::size_t fock_levels,
                                        double coupling) {
    p.validate();
    if (n_modes == 0 || fock_levels < 2) throw InvalidOperand("bath needs modes with >= 2 levels");
    if (!(n_mean >= 0.0)) throw InvalidOperand("mean occupation must be >= 0");
    const CMatrix a = annihilation(fock_levels);
    std::vector<double> freqs;
    std::size_t dim_sz = 1;
    for (std::size_t k = 0; k < n_modes; ++k) dim_sz *= fock_levels;
    const auto dim = static_cast<Eigen::Index>(dim_sz);
    CMatrix h_r = CMatrix::Zero(dim, dim);
    CMatrix occupation = CMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < n_modes; ++k) {
        freqs.push_back(mode_frequency(p.omega, k, n_modes));
        const CMatrix nk = embed(a.adjoint() * a, k, n_modes);
        h_r += freqs.back() * nk;
        occupation += coupling * nk;
    }
    std::vector<double> pops;
    const double x = n_mean / (1.0 + n_mean);
    for (std::size_t n = 0; n < fock_levels; ++n) pops.push_back(std::pow(x, static_cast<double>(n)));
    // H_I = σ_z Σ g a†a, i.e. R = −Σ g a†a with S = σ_z in H_I = −R S
    std::vector<weak::Coupling> couplings{{-occupation, sigma_z()}};
    return weak::WeakCouplingModel(atom_hamiltonian(p.omega), h_r, std::move(couplings),
                                   fock_reservoir(freqs, fock_levels, pops), initial_state(p.theta));
}

} // namespace gpd::models
