#include "runner.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "gpd/channels.hpp"
#include "gpd/errors.hpp"
#include "gpd/models.hpp"
#include "gpd/phase.hpp"
#include "gpd/weakcoupling.hpp"

namespace gpd::cli {

namespace m = gpd::models;

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string describe(const Scenario& s) {
    std::ostringstream os;
    os << model_name(s.model) << " with ";
    switch (s.model) {
    case ModelKind::kSpontaneousEmission:
        os << "omega=" << num(s.omega) << ", gamma0=" << num(s.gamma0) << ", n_thermal=" << num(s.n_thermal)
           << ", theta=" << num(s.theta);
        break;
    case ModelKind::kPhaseDamping:
        os << "omega=" << num(s.omega) << ", alpha=" << num(s.alpha) << ", theta=" << num(s.theta);
        break;
    case ModelKind::kCustomJoint:
    case ModelKind::kCustomLindblad:
        os << "scale=" << num(s.scale) << ", t_end=" << num(s.t_end);
        break;
    }
    return os.str();
}

CVector normalized_psi(const Scenario& s) {
    const double n = s.psi_s.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidState("psi_s must be a non-zero finite vector");
    return s.psi_s / n;
}

weak::WeakCouplingModel joint_model(const Scenario& s) {
    std::vector<weak::Coupling> cs;
    for (const auto& c : s.couplings) cs.push_back({s.scale * c.r, c.s});
    return weak::WeakCouplingModel(Schedule::constant(s.h_s), s.h_r, std::move(cs),
                                   ReservoirSpec::from_hamiltonian(s.h_r, s.reservoir_weights), normalized_psi(s));
}

LindbladModel lindblad_model(const Scenario& s) {
    if (s.delta_h.rows() != s.h_s.rows()) throw DimensionError("delta_h does not match h_s");
    std::vector<CMatrix> jumps;
    for (const auto& j : s.jumps) {
        if (j.rows() != s.h_s.rows()) throw DimensionError("jump operator does not match h_s");
        jumps.push_back(std::sqrt(s.scale) * j);
    }
    if (s.psi_s.size() != s.h_s.rows()) throw DimensionError("psi_s does not match h_s");
    if (!is_hermitian(s.delta_h)) throw InvalidOperand("delta_h must be Hermitian");
    return LindbladModel(Schedule::constant(s.h_s), s.delta_h, std::move(jumps));
}

void fill_distributions(PointResult& r, const PhaseDistribution& pz, std::size_t n_max) {
    const MomentReport rep = moments(pz, n_max);
    r.z_atoms = pz.atoms();
    r.z_moments = rep.z_moments;
    r.z_normalized = rep.z_normalized;
    r.mean_gp_z = rep.mean_gp_z;
    if (rep.mean_gp_h) {
        r.h_atoms = to_holevo(pz).atoms();
        r.h_moments = rep.h_moments;
        r.mean_gp_h = std::arg(*rep.mean_gp_h);
        r.abs_mean_h = std::abs(*rep.mean_gp_h);
        r.spread_w = rep.spread_w;
    }
}

void spontaneous_emission(const Scenario& s, PointResult& r) {
    const m::TwoLevelAtomParams p{s.omega, s.gamma0, s.n_thermal, s.theta};
    fill_distributions(r, m::se_numeric_distributions(p, s.steps_per_period).first, s.max_moment);
    const MomentReport closed = moments(m::se_distributions(p).first, 1);
    r.closed_mean_gp_z = closed.mean_gp_z;
    if (closed.mean_gp_h) r.closed_mean_gp_h = std::arg(*closed.mean_gp_h);
    r.closed_spread_w = closed.spread_w;
    r.beta0 = m::closed_system_gp(s.theta);
    r.pert_gp_z = r.pert_gp_h = m::se_weak_coupling_gp(p);
    r.small = p.gamma_n() / s.omega;
    r.small_label = "gamma_n/omega";
}

void phase_damping(const Scenario& s, PointResult& r) {
    const m::PhaseDampingParams p{s.omega, s.alpha, s.theta};
    const TimeGrid grid = TimeGrid::periods(s.omega, 1.0, s.steps_per_period);
    const auto trajs = kraus_trajectories(m::pd_kraus_channel(p), m::initial_state(s.theta), grid);
    fill_distributions(r, build_distribution(trajs, DistributionKind::kZ), s.max_moment);
    const auto pm = m::pd_moments(p, s.steps_per_period);
    r.beta0 = pm.beta0;
    r.pert_gp_z = unwrap_near(std::arg(pm.reference_mean_gp_z), r.beta0);
    r.pert_gp_h = unwrap_near(std::arg(pm.reference_mean_gp_h), r.beta0);
    r.reference_w = pm.reference_spread_w;
    r.small = s.alpha / s.omega;
    r.small_label = "alpha/omega";
}

void custom_joint(const Scenario& s, PointResult& r, std::uint64_t seed) {
    const weak::WeakCouplingModel model = joint_model(s);
    const TimeGrid grid(0.0, s.t_end, s.steps);
    const CVector psi = model.psi_s();
    const auto joint = time_ordered_propagator(model.joint_hamiltonian(), grid);
    const auto trajs = conditional_trajectories(joint, grid, model.reservoir(), SystemEnsemble::pure(psi));
    fill_distributions(r, build_distribution(trajs, DistributionKind::kZ), s.max_moment);

    const auto ops = weak::build_ab(model, grid);
    r.beta0 = weak::unperturbed_phase(ops, psi);
    if (model.rcond_violation() <= 1e-10) {
        const Complex m1 = weak::perturbative_moment(weak::delta_z(ops, model), r.beta0, 1);
        r.pert_gp_z = r.pert_gp_h = unwrap_near(std::arg(m1), r.beta0);
    }
    double coupling_norm = 0.0;
    for (const auto& c : model.couplings()) coupling_norm += (c.r.norm() * c.s.norm());
    r.small = coupling_norm * s.t_end;
    r.small_label = "|H_I|*t_end";

    if (s.random_decompositions == 0) return;
    const auto u_s = time_ordered_propagator(model.h_s(), grid);
    const auto dyn = [&](double e) { return uncoupled_dynamic_factor(u_s, grid, psi, e); };
    const ReservoirSpec& res = model.reservoir();
    const Complex base_z = moments(common_phase_distribution(joint.back(), res, psi, dyn), 1).z_moments[0];
    const Complex base_h = r.h_moments.empty() ? Complex{} : r.h_moments[0];
    std::mt19937_64 rng(seed);
    double spread_z = 0.0, spread_h = 0.0;
    for (std::size_t k = 0; k < s.random_decompositions; ++k) {
        std::vector<BlockRotation> rots;
        for (std::size_t b = 0; b < res.blocks().size(); ++b)
            if (res.blocks()[b].size() > 1) rots.push_back({b, haar_unitary(res.blocks()[b].size(), rng)});
        if (rots.empty()) break;
        const ReservoirSpec alt = redecompose(res, rots);
        const Complex z = moments(common_phase_distribution(joint.back(), alt, psi, dyn), 1).z_moments[0];
        spread_z = std::max(spread_z, std::abs(z - base_z));
        const auto alt_trajs = conditional_trajectories(joint, grid, alt, SystemEnsemble::pure(psi));
        const MomentReport h = moments(to_holevo(build_distribution(alt_trajs, DistributionKind::kZ)), 1);
        spread_h = std::max(spread_h, std::abs(h.h_moments[0] - base_h));
    }
    r.decomposition_spread_z = spread_z;
    r.decomposition_spread_h = spread_h;
}

void custom_lindblad(const Scenario& s, PointResult& r) {
    const LindbladModel model = lindblad_model(s);
    const CVector psi = normalized_psi(s);
    const auto ops = weak::markov_operators(model, TimeGrid(0.0, s.t_end, s.steps));
    r.beta0 = weak::unperturbed_phase(ops, psi);
    const Complex m1 = weak::perturbative_moment(weak::delta_z(ops, psi), r.beta0, 1);
    r.pert_gp_z = r.pert_gp_h = unwrap_near(std::arg(m1), r.beta0);
    r.small = model.dissipator_sum().norm() * s.t_end;
    r.small_label = "|sum L^dag L|*t_end";
}

std::vector<std::optional<double>> unwrap_series(const std::vector<PointResult>& pts,
                                                 const std::vector<double>& beta0,
                                                 std::optional<double> PointResult::*field) {
    std::vector<std::optional<double>> out(pts.size());
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& v = pts[i].*field;
        if (!v) continue;
        const double anchor = prev ? *out[*prev] + (beta0[i] - beta0[*prev]) : beta0[i];
        out[i] = unwrap_near(*v, anchor);
        prev = i;
    }
    return out;
}

} // namespace

PointFailure::PointFailure(std::size_t index, const std::string& point, const std::string& cause)
    : std::runtime_error("numerical failure at point " + std::to_string(index) + " (" + point + "): " + cause),
      index_(index) {}

void validate_point(const Scenario& s) {
    switch (s.model) {
    case ModelKind::kSpontaneousEmission:
        m::TwoLevelAtomParams{s.omega, s.gamma0, s.n_thermal, s.theta}.validate();
        break;
    case ModelKind::kPhaseDamping:
        m::PhaseDampingParams{s.omega, s.alpha, s.theta}.validate();
        break;
    case ModelKind::kCustomJoint:
        if (!(s.scale >= 0.0)) throw InvalidOperand("scale must be >= 0");
        if (!(s.t_end > 0.0)) throw InvalidOperand("t_end must be positive");
        joint_model(s);
        break;
    case ModelKind::kCustomLindblad:
        if (!(s.scale >= 0.0)) throw InvalidOperand("scale must be >= 0");
        if (!(s.t_end > 0.0)) throw InvalidOperand("t_end must be positive");
        lindblad_model(s);
        normalized_psi(s);
        break;
    }
}

PointResult evaluate_point(const Scenario& s, std::size_t index, std::uint64_t seed) {
    PointResult r;
    if (s.sweep_parameter) r.value = s.get(*s.sweep_parameter);
    switch (s.model) {
    case ModelKind::kSpontaneousEmission: spontaneous_emission(s, r); break;
    case ModelKind::kPhaseDamping: phase_damping(s, r); break;
    case ModelKind::kCustomJoint: custom_joint(s, r, seed + index); break;
    case ModelKind::kCustomLindblad: custom_lindblad(s, r); break;
    }
    return r;
}

RunResult evaluate(const Scenario& sc, const RunOptions& opts) {
    std::vector<Scenario> points;
    if (sc.sweep_parameter)
        for (double v : sc.sweep_values) points.push_back(sc.with(*sc.sweep_parameter, v));
    else
        points.push_back(sc);

    const std::size_t n = points.size();
    std::vector<PointResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = evaluate_point(points[i], i, opts.seed);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(std::max<std::size_t>(opts.threads, 1), n);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw PointFailure(i, describe(points[i]), e.what());
        }
    }

    RunResult out{sc, std::move(results), {}, {}, {}, {}};
    std::vector<double> beta0;
    for (const auto& p : out.points) beta0.push_back(p.beta0);
    beta0 = unwrap_sequence(beta0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& p = out.points[i];
        const double shift = beta0[i] - p.beta0;
        p.beta0 = beta0[i];
        if (p.pert_gp_z) *p.pert_gp_z += shift;
        if (p.pert_gp_h) *p.pert_gp_h += shift;
    }
    out.mean_gp_z_unwrapped = unwrap_series(out.points, beta0, &PointResult::mean_gp_z);
    out.mean_gp_h_unwrapped = unwrap_series(out.points, beta0, &PointResult::mean_gp_h);
    out.closed_gp_z_unwrapped = unwrap_series(out.points, beta0, &PointResult::closed_mean_gp_z);
    out.closed_gp_h_unwrapped = unwrap_series(out.points, beta0, &PointResult::closed_mean_gp_h);
    return out;
}

bool supports_compare(ModelKind kind) { return kind != ModelKind::kCustomLindblad; }

namespace {

std::string units_of(const std::string& p) {
    if (p == "theta") return "rad";
    if (p == "omega" || p == "gamma0" || p == "alpha") return "1/time";
    if (p == "t_end") return "time";
    return "dimensionless";
}

Cell opt(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

struct Prefix {
    std::vector<Column> columns;
    std::vector<Cell> cells(const RunResult& r, std::size_t i) const {
        std::vector<Cell> c{static_cast<std::int64_t>(i)};
        if (r.scenario.sweep_parameter) c.emplace_back(r.points[i].value);
        return c;
    }
};

Prefix prefix(const RunResult& r) {
    Prefix p;
    p.columns.push_back({"point", "-", "index"});
    if (r.scenario.sweep_parameter)
        p.columns.push_back({*r.scenario.sweep_parameter, "-", units_of(*r.scenario.sweep_parameter)});
    return p;
}

template <typename... T>
std::vector<Cell> join(std::vector<Cell> head, T&&... rest) {
    (head.emplace_back(std::forward<T>(rest)), ...);
    return head;
}

Table atoms_table(const RunResult& r) {
    const Prefix p = prefix(r);
    Table t{"atoms", p.columns, {}};
    t.columns.insert(t.columns.end(), {{"measure", "-", "label"},
                                       {"label_r", "-", "index"},
                                       {"label_s", "-", "index"},
                                       {"weight", "row", "dimensionless"},
                                       {"re_value", "row", "dimensionless"},
                                       {"im_value", "row", "dimensionless"},
                                       {"phase_principal", "row", "rad"}});
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto emit = [&](const std::vector<Atom>& atoms, const char* measure) {
            for (const auto& a : atoms)
                t.add_row(join(p.cells(r, i), std::string(measure), static_cast<std::int64_t>(a.label_r),
                               static_cast<std::int64_t>(a.label_s), a.weight, a.value.real(), a.value.imag(),
                               std::abs(a.value) > 0.0 ? Cell{principal_arg(a.value)} : Cell{}));
        };
        emit(r.points[i].z_atoms, "Z");
        emit(r.points[i].h_atoms, "H");
    }
    return t;
}

Table moments_table(const RunResult& r) {
    const Prefix p = prefix(r);
    Table t{"moments", p.columns, {}};
    t.columns.insert(t.columns.end(), {{"order", "-", "index"},
                                       {"re_moment", "Z", "dimensionless"},
                                       {"im_moment", "Z", "dimensionless"},
                                       {"re_normalized_moment", "Z", "dimensionless"},
                                       {"im_normalized_moment", "Z", "dimensionless"},
                                       {"re_moment", "H", "dimensionless"},
                                       {"im_moment", "H", "dimensionless"}});
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& pt = r.points[i];
        const std::size_t n = std::max(pt.z_moments.size(), pt.h_moments.size());
        for (std::size_t k = 0; k < n; ++k) {
            const auto part = [](const std::vector<Complex>& v, std::size_t k, bool im) {
                return k < v.size() ? Cell{im ? v[k].imag() : v[k].real()} : Cell{};
            };
            t.add_row(join(p.cells(r, i), static_cast<std::int64_t>(k + 1), part(pt.z_moments, k, false),
                           part(pt.z_moments, k, true), part(pt.z_normalized, k, false),
                           part(pt.z_normalized, k, true), part(pt.h_moments, k, false),
                           part(pt.h_moments, k, true)));
        }
    }
    return t;
}

Table spread_table(const RunResult& r) {
    const Prefix p = prefix(r);
    Table t{"spread", p.columns, {}};
    t.columns.insert(t.columns.end(), {{"abs_mean_phase_factor", "H", "dimensionless"},
                                       {"W", "H", "dimensionless"},
                                       {"closed_form_W", "H", "dimensionless"},
                                       {"reference_W", "H", "dimensionless"}});
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& pt = r.points[i];
        t.add_row(join(p.cells(r, i), opt(pt.abs_mean_h), opt(pt.spread_w), opt(pt.closed_spread_w),
                       opt(pt.reference_w)));
    }
    return t;
}

Table sweep_table(const RunResult& r) {
    const Prefix p = prefix(r);
    Table t{"sweep_table", p.columns, {}};
    t.columns.insert(t.columns.end(), {{"uncoupled_gp_unwrapped", "-", "rad"},
                                       {"mean_gp_principal", "Z", "rad"},
                                       {"mean_gp_unwrapped", "Z", "rad"},
                                       {"mean_gp_principal", "H", "rad"},
                                       {"mean_gp_unwrapped", "H", "rad"},
                                       {"abs_mean_phase_factor", "H", "dimensionless"},
                                       {"W", "H", "dimensionless"},
                                       {"closed_form_mean_gp_unwrapped", "Z", "rad"},
                                       {"closed_form_mean_gp_unwrapped", "H", "rad"},
                                       {"perturbative_mean_gp_unwrapped", "Z", "rad"},
                                       {"perturbative_mean_gp_unwrapped", "H", "rad"}});
    const bool decomp = r.scenario.random_decompositions > 0;
    if (decomp) {
        t.columns.push_back({"decomposition_spread_first_moment", "Z", "dimensionless"});
        t.columns.push_back({"decomposition_spread_first_moment", "H", "dimensionless"});
    }
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& pt = r.points[i];
        auto row = join(p.cells(r, i), pt.beta0, opt(pt.mean_gp_z), opt(r.mean_gp_z_unwrapped[i]),
                        opt(pt.mean_gp_h), opt(r.mean_gp_h_unwrapped[i]), opt(pt.abs_mean_h), opt(pt.spread_w),
                        opt(r.closed_gp_z_unwrapped[i]), opt(r.closed_gp_h_unwrapped[i]), opt(pt.pert_gp_z),
                        opt(pt.pert_gp_h));
        if (decomp) row = join(std::move(row), opt(pt.decomposition_spread_z), opt(pt.decomposition_spread_h));
        t.add_row(std::move(row));
    }
    return t;
}

Table comparison_table(const RunResult& r) {
    const Prefix p = prefix(r);
    Table t{"comparison", p.columns, {}};
    const int power = r.scenario.model == ModelKind::kCustomJoint ? 3 : 2;
    t.columns.insert(t.columns.end(), {{"exact_mean_gp_unwrapped", "Z", "rad"},
                                       {"exact_mean_gp_unwrapped", "H", "rad"},
                                       {"perturbative_mean_gp_unwrapped", "Z", "rad"},
                                       {"perturbative_mean_gp_unwrapped", "H", "rad"},
                                       {"abs_difference", "Z", "rad"},
                                       {"abs_difference", "H", "rad"},
                                       {"exact_difference_Z_minus_H", "Z-H", "rad"},
                                       {"expansion_parameter", "-", "dimensionless"},
                                       {"expected_order", "-", "dimensionless"},
                                       {"order_violation", "-", "flag"}});
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& pt = r.points[i];
        const double order = std::pow(pt.small, power);
        const double limit = kOrderFactor * order + kOrderFloor;
        const auto diff = [](const std::optional<double>& a, const std::optional<double>& b) -> std::optional<double> {
            if (!a || !b) return std::nullopt;
            return std::abs(principal_angle(*a - *b));
        };
        const auto dz = diff(r.mean_gp_z_unwrapped[i], pt.pert_gp_z);
        const auto dh = diff(r.mean_gp_h_unwrapped[i], pt.pert_gp_h);
        const auto zh = r.mean_gp_z_unwrapped[i] && r.mean_gp_h_unwrapped[i]
                            ? std::optional<double>(principal_angle(*r.mean_gp_z_unwrapped[i] - *r.mean_gp_h_unwrapped[i]))
                            : std::nullopt;
        const bool violated = (dz && *dz > limit) || (dh && *dh > limit);
        t.add_row(join(p.cells(r, i), opt(r.mean_gp_z_unwrapped[i]), opt(r.mean_gp_h_unwrapped[i]),
                       opt(pt.pert_gp_z), opt(pt.pert_gp_h), opt(dz), opt(dh), opt(zh), pt.small, order,
                       static_cast<std::int64_t>(violated)));
    }
    return t;
}

} // namespace

Table artifact_table(const RunResult& r, Artifact a) {
    switch (a) {
    case Artifact::kAtoms: return atoms_table(r);
    case Artifact::kMoments: return moments_table(r);
    case Artifact::kSpread: return spread_table(r);
    case Artifact::kSweepTable: return sweep_table(r);
    case Artifact::kComparison: return comparison_table(r);
    }
    throw std::logic_error("unknown artifact");
}

} // namespace gpd::cli
