#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpd/channels.hpp"
#include "gpd/errors.hpp"
#include "support.hpp"

using namespace gpd;
using gpd::testing::max_abs;

namespace {

CMatrix ket_bra(Eigen::Index i, Eigen::Index j, Eigen::Index d = 2) {
    CMatrix m = CMatrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

CMatrix sz() { return ket_bra(1, 1) - ket_bra(0, 0); }

Schedule atom(double omega) { return Schedule::constant(-0.5 * omega * sz()); }

CMatrix random_density(std::size_t dim, std::mt19937_64& rng) {
    const CMatrix a = gpd::testing::random_matrix(dim, rng);
    const CMatrix rho = a * a.adjoint();
    return rho / rho.trace().real();
}

} // namespace

TEST_CASE("reservoir spec validation and blocks") {
    CVector e0 = CVector::Unit(3, 0), e1 = CVector::Unit(3, 1), e2 = CVector::Unit(3, 2);
    const ReservoirSpec spec({{0.5, e0, 1.0}, {0.2, e1, 0.0}, {0.3, e2, 1.0 + 1e-12}});
    REQUIRE(spec.blocks().size() == 2);
    CHECK(spec.blocks()[0] == std::vector<std::size_t>{1});
    CHECK(spec.blocks()[1] == std::vector<std::size_t>{0, 2});
    CHECK(spec.block_of(2) == 1);
    CMatrix rho = CMatrix::Zero(3, 3);
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.2;
    rho(2, 2) = 0.3;
    CHECK(max_abs(spec.density() - rho) < 1e-15);

    CHECK_THROWS_AS(ReservoirSpec({{0.5, e0, 0.0}, {0.4, e1, 0.0}}), InvalidState);
    CHECK_THROWS_AS(ReservoirSpec({{-0.1, e0, 0.0}, {1.1, e1, 0.0}}), InvalidState);
    CHECK_THROWS_AS(ReservoirSpec({{1.0, 2.0 * e0, 0.0}}), InvalidState);
    const CVector tilted = (e0 + e1).normalized();
    CHECK_THROWS_AS(ReservoirSpec({{0.5, e0, 0.0}, {0.5, tilted, 0.0}}), InvalidState);
    CHECK_NOTHROW(ReservoirSpec({{0.5, e0, 0.0}, {0.5, tilted, 0.0}}, false));

    CHECK(same_energy(1e6, 1e6 + 1e-4));
    CHECK_FALSE(same_energy(0.0, 1e-8));
}

TEST_CASE("reservoir spec from a Hamiltonian") {
    CMatrix h = CMatrix::Zero(3, 3);
    h(0, 0) = 2.0;
    h(1, 1) = 2.0;
    h(2, 2) = -1.0;
    const ReservoirSpec spec = ReservoirSpec::from_hamiltonian(h, {0.2, 0.3, 0.5});
    CHECK(spec.blocks().size() == 2);
    for (const auto& s : spec.states()) CHECK((h * s.state - s.energy * s.state).norm() < 1e-12);
}

TEST_CASE("Lindblad right-hand side") {
    std::mt19937_64 rng(2);
    SUBCASE("no jumps, commuting state") {
        const LindbladModel m(atom(1.0), CMatrix(), {});
        CHECK(max_abs(lindblad_rhs(ket_bra(1, 1), m, 0.3)) == 0.0);
    }
    SUBCASE("Hermitian jump on the maximally mixed state") {
        const LindbladModel m(Schedule::constant(gpd::testing::random_hermitian(3, rng)), CMatrix(),
                              {gpd::testing::random_hermitian(3, rng)});
        CHECK(max_abs(lindblad_rhs(identity(3) / 3.0, m, 0.0)) < 1e-14);
    }
    SUBCASE("thermal emission from the excited state") {
        // L1 = a|g><e|, L2 = b|e><g| with a² = γ0(n+1), b² = γ0 n acting on |e><e|:
        // d/dt ρ_ee = -2a², d/dt ρ_gg = +2a², coherences untouched
        const double g0 = 0.07, n = 1.5;
        const LindbladModel m(atom(1.0), CMatrix(),
                              {std::sqrt(g0 * (n + 1)) * ket_bra(0, 1), std::sqrt(g0 * n) * ket_bra(1, 0)});
        const CMatrix d = lindblad_rhs(ket_bra(1, 1), m, 0.0);
        CHECK(std::abs(d(1, 1) - (-2.0 * g0 * (n + 1))) < 1e-15);
        CHECK(std::abs(d(0, 0) - 2.0 * g0 * (n + 1)) < 1e-15);
        CHECK(std::abs(d(0, 1)) == 0.0);
    }
    SUBCASE("random models give traceless Hermitian derivatives") {
        for (int trial = 0; trial < 20; ++trial) {
            const LindbladModel m(Schedule::constant(gpd::testing::random_hermitian(4, rng)),
                                  gpd::testing::random_hermitian(4, rng, 0.1),
                                  {gpd::testing::random_matrix(4, rng, 0.3), gpd::testing::random_matrix(4, rng, 0.3)});
            const CMatrix d = lindblad_rhs(random_density(4, rng), m, 0.0);
            CHECK(std::abs(d.trace()) < 1e-12);
            CHECK(max_abs(d - d.adjoint()) < 1e-12);
        }
    }
}

TEST_CASE("Lindblad model validation") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(LindbladModel(atom(1.0), gpd::testing::random_matrix(2, rng), {}), InvalidOperand);
    CHECK_THROWS_AS(LindbladModel(atom(1.0), CMatrix(), {CMatrix::Zero(3, 3)}), DimensionError);
    const LindbladModel m(atom(1.0), CMatrix(), {2.0 * ket_bra(0, 1)});
    CHECK(max_abs(m.dissipator_sum() - 4.0 * ket_bra(1, 1)) == 0.0);
    const CMatrix heff = m.effective_hamiltonian().at(0.0);
    CHECK(std::abs(heff(1, 1) - Complex{-0.5, -4.0}) < 1e-15);
}

TEST_CASE("closed-system integration matches unitary conjugation") {
    std::mt19937_64 rng(3);
    const CMatrix h0 = gpd::testing::random_hermitian(3, rng);
    const CMatrix h1 = gpd::testing::random_hermitian(3, rng);
    const Schedule h([=](double t) -> CMatrix { return h0 + std::cos(t) * h1; }, 3);
    const TimeGrid grid(0.0, 3.0, 3000);
    const CMatrix rho0 = random_density(3, rng);
    const auto rhos = integrate_lindblad(LindbladModel(h, CMatrix(), {}), rho0, grid);
    const auto u = time_ordered_propagator(h, grid);
    for (std::size_t k = 0; k < grid.size(); k += 100) {
        CHECK(max_abs(rhos[k] - u[k] * rho0 * u[k].adjoint()) < 1e-6);
    }
    // both schemes converge to the same limit; refine the propagator to separate them
    const TimeGrid fine(0.0, 3.0, 3000 * 8);
    const CMatrix uf = time_ordered_propagator(h, fine).back();
    CHECK(max_abs(rhos.back() - uf * rho0 * uf.adjoint()) < 1e-8);
}

TEST_CASE("spontaneous emission population decays as exp(-2 γ0 t)") {
    const double g0 = 0.05;
    const LindbladModel m(atom(1.0), CMatrix(), {std::sqrt(g0) * ket_bra(0, 1)});
    const TimeGrid grid(0.0, 10.0, 4000);
    const auto rhos = integrate_lindblad(m, ket_bra(1, 1), grid);
    for (std::size_t k = 0; k < grid.size(); k += 250) {
        CHECK(std::abs(rhos[k](1, 1).real() - std::exp(-2.0 * g0 * grid.at(k))) < 1e-10);
        CHECK(std::abs(rhos[k].trace() - 1.0) < 1e-12);
    }
}

TEST_CASE("σ_z dephasing decays coherences as exp(-4 c² t)") {
    const double c = 0.2;
    const LindbladModel m(atom(1.0), CMatrix(), {c * sz()});
    CVector plus(2);
    plus << 1.0, 1.0;
    plus /= std::sqrt(2.0);
    const TimeGrid grid(0.0, 6.0, 3000);
    const auto rhos = integrate_lindblad(m, projector(plus), grid);
    for (std::size_t k = 0; k < grid.size(); k += 300) {
        CHECK(std::abs(std::abs(rhos[k](0, 1)) - 0.5 * std::exp(-4.0 * c * c * grid.at(k))) < 1e-10);
        CHECK(std::abs(rhos[k](1, 1).real() - 0.5) < 1e-12);
    }
}

TEST_CASE("integration keeps positivity and flags divergence") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        const LindbladModel m(Schedule::constant(gpd::testing::random_hermitian(3, rng)), CMatrix(),
                              {gpd::testing::random_matrix(3, rng, 0.2)});
        for (const auto& rho : integrate_lindblad(m, random_density(3, rng), TimeGrid(0.0, 4.0, 2000))) {
            CHECK(min_eigenvalue(rho) >= -1e-9);
        }
    }
    const LindbladModel stiff(atom(1.0), CMatrix(), {100.0 * ket_bra(0, 1)});
    CHECK_THROWS_AS(integrate_lindblad(stiff, ket_bra(1, 1), TimeGrid(0.0, 100.0, 10)), IntegrationDiverged);
    CHECK_THROWS_AS(integrate_lindblad(stiff, ket_bra(0, 1), TimeGrid(0.0, 1.0, 10)), InvalidState);
}

TEST_CASE("Kraus channel application") {
    std::mt19937_64 rng(5);
    const CMatrix h = gpd::testing::random_hermitian(2, rng);
    const KrausChannel unitary({{1.0, Schedule([h](double t) -> CMatrix { return matexp(Complex{0.0, -t} * h); }, 2, false)}});
    const CMatrix rho0 = random_density(2, rng);
    const CMatrix u = matexp(Complex{0.0, -0.8} * h);
    CHECK(max_abs(apply_kraus(unitary, rho0, 0.8) - u * rho0 * u.adjoint()) < 1e-14);

    // amplitude damping with K0(0) = 1, K1(0) = 0
    const double g = 0.3;
    const KrausChannel damping({
        {1.0, Schedule([g](double t) -> CMatrix {
             CMatrix k = ket_bra(0, 0);
             k(1, 1) = std::exp(-g * t);
             return k;
         }, 2, false)},
        {1.0, Schedule([g](double t) -> CMatrix { return std::sqrt(1.0 - std::exp(-2 * g * t)) * ket_bra(0, 1); }, 2, false)},
    });
    CHECK(max_abs(apply_kraus(damping, rho0, 0.0) - rho0) < 1e-15);
    const CMatrix out = apply_kraus(damping, rho0, 2.0);
    CHECK(std::abs(out.trace() - 1.0) < 1e-12);
    CHECK(min_eigenvalue(out) >= -1e-12);

    const KrausChannel leaky({{0.5, Schedule::constant(identity(2), false)}});
    CHECK(leaky.completeness_error(0.0) == doctest::Approx(std::sqrt(0.5)));
    CHECK_THROWS_AS(apply_kraus(leaky, rho0, 0.0), InvalidChannel);
    CHECK_THROWS_AS(KrausChannel({{-1.0, Schedule::constant(identity(2), false)}}), InvalidChannel);
}

TEST_CASE("Kraus trajectories skip elements that start at zero") {
    const double g = 0.3;
    const KrausChannel damping({
        {0.9, Schedule([g](double t) -> CMatrix {
             CMatrix k = ket_bra(0, 0);
             k(1, 1) = std::exp(-g * t);
             return k;
         }, 2, false)},
        {0.1, Schedule([g](double t) -> CMatrix { return std::sqrt(1.0 - std::exp(-2 * g * t)) * ket_bra(0, 1); }, 2, false)},
    });
    CVector psi(2);
    psi << 0.6, 0.8;
    const auto trajs = kraus_trajectories(damping, psi, TimeGrid(0.0, 1.0, 16));
    REQUIRE(trajs.size() == 1);
    CHECK(trajs[0].label_r == 0);
    CHECK(trajs[0].weight == 0.9);
}

TEST_CASE("adapted basis") {
    SUBCASE("standard basis vector") {
        const auto b = adapted_basis(CVector::Unit(3, 0));
        REQUIRE(b.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK((b[static_cast<std::size_t>(i)] - CVector::Unit(3, i)).norm() < 1e-15);
    }
    SUBCASE("balanced superposition") {
        CVector r(2);
        r << 1.0, 1.0;
        r /= std::sqrt(2.0);
        const auto b = adapted_basis(r);
        CHECK((b[0] - r).norm() == 0.0);
        CHECK(std::abs(b[1].dot(r)) < 1e-15);
        CHECK(std::abs(b[1].norm() - 1.0) < 1e-15);
    }
    SUBCASE("random vectors give orthonormal completions") {
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 50; ++trial) {
            const CVector r = gpd::testing::random_state(5, rng);
            const auto b = adapted_basis(r);
            REQUIRE(b.size() == 5);
            CHECK((b[0] - r).norm() == 0.0);
            CMatrix basis(5, 5);
            for (int i = 0; i < 5; ++i) basis.col(i) = b[static_cast<std::size_t>(i)];
            CHECK(max_abs(basis.adjoint() * basis - identity(5)) < 1e-12);
        }
    }
    CHECK_THROWS_AS(adapted_basis(CVector::Zero(3)), InvalidState);
}

TEST_CASE("conditional trajectories without coupling") {
    std::mt19937_64 rng(7);
    const CMatrix hs = gpd::testing::random_hermitian(2, rng);
    const CMatrix hr = gpd::testing::random_hermitian(3, rng);
    const Schedule h = Schedule::constant(kron(hs, identity(3)) + kron(identity(2), hr));
    const TimeGrid grid(0.0, 2.0, 400);
    const auto joint = time_ordered_propagator(h, grid);
    const auto us = time_ordered_propagator(Schedule::constant(hs), grid);
    const ReservoirSpec res = ReservoirSpec::from_hamiltonian(hr, {0.5, 0.3, 0.2});
    const SystemEnsemble sys({{0.25, gpd::testing::random_state(2, rng)}, {0.75, gpd::testing::random_state(2, rng)}});
    const auto trajs = conditional_trajectories(joint, grid, res, sys);
    REQUIRE(trajs.size() == 6);
    for (const auto& wt : trajs) {
        const auto& r = res.states()[wt.label_r];
        const auto& s = sys.states()[wt.label_s];
        CHECK(wt.weight == doctest::Approx(r.weight * s.weight));
        CHECK((wt.trajectory.front() - s.state).norm() < 1e-14);
        for (std::size_t k = 0; k < grid.size(); k += 50) {
            const CVector expected = std::exp(Complex{0.0, -r.energy * grid.at(k)}) * (us[k] * s.state);
            CHECK((wt.trajectory.states()[k] - expected).norm() < 1e-10);
        }
    }
}

TEST_CASE("full conditional Kraus set resums to the reduced dynamics") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const CMatrix hr = gpd::testing::random_hermitian(3, rng);
        const ReservoirSpec res = ReservoirSpec::from_hamiltonian(hr, {0.6, 0.3, 0.1});
        const CMatrix u = matexp(kI * gpd::testing::random_hermitian(6, rng));
        const CMatrix rho_s = random_density(2, rng);
        const CMatrix joint = u * kron(rho_s, res.density()) * u.adjoint();
        CMatrix resummed = CMatrix::Zero(2, 2);
        for (std::size_t i = 0; i < res.size(); ++i) {
            for (const auto& k : conditional_kraus(u, res, i, 2)) {
                resummed += res.states()[i].weight * k * rho_s * k.adjoint();
            }
        }
        CHECK(max_abs(partial_trace_r(joint, 2, 3) - resummed) < 1e-10);
    }
}
