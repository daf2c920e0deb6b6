#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpd/errors.hpp"
#include "gpd/phase.hpp"
#include "support.hpp"

using namespace gpd;

namespace {

Trajectory sampled(const TimeGrid& grid, const std::function<CVector(double)>& f) {
    std::vector<CVector> states;
    for (std::size_t k = 0; k < grid.size(); ++k) states.push_back(f(grid.at(k)));
    return Trajectory(grid, std::move(states));
}

// Free precession under H = -(ω/2)σ_z with (g, e) ordering.
CVector precessing(double theta, double omega, double t) {
    CVector v(2);
    v(0) = std::sin(theta / 2) * std::exp(Complex{0.0, -0.5 * omega * t});
    v(1) = std::cos(theta / 2) * std::exp(Complex{0.0, 0.5 * omega * t});
    return v;
}

constexpr PhaseQuadrature kRules[] = {PhaseQuadrature::kConnection, PhaseQuadrature::kTrapezoidCentered};

// The connection rule is exact for stationary states; the centered trapezoid carries an O(dt²) error.
double rule_tol(PhaseQuadrature rule) { return rule == PhaseQuadrature::kConnection ? 1e-12 : 1e-6; }

} // namespace

TEST_CASE("trajectory construction checks sizes") {
    const TimeGrid grid(0.0, 1.0, 4);
    CHECK_THROWS_AS(Trajectory(grid, std::vector<CVector>(3, CVector::Ones(2))), DimensionError);
    std::vector<CVector> mixed(5, CVector::Ones(2));
    mixed[2] = CVector::Ones(3);
    CHECK_THROWS_AS(Trajectory(grid, mixed), DimensionError);
}

TEST_CASE("dynamic phase of a stationary state is -E t") {
    std::mt19937_64 rng(1);
    const CVector psi0 = gpd::testing::random_state(3, rng);
    const double energy = 0.73;
    const TimeGrid grid(0.0, 4.0, 4096);
    const Trajectory traj = sampled(grid, [&](double t) -> CVector { return std::exp(Complex{0.0, -energy * t}) * psi0; });
    for (auto rule : kRules) CHECK(dynamic_phase(traj, rule) == doctest::Approx(-energy * 4.0).epsilon(rule_tol(rule)));
}

TEST_CASE("parallel-transported path has no dynamic phase") {
    const TimeGrid grid(0.0, 1.2, 4096);
    const Trajectory traj = sampled(grid, [](double t) {
        CVector v(2);
        v << std::cos(t), std::sin(t);
        return v;
    });
    for (auto rule : kRules) CHECK(std::abs(dynamic_phase(traj, rule)) < 1e-14);
    const PhaseResult r = z_functional(traj);
    CHECK(std::abs(r.z - r.overlap) < 1e-14);
}

TEST_CASE("dynamic phase of free precession") {
    // Im<ψ|ψ'> = -<H> = (ω/2) cosθ at all times, so one period gives π cosθ
    const double omega = 1.0;
    for (double theta : {0.3, kPi / 4, 1.9, 3.0}) {
        const TimeGrid grid = TimeGrid::periods(omega);
        const Trajectory traj = sampled(grid, [&](double t) { return precessing(theta, omega, t); });
        for (auto rule : kRules) CHECK(dynamic_phase(traj, rule) == doctest::Approx(kPi * std::cos(theta)).epsilon(1e-6));
    }
}

TEST_CASE("Z of a constant trajectory is the squared norm") {
    CVector psi(2);
    psi << Complex{0.6, 0.2}, Complex{-0.3, 0.5};
    const Trajectory traj = sampled(TimeGrid(0.0, 1.0, 10), [&](double) { return psi; });
    const PhaseResult r = z_functional(traj);
    CHECK(std::abs(r.z - psi.squaredNorm()) < 1e-15);
    CHECK(r.beta == 0.0);
}

TEST_CASE("closed precession gives 2π sin²(θ/2) modulo 2π") {
    for (double theta : {kPi / 6, kPi / 3, kPi / 2, 2.5}) {
        const Trajectory traj = sampled(TimeGrid::periods(1.0), [&](double t) { return precessing(theta, 1.0, t); });
        const PhaseResult r = z_functional(traj);
        const double expected = 2 * kPi * std::pow(std::sin(theta / 2), 2);
        CHECK(std::abs(principal_angle(r.beta - expected)) < 1e-6);
        CHECK(r.beta == principal_arg(r.z));
        CHECK(std::abs(std::exp(Complex{0.0, r.beta}) - r.z / std::abs(r.z)) < 1e-12);
    }
}

TEST_CASE("orthogonal endpoint leaves the phase undefined") {
    const Trajectory traj = sampled(TimeGrid(0.0, kPi / 2, 512), [](double t) {
        CVector v(2);
        v << std::cos(t), std::sin(t);
        return v;
    });
    CHECK_THROWS_AS(z_functional(traj), UndefinedGP);
}

TEST_CASE("vanishing norm is a degenerate trajectory") {
    const Trajectory traj = sampled(TimeGrid(0.0, 1.0, 8), [](double t) -> CVector {
        return (1.0 - t) * CVector::Ones(2);
    });
    CHECK_THROWS_AS(dynamic_phase(traj), DegenerateTrajectory);
    CHECK_THROWS_AS(dynamic_phase(traj, PhaseQuadrature::kTrapezoidCentered), DegenerateTrajectory);
}

TEST_CASE("gauge transformations leave Z unchanged") {
    const TimeGrid grid(0.0, 2.0 * kPi, 4096);
    const Trajectory traj = sampled(grid, [](double t) {
        CVector v = precessing(1.1, 1.0, t);
        v *= std::exp(-0.05 * t);
        v(1) *= std::exp(-0.1 * t);
        return v;
    });
    const Complex z0 = z_functional(traj).z;

    const Trajectory same = gauge_transform(traj, [](double) { return 0.0; });
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK((same.states()[k] - traj.states()[k]).norm() == 0.0);

    CHECK(std::abs(z_functional(gauge_transform(traj, [](double t) { return 2.7 * t; })).z - z0) < 1e-8);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a0 = c(rng), a1 = c(rng), a2 = c(rng), a3 = c(rng);
        const auto alpha = [=](double t) { return a0 + t * (a1 + t * (a2 + t * a3 / 6.0)); };
        const Trajectory g = gauge_transform(traj, alpha);
        CHECK(std::abs(z_functional(g).z - z0) < 1e-8);
    }

    CHECK_THROWS_AS(gauge_transform(traj, std::vector<double>(3, 0.0)), DimensionError);
}

TEST_CASE("centered trapezoid is gauge invariant only to second order") {
    const auto path = [](double t) {
        CVector v = precessing(1.1, 1.0, t);
        v(1) *= std::exp(-0.1 * t);
        return v;
    };
    const auto alpha = [](double t) { return 1.5 * t * t; };
    const auto gap = [&](std::size_t n) {
        const Trajectory traj = sampled(TimeGrid(0.0, 2.0 * kPi, n), path);
        return std::abs(z_functional(gauge_transform(traj, alpha), PhaseQuadrature::kTrapezoidCentered).z -
                        z_functional(traj, PhaseQuadrature::kTrapezoidCentered).z);
    };
    const double coarse = gap(2048);
    const double fine = gap(4096);
    CHECK(coarse > 1e-8);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("reparametrizing the same path keeps β") {
    const double theta = 0.9;
    const double period = 2.0 * kPi;
    const TimeGrid grid(0.0, period, 8192);
    const auto path = [&](double t) {
        CVector v = precessing(theta, 1.0, t);
        v(1) *= std::exp(-0.08 * t);
        return v;
    };
    const double beta = z_functional(sampled(grid, path)).beta;
    const double warped = z_functional(sampled(grid, [&](double t) {
        return path(t + 0.2 * std::pow(std::sin(t / 2.0), 2) * std::sin(t));
    })).beta;
    CHECK(std::abs(principal_angle(beta - warped)) < 1e-6);
}

TEST_CASE("uniform norm scaling scales Z and keeps β") {
    const Trajectory traj = sampled(TimeGrid(0.0, 3.0, 1024), [](double t) {
        CVector v = precessing(2.0, 1.0, t);
        v(0) *= std::exp(-0.2 * t);
        return v;
    });
    const PhaseResult a = z_functional(traj);
    for (double c : {0.01, 0.5, 3.0, 250.0}) {
        std::vector<CVector> scaled;
        for (const auto& s : traj.states()) scaled.push_back(c * s);
        const PhaseResult b = z_functional(Trajectory(traj.grid(), scaled));
        CHECK(std::abs(b.beta - a.beta) < 1e-15);
        CHECK(std::abs(b.z) == doctest::Approx(c * c * std::abs(a.z)).epsilon(1e-13));
    }
}

TEST_CASE("angle conventions") {
    CHECK(principal_arg(Complex{-1.0, -0.0}) == doctest::Approx(kPi));
    CHECK(principal_arg(Complex{0.0, 1.0}) == doctest::Approx(kPi / 2));
    CHECK(principal_angle(3 * kPi) == doctest::Approx(kPi));
    CHECK(principal_angle(-kPi) == doctest::Approx(kPi));
    CHECK(principal_angle(7.0) == doctest::Approx(7.0 - 2 * kPi));
    CHECK(unwrap_near(-3.0, 3.0) == doctest::Approx(-3.0 + 2 * kPi));
    CHECK(unwrap_near(0.1, 4 * kPi) == doctest::Approx(0.1 + 4 * kPi));

    std::vector<double> principal;
    std::vector<double> truth;
    for (int k = 0; k <= 40; ++k) {
        truth.push_back(0.2 * k);
        principal.push_back(principal_angle(0.2 * k));
    }
    const auto unwrapped = unwrap_sequence(principal);
    for (std::size_t k = 0; k < truth.size(); ++k) CHECK(unwrapped[k] == doctest::Approx(truth[k]));
}
