#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "json.hpp"
#include "runner.hpp"
#include "scenario.hpp"
#include "table.hpp"

using namespace gpd;
using namespace gpd::cli;

namespace {

std::size_t column(const Table& t, const std::string& quantity, const std::string& measure) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i].quantity == quantity && t.columns[i].measure == measure) return i;
    FAIL("no column " << quantity << " (" << measure << ")");
    return 0;
}

double at(const Table& t, std::size_t row, const std::string& quantity, const std::string& measure) {
    return std::get<double>(t.rows[row][column(t, quantity, measure)]);
}

std::string csv(const Table& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

int error_line(const std::string& text) {
    try {
        parse_scenario_text(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

const char* kSeSweep = R"(schema: gpdist/1
model: spontaneous_emission
params:
  gamma0: 1.0e-3
  theta: 0
grid:
  steps_per_period: 2048
sweep:
  parameter: theta
  range: {from: 0, to: pi, count: 9}
)";

} // namespace

TEST_CASE("numbers may be written as multiples of pi") {
    const Scenario s = parse_scenario_text("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0.01, theta: 2*pi/3}\n");
    CHECK(s.theta == doctest::Approx(2 * kPi / 3));
    CHECK(s.omega == 1.0);
    CHECK(s.outputs == std::vector<Artifact>{Artifact::kSweepTable});
    CHECK(parse_scenario_text("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0, theta: pi}\n").theta == kPi);
}

TEST_CASE("configuration errors point at the offending line") {
    CHECK(error_line("schema: gpdist/2\nmodel: phase_damping\nparams: {alpha: 0, theta: 1}\n") == 1);
    CHECK(error_line("schema: gpdist/1\nmodel: phase_dampin\nparams: {alpha: 0, theta: 1}\n") == 2);
    CHECK(error_line("schema: gpdist/1\nmodel: phase_damping\nparams:\n  alpha: 0\n  theta: 1\n  beta: 2\n") == 6);
    CHECK(error_line("schema: gpdist/1\nmodel: phase_damping\nparams:\n  alpha: x\n  theta: 1\n") == 4);
    CHECK(error_line("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0, theta: 1}\n"
                     "sweep:\n  parameter: alpha\n  values: [0.1, 0.3, 0.2]\n") == 6);
    CHECK(error_line("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0, theta: 1}\n"
                     "sweep:\n  parameter: gamma0\n  values: [0.1]\n") == 5);
    CHECK(error_line("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: -1, theta: 1}\n") == 3);
    CHECK(error_line("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0.1, theta: 1}\n"
                     "sweep:\n  parameter: theta\n  values: [1, 2, 4]\n") == 6);
    CHECK(error_line("schema: gpdist/1\nmodel: spontaneous_emission\nparams: {theta: 1}\n") == 3);
    CHECK(error_line("schema: gpdist/1\nmodel: [\n") == 3);
    CHECK(error_line("schema: gpdist/1\nmodel: custom_joint\nparams:\n  h_s: [[1, 0], [0]]\n") == 4);

    try {
        parse_scenario_text("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0, theta: 1}\noutputs: [plots]\n",
                            "run.yaml");
        FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).rfind("run.yaml:4:", 0) == 0);
    }
}

TEST_CASE("custom models check their operators at parse time") {
    const std::string base = "schema: gpdist/1\nmodel: custom_joint\nparams:\n"
                             "  h_s: [[0.5, 0], [0, -0.5]]\n"
                             "  h_r: [[0, 0], [0, 1]]\n"
                             "  reservoir_weights: [0.5, 0.5]\n"
                             "  psi_s: [1, 1]\n"
                             "  couplings:\n"
                             "    - r: [[0, 0.1], [0.1, 0]]\n";
    CHECK_NOTHROW(parse_scenario_text(base + "      s: [[0, 1], [1, 0]]\ngrid: {t_end: 1}\n"));
    CHECK(error_line(base + "      s: [[0, [0, 1]], [0, 0]]\ngrid: {t_end: 1}\n") == 4);
    CHECK(error_line(base + "      s: [[0, 1, 0], [1, 0, 0], [0, 0, 0]]\ngrid: {t_end: 1}\n") == 4);
    CHECK(error_line(base + "      s: [[0, 1], [1, 0]]\n") == 1);
}

TEST_CASE("emission sweep tracks the weak-coupling mean phase") {
    const RunResult r = evaluate(parse_scenario_text(kSeSweep), {});
    const Table t = artifact_table(r, Artifact::kSweepTable);
    REQUIRE(t.rows.size() == 9);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double theta = std::get<double>(t.rows[i][1]);
        const double s = std::sin(theta);
        const double expected = 2 * kPi * std::pow(std::sin(theta / 2), 2) + kPi * kPi * 1e-3 * s * s;
        CHECK(at(t, i, "mean_gp_unwrapped", "Z") == doctest::Approx(expected).epsilon(1e-4));
        CHECK(at(t, i, "mean_gp_unwrapped", "H") == doctest::Approx(expected).epsilon(1e-4));
        CHECK(at(t, i, "perturbative_mean_gp_unwrapped", "Z") == doctest::Approx(expected).epsilon(1e-12));
        CHECK(std::abs(principal_angle(at(t, i, "mean_gp_principal", "Z") - expected)) < 1e-4);
        CHECK(at(t, i, "mean_gp_principal", "Z") > -kPi);
        CHECK(at(t, i, "mean_gp_principal", "Z") <= kPi);
    }
}

TEST_CASE("equatorial phase damping sweep reports the spread") {
    const Scenario sc = parse_scenario_text("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0, theta: pi/2}\n"
                                            "sweep: {parameter: alpha, values: [1.0e-5, 1.0e-4, 1.0e-3]}\n"
                                            "outputs: [spread]\n");
    const Table t = artifact_table(evaluate(sc, {}), Artifact::kSpread);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double a = std::get<double>(t.rows[i][1]);
        CHECK(at(t, i, "reference_W", "H") == doctest::Approx(16 * kPi * kPi * a / 9).epsilon(1e-12));
        CHECK(at(t, i, "W", "H") == doctest::Approx(16 * std::pow(kPi, 3) * a / 9).epsilon(0.02));
    }
}

TEST_CASE("closed system has no corrections") {
    const Scenario sc = parse_scenario_text("schema: gpdist/1\nmodel: spontaneous_emission\n"
                                            "params: {gamma0: 0, theta: pi/3}\noutputs: [sweep_table, comparison, atoms]\n");
    const RunResult r = evaluate(sc, {});
    const Table sweep = artifact_table(r, Artifact::kSweepTable);
    const double beta0 = 2 * kPi * 0.25;
    CHECK(at(sweep, 0, "uncoupled_gp_unwrapped", "-") == doctest::Approx(beta0));
    CHECK(at(sweep, 0, "mean_gp_unwrapped", "Z") == doctest::Approx(beta0).epsilon(1e-6));
    CHECK(at(sweep, 0, "perturbative_mean_gp_unwrapped", "Z") == doctest::Approx(beta0).epsilon(1e-15));
    CHECK(at(sweep, 0, "closed_form_mean_gp_unwrapped", "Z") == doctest::Approx(beta0).epsilon(1e-12));
    CHECK(at(sweep, 0, "W", "H") < 1e-12);
    const Table cmp = artifact_table(r, Artifact::kComparison);
    CHECK(at(cmp, 0, "abs_difference", "Z") < 1e-6);
    CHECK(at(cmp, 0, "exact_difference_Z_minus_H", "Z-H") == 0.0);
    CHECK(std::get<std::int64_t>(cmp.rows[0].back()) == 0);
    CHECK(artifact_table(r, Artifact::kAtoms).rows.size() == 2);
    CHECK(sweep.columns.size() == 12);
}

TEST_CASE("emission comparison across temperatures") {
    const Scenario sc = parse_scenario_text("schema: gpdist/1\nmodel: spontaneous_emission\n"
                                            "params: {gamma0: 1.0e-3, theta: pi/3}\n"
                                            "sweep: {parameter: n_thermal, values: [0, 1, 5]}\n");
    const Table t = artifact_table(evaluate(sc, {}), Artifact::kComparison);
    const double first = at(t, 0, "perturbative_mean_gp_unwrapped", "Z");
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(at(t, i, "perturbative_mean_gp_unwrapped", "Z") == first);
        CHECK(at(t, i, "perturbative_mean_gp_unwrapped", "H") == first);
        CHECK(std::get<std::int64_t>(t.rows[i].back()) == 0);
    }
    CHECK(at(t, 2, "abs_difference", "Z") > at(t, 0, "abs_difference", "Z"));
}

TEST_CASE("phase damping means separate at first order") {
    const Scenario sc = parse_scenario_text("schema: gpdist/1\nmodel: phase_damping\nparams: {alpha: 0, theta: pi/4}\n"
                                            "sweep: {parameter: alpha, values: [1.0e-4, 2.0e-4]}\n");
    const Table t = artifact_table(evaluate(sc, {}), Artifact::kComparison);
    const double d1 = at(t, 0, "exact_difference_Z_minus_H", "Z-H");
    const double d2 = at(t, 1, "exact_difference_Z_minus_H", "Z-H");
    CHECK(std::abs(d1) > 1e-4);
    CHECK(d2 / d1 == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("output is identical across thread counts and repeated runs") {
    const Scenario sc = parse_scenario_text(kSeSweep);
    const std::string one = csv(artifact_table(evaluate(sc, {1, 0}), Artifact::kSweepTable));
    const std::string many = csv(artifact_table(evaluate(sc, {3, 0}), Artifact::kSweepTable));
    CHECK(one == many);
    CHECK(one == csv(artifact_table(evaluate(sc, {2, 0}), Artifact::kSweepTable)));
}

TEST_CASE("random decompositions are reproducible from the seed") {
    const std::string text = "schema: gpdist/1\nmodel: custom_joint\nparams:\n"
                             "  h_s: [[0.5, 0], [0, -0.5]]\n"
                             "  h_r: [[0, 0, 0], [0, 0, 0], [0, 0, 1.3]]\n"
                             "  reservoir_weights: [0.5, 0.2, 0.3]\n"
                             "  psi_s: [0.6, 0.8]\n"
                             "  couplings:\n"
                             "    - r: [[0, 0, 0.05], [0, 0, [0, 0.04]], [0.05, [0, -0.04], 0]]\n"
                             "      s: [[0, 1], [1, 0]]\n"
                             "grid: {t_end: 2*pi, steps: 512}\n"
                             "sweep: {parameter: scale, values: [0.5, 1.0]}\n"
                             "checks: {random_decompositions: 3}\n";
    const Scenario sc = parse_scenario_text(text);
    const RunResult a = evaluate(sc, {2, 7});
    const Table t = artifact_table(a, Artifact::kSweepTable);
    CHECK(csv(t) == csv(artifact_table(evaluate(sc, {1, 7}), Artifact::kSweepTable)));
    CHECK(csv(t) != csv(artifact_table(evaluate(sc, {1, 8}), Artifact::kSweepTable)));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(at(t, i, "decomposition_spread_first_moment", "Z") < 1e-12);
        CHECK(at(t, i, "decomposition_spread_first_moment", "H") > 1e-8);
    }
}

TEST_CASE("numerical failures name the parameter point") {
    const Scenario sc = parse_scenario_text("schema: gpdist/1\nmodel: custom_joint\nparams:\n"
                                            "  h_s: [[0, 1], [1, 0]]\n"
                                            "  h_r: [[0, 0], [0, 1]]\n"
                                            "  reservoir_weights: [1, 0]\n"
                                            "  psi_s: [1, 0]\n"
                                            "  couplings: [{r: [[0, 0.01], [0.01, 0]], s: [[1, 0], [0, -1]]}]\n"
                                            "grid: {t_end: 1, steps: 256}\n"
                                            "sweep: {parameter: t_end, values: [1.0, pi/2, 2.0]}\n");
    try {
        evaluate(sc, {2, 0});
        FAIL("expected a numerical failure");
    } catch (const PointFailure& e) {
        CHECK(e.index() == 1);
        const std::string msg = e.what();
        CHECK(msg.find("t_end=1.5707963267948966") != std::string::npos);
        CHECK(msg.find("UndefinedGP") != std::string::npos);
    }
}

TEST_CASE("csv and json carry the same columns at full precision") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-2.0) == "-2");
    Table t{"demo", {{"x", "-", "rad"}, {"W", "H", "dimensionless"}, {"label", "-", "label"}}, {}};
    t.add_row({1.0 / 3.0, Cell{}, std::string("a,b")});
    CHECK_THROWS(t.add_row({1.0}));
    const std::string text = csv(t);
    CHECK(text == "x|-|rad,W|H|dimensionless,label|-|label\n0.33333333333333331,,\"a,b\"\n");

    std::ostringstream os;
    write_json(t, os);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["schema"] == kSchema);
    CHECK(j["columns"].size() == 3);
    CHECK(j["columns"][1]["measure"] == "H");
    CHECK(j["rows"][0][0].get<double>() == 1.0 / 3.0);
    CHECK(j["rows"][0][1].is_null());
}

TEST_CASE("every table labels measure and units") {
    const Scenario sc = parse_scenario_text(std::string(kSeSweep) + "outputs: [atoms, moments, spread, sweep_table, comparison]\n");
    const RunResult r = evaluate(sc, {});
    for (Artifact a : sc.outputs) {
        const Table t = artifact_table(r, a);
        CHECK(!t.rows.empty());
        for (const auto& c : t.columns) {
            CHECK(!c.measure.empty());
            CHECK(!c.units.empty());
            if (c.units == "rad") CHECK(c.measure != "");
        }
    }
}
