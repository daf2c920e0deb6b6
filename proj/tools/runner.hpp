// runner.hpp: Evaluation of scenario points and assembly of output tables

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpd/distribution.hpp"
#include "scenario.hpp"
#include "table.hpp"

namespace gpd::cli {

// Numerical failure at one point of a run; the message names the point.
class PointFailure : public std::runtime_error {
public:
    PointFailure(std::size_t index, const std::string& point, const std::string& cause);
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

// Throws the library's input errors (InvalidOperand, DimensionError, ...)
// when a point cannot be set up.
void validate_point(const Scenario& point);

struct PointResult {
    double value = 0.0;  // swept parameter value, or 0 without a sweep
    std::vector<Atom> z_atoms;
    std::vector<Atom> h_atoms;
    std::vector<Complex> z_moments;
    std::vector<Complex> z_normalized;
    std::vector<Complex> h_moments;
    std::optional<double> mean_gp_z;   // principal
    std::optional<double> mean_gp_h;   // principal arg ⟨e^{iβ}⟩
    std::optional<double> abs_mean_h;  // |⟨e^{iβ}⟩|
    std::optional<double> spread_w;
    double beta0 = 0.0;                // uncoupled GP, unwrapped from θ = 0 where known
    std::optional<double> closed_mean_gp_z;
    std::optional<double> closed_mean_gp_h;
    std::optional<double> closed_spread_w;
    std::optional<double> pert_gp_z;   // perturbative mean GP, unwrapped near beta0
    std::optional<double> pert_gp_h;
    std::optional<double> reference_w;
    std::optional<double> decomposition_spread_z;
    std::optional<double> decomposition_spread_h;
    double small = 0.0;                // expansion parameter
    std::string small_label;
};

struct RunOptions {
    std::size_t threads = 1;
    std::uint64_t seed = 0;
};

struct RunResult {
    Scenario scenario;
    std::vector<PointResult> points;
    // unwrapped series in sweep order, continuous by nearest-branch selection
    std::vector<std::optional<double>> mean_gp_z_unwrapped;
    std::vector<std::optional<double>> mean_gp_h_unwrapped;
    std::vector<std::optional<double>> closed_gp_z_unwrapped;
    std::vector<std::optional<double>> closed_gp_h_unwrapped;
};

PointResult evaluate_point(const Scenario& point, std::size_t index, std::uint64_t seed);

// Evaluates every sweep point, concurrently when threads > 1; results are in
// sweep order. The first failing point in sweep order raises PointFailure.
RunResult evaluate(const Scenario& sc, const RunOptions& opts);

bool supports_compare(ModelKind kind);

inline constexpr double kOrderFactor = 100.0;
inline constexpr double kOrderFloor = 1e-6;

Table artifact_table(const RunResult& r, Artifact a);

} // namespace gpd::cli
