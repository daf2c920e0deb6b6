// scenario.hpp: Run configuration for the gpdist command-line tool

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpd/hilbert.hpp"

namespace gpd::cli {

inline constexpr const char* kSchema = "gpdist/1";

// Malformed configuration, anchored at a 1-based line and column of the file.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string file, int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

enum class ModelKind { kSpontaneousEmission, kPhaseDamping, kCustomJoint, kCustomLindblad };

enum class Artifact { kAtoms, kMoments, kSpread, kSweepTable, kComparison };

struct CouplingSpec {
    CMatrix r;
    CMatrix s;
};

struct Scenario {
    std::string file;
    std::string name;
    ModelKind model = ModelKind::kSpontaneousEmission;

    // spontaneous_emission / phase_damping
    double omega = 1.0;
    double gamma0 = 0.0;
    double n_thermal = 0.0;
    double alpha = 0.0;
    double theta = 0.0;
    std::size_t steps_per_period = 4096;

    // custom models: constant H_S, initial system state and integration window
    CMatrix h_s;
    CVector psi_s;
    double t_end = 0.0;
    std::size_t steps = 4096;
    double scale = 1.0;  // multiplies couplings (joint) or jump operators (lindblad)

    // custom_joint
    CMatrix h_r;
    std::vector<double> reservoir_weights;
    std::vector<CouplingSpec> couplings;
    std::size_t random_decompositions = 0;

    // custom_lindblad
    CMatrix delta_h;
    std::vector<CMatrix> jumps;

    std::optional<std::string> sweep_parameter;
    std::vector<double> sweep_values;
    int sweep_line = 0;

    std::vector<Artifact> outputs;
    std::size_t max_moment = 2;

    bool wants(Artifact a) const;
    // Names of scalar parameters that may be swept for this model.
    std::vector<std::string> sweepable() const;
    // Copy with one scalar parameter replaced.
    Scenario with(const std::string& parameter, double value) const;
    double get(const std::string& parameter) const;
};

Scenario parse_scenario_file(const std::string& path);
Scenario parse_scenario_text(const std::string& text, const std::string& label = "<config>");

std::string model_name(ModelKind kind);
std::string artifact_name(Artifact a);

} // namespace gpd::cli
