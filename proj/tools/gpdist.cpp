#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "gpd/errors.hpp"
#include "runner.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace gpd::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::string out_dir = ".";
    std::string format = "csv";
    std::size_t threads = 0;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("config", o.config, "scenario file (YAML)")->required();
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    cmd->add_option("--threads", o.threads, "worker threads (0: hardware concurrency)")->capture_default_str();
    cmd->add_option("--seed", o.seed, "seed for random-decomposition checks")->capture_default_str();
}

fs::path write_table(const Table& t, const Options& o, const std::string& stem) {
    fs::create_directories(o.out_dir);
    const fs::path path = fs::path(o.out_dir) / (stem + "_" + t.name + "." + o.format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (o.format == "json")
        write_json(t, out);
    else
        write_csv(t, out);
    return path;
}

int execute(const Options& o, bool compare) {
    const Scenario sc = parse_scenario_file(o.config);
    if (compare && !supports_compare(sc.model))
        throw ConfigError(sc.file, 1, 1, model_name(sc.model) + " has no exact path to compare against");

    RunOptions ro;
    ro.threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    ro.seed = o.seed;
    const RunResult result = evaluate(sc, ro);

    std::vector<Artifact> artifacts = compare ? std::vector<Artifact>{Artifact::kComparison} : sc.outputs;
    for (Artifact a : artifacts) {
        const Table t = artifact_table(result, a);
        std::cout << write_table(t, o, sc.name).string() << '\n';
        if (a == Artifact::kComparison) {
            std::size_t flagged = 0;
            for (const auto& row : t.rows)
                if (std::get<std::int64_t>(row.back()) != 0) ++flagged;
            std::cout << result.points.size() << " points, " << flagged << " order violation(s)\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gpdist: geometric-phase distributions for open two-level and small quantum systems"};
    app.require_subcommand(0, 1);
    bool version = false;
    app.add_flag("--version", version, "print schema and build information");

    Options run_opts, cmp_opts;
    CLI::App* run = app.add_subcommand("run", "evaluate a scenario and write the requested artifacts");
    add_common(run, run_opts);
    CLI::App* cmp = app.add_subcommand("compare", "exact versus perturbative mean GP for a scenario");
    add_common(cmp, cmp_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (version) {
        std::cout << "gpdist " << GPDIST_VERSION << "\n"
                  << "config schema " << kSchema << "\n"
                  << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
                  << ", compiler " << __VERSION__ << ", C++ " << __cplusplus << "\n";
        return 0;
    }
    if (!run->parsed() && !cmp->parsed()) {
        std::cerr << app.help();
        return kExitConfig;
    }

    const bool compare = cmp->parsed();
    try {
        return execute(compare ? cmp_opts : run_opts, compare);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const PointFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const gpd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.numerical() ? kExitNumerical : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
