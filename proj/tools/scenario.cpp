#include "scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "gpd/errors.hpp"
#include "runner.hpp"

namespace gpd::cli {

namespace {

std::string where(const std::string& file, int line, int column) {
    std::ostringstream os;
    os << file << ':' << line << ':' << column;
    return os.str();
}

class Parser {
public:
    explicit Parser(std::string file) : file_(std::move(file)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
        const YAML::Mark m = at.Mark();
        throw ConfigError(file_, m.line + 1, m.column + 1, message);
    }
    [[noreturn]] void fail(const YAML::Mark& m, const std::string& message) const {
        throw ConfigError(file_, m.line + 1, m.column + 1, message);
    }

    void only_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section) const {
        if (!map.IsMap()) fail(map, "'" + section + "' must be a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                std::string list;
                for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
                fail(kv.first, "unknown key '" + key + "' in " + section + " (expected one of: " + list + ")");
            }
        }
    }

    YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& section) const {
        const YAML::Node n = map[key];
        if (!n) fail(map, "missing required key '" + key + "' in " + section);
        return n;
    }

    // Plain numbers, or multiples of pi written as "pi", "2*pi/3", "pi/4".
    double number(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be a number");
        const std::string s = n.Scalar();
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) {
                if (!std::isfinite(v)) fail(n, what + " must be finite");
                return v;
            }
        } catch (const std::invalid_argument&) {
        } catch (const std::out_of_range&) {
            fail(n, what + " is out of range");
        }
        const auto pos = s.find("pi");
        if (pos == std::string::npos) fail(n, what + ": cannot read '" + s + "' as a number");
        double factor = 1.0, divisor = 1.0;
        try {
            std::string head = s.substr(0, pos);
            std::string tail = s.substr(pos + 2);
            if (!head.empty()) {
                if (head.back() != '*') throw std::invalid_argument("head");
                head.pop_back();
                std::size_t used = 0;
                factor = std::stod(head, &used);
                if (used != head.size()) throw std::invalid_argument("head");
            }
            if (!tail.empty()) {
                if (tail.front() != '/') throw std::invalid_argument("tail");
                tail.erase(0, 1);
                std::size_t used = 0;
                divisor = std::stod(tail, &used);
                if (used != tail.size() || divisor == 0.0) throw std::invalid_argument("tail");
            }
        } catch (const std::exception&) {
            fail(n, what + ": cannot read '" + s + "' as a number");
        }
        return factor * kPi / divisor;
    }

    std::size_t count(const YAML::Node& n, const std::string& what, std::size_t min_value) const {
        const double v = number(n, what);
        if (v != std::floor(v) || v < static_cast<double>(min_value) || v > 1e9)
            fail(n, what + " must be an integer >= " + std::to_string(min_value));
        return static_cast<std::size_t>(v);
    }

    Complex entry(const YAML::Node& n, const std::string& what) const {
        if (n.IsSequence()) {
            if (n.size() != 2) fail(n, what + ": complex entries are written [re, im]");
            return {number(n[0], what), number(n[1], what)};
        }
        return {number(n, what), 0.0};
    }

    CMatrix matrix(const YAML::Node& n, const std::string& what) const {
        if (!n.IsSequence() || n.size() == 0) fail(n, what + " must be a non-empty list of rows");
        const auto rows = static_cast<Eigen::Index>(n.size());
        CMatrix m(rows, rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const YAML::Node row = n[static_cast<std::size_t>(i)];
            if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != rows)
                fail(row, what + " must be square: row " + std::to_string(i) + " needs " + std::to_string(rows) +
                              " entries");
            for (Eigen::Index j = 0; j < rows; ++j) m(i, j) = entry(row[static_cast<std::size_t>(j)], what);
        }
        return m;
    }

    CVector vector(const YAML::Node& n, const std::string& what) const {
        if (!n.IsSequence() || n.size() == 0) fail(n, what + " must be a non-empty list");
        CVector v(static_cast<Eigen::Index>(n.size()));
        for (std::size_t i = 0; i < n.size(); ++i) v(static_cast<Eigen::Index>(i)) = entry(n[i], what);
        return v;
    }

    std::vector<double> reals(const YAML::Node& n, const std::string& what) const {
        if (!n.IsSequence() || n.size() == 0) fail(n, what + " must be a non-empty list");
        std::vector<double> out;
        for (const auto& x : n) out.push_back(number(x, what));
        return out;
    }

    Scenario parse(const YAML::Node& root) const {
        if (!root.IsMap()) fail(root, "configuration must be a mapping");
        only_keys(root, {"schema", "name", "model", "params", "grid", "sweep", "outputs", "moments", "checks"},
                  "the top level");

        const YAML::Node schema = require(root, "schema", "the top level");
        if (!schema.IsScalar() || schema.Scalar() != kSchema)
            fail(schema, std::string("unsupported schema (this build reads '") + kSchema + "')");

        Scenario sc;
        sc.file = file_;
        sc.name = root["name"] ? root["name"].as<std::string>() : "run";
        for (char c : sc.name)
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
                fail(root["name"], "name may only use letters, digits, '_' and '-'");

        const YAML::Node model = require(root, "model", "the top level");
        static const std::map<std::string, ModelKind> kinds = {
            {"spontaneous_emission", ModelKind::kSpontaneousEmission},
            {"phase_damping", ModelKind::kPhaseDamping},
            {"custom_joint", ModelKind::kCustomJoint},
            {"custom_lindblad", ModelKind::kCustomLindblad}};
        if (!model.IsScalar() || !kinds.count(model.Scalar()))
            fail(model, "model must be one of spontaneous_emission, phase_damping, custom_joint, custom_lindblad");
        sc.model = kinds.at(model.Scalar());

        const YAML::Node params = require(root, "params", "the top level");
        parse_params(params, sc);
        parse_grid(root, sc);

        if (const YAML::Node m = root["moments"]) sc.max_moment = count(m, "moments", 1);

        if (const YAML::Node checks = root["checks"]) {
            only_keys(checks, {"random_decompositions"}, "checks");
            if (sc.model != ModelKind::kCustomJoint) fail(checks, "checks are only available for custom_joint");
            if (checks["random_decompositions"])
                sc.random_decompositions = count(checks["random_decompositions"], "random_decompositions", 0);
        }

        if (const YAML::Node out = root["outputs"]) {
            static const std::map<std::string, Artifact> names = {{"atoms", Artifact::kAtoms},
                                                                  {"moments", Artifact::kMoments},
                                                                  {"spread", Artifact::kSpread},
                                                                  {"sweep_table", Artifact::kSweepTable},
                                                                  {"comparison", Artifact::kComparison}};
            if (!out.IsSequence()) fail(out, "outputs must be a list");
            for (const auto& o : out) {
                if (!o.IsScalar() || !names.count(o.Scalar()))
                    fail(o, "unknown output (expected atoms, moments, spread, sweep_table or comparison)");
                if (!sc.wants(names.at(o.Scalar()))) sc.outputs.push_back(names.at(o.Scalar()));
            }
        } else {
            sc.outputs = {Artifact::kSweepTable};
        }

        if (const YAML::Node sweep = root["sweep"]) parse_sweep(sweep, sc);
        validate_points(root, sc);
        return sc;
    }

private:
    void parse_params(const YAML::Node& p, Scenario& sc) const {
        switch (sc.model) {
        case ModelKind::kSpontaneousEmission:
            only_keys(p, {"omega", "gamma0", "n_thermal", "theta"}, "params");
            sc.omega = p["omega"] ? number(p["omega"], "omega") : 1.0;
            sc.gamma0 = number(require(p, "gamma0", "params"), "gamma0");
            sc.n_thermal = p["n_thermal"] ? number(p["n_thermal"], "n_thermal") : 0.0;
            sc.theta = number(require(p, "theta", "params"), "theta");
            break;
        case ModelKind::kPhaseDamping:
            only_keys(p, {"omega", "alpha", "theta"}, "params");
            sc.omega = p["omega"] ? number(p["omega"], "omega") : 1.0;
            sc.alpha = number(require(p, "alpha", "params"), "alpha");
            sc.theta = number(require(p, "theta", "params"), "theta");
            break;
        case ModelKind::kCustomJoint: {
            only_keys(p, {"h_s", "h_r", "reservoir_weights", "couplings", "psi_s", "scale"}, "params");
            sc.h_s = matrix(require(p, "h_s", "params"), "h_s");
            sc.h_r = matrix(require(p, "h_r", "params"), "h_r");
            sc.reservoir_weights = reals(require(p, "reservoir_weights", "params"), "reservoir_weights");
            sc.psi_s = vector(require(p, "psi_s", "params"), "psi_s");
            if (p["scale"]) sc.scale = number(p["scale"], "scale");
            const YAML::Node cs = require(p, "couplings", "params");
            if (!cs.IsSequence()) fail(cs, "couplings must be a list of {r, s} pairs");
            for (const auto& c : cs) {
                only_keys(c, {"r", "s"}, "a coupling");
                sc.couplings.push_back({matrix(require(c, "r", "a coupling"), "r"),
                                        matrix(require(c, "s", "a coupling"), "s")});
            }
            break;
        }
        case ModelKind::kCustomLindblad: {
            only_keys(p, {"h_s", "delta_h", "jumps", "psi_s", "scale"}, "params");
            sc.h_s = matrix(require(p, "h_s", "params"), "h_s");
            sc.psi_s = vector(require(p, "psi_s", "params"), "psi_s");
            sc.delta_h = p["delta_h"] ? matrix(p["delta_h"], "delta_h") : CMatrix::Zero(sc.h_s.rows(), sc.h_s.cols());
            if (p["scale"]) sc.scale = number(p["scale"], "scale");
            const YAML::Node js = require(p, "jumps", "params");
            if (!js.IsSequence()) fail(js, "jumps must be a list of matrices");
            for (const auto& j : js) sc.jumps.push_back(matrix(j, "jump operator"));
            break;
        }
        }
    }

    void parse_grid(const YAML::Node& root, Scenario& sc) const {
        const bool custom = sc.model == ModelKind::kCustomJoint || sc.model == ModelKind::kCustomLindblad;
        const YAML::Node g = root["grid"];
        if (!g) {
            if (custom) fail(root, "custom models need a grid with t_end");
            return;
        }
        if (custom) {
            only_keys(g, {"t_end", "steps"}, "grid");
            sc.t_end = number(require(g, "t_end", "grid"), "t_end");
            if (!(sc.t_end > 0.0)) fail(g["t_end"], "t_end must be positive");
            if (g["steps"]) sc.steps = count(g["steps"], "steps", 2);
        } else {
            only_keys(g, {"steps_per_period"}, "grid");
            if (g["steps_per_period"]) sc.steps_per_period = count(g["steps_per_period"], "steps_per_period", 2);
        }
    }

    void parse_sweep(const YAML::Node& s, Scenario& sc) const {
        only_keys(s, {"parameter", "values", "range"}, "sweep");
        sc.sweep_line = s.Mark().line + 1;
        const YAML::Node name = require(s, "parameter", "sweep");
        const auto allowed = sc.sweepable();
        if (!name.IsScalar() || std::find(allowed.begin(), allowed.end(), name.Scalar()) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(name, "this model can sweep: " + list);
        }
        sc.sweep_parameter = name.Scalar();
        if (s["values"] && s["range"]) fail(s, "give either values or range, not both");
        if (const YAML::Node v = s["values"]) {
            sc.sweep_values = reals(v, "sweep values");
            for (std::size_t i = 1; i < sc.sweep_values.size(); ++i)
                if (!(sc.sweep_values[i] > sc.sweep_values[i - 1]))
                    fail(v[i], "sweep values must be strictly increasing");
        } else if (const YAML::Node r = s["range"]) {
            only_keys(r, {"from", "to", "count"}, "range");
            const double from = number(require(r, "from", "range"), "from");
            const double to = number(require(r, "to", "range"), "to");
            const std::size_t n = count(require(r, "count", "range"), "count", 1);
            if (n > 1 && !(to > from)) fail(r, "range needs to > from");
            for (std::size_t i = 0; i < n; ++i)
                sc.sweep_values.push_back(n == 1 ? from : from + (to - from) * static_cast<double>(i) / (n - 1));
            if (n > 1) sc.sweep_values.back() = to;
        } else {
            fail(s, "sweep needs values or range");
        }
    }

    void validate_points(const YAML::Node& root, const Scenario& sc) const {
        const auto check = [&](const Scenario& point, const YAML::Node& anchor, const std::string& label) {
            try {
                validate_point(point);
            } catch (const gpd::Error& e) {
                if (e.numerical()) throw;
                fail(anchor, label + e.what());
            }
        };
        if (!sc.sweep_parameter) {
            check(sc, root["params"], "");
            return;
        }
        const YAML::Node values = root["sweep"]["values"];
        for (std::size_t i = 0; i < sc.sweep_values.size(); ++i) {
            std::ostringstream label;
            label.precision(17);
            label << "at " << *sc.sweep_parameter << " = " << sc.sweep_values[i] << ": ";
            const YAML::Node anchor = values ? values[i] : root["sweep"]["range"];
            check(sc.with(*sc.sweep_parameter, sc.sweep_values[i]), anchor, label.str());
        }
    }

    std::string file_;
};

} // namespace

ConfigError::ConfigError(std::string file, int line, int column, const std::string& message)
    : std::runtime_error(where(file, line, column) + ": error: " + message), line_(line), column_(column) {}

bool Scenario::wants(Artifact a) const { return std::find(outputs.begin(), outputs.end(), a) != outputs.end(); }

std::vector<std::string> Scenario::sweepable() const {
    switch (model) {
    case ModelKind::kSpontaneousEmission: return {"omega", "gamma0", "n_thermal", "theta"};
    case ModelKind::kPhaseDamping: return {"omega", "alpha", "theta"};
    case ModelKind::kCustomJoint:
    case ModelKind::kCustomLindblad: return {"scale", "t_end"};
    }
    return {};
}

double Scenario::get(const std::string& p) const {
    if (p == "omega") return omega;
    if (p == "gamma0") return gamma0;
    if (p == "n_thermal") return n_thermal;
    if (p == "alpha") return alpha;
    if (p == "theta") return theta;
    if (p == "scale") return scale;
    if (p == "t_end") return t_end;
    throw std::invalid_argument("unknown parameter " + p);
}

Scenario Scenario::with(const std::string& p, double v) const {
    Scenario s = *this;
    if (p == "omega") s.omega = v;
    else if (p == "gamma0") s.gamma0 = v;
    else if (p == "n_thermal") s.n_thermal = v;
    else if (p == "alpha") s.alpha = v;
    else if (p == "theta") s.theta = v;
    else if (p == "scale") s.scale = v;
    else if (p == "t_end") s.t_end = v;
    else throw std::invalid_argument("unknown parameter " + p);
    return s;
}

Scenario parse_scenario_text(const std::string& text, const std::string& label) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(label, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    try {
        return Parser(label).parse(root);
    } catch (const YAML::Exception& e) {
        throw ConfigError(label, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, 0, "cannot open file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario_text(text.str(), path);
}

std::string model_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::kSpontaneousEmission: return "spontaneous_emission";
    case ModelKind::kPhaseDamping: return "phase_damping";
    case ModelKind::kCustomJoint: return "custom_joint";
    case ModelKind::kCustomLindblad: return "custom_lindblad";
    }
    return "?";
}

std::string artifact_name(Artifact a) {
    switch (a) {
    case Artifact::kAtoms: return "atoms";
    case Artifact::kMoments: return "moments";
    case Artifact::kSpread: return "spread";
    case Artifact::kSweepTable: return "sweep_table";
    case Artifact::kComparison: return "comparison";
    }
    return "?";
}

} // namespace gpd::cli
