#include "config.hpp"

#include "homflow/spectral.hpp"
#include "homflow/zoo.hpp"

#include <fstream>

namespace homflow::cli {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config error: " + key + ": " + what);
}

double require_number(const json& node, const std::string& key, const std::string& label) {
    if (!node.contains(key) || !node[key].is_number()) fail(label, "expected a number");
    return node[key].get<double>();
}

Matrix parse_matrix(const json& node, const std::string& label) {
    if (!node.is_array() || node.empty()) fail(label, "expected a non-empty array of rows");
    const size_t n = node.size();
    Matrix M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(node[0].size()));
    for (size_t i = 0; i < n; ++i) {
        const json& row = node[i];
        if (!row.is_array() || row.size() != node[0].size()) {
            fail(label, "rows must be arrays of equal length");
        }
        for (size_t j = 0; j < row.size(); ++j) {
            if (!row[j].is_number()) fail(label, "entries must be numbers");
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
    }
    return M;
}

Vector parse_vector(const json& node, const std::string& label) {
    if (!node.is_array() || node.empty()) fail(label, "expected a non-empty array of numbers");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (size_t i = 0; i < node.size(); ++i) {
        if (!node[i].is_number()) fail(label, "entries must be numbers");
        v[static_cast<Eigen::Index>(i)] = node[i].get<double>();
    }
    if (!all_finite(v)) fail(label, "entries must be finite");
    return v;
}

}  // namespace

std::shared_ptr<const HomogeneousFunctional> build_functional(const json& problem) {
    if (!problem.contains("kind") || !problem["kind"].is_string()) {
        fail("problem.kind", "expected one of quadratic | graph_dirichlet | power");
    }
    const std::string kind = problem["kind"].get<std::string>();

    std::optional<InnerProductSpace> space;
    if (problem.contains("weights")) {
        space.emplace(parse_vector(problem["weights"], "problem.weights"));
    }

    if (kind == "quadratic") {
        if (!problem.contains("matrix")) fail("problem.matrix", "matrix entries missing");
        Matrix K = parse_matrix(problem["matrix"], "problem.matrix");
        try {
            if (space) return std::make_shared<QuadraticForm>(std::move(K), *space);
            return std::make_shared<QuadraticForm>(std::move(K));
        } catch (const std::invalid_argument& err) {
            fail("problem.matrix", err.what());
        }
    }
    if (kind == "graph_dirichlet") {
        if (!problem.contains("n") || !problem["n"].is_number_integer()) {
            fail("problem.n", "vertex count missing");
        }
        if (!problem.contains("p")) fail("problem.p", "degree missing");
        if (!problem["p"].is_number()) fail("problem.p", "degree missing");
        if (!problem.contains("edges") || !problem["edges"].is_array()) {
            fail("problem.edges", "edge list missing");
        }
        const int n = problem["n"].get<int>();
        const double p = problem["p"].get<double>();
        std::vector<GraphDirichletEnergy::Edge> edges;
        for (const json& entry : problem["edges"]) {
            if (!entry.is_array() || entry.size() != 3) {
                fail("problem.edges", "each edge must be [i, j, weight]");
            }
            edges.push_back({entry[0].get<int>(), entry[1].get<int>(), entry[2].get<double>()});
        }
        try {
            if (space) return std::make_shared<GraphDirichletEnergy>(n, std::move(edges), p, *space);
            return std::make_shared<GraphDirichletEnergy>(n, std::move(edges), p);
        } catch (const std::invalid_argument& err) {
            fail("problem", err.what());
        }
    }
    if (kind == "power") {
        if (!problem.contains("r")) fail("problem.r", "power exponent missing");
        if (!problem.contains("base")) fail("problem.base", "base problem missing");
        const double r = require_number(problem, "r", "problem.r");
        auto base = build_functional(problem["base"]);
        try {
            return std::make_shared<PowerTransform>(std::move(base), r);
        } catch (const std::invalid_argument& err) {
            fail("problem.r", err.what());
        }
    }
    fail("problem.kind", "unknown kind '" + kind + "'");
}

Vector build_datum(const HomogeneousFunctional& J, const DatumSpec& spec,
                   std::optional<unsigned> seed_override) {
    if (spec.values) {
        if (spec.values->size() != J.space().dim()) {
            fail("datum.values", "dimension does not match the problem");
        }
        return *spec.values;
    }
    if (spec.generator == "random") {
        return zoo::random_datum(J, seed_override.value_or(spec.seed), spec.nonnegative);
    }
    if (spec.generator == "oracle_eigenfunction") {
        return ground_state_oracle(J, 6, 1e-8, seed_override.value_or(spec.seed)).vector;
    }
    fail("datum.generator", "unknown generator '" + spec.generator + "'");
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config error: top level must be an object");
    ExperimentConfig config;
    if (doc.contains("schema_version")) {
        config.schema_version = doc["schema_version"].get<int>();
        if (config.schema_version != 1) fail("schema_version", "only version 1 is supported");
    }

    if (!doc.contains("problem") || !doc["problem"].is_object()) {
        fail("problem", "problem section missing");
    }
    config.problem = doc["problem"];

    const std::string kind = config.problem.value("kind", "");
    if (kind == "operator") {
        OperatorSpec op;
        if (!config.problem.contains("matrix")) fail("problem.matrix", "matrix entries missing");
        op.matrix = parse_matrix(config.problem["matrix"], "problem.matrix");
        if (doc.contains("operator")) {
            const json& section = doc["operator"];
            if (section.contains("times")) {
                const json& times = section["times"];
                op.times.t0 = require_number(times, "t0", "operator.times.t0");
                op.times.t1 = require_number(times, "t1", "operator.times.t1");
                if (!times.contains("count") || !times["count"].is_number_integer()) {
                    fail("operator.times.count", "expected an integer");
                }
                op.times.count = times["count"].get<int>();
            }
            if (section.contains("lambda")) {
                op.lambda = require_number(section, "lambda", "operator.lambda");
            }
            if (section.contains("horizon")) {
                op.horizon = require_number(section, "horizon", "operator.horizon");
            }
        }
        config.op = std::move(op);
    } else {
        build_functional(config.problem);  // validate eagerly for crisp errors
    }

    if (!doc.contains("datum") || !doc["datum"].is_object()) fail("datum", "datum section missing");
    const json& datum = doc["datum"];
    if (datum.contains("values")) {
        config.datum.values = parse_vector(datum["values"], "datum.values");
    } else if (datum.contains("generator")) {
        config.datum.generator = datum["generator"].get<std::string>();
        config.datum.seed = datum.value("seed", 1u);
        config.datum.nonnegative = datum.value("nonnegative", false);
    } else {
        fail("datum", "need either values or a generator");
    }

    if (doc.contains("flow")) {
        const json& flow = doc["flow"];
        config.flow_given = true;
        config.flow.tau0 = flow.value("tau0", config.flow.tau0);
        config.flow.adapt_factor = flow.value("adapt_factor", config.flow.adapt_factor);
        config.flow.extinction_tol = flow.value("extinction_tol", config.flow.extinction_tol);
        config.flow.t_max = flow.value("t_max", config.flow.t_max);
        config.flow.max_steps = flow.value("max_steps", config.flow.max_steps);
        config.flow.prox_tol = flow.value("prox_tol", config.flow.prox_tol);
        config.flow.project_datum = flow.value("project_datum", config.flow.project_datum);
        config.flow.tail_resolution = flow.value("tail_resolution", config.flow.tail_resolution);
        config.flow.tau_growth = flow.value("tau_growth", config.flow.tau_growth);
        try {
            config.flow.validate();
        } catch (const std::invalid_argument& err) {
            fail("flow", err.what());
        }
    }

    if (doc.contains("analysis")) {
        for (const json& entry : doc["analysis"]) {
            config.analysis.push_back(entry.get<std::string>());
        }
    }
    config.output = doc.value("output", "");
    config.canonical_dump = doc.dump();  // nlohmann objects iterate in sorted key order
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot open '" + path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        throw ConfigError("config error: " + std::string(err.what()));
    }
    return parse_config(doc);
}

std::string config_hash(const ExperimentConfig& config) {
    uint64_t hash = 1469598103934665603ull;
    for (const char c : config.canonical_dump) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buffer);
}

}  // namespace homflow::cli
