#pragma once

#include "homflow/flow.hpp"
#include "homflow/opflow.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace homflow::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatumSpec {
    std::optional<Vector> values;   // explicit coordinates
    std::string generator;          // "random" | "oracle_eigenfunction"
    unsigned seed = 1;
    bool nonnegative = false;
};

struct TimeGrid {
    double t0 = 0.1;
    double t1 = 100.0;
    int count = 200;
};

struct OperatorSpec {
    Matrix matrix;
    TimeGrid times;
    std::optional<double> lambda;   // residual target; defaults to the coercivity constant
    std::optional<double> horizon;  // profile horizon; defaults to times.t1
};

struct ExperimentConfig {
    int schema_version = 1;
    json problem;  // retained for the functional factory and the hash
    DatumSpec datum;
    FlowConfig flow;
    bool flow_given = false;  // false: profile runs pick tuned defaults
    std::optional<OperatorSpec> op;
    std::vector<std::string> analysis;  // extinction dissipation mass bounds invariants
    std::string output;                 // default output directory
    std::string canonical_dump;         // sorted-key dump used for hashing
};

/// Loads and validates a config document; error messages name the offending key.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const json& doc);

/// Instantiates the functional described by config.problem ("quadratic",
/// "graph_dirichlet" or "power").
std::shared_ptr<const HomogeneousFunctional> build_functional(const json& problem);

/// Resolves the datum: explicit values, seeded random draw, or the oracle
/// ground state. seed_override (from --seed) replaces the config seed.
Vector build_datum(const HomogeneousFunctional& J, const DatumSpec& spec,
                   std::optional<unsigned> seed_override);

/// FNV-1a over the canonical (sorted-key) config dump.
std::string config_hash(const ExperimentConfig& config);

}  // namespace homflow::cli
