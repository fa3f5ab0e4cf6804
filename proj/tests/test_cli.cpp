#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "commands.hpp"
#include "config.hpp"
#include "report.hpp"

#include <fstream>
#include <sstream>

using namespace homflow;
using namespace homflow::cli;

namespace {

json minimal_graph_config() {
    return json::parse(R"({
      "problem": {"kind": "graph_dirichlet", "n": 2, "edges": [[0, 1, 1.0]], "p": 1.0},
      "datum": {"values": [1.0, -1.0]},
      "flow": {"tau0": 1e-3, "t_max": 3.0, "extinction_tol": 1e-8, "prox_tol": 1e-12}
    })");
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("config validation names the offending key") {
    json doc = minimal_graph_config();
    doc["problem"].erase("p");
    try {
        parse_config(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("degree missing") != std::string::npos);
        CHECK(std::string(err.what()).find("problem.p") != std::string::npos);
    }

    doc = minimal_graph_config();
    doc["problem"].erase("edges");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = minimal_graph_config();
    doc["datum"] = json::object();
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = minimal_graph_config();
    doc["flow"]["adapt_factor"] = 2.0;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = minimal_graph_config();
    doc["problem"]["kind"] = "mystery";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("functional factory covers every kind") {
    const auto quad = build_functional(json::parse(R"({"kind": "quadratic", "matrix": [[1, 0], [0, 2]]})"));
    CHECK(quad->degree() == 2.0);

    const auto graph = build_functional(
        json::parse(R"({"kind": "graph_dirichlet", "n": 3, "edges": [[0,1,1.0],[1,2,1.0]], "p": 1.5})"));
    CHECK(graph->degree() == 1.5);

    const auto power = build_functional(json::parse(
        R"({"kind": "power", "r": 2.0, "base": {"kind": "graph_dirichlet", "n": 2, "edges": [[0,1,1.0]], "p": 1.0}})"));
    CHECK(power->degree() == 2.0);

    const auto weighted = build_functional(json::parse(
        R"({"kind": "graph_dirichlet", "n": 2, "edges": [[0,1,1.0]], "p": 1.0, "weights": [2.0, 1.0]})"));
    CHECK_FALSE(weighted->space().is_euclidean());
}

TEST_CASE("datum resolution and seed override") {
    const auto graph = build_functional(
        json::parse(R"({"kind": "graph_dirichlet", "n": 4, "edges": [[0,1,1.0],[1,2,1.0],[2,3,1.0]], "p": 2.0})"));

    DatumSpec spec;
    spec.generator = "random";
    spec.seed = 3;
    const Vector a = build_datum(*graph, spec, {});
    const Vector b = build_datum(*graph, spec, {});
    CHECK((a - b).norm() == 0.0);  // deterministic
    const Vector c = build_datum(*graph, spec, 4u);
    CHECK((a - c).norm() > 1e-8);  // override takes effect

    DatumSpec oracle_spec;
    oracle_spec.generator = "oracle_eigenfunction";
    const Vector gs = build_datum(*graph, oracle_spec, {});
    CHECK(gs.size() == 4);

    DatumSpec bad;
    bad.generator = "fibonacci";
    CHECK_THROWS_AS(build_datum(*graph, bad, {}), ConfigError);
}

TEST_CASE("run command produces byte-identical outputs for identical configs") {
    ExperimentConfig config = parse_config(minimal_graph_config());
    const std::filesystem::path dir1 = std::filesystem::temp_directory_path() / "homflow_cli_a";
    const std::filesystem::path dir2 = std::filesystem::temp_directory_path() / "homflow_cli_b";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);

    CHECK(cmd_run(config, dir1, {}) == kExitOk);
    CHECK(cmd_run(config, dir2, {}) == kExitOk);

    CHECK(slurp(dir1 / "trace.csv") == slurp(dir2 / "trace.csv"));
    CHECK(slurp(dir1 / "report.json") == slurp(dir2 / "report.json"));
    CHECK(slurp(dir1 / "trace.csv").substr(0, 28) == "t,norm,energy,rayleigh,tau\n0");

    // the report embeds the config hash and the (null) seed
    const json report = json::parse(slurp(dir1 / "report.json"));
    CHECK(report["config_hash"] == config_hash(config));
    CHECK(report["seed"].is_null());
    CHECK(report["extinction"]["regime"] == "finite");
}

TEST_CASE("profile command certifies the two-node TV ground state") {
    json doc = minimal_graph_config();
    doc.erase("flow");  // profile picks tuned settings
    ExperimentConfig config = parse_config(doc);
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "homflow_cli_profile";
    std::filesystem::remove_all(dir);
    CHECK(cmd_profile(config, dir, {}) == kExitOk);

    const json report = json::parse(slurp(dir / "profile.json"));
    CHECK(report["profile"]["converged"].get<bool>());
    CHECK(report["profile"]["is_ground_state"].get<bool>());
    CHECK(report["profile"]["lambda_limit_test"].get<bool>());
    CHECK(report["profile"]["eigen_residual"].get<double>() <= 1e-6);
    CHECK(report["profile"]["coordinates"].size() == 2);
}

TEST_CASE("opflow command handles the counterexample and rejects non-monotone operators") {
    json doc = json::parse(R"({
      "problem": {"kind": "operator", "matrix": [[1,0,0],[0,1,1],[0,-1,1]]},
      "datum": {"values": [1.0, 1.0, 1.0]},
      "operator": {"times": {"t0": 10.0, "t1": 100.0, "count": 200}, "lambda": 1.0}
    })");
    ExperimentConfig config = parse_config(doc);
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "homflow_cli_opflow";
    std::filesystem::remove_all(dir);
    CHECK(cmd_opflow(config, dir, {}) == kExitOk);

    const json report = json::parse(slurp(dir / "opflow_report.json"));
    CHECK_FALSE(report["profile"]["converged"].get<bool>());
    CHECK(report["profile"]["residual"].get<double>() >= 0.1);
    CHECK(report["integrability"]["classification"] == "inconclusive");

    // header of the surrogate CSV carries the added columns
    const std::string csv = slurp(dir / "surrogate.csv");
    CHECK(csv.substr(0, csv.find('\n')) == "t,norm,energy,rayleigh,tau,h,g,residual");

    json bad = doc;
    bad["problem"]["matrix"] = json::parse("[[-1, 0], [0, 1]]");
    ExperimentConfig bad_config = parse_config(bad);
    CHECK_THROWS_AS(cmd_opflow(bad_config, dir, {}), NotMonotoneError);
}

TEST_CASE("verify command surfaces unknown suites") {
    CHECK_THROWS_AS(cmd_verify("imaginary", {}), std::invalid_argument);
}
