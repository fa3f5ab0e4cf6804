// homflow: experiment runner for homogeneous gradient flows and their
// spectral asymptotics. Subcommands: run | profile | opflow | verify.
#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>

using namespace homflow::cli;

namespace {

std::filesystem::path resolve_outdir(const std::string& cli_out, const std::string& config_out) {
    if (!cli_out.empty()) return cli_out;
    if (!config_out.empty()) return config_out;
    if (const char* env = std::getenv("HOMFLOW_OUT"); env && *env) return env;
    return "homflow_out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for p-homogeneous gradient flows"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string suite = "all";
    std::optional<unsigned> seed;
    unsigned seed_value = 0;
    bool seed_given = false;

    const auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) {
            cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        }
        cmd->add_option("--out", out_dir, "output directory (default: config output, then $HOMFLOW_OUT)");
        cmd->add_option("--seed", seed_value, "override the datum generator seed")
            ->each([&](const std::string&) { seed_given = true; });
    };

    CLI::App* run = app.add_subcommand("run", "integrate a gradient flow and check its invariants");
    add_common(run, true);
    CLI::App* profile = app.add_subcommand("profile", "rescale a flow and certify its asymptotic profile");
    add_common(profile, true);
    CLI::App* opflow = app.add_subcommand("opflow", "linear monotone operator flow diagnostics");
    add_common(opflow, true);
    CLI::App* verify = app.add_subcommand("verify", "run an invariant battery over the built-in zoo");
    verify->add_option("--suite", suite, "homogeneity | dissipation | rayleigh | bounds | opflow | all");
    verify->add_option("--out", out_dir, "directory for the machine-readable summary");

    CLI11_PARSE(app, argc, argv);
    if (seed_given) seed = seed_value;

    try {
        if (verify->parsed()) {
            std::optional<std::filesystem::path> out;
            if (!out_dir.empty()) {
                out = out_dir;
            } else if (const char* env = std::getenv("HOMFLOW_OUT"); env && *env) {
                out = std::filesystem::path(env);
            }
            return cmd_verify(suite, out);
        }
        const ExperimentConfig config = load_config(config_path);
        const std::filesystem::path outdir = resolve_outdir(out_dir, config.output);
        if (run->parsed()) return cmd_run(config, outdir, seed);
        if (profile->parsed()) return cmd_profile(config, outdir, seed);
        if (opflow->parsed()) return cmd_opflow(config, outdir, seed);
    } catch (const ConfigError& err) {
        std::fprintf(stderr, "%s\n", err.what());
        return kExitFailure;
    } catch (const homflow::NotMonotoneError& err) {
        std::fprintf(stderr, "%s\n", err.what());
        return kExitFailure;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kExitFailure;
    }
    return kExitFailure;
}
