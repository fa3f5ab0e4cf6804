#pragma once

#include "config.hpp"
#include "report.hpp"

namespace homflow::cli {

// exit codes shared by the subcommands
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;    // malformed config, solver failure, not monotone
inline constexpr int kExitViolation = 2;  // an invariant check failed
inline constexpr int kExitNoProfile = 3;  // profile did not converge

int cmd_run(const ExperimentConfig& config, const std::filesystem::path& outdir,
            std::optional<unsigned> seed_override);
int cmd_profile(const ExperimentConfig& config, const std::filesystem::path& outdir,
                std::optional<unsigned> seed_override);
int cmd_opflow(const ExperimentConfig& config, const std::filesystem::path& outdir,
               std::optional<unsigned> seed_override);
int cmd_verify(const std::string& suite, const std::optional<std::filesystem::path>& outdir);

}  // namespace homflow::cli
