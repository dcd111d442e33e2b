#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "equiplan/ebm.hpp"
#include "equiplan/envs.hpp"
#include "equiplan/error.hpp"
#include "equiplan/sampler.hpp"

namespace equiplan {

inline constexpr const char* kVersion = "0.1.0";

// Process exit codes shared by the CLI and the experiment runners.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariantViolation = 2;
inline constexpr int kExitConfigError = 3;
inline constexpr int kExitNumericFailure = 4;

int exit_code_for(ErrorCode code);

/// Result of one experiment run: named CSV files (first one is the main
/// table), a JSON summary and the exit code the CLI should return.
struct ExperimentOutput {
  std::vector<std::pair<std::string, std::string>> files;
  nlohmann::json summary;
  int exit_code = kExitOk;
};

// Subcommand names: equiv-err, plan, toy, value-iter, coordreg.
const std::vector<std::string>& experiment_names();

// Fully populated default configuration for a subcommand.
nlohmann::json default_config(const std::string& command);

// Overlays `user` on the defaults. Unknown keys or wrong value types throw
// kConfig, so every run is described by a complete, checked document.
nlohmann::json resolve_config(const std::string& command, const nlohmann::json& user);

// FNV-1a of the compact JSON dump.
std::uint64_t config_hash(const nlohmann::json& resolved);

// `jobs` worker threads; results do not depend on it.
ExperimentOutput run_experiment(const std::string& command, const nlohmann::json& resolved,
                                int jobs = 1);

// Pieces shared with the tests.
SamplerConfig sampler_from_json(const nlohmann::json& j);
EnvPtr env_from_json(const nlohmann::json& j);

struct EpisodeResult {
  bool success = false;
  int steps = 0;  // steps taken until success, or the cap
  double total_return = 0;
  std::vector<double> rewards;
};

// Receding-horizon control from `s0` with warm-started plans. `stream_base`
// separates the planner noise of different episodes.
EpisodeResult run_episode(const GeometricMDP& env, const Planner& planner, const Eigen::VectorXd& s0,
                          std::uint64_t stream_base);

struct CoordRegData {
  std::vector<EbmExample> train;
  std::vector<EbmExample> test;
};
// Scenes are the marker followed by `distractors` points; targets are the
// marker. Training markers lie in [0, 1]^2, test markers in [-1, 1]^2.
CoordRegData make_coordreg_data(int n_train, int n_test, int distractors, std::uint64_t seed);

}  // namespace equiplan
