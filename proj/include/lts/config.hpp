#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lts/anneal.hpp"
#include "lts/errors.hpp"

namespace lts {

/// Parse or constraint failure; key() is the dotted name of the field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct SystemSpec {
  // cartpole | pendulum | random | diag_pair | jordan_pair
  std::string kind = "cartpole";
  Index target_dim = 30;  // ignored by the three-state kinds
  Index inputs = 1;       // random systems only
  std::uint64_t seed = 0;
  double unstable_modulus = 1.5;    // three-state kinds
  double stable_eigenvalue = 0.97;  // three-state kinds
};

struct SubspaceSpec {
  Index horizon = 40;     // T
  Index ell = 0;          // 0: the number of unstable modes of the plant
  bool ell_auto = false;  // pick ell from the largest singular value ratio
};

struct AnnealSpec {
  double gamma0 = 0.1;
  double xi = 0.9;
  Index inner_steps = 10;
  double step_size = 1e-3;
  Index max_outer_iters = 5000;
  double alpha_max = 0.2;
  double rho_bar = 0.0;  // 0: filled from the plant
  bool baseline = true;
  double baseline_step_size = 0.0;  // 0: step_size * ell / n_x
};

struct EstimationSpec {
  double r = 1e-3;
  Index n_s = 20;
  Index n_c = 100;
  Index tau = 50;
  double guard = 0.0;
};

struct CostSpec {
  double q_scale = 1.0;
  double r_scale = 0.01;
};

struct EvalSpec {
  Index repeat = 5;
  std::uint64_t master_seed = 0;
  std::string out = "out";
  std::string name = "experiment";
  std::string mode = "stabilize";  // stabilize | subspace_sweep
  std::vector<Index> sweep = {5, 10, 20, 40};
};

struct ExperimentConfig {
  SystemSpec system;
  SubspaceSpec subspace;
  AnnealSpec anneal;
  EstimationSpec estimation;
  CostSpec costs;
  EvalSpec eval;

  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

/// Accepts JSON objects either nested ({"anneal": {"xi": 0.5}}) or with dotted
/// top-level keys ({"anneal.xi": 0.5}). Empty text yields the defaults.
/// Unknown keys and type mismatches raise ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

/// Resolved configuration as pretty-printed JSON.
std::string config_to_json(const ExperimentConfig& cfg);

EstimationParams estimation_params(const EstimationSpec& spec);
CostMatrices cost_matrices(const CostSpec& spec, Index n_x, Index n_u);

}  // namespace lts
