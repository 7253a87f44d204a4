#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lts/config.hpp"

namespace lts {

/// Plant for one run. `seed` drives augmentation and random draws.
LtiSystem build_plant(const SystemSpec& spec, std::uint64_t seed);

/// Annealing parameters for a plant with n_x states and n_u inputs.
AnnealConfig make_anneal_config(const ExperimentConfig& cfg, Index n_x, Index n_u,
                                double rho_bar);

/// anneal.baseline_step_size, or step_size * ell / n_x when that is 0.
double baseline_step_size(const ExperimentConfig& cfg, Index ell, Index n_x);

struct MethodOutcome {
  AnnealTrace trace;
  Index phases = 0;  // outer phases executed, including the one at gamma = 1
  std::optional<Index> iterations_to_one;
  double final_gamma = 0.0;
  double final_rho = 0.0;  // rho(A + B K), evaluation only
  BudgetUsage budget;

  bool stabilized() const noexcept {
    return trace.status == AnnealStatus::kReachedGammaOne && final_rho < 1.0;
  }
};

struct RunOutcome {
  Index run = 0;
  std::uint64_t system_seed = 0;
  Index state_dim = 0;
  Index ell = 0;
  double rho_bar = 0.0;
  bool rho_bar_from_plant = false;
  std::vector<double> singular_values;
  double singular_gap = 0.0;
  std::optional<double> subspace_distance;  // when the true basis is computable
  std::uint64_t probes = 0;                 // oracle-counted
  std::uint64_t adjoint_samples = 0;        // probes + T
  MethodOutcome subspace;
  std::optional<MethodOutcome> baseline;
};

struct ExperimentReport {
  std::vector<RunOutcome> runs;
  bool all_diverged() const;
};

/// One seeded run: probe, estimate the subspace, anneal, and optionally run
/// the full-state baseline on a fresh oracle.
RunOutcome run_single(const ExperimentConfig& cfg, Index run, bool with_baseline);

/// All `eval.repeat` runs. When `emit` is set, writes
/// out/<name>/run_<k>/{trace.csv,baseline_trace.csv,singular_values.csv},
/// out/<name>/aggregate.csv, out/<name>/baseline_aggregate.csv and
/// out/<name>/summary.json. Throws IoError on write failure.
ExperimentReport run_experiment(const ExperimentConfig& cfg, bool emit = true);

struct SweepRow {
  Index horizon = 0;
  std::vector<double> distances;  // one per seed
  double median = 0.0;
};

/// Subspace distance against the true basis for every horizon in eval.sweep,
/// one adjoint trajectory per seed (prefixes of the longest one). Writes
/// out/<name>/sweep.csv when `emit` is set.
std::vector<SweepRow> run_subspace_sweep(const ExperimentConfig& cfg, bool emit = true);

class IoError : public Error {
 public:
  using Error::Error;
};

class TraceParseError : public Error {
 public:
  using Error::Error;
};

/// Per-iteration mean/std of gamma and rho across traces; shorter traces are
/// padded with their terminal values (final_gamma and final_rho for a trace
/// without records).
std::string aggregate_csv(const std::vector<MethodOutcome>& outcomes);

std::string summary_json(const ExperimentConfig& cfg, const ExperimentReport& report);

struct TraceSummary {
  Index phases = 0;
  std::optional<Index> iterations_to_one;
  std::optional<double> final_rho;
  double final_gamma = 0.0;
  std::uint64_t rollouts_recorded = 0;  // trajectories counted by the oracle
  std::uint64_t steps_recorded = 0;
  std::uint64_t sample_count = 0;       // phases * (n_c + n_s N)
  std::uint64_t trajectory_count = 0;   // phases * (n_c + 2 n_s N)
};

/// Parses a trace CSV. Throws TraceParseError on malformed input.
std::vector<AnnealRecord> parse_trace_csv(const std::string& text);

TraceSummary summarize_trace(const std::vector<AnnealRecord>& records,
                             const EstimationSpec& est, Index inner_steps);

/// n_x probes plus T adjoint iterations.
inline std::uint64_t adjoint_sample_count(Index horizon, Index state_dim) {
  return static_cast<std::uint64_t>(horizon + state_dim);
}

/// Reads a whole file; throws IoError.
std::string read_file(const std::string& path);
/// Creates parent directories and writes; throws IoError.
void write_file(const std::string& path, const std::string& contents);

}  // namespace lts
