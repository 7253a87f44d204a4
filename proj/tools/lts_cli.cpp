// Command-line front end: plant inspection, subspace learning, annealed
// policy gradient, and config-driven experiments.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lts/experiment.hpp"

namespace {

using json = nlohmann::json;
using namespace lts;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file (omitted: defaults)");
  cmd->add_option("--seed", f.seed, "master seed override");
  cmd->add_option("--out", f.out, "output directory override");
  cmd->add_flag("--dry-run", f.dry_run, "print the resolved config and planned budget only");
}

ExperimentConfig load(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? parse_config_text("") : parse_config(f.config);
  if (f.seed) cfg.eval.master_seed = *f.seed;
  if (!f.out.empty()) cfg.eval.out = f.out;
  cfg.validate();
  return cfg;
}

json planned_budget(const ExperimentConfig& cfg) {
  const LtiSystem plant = build_plant(cfg.system, cfg.system.seed);
  const Index n = plant.state_dim();
  const auto per_phase = cfg.estimation.n_c + 2 * cfg.estimation.n_s * cfg.anneal.inner_steps;
  json j;
  j["state_dim"] = n;
  j["probes"] = n;
  j["adjoint_samples"] = adjoint_sample_count(cfg.subspace.horizon, n);
  j["rollouts_per_phase"] = per_phase;
  j["steps_per_phase"] = per_phase * cfg.estimation.tau;
  j["max_phases"] = cfg.anneal.max_outer_iters;
  j["runs"] = cfg.eval.repeat;
  j["methods_per_run"] = cfg.anneal.baseline ? 2 : 1;
  return j;
}

int dry_run(const ExperimentConfig& cfg) {
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["planned_budget"] = planned_budget(cfg);
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

json method_report(const MethodOutcome& m) {
  json j;
  j["status"] = to_string(m.trace.status);
  if (!m.trace.failure.empty()) j["failure"] = m.trace.failure;
  j["phases"] = m.phases;
  j["iterations_to_one"] = m.iterations_to_one ? json(*m.iterations_to_one) : json(nullptr);
  j["final_gamma"] = m.final_gamma;
  j["final_rho"] = m.final_rho;
  j["oracle_rollouts"] = m.budget.rollouts;
  j["oracle_steps"] = m.budget.steps;
  return j;
}

int cmd_gen_system(const ExperimentConfig& cfg) {
  const LtiSystem plant = build_plant(cfg.system, cfg.system.seed);
  const SpectrumReport rep = count_unstable(plant);
  json j;
  j["kind"] = cfg.system.kind;
  j["state_dim"] = plant.state_dim();
  j["input_dim"] = plant.input_dim();
  j["spectral_radius"] = spectral_radius(plant.a());
  j["unstable_count"] = rep.unstable_count;
  j["margin"] = rep.margin;
  j["eigenvalue_moduli"] = rep.eigenvalue_moduli;
  j["controllability_rank"] = controllability_rank(plant);
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_learn_subspace(const ExperimentConfig& cfg, bool write) {
  const LtiSystem plant = build_plant(cfg.system, cfg.system.seed);
  const Index n = plant.state_dim();
  SystemOracle oracle(plant);
  const auto probes = probe_columns(oracle);
  Rng x0_rng = Rng(cfg.eval.master_seed).split(0).split(0);
  const Vector x0 = sample_initial_state(InitialStateSpec::isotropic(n), x0_rng);
  const AdjointDataMatrix data = adjoint_trajectory(probes, x0, cfg.subspace.horizon);
  const Index cap = std::min(n, data.horizon());
  const SubspaceEstimate all = estimate_subspace(data, cap);
  Index ell = cfg.subspace.ell;
  if (cfg.subspace.ell_auto) {
    ell = suggest_ell(all.singular_values);
  } else if (ell == 0) {
    ell = count_unstable(plant).unstable_count;
  }
  ell = std::clamp<Index>(ell, 1, cap);
  const SubspaceEstimate est = estimate_subspace(data, ell);

  json j;
  j["ell"] = ell;
  j["suggested_ell"] = suggest_ell(est.singular_values);
  j["singular_values"] = est.singular_values;
  j["singular_gap"] = singular_gap(est.singular_values, ell);
  j["adjoint_samples"] = oracle.usage().probes + static_cast<std::uint64_t>(data.horizon());
  try {
    const Matrix phi = true_left_unstable_basis(plant.a());
    j["subspace_distance"] =
        phi.cols() == ell ? json(subspace_distance(est.phi_hat, phi)) : json(nullptr);
  } catch (const AmbiguousSpectrumError&) {
    j["subspace_distance"] = nullptr;
  }
  if (write) {
    std::ostringstream phi_csv;
    phi_csv.precision(17);
    for (Index r = 0; r < est.phi_hat.rows(); ++r) {
      for (Index c = 0; c < est.phi_hat.cols(); ++c) {
        phi_csv << (c ? "," : "") << est.phi_hat(r, c);
      }
      phi_csv << '\n';
    }
    const std::string dir = cfg.eval.out + "/" + cfg.eval.name;
    write_file(dir + "/phi_hat.csv", phi_csv.str());
    write_file(dir + "/singular_values.csv", singular_values_csv(est.singular_values));
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_stabilize(const ExperimentConfig& cfg, bool write) {
  const RunOutcome run = run_single(cfg, 0, false);
  if (write) {
    write_file(cfg.eval.out + "/" + cfg.eval.name + "/trace.csv", run.subspace.trace.to_csv());
  }
  json j;
  j["ell"] = run.ell;
  j["subspace_distance"] = run.subspace_distance ? json(*run.subspace_distance) : json(nullptr);
  j["adjoint_samples"] = run.adjoint_samples;
  j["subspace"] = method_report(run.subspace);
  std::cout << j.dump(2) << '\n';
  return run.subspace.trace.status == AnnealStatus::kDiverged ? kExitDiverged : kExitOk;
}

int cmd_baseline(const ExperimentConfig& cfg, bool write) {
  const LtiSystem plant = build_plant(cfg.system, cfg.system.seed);
  const Index n = plant.state_dim();
  Index ell = cfg.subspace.ell > 0 ? cfg.subspace.ell : count_unstable(plant).unstable_count;
  ell = std::max<Index>(ell, 1);
  const double rho_bar = cfg.anneal.rho_bar > 0.0 ? cfg.anneal.rho_bar : spectral_radius(plant.a());
  AnnealConfig acfg = make_anneal_config(cfg, n, plant.input_dim(), rho_bar);
  acfg.step_size = baseline_step_size(cfg, ell, n);
  SystemOracle oracle(plant);
  Rng rng = Rng(cfg.eval.master_seed).split(0).split(2);
  const AnnealResult res = run_baseline_fullstate(oracle, acfg, rng, evaluation_hooks(oracle));
  if (write) {
    write_file(cfg.eval.out + "/" + cfg.eval.name + "/baseline_trace.csv", res.trace.to_csv());
  }
  MethodOutcome m;
  m.trace = res.trace;
  m.phases = static_cast<Index>(res.trace.records.size());
  m.iterations_to_one = res.trace.iterations_to_one();
  m.final_gamma = res.gamma;
  m.final_rho = spectral_radius(plant.a() + plant.b() * res.k);
  m.budget = res.budget;
  std::cout << method_report(m).dump(2) << '\n';
  return res.trace.status == AnnealStatus::kDiverged ? kExitDiverged : kExitOk;
}

int cmd_experiment(const ExperimentConfig& cfg) {
  if (cfg.eval.mode == "subspace_sweep") {
    const auto rows = run_subspace_sweep(cfg, true);
    json j = json::array();
    for (const auto& r : rows) j.push_back({{"horizon", r.horizon}, {"median_distance", r.median}});
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }
  const ExperimentReport report = run_experiment(cfg, true);
  const json summary = json::parse(summary_json(cfg, report));
  std::cout << summary["aggregate"].dump(2) << '\n';
  return report.all_diverged() ? kExitDiverged : kExitOk;
}

json trace_summary_json(const std::string& path, const ExperimentConfig& cfg) {
  const TraceSummary s = summarize_trace(parse_trace_csv(read_file(path)), cfg.estimation,
                                         cfg.anneal.inner_steps);
  json j;
  j["trace"] = path;
  j["phases"] = s.phases;
  j["iterations_to_one"] = s.iterations_to_one ? json(*s.iterations_to_one) : json(nullptr);
  j["final_gamma"] = s.final_gamma;
  j["final_rho"] = s.final_rho ? json(*s.final_rho) : json(nullptr);
  j["sample_count"] = s.sample_count;
  j["trajectory_count"] = s.trajectory_count;
  j["rollouts_recorded"] = s.rollouts_recorded;
  j["steps_recorded"] = s.steps_recorded;
  return j;
}

int cmd_summarize(const ExperimentConfig& cfg, const std::string& trace,
                  const std::string& baseline) {
  const LtiSystem plant = build_plant(cfg.system, cfg.system.seed);
  json j;
  j["subspace"] = trace_summary_json(trace, cfg);
  j["adjoint_samples"] = adjoint_sample_count(cfg.subspace.horizon, plant.state_dim());
  if (!baseline.empty()) {
    j["baseline"] = trace_summary_json(baseline, cfg);
    const auto& s = j["subspace"]["iterations_to_one"];
    const auto& b = j["baseline"]["iterations_to_one"];
    j["ratio"] = (s.is_number() && b.is_number() && s.get<double>() > 0)
                     ? json(b.get<double>() / s.get<double>())
                     : json(nullptr);
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning to stabilize LTI plants on the unstable subspace"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* gen = app.add_subcommand("gen-system", "print the plant's spectrum report");
  auto* learn = app.add_subcommand("learn-subspace", "estimate the left unstable subspace");
  auto* stab = app.add_subcommand("stabilize", "annealed policy gradient on the subspace");
  auto* base = app.add_subcommand("baseline", "annealed policy gradient on the full state");
  auto* exp = app.add_subcommand("experiment", "config-driven multi-seed pipeline");
  auto* summ = app.add_subcommand("summarize", "iteration and sample counts of trace CSVs");
  for (auto* cmd : {gen, learn, stab, base, exp, summ}) add_common(cmd, flags);
  std::string trace_path, baseline_path;
  summ->add_option("trace", trace_path, "trace CSV")->required();
  summ->add_option("--baseline", baseline_path, "baseline trace CSV for the ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const ExperimentConfig cfg = load(flags);
    if (flags.dry_run) return dry_run(cfg);
    const bool write = !flags.out.empty();
    if (gen->parsed()) return cmd_gen_system(cfg);
    if (learn->parsed()) return cmd_learn_subspace(cfg, write);
    if (stab->parsed()) return cmd_stabilize(cfg, write);
    if (base->parsed()) return cmd_baseline(cfg, write);
    if (exp->parsed()) return cmd_experiment(cfg);
    if (summ->parsed()) return cmd_summarize(cfg, trace_path, baseline_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const TraceParseError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
