#include "lts/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace lts {
namespace {

using json = nlohmann::json;

std::string run_dir(const ExperimentConfig& cfg, Index run) {
  return cfg.eval.out + "/" + cfg.eval.name + "/run_" + std::to_string(run);
}

std::string exp_dir(const ExperimentConfig& cfg) {
  return cfg.eval.out + "/" + cfg.eval.name;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Sample mean and (n-1) standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

MethodOutcome outcome_from(const AnnealResult& res, const LtiSystem& plant) {
  MethodOutcome m;
  m.trace = res.trace;
  m.phases = static_cast<Index>(res.trace.records.size());
  m.iterations_to_one = res.trace.iterations_to_one();
  m.final_gamma = res.gamma;
  m.final_rho = spectral_radius(plant.a() + plant.b() * res.k);
  m.budget = res.budget;
  return m;
}

json method_json(const MethodOutcome& m, const ExperimentConfig& cfg) {
  const TraceSummary s = summarize_trace(m.trace.records, cfg.estimation,
                                         cfg.anneal.inner_steps);
  json j;
  j["status"] = to_string(m.trace.status);
  if (!m.trace.failure.empty()) j["failure"] = m.trace.failure;
  j["phases"] = m.phases;
  j["iterations_to_one"] = m.iterations_to_one ? json(*m.iterations_to_one) : json(nullptr);
  j["final_gamma"] = m.final_gamma;
  j["final_rho"] = m.final_rho;
  j["stabilized"] = m.stabilized();
  j["oracle_rollouts"] = m.budget.rollouts;
  j["oracle_steps"] = m.budget.steps;
  j["sample_count"] = s.sample_count;
  j["trajectory_count"] = s.trajectory_count;
  return j;
}

json method_aggregate(const std::vector<const MethodOutcome*>& ms) {
  std::vector<double> iters;
  Index stabilized = 0;
  for (const auto* m : ms) {
    if (m->iterations_to_one) iters.push_back(static_cast<double>(*m->iterations_to_one));
    if (m->stabilized()) ++stabilized;
  }
  json j;
  j["runs"] = ms.size();
  j["stabilized_runs"] = stabilized;
  j["reached_gamma_one"] = iters.size();
  if (!iters.empty()) {
    const auto [mean, sd] = mean_std(iters);
    j["mean_iterations_to_one"] = mean;
    j["std_iterations_to_one"] = sd;
  } else {
    j["mean_iterations_to_one"] = nullptr;
    j["std_iterations_to_one"] = nullptr;
  }
  return j;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

AnnealConfig make_anneal_config(const ExperimentConfig& cfg, Index n_x, Index n_u,
                                double rho_bar) {
  AnnealConfig a;
  a.gamma0 = cfg.anneal.gamma0;
  a.xi = cfg.anneal.xi;
  a.inner_steps = cfg.anneal.inner_steps;
  a.step_size = cfg.anneal.step_size;
  a.max_outer_iters = cfg.anneal.max_outer_iters;
  a.alpha_max = cfg.anneal.alpha_max;
  a.rho_bar = rho_bar;
  a.est = estimation_params(cfg.estimation);
  a.costs = cost_matrices(cfg.costs, n_x, n_u);
  return a;
}

double baseline_step_size(const ExperimentConfig& cfg, Index ell, Index n_x) {
  if (cfg.anneal.baseline_step_size > 0.0) return cfg.anneal.baseline_step_size;
  return cfg.anneal.step_size * static_cast<double>(ell) / static_cast<double>(n_x);
}

LtiSystem build_plant(const SystemSpec& spec, std::uint64_t seed) {
  if (spec.kind == "cartpole" || spec.kind == "pendulum") {
    LtiSystem nominal = spec.kind == "cartpole" ? build_cartpole() : build_pendulum();
    if (spec.target_dim == nominal.state_dim()) return nominal;
    return augment_system(nominal, spec.target_dim, seed);
  }
  if (spec.kind == "random") return build_random_system(spec.target_dim, spec.inputs, seed);
  if (spec.kind == "diag_pair") {
    return build_three_state(ThreeStateKind::kDiagonalPair, spec.unstable_modulus,
                             spec.stable_eigenvalue);
  }
  if (spec.kind == "jordan_pair") {
    return build_three_state(ThreeStateKind::kJordanPair, spec.unstable_modulus,
                             spec.stable_eigenvalue);
  }
  throw ConfigError("system.kind", "unknown system kind '" + spec.kind + "'");
}

bool ExperimentReport::all_diverged() const {
  if (runs.empty()) return false;
  return std::all_of(runs.begin(), runs.end(), [](const RunOutcome& r) {
    return r.subspace.trace.status == AnnealStatus::kDiverged;
  });
}

RunOutcome run_single(const ExperimentConfig& cfg, Index run, bool with_baseline) {
  RunOutcome out;
  out.run = run;
  out.system_seed = cfg.system.seed + static_cast<std::uint64_t>(run);
  const LtiSystem plant = build_plant(cfg.system, out.system_seed);
  const Index n = plant.state_dim();
  out.state_dim = n;

  Rng run_rng = Rng(cfg.eval.master_seed).split(static_cast<std::uint64_t>(run));
  Rng x0_rng = run_rng.split(0);
  Rng anneal_rng = run_rng.split(1);
  Rng baseline_rng = run_rng.split(2);

  out.rho_bar = cfg.anneal.rho_bar;
  if (!(out.rho_bar > 0.0)) {
    out.rho_bar = spectral_radius(plant.a());
    out.rho_bar_from_plant = true;
  }

  SystemOracle oracle(plant);
  const std::vector<Vector> probes = probe_columns(oracle);
  out.probes = oracle.usage().probes;
  const Vector x0 = sample_initial_state(InitialStateSpec::isotropic(n), x0_rng);
  const AdjointDataMatrix data = adjoint_trajectory(probes, x0, cfg.subspace.horizon);
  out.adjoint_samples = out.probes + static_cast<std::uint64_t>(data.horizon());

  // Singular values first, to support ell_auto.
  const SubspaceEstimate full = estimate_subspace(data, std::min(n, data.horizon()));
  Index ell = cfg.subspace.ell;
  if (cfg.subspace.ell_auto) {
    ell = suggest_ell(full.singular_values);
  } else if (ell == 0) {
    ell = count_unstable(plant).unstable_count;
  }
  ell = std::clamp<Index>(ell, 1, std::min(n, data.horizon()));
  out.ell = ell;
  const SubspaceEstimate est = estimate_subspace(data, ell);
  out.singular_values = est.singular_values;
  out.singular_gap = singular_gap(est.singular_values, ell);
  try {
    const Matrix phi = true_left_unstable_basis(plant.a());
    if (phi.cols() == ell) out.subspace_distance = subspace_distance(est.phi_hat, phi);
  } catch (const AmbiguousSpectrumError&) {
  }

  const AnnealConfig acfg = make_anneal_config(cfg, n, plant.input_dim(), out.rho_bar);
  AnnealResult res = run_anneal(oracle, est, acfg, anneal_rng, evaluation_hooks(oracle));
  out.subspace = outcome_from(res, plant);

  if (with_baseline) {
    SystemOracle fresh(plant);
    AnnealConfig bcfg = acfg;
    bcfg.step_size = baseline_step_size(cfg, ell, n);
    AnnealResult b = run_baseline_fullstate(fresh, bcfg, baseline_rng, evaluation_hooks(fresh));
    out.baseline = outcome_from(b, plant);
  }
  return out;
}

std::string aggregate_csv(const std::vector<MethodOutcome>& outcomes) {
  std::size_t rows = 0;
  for (const auto& m : outcomes) rows = std::max(rows, m.trace.records.size());
  std::ostringstream out;
  out << "# per-iteration statistics over " << outcomes.size()
      << " runs; std uses n-1; runs shorter than the longest repeat their terminal"
         " gamma and rho\n";
  out << "j,gamma_mean,gamma_std,rho_mean,rho_std,active_runs\n";
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> g, r;
    Index active = 0;
    for (const auto& m : outcomes) {
      const auto& recs = m.trace.records;
      if (i < recs.size()) {
        ++active;
        g.push_back(recs[i].gamma);
        r.push_back(recs[i].spectral_radius.value_or(m.final_rho));
      } else if (!recs.empty()) {
        g.push_back(recs.back().gamma);
        r.push_back(recs.back().spectral_radius.value_or(m.final_rho));
      } else {
        g.push_back(m.final_gamma);
        r.push_back(m.final_rho);
      }
    }
    const auto [gm, gs] = mean_std(g);
    const auto [rm, rs] = mean_std(r);
    out << i << ',' << fmt(gm) << ',' << fmt(gs) << ',' << fmt(rm) << ',' << fmt(rs) << ','
        << active << '\n';
  }
  return out.str();
}

std::string summary_json(const ExperimentConfig& cfg, const ExperimentReport& report) {
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["runs"] = json::array();
  std::vector<const MethodOutcome*> subs, bases;
  for (const auto& r : report.runs) {
    json rj;
    rj["run"] = r.run;
    rj["system_seed"] = r.system_seed;
    rj["state_dim"] = r.state_dim;
    rj["ell"] = r.ell;
    rj["rho_bar"] = r.rho_bar;
    rj["rho_bar_source"] = r.rho_bar_from_plant ? "plant" : "config";
    rj["singular_gap"] = r.singular_gap;
    rj["subspace_distance"] = r.subspace_distance ? json(*r.subspace_distance) : json(nullptr);
    rj["probes"] = r.probes;
    rj["adjoint_samples"] = r.adjoint_samples;
    rj["subspace"] = method_json(r.subspace, cfg);
    subs.push_back(&r.subspace);
    if (r.baseline) {
      rj["baseline"] = method_json(*r.baseline, cfg);
      bases.push_back(&*r.baseline);
    }
    j["runs"].push_back(rj);
  }
  json agg;
  agg["subspace"] = method_aggregate(subs);
  if (!bases.empty()) {
    agg["baseline"] = method_aggregate(bases);
    const auto& s = agg["subspace"]["mean_iterations_to_one"];
    const auto& b = agg["baseline"]["mean_iterations_to_one"];
    agg["ratio"] = (s.is_number() && b.is_number() && s.get<double>() > 0.0)
                       ? json(b.get<double>() / s.get<double>())
                       : json(nullptr);
  }
  j["aggregate"] = agg;
  return j.dump(2) + "\n";
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, bool emit) {
  cfg.validate();
  ExperimentReport report;
  for (Index k = 0; k < cfg.eval.repeat; ++k) {
    report.runs.push_back(run_single(cfg, k, cfg.anneal.baseline));
  }
  if (!emit) return report;

  std::vector<MethodOutcome> subs, bases;
  for (const auto& r : report.runs) {
    const std::string dir = run_dir(cfg, r.run);
    write_file(dir + "/trace.csv", r.subspace.trace.to_csv());
    write_file(dir + "/singular_values.csv", singular_values_csv(r.singular_values));
    subs.push_back(r.subspace);
    if (r.baseline) {
      write_file(dir + "/baseline_trace.csv", r.baseline->trace.to_csv());
      bases.push_back(*r.baseline);
    }
  }
  write_file(exp_dir(cfg) + "/aggregate.csv", aggregate_csv(subs));
  if (!bases.empty()) write_file(exp_dir(cfg) + "/baseline_aggregate.csv", aggregate_csv(bases));
  write_file(exp_dir(cfg) + "/summary.json", summary_json(cfg, report));
  return report;
}

std::vector<SweepRow> run_subspace_sweep(const ExperimentConfig& cfg, bool emit) {
  cfg.validate();
  const Index t_max = *std::max_element(cfg.eval.sweep.begin(), cfg.eval.sweep.end());
  std::vector<SweepRow> rows;
  for (Index t : cfg.eval.sweep) rows.push_back({t, {}, 0.0});

  for (Index k = 0; k < cfg.eval.repeat; ++k) {
    const LtiSystem plant = build_plant(cfg.system, cfg.system.seed + static_cast<std::uint64_t>(k));
    const Index n = plant.state_dim();
    const Matrix phi = true_left_unstable_basis(plant.a());
    const Index ell = cfg.subspace.ell > 0 ? cfg.subspace.ell : phi.cols();
    if (ell != phi.cols() || ell == 0) {
      throw ConfigError("subspace.ell", "sweep needs ell equal to the number of unstable modes");
    }
    Rng x0_rng = Rng(cfg.eval.master_seed).split(static_cast<std::uint64_t>(k)).split(0);
    SystemOracle oracle(plant);
    const std::vector<Vector> probes = probe_columns(oracle);
    const Vector x0 = sample_initial_state(InitialStateSpec::isotropic(n), x0_rng);
    const AdjointDataMatrix data = adjoint_trajectory(probes, x0, t_max);
    for (auto& row : rows) {
      const SubspaceEstimate est = estimate_subspace(Matrix(data.d.leftCols(row.horizon)), ell);
      row.distances.push_back(subspace_distance(est.phi_hat, phi));
    }
  }
  for (auto& row : rows) row.median = median(row.distances);

  if (emit) {
    std::ostringstream out;
    out << "horizon,median_distance";
    for (Index k = 0; k < cfg.eval.repeat; ++k) out << ",run_" << k;
    out << '\n';
    for (const auto& row : rows) {
      out << row.horizon << ',' << fmt(row.median);
      for (double d : row.distances) out << ',' << fmt(d);
      out << '\n';
    }
    write_file(exp_dir(cfg) + "/sweep.csv", out.str());
  }
  return rows;
}

std::vector<AnnealRecord> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw TraceParseError("trace is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "j,gamma,alpha,cost_estimate,spectral_radius,rollouts_cum,steps_cum") {
    throw TraceParseError("unexpected trace header: " + line);
  }
  std::vector<AnnealRecord> records;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) {
      throw TraceParseError("line " + std::to_string(lineno) + ": expected 7 fields");
    }
    try {
      std::size_t pos = 0;
      auto num = [&pos](const std::string& s) {
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
      };
      auto count = [&pos](const std::string& s) {
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return static_cast<std::uint64_t>(v);
      };
      AnnealRecord r;
      r.j = static_cast<Index>(count(cells[0]));
      r.gamma = num(cells[1]);
      r.alpha = num(cells[2]);
      r.cost_estimate = num(cells[3]);
      if (!cells[4].empty()) r.spectral_radius = num(cells[4]);
      r.rollouts_cum = count(cells[5]);
      r.steps_cum = count(cells[6]);
      records.push_back(r);
    } catch (const std::exception&) {
      throw TraceParseError("line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return records;
}

TraceSummary summarize_trace(const std::vector<AnnealRecord>& records,
                             const EstimationSpec& est, Index inner_steps) {
  TraceSummary s;
  s.phases = static_cast<Index>(records.size());
  if (!records.empty()) {
    const AnnealRecord& last = records.back();
    s.final_gamma = last.gamma;
    s.final_rho = last.spectral_radius;
    if (last.gamma >= 1.0) s.iterations_to_one = last.j;
    s.rollouts_recorded = last.rollouts_cum;
    s.steps_recorded = last.steps_cum;
  }
  const auto phases = static_cast<std::uint64_t>(s.phases);
  const auto n_c = static_cast<std::uint64_t>(est.n_c);
  const auto pairs = static_cast<std::uint64_t>(est.n_s * inner_steps);
  s.sample_count = phases * (n_c + pairs);
  s.trajectory_count = phases * (n_c + 2 * pairs);
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace lts
