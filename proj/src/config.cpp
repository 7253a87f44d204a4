#include "lts/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace lts {
namespace {

using json = nlohmann::json;
using Setter = std::function<void(const json&)>;

std::string type_error(const char* expected, const json& v) {
  return std::string("expected ") + expected + ", got " + v.type_name();
}

Setter bind(const std::string& key, double& out) {
  return [&out, key](const json& v) {
    if (!v.is_number()) throw ConfigError(key, type_error("a number", v));
    out = v.get<double>();
  };
}

Setter bind(const std::string& key, Index& out) {
  return [&out, key](const json& v) {
    if (!v.is_number_integer()) throw ConfigError(key, type_error("an integer", v));
    out = v.get<Index>();
  };
}

Setter bind(const std::string& key, std::uint64_t& out) {
  return [&out, key](const json& v) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      throw ConfigError(key, type_error("a non-negative integer", v));
    }
    out = v.get<std::uint64_t>();
  };
}

Setter bind(const std::string& key, bool& out) {
  return [&out, key](const json& v) {
    if (!v.is_boolean()) throw ConfigError(key, type_error("a boolean", v));
    out = v.get<bool>();
  };
}

Setter bind(const std::string& key, std::string& out) {
  return [&out, key](const json& v) {
    if (!v.is_string()) throw ConfigError(key, type_error("a string", v));
    out = v.get<std::string>();
  };
}

Setter bind(const std::string& key, std::vector<Index>& out) {
  return [&out, key](const json& v) {
    if (!v.is_array()) throw ConfigError(key, type_error("an array of integers", v));
    std::vector<Index> values;
    for (const auto& item : v) {
      if (!item.is_number_integer()) {
        throw ConfigError(key, type_error("an array of integers", v));
      }
      values.push_back(item.get<Index>());
    }
    out = std::move(values);
  };
}

std::map<std::string, Setter> schema(ExperimentConfig& c) {
  std::map<std::string, Setter> s;
  auto add = [&s](const std::string& key, auto& field) { s[key] = bind(key, field); };
  add("system.kind", c.system.kind);
  add("system.target_dim", c.system.target_dim);
  add("system.inputs", c.system.inputs);
  add("system.seed", c.system.seed);
  add("system.unstable_modulus", c.system.unstable_modulus);
  add("system.stable_eigenvalue", c.system.stable_eigenvalue);
  add("subspace.horizon", c.subspace.horizon);
  add("subspace.ell", c.subspace.ell);
  add("subspace.ell_auto", c.subspace.ell_auto);
  add("anneal.gamma0", c.anneal.gamma0);
  add("anneal.xi", c.anneal.xi);
  add("anneal.inner_steps", c.anneal.inner_steps);
  add("anneal.step_size", c.anneal.step_size);
  add("anneal.max_outer_iters", c.anneal.max_outer_iters);
  add("anneal.alpha_max", c.anneal.alpha_max);
  add("anneal.rho_bar", c.anneal.rho_bar);
  add("anneal.baseline", c.anneal.baseline);
  add("anneal.baseline_step_size", c.anneal.baseline_step_size);
  add("estimation.r", c.estimation.r);
  add("estimation.n_s", c.estimation.n_s);
  add("estimation.n_c", c.estimation.n_c);
  add("estimation.tau", c.estimation.tau);
  add("estimation.guard", c.estimation.guard);
  add("costs.q_scale", c.costs.q_scale);
  add("costs.r_scale", c.costs.r_scale);
  add("eval.repeat", c.eval.repeat);
  add("eval.master_seed", c.eval.master_seed);
  add("eval.out", c.eval.out);
  add("eval.name", c.eval.name);
  add("eval.mode", c.eval.mode);
  add("eval.sweep", c.eval.sweep);
  return s;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

bool is_three_state(const std::string& kind) {
  return kind == "diag_pair" || kind == "jordan_pair";
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto& k = system.kind;
  require(k == "cartpole" || k == "pendulum" || k == "random" || is_three_state(k),
          "system.kind", "must be one of cartpole, pendulum, random, diag_pair, jordan_pair");
  if (k == "cartpole") require(system.target_dim >= 4, "system.target_dim", "must be >= 4 for cartpole");
  if (k == "pendulum") require(system.target_dim >= 2, "system.target_dim", "must be >= 2 for pendulum");
  if (k == "random") require(system.target_dim >= 1, "system.target_dim", "must be >= 1");
  require(system.inputs >= 1, "system.inputs", "must be >= 1");
  require(system.unstable_modulus > 0.0, "system.unstable_modulus", "must be > 0");
  require(std::abs(system.stable_eigenvalue) < 1.0, "system.stable_eigenvalue",
          "must have modulus < 1");

  require(subspace.horizon >= 1, "subspace.horizon", "must be >= 1");
  require(subspace.ell >= 0, "subspace.ell", "must be >= 0");

  require(anneal.gamma0 > 0.0 && anneal.gamma0 < 1.0, "anneal.gamma0", "gamma0 must lie in (0,1)");
  require(anneal.xi > 0.0 && anneal.xi < 1.0, "anneal.xi", "xi must lie in (0,1)");
  require(anneal.inner_steps >= 1, "anneal.inner_steps", "must be >= 1");
  require(anneal.step_size > 0.0, "anneal.step_size", "must be > 0");
  require(anneal.max_outer_iters >= 1, "anneal.max_outer_iters", "must be >= 1");
  require(anneal.alpha_max > 0.0, "anneal.alpha_max", "must be > 0");
  require(anneal.rho_bar >= 0.0, "anneal.rho_bar", "must be >= 0 (0 fills it from the plant)");
  if (anneal.rho_bar > 0.0) {
    require(anneal.gamma0 < 1.0 / (anneal.rho_bar * anneal.rho_bar), "anneal.gamma0",
            "must satisfy gamma0 < 1 / rho_bar^2");
  }
  require(anneal.baseline_step_size >= 0.0, "anneal.baseline_step_size", "must be >= 0");

  require(estimation.r > 0.0, "estimation.r", "must be > 0");
  require(estimation.n_s >= 1, "estimation.n_s", "must be >= 1");
  require(estimation.n_c >= 1, "estimation.n_c", "must be >= 1");
  require(estimation.tau >= 1, "estimation.tau", "must be >= 1");
  require(estimation.guard >= 0.0, "estimation.guard", "must be >= 0");

  require(costs.q_scale > 0.0, "costs.q_scale", "must be > 0");
  require(costs.r_scale > 0.0, "costs.r_scale", "must be > 0");

  require(eval.repeat >= 1, "eval.repeat", "must be >= 1");
  require(!eval.name.empty(), "eval.name", "must not be empty");
  require(eval.mode == "stabilize" || eval.mode == "subspace_sweep", "eval.mode",
          "must be stabilize or subspace_sweep");
  require(!eval.sweep.empty(), "eval.sweep", "must not be empty");
  for (Index t : eval.sweep) require(t >= 1, "eval.sweep", "horizons must be >= 1");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    cfg.validate();
    return cfg;
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");

  auto setters = schema(cfg);
  auto apply = [&setters](const std::string& key, const json& value) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key");
    it->second(value);
  };
  for (const auto& [top, value] : doc.items()) {
    if (top.find('.') != std::string::npos) {
      apply(top, value);
    } else if (value.is_object()) {
      for (const auto& [inner, v] : value.items()) apply(top + "." + inner, v);
    } else {
      throw ConfigError(top, "unknown key");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["system"] = {{"kind", c.system.kind},
                 {"target_dim", c.system.target_dim},
                 {"inputs", c.system.inputs},
                 {"seed", c.system.seed},
                 {"unstable_modulus", c.system.unstable_modulus},
                 {"stable_eigenvalue", c.system.stable_eigenvalue}};
  j["subspace"] = {{"horizon", c.subspace.horizon},
                   {"ell", c.subspace.ell},
                   {"ell_auto", c.subspace.ell_auto}};
  j["anneal"] = {{"gamma0", c.anneal.gamma0},
                 {"xi", c.anneal.xi},
                 {"inner_steps", c.anneal.inner_steps},
                 {"step_size", c.anneal.step_size},
                 {"max_outer_iters", c.anneal.max_outer_iters},
                 {"alpha_max", c.anneal.alpha_max},
                 {"rho_bar", c.anneal.rho_bar},
                 {"baseline", c.anneal.baseline},
                 {"baseline_step_size", c.anneal.baseline_step_size}};
  j["estimation"] = {{"r", c.estimation.r},
                     {"n_s", c.estimation.n_s},
                     {"n_c", c.estimation.n_c},
                     {"tau", c.estimation.tau},
                     {"guard", c.estimation.guard}};
  j["costs"] = {{"q_scale", c.costs.q_scale}, {"r_scale", c.costs.r_scale}};
  j["eval"] = {{"repeat", c.eval.repeat},
               {"master_seed", c.eval.master_seed},
               {"out", c.eval.out},
               {"name", c.eval.name},
               {"mode", c.eval.mode},
               {"sweep", c.eval.sweep}};
  return j.dump(2);
}

EstimationParams estimation_params(const EstimationSpec& spec) {
  EstimationParams p;
  p.smoothing_radius = spec.r;
  p.rollouts = spec.n_s;
  p.cost_rollouts = spec.n_c;
  p.horizon = spec.tau;
  p.divergence_guard = spec.guard;
  return p;
}

CostMatrices cost_matrices(const CostSpec& spec, Index n_x, Index n_u) {
  return CostMatrices::scaled_identity(n_x, n_u, spec.q_scale, spec.r_scale);
}

}  // namespace lts
