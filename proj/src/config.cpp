#include "swcrt/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace swcrt {

using nlohmann::json;

std::string command_name(Command c) {
  switch (c) {
    case Command::Weights: return "weights";
    case Command::Simulate: return "simulate";
    case Command::Estimate: return "estimate";
    case Command::DesignInfo: return "design-info";
  }
  return "?";
}

Command command_from_name(const std::string& name) {
  if (name == "weights") return Command::Weights;
  if (name == "simulate") return Command::Simulate;
  if (name == "estimate") return Command::Estimate;
  if (name == "design-info") return Command::DesignInfo;
  throw ValidationError("unknown command '" + name + "'");
}

std::vector<AnalysisSpec> AnalysisConfig::expand() const {
  std::vector<AnalysisSpec> specs;
  for (Structure s : structures)
    for (CorrelationKind c : correlations) {
      AnalysisSpec a;
      a.structure = s;
      a.correlation = c;
      a.gamma_policy = gamma_policy;
      a.fixed_gamma = fixed_gamma;
      a.variance_methods = variance_methods;
      specs.push_back(a);
    }
  return specs;
}

namespace {

void require_keys(const json& j, const std::string& block,
                  const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown field '" + it.key() + "' in " + block);
}

Eigen::VectorXd to_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError(field + " must be an array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(field + " must be numeric");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json from_vector(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

CorrelationKind correlation_from_name(const std::string& name) {
  if (name == "exchangeable") return CorrelationKind::Exchangeable;
  if (name == "nested-exchangeable" || name == "nested")
    return CorrelationKind::NestedExchangeable;
  if (name == "independence") return CorrelationKind::Independence;
  throw ValidationError("unknown correlation structure '" + name + "'");
}

std::string correlation_name(CorrelationKind k) {
  switch (k) {
    case CorrelationKind::Exchangeable: return "exchangeable";
    case CorrelationKind::NestedExchangeable: return "nested-exchangeable";
    case CorrelationKind::Independence: return "independence";
  }
  return "?";
}

DesignSpec parse_design(const json& j) {
  require_keys(j, "design", {"clusters", "periods", "cell_size"});
  for (const char* k : {"clusters", "periods", "cell_size"})
    if (!j.contains(k) || !j[k].is_number_integer())
      throw ValidationError(std::string("design block needs integer '") + k + "'");
  return build_design(j["clusters"].get<int>(), j["periods"].get<int>(),
                      j["cell_size"].get<int>());
}

ScenarioSpec parse_scenario(const json& j, const std::optional<DesignSpec>& design,
                            std::optional<std::string>& preset_out) {
  require_keys(j, "scenario",
               {"preset", "theta", "delta", "xi", "period_effects", "correlation",
                "tau_alpha_sq", "tau_omega_sq", "sigma_e_sq", "seed"});
  const int n_effect_sources = j.contains("preset") + j.contains("theta") +
                               j.contains("delta") + j.contains("xi");
  if (n_effect_sources != 1)
    throw ValidationError(
        "scenario must name exactly one source: a preset or one of theta/delta/xi");

  if (j.contains("preset")) {
    for (const char* k : {"theta", "delta", "xi", "period_effects", "tau_alpha_sq",
                          "tau_omega_sq", "sigma_e_sq", "correlation"})
      if (j.contains(k))
        throw ValidationError(std::string("scenario preset cannot be combined with '") +
                              k + "'");
    ScenarioSpec s = preset_scenario(j["preset"].get<std::string>());
    preset_out = j["preset"].get<std::string>();
    if (design) {
      if (design->n_periods != s.design.n_periods)
        throw ValidationError("preset '" + s.name + "' requires J=" +
                              std::to_string(s.design.n_periods) + " periods");
      s.design = *design;
    }
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    return s;
  }

  if (!design)
    throw ValidationError("an explicit scenario needs a design block");
  ScenarioSpec s;
  s.design = *design;
  const int J = s.design.n_periods;
  if (!j.contains("period_effects"))
    throw ValidationError("explicit scenario needs period_effects");
  s.period_effects = to_vector(j["period_effects"], "period_effects");
  if (s.period_effects.size() != J)
    throw ValidationError("period_effects must have exactly J=" + std::to_string(J) +
                          " entries");
  if (j.contains("theta")) {
    s.structure = TreatmentStructure::immediate(j["theta"].get<double>());
  } else if (j.contains("delta")) {
    const Eigen::VectorXd d = to_vector(j["delta"], "delta");
    if (d.size() != J - 1)
      throw ValidationError("delta must have J-1 entries");
    s.structure = TreatmentStructure::exposure_varying(d);
  } else {
    const Eigen::VectorXd x = to_vector(j["xi"], "xi");
    if (x.size() != J - 2)
      throw ValidationError("xi must have J-2 entries (xi_J is fixed to 0)");
    s.structure = TreatmentStructure::calendar_varying(x);
  }
  // section-5 components unless overridden
  s.correlation = {CorrelationKind::Exchangeable, 1.0 / 9.0, 0.0, 1.0};
  if (j.contains("correlation"))
    s.correlation.kind = correlation_from_name(j["correlation"].get<std::string>());
  if (j.contains("tau_alpha_sq")) s.correlation.tau_alpha_sq = j["tau_alpha_sq"].get<double>();
  if (j.contains("tau_omega_sq")) s.correlation.tau_omega_sq = j["tau_omega_sq"].get<double>();
  if (j.contains("sigma_e_sq")) s.correlation.sigma_e_sq = j["sigma_e_sq"].get<double>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  s.name = "custom";
  validate(s);
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text, std::optional<Command> cli_command) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("configuration root must be a JSON object");
  require_keys(j, "configuration",
               {"command", "design", "scenario", "analysis", "mc", "weights", "output"});

  RunConfig cfg;
  if (j.contains("command")) {
    cfg.command = command_from_name(j["command"].get<std::string>());
    if (cli_command && *cli_command != cfg.command)
      throw ValidationError("config names command '" + command_name(cfg.command) +
                            "' but the CLI invoked '" + command_name(*cli_command) + "'");
  } else if (cli_command) {
    cfg.command = *cli_command;
  } else {
    throw ValidationError("no command given (config field or CLI subcommand)");
  }

  if (j.contains("design")) cfg.design = parse_design(j["design"]);
  if (j.contains("scenario"))
    cfg.scenario = parse_scenario(j["scenario"], cfg.design, cfg.scenario_preset);
  if (cfg.scenario && !cfg.design) cfg.design = cfg.scenario->design;

  if (j.contains("analysis")) {
    const json& a = j["analysis"];
    require_keys(a, "analysis",
                 {"structures", "correlations", "variance_methods", "gamma_policy",
                  "fixed_gamma"});
    if (a.contains("structures")) {
      cfg.analysis.structures.clear();
      for (const auto& s : a["structures"])
        cfg.analysis.structures.push_back(structure_from_name(s.get<std::string>()));
      if (cfg.analysis.structures.empty())
        throw ValidationError("analysis.structures is empty");
    }
    if (a.contains("correlations")) {
      cfg.analysis.correlations.clear();
      for (const auto& c : a["correlations"]) {
        const CorrelationKind k = correlation_from_name(c.get<std::string>());
        if (k == CorrelationKind::NestedExchangeable)
          throw ValidationError(
              "nested-exchangeable enters analyses through gamma; use the scenario "
              "correlation block");
        cfg.analysis.correlations.push_back(k);
      }
      if (cfg.analysis.correlations.empty())
        throw ValidationError("analysis.correlations is empty");
    }
    if (a.contains("variance_methods")) {
      cfg.analysis.variance_methods.clear();
      for (const auto& m : a["variance_methods"])
        cfg.analysis.variance_methods.push_back(
            variance_method_from_name(m.get<std::string>()));
      if (cfg.analysis.variance_methods.empty())
        throw ValidationError("analysis.variance_methods is empty");
    }
    if (a.contains("gamma_policy"))
      cfg.analysis.gamma_policy = gamma_policy_from_name(a["gamma_policy"].get<std::string>());
    if (a.contains("fixed_gamma")) {
      cfg.analysis.fixed_gamma = a["fixed_gamma"].get<double>();
      if (!(cfg.analysis.fixed_gamma >= 0.0 && cfg.analysis.fixed_gamma < 1.0))
        throw ValidationError("fixed_gamma must lie in [0,1)");
    }
    if (cfg.analysis.gamma_policy == GammaPolicy::Fixed && !a.contains("fixed_gamma"))
      throw ValidationError("gamma_policy 'fixed' needs fixed_gamma");
  }

  if (j.contains("mc")) {
    const json& m = j["mc"];
    require_keys(m, "mc", {"n_reps", "base_seed"});
    if (m.contains("n_reps")) {
      cfg.n_reps = m["n_reps"].get<int>();
      if (cfg.n_reps < 1) throw ValidationError("mc.n_reps must be >= 1");
    }
    if (m.contains("base_seed")) cfg.base_seed = m["base_seed"].get<std::uint64_t>();
  }

  if (j.contains("weights")) {
    const json& w = j["weights"];
    require_keys(w, "weights", {"families", "q_list", "gamma_list"});
    if (w.contains("families")) {
      cfg.weights.families.clear();
      for (const auto& f : w["families"])
        cfg.weights.families.push_back(family_from_name(f.get<std::string>()));
      if (cfg.weights.families.empty())
        throw ValidationError("weights.families is empty");
    }
    if (w.contains("q_list")) {
      cfg.weights.q_list.clear();
      for (const auto& q : w["q_list"]) {
        const int qi = q.get<int>();
        if (qi < 2) throw ValidationError("weight grids need Q >= 2");
        cfg.weights.q_list.push_back(qi);
      }
      if (cfg.weights.q_list.empty()) throw ValidationError("weights.q_list is empty");
    }
    if (w.contains("gamma_list")) {
      cfg.weights.gamma_list.clear();
      for (const auto& g : w["gamma_list"]) {
        const double gv = g.get<double>();
        if (!(gv >= 0.0 && gv < 1.0))
          throw ValidationError("weight gamma grid values must lie in [0,1)");
        cfg.weights.gamma_list.push_back(gv);
      }
      if (cfg.weights.gamma_list.empty())
        throw ValidationError("weights.gamma_list is empty");
    }
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    require_keys(o, "output", {"directory", "formats"});
    if (o.contains("directory")) cfg.output.directory = o["directory"].get<std::string>();
    if (o.contains("formats")) {
      cfg.output.csv = cfg.output.svg = false;
      for (const auto& f : o["formats"]) {
        const std::string fmt = f.get<std::string>();
        if (fmt == "csv") cfg.output.csv = true;
        else if (fmt == "svg") cfg.output.svg = true;
        else throw ValidationError("unknown output format '" + fmt + "'");
      }
      if (!cfg.output.csv && !cfg.output.svg)
        throw ValidationError("output.formats is empty");
    }
  }

  // per-command requirements
  switch (cfg.command) {
    case Command::Simulate:
      if (!cfg.scenario) throw ValidationError("simulate needs a scenario block");
      break;
    case Command::Estimate:
    case Command::DesignInfo:
      if (!cfg.design) throw ValidationError(command_name(cfg.command) +
                                             " needs a design block");
      break;
    case Command::Weights:
      break;
  }
  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<Command> cli_command) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), cli_command);
}

std::string serialize(const RunConfig& cfg) {
  json j;
  j["command"] = command_name(cfg.command);
  if (cfg.design)
    j["design"] = {{"clusters", cfg.design->n_clusters},
                   {"periods", cfg.design->n_periods},
                   {"cell_size", cfg.design->cell_size}};
  if (cfg.scenario) {
    json s;
    if (cfg.scenario_preset) {
      s["preset"] = *cfg.scenario_preset;
    } else {
      switch (cfg.scenario->structure.kind()) {
        case Structure::Immediate:
          s["theta"] = cfg.scenario->structure.theta();
          break;
        case Structure::ExposureVarying:
          s["delta"] = from_vector(cfg.scenario->structure.delta());
          break;
        case Structure::CalendarVarying:
          s["xi"] = from_vector(cfg.scenario->structure.xi());
          break;
      }
      s["period_effects"] = from_vector(cfg.scenario->period_effects);
      s["correlation"] = correlation_name(cfg.scenario->correlation.kind);
      s["tau_alpha_sq"] = cfg.scenario->correlation.tau_alpha_sq;
      s["tau_omega_sq"] = cfg.scenario->correlation.tau_omega_sq;
      s["sigma_e_sq"] = cfg.scenario->correlation.sigma_e_sq;
    }
    s["seed"] = cfg.scenario->seed;
    j["scenario"] = s;
  }
  json a;
  a["structures"] = json::array();
  for (Structure s : cfg.analysis.structures)
    a["structures"].push_back(structure_name(s));
  a["correlations"] = json::array();
  for (CorrelationKind c : cfg.analysis.correlations)
    a["correlations"].push_back(correlation_name(c));
  a["variance_methods"] = json::array();
  for (VarianceMethod m : cfg.analysis.variance_methods)
    a["variance_methods"].push_back(variance_method_name(m));
  a["gamma_policy"] = gamma_policy_name(cfg.analysis.gamma_policy);
  if (cfg.analysis.gamma_policy == GammaPolicy::Fixed)
    a["fixed_gamma"] = cfg.analysis.fixed_gamma;
  j["analysis"] = a;
  j["mc"] = {{"n_reps", cfg.n_reps}, {"base_seed", cfg.base_seed}};
  json w;
  w["families"] = json::array();
  for (WeightFamily f : cfg.weights.families)
    w["families"].push_back(family_name(f));
  w["q_list"] = cfg.weights.q_list;
  w["gamma_list"] = cfg.weights.gamma_list;
  j["weights"] = w;
  json o;
  o["directory"] = cfg.output.directory;
  o["formats"] = json::array();
  if (cfg.output.csv) o["formats"].push_back("csv");
  if (cfg.output.svg) o["formats"].push_back("svg");
  j["output"] = o;
  return j.dump(2) + "\n";
}

namespace {

bool scenario_equal(const std::optional<ScenarioSpec>& a,
                    const std::optional<ScenarioSpec>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  if (a->structure.kind() != b->structure.kind()) return false;
  switch (a->structure.kind()) {
    case Structure::Immediate:
      if (a->structure.theta() != b->structure.theta()) return false;
      break;
    case Structure::ExposureVarying:
      if (a->structure.delta() != b->structure.delta()) return false;
      break;
    case Structure::CalendarVarying:
      if (a->structure.xi() != b->structure.xi()) return false;
      break;
  }
  return a->name == b->name && a->period_effects == b->period_effects &&
         a->correlation.kind == b->correlation.kind &&
         a->correlation.tau_alpha_sq == b->correlation.tau_alpha_sq &&
         a->correlation.tau_omega_sq == b->correlation.tau_omega_sq &&
         a->correlation.sigma_e_sq == b->correlation.sigma_e_sq &&
         a->seed == b->seed && a->design.n_clusters == b->design.n_clusters &&
         a->design.n_periods == b->design.n_periods &&
         a->design.cell_size == b->design.cell_size;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  const bool design_eq =
      a.design.has_value() == b.design.has_value() &&
      (!a.design || (a.design->n_clusters == b.design->n_clusters &&
                     a.design->n_periods == b.design->n_periods &&
                     a.design->cell_size == b.design->cell_size));
  return a.command == b.command && design_eq && scenario_equal(a.scenario, b.scenario) &&
         a.scenario_preset == b.scenario_preset &&
         a.analysis.structures == b.analysis.structures &&
         a.analysis.correlations == b.analysis.correlations &&
         a.analysis.variance_methods == b.analysis.variance_methods &&
         a.analysis.gamma_policy == b.analysis.gamma_policy &&
         (a.analysis.gamma_policy != GammaPolicy::Fixed ||
          a.analysis.fixed_gamma == b.analysis.fixed_gamma) &&
         a.n_reps == b.n_reps && a.base_seed == b.base_seed &&
         a.weights.families == b.weights.families &&
         a.weights.q_list == b.weights.q_list &&
         a.weights.gamma_list == b.weights.gamma_list &&
         a.output.directory == b.output.directory && a.output.csv == b.output.csv &&
         a.output.svg == b.output.svg;
}

}  // namespace swcrt
