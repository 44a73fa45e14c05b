#include "viscofem/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace vfem {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (...) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (...) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
}

Model parse_model(const std::string& key, const std::string& v) {
  if (v == "oldroyd_b") return Model::OldroydB;
  if (v == "giesekus") return Model::Giesekus;
  if (v == "ptt_exp") return Model::PTTExp;
  if (v == "fene_p") return Model::FENEP;
  if (v == "fene_cr") return Model::FENECR;
  throw ConfigError(key, "unknown model '" + v + "'");
}

std::string model_name(Model m) {
  switch (m) {
    case Model::OldroydB: return "oldroyd_b";
    case Model::Giesekus: return "giesekus";
    case Model::PTTExp: return "ptt_exp";
    case Model::FENEP: return "fene_p";
    case Model::FENECR: return "fene_cr";
  }
  return "oldroyd_b";
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    auto h = raw.find('#');
    if (h != std::string::npos) raw.erase(h);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "bad section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "expected key = value at line " + std::to_string(lineno));
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    std::string fq = section.empty() ? key : section + "." + key;

    auto is = [&](const char* s, const char* k) { return section == s && key == k; };

    if (is("geometry", "kind")) cfg.geometry.kind = val;
    else if (is("geometry", "h_target")) cfg.geometry.h_target = to_double(fq, val);
    else if (is("geometry", "L_up")) cfg.geometry.l_up = to_double(fq, val);
    else if (is("geometry", "L_down")) cfg.geometry.l_down = to_double(fq, val);
    else if (is("geometry", "L_arm")) cfg.geometry.l_arm = to_double(fq, val);
    else if (is("geometry", "theta")) cfg.geometry.theta = to_double(fq, val);
    else if (is("geometry", "L_in")) cfg.geometry.l_in = to_double(fq, val);
    else if (is("geometry", "L_out")) cfg.geometry.l_out = to_double(fq, val);
    else if (is("geometry", "length")) cfg.geometry.length = to_double(fq, val);
    else if (is("geometry", "half_height")) cfg.geometry.half_height = to_double(fq, val);
    else if (is("fluid", "model")) cfg.fluid.model.kind = parse_model(fq, val);
    else if (is("fluid", "beta")) cfg.fluid.beta = to_double(fq, val);
    else if (is("fluid", "Re")) cfg.fluid.re = to_double(fq, val);
    else if (is("fluid", "a_max_sq")) cfg.fluid.model.a_max_sq = to_double(fq, val);
    else if (is("fluid", "alpha_gie")) cfg.fluid.model.alpha_gie = to_double(fq, val);
    else if (is("fluid", "eps_ptt")) cfg.fluid.model.eps_ptt = to_double(fq, val);
    else if (is("fluid", "relaxation_mode")) {
      if (val == "consistent") cfg.fluid.model.mode = RelaxationMode::Consistent;
      else if (val == "as_written") cfg.fluid.model.mode = RelaxationMode::AsWritten;
      else throw ConfigError(fq, "expected consistent or as_written");
    }
    else if (is("fluid", "supg_coeff")) cfg.fluid.supg_coeff = to_double(fq, val);
    else if (is("fluid", "brinkman_alpha")) cfg.fluid.brinkman_alpha = to_double(fq, val);
    else if (is("fluid", "quad_degree")) cfg.fluid.quad_degree = static_cast<int>(to_long(fq, val));
    else if (is("fluid", "elastic_div")) {
      if (val == "nodal_stress") cfg.fluid.elastic_div = ElasticDivScheme::NodalStress;
      else if (val == "chain_rule") cfg.fluid.elastic_div = ElasticDivScheme::ChainRule;
      else throw ConfigError(fq, "expected nodal_stress or chain_rule");
    }
    else if (is("ramp", "We_start")) cfg.ramp.we_start = to_double(fq, val);
    else if (is("ramp", "We_end")) cfg.ramp.we_end = to_double(fq, val);
    else if (is("ramp", "t_start")) cfg.ramp.t_start = to_double(fq, val);
    else if (is("ramp", "T_step")) cfg.ramp.t_step = (val == "auto") ? -1.0 : to_double(fq, val);
    else if (is("stepper", "rel_tol")) cfg.stepper.rel_tol = to_double(fq, val);
    else if (is("stepper", "abs_tol")) cfg.stepper.abs_tol = to_double(fq, val);
    else if (is("stepper", "dt_init")) cfg.stepper.dt_init = to_double(fq, val);
    else if (is("stepper", "dt_max")) cfg.stepper.dt_max = to_double(fq, val);
    else if (is("stepper", "max_order")) cfg.stepper.max_order = static_cast<int>(to_long(fq, val));
    else if (is("stepper", "jacobian_refresh")) {
      if (val == "every_step") cfg.stepper.refresh = TimeStepperConfig::Refresh::EveryStep;
      else if (val == "lazy") cfg.stepper.refresh = TimeStepperConfig::Refresh::Lazy;
      else throw ConfigError(fq, "expected every_step or lazy");
    }
    else if (is("newton", "damping")) {
      if (val == "automatic") {
        cfg.stepper.newton.damping = NewtonConfig::Damping::Automatic;
      } else if (val.rfind("constant:", 0) == 0) {
        cfg.stepper.newton.damping = NewtonConfig::Damping::Constant;
        cfg.stepper.newton.factor = to_double(fq, val.substr(9));
      } else {
        throw ConfigError(fq, "expected automatic or constant:<factor>");
      }
    }
    else if (is("newton", "max_iter")) cfg.stepper.newton.max_iter = static_cast<int>(to_long(fq, val));
    else if (is("newton", "rtol")) cfg.stepper.newton.rtol = to_double(fq, val);
    else if (is("newton", "atol")) cfg.stepper.newton.atol = to_double(fq, val);
    else if (is("force", "kind")) cfg.force.kind = val;
    else if (is("force", "amplitude")) cfg.force.amplitude = to_double(fq, val);
    else if (is("force", "t_start")) cfg.force.t_start = to_double(fq, val);
    else if (is("force", "t_end")) cfg.force.t_end = to_double(fq, val);
    else if (is("run", "mode")) cfg.run.mode = val;
    else if (is("run", "t_end")) cfg.run.t_end = (val == "auto") ? -1.0 : to_double(fq, val);
    else if (is("run", "out_dir")) cfg.run.out_dir = val;
    else if (is("run", "seed")) cfg.run.seed = to_long(fq, val);
    else if (is("run", "threads")) cfg.run.threads = static_cast<int>(to_long(fq, val));
    else if (is("run", "observers")) {
      cfg.run.observers.clear();
      std::istringstream os(val);
      std::string item;
      while (std::getline(os, item, ',')) {
        item = trim(item);
        if (!item.empty()) cfg.run.observers.push_back(item);
      }
    }
    else throw ConfigError(fq, "unknown key");
  }

  // validation
  auto& g = cfg.geometry;
  if (g.kind != "cylinder" && g.kind != "crossslot" && g.kind != "trislot" &&
      g.kind != "channel" && g.kind.rfind("file:", 0) != 0) {
    throw ConfigError("geometry.kind", "unknown geometry '" + g.kind + "'");
  }
  if (!(g.h_target > 0.0)) throw ConfigError("geometry.h_target", "must be positive");
  if (cfg.fluid.beta < 0.0 || cfg.fluid.beta > 1.0) {
    throw ConfigError("fluid.beta", "beta out of range [0,1]");
  }
  if (cfg.fluid.re < 0.0) throw ConfigError("fluid.Re", "must be nonnegative");
  if (cfg.fluid.model.alpha_gie < 0.0 || cfg.fluid.model.alpha_gie > 1.0) {
    throw ConfigError("fluid.alpha_gie", "out of range [0,1]");
  }
  if (cfg.fluid.model.eps_ptt < 0.0) throw ConfigError("fluid.eps_ptt", "must be nonnegative");
  if (!(cfg.fluid.model.a_max_sq > 2.0)) throw ConfigError("fluid.a_max_sq", "must exceed 2");
  if (!(cfg.fluid.supg_coeff > 0.0)) throw ConfigError("fluid.supg_coeff", "must be positive");
  if (!(cfg.ramp.we_start > 0.0) || !(cfg.ramp.we_end > 0.0)) {
    throw ConfigError("ramp.We_start", "Weissenberg numbers must be positive");
  }
  if (cfg.ramp.t_start < 0.0) throw ConfigError("ramp.t_start", "must be nonnegative");
  if (cfg.run.mode != "transient" && cfg.run.mode != "steady") {
    throw ConfigError("run.mode", "expected transient or steady");
  }
  if (cfg.force.kind != "none" && cfg.force.kind != "rotating" && cfg.force.kind != "upward") {
    throw ConfigError("force.kind", "expected none, rotating or upward");
  }
  if (cfg.run.threads < 1) throw ConfigError("run.threads", "must be at least 1");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

std::string format_run_config(const RunConfig& cfg) {
  char buf[256];
  std::string out;
  auto kv = [&](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  auto kvf = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", k, v);
    out += buf;
  };
  auto kvi = [&](const char* k, long v) {
    std::snprintf(buf, sizeof buf, "%s = %ld\n", k, v);
    out += buf;
  };

  out += "[geometry]\n";
  kv("kind", cfg.geometry.kind);
  kvf("h_target", cfg.geometry.h_target);
  kvf("L_up", cfg.geometry.l_up);
  kvf("L_down", cfg.geometry.l_down);
  kvf("L_arm", cfg.geometry.l_arm);
  kvf("theta", cfg.geometry.theta);
  kvf("L_in", cfg.geometry.l_in);
  kvf("L_out", cfg.geometry.l_out);
  kvf("length", cfg.geometry.length);
  kvf("half_height", cfg.geometry.half_height);

  out += "\n[fluid]\n";
  kv("model", model_name(cfg.fluid.model.kind));
  kvf("beta", cfg.fluid.beta);
  kvf("Re", cfg.fluid.re);
  kvf("a_max_sq", cfg.fluid.model.a_max_sq);
  kvf("alpha_gie", cfg.fluid.model.alpha_gie);
  kvf("eps_ptt", cfg.fluid.model.eps_ptt);
  kv("relaxation_mode",
     cfg.fluid.model.mode == RelaxationMode::Consistent ? "consistent" : "as_written");
  kvf("supg_coeff", cfg.fluid.supg_coeff);
  kvf("brinkman_alpha", cfg.fluid.brinkman_alpha);
  kvi("quad_degree", cfg.fluid.quad_degree);
  kv("elastic_div",
     cfg.fluid.elastic_div == ElasticDivScheme::NodalStress ? "nodal_stress" : "chain_rule");

  out += "\n[ramp]\n";
  kvf("We_start", cfg.ramp.we_start);
  kvf("We_end", cfg.ramp.we_end);
  kvf("t_start", cfg.ramp.t_start);
  kvf("T_step", cfg.resolved_t_step());

  out += "\n[stepper]\n";
  kvf("rel_tol", cfg.stepper.rel_tol);
  kvf("abs_tol", cfg.stepper.abs_tol);
  kvf("dt_init", cfg.stepper.dt_init);
  kvf("dt_max", cfg.stepper.dt_max);
  kvi("max_order", cfg.stepper.max_order);
  kv("jacobian_refresh",
     cfg.stepper.refresh == TimeStepperConfig::Refresh::EveryStep ? "every_step" : "lazy");

  out += "\n[newton]\n";
  if (cfg.stepper.newton.damping == NewtonConfig::Damping::Automatic) {
    kv("damping", "automatic");
  } else {
    std::snprintf(buf, sizeof buf, "damping = constant:%.17g\n", cfg.stepper.newton.factor);
    out += buf;
  }
  kvi("max_iter", cfg.stepper.newton.max_iter);
  kvf("rtol", cfg.stepper.newton.rtol);
  kvf("atol", cfg.stepper.newton.atol);

  out += "\n[force]\n";
  kv("kind", cfg.force.kind);
  kvf("amplitude", cfg.force.amplitude);
  kvf("t_start", cfg.force.t_start);
  kvf("t_end", cfg.force.t_end);

  out += "\n[run]\n";
  kv("mode", cfg.run.mode);
  if (cfg.run.t_end < 0.0) kv("t_end", "auto");
  else kvf("t_end", cfg.run.t_end);
  kv("out_dir", cfg.run.out_dir);
  std::string obs;
  for (size_t i = 0; i < cfg.run.observers.size(); ++i) {
    obs += (i ? "," : "") + cfg.run.observers[i];
  }
  kv("observers", obs);
  kvi("seed", cfg.run.seed);
  kvi("threads", cfg.run.threads);
  return out;
}

}  // namespace vfem
