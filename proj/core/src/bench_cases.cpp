#include "viscofem/bench_cases.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "viscofem/meshgen.hpp"
#include "viscofem/post.hpp"

namespace vfem {

double RampSeries::at_we(const std::string& name, double target) const {
  auto it = series.find(name);
  if (it == series.end()) throw std::invalid_argument("no series '" + name + "'");
  const std::vector<double>& y = it->second;
  if (we.empty()) throw std::invalid_argument("empty series");
  if (target <= we.front()) return y.front();
  if (target >= we.back()) return y.back();
  auto up = std::upper_bound(we.begin(), we.end(), target);
  size_t i = up - we.begin();
  double w0 = we[i - 1], w1 = we[i];
  double f = w1 > w0 ? (target - w0) / (w1 - w0) : 0.0;
  return y[i - 1] * (1.0 - f) + y[i] * f;
}

RampSeries cylinder_ramp_series(double h, double we_end, double t_step_scale, int threads,
                                const std::vector<std::string>& observers,
                                TimeStepperConfig stepper) {
  RunConfig cfg;
  cfg.geometry.kind = "cylinder";
  cfg.geometry.h_target = h;
  cfg.fluid.beta = 0.59;
  cfg.fluid.re = 0.0;
  cfg.fluid.model.kind = Model::OldroydB;
  cfg.ramp.we_start = 0.01;
  cfg.ramp.we_end = we_end;
  cfg.ramp.t_step = t_step_scale * 8000.0 * (0.07 / h);
  cfg.stepper = stepper;
  cfg.run.threads = threads;
  cfg.run.observers = observers;
  cfg.run.mode = "transient";
  cfg.run.t_end = cfg.ramp_spec().t_end;  // sample exactly over the ramp

  RunArtifacts art = execute_run(cfg, "", false);
  RampSeries rs;
  for (const auto& row : art.rows) {
    rs.t.push_back(row[0]);
    rs.we.push_back(row[1]);
    for (size_t c = 2; c < art.columns.size(); ++c) {
      rs.series[art.columns[c]].push_back(row[c]);
    }
  }
  return rs;
}

TimeStepperConfig probe_stepper() {
  TimeStepperConfig cfg;
  cfg.refresh = TimeStepperConfig::Refresh::Lazy;
  cfg.rel_tol = 1e-4;
  cfg.abs_tol = 1e-6;
  cfg.dt_init = 0.02;
  return cfg;
}

namespace {

constexpr double kPulseAmp = 0.02;

// transient at fixed We with an optional rotational kick, then free flight
void kick_and_settle(FemSystem& sys, VecX& u, double pulse_amp, double pulse_sign,
                     double t_pulse, double t_end,
                     const std::function<void(double, const VecX&)>& watch = {},
                     const std::function<bool(double, const VecX&)>& stop = {}) {
  if (pulse_amp != 0.0) {
    BodyForce f;
    f.kind = BodyForce::Kind::Rotating;
    f.amplitude = pulse_amp * pulse_sign;
    f.envelope = RampSpec{1.0, 1.0, 0.2 * t_pulse, t_pulse};
    sys.set_body_force([f](Vec2 x, double t) { return f(x, t); });
  }
  TransientOptions opt;
  opt.stepper = probe_stepper();
  if (pulse_amp != 0.0) opt.rate_windows.push_back({0.0, t_pulse});
  if (watch) {
    opt.on_accept = [&](const StepRecord& rec, const VecX& state) { watch(rec.t, state); };
  }
  if (stop) {
    opt.stop_when = [&](const StepRecord& rec, const VecX& state) { return stop(rec.t, state); };
  }
  transient_solve(sys, u, 0.0, t_end, opt);
  sys.set_body_force({});
}

// steady Newton walk in We from a converged nearby state, sharing one
// factorization across solves
void walk_we(FemSystem& sys, LinearSolver& lin, SpMat& jac, VecX& u, double we_from,
             double we_to, const NewtonConfig& cfg) {
  double step = we_to > we_from ? 0.05 : -0.05;
  double we = we_from;
  while (std::abs(we - we_to) > 1e-12) {
    we = (step > 0) ? std::min(we + step, we_to) : std::max(we + step, we_to);
    sys.set_ramp(RampSpec::constant(we));
    sys.impose_constraints(0.0, u);
    VecX base = VecX::Zero(u.size());
    newton_solve(sys, u, 0.0, 0.0, base, cfg, lin, jac, true, true);
  }
}

// cheap algebraic base state at a mild We
VecX cold_base(FemSystem& sys, LinearSolver& lin, SpMat& jac, double we0,
               const NewtonConfig& cfg) {
  VecX u = sys.zero_state();
  sys.set_ramp(RampSpec::constant(we0));
  consistent_init(sys, u, 0.0, cfg);
  sys.impose_constraints(0.0, u);
  VecX base = VecX::Zero(u.size());
  newton_solve(sys, u, 0.0, 0.0, base, cfg, lin, jac, true, true);
  return u;
}

}  // namespace

// ---------------------------------------------------------------------------
// cross-slot

CrossSlotStudy::CrossSlotStudy(double h, int threads) : threads_(threads) {
  mesh_ = gen_cross_slot(h, 10.0);
  SolverParams params;
  params.beta = 0.2;
  params.re = 0.0;
  params.model.kind = Model::FENECR;
  params.model.a_max_sq = 100.0;
  params.threads = threads;
  sys_ = std::make_unique<FemSystem>(mesh_, params, cross_slot_bc(10.0), RampSpec::constant(0.3));
}

CrossSlotStudy::~CrossSlotStudy() = default;

double CrossSlotStudy::asym(const VecX& u) const {
  return vorticity_integral(*sys_, u, Region::CenterSquare);
}

double CrossSlotStudy::dissipation_of(const VecX& u) const {
  return dissipation(*sys_, u, sys_->ramp().we_end);
}

void CrossSlotStudy::newton_here(VecX& u) {
  sys_->impose_constraints(0.0, u);
  VecX base = VecX::Zero(u.size());
  newton_solve(*sys_, u, 0.0, 0.0, base, probe_stepper().newton, lin_, jac_, true, true);
}

const VecX& CrossSlotStudy::symmetric_state(double we) {
  long key = std::lround(we * 1e6);
  auto it = symmetric_cache_.find(key);
  if (it != symmetric_cache_.end()) return it->second;

  // warm start from the nearest cached state, else a mild algebraic base
  VecX u;
  double from = 0.0;
  long best_gap = std::numeric_limits<long>::max();
  for (const auto& [k, state] : symmetric_cache_) {
    long gap = std::abs(k - key);
    if (gap < best_gap) {
      best_gap = gap;
      u = state;
      from = k * 1e-6;
    }
  }
  if (best_gap == std::numeric_limits<long>::max()) {
    from = std::min(0.1, we);
    u = cold_base(*sys_, lin_, jac_, from, probe_stepper().newton);
  }
  walk_we(*sys_, lin_, jac_, u, from, we, probe_stepper().newton);
  return symmetric_cache_.emplace(key, std::move(u)).first->second;
}

CrossSlotStudy::Branch CrossSlotStudy::flip_branch(double we, double pulse_sign) {
  Branch out;
  VecX u = symmetric_state(we);
  sys_->set_ramp(RampSpec::constant(we));

  // the probe stops once the pulse response has clearly died, or once the
  // grown asymmetry has plateaued on the saturated branch
  std::vector<std::pair<double, double>> trace;  // (t, |asym|)
  auto watch = [&](double t, const VecX& state) {
    if (t > 10.0) trace.push_back({t, std::abs(asym(state))});
  };
  auto stop = [&](double t, const VecX&) {
    if (t <= 25.0 || trace.size() < 4) return false;
    double a = trace.back().second;
    if (a < 2e-4) return true;  // decayed well below the pulse level
    if (a > 0.03) {
      double prev = trace[trace.size() - 4].second;
      if (std::abs(a - prev) < 0.005 * a) return true;  // plateau
    }
    return false;
  };
  kick_and_settle(*sys_, u, kPulseAmp, pulse_sign, 10.0, 400.0, watch, stop);
  lin_.reset();
  newton_here(u);

  out.u = u;
  out.asym = asym(u);
  out.dissipation = dissipation_of(u);
  out.flipped = out.asym * out.asym > 1e-3;
  if (!out.flipped && out.asym * out.asym > 1e-6 && trace.size() > 4) {
    // neither saturated nor dead: classify by the tail trend
    double mid = trace[trace.size() / 2].second;
    double end = trace.back().second;
    out.flipped = end > mid;
  }
  return out;
}

bool CrossSlotStudy::probe_above_onset(double we) { return flip_branch(we, 1.0).flipped; }

std::pair<double, double> CrossSlotStudy::onset_interval(double lo, double hi, double width) {
  if (probe_above_onset(lo)) return {lo, lo};    // bracket failed low
  if (!probe_above_onset(hi)) return {hi, hi};   // bracket failed high
  while (hi - lo > width) {
    double mid = 0.5 * (lo + hi);
    if (probe_above_onset(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {lo, hi};
}

std::vector<CrossSlotStudy::SweepRow> CrossSlotStudy::sweep(double we0, double we1, double dwe,
                                                            double onset_hint) {
  std::vector<SweepRow> rows;
  VecX asym_state;
  bool have_asym = false;
  int n = static_cast<int>(std::lround((we1 - we0) / dwe));
  for (int i = 0; i <= n; ++i) {
    double we = we0 + i * dwe;
    sys_->set_ramp(RampSpec::constant(we));
    VecX u;
    if (we <= onset_hint) {
      u = symmetric_state(we);
    } else if (!have_asym) {
      Branch b = flip_branch(we, 1.0);
      u = b.u;
      have_asym = true;
    } else {
      u = asym_state;
      newton_here(u);
    }
    if (have_asym) asym_state = u;
    rows.push_back({we, asym(u), dissipation(*sys_, u, we)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// tri-slot

TrislotStudy::TrislotStudy(double h, double theta, int threads) : threads_(threads) {
  mesh_ = gen_trislot(h, theta, 6.0, 8.0);
  SolverParams params;
  params.beta = 0.1;
  params.re = 0.0;
  params.model.kind = Model::FENECR;
  params.model.a_max_sq = 100.0;
  params.threads = threads;
  sys_ = std::make_unique<FemSystem>(mesh_, params, trislot_bc(theta), RampSpec::constant(0.3));
}

TrislotStudy::~TrislotStudy() = default;

double TrislotStudy::asym(const VecX& u) const {
  return vorticity_integral(*sys_, u, Region::CenterDisk);
}

void TrislotStudy::newton_here(VecX& u) {
  sys_->impose_constraints(0.0, u);
  VecX base = VecX::Zero(u.size());
  newton_solve(*sys_, u, 0.0, 0.0, base, probe_stepper().newton, lin_, jac_, true, true);
}

VecX TrislotStudy::ramped_state(double we0, double we1, double pulse_amp) {
  VecX u = cold_base(*sys_, lin_, jac_, std::min(0.1, we0), probe_stepper().newton);
  walk_we(*sys_, lin_, jac_, u, std::min(0.1, we0), we0, probe_stepper().newton);
  if (we1 <= we0) {
    return u;
  }

  const double t_ramp = 150.0;
  RampSpec ramp{we0, we1, 0.0, t_ramp};
  sys_->set_ramp(ramp);
  if (pulse_amp != 0.0) {
    BodyForce f;
    f.kind = BodyForce::Kind::Rotating;
    f.amplitude = pulse_amp;
    f.envelope = RampSpec{1.0, 1.0, 20.0, 60.0};
    sys_->set_body_force([f](Vec2 x, double t) { return f(x, t); });
  }
  TransientOptions opt;
  opt.stepper = probe_stepper();
  opt.rate_windows.push_back({0.0, t_ramp});
  transient_solve(*sys_, u, 0.0, t_ramp + 80.0, opt);
  sys_->set_body_force({});

  sys_->set_ramp(RampSpec::constant(we1));
  lin_.reset();
  newton_here(u);
  return u;
}

char TrislotStudy::classify(double a, double tol) {
  if (a < -tol) return 'c';
  if (a > tol) return 'w';
  return 's';
}

TrislotStudy::Forced TrislotStudy::forced_state(double we, BodyForce::Kind kind,
                                                double amplitude) {
  Forced out;
  sys_->set_ramp(RampSpec::constant(we));
  VecX u = sys_->zero_state();
  consistent_init(*sys_, u, 0.0, probe_stepper().newton);

  const double t_force = 50.0;
  BodyForce f;
  f.kind = kind;
  f.amplitude = amplitude;
  f.envelope = RampSpec{1.0, 1.0, 20.0, t_force};
  sys_->set_body_force([f](Vec2 x, double t) { return f(x, t); });

  char label_after_force = '?';
  bool labelled = false;
  TransientOptions opt;
  opt.stepper = probe_stepper();
  opt.rate_windows.push_back({0.0, t_force});
  opt.on_accept = [&](const StepRecord& rec, const VecX& state) {
    if (!labelled && rec.t >= t_force + 25.0) {
      label_after_force = classify(asym(state));
      labelled = true;
    }
  };
  transient_solve(*sys_, u, 0.0, t_force + 90.0, opt);
  sys_->set_body_force({});
  lin_.reset();
  newton_here(u);

  out.u = u;
  out.asym = asym(u);
  out.label = classify(out.asym);
  out.persisted = labelled && label_after_force == out.label;
  return out;
}

// ---------------------------------------------------------------------------
// benchmark presets

double cylinder_level_h(int level) {
  const double h[3] = {0.14, 0.10, 0.07};
  return h[std::clamp(level, 0, 2)];
}

double crossslot_level_h(int level) {
  const double h[3] = {0.16, 0.12, 0.09};
  return h[std::clamp(level, 0, 2)];
}

double trislot_level_h(int level) {
  const double h[3] = {0.20, 0.15, 0.11};
  return h[std::clamp(level, 0, 2)];
}

namespace {

constexpr double kPi = std::numbers::pi;

BenchReport bench_cylinder(int level, int threads) {
  BenchReport rep;
  rep.benchmark = "cylinder";
  rep.level = level;
  double h = cylinder_level_h(level);

  RampSeries rs = cylinder_ramp_series(h, 0.6, 1.0, threads,
                                       {"drag", "max_trace_A_wake", "flux_imbalance"});

  // drag decreases monotonically over the elastic range
  bool monotone = true;
  double prev = rs.at_we("drag", 0.2);
  for (double we = 0.25; we <= 0.601; we += 0.05) {
    double d = rs.at_we("drag", we);
    if (d >= prev) monotone = false;
    prev = d;
  }
  rep.add("drag_monotone_decreasing_[0.2,0.6]", monotone, rs.at_we("drag", 0.6),
          "drag(0.6) shown");

  double newt = rs.at_we("drag", 0.05);
  rep.add("newtonian_limit_magnitude", newt > 120.0 && newt < 145.0, newt,
          "130-ish at blocking ratio 2");

  double fb = rs.series.at("flux_imbalance").back();
  rep.add("flux_balance", fb < 1e-8, fb, "<= 1e-8");
  return rep;
}

BenchReport bench_crossslot(int level, int threads) {
  BenchReport rep;
  rep.benchmark = "crossslot";
  rep.level = level;
  CrossSlotStudy study(crossslot_level_h(level), threads);

  CrossSlotStudy::Branch below = study.flip_branch(0.45, 1.0);
  rep.add("symmetric_at_We_0.45", below.asym * below.asym < 1e-6, below.asym * below.asym,
          "squared asymmetry < 1e-6");

  CrossSlotStudy::Branch up = study.flip_branch(0.55, 1.0);
  rep.add("asymmetric_at_We_0.55", up.asym * up.asym > 1e-3, up.asym * up.asym,
          "squared asymmetry > 1e-3");

  CrossSlotStudy::Branch dn = study.flip_branch(0.55, -1.0);
  double mag_ratio = std::abs(up.asym) > 0.0 ? std::abs(dn.asym) / std::abs(up.asym) : 0.0;
  rep.add("mirrored_pulses_opposite_equal", up.asym * dn.asym < 0.0 &&
                                                std::abs(mag_ratio - 1.0) < 0.01,
          mag_ratio, "opposite sign, |ratio-1| < 1%");

  auto [lo, hi] = study.onset_interval(0.45, 0.55, 0.025);
  rep.add("onset_in_[0.45,0.55]", lo > 0.449 && hi < 0.551 && lo < hi, 0.5 * (lo + hi),
          "bisected interval midpoint");

  FluxBalance fb = flux_balance(study.system(), up.u);
  rep.add("flux_balance", fb.relative() < 1e-8, fb.relative(), "<= 1e-8");
  rep.add("dissipation_nonnegative", up.dissipation > 0.0, up.dissipation, "> 0");
  return rep;
}

BenchReport bench_trislot(int level, int threads) {
  BenchReport rep;
  rep.benchmark = "trislot";
  rep.level = level;
  double h = trislot_level_h(level);

  {
    TrislotStudy sym(h, kPi / 3.0, threads);
    VecX low = sym.ramped_state(0.37, 0.37, 0.0);
    rep.add("pi/3_symmetric_at_We_0.37", std::abs(sym.asym(low)) < 1e-6, std::abs(sym.asym(low)),
            "|vorticity integral| < 1e-6");
    VecX mod = sym.ramped_state(0.37, 0.66, 1e-3);
    rep.add("pi/3_rotational_at_We_0.66", std::abs(sym.asym(mod)) > 1e-3, std::abs(sym.asym(mod)),
            "|vorticity integral| > 1e-3");
    FluxBalance fb = flux_balance(sym.system(), mod);
    rep.add("flux_balance", fb.relative() < 1e-8, fb.relative(), "<= 1e-8");
  }

  {
    TrislotStudy tri(h, kPi / 3.75, threads);
    TrislotStudy::Forced cw = tri.forced_state(0.66, BodyForce::Kind::Rotating, 1.0);
    TrislotStudy::Forced ccw = tri.forced_state(0.66, BodyForce::Kind::Rotating, -1.0);
    TrislotStudy::Forced st = tri.forced_state(0.66, BodyForce::Kind::Upward, 1.0);
    std::string labels{cw.label, ccw.label, st.label};
    rep.add("pi/3.75_three_states", labels == "cws",
            double(cw.persisted + ccw.persisted + st.persisted),
            "labels " + labels + " (want cws), persist count shown");
    rep.add("pi/3.75_states_persist", cw.persisted && ccw.persisted && st.persisted, 3.0,
            "classification stable after the force vanished");
  }

  {
    TrislotStudy mid(h, kPi / 3.5, threads);
    VecX low = mid.ramped_state(0.37, 0.37, 0.0);
    VecX high = mid.ramped_state(0.37, 0.66, 1e-3);
    auto p_low = stagnation_points(mid.system(), low);
    auto p_high = stagnation_points(mid.system(), high);
    rep.add("pi/3.5_two_stagnation_points", p_low.size() == 2 && p_high.size() == 2,
            double(p_low.size()), "interior stagnation points at both We");
    if (p_low.size() == 2 && p_high.size() == 2) {
      double f_low = std::abs(interstagnation_flux(mid.system(), low, p_low[0], p_low[1]));
      double f_high = std::abs(interstagnation_flux(mid.system(), high, p_high[0], p_high[1]));
      double ratio = f_high > 0.0 ? f_low / f_high : 0.0;
      rep.add("pi/3.5_interstagnation_flux_ratio", ratio > 2.5 && ratio < 7.0, ratio,
              "flux(0.37)/flux(0.66) in [2.5, 7]");
    }
  }
  return rep;
}

}  // namespace

BenchReport run_benchmark(const std::string& name, int level, bool nightly, int threads) {
  (void)nightly;
  if (name == "cylinder") return bench_cylinder(level, threads);
  if (name == "crossslot") return bench_crossslot(level, threads);
  if (name == "trislot") return bench_trislot(level, threads);
  throw ConfigError("bench", "unknown benchmark '" + name + "' (cylinder|crossslot|trislot)");
}

}  // namespace vfem
