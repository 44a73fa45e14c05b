#include "viscofem/time_stepper.hpp"

#include <algorithm>
#include <cmath>

namespace vfem {

namespace {

double wrms_error(const DaeSystem& sys, const VecX& e, const VecX& u_new, const VecX& u_old,
                  double rel_tol, double abs_tol) {
  const auto& diff = sys.differential_mask();
  double acc = 0.0;
  long n = 0;
  for (int i = 0; i < e.size(); ++i) {
    if (!diff[i]) continue;
    double scale = abs_tol + rel_tol * std::max(std::abs(u_new[i]), std::abs(u_old[i]));
    double q = e[i] / scale;
    acc += q * q;
    ++n;
  }
  return n ? std::sqrt(acc / n) : 0.0;
}

}  // namespace

NewtonReport steady_solve(DaeSystem& sys, VecX& u, double t, const NewtonConfig& cfg) {
  sys.impose_constraints(t, u);
  LinearSolver lin;
  SpMat jac;
  VecX base = VecX::Zero(u.size());
  return newton_solve(sys, u, t, 0.0, base, cfg, lin, jac, false, true);
}

NewtonReport consistent_init(DaeSystem& sys, VecX& u, double t, const NewtonConfig& cfg) {
  sys.impose_constraints(t, u);
  const auto& diff = sys.differential_mask();
  const auto& fixed = sys.fixed_mask();
  bool any_algebraic = false;
  for (int i = 0; i < sys.size(); ++i) {
    if (!diff[i] && !fixed[i]) {
      any_algebraic = true;
      break;
    }
  }
  if (!any_algebraic) {
    NewtonReport rep;
    rep.converged = true;
    return rep;
  }
  std::vector<char> frozen(diff.begin(), diff.end());
  sys.set_extra_frozen(&frozen);
  LinearSolver lin;
  SpMat jac;
  VecX base = VecX::Zero(u.size());
  NewtonReport rep;
  try {
    rep = newton_solve(sys, u, t, 0.0, base, cfg, lin, jac, false, true);
  } catch (...) {
    sys.set_extra_frozen(nullptr);
    throw;
  }
  sys.set_extra_frozen(nullptr);
  return rep;
}

void transient_solve(DaeSystem& sys, VecX& u, double t0, double t1, const TransientOptions& opt) {
  const TimeStepperConfig& cfg = opt.stepper;
  const double horizon = t1 - t0;
  if (!(horizon > 0.0)) throw SolveError("transient_solve: empty time interval");
  const double dt_min = cfg.dt_min_rel * horizon;

  sys.impose_constraints(t0, u);
  consistent_init(sys, u, t0, cfg.newton);

  LinearSolver lin;
  SpMat jac;
  const int n = sys.size();
  const auto& diff = sys.differential_mask();

  // history: u_n at t, then older levels
  VecX u_n = u, u_nm1, u_nm2;
  double dt_nm1 = 0.0, dt_nm2 = 0.0;
  int have_hist = 0;

  double t = t0;
  double dt = std::min(cfg.dt_init, horizon);
  double shift_fact = 0.0;
  long step = 0;

  VecX base(n), u_pred(n), err(n);

  while (t < t1 - 1e-12 * horizon) {
    if (++step > cfg.max_steps) throw SolveError("transient_solve: step limit exceeded");

    // apply caps and land on window edges / horizon
    double dt_eff = dt;
    if (cfg.dt_max > 0.0) dt_eff = std::min(dt_eff, cfg.dt_max);
    for (const auto& w : opt.rate_windows) {
      if (t >= w.first - 1e-12 && t < w.second - 1e-12) {
        dt_eff = std::min(dt_eff, (w.second - w.first) / 20.0);
      }
      for (double edge : {w.first, w.second}) {
        if (t < edge - 1e-12 && t + dt_eff > edge) dt_eff = edge - t;
      }
    }
    if (t + dt_eff > t1) dt_eff = t1 - t;
    if (dt_eff < dt_min) {
      throw SolveError("step size underflow at t=" + std::to_string(t) +
                       " (dt=" + std::to_string(dt_eff) + ")");
    }

    const int order = (have_hist >= 1 && cfg.max_order >= 2) ? 2 : 1;
    double shift;
    if (order == 1) {
      shift = 1.0 / dt_eff;
      for (int i = 0; i < n; ++i) base[i] = diff[i] ? -u_n[i] / dt_eff : 0.0;
    } else {
      double rho = dt_eff / dt_nm1;
      double c0 = (1.0 + 2.0 * rho) / (1.0 + rho);
      double c1 = -(1.0 + rho);
      double c2 = rho * rho / (1.0 + rho);
      shift = c0 / dt_eff;
      for (int i = 0; i < n; ++i) {
        base[i] = diff[i] ? (c1 * u_n[i] + c2 * u_nm1[i]) / dt_eff : 0.0;
      }
    }

    // polynomial predictor through the history
    if (have_hist == 0) {
      u_pred = u_n;
    } else if (have_hist == 1 || order == 1) {
      u_pred = u_n + (dt_eff / dt_nm1) * (u_n - u_nm1);
    } else {
      // quadratic extrapolation on (t-dt_nm1-dt_nm2, t-dt_nm1, t) to t+dt
      double h1 = dt_nm1, h2 = dt_nm2, x = dt_eff;
      double l0 = (x + h1) * (x + h1 + h2) / (h1 * (h1 + h2));
      double l1 = -x * (x + h1 + h2) / (h1 * h2);
      double l2 = x * (x + h1) / ((h1 + h2) * h2);
      u_pred = l0 * u_n + l1 * u_nm1 + l2 * u_nm2;
    }

    VecX u_new = u_pred;
    double t_new = t + dt_eff;
    sys.impose_constraints(t_new, u_new);

    // EveryStep refreshes the factorization once per step attempt; Lazy keeps
    // it across steps while the BDF shift stays close
    // a factorization stays usable across a factor-two band of BDF shifts;
    // the modified-Newton loop refreshes itself if contraction degrades
    bool keep = cfg.refresh == TimeStepperConfig::Refresh::Lazy && lin.ready() &&
                shift_fact > 0.0 && shift > 0.45 * shift_fact && shift < 2.2 * shift_fact;
    if (!keep) lin.reset();
    int fact_before = lin.ready() ? 0 : 1;

    NewtonReport rep =
        newton_solve(sys, u_new, t_new, shift, base, cfg.newton, lin, jac, true, false);
    if (rep.factorizations > 0) shift_fact = shift;

    if (!rep.converged) {
      dt = dt_eff * 0.25;
      lin.reset();
      if (dt < dt_min) {
        throw SolveError("step size underflow at t=" + std::to_string(t) + " after " +
                         rep.failure);
      }
      continue;
    }

    // local error estimate from the predictor-corrector difference
    err = u_new - u_pred;
    double scale = (have_hist >= 2 && order == 2) ? 0.5 : 1.0;
    double wrms = scale * wrms_error(sys, err, u_new, u_n, cfg.rel_tol, cfg.abs_tol);
    if (have_hist == 0) wrms = 0.0;  // no usable predictor on the very first step

    if (wrms > 1.0) {
      double fac = std::clamp(0.9 * std::pow(wrms, -1.0 / (order + 1)), 0.1, 0.9);
      dt = dt_eff * fac;
      if (dt < dt_min) {
        throw SolveError("step size underflow at t=" + std::to_string(t) +
                         " (error control rejection)");
      }
      continue;
    }

    // accept
    u_nm2 = u_nm1;
    dt_nm2 = dt_nm1;
    u_nm1 = u_n;
    dt_nm1 = dt_eff;
    u_n = u_new;
    have_hist = std::min(have_hist + 1, 2);
    t = t_new;

    StepRecord rec;
    rec.step = step;
    rec.t = t;
    rec.we = opt.we_of_t ? opt.we_of_t(t) : 0.0;
    rec.dt = dt_eff;
    rec.order = order;
    rec.res_norm = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
    rec.newton_iters = rep.iterations;
    rec.jac_refreshed = rep.factorizations > 0 || fact_before > 0;
    if (opt.on_accept) opt.on_accept(rec, u_n);
    if (opt.stop_when && opt.stop_when(rec, u_n)) {
      u = u_n;
      return;
    }

    double grow = wrms > 0.0 ? std::clamp(0.9 * std::pow(wrms, -1.0 / (order + 1)), 0.3, 2.0) : 2.0;
    dt = dt_eff * grow;

    // per-step refresh: drop the factorization so the next step rebuilds it
    if (cfg.refresh == TimeStepperConfig::Refresh::EveryStep) lin.reset();
  }
  u = u_n;
}

ContinuationReport continuation_procedure(FemSystem& sys, double we, VecX& u,
                                          const TimeStepperConfig& cfg) {
  ContinuationReport out;
  RampSpec saved = sys.ramp();
  sys.set_ramp(RampSpec::constant(we));
  try {
    sys.impose_constraints(0.0, u);
    out.newtonian = consistent_init(sys, u, 0.0, cfg.newton);

    TransientOptions opt;
    opt.stepper = cfg;
    opt.on_accept = [&](const StepRecord&, const VecX&) { ++out.transient_steps; };
    transient_solve(sys, u, 0.0, 10.0 * we, opt);

    out.steady = steady_solve(sys, u, 10.0 * we, cfg.newton);
  } catch (...) {
    sys.set_ramp(saved);
    throw;
  }
  sys.set_ramp(saved);
  return out;
}

}  // namespace vfem
