#include "viscofem/newton.hpp"

#include <cmath>
#include <sstream>

#include "viscofem/assembly.hpp"
#include "viscofem/logconf.hpp"

namespace vfem {

std::string NewtonReport::trace() const {
  std::ostringstream os;
  os << "newton trace:";
  for (size_t i = 0; i < residual_history.size(); ++i) {
    os << (i ? ", " : " ") << "it" << i << "=" << residual_history[i];
  }
  if (!failure.empty()) os << " [" << failure << "]";
  return os.str();
}

namespace {

// udot = shift * u + base on differential dofs, zero elsewhere
void build_udot(const DaeSystem& sys, const VecX& u, double shift, const VecX& base, VecX& udot) {
  const auto& diff = sys.differential_mask();
  udot.setZero(u.size());
  for (int i = 0; i < u.size(); ++i) {
    if (diff[i]) udot[i] = shift * u[i] + base[i];
  }
}

}  // namespace

NewtonReport newton_solve(const DaeSystem& sys, VecX& u, double t, double shift,
                          const VecX& udot_base, const NewtonConfig& cfg, LinearSolver& lin,
                          SpMat& jac, bool reuse_jacobian, bool throw_on_fail) {
  NewtonReport rep;
  VecX udot(u.size()), r(u.size());

  auto eval_residual = [&](const VecX& state, VecX& out) {
    build_udot(sys, state, shift, udot_base, udot);
    sys.residual(state, udot, t, out);
    return out.norm();
  };

  double rn;
  try {
    rn = eval_residual(u, r);
  } catch (const std::runtime_error& e) {
    rep.failure = std::string("residual evaluation failed: ") + e.what();
    if (throw_on_fail) throw NewtonError(rep.failure, rep);
    return rep;
  }
  rep.residual_history.push_back(rn);
  const double target = std::max(cfg.atol, cfg.rtol * rn);
  bool fresh = false;
  double contraction = 0.0;  // last accepted residual ratio

  auto fail = [&](const std::string& why) -> NewtonReport {
    rep.failure = why;
    if (throw_on_fail) throw NewtonError(why, rep);
    return rep;
  };

  for (int it = 0; it < cfg.max_iter; ++it) {
    if (rn <= target) {
      rep.converged = true;
      return rep;
    }
    // with a reusable factorization, refresh only once the stale-Jacobian
    // contraction rate degrades
    if (!reuse_jacobian || !lin.ready() || (!fresh && contraction > 0.5)) {
      build_udot(sys, u, shift, udot_base, udot);
      try {
        sys.jacobian(u, udot, t, shift, jac);
        lin.factorize(jac);
      } catch (const std::runtime_error& e) {
        return fail(std::string("jacobian: ") + e.what());
      }
      ++rep.factorizations;
      fresh = true;
    }

    VecX delta;
    try {
      delta = lin.solve(jac, -r);
    } catch (const SolveError& e) {
      return fail(e.what());
    }

    bool advanced = false;
    if (cfg.damping == NewtonConfig::Damping::Constant) {
      VecX trial = u + cfg.factor * delta;
      double rn_trial;
      try {
        rn_trial = eval_residual(trial, r);
      } catch (const AssemblyError& e) {
        return fail(std::string("residual evaluation failed: ") + e.what());
      } catch (const KernelError& e) {
        return fail(std::string("residual evaluation failed: ") + e.what());
      }
      u = trial;
      rn = rn_trial;
      advanced = true;
    } else {
      double lambda = 1.0;
      for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
        VecX trial = u + lambda * delta;
        double rn_trial;
        try {
          rn_trial = eval_residual(trial, r);
        } catch (const AssemblyError&) {
          lambda *= 0.5;  // state left the admissible region; shrink
          continue;
        } catch (const KernelError&) {
          lambda *= 0.5;
          continue;
        }
        if (rn_trial < rn || rn_trial <= target) {
          u = trial;
          rn = rn_trial;
          advanced = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!advanced) {
        if (!fresh) {
          // retry with a fresh Jacobian before giving up
          lin.reset();
          continue;
        }
        return fail("line search failed");
      }
    }
    if (advanced) {
      contraction = rep.residual_history.back() > 0.0 ? rn / rep.residual_history.back() : 0.0;
      fresh = false;
      rep.iterations = it + 1;
      rep.residual_history.push_back(rn);
      if (!std::isfinite(rn)) return fail("residual diverged");
    }
  }
  if (rn <= target) {
    rep.converged = true;
    return rep;
  }
  return fail("max iterations");
}

}  // namespace vfem
