#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "viscofem/bench_cases.hpp"
#include "viscofem/homogeneous.hpp"
#include "viscofem/meshgen.hpp"
#include "viscofem/post.hpp"

using namespace vfem;
using namespace vfem::test;
using doctest::Approx;

TEST_CASE("step function endpoint identities") {
  RampSpec r{0.1, 0.7, 10.0, 50.0};
  CHECK(step_profile(10.0, 10.0, 50.0) == 0.0);
  CHECK(step_profile(50.0, 10.0, 50.0) == 1.0);
  CHECK(step_profile(30.0, 10.0, 50.0) == Approx(0.5).epsilon(1e-15));
  CHECK(step_function(9.0, r) == 0.1);
  CHECK(step_function(51.0, r) == 0.7);
  CHECK(step_function(30.0, r) == Approx(0.4).epsilon(1e-14));
}

TEST_CASE("step function is monotone and C1 at the junctions") {
  RampSpec r{0.2, 0.9, 5.0, 25.0};
  double prev = -1.0;
  for (int i = 0; i <= 400; ++i) {
    double t = 4.0 + i * (27.0 - 4.0) / 400.0;
    double v = step_function(t, r);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  // the profile enters the junctions quadratically, so the one-sided
  // difference quotient decays like 3h/T^2
  double T = 20.0;
  for (double h : {1e-4, 1e-6}) {
    double fd_lo = (step_profile(5.0 + h, 5.0, 25.0) - step_profile(5.0 - h, 5.0, 25.0)) / (2 * h);
    double fd_hi = (step_profile(25.0 + h, 5.0, 25.0) - step_profile(25.0 - h, 5.0, 25.0)) / (2 * h);
    CHECK(std::abs(fd_lo) < 5.0 * h / (T * T));
    CHECK(std::abs(fd_hi) < 5.0 * h / (T * T));
  }
}

TEST_CASE("ramp validation") {
  RampSpec bad{0.1, 0.5, 5.0, 5.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  RampSpec neg{-0.1, 0.5, 0.0, 1.0};
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("homogeneous relaxation matches the exponential decay") {
  // with G = 0 the Oldroyd-B conformation relaxes as A-1 ~ exp(-t/We)
  double we = 0.8;
  SymTensor2 s0{std::log(2.0), 0.0, 0.0};
  double t = we * std::log(4.0);
  SymTensor2 s = HomogeneousSystem::integrate(ModelClosure{}, we, Tensor2{}, s0, t, t / 4000.0);
  SymTensor2 a = conformation_from_log(s);
  CHECK(a.xx == Approx(1.25).epsilon(1e-6));
  CHECK(a.yy == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("BDF2 shows second order on the homogeneous constitutive equation") {
  ModelClosure m;
  double we = 0.5;
  Tensor2 g{0.0, 1.2, 0.0, 0.0};
  SymTensor2 s0{0.0, 0.0, 0.0};
  double t_end = 1.0;

  // reference with a very fine step
  SymTensor2 ref = HomogeneousSystem::integrate(m, we, g, s0, t_end, t_end / 16384.0);

  double prev_err = -1.0;
  std::vector<double> orders;
  for (int n : {64, 128, 256, 512}) {
    SymTensor2 s = HomogeneousSystem::integrate(m, we, g, s0, t_end, t_end / n);
    double err = std::max({std::abs(s.xx - ref.xx), std::abs(s.xy - ref.xy),
                           std::abs(s.yy - ref.yy)});
    if (prev_err > 0.0) orders.push_back(std::log2(prev_err / err));
    prev_err = err;
  }
  for (double p : orders) CHECK(p >= 1.9);
}

TEST_CASE("newton converges immediately from the exact solution") {
  Mesh mesh = gen_channel(0.5, 4.0, 2.0);
  SolverParams params;
  params.beta = 0.59;
  FemSystem sys(mesh, params, channel_bc(), RampSpec::constant(0.4));
  VecX u = sys.zero_state();
  TimeStepperConfig cfg;
  continuation_procedure(sys, 0.4, u, cfg);

  NewtonReport rep = steady_solve(sys, u, 10.0 * 0.4, cfg.newton);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
}

TEST_CASE("newton is quadratic near the solution") {
  Mesh mesh = gen_channel(0.4, 4.0, 2.0);
  SolverParams params;
  params.beta = 0.3;
  FemSystem sys(mesh, params, channel_bc(), RampSpec::constant(0.6));
  VecX u = sys.zero_state();
  TimeStepperConfig cfg;
  continuation_procedure(sys, 0.6, u, cfg);

  // perturb the interior state and restart a full-step Newton
  rng().seed(42);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  const auto& fixed = sys.fixed_mask();
  for (int i = 0; i < u.size(); ++i) {
    if (!fixed[i]) u[i] += d(rng());
  }
  NewtonConfig ncfg;
  ncfg.damping = NewtonConfig::Damping::Constant;
  ncfg.factor = 1.0;
  ncfg.rtol = 1e-14;
  ncfg.atol = 1e-12;
  NewtonReport rep = steady_solve(sys, u, 6.0, ncfg);
  CHECK(rep.converged);
  // observed order from the last three iterates above the rounding floor
  std::vector<double> h;
  for (double r : rep.residual_history) {
    if (r > 1e-11) h.push_back(r);
  }
  REQUIRE(h.size() >= 3);
  size_t n = h.size() - 1;
  double q = std::log(h[n] / h[n - 1]) / std::log(h[n - 1] / h[n - 2]);
  CHECK(q > 1.5);
}

TEST_CASE("automatic damping recovers where the full step fails") {
  // relaxation toward equilibrium from a stretched state: the full Newton
  // step overshoots through the conformation exponent range, the damped
  // iteration backs off and converges to s = 0
  HomogeneousSystem sys(ModelClosure{}, 0.8, Tensor2{});
  VecX u0(3);
  u0 << 4.0, 1.0, 3.0;

  NewtonConfig full;
  full.damping = NewtonConfig::Damping::Constant;
  full.factor = 1.0;
  VecX u = u0;
  CHECK_THROWS_AS(steady_solve(sys, u, 0.0, full), NewtonError);

  NewtonConfig amc;
  amc.damping = NewtonConfig::Damping::Automatic;
  amc.max_iter = 80;
  u = u0;
  NewtonReport rep = steady_solve(sys, u, 0.0, amc);
  CHECK(rep.converged);
  CHECK(std::abs(u[0]) < 1e-9);
  CHECK(std::abs(u[1]) < 1e-9);
  CHECK(std::abs(u[2]) < 1e-9);
}

TEST_CASE("transient with beta = 1 stays at the initial algebraic solve") {
  Mesh mesh = gen_channel(0.5, 4.0, 2.0);
  SolverParams params;
  params.beta = 1.0;
  FemSystem sys(mesh, params, channel_bc(), RampSpec{0.1, 0.6, 0.0, 5.0});
  VecX u = sys.zero_state();

  std::vector<VecX> snaps;
  TransientOptions opt;
  opt.stepper.dt_init = 0.5;
  opt.rate_windows.push_back({0.0, 5.0});
  opt.on_accept = [&](const StepRecord&, const VecX& state) { snaps.push_back(state); };
  transient_solve(sys, u, 0.0, 8.0, opt);
  REQUIRE(snaps.size() >= 2);
  const Layout& lay = sys.layout();
  // velocity and pressure never move once the algebraic solve is done
  for (const VecX& s : snaps) {
    for (int i = 0; i < lay.off_g; ++i) {
      CHECK(std::abs(s[i] - snaps.front()[i]) < 1e-8);
    }
  }
}

TEST_CASE("transient ramp reaches the developed viscoelastic channel") {
  Mesh mesh = gen_channel(0.25, 8.0, 2.0);
  SolverParams params;
  params.beta = 0.59;
  RampSpec ramp{0.05, 0.5, 0.0, 30.0};
  FemSystem sys(mesh, params, channel_bc(), ramp);
  VecX u = sys.zero_state();

  TransientOptions opt;
  opt.stepper.dt_init = 0.05;
  opt.rate_windows.push_back({ramp.t_start, ramp.t_end});
  transient_solve(sys, u, 0.0, ramp.t_end + 10.0, opt);

  const Layout& lay = sys.layout();
  double max_rel = 0.0;
  for (int v = 0; v < mesh.n_nodes(); ++v) {
    Vec2 p = mesh.nodes[v];
    if (p.x < 4.0) continue;
    SymTensor2 s{u[lay.s_dof(v, 0)], u[lay.s_dof(v, 1)], u[lay.s_dof(v, 2)]};
    SymTensor2 a = conformation_from_log(s);
    SymTensor2 ref = inlet_oldroydb(p.y, 0.5).second;
    double num = std::sqrt(std::pow(a.xx - ref.xx, 2) + 2 * std::pow(a.xy - ref.xy, 2) +
                           std::pow(a.yy - ref.yy, 2));
    double den = std::sqrt(ref.xx * ref.xx + 2 * ref.xy * ref.xy + ref.yy * ref.yy);
    max_rel = std::max(max_rel, num / den);
  }
  CHECK(max_rel < 4e-3);
}

TEST_CASE("trajectories are bitwise deterministic in sequential mode") {
  auto run_once = []() {
    Mesh mesh = gen_channel(0.4, 4.0, 2.0);
    SolverParams params;
    params.beta = 0.5;
    params.threads = 1;
    FemSystem sys(mesh, params, channel_bc(), RampSpec{0.1, 0.4, 0.0, 10.0});
    VecX u = sys.zero_state();
    std::vector<double> trace;
    TransientOptions opt;
    opt.stepper.dt_init = 0.1;
    opt.rate_windows.push_back({0.0, 10.0});
    opt.on_accept = [&](const StepRecord& rec, const VecX& state) {
      trace.push_back(rec.t);
      trace.push_back(state.norm());
      trace.push_back(state[state.size() / 2]);
    };
    transient_solve(sys, u, 0.0, 12.0, opt);
    return trace;
  };
  auto a = run_once();
  auto b = run_once();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("step size underflow raises with diagnostics") {
  Mesh mesh = gen_channel(0.6, 3.0, 2.0);
  SolverParams params;
  params.beta = 0.5;
  FemSystem sys(mesh, params, channel_bc(), RampSpec{0.1, 0.4, 0.0, 10.0});
  VecX u = sys.zero_state();
  TransientOptions opt;
  opt.stepper.dt_init = 1e-2;
  opt.stepper.dt_min_rel = 1e-5;  // generous floor so the failure trips fast
  opt.stepper.rel_tol = 1e-300;  // every step is rejected by error control
  opt.stepper.abs_tol = 1e-300;
  CHECK_THROWS_WITH_AS(transient_solve(sys, u, 0.0, 12.0, opt),
                       doctest::Contains("step size underflow"), SolveError);
}

TEST_CASE("quasi-steady ramp: halving the ramp speed moves the drag curve very little") {
  // coarse confined cylinder; the T_step scaling keeps the ramp quasi-steady
  std::vector<std::string> obs = {"drag"};
  TimeStepperConfig stepper;
  RampSeries fast = cylinder_ramp_series(0.35, 0.4, 1.0, 2, obs, stepper);
  RampSeries slow = cylinder_ramp_series(0.35, 0.4, 2.0, 2, obs, stepper);
  for (double we : {0.15, 0.25, 0.35}) {
    double a = fast.at_we("drag", we);
    double b = slow.at_we("drag", we);
    CHECK(std::abs(a - b) / std::abs(b) < 0.002);
  }
}

TEST_CASE("continuation procedure agrees with the ramped steady state") {
  Mesh mesh = gen_channel(0.4, 6.0, 2.0);
  SolverParams params;
  params.beta = 0.59;
  FemSystem sys(mesh, params, channel_bc(), RampSpec::constant(0.45));
  VecX u = sys.zero_state();
  TimeStepperConfig cfg;
  ContinuationReport rep = continuation_procedure(sys, 0.45, u, cfg);
  CHECK(rep.steady.converged);
  CHECK(rep.transient_steps > 0);

  // the A field matches the developed analytic profile away from the inlet
  const Layout& lay = sys.layout();
  for (int v = 0; v < mesh.n_nodes(); ++v) {
    Vec2 p = mesh.nodes[v];
    if (p.x < 4.0) continue;
    SymTensor2 s{u[lay.s_dof(v, 0)], u[lay.s_dof(v, 1)], u[lay.s_dof(v, 2)]};
    SymTensor2 a = conformation_from_log(s);
    SymTensor2 ref = inlet_oldroydb(p.y, 0.45).second;
    CHECK(a.xx == Approx(ref.xx).epsilon(2e-2));
    CHECK(a.xy == Approx(ref.xy).epsilon(2e-2).scale(1.0));
  }
}
