#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "viscofem/run_config.hpp"

using namespace vfem;
using doctest::Approx;

namespace {

const char* kSample = R"(
# sample configuration
[geometry]
kind = cylinder
h_target = 0.14

[fluid]
model = oldroyd_b
beta = 0.59
Re = 0

[ramp]
We_start = 0.01
We_end = 0.6
T_step = auto

[run]
mode = transient
out_dir = cyl0
observers = drag,dissipation
threads = 2
)";

}  // namespace

TEST_CASE("parses a sample config with defaults") {
  RunConfig cfg = parse_run_config(kSample);
  CHECK(cfg.geometry.kind == "cylinder");
  CHECK(cfg.geometry.h_target == Approx(0.14));
  CHECK(cfg.fluid.beta == Approx(0.59));
  CHECK(cfg.fluid.model.kind == Model::OldroydB);
  CHECK(cfg.ramp.we_end == Approx(0.6));
  CHECK(cfg.run.observers.size() == 2);
  CHECK(cfg.run.threads == 2);
  // auto T_step follows the mesh scaling
  CHECK(cfg.resolved_t_step() == Approx(8000.0 * 0.07 / 0.14));
  RampSpec r = cfg.ramp_spec();
  CHECK(r.t_end - r.t_start == Approx(cfg.resolved_t_step()));
}

TEST_CASE("unknown keys are rejected with their name") {
  std::string text = std::string(kSample) + "\n[fluid]\nviscosity = 3\n";
  CHECK_THROWS_WITH_AS(parse_run_config(text), doctest::Contains("fluid.viscosity"), ConfigError);
}

TEST_CASE("beta out of range message") {
  std::string text = "[fluid]\nbeta = 1.5\n";
  CHECK_THROWS_WITH_AS(parse_run_config(text), doctest::Contains("beta out of range [0,1]"),
                       ConfigError);
}

TEST_CASE("other validations name the offending key") {
  CHECK_THROWS_WITH_AS(parse_run_config("[geometry]\nkind = sphere\n"),
                       doctest::Contains("geometry.kind"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[ramp]\nWe_end = -0.5\n"), doctest::Contains("ramp"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[fluid]\na_max_sq = 1\n"),
                       doctest::Contains("a_max_sq"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[run]\nmode = dance\n"), doctest::Contains("run.mode"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("[fluid]\nbeta = two\n"),
                       doctest::Contains("expected a number"), ConfigError);
}

TEST_CASE("manifest round trip preserves the configuration") {
  RunConfig cfg = parse_run_config(kSample);
  cfg.fluid.model.kind = Model::FENECR;
  cfg.fluid.model.a_max_sq = 100.0;
  cfg.stepper.newton.damping = NewtonConfig::Damping::Constant;
  cfg.stepper.newton.factor = 0.7;
  cfg.force.kind = "rotating";
  cfg.force.t_end = 55.0;

  std::string text = format_run_config(cfg);
  RunConfig back = parse_run_config(text);

  CHECK(back.geometry.kind == cfg.geometry.kind);
  CHECK(back.geometry.h_target == cfg.geometry.h_target);
  CHECK(back.fluid.model.kind == cfg.fluid.model.kind);
  CHECK(back.fluid.model.a_max_sq == cfg.fluid.model.a_max_sq);
  CHECK(back.fluid.beta == cfg.fluid.beta);
  CHECK(back.stepper.newton.damping == cfg.stepper.newton.damping);
  CHECK(back.stepper.newton.factor == cfg.stepper.newton.factor);
  CHECK(back.force.kind == cfg.force.kind);
  CHECK(back.force.t_end == cfg.force.t_end);
  CHECK(back.run.observers == cfg.run.observers);
  CHECK(back.resolved_t_step() == Approx(cfg.resolved_t_step()));
  // a second round trip is textually stable
  CHECK(format_run_config(back) == text);
}
