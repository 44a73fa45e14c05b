#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "viscofem/meshgen.hpp"
#include "viscofem/post.hpp"
#include "viscofem/runner.hpp"
#include "viscofem/time_stepper.hpp"
#include "viscofem/vtk.hpp"

using namespace vfem;
using namespace vfem::test;
using doctest::Approx;

namespace {

// velocity gradient of the developed channel profile
Tensor2 channel_gradient(double y) { return {0.0, -0.75 * y, 0.0, 0.0}; }

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("developed Oldroyd-B inlet profile") {
  auto [v0, a0] = inlet_oldroydb(0.0, 0.7);
  CHECK(v0.x == Approx(1.5));
  CHECK(a0.xx == Approx(1.0));
  CHECK(a0.xy == Approx(0.0));
  CHECK(a0.yy == Approx(1.0));

  auto [v2, a2] = inlet_oldroydb(2.0, 0.5);
  CHECK(v2.x == Approx(0.0).scale(1.0));
  CHECK(a2.xx == Approx(2.125).epsilon(1e-14));
  CHECK(a2.xy == Approx(-0.75).epsilon(1e-14));
  CHECK(a2.yy == Approx(1.0));
}

TEST_CASE("Oldroyd-B inlet profile is a pointwise steady state of the kernel") {
  ModelClosure ob;
  for (int i = 0; i <= 20; ++i) {
    double y = 2.0 * i / 20.0;
    double we = 0.5;
    auto [v, a] = inlet_oldroydb(y, we);
    SymTensor2 s = log_from_conformation(a);
    SymTensor2 pi = reaction(s, channel_gradient(y), ob, we);
    CHECK(std::abs(pi.xx) < 1e-12);
    CHECK(std::abs(pi.xy) < 1e-12);
    CHECK(std::abs(pi.yy) < 1e-12);
  }
}

TEST_CASE("FENE-CR inlet profile") {
  // centerline falls back to the identity
  auto [v0, a0] = inlet_fenecr(0.0, 0.6, 100.0, -1.0);
  CHECK(a0.xx == Approx(1.0));
  CHECK(a0.xy == Approx(0.0));
  CHECK(v0.x == Approx(1.5));

  // large extensibility approaches the Oldroyd-B profile
  for (double y : {0.5, 1.0, 1.7}) {
    double we = 0.6;
    auto [vf, af] = inlet_fenecr(y, we, 1e8, -1.0);
    auto [vo, ao] = inlet_oldroydb(y, we);
    CHECK(af.xx == Approx(ao.xx).epsilon(1e-5));
    CHECK(af.xy == Approx(ao.xy).epsilon(1e-5));
    CHECK(vf.x == Approx(vo.x));
  }

  // finite extensibility: bounded trace and a steady state of the
  // consistent FENE-CR closure
  ModelClosure m;
  m.kind = Model::FENECR;
  m.a_max_sq = 100.0;
  for (int i = 0; i <= 20; ++i) {
    double y = 2.0 * i / 20.0;
    double we = 0.9;
    auto [v, a] = inlet_fenecr(y, we, 100.0, -1.0);
    CHECK(a.trace() < 100.0);
    SymTensor2 s = log_from_conformation(a);
    // v_x = +1.5(1-(y/2)^2) for an inlet normal along -x
    Tensor2 g{0.0, -0.75 * y, 0.0, 0.0};
    SymTensor2 pi = reaction(s, g, m, we);
    CHECK(std::abs(pi.xx) < 1e-10);
    CHECK(std::abs(pi.xy) < 1e-10);
    CHECK(std::abs(pi.yy) < 1e-10);
  }

  CHECK_THROWS_WITH_AS(inlet_fenecr(1.0, 0.5, 2.0, -1.0), doctest::Contains("extensibility"),
                       KernelError);
}

TEST_CASE("body forces as printed") {
  CHECK(BodyForce::eval_spatial(BodyForce::Kind::Rotating, {0, 0}).x == 0.0);
  CHECK(BodyForce::eval_spatial(BodyForce::Kind::Upward, {0, 0}).y == Approx(0.25));
  // rotating force at (1,0) points in -y: clockwise
  Vec2 f = BodyForce::eval_spatial(BodyForce::Kind::Rotating, {1.0, 0.0});
  CHECK(f.x == Approx(0.0));
  CHECK(f.y == Approx(-0.5));
  // cutoff radius 0.5/sin(pi/6) = 1
  CHECK(BodyForce::eval_spatial(BodyForce::Kind::Rotating, {1.2, 0.0}).y == 0.0);
  CHECK(BodyForce::eval_spatial(BodyForce::Kind::Upward, {0.9, 0.8}).y == 0.0);

  BodyForce bf;
  bf.kind = BodyForce::Kind::Upward;
  bf.amplitude = 2.0;
  bf.envelope = RampSpec{1.0, 1.0, 0.0, 10.0};
  CHECK(bf({0, 0}, 0.0).y == Approx(0.5));     // full envelope
  CHECK(bf({0, 0}, 5.0).y == Approx(0.25));    // half
  CHECK(bf({0, 0}, 10.0).y == 0.0);            // expired
  CHECK(bf({0, 0}, 25.0).y == 0.0);
}

TEST_CASE("drag pressure fixtures on the cylinder boundary") {
  Mesh mesh = gen_cylinder_half(0.3);
  SolverParams params;
  params.beta = 0.59;
  FemSystem sys(mesh, params, cylinder_bc(), RampSpec::constant(0.5));
  VecX u = sys.zero_state();

  // uniform pressure: the x-projection of the half-arc closes, so no drag
  const Layout& lay = sys.layout();
  for (int v = 0; v < mesh.n_nodes(); ++v) u[lay.p_dof(v)] = 3.0;
  CHECK(std::abs(drag(sys, u, 0.5)) < 1e-10);

  // linear pressure p = c x: analytic value -pi c on the circle
  double c = 2.0;
  for (int v = 0; v < mesh.n_nodes(); ++v) u[lay.p_dof(v)] = c * mesh.nodes[v].x;
  CHECK(drag(sys, u, 0.5) == Approx(-3.14159265358979 * c).epsilon(2e-3));
}

TEST_CASE("drag requires a cylinder boundary") {
  Mesh mesh = gen_channel(0.5, 3.0, 2.0);
  SolverParams params;
  FemSystem sys(mesh, params, channel_bc(), RampSpec::constant(0.5));
  VecX u = sys.zero_state();
  CHECK_THROWS_WITH_AS(drag(sys, u, 0.5), doctest::Contains("no cylinder boundary"), PostError);
}

TEST_CASE("Newtonian drag agrees between the line integral and the reaction force") {
  Mesh mesh = gen_cylinder_half(0.3);
  SolverParams params;
  params.beta = 1.0;
  FemSystem sys(mesh, params, cylinder_bc(), RampSpec::constant(0.1));
  VecX u = sys.zero_state();
  consistent_init(sys, u, 0.0, NewtonConfig{});

  double d_line = drag(sys, u, 0.1);
  double d_react = drag_residual_functional(sys, u, 0.1);
  CHECK(d_line == Approx(d_react).epsilon(5e-3));
  // classic confined-cylinder magnitude at blocking ratio 2
  CHECK(d_line > 100.0);
  CHECK(d_line < 160.0);
}

TEST_CASE("dissipation of the plane Poiseuille half-channel") {
  // half of a width-1 channel with unit-mean profile: the printed functional
  // (total stress against twice the strain rate) gives 12 beta L on the
  // half domain, twice that over the full width
  double beta = 0.7, length = 3.0;
  Mesh mesh = gen_channel(0.1, length, 0.5);
  SolverParams params;
  params.beta = beta;
  BcSpec bc;
  InletBc in;
  in.velocity = [](Vec2 p, double) { return Vec2{1.5 * (1.0 - 4.0 * p.y * p.y), 0.0}; };
  in.log_conf = [](Vec2, double) { return SymTensor2{0, 0, 0}; };
  bc.inlets[1] = in;
  FemSystem sys(mesh, params, bc, RampSpec::constant(0.5));
  VecX u = sys.zero_state();
  const Layout& lay = sys.layout();
  for (int n = 0; n < sys.spaces().n_p2(); ++n) {
    Vec2 p = sys.spaces().p2_pos(n);
    u[lay.v_dof(n, 0)] = 1.5 * (1.0 - 4.0 * p.y * p.y);
  }
  CHECK(dissipation(sys, u, 0.5) == Approx(12.0 * beta * length).epsilon(1e-10));

  // rest state dissipates nothing
  VecX zero = sys.zero_state();
  CHECK(dissipation(sys, zero, 0.5) == Approx(0.0).scale(1.0));
}

TEST_CASE("regional vorticity integral as an asymmetry measure") {
  Mesh mesh = gen_cross_slot(0.25, 3.0);
  SolverParams params;
  FemSystem sys(mesh, params, cross_slot_bc(3.0), RampSpec::constant(0.5));
  const Layout& lay = sys.layout();

  // symmetric extensional field has no vorticity
  VecX u = sys.zero_state();
  for (int n = 0; n < sys.spaces().n_p2(); ++n) {
    Vec2 p = sys.spaces().p2_pos(n);
    u[lay.v_dof(n, 0)] = p.x;
    u[lay.v_dof(n, 1)] = -p.y;
  }
  CHECK(std::abs(vorticity_integral(sys, u, Region::CenterSquare)) < 1e-12);
  CHECK(std::abs(vorticity_integral(sys, u, Region::CenterDisk)) < 1e-12);

  // a field and its mirror image integrate to opposite values
  auto fill = [&](VecX& vec, double sign) {
    for (int n = 0; n < sys.spaces().n_p2(); ++n) {
      Vec2 p = sys.spaces().p2_pos(n);
      double x = sign * p.x;
      vec[lay.v_dof(n, 0)] = sign * (x * x * p.y + 0.3 * p.y);
      vec[lay.v_dof(n, 1)] = x * p.y * p.y - 0.1 * x;
    }
  };
  VecX a = sys.zero_state(), b = sys.zero_state();
  fill(a, 1.0);
  fill(b, -1.0);
  double ia = vorticity_integral(sys, a, Region::CenterSquare);
  double ib = vorticity_integral(sys, b, Region::CenterSquare);
  CHECK(std::abs(ia) > 1e-3);
  CHECK(ia + ib == Approx(0.0).scale(1.0).epsilon(1e-12));
  double da = vorticity_integral(sys, a, Region::CenterDisk);
  double db = vorticity_integral(sys, b, Region::CenterDisk);
  CHECK(da + db == Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("stream function of the developed channel") {
  Mesh mesh = gen_channel(0.125, 4.0, 2.0);
  SolverParams params;
  params.beta = 1.0;
  FemSystem sys(mesh, params, channel_bc(), RampSpec::constant(0.5));
  VecX u = sys.zero_state();
  const Layout& lay = sys.layout();
  for (int n = 0; n < sys.spaces().n_p2(); ++n) {
    Vec2 p = sys.spaces().p2_pos(n);
    u[lay.v_dof(n, 0)] = 1.5 * (1.0 - 0.25 * p.y * p.y);
  }
  VecX psi = stream_function(sys, u);
  double flow_rate = 2.0;  // unit mean over the half height
  double wall_max = 0.0;
  for (int v = 0; v < mesh.n_nodes(); ++v) {
    Vec2 p = mesh.nodes[v];
    double ref = 1.5 * (p.y - p.y * p.y * p.y / 12.0);
    CHECK(psi[v] - psi[0] == Approx(ref).scale(1.0).epsilon(2e-3));
    if (std::abs(p.y - 2.0) < 1e-12) wall_max = std::max(wall_max, std::abs(psi[v] - psi[0]));
  }
  CHECK(wall_max == Approx(flow_rate).epsilon(1e-6));
}

TEST_CASE("stream function rejects non-solenoidal boundary data") {
  Mesh mesh = gen_channel(0.5, 3.0, 2.0);
  SolverParams params;
  FemSystem sys(mesh, params, channel_bc(), RampSpec::constant(0.5));
  VecX u = sys.zero_state();
  const Layout& lay = sys.layout();
  for (int n = 0; n < sys.spaces().n_p2(); ++n) {
    Vec2 p = sys.spaces().p2_pos(n);
    u[lay.v_dof(n, 0)] = p.x;
    u[lay.v_dof(n, 1)] = p.y;  // div v = 2
  }
  CHECK_THROWS_WITH_AS(stream_function(sys, u), doctest::Contains("inconsistent fluxes"),
                       PostError);
}

TEST_CASE("stagnation point of an extensional field") {
  Mesh mesh = gen_cross_slot(0.25, 3.0);
  SolverParams params;
  FemSystem sys(mesh, params, cross_slot_bc(3.0), RampSpec::constant(0.5));
  VecX u = sys.zero_state();
  const Layout& lay = sys.layout();
  for (int n = 0; n < sys.spaces().n_p2(); ++n) {
    Vec2 p = sys.spaces().p2_pos(n);
    u[lay.v_dof(n, 0)] = p.x + 0.07;
    u[lay.v_dof(n, 1)] = -(p.y - 0.11);
  }
  auto pts = stagnation_points(sys, u);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].x == Approx(-0.07).epsilon(1e-6));
  CHECK(pts[0].y == Approx(0.11).epsilon(1e-6));
}

TEST_CASE("interstagnation flux of a uniform stream") {
  Mesh mesh = gen_cross_slot(0.25, 3.0);
  SolverParams params;
  FemSystem sys(mesh, params, cross_slot_bc(3.0), RampSpec::constant(0.5));
  VecX u = sys.zero_state();
  const Layout& lay = sys.layout();
  for (int n = 0; n < sys.spaces().n_p2(); ++n) {
    u[lay.v_dof(n, 1)] = 1.0;
  }
  double f = interstagnation_flux(sys, u, {-0.3, 0.0}, {0.4, 0.0});
  CHECK(f == Approx(0.7).epsilon(1e-12));
  CHECK(interstagnation_flux(sys, u, {0.0, 0.0}, {0.0, 0.0}) == 0.0);
}

TEST_CASE("field export is byte deterministic and well formed") {
  namespace fs = std::filesystem;
  Mesh mesh = gen_channel(0.4, 3.0, 2.0);
  SolverParams params;
  params.beta = 0.8;
  FemSystem sys(mesh, params, channel_bc(), RampSpec::constant(0.5));
  VecX u = sys.zero_state();
  const Layout& lay = sys.layout();
  for (int n = 0; n < sys.spaces().n_p2(); ++n) {
    Vec2 p = sys.spaces().p2_pos(n);
    u[lay.v_dof(n, 0)] = 1.5 * (1.0 - 0.25 * p.y * p.y);
  }
  fs::path dir = fs::temp_directory_path() / "viscofem_export_test";
  fs::create_directories(dir);
  std::string vtk1 = (dir / "a.vtk").string(), csv1 = (dir / "a.csv").string();
  std::string vtk2 = (dir / "b.vtk").string(), csv2 = (dir / "b.csv").string();
  field_export(sys, u, 0.5, vtk1, csv1);
  field_export(sys, u, 0.5, vtk2, csv2);
  std::string v1 = slurp(vtk1), v2 = slurp(vtk2);
  CHECK(v1 == v2);
  CHECK(slurp(csv1) == slurp(csv2));
  CHECK(v1.find("# vtk DataFile Version 2.0") == 0);
  CHECK(v1.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(v1.find("SCALARS trace_A double 1") != std::string::npos);
  CHECK(v1.find("VECTORS velocity double") != std::string::npos);
  CHECK(slurp(csv1).rfind("x,y,vx,vy,p,trace_A,det_A,stream_function,vorticity", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("observer registry") {
  CHECK_THROWS_AS(make_observer("bogus"), ConfigError);
  CHECK(make_observer("dissipation") != nullptr);
}
