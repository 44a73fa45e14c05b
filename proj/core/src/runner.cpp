#include "viscofem/runner.hpp"

#include <cstdio>
#include <filesystem>

#include "viscofem/meshgen.hpp"
#include "viscofem/vtk.hpp"

namespace vfem {

PreparedCase prepare_case(const RunConfig& cfg) {
  PreparedCase pc;
  const GeometryConfig& g = cfg.geometry;
  BcSpec bc;
  if (g.kind == "cylinder") {
    pc.mesh = gen_cylinder_half(g.h_target, g.l_up, g.l_down);
    bc = cylinder_bc();
  } else if (g.kind == "crossslot") {
    pc.mesh = gen_cross_slot(g.h_target, g.l_arm);
    bc = cross_slot_bc(g.l_arm);
  } else if (g.kind == "trislot") {
    pc.mesh = gen_trislot(g.h_target, g.theta, g.l_in, g.l_out);
    bc = trislot_bc(g.theta, g.l_in, g.l_out);
  } else if (g.kind == "channel") {
    pc.mesh = gen_channel(g.h_target, g.length, g.half_height);
    bc = channel_bc();
  } else if (g.kind.rfind("file:", 0) == 0) {
    pc.mesh = read_mesh_file(g.kind.substr(5));
    bc = cylinder_bc();  // developed-channel data on inlet port 1
  } else {
    throw ConfigError("geometry.kind", "unknown geometry '" + g.kind + "'");
  }

  SolverParams params = cfg.fluid;
  params.threads = cfg.run.threads;
  pc.sys = std::make_unique<FemSystem>(pc.mesh, params, bc, cfg.ramp_spec());

  if (cfg.force.kind != "none") {
    BodyForce f;
    f.kind = cfg.force.kind == "rotating" ? BodyForce::Kind::Rotating : BodyForce::Kind::Upward;
    f.amplitude = cfg.force.amplitude;
    f.envelope.t_start = cfg.force.t_start;
    f.envelope.t_end = cfg.force.t_end;
    pc.sys->set_body_force([f](Vec2 x, double t) { return f(x, t); });
  }
  return pc;
}

ObserverFn make_observer(const std::string& name) {
  if (name == "drag") {
    return [](const FemSystem& s, const VecX& u, double we) { return drag(s, u, we); };
  }
  if (name == "dissipation") {
    return [](const FemSystem& s, const VecX& u, double we) { return dissipation(s, u, we); };
  }
  if (name == "asym_c") {
    return [](const FemSystem& s, const VecX& u, double) {
      return vorticity_integral(s, u, Region::CenterSquare);
    };
  }
  if (name == "asym_sq_c") {
    return [](const FemSystem& s, const VecX& u, double) {
      double v = vorticity_integral(s, u, Region::CenterSquare);
      return v * v;
    };
  }
  if (name == "asym_o") {
    return [](const FemSystem& s, const VecX& u, double) {
      return vorticity_integral(s, u, Region::CenterDisk);
    };
  }
  if (name == "asym_sq_o") {
    return [](const FemSystem& s, const VecX& u, double) {
      double v = vorticity_integral(s, u, Region::CenterDisk);
      return v * v;
    };
  }
  if (name == "max_trace_A") {
    return [](const FemSystem& s, const VecX& u, double) { return max_trace_a(s, u); };
  }
  if (name == "max_trace_A_wake") {
    return [](const FemSystem& s, const VecX& u, double) {
      return max_trace_a(s, u, [](Vec2 p) { return p.x >= 1.0; });
    };
  }
  if (name == "flux_imbalance") {
    return [](const FemSystem& s, const VecX& u, double) { return flux_balance(s, u).relative(); };
  }
  throw ConfigError("run.observers", "unknown observer '" + name + "'");
}

namespace {

std::string join_path(const std::string& root, const std::string& rel) {
  namespace fs = std::filesystem;
  fs::path p(rel);
  if (p.is_absolute() || root.empty()) return rel;
  return (fs::path(root) / p).string();
}

}  // namespace

RunArtifacts execute_run(const RunConfig& cfg, const std::string& out_root, bool write_artifacts) {
  PreparedCase pc = prepare_case(cfg);
  FemSystem& sys = *pc.sys;

  RunArtifacts art;
  art.out_dir = join_path(out_root, cfg.run.out_dir);

  std::vector<ObserverFn> obs;
  art.columns = {"t", "We"};
  for (const std::string& name : cfg.run.observers) {
    obs.push_back(make_observer(name));
    art.columns.push_back(name);
  }

  std::string log_csv = "step,t,We,res_norm,dt,order,newton_iters,jac_refreshed\n";
  char buf[256];

  VecX u = sys.zero_state();
  auto record = [&](double t, const VecX& state) {
    double we = sys.we_at(t);
    std::vector<double> row = {t, we};
    for (auto& o : obs) row.push_back(o(sys, state, we));
    art.rows.push_back(std::move(row));
  };

  if (cfg.run.mode == "steady") {
    ContinuationReport rep = continuation_procedure(sys, cfg.ramp.we_end, u, cfg.stepper);
    art.steps = rep.transient_steps;
    art.final_t = 10.0 * cfg.ramp.we_end;
    record(art.final_t, u);
  } else {
    RampSpec ramp = cfg.ramp_spec();
    double t1 = cfg.run.t_end > 0.0 ? cfg.run.t_end : ramp.t_end + 20.0 * cfg.ramp.we_end;
    TransientOptions opt;
    opt.stepper = cfg.stepper;
    opt.rate_windows.push_back({ramp.t_start, ramp.t_end});
    if (cfg.force.kind != "none" && cfg.force.t_end > cfg.force.t_start) {
      opt.rate_windows.push_back({cfg.force.t_start, cfg.force.t_end});
    }
    opt.we_of_t = [&](double t) { return sys.we_at(t); };
    opt.on_accept = [&](const StepRecord& rec, const VecX& state) {
      ++art.steps;
      record(rec.t, state);
      std::snprintf(buf, sizeof buf, "%ld,%.12g,%.12g,%.6g,%.6g,%d,%d,%d\n", rec.step, rec.t,
                    rec.we, rec.res_norm, rec.dt, rec.order, rec.newton_iters,
                    rec.jac_refreshed ? 1 : 0);
      log_csv += buf;
    };
    transient_solve(sys, u, 0.0, t1, opt);
    art.final_t = t1;
  }

  art.final_we = sys.we_at(art.final_t);
  art.final_u = u;

  if (write_artifacts) {
    std::string run_csv;
    for (size_t i = 0; i < art.columns.size(); ++i) {
      run_csv += (i ? "," : "") + art.columns[i];
    }
    run_csv += "\n";
    for (const auto& row : art.rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.12g", i ? "," : "", row[i]);
        run_csv += buf;
      }
      run_csv += "\n";
    }
    write_file_atomic(art.out_dir + "/run.csv", run_csv);
    write_file_atomic(art.out_dir + "/solve_log.csv", log_csv);
    write_file_atomic(art.out_dir + "/mesh.txt", save_mesh(pc.mesh));
    write_file_atomic(art.out_dir + "/manifest.cfg", format_run_config(cfg));
    field_export(sys, u, art.final_we, art.out_dir + "/final.vtk", art.out_dir + "/final.csv");
  }
  return art;
}

}  // namespace vfem
