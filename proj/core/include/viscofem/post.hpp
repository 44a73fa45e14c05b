#pragma once

#include <functional>

#include "viscofem/assembly.hpp"

namespace vfem {

struct PostError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// circular-arc region |x|_2 < 0.5 or square region |x|_inf < 0.5
enum class Region { CenterSquare, CenterDisk };

// dimensionless drag on the cylinder boundary, factor 2 for the mirrored
// half; total stress = -pI + beta(grad v + grad v^T) + elastic
double drag(const FemSystem& sys, const VecX& u, double we);

// reaction-force route: sum of unconstrained momentum residuals over the
// cylinder velocity dofs plus the elastic boundary traction
double drag_residual_functional(const FemSystem& sys, const VecX& u, double we, double t = 0.0);

// integral of total stress contracted with (grad v + grad v^T)
double dissipation(const FemSystem& sys, const VecX& u, double we);

// signed vorticity integral over the region; its square is the reported
// asymmetry diagnostic
double vorticity_integral(const FemSystem& sys, const VecX& u, Region region);

// net boundary outflux and total inflow magnitude
struct FluxBalance {
  double net = 0.0;
  double inflow = 0.0;
  double relative() const { return inflow > 0.0 ? std::abs(net) / inflow : std::abs(net); }
};
FluxBalance flux_balance(const FemSystem& sys, const VecX& u);

double boundary_flux(const FemSystem& sys, const VecX& u, BoundaryTag::Kind kind, int port = -1);

// P1 stream function: Laplace solve with Dirichlet data accumulated from the
// boundary flux; throws PostError("inconsistent fluxes") if the boundary
// data fails to close
VecX stream_function(const FemSystem& sys, const VecX& u);

// vorticity lumped onto the vertices
VecX vorticity_field(const FemSystem& sys, const VecX& u);

// interior velocity zeros by Newton iteration on the interpolated field
std::vector<Vec2> stagnation_points(const FemSystem& sys, const VecX& u);

// line flux of v across the straight segment p1 -> p2
double interstagnation_flux(const FemSystem& sys, const VecX& u, Vec2 p1, Vec2 p2);

// max of Trace(A) over vertices satisfying the predicate (everything if empty)
double max_trace_a(const FemSystem& sys, const VecX& u,
                   const std::function<bool(Vec2)>& pred = {});

// VTK legacy + CSV point-cloud export of v, p, Trace(A), log10 Trace(A),
// det(A), stream function and vorticity
void field_export(const FemSystem& sys, const VecX& u, double we, const std::string& vtk_path,
                  const std::string& csv_path);

}  // namespace vfem
