#pragma once

#include "viscofem/mesh.hpp"

namespace vfem {

// Half of the confined-cylinder channel (y >= 0): cylinder of radius 1 at the
// origin, wall at y = 2, inlet at x = -L_up, outlet at x = L_down, symmetry
// line along y = 0. Grading keeps elements adjacent to the cylinder at or
// below h_target/2.
Mesh gen_cylinder_half(double h_target, double l_up = 10.0, double l_down = 10.0);

// Plus-shaped cross-slot of channel width 1: inlets left/right, outlets
// top/bottom, arms of length l_arm attached to the central unit square,
// which is refined at h_target/2 and exactly triangulated.
Mesh gen_cross_slot(double h_target, double l_arm = 10.0);

// Hexagonal core with three inlet and three outlet channels of width 1
// attached in an alternating fashion. The top channel (outlet 1) points up,
// inlet 1 points down, and theta is the angle between the vertical channels
// and their neighbours; theta = pi/3 gives 120-degree rotational symmetry.
Mesh gen_trislot(double h_target, double theta, double l_in = 6.0, double l_out = 8.0);

// Straight half-channel [0, length] x [0, half_height] with symmetry at
// y = 0, wall at the top, inlet left, outlet right. Uniform spacing.
Mesh gen_channel(double h_target, double length, double half_height = 2.0);

}  // namespace vfem
