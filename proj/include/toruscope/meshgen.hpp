#pragma once

#include <functional>

#include "toruscope/mesh.hpp"

namespace toruscope {

/// Flat unit torus: res x res grid of vertices, each cell split into two
/// triangles, coordinates in the fundamental domain [0,1)^2.  res >= 3.
SimplicialComplex flat_torus(int res);

/// Klein bottle: same grid, x-direction glued straight, y-direction glued
/// with the flip (x, 1) ~ (1 - x, 0).  res >= 3.
SimplicialComplex klein_bottle(int res);

/// Boundary of the regular octahedron, oriented outward, in R^3.
SimplicialComplex octahedron();

/// 1-cochain whose edge values are the (quotient-aware) coordinate
/// displacements along the given axis: the discrete "dx" form.
RealCochain coordinate_cochain(const SimplicialComplex& m, int axis);

/// 0-cochain sampling a function of the vertex coordinates.
RealCochain vertex_cochain(const SimplicialComplex& m,
                           const std::function<double(const std::vector<double>&)>& fn);

}  // namespace toruscope
