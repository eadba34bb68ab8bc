#ifndef LERW_SPHERE_HPP
#define LERW_SPHERE_HPP

#include <vector>

#include "lerw/rng.hpp"
#include "lerw/vec.hpp"

namespace lerw {

// A cell of an equal-area partition of the unit sphere S^{dim-1}.
// dim == 2: the arc with azimuth in [a0, a1).
// dim == 3: the band-sector with z in [z0, z1) and azimuth in [a0, a1)
//           (the area element dz dphi is uniform, so these are easy to
//           sample and their areas are exact).
struct SphereCell {
    double a0 = 0, a1 = 0;  // azimuth, radians, subset of [0, 2*pi]
    double z0 = 0, z1 = 0;  // dim == 3 only
    double area = 0;        // normalized: all cells sum to 1
    double diam = 0;        // upper bound on the Euclidean diameter
};

// Partition of the unit sphere into ~D cells of normalized area in
// [1/(4D), 4/D] and diameter <= 8/sqrt(D).  dim == 2 gives exactly D arcs of
// length 1/D; dim == 3 with D == 8 gives the 8 octants; other D use polar
// caps plus equal-area collars split into sectors.  Bounds are asserted.
std::vector<SphereCell> sphere_partition(int dim, int D);

// Index of the cell containing direction `dir` (need not be normalized).
// Half-open intervals; boundary ties resolve to the first matching cell.
int cell_of(const std::vector<SphereCell>& cells, int dim, const Vec& dir);

// Uniform point of the unit sphere within the given cell / overall.
Vec sample_in_cell(const SphereCell& cell, int dim, RngStream& rng);
Vec sample_sphere(int dim, RngStream& rng);

}  // namespace lerw

#endif
