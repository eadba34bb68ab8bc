#include "lerw/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lerw {

namespace {

constexpr double kPi = std::numbers::pi;

double chord(double tha, double thb, double dphi) {
    double dot = std::cos(tha) * std::cos(thb) + std::sin(tha) * std::sin(thb) * std::cos(dphi);
    return std::sqrt(std::max(0.0, 2 - 2 * dot));
}

// Diameter of a band-sector.  For fixed azimuth separation the chord is
// extremal in the polar corners, except that a band containing the equator
// is widest there; taking the maximum over these candidates is exact.
double band_sector_diam(double z0, double z1, double a0, double a1) {
    double th0 = std::acos(std::clamp(z1, -1.0, 1.0));  // polar angle, top
    double th1 = std::acos(std::clamp(z0, -1.0, 1.0));  // bottom
    double dphi = std::min(a1 - a0, kPi);
    double d = std::max({chord(th0, th0, dphi), chord(th1, th1, dphi), chord(th0, th1, 0),
                         chord(th0, th1, dphi)});
    if (th0 < kPi / 2 && kPi / 2 < th1) d = std::max(d, 2 * std::sin(dphi / 2));
    return d;
}

void check_bounds(const std::vector<SphereCell>& cells, int D) {
    double total = 0;
    for (const auto& c : cells) {
        if (!(c.area >= 1.0 / (4.0 * D) - 1e-12 && c.area <= 4.0 / D + 1e-12))
            throw std::logic_error("sphere_partition: cell area out of bounds");
        if (!(c.diam <= 8.0 / std::sqrt(static_cast<double>(D)) + 1e-9))
            throw std::logic_error("sphere_partition: cell diameter out of bounds");
        total += c.area;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::logic_error("sphere_partition: areas do not sum to 1");
}

}  // namespace

std::vector<SphereCell> sphere_partition(int dim, int D) {
    if (D < 4) throw std::invalid_argument("sphere_partition: D must be >= 4");
    std::vector<SphereCell> cells;
    if (dim == 2) {
        for (int k = 0; k < D; ++k) {
            SphereCell c;
            c.a0 = 2 * kPi * k / D;
            c.a1 = 2 * kPi * (k + 1) / D;
            c.area = 1.0 / D;
            c.diam = 2 * std::sin(kPi / D);
            cells.push_back(c);
        }
        check_bounds(cells, D);
        return cells;
    }
    if (dim != 3) throw std::invalid_argument("sphere_partition: dim must be 2 or 3");

    if (D == 8) {
        // the 8 octants, each of area exactly 1/8
        for (int zi = 0; zi < 2; ++zi)
            for (int k = 0; k < 4; ++k) {
                SphereCell c;
                c.z0 = zi == 0 ? -1.0 : 0.0;
                c.z1 = zi == 0 ? 0.0 : 1.0;
                c.a0 = kPi / 2 * k;
                c.a1 = kPi / 2 * (k + 1);
                c.area = 1.0 / 8;
                c.diam = band_sector_diam(c.z0, c.z1, c.a0, c.a1);
                cells.push_back(c);
            }
        check_bounds(cells, D);
        return cells;
    }

    // polar caps of area 1/D plus equal-height collars split into sectors
    double theta_c = std::acos(1.0 - 2.0 / D);
    double s_ideal = std::sqrt(4 * kPi / D);
    int n_collars = std::max(1, static_cast<int>(std::lround((kPi - 2 * theta_c) / s_ideal)));

    SphereCell south;
    south.z0 = -1.0;
    south.z1 = -std::cos(theta_c);
    south.a0 = 0;
    south.a1 = 2 * kPi;
    south.area = 1.0 / D;
    south.diam = 2 * std::sin(theta_c);
    cells.push_back(south);

    for (int j = 0; j < n_collars; ++j) {
        // polar angles measured from the north pole, collars listed south-up
        double th_hi = theta_c + (kPi - 2 * theta_c) * (n_collars - j) / n_collars;
        double th_lo = theta_c + (kPi - 2 * theta_c) * (n_collars - j - 1) / n_collars;
        double z0 = std::cos(th_hi), z1 = std::cos(th_lo);
        double band_area = (z1 - z0) / 2;
        int m = std::max(1, static_cast<int>(std::lround(band_area * D)));
        for (int k = 0; k < m; ++k) {
            SphereCell c;
            c.z0 = z0;
            c.z1 = z1;
            c.a0 = 2 * kPi * k / m;
            c.a1 = 2 * kPi * (k + 1) / m;
            c.area = band_area / m;
            c.diam = band_sector_diam(z0, z1, c.a0, c.a1);
            cells.push_back(c);
        }
    }

    SphereCell north;
    north.z0 = std::cos(theta_c);
    north.z1 = 1.0;
    north.a0 = 0;
    north.a1 = 2 * kPi;
    north.area = 1.0 / D;
    north.diam = 2 * std::sin(theta_c);
    cells.push_back(north);

    check_bounds(cells, D);
    return cells;
}

int cell_of(const std::vector<SphereCell>& cells, int dim, const Vec& dir) {
    double n = dir.norm();
    if (n == 0) throw std::invalid_argument("cell_of: zero direction");
    double phi = std::atan2(dir[1], dir[0]);
    if (phi < 0) phi += 2 * kPi;
    double z = dim == 3 ? dir[2] / n : 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        bool ain = phi >= c.a0 && phi < c.a1;
        if (!ain) continue;
        if (dim == 2) return static_cast<int>(i);
        bool zin = z >= c.z0 && (z < c.z1 || (c.z1 >= 1.0 && z <= c.z1));
        if (zin) return static_cast<int>(i);
    }
    throw std::logic_error("cell_of: direction not covered");
}

Vec sample_in_cell(const SphereCell& cell, int dim, RngStream& rng) {
    double phi = cell.a0 + rng.next_double() * (cell.a1 - cell.a0);
    Vec p = Vec::zero(dim);
    if (dim == 2) {
        p[0] = std::cos(phi);
        p[1] = std::sin(phi);
        return p;
    }
    double z = cell.z0 + rng.next_double() * (cell.z1 - cell.z0);
    double rho = std::sqrt(std::max(0.0, 1 - z * z));
    p[0] = rho * std::cos(phi);
    p[1] = rho * std::sin(phi);
    p[2] = z;
    return p;
}

Vec sample_sphere(int dim, RngStream& rng) {
    for (;;) {
        Vec p = Vec::zero(dim);
        double n2 = 0;
        for (int i = 0; i < dim; ++i) {
            p[i] = rng.next_normal();
            n2 += p[i] * p[i];
        }
        if (n2 > 1e-24) {
            double n = std::sqrt(n2);
            for (int i = 0; i < dim; ++i) p[i] /= n;
            return p;
        }
    }
}

}  // namespace lerw
