#include "vwsim/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vwsim {

namespace {

int exact_sqrt(int m) {
    if (m < 1) return -1;
    int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
    return r * r == m ? r : -1;
}

// True when a is an integral multiple of b, up to relative fp noise.
bool multiple_of(double a, double b) {
    double q = a / b;
    return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q));
}

} // namespace

int GeometryParams::region_side_grids() const {
    int r = exact_sqrt(grids_per_region);
    if (r < 0) throw std::invalid_argument("grids_per_region must be a perfect square");
    return r;
}

double GeometryParams::region_side() const { return region_side_grids() * grid_side; }

int GeometryParams::grid_cols() const {
    return static_cast<int>(std::lround(x_map / grid_side));
}

int GeometryParams::grid_rows() const {
    return static_cast<int>(std::lround(y_map / grid_side));
}

bool GeometryParams::inside(Coord p) const {
    return p.x >= 0 && p.x < x_map && p.y >= 0 && p.y < y_map;
}

void GeometryParams::validate() const {
    if (grid_side <= 0) throw std::invalid_argument("grid_side must be > 0");
    if (grids_per_region < 1 || exact_sqrt(grids_per_region) < 0)
        throw std::invalid_argument("grids_per_region must be a positive perfect square");
    if (x_map <= 0 || y_map <= 0) throw std::invalid_argument("map extent must be positive");
    double s = region_side();
    if (!multiple_of(x_map, s)) throw std::invalid_argument("x_map must be a multiple of the region side");
    if (!multiple_of(y_map, s)) throw std::invalid_argument("y_map must be a multiple of the region side");
    if (velocity < 0) throw std::invalid_argument("velocity must be >= 0");
}

GridCoord GeometryParams::grid_at(Coord p) const {
    if (!inside(p)) throw std::domain_error("coordinate outside the map");
    return grid_of(p, grid_side);
}

RegionCoord GeometryParams::region_at(Coord p) const {
    if (!inside(p)) throw std::domain_error("coordinate outside the map");
    return region_of(p, grid_side, grids_per_region);
}

GridCoord grid_of(Coord p, double l) {
    return {std::floor(p.x / l) * l, std::floor(p.y / l) * l};
}

RegionCoord region_of(Coord p, double l, int m) {
    int r = exact_sqrt(m);
    if (l <= 0 || r < 0) throw std::domain_error("region_of: bad geometry");
    double s = r * l;
    return {std::floor(p.x / s) * s, std::floor(p.y / s) * s};
}

double search_radius(double l, int m) {
    int r = exact_sqrt(m);
    if (l <= 0) throw std::domain_error("search_radius: grid side must be > 0");
    if (r < 0) throw std::domain_error("search_radius: m must be a perfect square");
    return std::sqrt(2.0) / 2.0 * l * r;
}

long cycle_period(double d_r, double v) {
    if (v <= 0) throw std::domain_error("cycle_period: velocity must be > 0");
    double t = std::sqrt(2.0) * d_r / v;
    double r = std::round(t);
    if (std::abs(t - r) < 1e-9 * std::max(1.0, std::abs(t))) return static_cast<long>(r);
    return static_cast<long>(std::ceil(t));
}

double distance(Coord a, Coord b) { return std::hypot(a.x - b.x, a.y - b.y); }
double distance(GridCoord a, Coord b) { return std::hypot(a.x - b.x, a.y - b.y); }
double distance(RegionCoord a, Coord b) { return std::hypot(a.x - b.x, a.y - b.y); }

} // namespace vwsim
