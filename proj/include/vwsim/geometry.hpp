#pragma once

#include <compare>

namespace vwsim {

/// A point on the world map. The map is [0, X) x [0, Y) with the origin at
/// the lower-left corner.
struct Coord {
    double x = 0;
    double y = 0;
    auto operator<=>(const Coord&) const = default;
};

/// Lower-left corner of a grid; components are exact multiples of the grid
/// side l.
struct GridCoord {
    double x = 0;
    double y = 0;
    auto operator<=>(const GridCoord&) const = default;
};

/// Lower-left corner of a region; components are exact multiples of the
/// region side s = sqrt(m) * l.
struct RegionCoord {
    double x = 0;
    double y = 0;
    auto operator<=>(const RegionCoord&) const = default;
};

/// World geometry: map extent, grid side l, grids per region m (a perfect
/// square) and client velocity in world units per cycle.
struct GeometryParams {
    double x_map = 0;
    double y_map = 0;
    double grid_side = 0;     // l
    int grids_per_region = 0; // m
    double velocity = 0;      // v

    int region_side_grids() const; // sqrt(m)
    double region_side() const;    // s = sqrt(m) * l
    int grid_cols() const;
    int grid_rows() const;
    bool inside(Coord p) const;    // half-open map bounds

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    /// Bounds-checked variants; throw std::domain_error when p is outside
    /// the map.
    GridCoord grid_at(Coord p) const;
    RegionCoord region_at(Coord p) const;
};

/// Grid containing p: (floor(p.x/l)*l, floor(p.y/l)*l). Grids are half-open,
/// so a point on a boundary belongs to the upper cell.
GridCoord grid_of(Coord p, double l);

/// Region containing p, with region side s = sqrt(m) * l.
RegionCoord region_of(Coord p, double l, int m);

/// Half diagonal of a region: (sqrt(2)/2) * l * sqrt(m). Throws
/// std::domain_error unless l > 0 and m is a positive perfect square.
double search_radius(double l, int m);

/// Retrieval cycle length: ceil(sqrt(2) * d_r / v) whole cycles, tolerant of
/// floating point noise at integral values. Throws std::domain_error on
/// v <= 0.
long cycle_period(double d_r, double v);

double distance(Coord a, Coord b);
double distance(GridCoord a, Coord b);
double distance(RegionCoord a, Coord b);

} // namespace vwsim
