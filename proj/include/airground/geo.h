#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace airground {

// Planar point in meters relative to the service-area origin.
struct Location {
  double x = 0.0;  // east
  double y = 0.0;  // north

  bool operator==(const Location&) const = default;
};

struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Location p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  Location centroid() const {
    return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)};
  }
};

// Convex polygon, vertices in either winding order.
struct ConvexPolygon {
  std::vector<Location> vertices;

  // Closed containment: boundary points count as inside.
  bool contains(Location p) const;
  bool intersects_segment(Location a, Location b) const;
  bool intersects_rect(const Rect& r) const;
};

struct ServiceArea {
  Rect bounds;
  std::vector<ConvexPolygon> no_fly_zones;
  double grid_resolution = 50.0;

  // Throws std::invalid_argument on a degenerate area or a zone that leaves
  // the bounds.
  void validate() const;
  bool segment_blocked(Location a, Location b) const;
  bool inside_zone(Location p) const;
};

class NoRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpeedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double manhattan_distance(Location a, Location b);
double euclidean_distance(Location a, Location b);

// Shortest flight path avoiding no-fly zones. Straight-line distance when the
// segment is clear, otherwise an 8-connected occupancy-grid path. Throws
// NoRouteError when an endpoint is enclosed.
double flight_distance(Location a, Location b, const ServiceArea& area);

double travel_time(double distance, double speed);

// Equirectangular projection of (lat, lon) degrees to local meters around
// (origin_lat, origin_lon), and its inverse.
Location project_equirectangular(double lat, double lon, double origin_lat,
                                 double origin_lon);
void unproject_equirectangular(Location p, double origin_lat,
                               double origin_lon, double& lat, double& lon);

// Occupancy grid over the service area, built once and queried many times.
// A cell is blocked when its closed square touches any no-fly zone; diagonal
// moves require both orthogonal neighbours to be free, so every grid edge
// stays clear of the zones.
class FlightRouter {
 public:
  explicit FlightRouter(ServiceArea area);

  double distance(Location a, Location b) const;

  const ServiceArea& area() const { return area_; }
  int columns() const { return nx_; }
  int rows() const { return ny_; }
  bool blocked(int cx, int cy) const {
    return blocked_[static_cast<std::size_t>(cy) * nx_ + cx] != 0;
  }
  Location cell_center(int cx, int cy) const;

 private:
  double grid_distance(Location a, Location b) const;

  ServiceArea area_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint8_t> blocked_;
};

}  // namespace airground
