#include "airground/geo.h"

#include <cmath>
#include <numbers>
#include <string>

namespace airground {

namespace {

double cross(Location o, Location a, Location b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Location p, Location a, Location b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Closed segment intersection, collinear overlaps included.
bool segments_intersect(Location a, Location b, Location c, Location d) {
  const int d1 = sign(cross(c, d, a));
  const int d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c));
  const int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) {
    return true;
  }
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

constexpr double kEarthRadius = 6371008.8;

}  // namespace

bool ConvexPolygon::contains(Location p) const {
  const std::size_t n = vertices.size();
  if (n < 3) {
    return false;
  }
  int seen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int s = sign(cross(vertices[i], vertices[(i + 1) % n], p));
    if (s == 0) {
      continue;
    }
    if (seen == 0) {
      seen = s;
    } else if (s != seen) {
      return false;
    }
  }
  return true;
}

bool ConvexPolygon::intersects_segment(Location a, Location b) const {
  if (contains(a) || contains(b)) {
    return true;
  }
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (segments_intersect(a, b, vertices[i], vertices[(i + 1) % n])) {
      return true;
    }
  }
  return false;
}

bool ConvexPolygon::intersects_rect(const Rect& r) const {
  if (vertices.size() < 3) {
    return false;
  }
  // Separating axis test over the rectangle axes and the polygon edge normals.
  double px0 = vertices[0].x, px1 = vertices[0].x;
  double py0 = vertices[0].y, py1 = vertices[0].y;
  for (const auto& v : vertices) {
    px0 = std::min(px0, v.x);
    px1 = std::max(px1, v.x);
    py0 = std::min(py0, v.y);
    py1 = std::max(py1, v.y);
  }
  if (px1 < r.min_x || px0 > r.max_x || py1 < r.min_y || py0 > r.max_y) {
    return false;
  }
  const Location corners[4] = {{r.min_x, r.min_y},
                               {r.max_x, r.min_y},
                               {r.max_x, r.max_y},
                               {r.min_x, r.max_y}};
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Location a = vertices[i];
    const Location b = vertices[(i + 1) % n];
    const double nx = b.y - a.y;
    const double ny = a.x - b.x;
    double poly_min = 0.0, poly_max = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double proj = nx * vertices[k].x + ny * vertices[k].y;
      if (k == 0 || proj < poly_min) poly_min = proj;
      if (k == 0 || proj > poly_max) poly_max = proj;
    }
    double rect_min = 0.0, rect_max = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double proj = nx * corners[k].x + ny * corners[k].y;
      if (k == 0 || proj < rect_min) rect_min = proj;
      if (k == 0 || proj > rect_max) rect_max = proj;
    }
    if (rect_max < poly_min || rect_min > poly_max) {
      return false;
    }
  }
  return true;
}

void ServiceArea::validate() const {
  if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
    throw std::invalid_argument("service area bounds are degenerate");
  }
  if (!(grid_resolution > 0.0) || !std::isfinite(grid_resolution)) {
    throw std::invalid_argument("grid_resolution must be positive");
  }
  for (std::size_t z = 0; z < no_fly_zones.size(); ++z) {
    const auto& zone = no_fly_zones[z];
    if (zone.vertices.size() < 3) {
      throw std::invalid_argument("no-fly zone " + std::to_string(z) +
                                  " has fewer than 3 vertices");
    }
    for (const auto& v : zone.vertices) {
      if (!bounds.contains(v)) {
        throw std::invalid_argument("no-fly zone " + std::to_string(z) +
                                    " leaves the service area");
      }
    }
  }
}

bool ServiceArea::segment_blocked(Location a, Location b) const {
  for (const auto& zone : no_fly_zones) {
    if (zone.intersects_segment(a, b)) {
      return true;
    }
  }
  return false;
}

bool ServiceArea::inside_zone(Location p) const {
  for (const auto& zone : no_fly_zones) {
    if (zone.contains(p)) {
      return true;
    }
  }
  return false;
}

double manhattan_distance(Location a, Location b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

double euclidean_distance(Location a, Location b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double flight_distance(Location a, Location b, const ServiceArea& area) {
  if (a == b && !area.inside_zone(a)) {
    return 0.0;
  }
  if (!area.segment_blocked(a, b)) {
    return euclidean_distance(a, b);
  }
  return FlightRouter(area).distance(a, b);
}

double travel_time(double distance, double speed) {
  if (!(speed > 0.0)) {
    throw InvalidSpeedError("speed must be positive");
  }
  if (distance < 0.0) {
    throw std::invalid_argument("distance must be non-negative");
  }
  return distance / speed;
}

Location project_equirectangular(double lat, double lon, double origin_lat,
                                 double origin_lon) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double x =
      kEarthRadius * (lon - origin_lon) * deg * std::cos(origin_lat * deg);
  const double y = kEarthRadius * (lat - origin_lat) * deg;
  return {x, y};
}

void unproject_equirectangular(Location p, double origin_lat,
                               double origin_lon, double& lat, double& lon) {
  constexpr double deg = std::numbers::pi / 180.0;
  lat = origin_lat + p.y / (kEarthRadius * deg);
  lon = origin_lon + p.x / (kEarthRadius * deg * std::cos(origin_lat * deg));
}

}  // namespace airground
