#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "airground/geo.h"

namespace airground {

FlightRouter::FlightRouter(ServiceArea area) : area_(std::move(area)) {
  area_.validate();
  const double res = area_.grid_resolution;
  nx_ = std::max(1, static_cast<int>(std::ceil(area_.bounds.width() / res)));
  ny_ = std::max(1, static_cast<int>(std::ceil(area_.bounds.height() / res)));
  blocked_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
  for (const auto& zone : area_.no_fly_zones) {
    double zx0 = zone.vertices[0].x, zx1 = zx0;
    double zy0 = zone.vertices[0].y, zy1 = zy0;
    for (const auto& v : zone.vertices) {
      zx0 = std::min(zx0, v.x);
      zx1 = std::max(zx1, v.x);
      zy0 = std::min(zy0, v.y);
      zy1 = std::max(zy1, v.y);
    }
    const int cx0 = std::max(0, static_cast<int>(std::floor((zx0 - area_.bounds.min_x) / res)) - 1);
    const int cx1 = std::min(nx_ - 1, static_cast<int>(std::floor((zx1 - area_.bounds.min_x) / res)) + 1);
    const int cy0 = std::max(0, static_cast<int>(std::floor((zy0 - area_.bounds.min_y) / res)) - 1);
    const int cy1 = std::min(ny_ - 1, static_cast<int>(std::floor((zy1 - area_.bounds.min_y) / res)) + 1);
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        const Rect cell{area_.bounds.min_x + cx * res, area_.bounds.min_y + cy * res,
                        area_.bounds.min_x + (cx + 1) * res,
                        area_.bounds.min_y + (cy + 1) * res};
        if (zone.intersects_rect(cell)) {
          blocked_[static_cast<std::size_t>(cy) * nx_ + cx] = 1;
        }
      }
    }
  }
}

Location FlightRouter::cell_center(int cx, int cy) const {
  const double res = area_.grid_resolution;
  return {area_.bounds.min_x + (cx + 0.5) * res,
          area_.bounds.min_y + (cy + 0.5) * res};
}

double FlightRouter::distance(Location a, Location b) const {
  if (area_.inside_zone(a) || area_.inside_zone(b)) {
    throw NoRouteError("flight endpoint lies inside a no-fly zone");
  }
  if (a == b) {
    return 0.0;
  }
  if (!area_.segment_blocked(a, b)) {
    return euclidean_distance(a, b);
  }
  return grid_distance(a, b);
}

double FlightRouter::grid_distance(Location a, Location b) const {
  const double res = area_.grid_resolution;
  auto cell_of = [&](Location p) {
    int cx = static_cast<int>(std::floor((p.x - area_.bounds.min_x) / res));
    int cy = static_cast<int>(std::floor((p.y - area_.bounds.min_y) / res));
    return std::pair{std::clamp(cx, 0, nx_ - 1), std::clamp(cy, 0, ny_ - 1)};
  };
  // Endpoints attach to free cells in their 3x3 neighbourhood that are
  // reachable in a straight, zone-free line.
  auto attachments = [&](Location p) {
    std::vector<std::pair<int, double>> out;
    const auto [px, py] = cell_of(p);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int cx = px + dx;
        const int cy = py + dy;
        if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_ || blocked(cx, cy)) {
          continue;
        }
        const Location c = cell_center(cx, cy);
        if (!area_.segment_blocked(p, c)) {
          out.emplace_back(cy * nx_ + cx, euclidean_distance(p, c));
        }
      }
    }
    return out;
  };

  const auto sources = attachments(a);
  const auto targets = attachments(b);
  if (sources.empty() || targets.empty()) {
    throw NoRouteError("flight endpoint is enclosed by no-fly zones");
  }

  const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, inf);
  std::vector<double> terminal(n, inf);
  std::vector<std::uint8_t> closed(n, 0);
  for (const auto& [cell, cost] : targets) {
    terminal[cell] = std::min(terminal[cell], cost);
  }

  using Entry = std::pair<double, int>;  // (f, cell)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  auto h = [&](int cell) { return euclidean_distance(cell_center(cell % nx_, cell / nx_), b); };
  for (const auto& [cell, cost] : sources) {
    if (cost < g[cell]) {
      g[cell] = cost;
      open.emplace(cost + h(cell), cell);
    }
  }

  double best = inf;
  const double diag = res * std::sqrt(2.0);
  while (!open.empty()) {
    const auto [f, cell] = open.top();
    open.pop();
    if (f >= best) {
      break;
    }
    if (closed[cell]) {
      continue;
    }
    closed[cell] = 1;
    if (terminal[cell] < inf) {
      best = std::min(best, g[cell] + terminal[cell]);
    }
    const int cx = cell % nx_;
    const int cy = cell / nx_;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nxc = cx + dx;
        const int nyc = cy + dy;
        if (nxc < 0 || nyc < 0 || nxc >= nx_ || nyc >= ny_ || blocked(nxc, nyc)) {
          continue;
        }
        if (dx != 0 && dy != 0 && (blocked(cx + dx, cy) || blocked(cx, cy + dy))) {
          continue;
        }
        const int next = nyc * nx_ + nxc;
        if (closed[next]) continue;
        const double cand = g[cell] + ((dx != 0 && dy != 0) ? diag : res);
        if (cand < g[next]) {
          g[next] = cand;
          open.emplace(cand + h(next), next);
        }
      }
    }
  }
  if (!(best < inf)) {
    throw NoRouteError("no zone-free flight path between endpoints");
  }
  return best;
}

}  // namespace airground
