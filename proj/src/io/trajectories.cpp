#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "airground/io.h"
#include "airground/random.h"

namespace airground {

namespace {

constexpr const char* kPlanarHeader = "vehicle_id,t,x,y,occupied,speed,heading";
constexpr const char* kGeoHeader = "vehicle_id,t,lon,lat,occupied,speed,heading";

double number(const std::string& f, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(f.c_str(), &end);
  if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v)) {
    throw ParseError("bad number '" + f + "'", line);
  }
  return v;
}

bool flag(const std::string& f, std::size_t line) {
  if (f == "1" || f == "true") return true;
  if (f == "0" || f == "false") return false;
  throw ParseError("bad passenger status '" + f + "'", line);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<TrajectoryRecord> read_trajectories(std::istream& in,
                                                const std::optional<GeoAnchor>& anchor) {
  std::vector<TrajectoryRecord> out;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t n = 0;
  int format = -1;  // 0 planar, 1 lon/lat
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (format < 0) {
      std::string joined;
      for (std::size_t k = 0; k < f.size(); ++k) joined += (k ? "," : "") + f[k];
      if (joined == kPlanarHeader) {
        format = 0;
      } else if (joined == kGeoHeader) {
        format = 1;
      } else {
        throw ParseError("unexpected trajectories header", n);
      }
      continue;
    }
    if (f.size() != 7) throw ParseError("expected 7 fields", n);
    if (f[0].empty()) throw ParseError("empty vehicle id", n);
    TrajectoryRecord r;
    r.vehicle = f[0];
    try {
      r.t = parse_timestamp(f[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), n);
    }
    r.l = {number(f[2], n), number(f[3], n)};
    r.occupied = flag(f[4], n);
    r.speed = number(f[5], n);
    r.heading = number(f[6], n);
    out.push_back(std::move(r));
    lines.push_back(n);
  }
  if (format == 1 && !out.empty()) {
    GeoAnchor a;
    if (anchor) {
      a = *anchor;
    } else {
      // Centre of the recorded extent.
      double lo_lon = out[0].l.x, hi_lon = out[0].l.x, lo_lat = out[0].l.y, hi_lat = out[0].l.y;
      for (const auto& r : out) {
        lo_lon = std::min(lo_lon, r.l.x);
        hi_lon = std::max(hi_lon, r.l.x);
        lo_lat = std::min(lo_lat, r.l.y);
        hi_lat = std::max(hi_lat, r.l.y);
      }
      a = {0.5 * (lo_lat + hi_lat), 0.5 * (lo_lon + hi_lon)};
    }
    for (auto& r : out) r.l = project_equirectangular(r.l.y, r.l.x, a.lat, a.lon);
  }
  std::map<std::string, double> last;
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto it = last.find(out[k].vehicle);
    if (it != last.end() && out[k].t < it->second) {
      throw ParseError("timestamps go backwards for vehicle " + out[k].vehicle, lines[k]);
    }
    last[out[k].vehicle] = out[k].t;
  }
  return out;
}

void write_trajectories(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  out << kPlanarHeader << '\n';
  for (const auto& r : records) {
    out << r.vehicle << ',' << fmt(r.t) << ',' << fmt(r.l.x) << ',' << fmt(r.l.y) << ','
        << (r.occupied ? 1 : 0) << ',' << fmt(r.speed) << ',' << fmt(r.heading) << '\n';
  }
}

std::vector<VehicleTrace> group_traces(const std::vector<TrajectoryRecord>& records) {
  std::map<std::string, std::vector<TrajectoryRecord>> by_id;
  for (const auto& r : records) {
    auto& v = by_id[r.vehicle];
    if (!v.empty() && r.t < v.back().t) {
      throw ParseError("timestamps go backwards for vehicle " + r.vehicle, 0);
    }
    v.push_back(r);
  }
  std::vector<VehicleTrace> out;
  out.reserve(by_id.size());
  for (auto& [id, recs] : by_id) out.push_back({id, std::move(recs)});
  return out;
}

std::vector<Trip> segment_trips(const VehicleTrace& trace) {
  std::vector<Trip> trips;
  std::optional<Trip> open;
  bool prev = true;  // an initial occupied stretch is an incomplete trip
  bool seen = false;
  for (const auto& r : trace.records) {
    if (seen && !prev && r.occupied) {
      open = Trip{r.l, r.l, r.t, r.t};
    } else if (seen && prev && !r.occupied && open) {
      open->destination = r.l;
      open->end = r.t;
      trips.push_back(*open);
      open.reset();
    }
    prev = r.occupied;
    seen = true;
  }
  return trips;
}

std::vector<std::size_t> sample_vehicles(std::size_t vehicle_count, double ratio,
                                         std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidConfig("participation ratio must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(vehicle_count)));
  std::vector<std::size_t> idx(vehicle_count);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(std::min(k, vehicle_count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<GvState> gvs_from_records(const std::vector<TrajectoryRecord>& records,
                                      double ratio, std::uint64_t seed, double gv_speed) {
  const auto traces = group_traces(records);
  const auto chosen = sample_vehicles(traces.size(), ratio, seed);
  std::vector<GvState> out;
  out.reserve(chosen.size());
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const auto& trace = traces[chosen[k]];
    GvState g;
    g.id = static_cast<int>(k);
    g.speed = gv_speed;
    g.trips = segment_trips(trace);
    // Free from the first record without a passenger, else from the last.
    auto free = std::find_if(trace.records.begin(), trace.records.end(),
                             [](const TrajectoryRecord& r) { return !r.occupied; });
    const auto& start = free != trace.records.end() ? *free : trace.records.back();
    g.location = start.l;
    g.available_from = start.t;
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GvState> load_trajectories(const std::string& path, double ratio,
                                       std::uint64_t seed, double gv_speed,
                                       const std::optional<GeoAnchor>& anchor) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return gvs_from_records(read_trajectories(in, anchor), ratio, seed, gv_speed);
}

}  // namespace airground
