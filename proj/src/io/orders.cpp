#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "airground/io.h"
#include "airground/random.h"

namespace airground {

namespace {

constexpr const char* kOrderHeader = "t_pickup,x_pickup,y_pickup,t_dropoff,x_dropoff,y_dropoff";

double number(const std::string& f, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(f.c_str(), &end);
  if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v)) {
    throw ParseError("bad number '" + f + "'", line);
  }
  return v;
}

double timestamp(const std::string& f, std::size_t line) {
  try {
    return parse_timestamp(f);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<OrderRecord> read_orders(std::istream& in, const std::optional<Rect>& bounds) {
  std::vector<OrderRecord> out;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      auto fields = split_csv_line(line);
      std::string joined;
      for (std::size_t k = 0; k < fields.size(); ++k) joined += (k ? "," : "") + fields[k];
      if (joined != kOrderHeader) throw ParseError("unexpected orders header", n);
      header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw ParseError("expected 6 fields", n);
    OrderRecord r;
    r.t_pickup = timestamp(f[0], n);
    r.pickup = {number(f[1], n), number(f[2], n)};
    r.t_dropoff = timestamp(f[3], n);
    r.dropoff = {number(f[4], n), number(f[5], n)};
    if (r.t_dropoff < r.t_pickup) throw ParseError("dropoff before pickup", n);
    if (bounds && (!bounds->contains(r.pickup) || !bounds->contains(r.dropoff))) {
      throw OutOfBounds("location outside the service area", n);
    }
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const OrderRecord& a, const OrderRecord& b) {
    return a.t_pickup < b.t_pickup;
  });
  return out;
}

std::vector<OrderRecord> load_orders(const std::string& path, const std::optional<Rect>& bounds) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_orders(in, bounds);
}

void write_orders(std::ostream& out, const std::vector<OrderRecord>& orders) {
  out << kOrderHeader << '\n';
  for (const auto& r : orders) {
    out << fmt(r.t_pickup) << ',' << fmt(r.pickup.x) << ',' << fmt(r.pickup.y) << ','
        << fmt(r.t_dropoff) << ',' << fmt(r.dropoff.x) << ',' << fmt(r.dropoff.y) << '\n';
  }
}

std::vector<Parcel> parcels_from_orders(const std::vector<OrderRecord>& orders,
                                        std::uint64_t seed, double weight_lo,
                                        double weight_hi) {
  if (!(weight_lo > 0.0) || weight_hi < weight_lo) {
    throw InvalidConfig("parcel weights need 0 < lo <= hi");
  }
  std::vector<Parcel> out;
  out.reserve(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    Parcel p;
    p.id = static_cast<int>(i);
    p.t_order = orders[i].t_pickup;
    p.pickup = orders[i].pickup;
    p.dropoff = orders[i].dropoff;
    Rng rng(derive_seed(seed, i));
    p.weight = rng.uniform(weight_lo, weight_hi);
    out.push_back(p);
  }
  return out;
}

}  // namespace airground
