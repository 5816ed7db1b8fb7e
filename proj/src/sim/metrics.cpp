#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <map>

#include "airground/sim.h"

namespace airground {

void finalize_metrics(Metrics& m) {
  double sum = 0.0;
  for (double v : m.delivery_minutes) sum += v;
  m.mean_delivery_minutes =
      m.delivery_minutes.empty() ? 0.0 : sum / static_cast<double>(m.delivery_minutes.size());
  m.total_cost = m.courier_cost + m.gv_cost;
  m.courier_share = m.gv_share = 0.0;
  if (m.total_cost > 0) {
    m.courier_share = 100.0 * m.courier_cost / m.total_cost;
    m.gv_share = 100.0 * m.gv_cost / m.total_cost;
  }
  m.taxi_price.reset();
  if (m.delivered_gv > 0) m.taxi_price = m.gv_cost / static_cast<double>(m.delivered_gv);
}

namespace {

struct Line {
  double t = 0.0;
  std::string kind;
  std::string entity;
  std::map<std::string, std::string> fields;
};

[[noreturn]] void corrupt(std::size_t n, const std::string& why) {
  throw CorruptLog("log line " + std::to_string(n + 1) + ": " + why);
}

double number(const std::string& s, std::size_t n) {
  if (s.empty()) corrupt(n, "empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (*end != '\0' || errno == ERANGE || !std::isfinite(v)) corrupt(n, "bad number '" + s + "'");
  return v;
}

Line parse(const std::string& text, std::size_t n) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto tab = text.find('\t', start);
    parts.push_back(text.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (parts.size() < 3) corrupt(n, "expected time, kind and entity");
  Line l;
  l.t = number(parts[0], n);
  l.kind = parts[1];
  l.entity = parts[2];
  for (std::size_t i = 3; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos || eq == 0) corrupt(n, "bad field '" + parts[i] + "'");
    l.fields[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
  }
  return l;
}

const std::string& field(const Line& l, const char* key, std::size_t n) {
  const auto it = l.fields.find(key);
  if (it == l.fields.end()) corrupt(n, std::string("missing field ") + key);
  return it->second;
}

int parcel_id(const Line& l, std::size_t n) {
  const std::string prefix = "parcel:";
  if (l.entity.rfind(prefix, 0) != 0) corrupt(n, l.kind + " without a parcel entity");
  const std::string digits = l.entity.substr(prefix.size());
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    corrupt(n, "bad parcel id '" + digits + "'");
  }
  return std::stoi(digits);
}

AgentKind agent_kind(const std::string& ref, std::size_t n) {
  const auto colon = ref.find(':');
  if (colon == std::string::npos) corrupt(n, "bad agent '" + ref + "'");
  try {
    return agent_kind_from_string(ref.substr(0, colon));
  } catch (const std::invalid_argument&) {
    corrupt(n, "bad agent '" + ref + "'");
  }
}

enum class Seen : std::uint8_t { Ordered, Assigned, Delivered, Failed };

}  // namespace

Metrics collect_metrics(const std::vector<std::string>& log) {
  Metrics m;
  std::map<int, Seen> parcels;
  double last_t = -INFINITY;
  for (std::size_t n = 0; n < log.size(); ++n) {
    const Line l = parse(log[n], n);
    if (l.t < last_t) corrupt(n, "time runs backwards");
    last_t = l.t;
    if (l.kind == "order") {
      const int id = parcel_id(l, n);
      if (!parcels.emplace(id, Seen::Ordered).second) corrupt(n, "parcel ordered twice");
      ++m.ordered;
    } else if (l.kind == "assign") {
      const auto it = parcels.find(parcel_id(l, n));
      if (it == parcels.end() || it->second != Seen::Ordered) corrupt(n, "assignment of a non-pending parcel");
      it->second = Seen::Assigned;
    } else if (l.kind == "pickup") {
      const auto it = parcels.find(parcel_id(l, n));
      if (it == parcels.end() || it->second != Seen::Assigned) corrupt(n, "pick-up of an unassigned parcel");
    } else if (l.kind == "deliver") {
      const auto it = parcels.find(parcel_id(l, n));
      if (it == parcels.end() || it->second != Seen::Assigned) corrupt(n, "delivery of an unassigned parcel");
      it->second = Seen::Delivered;
      const double t_order = number(field(l, "t_order", n), n);
      const double raw = number(field(l, "raw", n), n);
      if (l.t < t_order) corrupt(n, "delivered before ordering");
      ++m.delivered;
      m.delivery_minutes.push_back((l.t - t_order) / 60.0);
      switch (agent_kind(field(l, "agent", n), n)) {
        case AgentKind::Uav:
          ++m.delivered_uav;
          m.uav_seconds += raw;
          break;
        case AgentKind::Courier:
          ++m.delivered_courier;
          m.courier_cost += raw;
          break;
        case AgentKind::Gv:
          ++m.delivered_gv;
          m.gv_cost += raw;
          break;
      }
    } else if (l.kind == "fail") {
      const auto it = parcels.find(parcel_id(l, n));
      if (it == parcels.end() || it->second != Seen::Ordered) corrupt(n, "failure of a non-pending parcel");
      it->second = Seen::Failed;
      ++m.failed;
    } else if (l.kind == "trip_start" || l.kind == "trip_end" || l.kind == "end") {
      // Not part of the delivery metrics.
    } else {
      corrupt(n, "unknown record kind '" + l.kind + "'");
    }
  }
  m.pending = m.ordered - m.delivered - m.failed;
  finalize_metrics(m);
  return m;
}

}  // namespace airground
