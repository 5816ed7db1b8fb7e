#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "airground/preference.h"

namespace airground {

namespace {

constexpr const char* kHeader = "t_order,x,y,detour_km,speed,dist_km,cost,payload,n_max,t_re,accepted";
constexpr std::size_t kColumns = 11;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Empty cells read as NaN; anything else must parse completely.
double cell(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (*end != '\0') {
    throw MalformedRecord("courier log line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<CourierLogRecord> read_courier_log(std::istream& in) {
  std::string text;
  if (!std::getline(in, text) || trim(text) != kHeader) {
    throw MalformedRecord(std::string("courier log must start with '") + kHeader + "'");
  }
  std::vector<CourierLogRecord> out;
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(part);
    if (!text.empty() && text.back() == ',') parts.emplace_back();
    if (parts.size() != kColumns) {
      throw MalformedRecord("courier log line " + std::to_string(line) + ": expected " +
                            std::to_string(kColumns) + " fields");
    }
    double v[kColumns];
    for (std::size_t i = 0; i < kColumns; ++i) v[i] = cell(parts[i], line);
    CourierLogRecord r{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], -1};
    // A missing or non-binary label is kept as -1 and rejected on extraction.
    if (v[10] == 0.0 || v[10] == 1.0) r.accepted = static_cast<int>(v[10]);
    out.push_back(r);
  }
  return out;
}

void write_courier_log(std::ostream& out, const std::vector<CourierLogRecord>& log) {
  out << kHeader << '\n';
  char buf[48];
  auto num = [&](double v) -> const char* {
    if (std::isnan(v)) return "";
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& r : log) {
    const double fields[] = {r.t_order, r.x,    r.y,       r.detour_km, r.speed,
                             r.dist_km, r.cost, r.payload, r.n_max,     r.t_re};
    for (double f : fields) out << num(f) << ',';
    out << r.accepted << '\n';
  }
}

}  // namespace airground
