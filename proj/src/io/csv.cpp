#include <cctype>
#include <cmath>
#include <cstdlib>

#include "airground/io.h"

namespace airground {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    std::size_t a = 0;
    std::size_t b = f.size();
    while (a < b && std::isspace(static_cast<unsigned char>(f[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(f[b - 1]))) --b;
    f = f.substr(a, b - a);
  }
  return out;
}

bool looks_like_iso8601(const std::string& f) {
  return f.size() >= 19 && f[4] == '-' && f[7] == '-' && (f[10] == 'T' || f[10] == ' ') &&
         f[13] == ':' && f[16] == ':';
}

namespace {

// Days since 1970-01-01 of a proleptic Gregorian date.
long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

int digits(const std::string& s, std::size_t pos, std::size_t n) {
  int v = 0;
  for (std::size_t k = pos; k < pos + n; ++k) {
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) {
      throw std::invalid_argument("bad timestamp '" + s + "'");
    }
    v = v * 10 + (s[k] - '0');
  }
  return v;
}

}  // namespace

double parse_timestamp(const std::string& f) {
  if (looks_like_iso8601(f)) {
    const long y = digits(f, 0, 4);
    const int mo = digits(f, 5, 2);
    const int d = digits(f, 8, 2);
    const int h = digits(f, 11, 2);
    const int mi = digits(f, 14, 2);
    const int s = digits(f, 17, 2);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
      throw std::invalid_argument("bad timestamp '" + f + "'");
    }
    double frac = 0.0;
    std::size_t pos = 19;
    if (pos < f.size() && f[pos] == '.') {
      std::size_t end = pos + 1;
      while (end < f.size() && std::isdigit(static_cast<unsigned char>(f[end]))) ++end;
      frac = std::strtod(f.substr(pos, end - pos).c_str(), nullptr);
      pos = end;
    }
    if (pos < f.size() && !(f.substr(pos) == "Z" || f.substr(pos) == "z")) {
      throw std::invalid_argument("unsupported timestamp suffix in '" + f + "'");
    }
    return static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 +
           mi * 60.0 + s + frac;
  }
  char* end = nullptr;
  const double v = std::strtod(f.c_str(), &end);
  if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad timestamp '" + f + "'");
  }
  return v;
}

int day_of(double t, double origin) {
  return static_cast<int>(std::floor((t - origin) / 86400.0)) + 1;
}

bool is_training_day(int day) { return day >= 1 && day <= 23; }

}  // namespace airground
