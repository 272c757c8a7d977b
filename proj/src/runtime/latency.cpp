#include "tlr/runtime/latency.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "tlr/config_error.hpp"

namespace tlr {

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& full) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string field = text.substr(start, end - start);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw ConfigError("latency '" + full + "': bad number '" + field + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace

LatencyModel LatencyModel::constant(double ms) { return {Kind::Constant, ms, ms, ms}; }
LatencyModel LatencyModel::uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, hi}; }
LatencyModel LatencyModel::lognormal(double mu, double sigma, double cap) { return {Kind::Lognormal, mu, sigma, cap}; }

LatencyModel LatencyModel::parse(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("latency '" + text + "': expected kind:values");
  const std::string kind = text.substr(0, colon);
  const std::vector<double> v = parse_numbers(text.substr(colon + 1), text);
  LatencyModel m;
  if ((kind == "const" || kind == "constant") && v.size() == 1) {
    m = constant(v[0]);
  } else if (kind == "uniform" && v.size() == 2) {
    m = uniform(v[0], v[1]);
  } else if (kind == "lognormal" && v.size() == 3) {
    m = lognormal(v[0], v[1], v[2]);
  } else {
    throw ConfigError("latency '" + text + "': expected const:L, uniform:lo,hi or lognormal:mu,sigma,cap");
  }
  m.validate();
  return m;
}

std::string LatencyModel::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::Constant:
      out << "const:" << a;
      break;
    case Kind::Uniform:
      out << "uniform:" << a << ',' << b;
      break;
    case Kind::Lognormal:
      out << "lognormal:" << a << ',' << b << ',' << cap_ms;
      break;
  }
  return out.str();
}

void LatencyModel::validate() const {
  const bool finite = std::isfinite(a) && std::isfinite(b) && std::isfinite(cap_ms);
  switch (kind) {
    case Kind::Constant:
      if (!finite || a <= 0.0) throw ConfigError("latency: constant value must be > 0 ms");
      break;
    case Kind::Uniform:
      if (!finite || a <= 0.0 || b < a) throw ConfigError("latency: uniform needs 0 < lo <= hi");
      break;
    case Kind::Lognormal:
      if (!finite || b < 0.0 || cap_ms <= 0.0) throw ConfigError("latency: lognormal needs sigma >= 0, cap > 0");
      break;
  }
}

Nanos LatencyModel::sample(std::mt19937_64& rng) const {
  double ms = a;
  switch (kind) {
    case Kind::Constant:
      break;
    case Kind::Uniform:
      ms = a == b ? a : std::uniform_real_distribution<double>(a, b)(rng);
      break;
    case Kind::Lognormal:
      ms = std::min(std::lognormal_distribution<double>(a, b)(rng), cap_ms);
      break;
  }
  return std::clamp<Nanos>(millis_to_nanos(ms), 1, millis_to_nanos(cap_ms));
}

}  // namespace tlr
