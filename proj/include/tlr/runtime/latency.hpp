#pragma once

#include <random>
#include <string>

#include "tlr/time.hpp"

namespace tlr {

/// Distribution of simulated solve durations, in milliseconds.
struct LatencyModel {
  enum class Kind { Constant, Uniform, Lognormal };

  Kind kind = Kind::Constant;
  double a = 25.0;  // Constant: value; Uniform: low; Lognormal: mu of log(ms)
  double b = 25.0;  // Uniform: high; Lognormal: sigma
  double cap_ms = 25.0;

  static LatencyModel constant(double ms);
  static LatencyModel uniform(double lo_ms, double hi_ms);
  static LatencyModel lognormal(double mu, double sigma, double cap_ms);

  /// Parses `const:25`, `uniform:15,25` or `lognormal:mu,sigma,cap`.
  /// Throws ConfigError.
  static LatencyModel parse(const std::string& text);
  std::string to_string() const;

  void validate() const;
  /// A sample in (0, cap], rounded to whole nanoseconds.
  Nanos sample(std::mt19937_64& rng) const;
};

}  // namespace tlr
