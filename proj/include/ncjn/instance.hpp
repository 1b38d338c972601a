#pragma once

// Seeded problem instances and their JSON file format.

#include <cstdint>
#include <string>
#include <vector>

#include "ncjn/algebra.hpp"

namespace ncjn {

inline constexpr const char* kInstanceFormat = "ncjn-instance";
inline constexpr int kInstanceVersion = 1;

struct InstanceParams {
  std::vector<int> levels;  // empty: every level 1..K
  std::vector<double> betas = {0.0, 0.25, 0.5};
  std::vector<double> ps = {0.5, 1.0, 2.0, 3.0, 4.0, 6.0};
  /// Grid runs from 0 to lambda_max_factor * e * ||x|| in lambda_steps points.
  double lambda_max_factor = 10.0;
  int lambda_steps = 40;
  std::vector<std::string> variants = {"bmo", "conditioned"};
  /// "atoms+kyfan": identity, one atom, a random atom union, the Ky Fan witness.
  std::string projection_rule = "atoms+kyfan";
};

struct Instance {
  std::uint64_t seed = 0;
  std::string profile;
  FiltrationKind kind = FiltrationKind::kTensor;
  int levels = 1;
  Operator x;
  InstanceParams params;

  bool diagonal() const { return kind == FiltrationKind::kDyadic; }
};

std::vector<std::string> known_profiles();

/// levels_override > 0 replaces the profile's choice of K.
Instance generate_instance(std::uint64_t seed, const std::string& profile, int levels_override = 0);

std::string serialize_instance(const Instance& inst);
/// Throws InvalidInput on malformed text.
Instance parse_instance(const std::string& text);

Instance read_instance_file(const std::string& path);
void write_instance_file(const Instance& inst, const std::string& path);

}  // namespace ncjn
