#pragma once

// Suite orchestration over instances and the CSV / JSON report stream.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ncjn/check.hpp"
#include "ncjn/instance.hpp"
#include "ncjn/norms.hpp"

namespace ncjn {

/// distribution, exponential, moment, amplified, cuculescu, chain, atoms, classical.
const std::vector<std::string>& known_groups();

struct Tolerances {
  /// Replaces the relative slack of every inequality check.
  std::optional<double> inequality;
  /// Multiplies the limit of every residual check.
  std::optional<double> residual_scale;

  bool any() const { return inequality || residual_scale; }
};

struct RunOptions {
  std::set<std::string> groups = {known_groups().begin(), known_groups().end()};
  // Instance parameters are used unless overridden here.
  std::optional<std::vector<int>> levels;
  std::optional<std::vector<double>> betas;
  std::optional<std::vector<double>> ps;
  std::optional<double> lambda_max_factor;
  std::optional<int> lambda_steps;
  std::optional<std::vector<std::string>> variants;
  /// Largest N - n for amplified systems.
  int amplified_span = 4;
  Tolerances tol;
  SearchOptions search;
};

struct Record {
  std::uint64_t seed = 0;
  std::string profile;
  Check check;
  double wall_ms = 0.0;
};

/// Runs the selected groups on one instance. Records come back sorted by check id.
std::vector<Record> run_checks(const Instance& inst, const RunOptions& options);

/// Stable sort by (seed, check id).
void sort_records(std::vector<Record>& records);

struct Summary {
  int total = 0, passed = 0, failed = 0, skipped = 0;
  double max_ratio = 0.0;  // over non-skipped inequality checks
  std::string max_ratio_id;
};

Summary summarize(const std::vector<Record>& records);
std::string format_summary(const Summary& s);

/// Header line plus one row per record; '#' lines first for tolerance overrides.
std::string to_csv(const std::vector<Record>& records, const Tolerances& tol = {});
std::string to_json(const std::vector<Record>& records, const Tolerances& tol = {});

struct SweepConfig {
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> profiles = {"tensor-small"};
  int levels = 0;  // 0: the profile's choice
  RunOptions run;
  /// 0: NCJN_THREADS, falling back to the hardware concurrency.
  int threads = 0;
};

/// Flat key = value text; '#' starts a comment. Throws InvalidInput.
SweepConfig parse_sweep_config(const std::string& text);
SweepConfig read_sweep_config(const std::string& path);

/// Worker count from NCJN_THREADS (at least 1).
int worker_threads(int requested = 0);

std::vector<Record> run_sweep(const SweepConfig& config);

}  // namespace ncjn
