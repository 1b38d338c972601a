#pragma once

// One evaluated inequality or structural property.

#include <cmath>
#include <limits>
#include <string>

namespace ncjn {

enum class Status { kPass, kFail, kSkipped };
/// How the status was decided, so a tolerance override can re-judge it.
enum class CheckKind { kInequality, kResidual, kNone };

std::string to_string(Status s);

struct Check {
  std::string id;
  int n = 0;
  double beta = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double lhs = 0.0;
  double rhs = 0.0;
  Status status = Status::kSkipped;
  std::string note;
  CheckKind kind = CheckKind::kNone;
  double rel = 0.0;  // inequality: relative slack
  double abs = 0.0;  // inequality: absolute slack

  /// lhs / rhs when rhs > 0; 0 when both vanish; +inf otherwise.
  double ratio() const;
  bool passed() const { return status == Status::kPass; }
  bool failed() const { return status == Status::kFail; }
};

/// Pass iff lhs <= rhs * (1 + rel) + abs.
Check inequality(std::string id, double lhs, double rhs, double rel, double abs = 0.0);
/// Pass iff residual <= limit (lhs = residual, rhs = limit).
Check residual(std::string id, double residual, double limit);
Check skipped(std::string id, std::string note);

/// Re-decide the status with a new relative slack (inequalities) or a
/// multiplier on the limit (residuals); negative values leave a kind alone.
Check rejudge(Check c, double inequality_rel, double residual_scale);

}  // namespace ncjn
