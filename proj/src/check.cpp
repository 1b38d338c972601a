#include "ncjn/check.hpp"

namespace ncjn {

std::string to_string(Status s) {
  switch (s) {
    case Status::kPass: return "pass";
    case Status::kFail: return "fail";
    case Status::kSkipped: return "skipped";
  }
  return "?";
}

double Check::ratio() const {
  if (rhs > 0.0) return lhs / rhs;
  return lhs <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

Check inequality(std::string id, double lhs, double rhs, double rel, double abs) {
  Check c;
  c.id = std::move(id);
  c.lhs = lhs;
  c.rhs = rhs;
  c.kind = CheckKind::kInequality;
  c.rel = rel;
  c.abs = abs;
  c.status = lhs <= rhs * (1.0 + rel) + abs ? Status::kPass : Status::kFail;
  return c;
}

Check residual(std::string id, double value, double limit) {
  Check c;
  c.id = std::move(id);
  c.lhs = value;
  c.rhs = limit;
  c.kind = CheckKind::kResidual;
  c.status = value <= limit ? Status::kPass : Status::kFail;
  return c;
}

Check skipped(std::string id, std::string note) {
  Check c;
  c.id = std::move(id);
  c.status = Status::kSkipped;
  c.note = std::move(note);
  return c;
}

Check rejudge(Check c, double inequality_rel, double residual_scale) {
  if (c.kind == CheckKind::kInequality && inequality_rel >= 0.0) {
    c.rel = inequality_rel;
    c.status = c.lhs <= c.rhs * (1.0 + c.rel) + c.abs ? Status::kPass : Status::kFail;
  } else if (c.kind == CheckKind::kResidual && residual_scale >= 0.0) {
    c.rhs *= residual_scale;
    c.status = c.lhs <= c.rhs ? Status::kPass : Status::kFail;
  }
  return c;
}

}  // namespace ncjn
