#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "ncjn/errors.hpp"
#include "ncjn/instance.hpp"
#include "ncjn/report.hpp"

using namespace ncjn;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Drops the trailing wall-time column.
std::string without_wall_time(const std::string& csv) {
  std::string out;
  for (const std::string& l : lines(csv)) out += l.substr(0, l.rfind(',')) + "\n";
  return out;
}

RunOptions quick(std::set<std::string> groups) {
  RunOptions run;
  run.groups = std::move(groups);
  run.betas = std::vector<double>{0.0, 0.5};
  run.ps = std::vector<double>{1.0, 2.0};
  run.lambda_steps = 8;
  return run;
}

}  // namespace

TEST(Instance, RoundTripIsBitExact) {
  for (const std::string& profile : known_profiles()) {
    const Instance inst = generate_instance(3, profile);
    const std::string text = serialize_instance(inst);
    const Instance back = parse_instance(text);
    EXPECT_EQ(serialize_instance(back), text) << profile;
    EXPECT_TRUE((back.x.array() == inst.x.array()).all()) << profile;
    EXPECT_EQ(back.levels, inst.levels);
    EXPECT_EQ(back.kind, inst.kind);
  }
}

TEST(Instance, SameSeedSameBytes) {
  for (const std::string& profile : known_profiles()) {
    EXPECT_EQ(serialize_instance(generate_instance(42, profile)), serialize_instance(generate_instance(42, profile)));
    EXPECT_NE(serialize_instance(generate_instance(42, profile)), serialize_instance(generate_instance(43, profile)));
  }
}

TEST(Instance, ProfileShapes) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance d = generate_instance(seed, "dyadic");
    EXPECT_TRUE(is_diagonal(d.x));
    EXPECT_NE(serialize_instance(d).find("\"diagonal\""), std::string::npos);
    EXPECT_LE(generate_instance(seed, "tensor-small").x.rows(), 16);
    const Instance a = generate_instance(seed, "adversarial-sparse");
    if (a.kind == FiltrationKind::kDyadic) EXPECT_TRUE(is_diagonal(a.x));
  }
  EXPECT_THROW(generate_instance(1, "huge"), InvalidInput);
  EXPECT_EQ(generate_instance(1, "dyadic", 3).x.rows(), 8);
}

TEST(Instance, CorruptedInputThrows) {
  const std::string good = serialize_instance(generate_instance(5, "tensor-small"));
  EXPECT_THROW(parse_instance(good.substr(0, good.size() / 2)), InvalidInput);
  EXPECT_THROW(parse_instance("[]"), InvalidInput);
  nlohmann::json j = nlohmann::json::parse(good);
  auto expect_bad = [](nlohmann::json v) { EXPECT_THROW(parse_instance(v.dump()), InvalidInput) << v.dump(); };
  {
    auto v = j;
    v["version"] = 2;
    expect_bad(v);
  }
  {
    auto v = j;
    v["operator"]["dim"] = 3;
    expect_bad(v);
  }
  {
    auto v = j;
    v["operator"]["entries"][0] = {"a", 0};
    expect_bad(v);
  }
  {
    auto v = j;
    v["operator"]["entries"].erase(0);
    expect_bad(v);
  }
  {
    auto v = j;
    v["filtration"]["kind"] = "free";
    expect_bad(v);
  }
  {
    auto v = j;
    v["filtration"]["kind"] = "dyadic";
    expect_bad(v);  // dense storage for a dyadic instance
  }
  {
    auto v = j;
    v["operator"]["entries"][0] = {nullptr, 0.0};
    expect_bad(v);
  }
}

TEST(Check, RatioAndRejudge) {
  Check c = inequality("x", 2.0, 4.0, 0.0);
  EXPECT_DOUBLE_EQ(c.ratio(), 0.5);
  EXPECT_TRUE(c.passed());
  EXPECT_DOUBLE_EQ(inequality("x", 0.0, 0.0, 0.0).ratio(), 0.0);
  EXPECT_TRUE(std::isinf(inequality("x", 1.0, 0.0, 0.0).ratio()));
  const Check tight = inequality("x", 1.0 + 1e-9, 1.0, 1e-8);
  EXPECT_TRUE(tight.passed());
  EXPECT_TRUE(rejudge(tight, 0.0, -1.0).failed());
  const Check r = residual("r", 2e-9, 1e-9);
  EXPECT_TRUE(r.failed());
  EXPECT_TRUE(rejudge(r, -1.0, 10.0).passed());
  EXPECT_TRUE(rejudge(skipped("s", "why"), 0.0, 0.0).status == Status::kSkipped);
}

TEST(Report, CsvHeaderAndRatioColumn) {
  const std::vector<Record> recs = run_checks(generate_instance(1, "tensor-small", 2), quick({"distribution"}));
  ASSERT_FALSE(recs.empty());
  const auto ls = lines(to_csv(recs));
  EXPECT_EQ(ls[0], "check_id,seed,n,beta,p,lambda,lhs,rhs,ratio,status,wall_time_ms");
  ASSERT_EQ(ls.size(), recs.size() + 1);
  for (size_t i = 1; i < ls.size(); ++i) {
    const auto cells = split(ls[i]);
    ASSERT_EQ(cells.size(), 11u) << ls[i];
    const double lhs = std::stod(cells[6]), rhs = std::stod(cells[7]);
    if (rhs > 0.0) EXPECT_DOUBLE_EQ(std::stod(cells[8]), lhs / rhs);
    EXPECT_EQ(cells[1], "1");
  }
}

TEST(Report, ToleranceOverridesRecordedInHeader) {
  Tolerances tol;
  tol.inequality = 0.0;
  const std::string csv = to_csv({}, tol);
  EXPECT_EQ(csv.rfind("# ", 0), 0u);
  EXPECT_NE(csv.find("check_id,seed"), std::string::npos);
  const auto j = nlohmann::json::parse(to_json({}, tol));
  EXPECT_EQ(j["tolerances"]["inequality"], 0.0);
}

TEST(Report, ZeroInstancePassesEverything) {
  Instance inst = generate_instance(2, "tensor-small", 2);
  inst.x.setZero();
  for (const Record& r : run_checks(inst, quick({known_groups().begin(), known_groups().end()})))
    EXPECT_FALSE(r.check.failed() && r.check.id.find("literal") == std::string::npos) << r.check.id;
}

TEST(Report, RecordsSortedByCheckId) {
  const std::vector<Record> recs = run_checks(generate_instance(4, "dyadic", 4), quick({"distribution", "classical"}));
  for (size_t i = 1; i < recs.size(); ++i) EXPECT_LE(recs[i - 1].check.id, recs[i].check.id);
}

TEST(Report, SummaryCounts) {
  std::vector<Record> recs(3);
  recs[0].check = inequality("a", 1.0, 2.0, 0.0);
  recs[1].check = inequality("b", 3.0, 2.0, 0.0);
  recs[2].check = skipped("c", "");
  const Summary s = summarize(recs);
  EXPECT_EQ(s.total, 3);
  EXPECT_EQ(s.passed, 1);
  EXPECT_EQ(s.failed, 1);
  EXPECT_EQ(s.skipped, 1);
  EXPECT_DOUBLE_EQ(s.max_ratio, 1.5);
  EXPECT_EQ(s.max_ratio_id, "b");
}

TEST(SweepConfig, ParsesKeys) {
  const SweepConfig cfg = parse_sweep_config(
      "# corpus\n"
      "seeds = 1..3, 7\n"
      "profiles = dyadic, tensor-small\n"
      "groups = distribution\n"
      "beta = 0, 0.5   # two values\n"
      "lambda_steps = 12\n"
      "tol.inequality = 1e-6\n"
      "threads = 2\n");
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2, 3, 7}));
  EXPECT_EQ(cfg.profiles, (std::vector<std::string>{"dyadic", "tensor-small"}));
  EXPECT_EQ(cfg.run.groups, (std::set<std::string>{"distribution"}));
  EXPECT_EQ(*cfg.run.betas, (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(*cfg.run.lambda_steps, 12);
  EXPECT_DOUBLE_EQ(*cfg.run.tol.inequality, 1e-6);
  EXPECT_EQ(cfg.threads, 2);
}

TEST(SweepConfig, RejectsBadInput) {
  EXPECT_THROW(parse_sweep_config("bogus = 1\n"), InvalidInput);
  EXPECT_THROW(parse_sweep_config("seeds\n"), InvalidInput);
  EXPECT_THROW(parse_sweep_config("seeds = 5..1\n"), InvalidInput);
  EXPECT_THROW(parse_sweep_config("profiles = nope\n"), InvalidInput);
  EXPECT_THROW(parse_sweep_config("groups = nope\n"), InvalidInput);
  EXPECT_THROW(parse_sweep_config("beta = x\n"), InvalidInput);
}

TEST(Sweep, EmptySeedListGivesHeaderOnly) {
  SweepConfig cfg;
  const std::vector<Record> recs = run_sweep(cfg);
  EXPECT_TRUE(recs.empty());
  EXPECT_EQ(to_csv(recs), "check_id,seed,n,beta,p,lambda,lhs,rhs,ratio,status,wall_time_ms\n");
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
  SweepConfig cfg = parse_sweep_config("seeds = 1..4\nprofiles = tensor-small, dyadic\ngroups = distribution\n"
                                       "beta = 0.25\nlambda_steps = 6\n");
  cfg.threads = 1;
  const std::string one = without_wall_time(to_csv(run_sweep(cfg)));
  cfg.threads = 3;
  const std::string three = without_wall_time(to_csv(run_sweep(cfg)));
  EXPECT_EQ(one, three);
  const auto ls = lines(one);
  for (size_t i = 2; i < ls.size(); ++i) {
    const auto a = split(ls[i - 1]), b = split(ls[i]);
    EXPECT_TRUE(std::stoull(a[1]) < std::stoull(b[1]) || (a[1] == b[1] && a[0] <= b[0]));
  }
}
