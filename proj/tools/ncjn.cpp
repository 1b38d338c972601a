// ncjn: generate instances, run verifier suites, sweep corpora, summarize reports.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ncjn/errors.hpp"
#include "ncjn/report.hpp"

namespace {

using namespace ncjn;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
}

struct Overrides {
  std::vector<double> betas, ps;
  double lambda_max = -1.0;
  int lambda_steps = 0;
  std::vector<std::string> variants;
  double tol = -1.0;
  std::vector<int> check_levels;

  void add(CLI::App* app) {
    app->add_option("--beta", betas, "Lipschitz exponents (overrides the instance)")->delimiter(',');
    app->add_option("--p", ps, "moment exponents (overrides the instance)")->delimiter(',');
    app->add_option("--lambda-max", lambda_max, "lambda grid top, in units of e * ||x||");
    app->add_option("--lambda-steps", lambda_steps, "number of lambda grid points");
    app->add_option("--variant", variants, "bmo and/or conditioned")
        ->delimiter(',')
        ->check(CLI::IsMember({"bmo", "conditioned"}));
    app->add_option("--tol", tol, "relative slack for every inequality check");
    app->add_option("--check-levels", check_levels, "levels n to verify (default: all)")->delimiter(',');
  }

  void apply(RunOptions& run) const {
    if (!betas.empty()) run.betas = betas;
    if (!ps.empty()) run.ps = ps;
    if (lambda_max >= 0.0) run.lambda_max_factor = lambda_max;
    if (lambda_steps > 0) run.lambda_steps = lambda_steps;
    if (!variants.empty()) run.variants = variants;
    if (tol >= 0.0) run.tol.inequality = tol;
    if (!check_levels.empty()) run.levels = check_levels;
  }
};

std::string render(const std::vector<Record>& records, const std::string& format, const Tolerances& tol) {
  return format == "json" ? to_json(records, tol) : to_csv(records, tol);
}

int finish(const std::vector<Record>& records, const std::string& format, const std::string& out,
           const Tolerances& tol) {
  write_output(out, render(records, format, tol));
  const Summary s = summarize(records);
  std::cerr << format_summary(s) << "\n";
  return s.failed > 0 ? kExitFail : kExitOk;
}

// Minimal CSV reader for the report subcommand; handles quoted fields.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int report_csv(const std::string& path, std::ostream& os) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open report '" + path + "'");
  struct Row {
    int pass = 0, fail = 0, skipped = 0;
    double max_ratio = 0.0;
  };
  std::map<std::string, Row> rows;
  std::string line;
  std::vector<std::string> header;
  int id_col = -1, ratio_col = -1, status_col = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      os << line << "\n";
      continue;
    }
    const auto fields = split_csv_line(line);
    if (header.empty()) {
      header = fields;
      for (size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "check_id") id_col = int(i);
        if (fields[i] == "ratio") ratio_col = int(i);
        if (fields[i] == "status") status_col = int(i);
      }
      if (id_col < 0 || ratio_col < 0 || status_col < 0) throw InvalidInput("report: missing CSV columns");
      continue;
    }
    if (fields.size() != header.size()) throw InvalidInput("report: ragged CSV row");
    Row& r = rows[fields[size_t(id_col)]];
    const std::string& status = fields[size_t(status_col)];
    if (status == "pass") ++r.pass;
    else if (status == "fail") ++r.fail;
    else if (status == "skipped") ++r.skipped;
    else throw InvalidInput("report: bad status '" + status + "'");
    const std::string& ratio = fields[size_t(ratio_col)];
    if (status != "skipped" && !ratio.empty()) r.max_ratio = std::max(r.max_ratio, std::stod(ratio));
  }
  if (header.empty()) throw InvalidInput("report: empty file");
  int failures = 0;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-44s %8s %8s %8s %12s\n", "check_id", "pass", "fail", "skipped", "max_ratio");
  os << buf;
  for (const auto& [id, r] : rows) {
    std::snprintf(buf, sizeof(buf), "%-44s %8d %8d %8d %12.6g\n", id.c_str(), r.pass, r.fail, r.skipped, r.max_ratio);
    os << buf;
    failures += r.fail;
  }
  return failures > 0 ? kExitFail : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of noncommutative John-Nirenberg inequalities"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string profile = "tensor-small";
  int levels = 0;
  std::string out;
  std::string format = "csv";

  CLI::App* gen = app.add_subcommand("gen", "write a seeded instance file");
  gen->add_option("--seed", seed, "instance seed")->required();
  gen->add_option("--profile", profile, "instance profile")->check(CLI::IsMember(known_profiles()));
  gen->add_option("--levels", levels, "number of filtration levels K (default: profile choice)");
  gen->add_option("--out", out, "output path (default: stdout)");

  std::string instance_path;
  std::vector<std::string> groups;
  Overrides verify_over;
  CLI::App* verify = app.add_subcommand("verify", "run verifier groups on one instance");
  verify->add_option("instance", instance_path, "instance file; omit to generate from --seed/--profile");
  verify->add_option("--seed", seed, "instance seed when no file is given");
  verify->add_option("--profile", profile, "instance profile when no file is given")
      ->check(CLI::IsMember(known_profiles()));
  verify->add_option("--levels", levels, "number of filtration levels K when no file is given");
  verify->add_option("--checks", groups, "check groups (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember(known_groups()));
  verify_over.add(verify);
  verify->add_option("--out", out, "report path (default: stdout)");
  verify->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string config_path;
  Overrides sweep_over;
  CLI::App* sweep = app.add_subcommand("sweep", "run a corpus described by a config file");
  sweep->add_option("config", config_path, "flat key = value config")->required();
  sweep_over.add(sweep);
  sweep->add_option("--out", out, "report path (default: stdout)");
  sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string report_path;
  CLI::App* report = app.add_subcommand("report", "summarize a CSV report per check id");
  report->add_option("csv", report_path, "report file")->required();
  report->add_option("--out", out, "summary path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*gen) {
      write_output(out, serialize_instance(generate_instance(seed, profile, levels)));
      return kExitOk;
    }
    if (*verify) {
      const Instance inst =
          instance_path.empty() ? generate_instance(seed, profile, levels) : read_instance_file(instance_path);
      RunOptions run;
      if (!groups.empty()) run.groups = {groups.begin(), groups.end()};
      verify_over.apply(run);
      return finish(run_checks(inst, run), format, out, run.tol);
    }
    if (*sweep) {
      SweepConfig cfg = read_sweep_config(config_path);
      sweep_over.apply(cfg.run);
      return finish(run_sweep(cfg), format, out, cfg.run.tol);
    }
    if (*report) {
      std::ostringstream os;
      const int code = report_csv(report_path, os);
      write_output(out, os.str());
      return code;
    }
  } catch (const std::exception& e) {
    std::cerr << "ncjn: error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
