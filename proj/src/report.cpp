#include "ncjn/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ncjn/classical.hpp"
#include "ncjn/errors.hpp"
#include "ncjn/johnnirenberg.hpp"

namespace ncjn {

namespace {

constexpr double kE = 2.718281828459045235360287;
constexpr double kOracleTolerance = 1e-9;
constexpr std::uint64_t kTagCandidates = 0x63616e64;
constexpr std::uint64_t kTagAtoms = 0x61746f6d;
constexpr std::uint64_t kTagClassical = 0x636c6173;
constexpr std::uint64_t kTagSearch = 0x73726368;
constexpr std::uint64_t kTagChain = 0x63686e;

using Clock = std::chrono::steady_clock;

// "moment.upper-unit" + bmo -> "moment.bmo.upper-unit"; "distribution" -> "distribution.bmo".
std::string with_variant(const std::string& id, Variant v) {
  const size_t dot = id.find('.');
  if (dot == std::string::npos) return id + "." + to_string(v);
  return id.substr(0, dot) + "." + to_string(v) + id.substr(dot);
}

std::string join_note(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + " " + b;
}

struct Candidate {
  std::string label;
  Projection P;
};

Operator selection(int a, const std::vector<int>& idx) {
  Operator u = Operator::Zero(a, Eigen::Index(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) u(idx[j], Eigen::Index(j)) = 1.0;
  return u;
}

Operator random_rep_isometry(const Subalgebra& level, int rank, Rng& rng) {
  const int a = level.representative_dim();
  if (!level.is_commutative()) return haar_isometry(a, rank, rng);
  std::vector<int> idx(static_cast<size_t>(a));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng.engine());
  idx.resize(size_t(rank));
  std::sort(idx.begin(), idx.end());
  return selection(a, idx);
}

// identity, a single atom, a random union of atoms, the Ky Fan witness of E_n Q^2.
std::vector<Candidate> projection_candidates(const Filtration& f, int n, const Operator& q2, double beta, Rng& rng) {
  const Subalgebra& level = f.level(n);
  const int a = level.representative_dim();
  std::vector<Candidate> out;
  out.push_back({"identity", Projection::identity(f.dim())});
  out.push_back({"atom", level.lift_projection(random_rep_isometry(level, 1, rng))});
  out.push_back({"union", level.lift_projection(random_rep_isometry(level, rng.uniform_int(1, a), rng))});
  out.push_back({"kyfan", ky_fan_sup(level, level.expect(q2), beta).witness});
  return out;
}

struct Context {
  const Instance& inst;
  const RunOptions& opt;
  FiltrationPtr f;
  Martingale m;
  std::vector<int> levels;
  std::vector<double> betas;
  std::vector<double> ps;
  double lambda_factor;
  int lambda_steps;
  std::vector<Variant> variants;
  std::vector<Record> records;

  Context(const Instance& i, const RunOptions& o, FiltrationPtr filt)
      : inst(i), opt(o), f(filt), m(filt, i.x) {}

  bool wants(const char* group) const { return opt.groups.count(group) > 0; }

  void emit(std::vector<Check> checks, Clock::time_point start) {
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    const double each = checks.empty() ? 0.0 : ms / double(checks.size());
    for (Check& c : checks) {
      if (opt.tol.any())
        c = rejudge(std::move(c), opt.tol.inequality.value_or(-1.0), opt.tol.residual_scale.value_or(-1.0));
      records.push_back({inst.seed, inst.profile, std::move(c), each});
    }
  }

  // Norm cache per (variant, beta).
  std::vector<std::pair<std::pair<int, double>, double>> norms;
  double norm(Variant v, double beta) {
    for (const auto& [key, value] : norms)
      if (key.first == int(v) && key.second == beta) return value;
    const double value = base_norm(m, beta, v).value;
    norms.push_back({{int(v), beta}, value});
    return value;
  }
};

std::vector<double> lambda_grid(double max, int steps) {
  std::vector<double> out;
  if (steps <= 1) {
    out.push_back(0.0);
    return out;
  }
  for (int i = 0; i < steps; ++i) out.push_back(max * double(i) / double(steps - 1));
  return out;
}

void tag(Check& c, int n, double beta, Variant v, const std::string& note) {
  c.id = with_variant(c.id, v);
  if (c.n == 0) c.n = n;
  if (std::isnan(c.beta)) c.beta = beta;
  c.note = join_note(c.note, note);
}

void run_base_groups(Context& ctx) {
  const bool dist = ctx.wants("distribution"), expo = ctx.wants("exponential");
  if (!dist && !expo) return;
  for (Variant v : ctx.variants)
    for (double beta : ctx.betas) {
      const double norm = ctx.norm(v, beta);
      const double unit = norm > 0.0 ? norm : 1.0;
      const std::vector<double> lambdas = lambda_grid(ctx.lambda_factor * kE * unit, ctx.lambda_steps);
      const double a = 1.0 / (2.0 * kE * unit);
      for (int n : ctx.levels) {
        Rng rng = Rng::derive(ctx.inst.seed, {kTagCandidates, std::uint64_t(n), std::uint64_t(v)});
        const Operator q2 = variant_tail_square(ctx.m, n, v);
        for (const Candidate& cand : projection_candidates(*ctx.f, n, q2, beta, rng)) {
          const std::string note = "P=" + cand.label + " rank=" + std::to_string(cand.P.rank());
          if (dist) {
            const auto start = Clock::now();
            Check c;
            try {
              const TailReport rep = verify_distribution_bound(ctx.m, n, cand.P, beta, lambdas, v, norm);
              const size_t w = size_t(rep.worst);
              c = inequality("distribution", rep.measured[w], rep.bound[w], tol::kInequalitySlack);
              c.lambda = rep.lambdas[w];
            } catch (const Inconsistency& e) {
              c = inequality("distribution", 1.0, 0.0, 0.0);
              c.note = e.what();
            }
            tag(c, n, beta, v, note);
            ctx.emit({c}, start);
          }
          if (expo) {
            const auto start = Clock::now();
            Check c;
            try {
              const ExponentialReport rep = verify_exponential_integrability(ctx.m, n, cand.P, beta, a, v, norm);
              c = inequality("exponential", rep.lhs, rep.bound, tol::kInequalitySlack);
            } catch (const Inconsistency& e) {
              c = inequality("exponential", 1.0, 0.0, 0.0);
              c.note = e.what();
            }
            std::ostringstream os;
            os << "a=" << a;
            tag(c, n, beta, v, join_note(note, os.str()));
            ctx.emit({c}, start);
          }
        }
      }
    }
}

void run_moment_group(Context& ctx) {
  if (!ctx.wants("moment")) return;
  SearchOptions search = ctx.opt.search;
  search.seed = mix_seed(ctx.inst.seed, {kTagSearch, ctx.opt.search.seed});
  for (Variant v : ctx.variants)
    for (double beta : ctx.betas)
      for (double p : ctx.ps) {
        const auto start = Clock::now();
        std::vector<Check> cs = verify_moment_equivalence(ctx.m, beta, p, v, search);
        for (Check& c : cs) tag(c, 0, beta, v, "");
        ctx.emit(std::move(cs), start);
      }
}

void run_amplified_groups(Context& ctx) {
  const bool amp = ctx.wants("amplified"), cuc = ctx.wants("cuculescu"), chain = ctx.wants("chain");
  if (!amp && !cuc && !chain) return;
  const int K = ctx.f->levels();
  for (Variant v : ctx.variants) {
    const int top = v == Variant::kBmo ? K : K - 1;
    for (double beta : ctx.betas) {
      const double norm = ctx.norm(v, beta);
      const double unit = norm > 0.0 ? norm : 1.0;
      for (int n : ctx.levels) {
        const int N = std::min(top, n + std::min(ctx.opt.amplified_span, tol::kMaxAmplifiedSpan));
        if (N <= n) continue;
        Rng rng = Rng::derive(ctx.inst.seed, {kTagCandidates, std::uint64_t(n), std::uint64_t(v)});
        const Operator q2 = variant_tail_square(ctx.m, n, v);
        for (const Candidate& cand : projection_candidates(*ctx.f, n, q2, beta, rng)) {
          if (cand.label == "identity" || cand.P.rank() > tol::kMaxCornerRank) continue;
          const std::string note = "P=" + cand.label + " rank=" + std::to_string(cand.P.rank()) +
                                   " N=" + std::to_string(N);
          const auto start = Clock::now();
          std::vector<Check> cs;
          try {
            const AmplifiedSystem sys = AmplifiedSystem::build(ctx.m, n, N, cand.P, beta, v);
            if (amp) {
              std::vector<Check> s = verify_amplified_structure(ctx.m, sys);
              cs.insert(cs.end(), s.begin(), s.end());
            }
            const std::vector<double> lams = {0.5 * unit, kE * unit};
            if (cuc) {
              for (double lam : lams) {
                std::vector<Check> s = verify_cuculescu_structure(sys, lam);
                for (Check& c : s) c.lambda = lam;
                cs.insert(cs.end(), s.begin(), s.end());
              }
              cs.push_back(verify_lambda_monotonicity(sys, lambda_grid(2.0 * kE * unit, 9)));
            }
            if (chain) {
              ProofChainOptions popt;
              popt.seed = mix_seed(ctx.inst.seed, {kTagChain, std::uint64_t(n), std::uint64_t(v)});
              for (double lam : lams) {
                std::vector<Check> s = verify_proof_chain(sys, lam, kE * unit, norm, popt);
                cs.insert(cs.end(), s.begin(), s.end());
              }
            }
          } catch (const BudgetExceeded& e) {
            cs.push_back(skipped("amplified.budget", e.what()));
          }
          for (Check& c : cs) tag(c, n, beta, v, note);
          ctx.emit(std::move(cs), start);
        }
      }
    }
  }
}

void run_atom_group(Context& ctx) {
  if (!ctx.wants("atoms")) return;
  const int K = ctx.f->levels();
  const double ps[] = {0.5, 1.0};
  const double qs[] = {2.0, 4.0};
  for (int n : ctx.levels) {
    if (n >= K) continue;
    for (int pi = 0; pi < 2; ++pi)
      for (int qi = 0; qi < 2; ++qi) {
        const auto start = Clock::now();
        Rng rng = Rng::derive(ctx.inst.seed, {kTagAtoms, std::uint64_t(n), std::uint64_t(pi), std::uint64_t(qi)});
        const Atom atom = generate_atom(ctx.f, n, ps[pi], qs[qi], rng);
        AtomReport rep = atom_check(atom, ps[pi], qs[qi], ctx.f);
        std::ostringstream os;
        os << "q=" << qs[qi] << " rank=" << atom.e.rank();
        rep.bound.note = join_note(rep.bound.note, os.str());
        ctx.emit({rep.bound}, start);
      }
  }
}

// ---- classical oracle --------------------------------------------------------

double max_abs_diff(const std::vector<double>& a, const Operator& diag_op) {
  double out = 0.0;
  for (size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - diag_op(Eigen::Index(i), Eigen::Index(i)).real()));
  return out;
}

double max_abs(const std::vector<double>& a) {
  double out = 0.0;
  for (double v : a) out = std::max(out, std::abs(v));
  return out;
}

Check oracle(const std::string& id, double classical, double matrix) {
  Check c = residual(id, std::abs(classical - matrix), kOracleTolerance * std::max(1.0, std::abs(classical)));
  std::ostringstream os;
  os.precision(17);
  os << "classical=" << classical << " matrix=" << matrix;
  c.note = os.str();
  return c;
}

DyadicEvent random_event(int level, Rng& rng) {
  DyadicEvent e;
  e.level = level;
  const int atoms = 1 << level;
  for (int j = 0; j < atoms; ++j)
    if (rng.coin()) e.atoms.push_back(j);
  if (e.atoms.empty()) e.atoms.push_back(rng.uniform_int(0, atoms - 1));
  return e;
}

void worst_into(Check& worst, const Check& c) {
  if (c.failed() && !worst.failed()) worst = c;
  else if (c.failed() == worst.failed() && c.ratio() > worst.ratio()) worst = c;
}

void run_classical_group(Context& ctx) {
  if (!ctx.wants("classical") || ctx.f->kind() != FiltrationKind::kDyadic) return;
  const int d = ctx.f->dim();
  const int K = ctx.f->levels();
  std::vector<double> values(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    values[size_t(i)] = ctx.inst.x(i, i).real();
    if (ctx.inst.x(i, i).imag() != 0.0) {
      ctx.emit({skipped("oracle.embedding", "complex diagonal values")}, Clock::now());
      return;
    }
  }
  const DyadicMartingale f(values);
  const Martingale mm = embed_to_matrix(f, ctx.f);
  Rng rng = Rng::derive(ctx.inst.seed, {kTagClassical});

  {
    const auto start = Clock::now();
    std::vector<Check> cs;
    double sq = 0.0, sq_scale = 0.0, cond = 0.0, cond_scale = 0.0;
    for (int s = 1; s <= K + 1; ++s) {
      const std::vector<double> cS = classical_square_function(f, s);
      sq = std::max(sq, max_abs_diff(cS, square_function_Sc(mm, s)));
      sq_scale = std::max(sq_scale, max_abs(cS));
      const std::vector<double> cs2 = classical_conditioned_square2(f, s);
      cond = std::max(cond, max_abs_diff(cs2, conditioned_square_sc2(mm, s)));
      cond_scale = std::max(cond_scale, max_abs(cs2));
    }
    cs.push_back(residual("oracle.square-function", sq, kOracleTolerance * std::max(1.0, sq_scale)));
    cs.push_back(residual("oracle.conditioned-square", cond, kOracleTolerance * std::max(1.0, cond_scale)));
    cs.push_back(oracle("oracle.bmo", classical_bmo_norm(f), bmo_column_norm(mm).value));
    ctx.emit(std::move(cs), start);
  }

  SearchOptions search = ctx.opt.search;
  search.seed = mix_seed(ctx.inst.seed, {kTagSearch, ctx.opt.search.seed});
  for (Variant v : ctx.variants) {
    const bool conditioned = v == Variant::kConditioned;
    const NormFamily family = family_of(v);
    for (double beta : ctx.betas) {
      const auto start = Clock::now();
      std::vector<Check> cs;
      Check lip = oracle("oracle.lipschitz", classical_lipschitz_norm(f, beta, conditioned),
                         lipschitz_norm(mm, beta, family).value);
      tag(lip, 0, beta, v, "");
      cs.push_back(lip);
      for (double p : ctx.ps) {
        const NormReport mat = moment_norm(mm, beta, p, family, search);
        Check c = mat.mode == NormMode::kExact
                      ? oracle("oracle.moment", classical_moment_norm(f, beta, p, conditioned), mat.value)
                      : skipped("oracle.moment", "matrix path not exact");
        c.p = p;
        tag(c, 0, beta, v, "method=" + to_string(mat.method));
        cs.push_back(c);
      }
      for (int n : ctx.levels) {
        const DyadicEvent e = random_event(n, rng);
        const Projection P = event_projection(f, e);
        const RealVector s = corner_spectrum(mm, n, P, beta, v);
        const double top = s.size() ? s.maxCoeff() : 0.0;
        const double unit_w = ctx.f->trace().weights()[0];
        double worst = 0.0;
        // Grid points sit between multiples of top/10 so no tail value lands on one.
        for (int i = 0; i < 10; ++i) {
          const double lam = (double(i) + 0.5) / 10.0 * 1.01 * top;
          double count = 0.0;
          for (Eigen::Index j = 0; j < s.size(); ++j)
            if (s[j] >= lam) count += 1.0;
          worst = std::max(worst, std::abs(classical_tail(f, e, beta, lam, conditioned) - unit_w * count));
        }
        Check c = residual("oracle.tail", worst, kOracleTolerance);
        tag(c, n, beta, v, "");
        cs.push_back(c);
      }
      ctx.emit(std::move(cs), start);
    }
  }

  const double bmo = classical_bmo_norm(f);
  const double scale = bmo > 0.0 ? bmo : 1.0;
  std::vector<double> unit_values = values;
  for (double& x : unit_values) x /= scale;
  const DyadicMartingale unit_f(unit_values);
  for (int n : ctx.levels) {
    const auto start = Clock::now();
    std::vector<Check> cs;
    for (int i = 0; i < 3; ++i) {
      const DyadicEvent e = random_event(n, rng);
      const double lam = (0.05 + 2.0 * rng.uniform()) * scale;
      const double mu = (0.05 + 2.0 * rng.uniform()) * scale;
      Check c = verify_classical_step(f, e, lam, mu);
      std::ostringstream os;
      os.precision(17);
      os << "mu=" << mu;
      c.note = os.str();
      cs.push_back(c);
    }
    const DyadicEvent e = random_event(n, rng);
    Check tail = verify_classical_tail(unit_f, e, 0.0);
    Check iterated, closed;
    bool first = true;
    for (double lam : lambda_grid(10.0 * kE, 41)) {
      worst_into(tail, verify_classical_tail(unit_f, e, lam));
      const std::vector<Check> ch = verify_classical_chain(unit_f, e, lam);
      if (first) {
        iterated = ch[0];
        closed = ch[1];
        first = false;
      } else {
        worst_into(iterated, ch[0]);
        worst_into(closed, ch[1]);
      }
    }
    for (Check* c : {&tail, &iterated, &closed}) c->note = join_note(c->note, "unit BMO rescaling");
    cs.push_back(tail);
    cs.push_back(iterated);
    cs.push_back(closed);
    ctx.emit(std::move(cs), start);
  }
}

std::string fmt_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> tolerance_lines(const Tolerances& tol) {
  std::vector<std::string> out;
  if (tol.inequality) out.push_back("tol.inequality=" + fmt_number(*tol.inequality));
  if (tol.residual_scale) out.push_back("tol.residual_scale=" + fmt_number(*tol.residual_scale));
  return out;
}

// ---- config parsing -----------------------------------------------------------

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.size() >= 2 && (item.front() == '"' || item.front() == '\'') && item.back() == item.front())
      item = item.substr(1, item.size() - 2);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) throw InvalidInput("config: " + key + ": not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw InvalidInput("config: " + key + ": not an integer: '" + s + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& s) {
  const long long v = parse_int(key, s);
  if (v < 0) throw InvalidInput("config: " + key + ": seeds are nonnegative");
  return std::uint64_t(v);
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  return out;
}

}  // namespace

const std::vector<std::string>& known_groups() {
  static const std::vector<std::string> groups = {"distribution", "exponential", "moment",  "amplified",
                                                  "cuculescu",    "chain",       "atoms",   "classical"};
  return groups;
}

std::vector<Record> run_checks(const Instance& inst, const RunOptions& options) {
  for (const auto& g : options.groups)
    if (std::find(known_groups().begin(), known_groups().end(), g) == known_groups().end())
      throw InvalidInput("unknown check group '" + g + "'");
  Context ctx(inst, options, make_filtration(inst.kind, inst.levels));
  const int K = ctx.f->levels();
  const InstanceParams& ip = inst.params;
  ctx.levels = options.levels.value_or(ip.levels);
  if (ctx.levels.empty())
    for (int n = 1; n <= K; ++n) ctx.levels.push_back(n);
  for (int n : ctx.levels)
    if (n < 1 || n > K) throw InvalidInput("level " + std::to_string(n) + " outside 1.." + std::to_string(K));
  ctx.betas = options.betas.value_or(ip.betas);
  for (double b : ctx.betas)
    if (!(b >= 0.0)) throw InvalidInput("beta must be nonnegative");
  ctx.ps = options.ps.value_or(ip.ps);
  for (double p : ctx.ps)
    if (!(p > 0.0)) throw InvalidInput("p must be positive");
  ctx.lambda_factor = options.lambda_max_factor.value_or(ip.lambda_max_factor);
  ctx.lambda_steps = options.lambda_steps.value_or(ip.lambda_steps);
  if (!(ctx.lambda_factor >= 0.0) || ctx.lambda_steps < 1) throw InvalidInput("invalid lambda grid");
  for (const auto& s : options.variants.value_or(ip.variants)) ctx.variants.push_back(variant_from_string(s));

  run_base_groups(ctx);
  run_moment_group(ctx);
  run_amplified_groups(ctx);
  run_atom_group(ctx);
  run_classical_group(ctx);
  sort_records(ctx.records);
  return std::move(ctx.records);
}

void sort_records(std::vector<Record>& records) {
  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.check.id < b.check.id;
  });
}

Summary summarize(const std::vector<Record>& records) {
  Summary s;
  for (const Record& r : records) {
    ++s.total;
    switch (r.check.status) {
      case Status::kPass: ++s.passed; break;
      case Status::kFail: ++s.failed; break;
      case Status::kSkipped: ++s.skipped; break;
    }
    // Sides inside the absolute roundoff slack carry no ratio information.
    const bool resolved = r.check.kind == CheckKind::kInequality && r.check.lhs > r.check.abs;
    if (r.check.status != Status::kSkipped && resolved && r.check.ratio() > s.max_ratio) {
      s.max_ratio = r.check.ratio();
      s.max_ratio_id = r.check.id;
    }
  }
  return s;
}

std::string format_summary(const Summary& s) {
  std::ostringstream os;
  os << "records=" << s.total << " pass=" << s.passed << " fail=" << s.failed << " skipped=" << s.skipped
     << " max_ratio=" << fmt_number(s.max_ratio);
  if (!s.max_ratio_id.empty()) os << " (" << s.max_ratio_id << ")";
  return os.str();
}

std::string to_csv(const std::vector<Record>& records, const Tolerances& tol) {
  std::ostringstream os;
  for (const auto& line : tolerance_lines(tol)) os << "# " << line << "\n";
  os << "check_id,seed,n,beta,p,lambda,lhs,rhs,ratio,status,wall_time_ms\n";
  for (const Record& r : records) {
    const Check& c = r.check;
    os << csv_escape(c.id) << ',' << r.seed << ',' << (c.n > 0 ? std::to_string(c.n) : "") << ','
       << fmt_number(c.beta) << ',' << fmt_number(c.p) << ',' << fmt_number(c.lambda) << ',' << fmt_number(c.lhs)
       << ',' << fmt_number(c.rhs) << ',' << fmt_number(c.ratio()) << ',' << to_string(c.status) << ','
       << fmt_number(r.wall_ms) << "\n";
  }
  return os.str();
}

std::string to_json(const std::vector<Record>& records, const Tolerances& tol) {
  using nlohmann::json;
  auto num = [](double v) -> json {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  json out;
  json t = json::object();
  if (tol.inequality) t["inequality"] = *tol.inequality;
  if (tol.residual_scale) t["residual_scale"] = *tol.residual_scale;
  out["tolerances"] = t;
  json rows = json::array();
  for (const Record& r : records) {
    const Check& c = r.check;
    rows.push_back({{"check_id", c.id},
                    {"seed", r.seed},
                    {"profile", r.profile},
                    {"n", c.n > 0 ? json(c.n) : json(nullptr)},
                    {"beta", num(c.beta)},
                    {"p", num(c.p)},
                    {"lambda", num(c.lambda)},
                    {"lhs", num(c.lhs)},
                    {"rhs", num(c.rhs)},
                    {"ratio", num(c.ratio())},
                    {"status", to_string(c.status)},
                    {"note", c.note},
                    {"wall_time_ms", r.wall_ms}});
  }
  out["records"] = rows;
  const Summary s = summarize(records);
  out["summary"] = {{"records", s.total},    {"pass", s.passed},
                    {"fail", s.failed},      {"skipped", s.skipped},
                    {"max_ratio", num(s.max_ratio)}, {"max_ratio_id", s.max_ratio_id}};
  return out.dump(1) + "\n";
}

SweepConfig parse_sweep_config(const std::string& text) {
  SweepConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    RunOptions& run = cfg.run;
    if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& item : split_list(value)) {
        const size_t dots = item.find("..");
        if (dots == std::string::npos) {
          cfg.seeds.push_back(parse_seed(key, item));
          continue;
        }
        const std::uint64_t lo = parse_seed(key, trim(item.substr(0, dots)));
        const std::uint64_t hi = parse_seed(key, trim(item.substr(dots + 2)));
        if (hi < lo || hi - lo > 1000000) throw InvalidInput("config: bad seed range '" + item + "'");
        for (std::uint64_t s = lo; s <= hi; ++s) cfg.seeds.push_back(s);
      }
    } else if (key == "profiles" || key == "profile") {
      cfg.profiles = split_list(value);
      const auto known = known_profiles();
      for (const auto& p : cfg.profiles)
        if (std::find(known.begin(), known.end(), p) == known.end()) throw InvalidInput("config: unknown profile '" + p + "'");
    } else if (key == "levels") {
      cfg.levels = int(parse_int(key, value));
      if (cfg.levels < 0) throw InvalidInput("config: levels must be nonnegative");
    } else if (key == "check_levels") {
      std::vector<int> lv;
      for (const auto& s : split_list(value)) lv.push_back(int(parse_int(key, s)));
      run.levels = lv;
    } else if (key == "groups" || key == "checks") {
      run.groups.clear();
      for (const auto& g : split_list(value)) {
        if (std::find(known_groups().begin(), known_groups().end(), g) == known_groups().end())
          throw InvalidInput("config: unknown group '" + g + "'");
        run.groups.insert(g);
      }
    } else if (key == "beta") {
      run.betas = parse_doubles(key, value);
    } else if (key == "p") {
      run.ps = parse_doubles(key, value);
    } else if (key == "lambda_max") {
      run.lambda_max_factor = parse_double(key, value);
    } else if (key == "lambda_steps") {
      run.lambda_steps = int(parse_int(key, value));
    } else if (key == "variants" || key == "variant") {
      run.variants = split_list(value);
      for (const auto& v : *run.variants) variant_from_string(v);
    } else if (key == "tol.inequality") {
      run.tol.inequality = parse_double(key, value);
    } else if (key == "tol.residual_scale") {
      run.tol.residual_scale = parse_double(key, value);
    } else if (key == "search.seed") {
      run.search.seed = parse_seed(key, value);
    } else if (key == "search.random_per_rank") {
      run.search.random_per_rank = int(parse_int(key, value));
    } else if (key == "search.polish_iterations") {
      run.search.polish_iterations = int(parse_int(key, value));
    } else if (key == "search.polish_pairs") {
      run.search.polish_pairs = int(parse_int(key, value));
    } else if (key == "search.max_evaluations") {
      run.search.max_evaluations = int(parse_int(key, value));
    } else if (key == "amplified_span") {
      run.amplified_span = int(parse_int(key, value));
    } else if (key == "threads") {
      cfg.threads = int(parse_int(key, value));
    } else {
      throw InvalidInput("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (cfg.run.lambda_steps && *cfg.run.lambda_steps < 1) throw InvalidInput("config: lambda_steps must be >= 1");
  if (cfg.run.lambda_max_factor && *cfg.run.lambda_max_factor < 0.0) throw InvalidInput("config: lambda_max must be >= 0");
  if (cfg.run.search.random_per_rank < 0 || cfg.run.search.polish_iterations < 0 || cfg.run.search.polish_pairs < 0)
    throw InvalidInput("config: search counts must be nonnegative");
  return cfg;
}

SweepConfig read_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

int worker_threads(int requested) {
  int cap = int(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("NCJN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) cap = int(v);
  }
  if (requested >= 1) return std::min(requested, cap);
  return cap;
}

std::vector<Record> run_sweep(const SweepConfig& config) {
  struct Task {
    std::uint64_t seed;
    std::string profile;
  };
  std::vector<Task> tasks;
  for (std::uint64_t seed : config.seeds)
    for (const auto& profile : config.profiles) tasks.push_back({seed, profile});

  std::vector<std::vector<Record>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = run_checks(generate_instance(tasks[i].seed, tasks[i].profile, config.levels), config.run);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(worker_threads(config.threads), int(std::max<size_t>(1, tasks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<Record> all;
  for (auto& r : results) all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  sort_records(all);
  return all;
}

}  // namespace ncjn
