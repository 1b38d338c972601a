#include "ncjn/instance.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ncjn/errors.hpp"
#include "ncjn/random.hpp"

namespace ncjn {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Operator sparse_difference(const Filtration& f, int k, Rng& rng) {
  const int d = f.dim();
  Operator y = f.is_commutative() ? random_real_diagonal(d, rng) : random_operator(d, rng);
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      if (!rng.coin(0.15)) y(i, j) = 0.0;
  return f.expect(k, y) - (k > 1 ? f.expect(k - 1, y) : Operator::Zero(d, d));
}

json encode_complex(Complex c) { return json::array({c.real(), c.imag()}); }

Complex decode_complex(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InvalidInput("instance: expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
std::vector<T> get_list(const json& obj, const char* key, std::vector<T> fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_array()) throw InvalidInput(std::string("instance: params.") + key + " must be an array");
  return obj[key].get<std::vector<T>>();
}

}  // namespace

std::vector<std::string> known_profiles() {
  return {"tensor-small", "tensor-medium", "dyadic", "adversarial-sparse"};
}

Instance generate_instance(std::uint64_t seed, const std::string& profile, int levels_override) {
  Rng rng = Rng::derive(seed, {fnv1a(profile)});
  Instance inst;
  inst.seed = seed;
  inst.profile = profile;

  if (profile == "tensor-small") {
    inst.kind = FiltrationKind::kTensor;
    inst.levels = rng.uniform_int(2, 4);
  } else if (profile == "tensor-medium") {
    inst.kind = FiltrationKind::kTensor;
    inst.levels = rng.uniform_int(5, 6);
    inst.params.betas = {0.0, 0.5};
    inst.params.ps = {1.0, 2.0, 4.0};
  } else if (profile == "dyadic") {
    inst.kind = FiltrationKind::kDyadic;
    inst.levels = rng.uniform_int(4, 8);
  } else if (profile == "adversarial-sparse") {
    inst.kind = rng.coin() ? FiltrationKind::kTensor : FiltrationKind::kDyadic;
    inst.levels = inst.kind == FiltrationKind::kTensor ? rng.uniform_int(3, 4) : rng.uniform_int(6, 8);
  } else {
    throw InvalidInput("unknown profile '" + profile + "'");
  }
  if (levels_override > 0) inst.levels = levels_override;
  const FiltrationPtr f = make_filtration(inst.kind, inst.levels);
  const int d = f->dim();

  if (profile == "adversarial-sparse") {
    // A few levels carry all the mass, with magnitudes spread over two decades.
    Operator x = Operator::Zero(d, d);
    const int active = std::min(inst.levels, rng.uniform_int(1, 2));
    for (int i = 0; i < active; ++i) {
      const int k = rng.uniform_int(1, inst.levels);
      x += std::pow(10.0, 2.0 * rng.uniform()) * sparse_difference(*f, k, rng);
    }
    inst.x = x;
  } else {
    inst.x = inst.kind == FiltrationKind::kDyadic ? random_real_diagonal(d, rng) : random_operator(d, rng);
  }
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  json j;
  j["format"] = kInstanceFormat;
  j["version"] = kInstanceVersion;
  j["seed"] = inst.seed;
  j["profile"] = inst.profile;
  j["filtration"] = {{"kind", to_string(inst.kind)}, {"levels", inst.levels}};
  json op;
  op["dim"] = inst.x.rows();
  if (inst.diagonal()) {
    op["storage"] = "diagonal";
    json diag = json::array();
    for (Eigen::Index i = 0; i < inst.x.rows(); ++i) diag.push_back(encode_complex(inst.x(i, i)));
    op["diagonal"] = diag;
  } else {
    op["storage"] = "dense";
    json entries = json::array();
    for (Eigen::Index i = 0; i < inst.x.rows(); ++i)
      for (Eigen::Index k = 0; k < inst.x.cols(); ++k) entries.push_back(encode_complex(inst.x(i, k)));
    op["entries"] = entries;
  }
  j["operator"] = op;
  const InstanceParams& p = inst.params;
  j["params"] = {{"levels", p.levels},
                 {"beta", p.betas},
                 {"p", p.ps},
                 {"lambda_max_factor", p.lambda_max_factor},
                 {"lambda_steps", p.lambda_steps},
                 {"variants", p.variants},
                 {"projection_rule", p.projection_rule}};
  return j.dump(1) + "\n";
}

Instance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("instance: malformed JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != kInstanceFormat) throw InvalidInput("instance: missing format tag");
    if (j.value("version", 0) != kInstanceVersion) throw InvalidInput("instance: unsupported version");
    Instance inst;
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.profile = j.value("profile", "");
    const json& f = j.at("filtration");
    inst.kind = filtration_kind_from_string(f.at("kind").get<std::string>());
    inst.levels = f.at("levels").get<int>();
    const int expected = inst.levels >= 1 && inst.levels <= 20 ? 1 << inst.levels : -1;

    const json& op = j.at("operator");
    const int d = op.at("dim").get<int>();
    if (d != expected) throw InvalidInput("instance: operator dimension does not match the filtration");
    const std::string storage = op.at("storage").get<std::string>();
    inst.x = Operator::Zero(d, d);
    if (storage == "diagonal") {
      const json& diag = op.at("diagonal");
      if (!diag.is_array() || int(diag.size()) != d) throw InvalidInput("instance: diagonal has the wrong length");
      for (int i = 0; i < d; ++i) inst.x(i, i) = decode_complex(diag[size_t(i)]);
    } else if (storage == "dense") {
      const json& entries = op.at("entries");
      if (!entries.is_array() || entries.size() != size_t(d) * size_t(d))
        throw InvalidInput("instance: entries have the wrong length");
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) inst.x(i, k) = decode_complex(entries[size_t(i) * size_t(d) + size_t(k)]);
    } else {
      throw InvalidInput("instance: unknown storage '" + storage + "'");
    }
    if (!is_finite(inst.x)) throw InvalidInput("instance: non-finite operator entries");
    if (inst.kind == FiltrationKind::kDyadic && storage != "diagonal")
      throw InvalidInput("instance: dyadic instances use diagonal storage");

    if (j.contains("params")) {
      const json& p = j["params"];
      InstanceParams& ip = inst.params;
      ip.levels = get_list<int>(p, "levels", ip.levels);
      ip.betas = get_list<double>(p, "beta", ip.betas);
      ip.ps = get_list<double>(p, "p", ip.ps);
      ip.lambda_max_factor = p.value("lambda_max_factor", ip.lambda_max_factor);
      ip.lambda_steps = p.value("lambda_steps", ip.lambda_steps);
      ip.variants = get_list<std::string>(p, "variants", ip.variants);
      ip.projection_rule = p.value("projection_rule", ip.projection_rule);
    }
    return inst;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("instance: ") + e.what());
  }
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open instance file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

void write_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << serialize_instance(inst);
}

}  // namespace ncjn
