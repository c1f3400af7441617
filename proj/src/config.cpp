#include "hk/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace hk {

using json = nlohmann::ordered_json;

double SourceSpec::evaluate(const Vec2& x) const
{
  if (kind == "sine") {
    const double pi = std::numbers::pi;
    return value * 2.0 * pi * pi * std::sin(pi * x(0)) * std::sin(pi * x(1));
  }
  return value;
}

std::vector<std::string> preset_names()
{
  return {"laminate-p2", "laminate-p3", "checkerboard-p2", "variable-exponent"};
}

namespace {

json elastic_block()
{
  return json{{"B", {{"matrix", {{"lambda", 1.0}, {"mu", 1.0}}}, {"inclusion", {{"lambda", 4.0}, {"mu", 4.0}}}}},
              {"C", {{"matrix", {{"lambda", 0.5}, {"mu", 0.5}}}, {"inclusion", {{"lambda", 1.0}, {"mu", 2.0}}}}}};
}

json common_block(json op, json geometry)
{
  json j;
  j["operator"] = std::move(op);
  j["geometry"] = std::move(geometry);
  j["elasticity"] = elastic_block();
  j["grids"] = {{"n", 4}, {"m", 4}};
  j["ladder"] = {0.25, 0.125, 0.0625, 0.03125};
  j["tolerances"] = {{"cell", 1e-10}, {"fine", 1e-10}, {"homogenized", 1e-9}, {"linear", 1e-12}};
  j["chom_variant"] = "C-applied";
  j["sources"] = {{"f", 1.0}, {"g", {0.0, -1.0}}};
  j["seed"] = 1;
  return j;
}

}  // namespace

json preset(const std::string& name)
{
  const json lam = {{"kind", "laminate"}, {"size", 0.5}};
  if (name == "laminate-p2")
    return common_block({{"family", "power-law"}, {"p", 2.0}, {"sigma", {1.0, 4.0}}}, lam);
  if (name == "laminate-p3")
    return common_block({{"family", "power-law"}, {"p", 3.0}, {"sigma", {1.0, 4.0}}}, lam);
  if (name == "checkerboard-p2")
    return common_block({{"family", "power-law"}, {"p", 2.0}, {"sigma", {1.0, 4.0}}}, {{"kind", "checkerboard"}});
  if (name == "variable-exponent")
    return common_block({{"family", "variable-exponent"}, {"exponents", {3.0, 2.0}}, {"sigma", {1.0, 1.0}}},
                        {{"kind", "square"}, {"size", 0.5}});
  throw ConfigError("/preset", "unknown preset '" + name + "'");
}

namespace {

void allow_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys)
{
  if (!obj.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(ptr + "/" + it.key(), "unknown field");
}

const json& need(const json& obj, const std::string& ptr, const char* key)
{
  if (!obj.contains(key)) throw ConfigError(ptr + "/" + key, "missing required field");
  return obj[key];
}

double number(const json& v, const std::string& ptr)
{
  if (!v.is_number()) throw ConfigError(ptr, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(ptr, "expected a finite number");
  return d;
}

double positive(const json& v, const std::string& ptr)
{
  const double d = number(v, ptr);
  if (!(d > 0.0)) throw ConfigError(ptr, "must be positive");
  return d;
}

int integer(const json& v, const std::string& ptr)
{
  if (!v.is_number_integer()) throw ConfigError(ptr, "expected an integer");
  return v.get<int>();
}

double opt_number(const json& obj, const std::string& ptr, const char* key, double fallback)
{
  return obj.contains(key) ? number(obj[key], ptr + "/" + key) : fallback;
}

std::array<double, 2> pair(const json& v, const std::string& ptr)
{
  if (!v.is_array() || v.size() != 2) throw ConfigError(ptr, "expected an array of two numbers");
  return {number(v[0], ptr + "/0"), number(v[1], ptr + "/1")};
}

Geometry parse_geometry(const json& g)
{
  const std::string ptr = "/geometry";
  allow_keys(g, ptr, {"kind", "size"});
  const auto& k = need(g, ptr, "kind");
  if (!k.is_string()) throw ConfigError(ptr + "/kind", "expected a string");
  const auto kind = k.get<std::string>();
  auto size = [&](double lo, double hi) {
    const double s = number(need(g, ptr, "size"), ptr + "/size");
    if (!(s > lo && s < hi)) throw ConfigError(ptr + "/size", "out of range");
    return s;
  };
  if (kind == "homogeneous") return Geometry::homogeneous();
  if (kind == "laminate") return Geometry::laminate(size(0.0, 1.0));
  if (kind == "square") return Geometry::square(size(0.0, 1.0));
  if (kind == "disc") return Geometry::disc(size(0.0, 0.5));
  if (kind == "checkerboard") return Geometry::checkerboard();
  throw ConfigError(ptr + "/kind", "unknown geometry '" + kind + "'");
}

OperatorSpec parse_operator(const json& o, const Geometry& geo)
{
  const std::string ptr = "/operator";
  allow_keys(o, ptr,
             {"family", "p", "alpha", "lambda_o", "Lambda_o", "Lambda_star", "delta", "sigma", "exponents", "matrices"});
  const auto& fam = need(o, ptr, "family");
  if (!fam.is_string()) throw ConfigError(ptr + "/family", "expected a string");
  const auto family = fam.get<std::string>();
  const double delta = opt_number(o, ptr, "delta", 0.0);
  if (delta < 0.0) throw ConfigError(ptr + "/delta", "must be non-negative");
  OperatorSpec s;
  if (family == "power-law") {
    const double p = number(need(o, ptr, "p"), ptr + "/p");
    if (!(p > 1.0)) throw ConfigError(ptr + "/p", "must exceed 1");
    const auto sg = pair(need(o, ptr, "sigma"), ptr + "/sigma");
    if (!(sg[0] > 0.0 && sg[1] > 0.0)) throw ConfigError(ptr + "/sigma", "must be positive");
    // p < 2 needs the regularization
    s = OperatorSpec::power_law(p, sg[0], sg[1], geo, o.contains("delta") ? delta : (p < 2.0 ? 1e-8 : 0.0));
  } else if (family == "variable-exponent") {
    const auto ex = pair(need(o, ptr, "exponents"), ptr + "/exponents");
    const auto sg = pair(need(o, ptr, "sigma"), ptr + "/sigma");
    if (!(sg[0] > 0.0 && sg[1] > 0.0)) throw ConfigError(ptr + "/sigma", "must be positive");
    if (!(ex[1] >= 2.0 && ex[1] <= ex[0]))
      throw ConfigError(ptr + "/exponents", "need 2 <= p_inclusion <= p_matrix ([p_matrix, p_inclusion])");
    s = OperatorSpec::variable_exponent(ex[0], ex[1], sg[0], sg[1], geo, delta);
    if (o.contains("p") && number(o["p"], ptr + "/p") != s.p)
      throw ConfigError(ptr + "/p", "must equal the inclusion exponent for this family");
  } else if (family == "linear") {
    if (o.contains("p") && number(o["p"], ptr + "/p") != 2.0) throw ConfigError(ptr + "/p", "linear family has p = 2");
    std::array<Mat2, 2> mats{Mat2::Identity(), Mat2::Identity()};
    if (o.contains("matrices")) {
      const auto& m = o["matrices"];
      if (!m.is_array() || m.size() != 2) throw ConfigError(ptr + "/matrices", "expected two 2x2 matrices");
      for (std::size_t k = 0; k < 2; ++k) {
        const std::string mp = ptr + "/matrices/" + std::to_string(k);
        if (!m[k].is_array() || m[k].size() != 2) throw ConfigError(mp, "expected a 2x2 matrix");
        for (std::size_t r = 0; r < 2; ++r) {
          const auto row = pair(m[k][r], mp + "/" + std::to_string(r));
          mats[k](static_cast<int>(r), 0) = row[0];
          mats[k](static_cast<int>(r), 1) = row[1];
        }
      }
    }
    s = OperatorSpec::linear(mats[0], mats[1], geo);
  } else {
    throw ConfigError(ptr + "/family", "unknown family '" + family + "'");
  }
  s.alpha = opt_number(o, ptr, "alpha", s.alpha);
  s.lambda_o = opt_number(o, ptr, "lambda_o", s.lambda_o);
  s.Lambda_o = opt_number(o, ptr, "Lambda_o", s.Lambda_o);
  s.Lambda_star = opt_number(o, ptr, "Lambda_star", s.Lambda_star);
  if (s.alpha < 0.0 || s.alpha > std::min(1.0, s.p - 1.0)) throw ConfigError(ptr + "/alpha", "must lie in [0, min(1, p-1)]");
  for (const char* k : {"lambda_o", "Lambda_o", "Lambda_star"})
    if (o.contains(k)) positive(o[k], ptr + "/" + k);
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(ptr, e.what());
  }
  return s;
}

ElasticTensorField parse_tensor(const json& t, const std::string& ptr, const Geometry& geo)
{
  allow_keys(t, ptr, {"matrix", "inclusion"});
  std::array<std::array<double, 2>, 2> lm{};
  const char* names[2] = {"matrix", "inclusion"};
  for (int k = 0; k < 2; ++k) {
    const std::string pp = ptr + "/" + names[k];
    const auto& ph = need(t, ptr, names[k]);
    allow_keys(ph, pp, {"lambda", "mu"});
    lm[k][0] = number(need(ph, pp, "lambda"), pp + "/lambda");
    lm[k][1] = positive(need(ph, pp, "mu"), pp + "/mu");
    if (!(lm[k][0] + lm[k][1] > 0.0)) throw ConfigError(pp + "/lambda", "lambda + mu must be positive");
  }
  return ElasticTensorField::isotropic(lm[0][0], lm[0][1], lm[1][0], lm[1][1], geo);
}

}  // namespace

std::string sha256_hex(const std::string& data)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

ExperimentConfig parse_config(const json& doc)
{
  if (!doc.is_object()) throw ConfigError("/", "config must be a JSON object");
  allow_keys(doc, "",
             {"schema_version", "preset", "operator", "geometry", "elasticity", "grids", "ladder", "tolerances",
              "chom_variant", "sources", "seed", "cell", "samples", "threads", "output_dir"});
  const int version = integer(need(doc, "", "schema_version"), "/schema_version");
  if (version != kConfigSchemaVersion)
    throw ConfigError("/schema_version", "unsupported schema version " + std::to_string(version));

  json r;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("/preset", "expected a string");
    r = preset(doc["preset"].get<std::string>());
  }
  // user fields patch the preset
  json user = doc;
  user.erase("schema_version");
  r.merge_patch(user);
  r["schema_version"] = version;

  ExperimentConfig c;
  c.schema_version = version;
  if (r.contains("preset")) c.preset = r["preset"].get<std::string>();
  const Geometry geo = parse_geometry(need(r, "", "geometry"));
  c.spec = parse_operator(need(r, "", "operator"), geo);

  if (r.contains("elasticity")) {
    const auto& e = r["elasticity"];
    allow_keys(e, "/elasticity", {"B", "C"});
    c.B = parse_tensor(need(e, "/elasticity", "B"), "/elasticity/B", geo);
    c.C = parse_tensor(need(e, "/elasticity", "C"), "/elasticity/C", geo);
  }

  if (r.contains("grids")) {
    const auto& g = r["grids"];
    allow_keys(g, "/grids", {"n", "m"});
    if (g.contains("n")) c.n = integer(g["n"], "/grids/n");
    c.m = g.contains("m") ? integer(g["m"], "/grids/m") : c.n;
  }
  if (c.n < 4 || (c.n & (c.n - 1)) != 0) throw ConfigError("/grids/n", "must be a power of 2, at least 4");
  if (c.m < 2 || c.m % 2 != 0) throw ConfigError("/grids/m", "must be even and at least 2");

  const auto& lad = need(r, "", "ladder");
  if (!lad.is_array()) throw ConfigError("/ladder", "expected an array");
  if (lad.empty()) throw ConfigError("/ladder", "empty eps ladder");
  for (std::size_t i = 0; i < lad.size(); ++i) {
    const std::string pp = "/ladder/" + std::to_string(i);
    const double eps = positive(lad[i], pp);
    int k = 0;
    try {
      k = inverse_scale(eps);
    } catch (const InvalidArgument&) {
      throw ConfigError(pp, "1/eps must be an integer");
    }
    if ((k & (k - 1)) != 0) throw ConfigError(pp, "eps must be 1/2^k");
    if (!c.ladder.empty() && !(eps < c.ladder.back())) throw ConfigError(pp, "ladder must be strictly decreasing");
    c.ladder.push_back(eps);
  }

  if (r.contains("tolerances")) {
    const auto& t = r["tolerances"];
    allow_keys(t, "/tolerances", {"cell", "fine", "homogenized", "linear"});
    if (t.contains("cell")) c.cell.tol = positive(t["cell"], "/tolerances/cell");
    if (t.contains("fine")) c.fine.tol = positive(t["fine"], "/tolerances/fine");
    if (t.contains("homogenized")) c.hom.tol = positive(t["homogenized"], "/tolerances/homogenized");
    if (t.contains("linear")) c.fine.cg_tol = positive(t["linear"], "/tolerances/linear");
  }

  if (r.contains("chom_variant")) {
    if (!r["chom_variant"].is_string()) throw ConfigError("/chom_variant", "expected a string");
    try {
      c.variant = parse_chom_variant(r["chom_variant"].get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ConfigError("/chom_variant", e.what());
    }
  }

  if (r.contains("sources")) {
    const auto& s = r["sources"];
    allow_keys(s, "/sources", {"f", "g"});
    if (s.contains("f")) {
      if (s["f"].is_number()) {
        c.f.kind = "constant";
        c.f.value = number(s["f"], "/sources/f");
      } else if (s["f"].is_string() && s["f"].get<std::string>() == "sine") {
        c.f.kind = "sine";
      } else {
        throw ConfigError("/sources/f", "expected a number or \"sine\"");
      }
    }
    if (s.contains("g")) {
      const auto g = pair(s["g"], "/sources/g");
      c.g = Vec2(g[0], g[1]);
    }
  }

  if (r.contains("seed")) {
    const auto& sd = r["seed"];
    if (!sd.is_number_integer() || (!sd.is_number_unsigned() && sd.get<std::int64_t>() < 0))
      throw ConfigError("/seed", "expected a non-negative integer");
    c.seed = r["seed"].get<std::uint64_t>();
  }
  if (r.contains("cell")) {
    allow_keys(r["cell"], "/cell", {"xi"});
    if (r["cell"].contains("xi")) {
      const auto x = pair(r["cell"]["xi"], "/cell/xi");
      c.xi = Vec2(x[0], x[1]);
    }
  }
  if (r.contains("samples")) {
    c.samples = integer(r["samples"], "/samples");
    if (c.samples < 20) throw ConfigError("/samples", "must be at least 20");
  }
  if (r.contains("threads")) {
    c.threads = integer(r["threads"], "/threads");
    if (c.threads < 1) throw ConfigError("/threads", "must be at least 1");
  }
  if (r.contains("output_dir")) {
    if (!r["output_dir"].is_string()) throw ConfigError("/output_dir", "expected a string");
    c.output_dir = r["output_dir"].get<std::string>();
  }

  c.resolved = r;
  c.hash = sha256_hex(r.dump());
  return c;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

StudyConfig study_config(const ExperimentConfig& c)
{
  if (c.m != c.n) throw ConfigError("/grids/m", "the corrector study resolves eps-cells with the cell grid: m must equal n");
  StudyConfig s;
  s.spec = c.spec;
  s.B = c.B;
  s.C = c.C;
  s.variant = c.variant;
  s.n = c.n;
  s.ladder = c.ladder;
  const SourceSpec f = c.f;
  s.f = [f](const Vec2& x) { return f.evaluate(x); };
  const Vec2 g = c.g;
  s.g = [g](const Vec2&) { return g; };
  s.cell = c.cell;
  s.fine = c.fine;
  s.hom = c.hom;
  s.threads = c.threads;
  return s;
}

}  // namespace hk
