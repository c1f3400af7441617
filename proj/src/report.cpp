#include "hk/report.hpp"

#include <fstream>
#include <sstream>

namespace hk {

ojson to_json(const Vec2& v) { return ojson::array({v(0), v(1)}); }

ojson to_json(const Mat2& m) { return ojson::array({to_json(Vec2(m.row(0))), to_json(Vec2(m.row(1)))}); }

ojson tensor_json(const Tensor4& t)
{
  ojson out = ojson::array();
  for (int i = 0; i < 2; ++i) {
    ojson a = ojson::array();
    for (int j = 0; j < 2; ++j) {
      ojson b = ojson::array();
      for (int k = 0; k < 2; ++k) b.push_back({t(flat(i, j), flat(k, 0)), t(flat(i, j), flat(k, 1))});
      a.push_back(b);
    }
    out.push_back(a);
  }
  return out;
}

ojson to_json(const RateFit& r)
{
  if (r.floor_reached) return ojson{{"slope", nullptr}, {"floor_reached", true}};
  return ojson{{"slope", r.slope}, {"floor_reached", false}};
}

ojson provenance(const ExperimentConfig& c, const std::vector<int>& domain_sizes)
{
  ojson p;
  p["config_hash"] = c.hash;
  p["config_schema_version"] = c.schema_version;
  p["preset"] = c.preset.empty() ? ojson(nullptr) : ojson(c.preset);
  p["operator"] = c.spec.fingerprint();
  p["grids"] = {{"n", c.n}, {"m", c.m}, {"N", domain_sizes}};
  p["tolerances"] = {{"cell", c.cell.tol},
                     {"fine", c.fine.tol},
                     {"homogenized", c.hom.tol},
                     {"linear", c.fine.cg_tol}};
  p["chom_variant"] = to_string(c.variant);
  p["seed"] = c.seed;
  p["config"] = c.resolved;
  return p;
}

ojson envelope(const std::string& kind, const ExperimentConfig& c, const std::vector<int>& domain_sizes,
               ojson results)
{
  ojson doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["kind"] = kind;
  doc["provenance"] = provenance(c, domain_sizes);
  doc["results"] = std::move(results);
  return doc;
}

ojson corrector_json(const CorrectorReport& r)
{
  ojson out;
  out["norm_p"] = r.norm_p;
  out["chom_variant"] = r.variant;
  ojson ent = ojson::array();
  for (const auto& e : r.entries) {
    ojson j;
    j["epsilon"] = e.eps;
    j["N"] = e.N;
    j["E_exp"] = e.errors.E_exp;
    j["E_avg"] = e.errors.E_avg;
    j["E_dm"] = e.errors.E_dm;
    j["E_nocorr"] = e.errors.E_nocorr;
    j["interior"] = {{"E_exp", e.errors.E_exp_interior},
                     {"E_avg", e.errors.E_avg_interior},
                     {"E_dm", e.errors.E_dm_interior},
                     {"E_nocorr", e.errors.E_nocorr_interior}};
    j["flux_identity_max"] = e.flux_identity_max;
    j["maxwell"] = {{"pairing", to_json(e.maxwell_pairing)},
                    {"limit", to_json(e.maxwell_limit)},
                    {"discrepancy", e.maxwell_discrepancy}};
    j["elastic"] = {{"functional_eps", e.elastic_functional_eps},
                    {"functional_hom", e.elastic_functional_hom},
                    {"discrepancy", e.elastic_discrepancy}};
    j["energy_ratio"] = e.energy_ratio;
    j["fine"] = {{"iterations", e.fine_iterations}, {"residual", e.fine_residual}};
    j["homogenized"] = {{"iterations", e.hom_iterations}, {"residual", e.hom_residual}};
    ent.push_back(j);
  }
  out["entries"] = ent;
  out["rates"] = {{"E_exp", to_json(r.rate_exp)},
                  {"E_avg", to_json(r.rate_avg)},
                  {"E_dm", to_json(r.rate_dm)},
                  {"E_nocorr", to_json(r.rate_nocorr)},
                  {"maxwell", to_json(r.rate_maxwell)},
                  {"elastic", to_json(r.rate_elastic)}};
  out["B_hom"] = r.B_hom ? tensor_json(*r.B_hom) : ojson(nullptr);
  out["C_hom"] = r.C_hom ? tensor_json(*r.C_hom) : ojson(nullptr);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const ojson& doc) { write_file(path, doc.dump(2) + "\n"); }

void write_field_file(const std::filesystem::path& path, const std::string& name, const NodalField& f)
{
  std::ostringstream os;
  write_field(os, name, f);
  write_file(path, os.str());
}

}  // namespace hk
