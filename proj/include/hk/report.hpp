#pragma once

// JSON/CSV emission. Reports share one envelope:
// {schema_version, kind, provenance, results}. Numbers are written with the
// shortest representation that round-trips the double.

#include "hk/config.hpp"

#include <filesystem>

namespace hk {

inline constexpr int kReportSchemaVersion = 1;

using ojson = nlohmann::ordered_json;

ojson to_json(const Vec2& v);
/// Row-major nested rows.
ojson to_json(const Mat2& m);
/// T[i][j][k][l] nested arrays.
ojson tensor_json(const Tensor4& t);
ojson to_json(const RateFit& r);

ojson provenance(const ExperimentConfig& c, const std::vector<int>& domain_sizes);
ojson envelope(const std::string& kind, const ExperimentConfig& c, const std::vector<int>& domain_sizes,
               ojson results);

ojson corrector_json(const CorrectorReport& r);

/// Writes bytes to a file, replacing it; failures throw IoError with the path.
class IoError : public Error {
 public:
  using Error::Error;
};
void write_file(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const ojson& doc);
void write_field_file(const std::filesystem::path& path, const std::string& name, const NodalField& f);

}  // namespace hk
