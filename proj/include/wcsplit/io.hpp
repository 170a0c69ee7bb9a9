#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wcsplit/analysis.hpp"
#include "wcsplit/core_model.hpp"
#include "wcsplit/mmd.hpp"

namespace wcsplit::io {

// Feature files are either CSV (header row, numeric columns, optional `label`
// and `domain` columns) or binary FMX1:
//   "FMX1" | u32 LE rows | u32 LE cols | rows*cols f64 LE, row-major.
struct FeatureTable {
  FeatureMatrix features;
  std::optional<std::vector<std::string>> labels;
  std::optional<std::vector<std::string>> domains;
};

FeatureTable read_feature_file(const std::filesystem::path& path);
FeatureTable parse_feature_csv(std::istream& in, const std::string& source_name);

FeatureMatrix read_fmx1(std::istream& in, const std::string& source_name);
void write_fmx1(std::ostream& out, const FeatureMatrix& features);
void write_fmx1_file(const std::filesystem::path& path, const FeatureMatrix& features);
void write_feature_csv(std::ostream& out, const FeatureMatrix& features,
                       const std::vector<std::string>* labels = nullptr,
                       const std::vector<std::string>* domains = nullptr);

// One-column CSV with a header line. With several columns, the column named
// `column` is used.
std::vector<std::string> read_column_file(const std::filesystem::path& path,
                                          const std::string& column);

struct DatasetPaths {
  std::filesystem::path features;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> domains;
  // Label given to every sample when no labels are supplied anywhere; without
  // it, missing labels are an error.
  std::optional<std::string> default_label;
};

// External label/domain files take precedence over embedded CSV columns.
Dataset load_dataset(const DatasetPaths& paths);

// Split files: header `index,assignment`, one row per sample, values
// `train` / `val`, rows in index order.
void write_split_csv(std::ostream& out, std::span<const Side> membership);
void write_split_file(const std::filesystem::path& path, std::span<const Side> membership);
std::vector<Side> parse_split_csv(std::istream& in, const std::string& source_name);
std::vector<Side> read_split_file(const std::filesystem::path& path);

// `group,tolerance` rows keyed by GroupKey::name().
std::map<std::string, double> read_tolerance_file(const std::filesystem::path& path);

// Two-column CSV with header: split_id, numeric value.
std::vector<std::pair<std::string, double>> read_keyed_values(const std::filesystem::path& path);

nlohmann::json to_json(const KernelConfig& kernel);
nlohmann::json to_json(const QuotaAudit& audit);
nlohmann::json to_json(const MmdEstimate& estimate);
nlohmann::json to_json(const CorrelationResult& result);
nlohmann::json to_json(const ClassCountTrend& trend);

// Stable report schema shared by the CLI and any embedding front-end.
nlohmann::json split_report_json(const SplitAssignment& assignment, const SplitReport& report);
// Report for splits that were not produced by clustering.
nlohmann::json baseline_report_json(const SplitAssignment& assignment,
                                    const std::vector<QuotaAudit>& quotas);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace wcsplit::io
