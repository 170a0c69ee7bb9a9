#include "wcsplit/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wcsplit/errors.hpp"
#include "wcsplit/version.hpp"

namespace wcsplit::io {
namespace {

constexpr std::array<char, 4> kMagic = {'F', 'M', 'X', '1'};

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ": " + msg);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  return out;
}

// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split_record(const std::string& line, const std::string& source,
                                      std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) parse_fail(source, line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Reads non-empty records; returns (line number, fields).
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_records(
    std::istream& in, const std::string& source) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_record(line, source, line_no);
    for (auto& f : fields) f = trim(std::move(f));
    records.emplace_back(line_no, std::move(fields));
  }
  return records;
}

double parse_double(const std::string& text, const std::string& source, std::size_t line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    parse_fail(source, line, "expected a number, got '" + text + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteValue,
                source + ":" + std::to_string(line) + ": non-finite value '" + text + "'");
  }
  return value;
}

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

double decode_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | p[k];
  return std::bit_cast<double>(bits);
}

void encode_f64_le(double v, unsigned char* p) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) {
    p[k] = static_cast<unsigned char>(bits & 0xFF);
    bits >>= 8;
  }
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

FeatureMatrix read_fmx1(std::istream& in, const std::string& source) {
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12) {
    throw Error(ErrorCode::ParseError,
                source + ": byte " + std::to_string(bytes.size()) + ": truncated FMX1 header");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::ParseError, source + ": byte 0: bad magic, expected FMX1");
  }
  const std::uint32_t rows = read_u32_le(bytes.data() + 4);
  const std::uint32_t cols = read_u32_le(bytes.data() + 8);
  if (rows == 0) throw Error(ErrorCode::EmptyDataset, source + ": FMX1 file declares zero rows");
  if (cols == 0) throw Error(ErrorCode::DimensionMismatch, source + ": FMX1 file declares zero columns");
  const std::uint64_t expected = 12 + std::uint64_t{rows} * cols * 8;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch,
                source + ": byte " + std::to_string(std::min<std::uint64_t>(bytes.size(), expected)) +
                    ": payload is " + std::to_string(bytes.size() - 12) + " bytes, header declares " +
                    std::to_string(expected - 12));
  }
  FeatureMatrix m(rows, cols);
  const unsigned char* p = bytes.data() + 12;
  for (std::uint64_t k = 0; k < std::uint64_t{rows} * cols; ++k) {
    const double v = decode_f64_le(p + 8 * k);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteValue,
                  source + ": byte " + std::to_string(12 + 8 * k) + ": non-finite value");
    }
    m.data()[k] = v;
  }
  return m;
}

void write_fmx1(std::ostream& out, const FeatureMatrix& features) {
  out.write(kMagic.data(), 4);
  write_u32_le(out, static_cast<std::uint32_t>(features.rows()));
  write_u32_le(out, static_cast<std::uint32_t>(features.cols()));
  std::vector<unsigned char> payload(static_cast<std::size_t>(features.size()) * 8);
  for (Eigen::Index k = 0; k < features.size(); ++k) {
    encode_f64_le(features.data()[k], payload.data() + 8 * k);
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

void write_fmx1_file(const std::filesystem::path& path, const FeatureMatrix& features) {
  auto out = open_out(path);
  write_fmx1(out, features);
}

FeatureTable parse_feature_csv(std::istream& in, const std::string& source) {
  const auto records = read_records(in, source);
  if (records.empty()) parse_fail(source, 1, "missing header row");
  const auto& header = records.front().second;
  std::optional<std::size_t> label_col, domain_col;
  std::vector<std::size_t> numeric_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") label_col = c;
    else if (header[c] == "domain") domain_col = c;
    else numeric_cols.push_back(c);
  }
  if (numeric_cols.empty()) parse_fail(source, records.front().first, "no feature columns");
  const std::size_t rows = records.size() - 1;
  if (rows == 0) throw Error(ErrorCode::EmptyDataset, source + ": no data rows");

  FeatureTable table;
  table.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(numeric_cols.size()));
  if (label_col) table.labels.emplace();
  if (domain_col) table.domains.emplace();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& [line, fields] = records[r + 1];
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  source + ":" + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
      table.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          parse_double(fields[numeric_cols[k]], source, line);
    }
    if (label_col) table.labels->push_back(fields[*label_col]);
    if (domain_col) table.domains->push_back(fields[*domain_col]);
  }
  return table;
}

FeatureTable read_feature_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::array<char, 4> head{};
  in.read(head.data(), 4);
  const bool binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  if (binary) return FeatureTable{read_fmx1(in, path.string()), std::nullopt, std::nullopt};
  return parse_feature_csv(in, path.string());
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& features,
                       const std::vector<std::string>* labels,
                       const std::vector<std::string>* domains) {
  for (Eigen::Index c = 0; c < features.cols(); ++c) out << (c ? "," : "") << "f" << c;
  if (labels) out << ",label";
  if (domains) out << ",domain";
  out << "\n";
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      out << (c ? "," : "") << format_double(features(r, c));
    }
    if (labels) out << "," << csv_escape((*labels)[static_cast<std::size_t>(r)]);
    if (domains) out << "," << csv_escape((*domains)[static_cast<std::size_t>(r)]);
    out << "\n";
  }
}

std::vector<std::string> read_column_file(const std::filesystem::path& path,
                                          const std::string& column) {
  auto in = open_in(path);
  const std::string source = path.string();
  const auto records = read_records(in, source);
  if (records.empty()) parse_fail(source, 1, "missing header row");
  const auto& header = records.front().second;
  std::size_t col = 0;
  if (header.size() > 1) {
    auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) {
      parse_fail(source, records.front().first, "no column named '" + column + "'");
    }
    col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::string> values;
  values.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, fields] = records[r];
    if (fields.size() != header.size()) {
      parse_fail(source, line, "expected " + std::to_string(header.size()) + " fields");
    }
    values.push_back(fields[col]);
  }
  return values;
}

Dataset load_dataset(const DatasetPaths& paths) {
  FeatureTable table = read_feature_file(paths.features);
  const auto n = static_cast<std::size_t>(table.features.rows());

  std::optional<std::vector<std::string>> labels = std::move(table.labels);
  if (paths.labels) labels = read_column_file(*paths.labels, "label");
  if (!labels) {
    if (!paths.default_label) {
      throw Error(ErrorCode::InvalidArgument,
                  "no class labels: pass a labels file or a `label` column");
    }
    labels = std::vector<std::string>(n, *paths.default_label);
  }
  std::optional<std::vector<std::string>> domains = std::move(table.domains);
  if (paths.domains) domains = read_column_file(*paths.domains, "domain");

  if (labels->size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "labels: " + std::to_string(labels->size()) +
                                                  " entries for " + std::to_string(n) + " samples");
  }
  if (domains && domains->size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "domains: " + std::to_string(domains->size()) +
                                                  " entries for " + std::to_string(n) + " samples");
  }
  return Dataset(std::move(table.features), std::move(*labels), std::move(domains));
}

void write_split_csv(std::ostream& out, std::span<const Side> membership) {
  out << "index,assignment\n";
  for (std::size_t i = 0; i < membership.size(); ++i) {
    out << i << (membership[i] == Side::Val ? ",val\n" : ",train\n");
  }
}

void write_split_file(const std::filesystem::path& path, std::span<const Side> membership) {
  auto out = open_out(path);
  write_split_csv(out, membership);
}

std::vector<Side> parse_split_csv(std::istream& in, const std::string& source) {
  const auto records = read_records(in, source);
  if (records.empty()) parse_fail(source, 1, "missing header row");
  const auto& header = records.front().second;
  if (header.size() != 2 || header[0] != "index" || header[1] != "assignment") {
    parse_fail(source, records.front().first, "header must be 'index,assignment'");
  }
  const std::size_t n = records.size() - 1;
  std::vector<Side> membership(n, Side::Train);
  std::vector<bool> seen(n, false);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, fields] = records[r];
    if (fields.size() != 2) parse_fail(source, line, "expected 2 fields");
    std::size_t index = 0;
    const auto& text = fields[0];
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
      parse_fail(source, line, "bad index '" + text + "'");
    }
    if (index >= n) parse_fail(source, line, "index " + text + " out of range");
    if (seen[index]) parse_fail(source, line, "duplicate index " + text);
    seen[index] = true;
    if (fields[1] == "val") membership[index] = Side::Val;
    else if (fields[1] == "train") membership[index] = Side::Train;
    else parse_fail(source, line, "assignment must be 'train' or 'val', got '" + fields[1] + "'");
  }
  return membership;
}

std::vector<Side> read_split_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_split_csv(in, path.string());
}

std::map<std::string, double> read_tolerance_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string source = path.string();
  const auto records = read_records(in, source);
  if (records.empty()) parse_fail(source, 1, "missing header row");
  std::map<std::string, double> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, fields] = records[r];
    if (fields.size() != 2) parse_fail(source, line, "expected 'group,tolerance'");
    const double tol = parse_double(fields[1], source, line);
    if (tol < 0.0) parse_fail(source, line, "tolerance must be >= 0");
    out[fields[0]] = tol;
  }
  return out;
}

std::vector<std::pair<std::string, double>> read_keyed_values(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string source = path.string();
  const auto records = read_records(in, source);
  if (records.empty()) parse_fail(source, 1, "missing header row");
  if (records.front().second.size() != 2) {
    parse_fail(source, records.front().first, "expected two columns: split_id,value");
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& [line, fields] = records[r];
    if (fields.size() != 2) parse_fail(source, line, "expected 2 fields");
    out.emplace_back(fields[0], parse_double(fields[1], source, line));
  }
  return out;
}

nlohmann::json to_json(const KernelConfig& kernel) {
  nlohmann::json j;
  j["family"] = std::string(to_string(kernel.family));
  j["gamma_mode"] = std::string(to_string(kernel.gamma_mode));
  if (kernel.family == KernelFamily::Rbf) j["gamma"] = kernel.gamma;
  return j;
}

nlohmann::json to_json(const QuotaAudit& audit) {
  nlohmann::json j;
  j["group"] = audit.quota.group.name();
  j["label"] = audit.quota.group.label;
  if (audit.quota.group.domain) j["domain"] = *audit.quota.group.domain;
  j["total"] = audit.quota.total;
  j["val_target"] = audit.quota.val_target;
  j["val_lo"] = audit.quota.val_lo;
  j["val_hi"] = audit.quota.val_hi;
  j["tolerance"] = audit.quota.tolerance;
  j["achieved"] = audit.achieved;
  j["satisfied"] = audit.satisfied();
  return j;
}

nlohmann::json to_json(const MmdEstimate& estimate) {
  return {{"mmd_squared", estimate.mmd_squared}, {"mmd", estimate.mmd},
          {"n_train", estimate.n_t},             {"n_val", estimate.n_v},
          {"kernel", to_json(estimate.kernel)},  {"approximate", estimate.approximate},
          {"tool_version", kVersion}};
}

nlohmann::json to_json(const CorrelationResult& result) {
  return {{"rho", result.rho},
          {"p_value", result.p_value},
          {"n_points", result.n_points},
          {"p_approximate", result.p_approximate},
          {"tool_version", kVersion}};
}

nlohmann::json to_json(const ClassCountTrend& trend) {
  const auto series = [](const std::vector<MeanSe>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : v) arr.push_back({{"mean", m.mean}, {"se", m.se}});
    return arr;
  };
  nlohmann::json j;
  j["class_counts"] = trend.class_counts;
  j["repeats"] = trend.repeats;
  j["mmd_tv"] = series(trend.mmd_tv);
  if (!trend.mmd_te.empty()) {
    j["mmd_te"] = series(trend.mmd_te);
    j["mmd_ve"] = series(trend.mmd_ve);
  }
  j["random_mmd_tv"] = {{"mean", trend.random_mmd_tv.mean}, {"se", trend.random_mmd_tv.se}};
  j["tool_version"] = kVersion;
  return j;
}

nlohmann::json split_report_json(const SplitAssignment& assignment, const SplitReport& report) {
  nlohmann::json j;
  j["method"] = std::string(to_string(assignment.method()));
  j["seed"] = report.seed;
  j["objective_trace"] = report.objective_trace;
  j["final_objective"] = report.final_objective;
  j["final_mmd"] = report.final_mmd;
  j["final_mmd_squared"] = report.final_mmd_squared;
  j["final_mmd_squared_direct"] = report.final_mmd_squared_direct;
  j["identity_residual"] = report.identity_residual;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["restart_index"] = report.restart_index;
  if (assignment.cluster_branch()) {
    j["cluster_branch"] = std::string(to_string(*assignment.cluster_branch()));
  }
  j["n_train"] = assignment.train_count();
  j["n_val"] = assignment.val_count();
  nlohmann::json quotas = nlohmann::json::array();
  for (const auto& q : report.quotas) quotas.push_back(to_json(q));
  j["quotas"] = std::move(quotas);
  j["quotas_satisfied"] = quotas_satisfied(report.quotas);
  j["kernel"] = to_json(report.kernel);
  j["approximate"] = report.approximate;
  if (report.nystrom_landmarks) {
    j["nystrom"] = {{"landmarks", *report.nystrom_landmarks}, {"rank", *report.nystrom_rank}};
  }
  j["notes"] = report.notes;
  j["tool_version"] = kVersion;
  return j;
}

nlohmann::json baseline_report_json(const SplitAssignment& assignment,
                                    const std::vector<QuotaAudit>& quotas) {
  nlohmann::json j;
  j["method"] = std::string(to_string(assignment.method()));
  j["seed"] = assignment.seed();
  j["n_train"] = assignment.train_count();
  j["n_val"] = assignment.val_count();
  nlohmann::json q = nlohmann::json::array();
  for (const auto& a : quotas) q.push_back(to_json(a));
  j["quotas"] = std::move(q);
  j["quotas_satisfied"] = quotas_satisfied(quotas);
  j["warnings"] = assignment.warnings();
  j["tool_version"] = kVersion;
  return j;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

}  // namespace wcsplit::io
