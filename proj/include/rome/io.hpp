#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rome/encoder.hpp"
#include "rome/probe.hpp"

namespace rome {

inline constexpr int kArtifactVersion = 1;

std::string sha256_hex(std::string_view bytes);
/// Hash of the compact dump; nlohmann::json keeps object keys sorted, so
/// equal documents hash equally.
std::string json_hash(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);  // row-major flat list
Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const char* what);

struct ProbeArtifact {
  FluctuationEstimate fluct;
  ResponseKernel kernel;
  nlohmann::json metadata;  // model, params, params_hash, seeds, epsilon, trials
};

nlohmann::json probe_to_json(const ProbeArtifact& a);
ProbeArtifact probe_from_json(const nlohmann::json& j);

struct EncoderProvenance {
  std::string operator_hash;
  std::string probe_hash;
  std::map<int, double> weights;
  std::string kind;  // rome | random | ascent
};

nlohmann::json encoder_to_json(const Encoder& e, const EncoderProvenance& prov);
Encoder encoder_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed, trailing newline, sorted keys.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

/// CSV with a header row, ',' separator, LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Fixed formatting for numbers in CSV bodies ("%.12g"; NaN → "nan").
std::string fmt_num(double v);

}  // namespace rome
