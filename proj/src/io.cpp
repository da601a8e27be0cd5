#include "rome/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "rome/error.hpp"

namespace rome {

using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string json_hash(const json& j) { return sha256_hex(j.dump()); }

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols) {
    throw Error(ErrorKind::Config, fmt::format("{}: expected {} row-major entries", what, rows * cols));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = j[static_cast<std::size_t>(i * cols + c)];
      if (!v.is_number()) throw Error(ErrorKind::Config, fmt::format("{}: non-numeric entry", what));
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

namespace {

const json& field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Config, fmt::format("{}: missing key '{}'", what, key));
  return j.at(key);
}

void check_version(const json& j, const char* what) {
  const int v = field(j, "version", what).get<int>();
  if (v != kArtifactVersion) {
    throw Error(ErrorKind::Config, fmt::format("{}: unsupported artifact version {}", what, v));
  }
}

}  // namespace

json probe_to_json(const ProbeArtifact& a) {
  json j;
  j["version"] = kArtifactVersion;
  j["obs_dim"] = a.kernel.obs_dim();
  j["n_in"] = a.kernel.n_in();
  j["k_max"] = a.kernel.k_max;
  j["mean"] = matrix_to_json(a.fluct.mean.transpose());
  j["sigma_ref"] = matrix_to_json(a.fluct.sigma_ref);
  json blocks = json::array();
  for (const auto& b : a.kernel.blocks) blocks.push_back(matrix_to_json(b));
  j["blocks"] = std::move(blocks);
  json meta = a.metadata.is_object() ? a.metadata : json::object();
  meta["epsilon"] = a.kernel.probe_amplitude;
  meta["trials"] = a.kernel.trials;
  meta["sample_count"] =
      a.fluct.sample_count == FluctuationEstimate::kAnalytic ? json("analytic") : json(a.fluct.sample_count);
  meta["stationary"] = a.fluct.stationary;
  std::vector<std::string> warnings = a.fluct.warnings;
  warnings.insert(warnings.end(), a.kernel.warnings.begin(), a.kernel.warnings.end());
  meta["warnings"] = warnings;
  j["metadata"] = std::move(meta);
  return j;
}

ProbeArtifact probe_from_json(const json& j) {
  constexpr const char* what = "probe artifact";
  check_version(j, what);
  const auto obs_dim = field(j, "obs_dim", what).get<Eigen::Index>();
  const auto n_in = field(j, "n_in", what).get<Eigen::Index>();
  const int k_max = field(j, "k_max", what).get<int>();
  if (obs_dim < 1 || n_in < 1 || k_max < 1) throw Error(ErrorKind::Config, "probe artifact: bad dimensions");
  ProbeArtifact a;
  a.fluct.mean = matrix_from_json(field(j, "mean", what), 1, obs_dim, "probe artifact mean").transpose();
  a.fluct.sigma_ref = matrix_from_json(field(j, "sigma_ref", what), obs_dim, obs_dim, "probe artifact sigma_ref");
  const json& blocks = field(j, "blocks", what);
  if (!blocks.is_array() || static_cast<int>(blocks.size()) != k_max) {
    throw Error(ErrorKind::Config, "probe artifact: blocks must hold k_max matrices");
  }
  a.kernel.k_max = k_max;
  for (const auto& b : blocks) a.kernel.blocks.push_back(matrix_from_json(b, obs_dim, n_in, "probe artifact block"));
  a.metadata = field(j, "metadata", what);
  a.kernel.probe_amplitude = a.metadata.value("epsilon", 0.0);
  a.kernel.trials = a.metadata.value("trials", 0);
  const json& count = a.metadata.contains("sample_count") ? a.metadata.at("sample_count") : json();
  a.fluct.sample_count = count.is_number() ? count.get<std::size_t>() : FluctuationEstimate::kAnalytic;
  a.fluct.stationary = a.metadata.value("stationary", true);
  return a;
}

json encoder_to_json(const Encoder& e, const EncoderProvenance& prov) {
  json j;
  j["version"] = kArtifactVersion;
  j["n_in"] = e.n_in();
  j["m"] = e.channels();
  j["P"] = e.power;
  j["r"] = e.active_directions;
  j["power_split"] = e.power_split;
  j["G"] = matrix_to_json(e.g);
  j["input_cov"] = matrix_to_json(e.input_cov);
  j["predicted_objective"] = std::isfinite(e.predicted_objective) ? json(e.predicted_objective) : json(nullptr);
  j["degenerate"] = e.degenerate;
  json weights = json::object();
  for (const auto& [k, w] : prov.weights) weights[std::to_string(k)] = w;
  j["provenance"] = {{"kind", prov.kind},
                     {"operator_hash", prov.operator_hash},
                     {"probe_hash", prov.probe_hash},
                     {"weights", weights}};
  return j;
}

Encoder encoder_from_json(const json& j) {
  constexpr const char* what = "encoder";
  check_version(j, what);
  const auto n_in = field(j, "n_in", what).get<Eigen::Index>();
  const auto m = field(j, "m", what).get<Eigen::Index>();
  Encoder e;
  e.g = matrix_from_json(field(j, "G", what), n_in, m, "encoder G");
  e.input_cov = matrix_from_json(field(j, "input_cov", what), m, m, "encoder input_cov");
  e.power = field(j, "P", what).get<double>();
  e.active_directions = field(j, "r", what).get<int>();
  e.power_split = field(j, "power_split", what).get<std::vector<double>>();
  const json& obj = field(j, "predicted_objective", what);
  e.predicted_objective = obj.is_number() ? obj.get<double>() : std::numeric_limits<double>::quiet_NaN();
  e.degenerate = j.value("degenerate", false);
  return e;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::Io, fmt::format("write failed for {}", path.string()));
}

void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) {
    throw Error(ErrorKind::Dimension, fmt::format("csv row has {} fields, header has {}", row.size(), header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.12g}", v);
}

}  // namespace rome
