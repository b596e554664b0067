#include "atomnet/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace atomnet {

DataSet make_dataset(Eigen::MatrixXd features, Eigen::VectorXd labels) {
  if (features.rows() < 1 || features.cols() < 1)
    throw ValidationError("dataset needs at least one feature dimension and one point");
  if (labels.size() != features.cols())
    throw ValidationError("label count does not match point count");
  if (!features.allFinite() || !labels.allFinite())
    throw ValidationError("dataset contains non-finite values");
  return DataSet{std::move(features), std::move(labels)};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace, including a trailing \r from CRLF files
    size_t a = field.find_first_not_of(" \t\r\n");
    size_t b = field.find_last_not_of(" \t\r\n");
    fields.push_back(a == std::string::npos ? std::string() : field.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_strict_double(const std::string& s, int line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  if (!std::isfinite(value))
    throw ValidationError("line " + std::to_string(line_no) + ": non-finite value '" + s + "'");
  return value;
}

}  // namespace

DataSet load_dataset(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty dataset file: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  int label_idx = -1;
  for (size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) label_idx = static_cast<int>(j);
  if (label_idx < 0)
    throw ValidationError("label column '" + label_column + "' not found in " + path);
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) throw ValidationError("no feature columns in " + path);

  std::vector<double> values;  // row-major N x d
  std::vector<double> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    for (size_t j = 0; j < fields.size(); ++j) {
      const double v = parse_strict_double(fields[j], line_no);
      if (static_cast<int>(j) == label_idx)
        labels.push_back(v);
      else
        values.push_back(v);
    }
  }
  const int n = static_cast<int>(labels.size());
  if (n < 1) throw ValidationError("no data rows in " + path);

  Eigen::MatrixXd features(d, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) features(j, i) = values[static_cast<size_t>(i) * d + j];
  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(labels.data(), n);
  return make_dataset(std::move(features), std::move(y));
}

void require_binary_labels(const DataSet& data) {
  for (int i = 0; i < data.count(); ++i)
    if (data.labels[i] != 1.0 && data.labels[i] != -1.0)
      throw ValidationError("label " + std::to_string(i) + " is " +
                            std::to_string(data.labels[i]) + "; classification needs +/-1");
}

Activation activation_vector(const DataSet& data, const Eigen::VectorXd& w, double b,
                             double alpha) {
  if (alpha == 1.0) throw ValidationError("activation slope alpha must differ from 1");
  if (w.size() != data.dim()) throw ValidationError("weight dimension mismatch");
  Eigen::VectorXd pre = data.features.transpose() * w;
  pre.array() += b;
  Activation act;
  act.alpha = alpha;
  act.values = pre.unaryExpr([alpha](double v) { return leaky_relu(v, alpha); });
  return act;
}

std::uint64_t dataset_digest(const DataSet& data) {
  // FNV-1a over the raw IEEE-754 bytes, with shape mixed in first.  Not
  // cryptographic; it only guards against accidentally mixing artifacts.
  std::uint64_t h = 1469598103934665603ull;
  auto mix_bytes = [&h](const void* p, size_t len) {
    const unsigned char* bytes = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t d = static_cast<std::uint64_t>(data.dim());
  const std::uint64_t n = static_cast<std::uint64_t>(data.count());
  mix_bytes(&d, sizeof d);
  mix_bytes(&n, sizeof n);
  for (int i = 0; i < data.count(); ++i)
    for (int j = 0; j < data.dim(); ++j) {
      const double v = data.features(j, i);
      mix_bytes(&v, sizeof v);
    }
  for (int i = 0; i < data.count(); ++i) {
    const double v = data.labels[i];
    mix_bytes(&v, sizeof v);
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return std::string(buf);
}

}  // namespace atomnet
