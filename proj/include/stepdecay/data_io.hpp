#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stepdecay {

struct SparseEntry {
  std::int32_t index = 0;  // 0-based internally; 1-based in LIBSVM text
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

struct SparseRow {
  int label = 1;  // -1 or +1
  std::vector<SparseEntry> features;

  double dot(const Eigen::VectorXd& x) const;
  double squared_norm() const;

  friend bool operator==(const SparseRow&, const SparseRow&) = default;
};

struct SparseDataset {
  std::size_t d = 0;
  std::vector<SparseRow> rows;
  std::string provenance;
  /// Generating weight vector, set by synth_logistic_data only.
  std::optional<std::vector<double>> planted;

  std::size_t n() const { return rows.size(); }
  double max_row_norm2() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses `label idx:val idx:val ...` lines. Blank lines are skipped, text
/// after '#' is ignored, labels 0/1 map to -1/+1. `d` pins the feature
/// dimension; otherwise it is the largest index seen.
SparseDataset parse_libsvm(std::istream& in, std::optional<std::size_t> d = std::nullopt,
                           std::string provenance = {});
SparseDataset parse_libsvm(std::string_view text, std::optional<std::size_t> d = std::nullopt);
SparseDataset load_libsvm(const std::string& path, std::optional<std::size_t> d = std::nullopt);

void write_libsvm(std::ostream& out, const SparseDataset& data);
std::string format_libsvm(const SparseDataset& data);

/// Gaussian features, planted weight vector scaled to norm sqrt(d), and
/// P(label = +1 | a) = sigmoid(separation * <w, a>). separation = +inf gives
/// noiseless labels sign(<w, a>).
SparseDataset synth_logistic_data(std::size_t n, std::size_t d, double separation,
                                  std::uint64_t seed);

/// Shuffled split; the first part has ceil(fraction * n) rows.
std::pair<SparseDataset, SparseDataset> train_test_split(const SparseDataset& data,
                                                         double fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------
// CSV emission: '.' decimal separator, LF line endings, mandatory header.
// ---------------------------------------------------------------------------

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  CsvWriter& cell(double value);
  template <std::integral I>
  CsvWriter& cell(I value) {
    return integer(static_cast<std::int64_t>(value));
  }
  CsvWriter& cell(std::string_view text);
  CsvWriter& empty();
  void end_row();

 private:
  CsvWriter& integer(std::int64_t value);
  void sep();
  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

}  // namespace stepdecay
