#include "stepdecay/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "stepdecay/random.hpp"

namespace stepdecay {

double SparseRow::dot(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (const auto& e : features) s += e.value * x[e.index];
  return s;
}

double SparseRow::squared_norm() const {
  double s = 0.0;
  for (const auto& e : features) s += e.value * e.value;
  return s;
}

double SparseDataset::max_row_norm2() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.squared_norm());
  return m;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

bool parse_index(std::string_view tok, std::int64_t& out) {
  if (tok.empty()) return false;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

int parse_label(std::string_view tok, std::size_t line) {
  double v = 0.0;
  if (!parse_double(tok, v)) {
    throw ParseError(line, "unparseable label '" + std::string(tok) + "'");
  }
  if (v == 1.0) return 1;
  if (v == -1.0 || v == 0.0) return -1;
  throw ParseError(line, "label '" + std::string(tok) + "' is not one of -1, 0, +1");
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, std::optional<std::size_t> d,
                           std::string provenance) {
  SparseDataset data;
  data.provenance = std::move(provenance);
  std::size_t max_index = 0;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    SparseRow row;
    std::size_t pos = 0;
    bool first = true;
    std::int64_t prev = 0;
    while (pos < line.size()) {
      const auto end = std::min(line.find_first_of(" \t", pos), line.size());
      const std::string_view tok = line.substr(pos, end - pos);
      pos = line.find_first_not_of(" \t", end);
      if (pos == std::string_view::npos) pos = line.size();
      if (first) {
        row.label = parse_label(tok, line_no);
        first = false;
        continue;
      }
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "malformed feature '" + std::string(tok) + "' (expected idx:val)");
      }
      std::int64_t idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx < 1) {
        throw ParseError(line_no, "bad feature index in '" + std::string(tok) + "'");
      }
      if (!parse_double(tok.substr(colon + 1), val)) {
        throw ParseError(line_no, "non-numeric value in '" + std::string(tok) + "'");
      }
      if (idx <= prev) {
        throw ParseError(line_no, "feature indices must be strictly increasing (" +
                                      std::to_string(idx) + " after " + std::to_string(prev) + ")");
      }
      if (idx > std::numeric_limits<std::int32_t>::max()) {
        throw ParseError(line_no, "feature index too large");
      }
      if (d && static_cast<std::size_t>(idx) > *d) {
        throw ParseError(line_no, "feature index " + std::to_string(idx) +
                                      " exceeds declared dimension " + std::to_string(*d));
      }
      prev = idx;
      max_index = std::max(max_index, static_cast<std::size_t>(idx));
      row.features.push_back({static_cast<std::int32_t>(idx - 1), val});
    }
    data.rows.push_back(std::move(row));
  }
  data.d = d.value_or(max_index);
  return data;
}

SparseDataset parse_libsvm(std::string_view text, std::optional<std::size_t> d) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in, d, "inline text");
}

SparseDataset load_libsvm(const std::string& path, std::optional<std::size_t> d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return parse_libsvm(in, d, path);
}

void write_libsvm(std::ostream& out, const SparseDataset& data) {
  for (const auto& row : data.rows) {
    out << (row.label > 0 ? "+1" : "-1");
    for (const auto& e : row.features) out << ' ' << (e.index + 1) << ':' << format_double(e.value);
    out << '\n';
  }
}

std::string format_libsvm(const SparseDataset& data) {
  std::ostringstream os;
  write_libsvm(os, data);
  return os.str();
}

SparseDataset synth_logistic_data(std::size_t n, std::size_t d, double separation,
                                  std::uint64_t seed) {
  if (n == 0 || d == 0) throw std::invalid_argument("synth_logistic_data: n and d must be >= 1");
  if (!(separation >= 0.0)) throw std::invalid_argument("synth_logistic_data: separation must be >= 0");
  Rng rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> w(d);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& wi : w) {
      wi = normal(rng);
      norm2 += wi * wi;
    }
  } while (norm2 == 0.0);
  const double scale = std::sqrt(static_cast<double>(d) / norm2);
  for (auto& wi : w) wi *= scale;

  SparseDataset data;
  data.d = d;
  data.rows.resize(n);
  std::ostringstream prov;
  prov << "synthetic logistic n=" << n << " d=" << d << " separation=" << separation
       << " seed=" << seed;
  data.provenance = prov.str();
  for (auto& row : data.rows) {
    row.features.resize(d);
    double score = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double a = normal(rng);
      row.features[j] = {static_cast<std::int32_t>(j), a};
      score += w[j] * a;
    }
    const double u = uniform01(rng);
    if (std::isinf(separation)) {
      row.label = score >= 0.0 ? 1 : -1;
    } else {
      const double p_pos = 1.0 / (1.0 + std::exp(-separation * score));
      row.label = u < p_pos ? 1 : -1;
    }
  }
  data.planted = std::move(w);
  return data;
}

std::pair<SparseDataset, SparseDataset> train_test_split(const SparseDataset& data,
                                                         double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("train_test_split: fraction must lie in (0, 1)");
  }
  const std::size_t n = data.n();
  if (n < 2) throw std::invalid_argument("train_test_split: need at least 2 rows");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0));
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }
  auto first_size = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  first_size = std::clamp<std::size_t>(first_size, 1, n - 1);

  std::pair<SparseDataset, SparseDataset> out;
  for (auto* part : {&out.first, &out.second}) {
    part->d = data.d;
    part->provenance = data.provenance;
    part->planted = data.planted;
  }
  out.first.provenance += " [split " + std::to_string(first_size) + "/" + std::to_string(n) + " a]";
  out.second.provenance += " [split " + std::to_string(first_size) + "/" + std::to_string(n) + " b]";
  for (std::size_t k = 0; k < n; ++k) {
    (k < first_size ? out.first : out.second).rows.push_back(data.rows[order[k]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::sep() {
  if (in_row_ == columns_) throw std::logic_error("CsvWriter: too many cells in row");
  if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::cell(double value) {
  sep();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::integer(std::int64_t value) {
  sep();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  sep();
  out_ << text;
  return *this;
}

CsvWriter& CsvWriter::empty() {
  sep();
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("CsvWriter: incomplete row");
  out_ << '\n';
  in_row_ = 0;
}

}  // namespace stepdecay
