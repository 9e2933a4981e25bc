#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "stepdecay/data_io.hpp"

using namespace stepdecay;

TEST(Libsvm, ParsesNegativeRow) {
  const auto d = parse_libsvm("-1 3:0.5 7:1.25");
  ASSERT_EQ(d.n(), 1u);
  EXPECT_EQ(d.rows[0].label, -1);
  ASSERT_EQ(d.rows[0].features.size(), 2u);
  EXPECT_EQ(d.rows[0].features[0], (SparseEntry{2, 0.5}));  // 1-based 3 -> 0-based 2
  EXPECT_EQ(d.rows[0].features[1], (SparseEntry{6, 1.25}));
  EXPECT_EQ(d.d, 7u);
}

TEST(Libsvm, EmptyFeatureRow) {
  const auto d = parse_libsvm("+1");
  ASSERT_EQ(d.n(), 1u);
  EXPECT_EQ(d.rows[0].label, 1);
  EXPECT_TRUE(d.rows[0].features.empty());
}

TEST(Libsvm, MalformedTokenNamesLine) {
  try {
    parse_libsvm("1 a:b");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(Libsvm, ErrorsCarryLineNumbers) {
  auto line_of = [](std::string_view text) -> std::size_t {
    try {
      parse_libsvm(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("+1 1:2\n-1 4:1 2:1\n"), 2u);  // non-increasing
  EXPECT_EQ(line_of("+1 1:2\n\n-1 2:x\n"), 3u);    // non-numeric value
  EXPECT_EQ(line_of("2 1:1\n"), 1u);               // label
  EXPECT_EQ(line_of("+1 1:1\n-1 3\n"), 2u);        // missing colon
  EXPECT_EQ(line_of("+1 0:1\n"), 1u);              // index 0
  EXPECT_EQ(line_of("+1 2:1 2:3\n"), 1u);          // repeated index
}

TEST(Libsvm, LabelsRemappedAndCommentsIgnored) {
  const auto d = parse_libsvm("0 1:1 # zero label\n1 2:2\n# only a comment\n\n-1 3:3\n");
  ASSERT_EQ(d.n(), 3u);
  EXPECT_EQ(d.rows[0].label, -1);
  EXPECT_EQ(d.rows[1].label, 1);
  EXPECT_EQ(d.rows[2].label, -1);
}

TEST(Libsvm, DeclaredDimension) {
  EXPECT_EQ(parse_libsvm("+1 2:1", 10).d, 10u);
  EXPECT_THROW(parse_libsvm("+1 12:1", 10), ParseError);
}

TEST(Libsvm, RoundTripIsExact) {
  const auto data = synth_logistic_data(200, 7, 1.5, 3);
  const auto text = format_libsvm(data);
  const auto again = parse_libsvm(text, data.d);
  ASSERT_EQ(again.n(), data.n());
  for (std::size_t i = 0; i < data.n(); ++i) EXPECT_EQ(again.rows[i], data.rows[i]);
  EXPECT_EQ(format_libsvm(again), text);
}

TEST(Libsvm, RoundTripAwkwardValues) {
  const std::string text = "+1 1:1e-300 5:-0.1 9:123456789.125\n-1 2:0.30000000000000004\n";
  const auto d = parse_libsvm(text);
  const auto again = parse_libsvm(format_libsvm(d));
  ASSERT_EQ(again.n(), 2u);
  EXPECT_EQ(again.rows[0], d.rows[0]);
  EXPECT_EQ(again.rows[1], d.rows[1]);
}

TEST(Libsvm, SparseDenseAgreement) {
  const auto data = synth_logistic_data(50, 12, 1.0, 4);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd x(12);
  for (auto& v : x) v = n(rng);
  for (const auto& row : data.rows) {
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(12);
    for (const auto& e : row.features) dense[e.index] = e.value;
    const double ref = dense.dot(x);
    EXPECT_NEAR(row.dot(x), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Synth, NoiselessLimitMatchesPlantedSign) {
  const auto d = synth_logistic_data(500, 8, std::numeric_limits<double>::infinity(), 5);
  ASSERT_TRUE(d.planted);
  for (const auto& row : d.rows) {
    double s = 0.0;
    for (const auto& e : row.features) s += (*d.planted)[e.index] * e.value;
    EXPECT_EQ(row.label, s >= 0.0 ? 1 : -1);
  }
}

TEST(Synth, Deterministic) {
  const auto a = synth_logistic_data(1000, 10, 2.0, 77);
  const auto b = synth_logistic_data(1000, 10, 2.0, 77);
  EXPECT_EQ(format_libsvm(a), format_libsvm(b));
  EXPECT_NE(format_libsvm(a), format_libsvm(synth_logistic_data(1000, 10, 2.0, 78)));
}

TEST(Synth, BayesRuleAccuracy) {
  const auto d = synth_logistic_data(2000, 20, 2.0, 11);
  std::size_t right = 0;
  for (const auto& row : d.rows) {
    double s = 0.0;
    for (const auto& e : row.features) s += (*d.planted)[e.index] * e.value;
    right += ((s >= 0.0 ? 1 : -1) == row.label) ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(right) / 2000.0, 0.8);
}

TEST(Split, SizesAndPartition) {
  const auto data = synth_logistic_data(100, 3, 1.0, 1);
  const auto [a, b] = train_test_split(data, 0.75, 9);
  EXPECT_EQ(a.n(), 75u);
  EXPECT_EQ(b.n(), 25u);
  std::vector<std::string> orig, parts;
  std::istringstream all(format_libsvm(data));
  for (std::string line; std::getline(all, line);) orig.push_back(line);
  for (const auto* part : {&a, &b}) {
    std::istringstream in(format_libsvm(*part));
    for (std::string line; std::getline(in, line);) parts.push_back(line);
  }
  std::sort(orig.begin(), orig.end());
  std::sort(parts.begin(), parts.end());
  EXPECT_EQ(orig, parts);

  const auto [c, e] = train_test_split(data, 0.75, 9);
  EXPECT_EQ(format_libsvm(a), format_libsvm(c));
  EXPECT_EQ(format_libsvm(b), format_libsvm(e));
}

TEST(Split, TinyAndInvalid) {
  const auto two = parse_libsvm("+1 1:1\n-1 1:2\n");
  const auto [a, b] = train_test_split(two, 0.5, 0);
  EXPECT_EQ(a.n(), 1u);
  EXPECT_EQ(b.n(), 1u);
  EXPECT_THROW(train_test_split(parse_libsvm("+1 1:1\n"), 0.5, 0), std::invalid_argument);
  EXPECT_THROW(train_test_split(two, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(train_test_split(two, 0.0, 0), std::invalid_argument);
}

TEST(Csv, HeaderAndRoundTripFormatting) {
  std::ostringstream os;
  CsvWriter csv(os, {"a", "b", "c"});
  csv.cell(0.1).cell(std::int64_t{7}).cell("x");
  csv.end_row();
  csv.empty().cell(1e-300).cell(-0.0);
  csv.end_row();
  EXPECT_EQ(os.str(), "a,b,c\n0.1,7,x\n,1e-300,-0\n");
  EXPECT_THROW(csv.end_row(), std::logic_error);
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(v)), v);
}
