#include <algorithm>
#include <filesystem>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "protosel/data.hpp"

using namespace protosel;

namespace {

unsigned as_bits(const Point& p) {
  unsigned v = 0;
  for (double x : p) v = v << 1 | (x == 1.0 ? 1U : 0U);
  return v;
}

struct Labeling {
  std::vector<unsigned> a, b, t;
};

Labeling labeling_of(const FiveFourStructure& s) {
  Labeling l;
  for (std::size_t i = 0; i < s.training.size(); ++i) {
    (s.training.label(i) == 0 ? l.a : l.b).push_back(as_bits(s.training[i].features));
  }
  for (const auto& p : s.transfer) l.t.push_back(as_bits(p));
  return l;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("protosel-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(FiveFour, Shape) {
  const auto s = gen_5_4();
  EXPECT_EQ(s.training.size(), 9u);
  EXPECT_EQ(s.transfer.size(), 7u);
  EXPECT_EQ(s.training.categories(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(s.training.category_counts(), (std::vector<std::size_t>{5, 4}));
  const auto t = s.transfer_set();
  EXPECT_EQ(t.size(), 7u);
  EXPECT_FALSE(t[0].label.has_value());
  for (const auto& p : s.training.points()) {
    for (double x : p.features) EXPECT_TRUE(x == 0.0 || x == 1.0);
  }
}

TEST(FiveFour, EachInvariantHolds) {
  const auto l = labeling_of(gen_5_4());
  const auto c = oracle::check_five_four(l.a, l.b, l.t);
  EXPECT_TRUE(c.covers_all_16);
  EXPECT_TRUE(c.sizes);
  EXPECT_TRUE(c.a_mode_one);
  EXPECT_TRUE(c.b_mode_zero);
  EXPECT_TRUE(c.a_ambiguous);
  EXPECT_TRUE(c.b_ambiguous);
}

TEST(FiveFour, StrictBMajorityIsInfeasible) {
  EXPECT_TRUE(oracle::search_five_four(true, false).empty());
}

TEST(FiveFour, IsFirstTypicalSolutionOfTheSearch) {
  const auto all = oracle::search_five_four(false, false);
  EXPECT_EQ(all.size(), 6060u);
  const auto typical = oracle::search_five_four(false, true);
  ASSERT_FALSE(typical.empty());
  const auto l = labeling_of(gen_5_4());
  EXPECT_EQ(l.a, typical.front().a);
  EXPECT_EQ(l.b, typical.front().b);
  EXPECT_EQ(l.t, typical.front().t);
}

TEST(Gaussian, CountsAndFlips) {
  const auto clean = gen_gaussian({10, 10}, {{0, 0}, {5, 5}}, {1, 1}, 0.0, 1);
  EXPECT_EQ(clean.data.size(), 20u);
  EXPECT_TRUE(clean.flipped.empty());
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(clean.data.label(i), i < 10 ? 0u : 1u);

  const auto noisy = gen_gaussian({30, 30}, {{0, 0}, {5, 5}}, {1, 1}, 0.1, 1);
  EXPECT_EQ(noisy.flipped.size(), 6u);
  EXPECT_TRUE(std::is_sorted(noisy.flipped.begin(), noisy.flipped.end()));
  for (std::size_t i = 0; i < 60; ++i) {
    const bool flipped = std::binary_search(noisy.flipped.begin(), noisy.flipped.end(), i);
    EXPECT_EQ(noisy.data.label(i) != (i < 30 ? 0u : 1u), flipped);
  }
}

TEST(Gaussian, FlipsGoToAnotherCategory) {
  const auto g = gen_gaussian({20, 20, 20}, {{0}, {5}, {10}}, {1, 1, 1}, 0.5, 4);
  EXPECT_EQ(g.flipped.size(), 30u);
  for (std::size_t i : g.flipped) EXPECT_NE(g.data.label(i), i / 20);
}

TEST(Gaussian, DeterministicPerSeed) {
  const auto a = gen_gaussian({5, 5}, {{0, 0}, {1, 1}}, {1, 1}, 0.2, 9);
  const auto b = gen_gaussian({5, 5}, {{0, 0}, {1, 1}}, {1, 1}, 0.2, 9);
  const auto c = gen_gaussian({5, 5}, {{0, 0}, {1, 1}}, {1, 1}, 0.2, 10);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.flipped, b.flipped);
  EXPECT_NE(a.data, c.data);
}

TEST(Gaussian, RejectsBadShapes) {
  EXPECT_THROW(gen_gaussian({5}, {{0}, {1}}, {1}, 0.0, 0), InvalidInput);
  EXPECT_THROW(gen_gaussian({5, 5}, {{0}, {1, 1}}, {1, 1}, 0.0, 0), InvalidInput);
  EXPECT_THROW(gen_gaussian({5, 5}, {{0}, {1}}, {1, -1}, 0.0, 0), InvalidInput);
  EXPECT_THROW(gen_gaussian({5, 5}, {{0}, {1}}, {1, 1}, 1.0, 0), InvalidInput);
  EXPECT_THROW(gen_gaussian({5}, {{0}}, {1}, 0.5, 0), InvalidInput);
}

TEST(Csv, Parses) {
  const auto d = parse_csv("x,y,label\n1,2,A\n3,4,B\n5,6,A\n");
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.n_features(), 2u);
  EXPECT_EQ(d.n_categories(), 2u);
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"x", "y"}));
  const auto order = parse_csv("x,label\n1,zeta\n2,alpha\n3,zeta\n");
  EXPECT_EQ(order.categories(), (std::vector<std::string>{"zeta", "alpha"}));
}

TEST(Csv, EmptyLabelIsUnlabelled) {
  const auto d = parse_csv("x,label\n1,A\n2,\n");
  EXPECT_TRUE(d[0].label.has_value());
  EXPECT_FALSE(d[1].label.has_value());
}

TEST(Csv, ErrorsCarryLineNumbers) {
  const auto message = [](const std::string& text) {
    try {
      parse_csv(text, "in.csv");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("x,y,label\n1,2,A\n3,B\n").find("in.csv:3"), std::string::npos);
  EXPECT_NE(message("x,label\n1,A\nabc,B\n").find("in.csv:3"), std::string::npos);
  EXPECT_NE(message("x,label\n1,A\nnan,B\n").find("in.csv:3"), std::string::npos);
  EXPECT_NE(message("").find("empty"), std::string::npos);
  EXPECT_NE(message("x,y\n1,2\n").find("label"), std::string::npos);
}

TEST(Csv, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto d = gen_gaussian({7, 8}, {{0, 0, 0}, {1, 2, 3}}, {1.3, 0.7}, 0.0, seed).data;
    EXPECT_EQ(parse_csv(to_csv(d)), d);
    const auto dir = temp_dir("csv");
    save_csv(d, dir / "d.csv");
    EXPECT_EQ(load_csv(dir / "d.csv"), d);
    EXPECT_EQ(to_csv(load_csv(dir / "d.csv")), to_csv(d));
  }
  const std::string with_transfer = to_csv(gen_5_4().training) + "0,0,1,0,\n";
  EXPECT_EQ(to_csv(parse_csv(with_transfer)), with_transfer);
}

TEST(Csv, CategoryOrderFollowsTheFile) {
  // B occurs first in the file, so the loaded category list starts with B;
  // every point keeps its coordinates and its label name.
  const Dataset d({{{1.0}, 1}, {{2.0}, 0}}, {"A", "B"});
  const auto back = parse_csv(to_csv(d));
  EXPECT_EQ(back.categories(), (std::vector<std::string>{"B", "A"}));
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].features, d[i].features);
    EXPECT_EQ(back.categories()[back.label(i)], d.categories()[d.label(i)]);
  }
  EXPECT_EQ(to_csv(back), to_csv(d));
}

TEST(Proportions, Examples) {
  const auto t = parse_proportions("f,A,B\n0,8,2\n1,5,5\n", 1);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.categories(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(t.rows()[0].total, 10.0);
  EXPECT_DOUBLE_EQ(t.rows()[0].proportions[0], 0.8);
  EXPECT_DOUBLE_EQ(t.rows()[0].proportions[1], 0.2);
  EXPECT_EQ(t.rows()[1].proportions, (std::vector<double>{0.5, 0.5}));
}

TEST(Proportions, Validation) {
  EXPECT_THROW(parse_proportions("f,A,B\n0,8,-2\n", 1), ParseError);
  EXPECT_THROW(parse_proportions("f,A,B\n0,0,0\n", 1), ParseError);
  EXPECT_THROW(parse_proportions("f,A,B\n0,1.5,2\n", 1), ParseError);
  EXPECT_THROW(parse_proportions("f,A,B\n0,8,2\n1,3,3\n", 1, true), ParseError);
  EXPECT_NO_THROW(parse_proportions("f,A,B\n0,8,2\n1,3,3\n", 1, false));
  EXPECT_THROW(parse_proportions("f,A,B\n0,8\n", 1), ParseError);
}

TEST(Proportions, RowsSumToOne) {
  Rng rng(3);
  std::string text = "x,y,A,B,C\n";
  for (int r = 0; r < 100; ++r) {
    text += std::to_string(r) + ",0," + std::to_string(rng.uniform_index(20)) + "," + std::to_string(rng.uniform_index(20)) +
            "," + std::to_string(1 + rng.uniform_index(20)) + "\n";
  }
  const auto t = parse_proportions(text, 2);
  for (const auto& row : t.rows()) {
    double m = 0, q = 0;
    for (double c : row.counts) m += c;
    for (double p : row.proportions) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      q += p;
    }
    EXPECT_EQ(m, row.total);
    EXPECT_NEAR(q, 1.0, 1e-9);
  }
}
