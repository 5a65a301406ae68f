#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "protosel/data.hpp"
#include "protosel/nn.hpp"
#include "protosel/refset_io.hpp"

using namespace protosel;

namespace {

ReferenceSet make_set(std::vector<std::pair<Point, Category>> pts, std::vector<std::string> cats = {"A", "B"}) {
  std::vector<LabeledPoint> lp;
  for (auto& [x, c] : pts) lp.push_back({x, c});
  return ReferenceSet(std::move(lp), std::move(cats), Provenance::generated);
}

ReferenceSet random_set(Rng& rng, std::size_t size, std::size_t dims, std::size_t cats) {
  std::vector<LabeledPoint> lp;
  for (std::size_t i = 0; i < size; ++i) {
    Point p(dims);
    for (double& v : p) v = 4.0 * rng.uniform01();
    lp.push_back({p, rng.uniform_index(cats)});
  }
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cats; ++c) names.push_back(std::string(1, static_cast<char>('A' + c)));
  return ReferenceSet(std::move(lp), names, Provenance::generated);
}

Point random_query(Rng& rng, std::size_t dims) {
  Point p(dims);
  for (double& v : p) v = 5.0 * rng.uniform01() - 0.5;
  return p;
}

}  // namespace

TEST(ReferenceSet, Invariants) {
  EXPECT_THROW(ReferenceSet({}, {"A"}, Provenance::generated), InvalidInput);
  EXPECT_THROW(ReferenceSet({{{1.0}, std::nullopt}}, {"A"}, Provenance::generated), InvalidInput);
  EXPECT_THROW(ReferenceSet({{{1.0}, 0}, {{1.0, 2.0}, 0}}, {"A"}, Provenance::generated), InvalidInput);
  EXPECT_THROW(ReferenceSet({{{1.0}, 0}}, {"A"}, Provenance::selected), InvalidInput);
  Dataset d({{{0.0}, 0}, {{1.0}, 1}, {{2.0}, 0}}, {"A", "B"});
  const auto s = ReferenceSet::selected(d, {2, 1});
  EXPECT_TRUE(s.matches_source(d));
  EXPECT_EQ(s[0].features, Point{2.0});
  EXPECT_THROW(ReferenceSet::selected(d, {5}), InvalidInput);
}

TEST(Classify1nn, Examples) {
  const auto s = make_set({{{0, 0}, 0}, {{10, 0}, 1}});
  EXPECT_EQ(classify_1nn(s, {}, Point{1, 0}), 0u);
  EXPECT_EQ(classify_1nn(s, {}, Point{5, 0}), 0u);
  const auto rev = make_set({{{0, 0}, 1}, {{10, 0}, 0}});
  EXPECT_EQ(classify_1nn(rev, {}, Point{5, 0}), 0u);
  EXPECT_THROW(classify_1nn(s, {}, Point{1}), InvalidInput);
}

TEST(Classify1nn, FiveFourSelfClassification) {
  const auto d = gen_5_4().training;
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto s = ReferenceSet::selected(d, all);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(classify_1nn(s, Metric::hamming(), d[i].features), d.label(i));
}

TEST(Classify1nn, ScaleInvariant) {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const auto s = random_set(rng, 12, 3, 3);
    const double k = 0.1 + 9.0 * rng.uniform01();
    std::vector<LabeledPoint> scaled;
    for (const auto& p : s.points()) {
      Point q = p.features;
      for (double& v : q) v *= k;
      scaled.push_back({q, p.label});
    }
    const ReferenceSet t2(scaled, s.categories(), Provenance::generated);
    for (int i = 0; i < 50; ++i) {
      Point q = random_query(rng, 3);
      const auto a = classify_1nn(s, {}, q);
      for (double& v : q) v *= k;
      EXPECT_EQ(a, classify_1nn(t2, {}, q));
    }
  }
}

TEST(ClassifyKnn, Examples) {
  const auto s = make_set({{{0}, 0}, {{1}, 0}, {{2}, 1}});
  EXPECT_EQ(classify_knn(s, {}, Point{0.4}, 3), 0u);
  const auto tie = make_set({{{0}, 1}, {{2}, 0}, {{10}, 1}});
  EXPECT_EQ(classify_knn(tie, {}, Point{1}, 2), 0u);
  EXPECT_THROW(classify_knn(s, {}, Point{0.0}, 4), InvalidInput);
  EXPECT_THROW(classify_knn(s, {}, Point{0.0}, 0), InvalidInput);
}

TEST(ClassifyKnn, DistanceTieAtKthRankUsesPosition) {
  // Two candidates at distance 1 for the last slot; the earlier position (B) wins it.
  const auto s = make_set({{{0}, 0}, {{1}, 1}, {{-1}, 0}, {{0.1}, 1}});
  EXPECT_EQ(classify_knn(s, {}, Point{0}, 3), 1u);
}

TEST(ClassifyKnn, KOneMatchesOneNn) {
  Rng rng(31);
  const auto s = random_set(rng, 25, 2, 3);
  for (int i = 0; i < 1000; ++i) {
    const Point q = random_query(rng, 2);
    ASSERT_EQ(classify_knn(s, {}, q, 1), classify_1nn(s, {}, q));
  }
}

TEST(Consistency, Examples) {
  Dataset d({{{0.0}, 0}, {{1.0}, 1}, {{2.0}, 0}}, {"A", "B"});
  EXPECT_TRUE(is_consistent(ReferenceSet::selected(d, {0, 1, 2}), d));
  Dataset dup({{{0.0}, 0}, {{0.0}, 1}}, {"A", "B"});
  EXPECT_FALSE(is_consistent(ReferenceSet::selected(dup, {0, 1}), dup));
  EXPECT_DOUBLE_EQ(training_accuracy(ReferenceSet::selected(dup, {0, 1}), dup), 0.5);
}

TEST(Consistency, CentroidsOnSeparableBlobs) {
  const auto g = gen_gaussian({15, 15}, {{0, 0}, {8, 8}}, {0.7, 0.7}, 0.0, 4).data;
  std::vector<LabeledPoint> cents;
  for (Category c = 0; c < 2; ++c) cents.push_back({centroid_of(g, g.indices_of(c)), c});
  const ReferenceSet s(cents, g.categories(), Provenance::generated);
  std::vector<std::vector<double>> refs{cents[0].features, cents[1].features};
  for (std::size_t i = 0; i < g.size(); ++i) {
    ASSERT_EQ(oracle::nearest_label(refs, {0, 1}, g[i].features), static_cast<int>(g.label(i)));
  }
  EXPECT_TRUE(is_consistent(s, g));
}

TEST(Accuracy, CountsMisclassified) {
  std::vector<LabeledPoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({{double(i)}, Category(i < 5 ? 0 : 1)});
  Dataset d(pts, {"A", "B"});
  // Boundary at 6.5: points 5 and 6 go to A.
  const auto s = make_set({{{2.0}, 0}, {{11.0}, 1}});
  EXPECT_DOUBLE_EQ(training_accuracy(s, d), 0.8);
}

TEST(PredictProportions, Examples) {
  const auto one = make_set({{{0}, 1}, {{3}, 1}});
  EXPECT_EQ(predict_proportions(one, {}, {}, Point{1}), (ProbabilityVector{0.0, 1.0}));
  const auto sym = make_set({{{-1}, 0}, {{1}, 1}});
  EXPECT_EQ(predict_proportions(sym, {}, {}, Point{0}), (ProbabilityVector{0.5, 0.5}));
  const auto ab = make_set({{{0}, 0}, {{2}, 1}});
  EXPECT_NEAR(predict_proportions(ab, {}, {1.0}, Point{0})[0], 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_NEAR(predict_proportions(ab, {}, {1.0}, Point{0})[0], 0.8807970779778823, 1e-15);
  EXPECT_THROW(predict_proportions(ab, {}, {0.0}, Point{0}), InvalidInput);
}

TEST(PredictProportions, SumsToOneAndSurvivesLargeGamma) {
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_set(rng, 1 + rng.uniform_index(10), 2, 3);
    const Point q = random_query(rng, 2);
    for (double g : {0.01, 1.0, 1e4}) {
      const auto p = predict_proportions(s, {}, {g}, q);
      double sum = 0;
      for (double v : p) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(PredictProportions, CategoryReorderingPermutesOutput) {
  Rng rng(42);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_set(rng, 8, 2, 3);
    std::vector<LabeledPoint> moved;
    const std::vector<Category> perm{2, 0, 1};  // old c -> new perm[c]
    for (const auto& p : s.points()) moved.push_back({p.features, perm[*p.label]});
    const ReferenceSet r(moved, {"B", "C", "A"}, Provenance::generated);
    const Point q = random_query(rng, 2);
    const auto a = predict_proportions(s, {}, {2.0}, q);
    const auto b = predict_proportions(r, {}, {2.0}, q);
    for (Category c = 0; c < 3; ++c) EXPECT_NEAR(a[c], b[perm[c]], 1e-12);
  }
}

TEST(PredictProportions, LargeGammaAgreesWithOneNn) {
  Rng rng(43);
  const auto s = random_set(rng, 15, 2, 3);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Point q = random_query(rng, 2);
    auto d = distances_to(s, {}, q);
    std::sort(d.begin(), d.end());
    if (d[1] - d[0] < 1e-3) continue;  // nearest neighbour not unique enough
    const auto p = predict_proportions(s, {}, {1e5}, q);
    const auto arg = static_cast<Category>(std::max_element(p.begin(), p.end()) - p.begin());
    EXPECT_EQ(arg, classify_1nn(s, {}, q));
    ++checked;
  }
  EXPECT_GT(checked, 900);
}

TEST(RefsetIo, CanonicalLayout) {
  Dataset d({{{0.5, 1.0}, 0}, {{0.1, 2.0}, 1}}, {"A", "B"});
  const auto s = ReferenceSet::selected(d, {1, 0});
  const std::string expected =
      "{\n"
      "  \"categories\": [\"A\", \"B\"],\n"
      "  \"n_features\": 2,\n"
      "  \"points\": [\n"
      "    {\"features\": [0.10000000000000001, 2], \"label\": \"B\"},\n"
      "    {\"features\": [0.5, 1], \"label\": \"A\"}\n"
      "  ],\n"
      "  \"provenance\": \"selected\",\n"
      "  \"source_indices\": [1, 0],\n"
      "  \"version\": 1\n"
      "}\n";
  EXPECT_EQ(to_json(s), expected);
}

TEST(RefsetIo, RoundTripIsIdentity) {
  Rng rng(51);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_set(rng, 1 + rng.uniform_index(12), 3, 2);
    const auto back = refset_from_json(to_json(s));
    EXPECT_EQ(back, s);
    EXPECT_EQ(to_json(back), to_json(s));
  }
}

TEST(RefsetIo, RejectsMalformed) {
  EXPECT_THROW(refset_from_json("{"), ParseError);
  EXPECT_THROW(refset_from_json(R"({"version": 2})"), ParseError);
  const std::string bad_label =
      R"({"categories": ["A"], "n_features": 1, "points": [{"features": [0], "label": "Z"}], "provenance": "generated", "version": 1})";
  EXPECT_THROW(refset_from_json(bad_label), ParseError);
}
