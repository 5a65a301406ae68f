#include <cmath>

#include <gtest/gtest.h>

#include "protosel/data.hpp"
#include "protosel/refset_io.hpp"
#include "protosel/replacement.hpp"

using namespace protosel;

namespace {

std::vector<Point> features(const Dataset& d) {
  std::vector<Point> out;
  for (const auto& p : d.points()) out.push_back(p.features);
  return out;
}

double dist2(const Point& a, const Point& b) { return distance(Metric::euclidean(), a, b); }

// Each true mean has a centroid within tol.
void expect_recovers(const std::vector<Point>& found, const std::vector<Point>& truth, double tol) {
  for (const auto& t : truth) {
    double best = INFINITY;
    for (const auto& f : found) best = std::min(best, dist2(f, t));
    EXPECT_LT(best, tol);
  }
}

}  // namespace

TEST(Kmeans, SingleClusterIsMean) {
  const std::vector<Point> pts{{0, 0}, {2, 0}, {4, 3}};
  ClusteringParams p;
  p.k = 1;
  const auto r = kmeans(pts, p);
  ASSERT_EQ(r.centroids.size(), 1u);
  EXPECT_NEAR(r.centroids[0][0], 2.0, 1e-12);
  EXPECT_NEAR(r.centroids[0][1], 1.0, 1e-12);
  EXPECT_TRUE(r.converged);
}

TEST(Kmeans, KEqualsDistinctGivesThePoints) {
  const std::vector<Point> pts{{0, 0}, {5, 1}, {0, 0}, {3, 3}};
  ClusteringParams p;
  p.k = 3;
  const auto r = kmeans(pts, p);
  auto c = r.centroids;
  std::sort(c.begin(), c.end());
  EXPECT_EQ(c, (std::vector<Point>{{0, 0}, {3, 3}, {5, 1}}));
  EXPECT_EQ(r.objective.back(), 0.0);
}

TEST(Kmeans, TooManyClusters) {
  const std::vector<Point> pts{{1, 1}, {1, 1}, {2, 2}};
  ClusteringParams p;
  p.k = 3;
  EXPECT_THROW(kmeans(pts, p), InvalidInput);
  p.k = 1;
  p.tol = 0.0;
  EXPECT_THROW(kmeans(pts, p), InvalidInput);
}

TEST(Kmeans, RecoversSeparatedBlobs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = gen_gaussian({40, 40}, {{0, 0}, {10, 10}}, {0.5, 0.5}, 0.0, seed).data;
    ClusteringParams p;
    p.k = 2;
    p.seed = seed;
    expect_recovers(kmeans(features(d), p).centroids, {{0, 0}, {10, 10}}, 0.5);
  }
}

TEST(Kmeans, ObjectiveNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = gen_gaussian({30, 30, 30}, {{0, 0}, {2, 1}, {1, 3}}, {1, 1, 1}, 0.0, seed).data;
    ClusteringParams p;
    p.k = 5;
    p.seed = seed;
    const auto r = kmeans(features(d), p);
    for (std::size_t i = 1; i < r.objective.size(); ++i) EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-9);
  }
}

TEST(Kmeans, NoClusterEndsEmpty) {
  // k close to the number of distinct points makes empty clusters common.
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({std::round(rng.uniform01() * 6.0), std::round(rng.uniform01() * 2.0)});
    std::vector<Point> distinct = pts;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    ClusteringParams p;
    p.k = distinct.size() > 2 ? distinct.size() - 1 : 1;
    p.seed = static_cast<std::uint64_t>(t);
    const auto r = kmeans(pts, p);
    std::vector<int> sizes(p.k, 0);
    for (auto a : r.assignment) ++sizes[a];
    for (int s : sizes) EXPECT_GT(s, 0);
    for (std::size_t i = 1; i < r.objective.size(); ++i) EXPECT_LE(r.objective[i], r.objective[i - 1] + 1e-9);
  }
}

TEST(NearestMean, Examples) {
  Dataset d({{{0, 0}, 0}, {{2, 2}, 0}, {{5, 5}, 1}}, {"A", "B"});
  const auto s = nearest_mean_prototypes(d);
  EXPECT_EQ(s[0].features, (Point{1, 1}));
  EXPECT_EQ(s[1].features, (Point{5, 5}));
  EXPECT_EQ(s.provenance(), Provenance::generated);
  Dataset missing({{{0, 0}, 0}}, {"A", "B"});
  EXPECT_THROW(nearest_mean_prototypes(missing), InvalidInput);
}

TEST(NearestMean, FiveFourCategoryA) {
  const auto d = gen_5_4().training;
  const auto s = nearest_mean_prototypes(d);
  // A = 0011, 0111, 1011, 1101, 1110: per-feature counts of 1s are 3, 3, 4, 4.
  EXPECT_EQ(s[0].features, (Point{0.6, 0.6, 0.8, 0.8}));
  EXPECT_EQ(s.label(0), 0u);
}

TEST(PreSupervised, OnePerCategoryIsNearestMean) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = gen_gaussian({12, 9, 7}, {{0, 0}, {3, 0}, {0, 3}}, {1, 1, 1}, 0.1, seed).data;
    ClusteringParams p;
    p.seed = seed;
    const auto a = cluster_pre_supervised(d, 1, p);
    const auto b = nearest_mean_prototypes(d);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a.label(i), b.label(i));
      for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(a[i].features[j], b[i].features[j], 1e-9);
    }
  }
}

TEST(PreSupervised, FiveFourTwoPerCategory) {
  const auto s = cluster_pre_supervised(gen_5_4().training, 2, {});
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.label(0), 0u);
  EXPECT_EQ(s.label(1), 0u);
  EXPECT_EQ(s.label(2), 1u);
  EXPECT_EQ(s.label(3), 1u);
}

TEST(PreSupervised, ErrorNamesCategory) {
  Dataset d({{{0}, 0}, {{1}, 0}, {{2}, 1}}, {"A", "Bee"});
  try {
    cluster_pre_supervised(d, 2, {});
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("Bee"), std::string::npos);
  }
}

TEST(PostSupervised, Examples) {
  Dataset d({{{0}, 1}, {{1}, 0}, {{2}, 1}}, {"A", "B"});
  ClusteringParams p;
  p.k = 1;
  const auto s = cluster_post_supervised(d, p);
  EXPECT_EQ(s[0].features, Point{1.0});
  EXPECT_EQ(s.label(0), 1u);
  Dataset tie({{{0}, 1}, {{0.1}, 0}, {{0.2}, 1}, {{0.3}, 0}}, {"A", "B"});
  EXPECT_EQ(cluster_post_supervised(tie, p).label(0), 0u);
}

TEST(PostSupervised, PureBlobsKeepTheirLabels) {
  const auto d = gen_gaussian({20, 20}, {{0, 0}, {10, 0}}, {0.5, 0.5}, 0.0, 3).data;
  ClusteringParams p;
  p.k = 2;
  const auto s = cluster_post_supervised(d, p);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.label(i), s[i].features[0] < 5.0 ? 0u : 1u);
}

TEST(Gmm, SingleComponent) {
  const std::vector<Point> pts{{0, 0}, {2, 0}, {0, 2}, {2, 2}};
  ClusteringParams p;
  p.k = 1;
  const auto f = fit_spherical_gmm(pts, p);
  EXPECT_NEAR(f.means[0][0], 1.0, 1e-12);
  EXPECT_NEAR(f.means[0][1], 1.0, 1e-12);
  // Per-dimension population variance: 1 in each coordinate.
  EXPECT_NEAR(f.variances[0], 1.0, 1e-12);
  Dataset d({{{0, 0}, 0}, {{2, 0}, 1}, {{0, 2}, 1}, {{2, 2}, 0}}, {"A", "B"});
  const auto s = gmm_mmc(d, p, GmmMode::post_supervised);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.label(0), 0u);
}

TEST(Gmm, RepeatedPointHitsVarianceFloor) {
  const std::vector<Point> pts(5, Point{3.0, 3.0});
  ClusteringParams p;
  p.k = 1;
  p.variance_floor = 0.25;
  EXPECT_EQ(fit_spherical_gmm(pts, p).variances[0], 0.25);
}

TEST(Gmm, RecoversBlobsAndLikelihoodRises) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = gen_gaussian({50, 50}, {{0, 0}, {6, 6}}, {1, 1}, 0.0, 100 + seed).data;
    ClusteringParams p;
    p.k = 2;
    p.seed = seed;
    p.tol = 1e-10;
    const auto f = fit_spherical_gmm(features(d), p);
    expect_recovers(f.means, {{0, 0}, {6, 6}}, 0.5);
    for (std::size_t i = 1; i < f.log_likelihood.size(); ++i) {
      EXPECT_GE(f.log_likelihood[i], f.log_likelihood[i - 1] - 1e-9);
    }
  }
}

TEST(Gmm, PreSupervisedComponentsPerCategory) {
  const auto d = gen_gaussian({20, 20}, {{0, 0}, {5, 5}}, {1, 1}, 0.0, 5).data;
  ClusteringParams p;
  p.k = 2;
  const auto s = gmm_mmc(d, p, GmmMode::pre_supervised);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s.label(1), 0u);
  EXPECT_EQ(s.label(2), 1u);
}

TEST(Lvq, ZeroRateLeavesPrototypes) {
  const auto d = gen_gaussian({10, 10}, {{0, 0}, {3, 3}}, {1, 1}, 0.0, 1).data;
  const auto init = nearest_mean_prototypes(d);
  LvqParams p;
  p.alpha0 = 0.0;
  EXPECT_EQ(to_json(lvq1(d, init, p)), to_json(init));
}

TEST(Lvq, SingleStepAttractsAndRepels) {
  const ReferenceSet init({{{0.0}, 0}}, {"A", "B"}, Provenance::generated);
  LvqParams p;
  p.alpha0 = 0.1;
  p.epochs = 1;
  const auto pulled = lvq1(Dataset({{{1.0}, 0}}, {"A", "B"}), init, p);
  EXPECT_NEAR(pulled[0].features[0], 0.1, 1e-15);
  const ReferenceSet both({{{0.0}, 0}, {{5.0}, 1}}, {"A", "B"}, Provenance::generated);
  const auto pushed = lvq1(Dataset({{{1.0}, 1}}, {"A", "B"}), both, p);
  EXPECT_NEAR(pushed[0].features[0], -0.1, 1e-15);
  EXPECT_EQ(pushed[1].features[0], 5.0);
}

TEST(Lvq, LinearDecay) {
  // Two steps on the same stimulus: alpha 0.5 then 0.25.
  const ReferenceSet init({{{0.0}, 0}}, {"A"}, Provenance::generated);
  LvqParams p;
  p.alpha0 = 0.5;
  p.epochs = 2;
  const auto s = lvq1(Dataset({{{1.0}, 0}}, {"A"}), init, p);
  EXPECT_NEAR(s[0].features[0], 0.5 + 0.25 * 0.5, 1e-15);
}

TEST(Lvq, KeepsAccuracyOnSeparatedBlobs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = gen_gaussian({30, 30}, {{0, 0}, {8, 8}}, {1, 1}, 0.0, seed).data;
    const auto init = nearest_mean_prototypes(d);
    LvqParams p;
    p.seed = seed;
    EXPECT_GE(training_accuracy(lvq1(d, init, p), d), training_accuracy(init, d));
  }
}

TEST(Lvq, Preconditions) {
  const auto d = gen_gaussian({5, 5}, {{0, 0}, {3, 3}}, {1, 1}, 0.0, 2).data;
  const ReferenceSet only_a({{{0.0, 0.0}, 0}}, d.categories(), Provenance::generated);
  EXPECT_THROW(lvq1(d, only_a, {}), InvalidInput);
  LvqParams p;
  p.alpha0 = 1.5;
  EXPECT_THROW(lvq1(d, nearest_mean_prototypes(d), p), InvalidInput);
}

TEST(Replacement, DeterministicOutputs) {
  const auto d = gen_gaussian({15, 15}, {{0, 0}, {2, 2}}, {1, 1}, 0.1, 9).data;
  ClusteringParams p;
  p.k = 3;
  p.seed = 4;
  EXPECT_EQ(to_json(cluster_pre_supervised(d, 2, p)), to_json(cluster_pre_supervised(d, 2, p)));
  EXPECT_EQ(to_json(cluster_post_supervised(d, p)), to_json(cluster_post_supervised(d, p)));
  EXPECT_EQ(to_json(gmm_mmc(d, p, GmmMode::post_supervised)), to_json(gmm_mmc(d, p, GmmMode::post_supervised)));
  LvqParams l;
  l.seed = 4;
  EXPECT_EQ(to_json(lvq1(d, nearest_mean_prototypes(d), l)), to_json(lvq1(d, nearest_mean_prototypes(d), l)));
}
