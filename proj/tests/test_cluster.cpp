#include <random>

#include <gtest/gtest.h>

#include "ctxsense/cluster.hpp"
#include "ctxsense/io.hpp"

using namespace ctxsense;
using learn::Matrix;

namespace {

Matrix blobs(std::vector<std::array<double, 2>> centres, std::size_t per, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  Matrix X(centres.size() * per, 2);
  for (std::size_t c = 0; c < centres.size(); ++c)
    for (std::size_t i = 0; i < per; ++i) {
      X(c * per + i, 0) = centres[c][0] + g(rng);
      X(c * per + i, 1) = centres[c][1] + g(rng);
    }
  return X;
}

}  // namespace

TEST(Hdbscan, TwoSeparatedBlobs) {
  const auto X = blobs({{{0, 0}}, {{10, 10}}}, 40, 0.5, 1);
  const auto a = hdbscan_fit(X);
  ASSERT_EQ(a.n_clusters(), 2u);
  // Every member of a blob shares one label, distinct from the other blob.
  std::size_t noise = 0;
  for (std::size_t i = 0; i < 80; ++i) {
    if (a.labels[i] < 0) {
      ++noise;
      continue;
    }
    const int first = a.labels[i < 40 ? 0 : 40] >= 0 ? a.labels[i < 40 ? 0 : 40] : a.labels[i];
    EXPECT_EQ(a.labels[i], first);
  }
  EXPECT_LE(noise, 8u);
  for (double s : a.stability) EXPECT_GT(s, 0.0);
}

TEST(Hdbscan, DistantStragglersAreOutliers) {
  auto X = blobs({{{0, 0}}, {{10, 0}}}, 30, 0.4, 2);
  Matrix Y(X.rows + 3, 2);
  std::copy(X.data.begin(), X.data.end(), Y.data.begin());
  const std::array<std::array<double, 2>, 3> far{{{100, 100}, {-80, 60}, {50, -120}}};
  for (std::size_t i = 0; i < 3; ++i) Y(X.rows + i, 0) = far[i][0], Y(X.rows + i, 1) = far[i][1];
  const auto a = hdbscan_fit(Y);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.labels[X.rows + i], -1);
}

TEST(Hdbscan, SingleClusterNeedsOptIn) {
  const auto X = blobs({{{0, 0}}}, 50, 1.0, 3);
  HdbscanParams p;
  p.allow_single_cluster = true;
  const auto single = hdbscan_fit(X, p);
  EXPECT_EQ(single.n_clusters(), 1u);
  std::size_t members = 0;
  for (int l : single.labels) members += l == 0;
  EXPECT_GE(members, 40u);
  EXPECT_NE(hdbscan_fit(X).n_clusters(), 1u);
}

TEST(Hdbscan, DeterministicAndValidated) {
  const auto X = blobs({{{0, 0}}, {{6, 0}}, {{0, 6}}}, 25, 0.6, 4);
  EXPECT_EQ(hdbscan_fit(X).labels, hdbscan_fit(X).labels);
  HdbscanParams p;
  p.min_cluster_size = 1;
  EXPECT_THROW(hdbscan_fit(X, p), ClusterError);
  EXPECT_THROW(hdbscan_fit(Matrix(3, 2)), ClusterError);
}

TEST(ClusterReport, PurityAndOutliersPerClass) {
  ClusterAssignment a;
  a.labels = {0, 0, 0, 1, 1, -1, -1};
  a.stability = {1.0, 1.0};
  const std::vector<int> cls{0, 0, 1, 1, 1, 0, 1};
  const std::vector<std::string_view> names{"alone", "social"};
  const auto r = cluster_report(a, cls, names);
  ASSERT_EQ(r.clusters.size(), 2u);
  EXPECT_EQ(r.clusters[0].majority_class, 0);
  EXPECT_NEAR(r.clusters[0].purity, 2.0 / 3, 1e-12);
  EXPECT_EQ(r.clusters[1].majority_class, 1);
  EXPECT_DOUBLE_EQ(r.clusters[1].purity, 1.0);
  EXPECT_EQ(r.per_class[0].outliers, 1u);
  EXPECT_EQ(r.per_class[1].outliers, 1u);
  EXPECT_DOUBLE_EQ(r.per_class[1].mean_size, 2.0);

  const auto j = to_json(r);
  EXPECT_EQ(j["n_rows"], 7);
  EXPECT_EQ(j["groups"].size(), 2u);
  EXPECT_EQ(j["groups"][0]["class"], "alone");
  EXPECT_EQ(j["clusters"][1]["majority_class"], "social");
  EXPECT_THROW(cluster_report(a, std::vector<int>{0}, names), ClusterError);
}
