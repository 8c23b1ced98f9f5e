#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "udft/clustering.hpp"
#include "udft/error.hpp"

using namespace udft;

namespace {

MatrixF points(std::initializer_list<std::initializer_list<float>> rows) {
  std::vector<float> v;
  std::size_t d = 0;
  for (auto r : rows) {
    d = r.size();
    v.insert(v.end(), r);
  }
  return MatrixF(rows.size(), d, v);
}

MatrixF random_points(std::size_t n, std::size_t d, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> g(0.0, spread);
  MatrixF x(n, d);
  for (auto& v : x.values()) v = static_cast<float>(g(rng));
  return x;
}

}  // namespace

TEST_CASE("two points, two clusters") {
  auto m = kmeans_fit(points({{0, 0}, {10, 10}}), 2);
  CHECK(m.objective == 0.0);
  std::vector<std::pair<double, double>> c{{m.centroids(0, 0), m.centroids(0, 1)}, {m.centroids(1, 0), m.centroids(1, 1)}};
  std::sort(c.begin(), c.end());
  CHECK(c[0] == std::pair<double, double>{0, 0});
  CHECK(c[1] == std::pair<double, double>{10, 10});
}

TEST_CASE("four points, two clusters: objective 4") {
  auto x = points({{0, 0}, {0, 2}, {10, 0}, {10, 2}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto m = kmeans_fit(x, 2, {.seed = seed});
    CHECK(m.objective == doctest::Approx(4.0));
    CHECK(oracle::optimal_partition_cost(x, 2) == doctest::Approx(4.0));
    std::vector<double> cx{m.centroids(0, 0), m.centroids(1, 0)};
    std::sort(cx.begin(), cx.end());
    CHECK(cx == std::vector<double>{0, 10});
    CHECK(m.centroids(0, 1) == 1.0);
    CHECK(m.centroids(1, 1) == 1.0);
  }
}

TEST_CASE("k=1 gives the column mean and n times the total variance") {
  std::mt19937_64 rng(1);
  auto x = random_points(37, 4, rng);
  auto m = kmeans_fit(x, 1);
  double var_sum = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 37; ++i) mean += x(i, t);
    mean /= 37;
    CHECK(m.centroids(0, t) == doctest::Approx(mean).epsilon(1e-12));
    for (std::size_t i = 0; i < 37; ++i) var_sum += (x(i, t) - mean) * (x(i, t) - mean);
  }
  CHECK(m.objective == doctest::Approx(var_sum).epsilon(1e-9));
}

TEST_CASE("trace is non-increasing and centroids are the means of their points") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    auto x = random_points(120, 3, rng);
    auto m = kmeans_fit(x, 6, {.max_iter = 300, .tol = 0.0, .seed = static_cast<std::uint64_t>(rep)});
    for (std::size_t i = 1; i < m.trace.size(); ++i) CHECK(m.trace[i] <= m.trace[i - 1]);
    CHECK(m.objective == m.trace.back());
    CHECK(m.objective == doctest::Approx(oracle::objective(x, m.centroids)).epsilon(1e-9));
    CHECK(m.labels == oracle::nearest(x, m.centroids));
    // tol = 0 runs to a fixed point, so every centroid is the mean of its cluster
    for (std::size_t j = 0; j < 6; ++j) {
      std::vector<double> mean(3, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < 120; ++i)
        if (m.labels[i] == j) {
          ++count;
          for (std::size_t t = 0; t < 3; ++t) mean[t] += x(i, t);
        }
      REQUIRE(count > 0);
      for (std::size_t t = 0; t < 3; ++t) CHECK(m.centroids(j, t) == doctest::Approx(mean[t] / count).epsilon(1e-5));
    }
  }
}

TEST_CASE("assignment: exact centroid, ties, brute force") {
  KMeansModel m;
  m.centroids = MatrixD(5, 2, 0.0);
  for (std::size_t j = 0; j < 5; ++j) m.centroids(j, 0) = static_cast<double>(j) * 3.0;
  CHECK(kmeans_assign(m, points({{9, 0}}))[0] == 3);
  // equidistant to centroid 1 (x=3) and centroid 4 placed at (3, 2) mirrored through y=1
  m.centroids(4, 0) = 3.0;
  m.centroids(4, 1) = 2.0;
  CHECK(kmeans_assign(m, points({{3, 1}}))[0] == 1);
  CHECK(kmeans_objective(m, points({{3, 1}})) == 1.0);

  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    auto x = random_points(200, 5, rng);
    KMeansModel r;
    r.centroids = matrix_cast<double>(random_points(7, 5, rng));
    CHECK(kmeans_assign(r, x) == oracle::nearest(x, r.centroids));
    CHECK(kmeans_objective(r, x) == doctest::Approx(oracle::objective(x, r.centroids)).epsilon(1e-10));
  }
}

TEST_CASE("objective anchors") {
  KMeansModel m;
  m.centroids = MatrixD(1, 2, 0.0);
  CHECK(kmeans_objective(m, points({{0, 2}})) == 4.0);
  std::mt19937_64 rng(4);
  m.centroids = matrix_cast<double>(random_points(4, 3, rng));
  CHECK(kmeans_objective(m, matrix_cast<float>(m.centroids)) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("optimal on tiny instances against exhaustive partitions") {
  std::mt19937_64 rng(5);
  int optimal = 0, total = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 3 + rep % 6, k = 1 + rep % 3, d = 1 + rep % 2;
    if (k > n) continue;
    auto x = random_points(n, d, rng);
    auto m = kmeans_fit(x, k, {.tol = 0.0, .seed = static_cast<std::uint64_t>(rep)});
    const double best = oracle::optimal_partition_cost(x, k);
    CHECK(m.objective >= best * (1 - 1e-9) - 1e-12);
    // whatever is returned is a Lloyd fixed point
    CHECK(oracle::partition_cost(x, m.labels, k) == doctest::Approx(m.objective).epsilon(1e-9));
    ++total;
    optimal += m.objective <= best * (1 + 1e-6) + 1e-12;
  }
  CHECK(optimal * 10 >= total * 8);
}

TEST_CASE("translation invariance and determinism") {
  std::mt19937_64 rng(6);
  auto x = random_points(90, 2, rng, 4.0);
  auto a = kmeans_fit(x, 4, {.seed = 9});
  auto b = kmeans_fit(x, 4, {.seed = 9});
  CHECK(a.centroids == b.centroids);
  CHECK(a.labels == b.labels);
  auto shifted = x;
  for (auto& v : shifted.values()) v += 64.0f;
  auto c = kmeans_fit(shifted, 4, {.seed = 9});
  // float rounding moves the points slightly, so only the partition is compared
  CHECK(c.labels == a.labels);
}

TEST_CASE("errors and duplicate rows") {
  auto x = points({{1, 1}, {1, 1}, {1, 1}});
  CHECK_THROWS_AS(kmeans_fit(x, 4), InvalidArgument);
  CHECK_THROWS_AS(kmeans_fit(x, 0), InvalidArgument);
  auto m = kmeans_fit(x, 2);
  CHECK(m.objective == 0.0);
  CHECK(m.k() == 2);
  KMeansModel wrong;
  wrong.centroids = MatrixD(2, 3);
  CHECK_THROWS_AS(kmeans_assign(wrong, x), DimensionMismatch);
  CHECK_THROWS_AS(kmeans_objective(wrong, x), DimensionMismatch);
}

TEST_CASE("empty clusters are refilled") {
  // two far groups, three clusters: every cluster ends non-empty
  auto x = points({{0, 0}, {0, 0.1f}, {0.1f, 0}, {50, 50}, {50, 50.1f}});
  auto m = kmeans_fit(x, 3, {.tol = 0.0});
  std::vector<int> count(3, 0);
  for (auto l : m.labels) ++count[l];
  for (int c : count) CHECK(c > 0);
}

TEST_CASE("UKMC round trip") {
  testing::TempDir dir("km");
  std::mt19937_64 rng(7);
  auto m = kmeans_fit(random_points(50, 3, rng), 4, {.seed = 3});
  save_kmeans(m, dir / "m.ukmc");
  auto back = load_kmeans(dir / "m.ukmc");
  CHECK(back.centroids == m.centroids);
  CHECK(back.objective == m.objective);
  CHECK(back.iterations == m.iterations);
  CHECK(back.seed == 3);
  std::filesystem::resize_file(dir / "m.ukmc", std::filesystem::file_size(dir / "m.ukmc") - 8);
  CHECK_THROWS_AS(load_kmeans(dir / "m.ukmc"), CorruptionError);
}
