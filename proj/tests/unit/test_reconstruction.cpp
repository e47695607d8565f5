#include <cmath>
#include <complex>
#include <numbers>

#include "mfssa/core/reconstruction.hpp"
#include "mfssa/core/simulation.hpp"
#include "support.hpp"

using namespace mfssa;
using testing::error_of;

namespace {

BasisPtr unit_constant() { return make_bspline_basis(DomainSpec::interval(0, 1), 1, 0); }

// Closest block-Hankel matrix in the Gram-weighted Frobenius norm
// sum_k b_k^T G b_k, found by solving the normal equations over the
// d * (L + K - 1) Hankel parameters.
Matrix brute_force_hankel(const Matrix& Y, const Matrix& Gd, int L) {
  const Eigen::Index rows = Y.rows(), K = Y.cols();
  const Eigen::Index d = rows / L;
  const Eigen::Index params = d * (L + K - 1);
  // vec() stacks columns; entry (q*L + r, k) belongs to parameter q*(L+K-1) + r + k.
  Matrix M = Matrix::Zero(rows * K, params);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index q = 0; q < d; ++q) {
      for (Eigen::Index r = 0; r < L; ++r) M(k * rows + q * L + r, q * (L + K - 1) + r + k) = 1.0;
    }
  }
  Matrix W = Matrix::Zero(rows * K, rows * K);
  for (Eigen::Index k = 0; k < K; ++k) W.block(k * rows, k * rows, rows, rows) = Gd;
  const Vector y = Eigen::Map<const Vector>(Y.data(), Y.size());
  const Vector a = (M.transpose() * W * M).ldlt().solve(M.transpose() * W * y);
  const Vector h = M * a;
  return Eigen::Map<const Matrix>(h.data(), rows, K);
}

double dominant_frequency(const Matrix& series) {
  const Eigen::Index N = series.cols();
  double best = -1.0;
  Eigen::Index at = 0;
  for (Eigen::Index f = 1; f <= N / 2; ++f) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index t = 0; t < N; ++t) acc += series(0, t) * std::polar(1.0, -2.0 * std::numbers::pi * f * t / N);
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      at = f;
    }
  }
  return static_cast<double>(at) / N;
}

}  // namespace

TEST_CASE("grouping grammar") {
  const Grouping g = Grouping::parse("1;2,3;4,5");
  CHECK(g.groups == std::vector<std::vector<int>>{{0}, {1, 2}, {3, 4}});
  CHECK(g.to_string() == "1;2,3;4,5");
  CHECK(Grouping::parse(" 1, 2 ; 3 ").groups == std::vector<std::vector<int>>{{0, 1}, {2}});
  CHECK(error_of([] { Grouping::parse("1;1,2"); }) == ErrorCode::overlapping_groups);
  for (const char* bad : {"", ";", "1;;2", "1,", ",1", "1;", "a", "1;2,x", "-1", "1.5"}) {
    CAPTURE(bad);
    CHECK(error_of([&] { Grouping::parse(bad); }) == ErrorCode::invalid_argument);
  }
  CHECK(error_of([] { Grouping::parse("0"); }) == ErrorCode::index_out_of_range);
  CHECK(error_of([&] { g.validate(4); }) == ErrorCode::index_out_of_range);
  CHECK_NOTHROW(g.validate(5));
  CHECK(g.complement(7) == std::vector<int>{5, 6});
  CHECK(g.label(1) == "G2");
  CHECK(Grouping::elementary(3).to_string() == "1;2;3");
}

TEST_CASE("hankelize") {
  Matrix b(2, 2);
  b << 1, 3, 5, 7;
  hankelize_block(b);
  Matrix expected(2, 2);
  expected << 1, 4, 4, 7;
  CHECK((b.array() == expected.array()).all());

  std::mt19937_64 rng(41);
  SUBCASE("idempotent and fixes Hankel input") {
    const EmbeddingPlan plan({2, 1}, 9, 3);
    const Matrix Y = testing::random_matrix(rng, plan.rows(), plan.columns());
    const Matrix H = hankelize(Y, plan);
    CHECK((hankelize(H, plan).array() == H.array()).all());
    const MFTS m = testing::random_mfts(rng, 2, 9, 2, false);
    const Matrix B = embed(m, 3).B;
    CHECK(testing::max_abs(hankelize(B, EmbeddingPlan(m.basis_sizes(), 9, 3)) - B) < 1e-15);
  }
  SUBCASE("matches the weighted least-squares projection") {
    for (int trial = 0; trial < 100; ++trial) {
      const int L = testing::uniform_int(rng, 1, 4);
      const int K = testing::uniform_int(rng, 2, 4);  // K = 1 would need L = N
      const int d = testing::uniform_int(rng, 1, 3);
      const Matrix A = testing::random_matrix(rng, d, d);
      const Matrix Gj = A * A.transpose() + 0.2 * Matrix::Identity(d, d);
      const StructuredGram G({Gj}, L);
      const EmbeddingPlan plan({d}, L + K - 1, L);
      const Matrix Y = testing::random_matrix(rng, L * d, K);
      CHECK(testing::max_abs(hankelize(Y, plan) - brute_force_hankel(Y, G.dense(), L)) < 1e-10);
    }
  }
  CHECK(error_of([] { hankelize(Matrix::Zero(3, 3), EmbeddingPlan({1}, 5, 2)); }) == ErrorCode::plan_mismatch);
}

TEST_CASE("grouped components") {
  std::mt19937_64 rng(42);
  const MFTS m = testing::random_mfts(rng, 2, 16, 4);
  const TrajectoryRep rep = embed(m, 5);
  const auto dec = decompose(rep);
  const int r = dec.rank();
  Grouping all;
  all.groups.emplace_back();
  for (int i = 0; i < r; ++i) all.groups[0].push_back(i);
  CHECK(testing::relative_error(group_components(dec, all)[0], rep.B) < 1e-8);

  Grouping split;
  split.groups = {{0, 2}, {}};
  split.groups[1] = split.complement(r);
  const auto parts = group_components(dec, split);
  CHECK(testing::relative_error(parts[0] + parts[1], rep.B) < 1e-8);

  Matrix c(1, 9);
  for (int t = 0; t < 9; ++t) c(0, t) = std::pow(0.8, t);
  const auto rep1 = embed(testing::single_variable(unit_constant(), c), 4);
  const auto dec1 = decompose(rep1);
  CHECK(testing::max_abs(group_components(dec1, Grouping::parse("1"))[0] - rep1.B) < 1e-14);
  CHECK(error_of([&] { group_components(dec1, Grouping::parse("2")); }) == ErrorCode::index_out_of_range);
}

TEST_CASE("reconstruction") {
  std::mt19937_64 rng(43);
  const MFTS m = testing::random_mfts(rng, 3, 20, 4);
  const auto dec = decompose(embed(m, 6));
  const int r = dec.rank();

  SUBCASE("full covering grouping restores the source") {
    Grouping g = Grouping::elementary(r);
    const auto set = reconstruct(dec, g, m);
    REQUIRE(set.parts.size() == static_cast<std::size_t>(r));
    MFTS total = set.parts[0];
    for (std::size_t q = 1; q < set.parts.size(); ++q) total = add(total, set.parts[q]);
    for (int j = 0; j < 3; ++j) {
      CHECK(testing::relative_error(total.variable(j).coefficients, m.variable(j).coefficients) < 1e-8);
      CHECK(set.parts[0].variable(j).basis == m.variable(j).basis);
    }
    double share = 0.0;
    for (double s : set.shares) share += s;
    CHECK(share == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("residual group") {
    const auto set = reconstruct(dec, Grouping::parse("1;2,3"), m, true);
    REQUIRE(set.parts.size() == 3);
    CHECK(set.labels == std::vector<std::string>{"G1", "G2", "residual"});
    const MFTS total = add(add(set.parts[0], set.parts[1]), set.parts[2]);
    CHECK(testing::relative_error(total.variable(1).coefficients, m.variable(1).coefficients) < 1e-8);
    CHECK(reconstruct(dec, Grouping::elementary(r), m, true).parts.size() == static_cast<std::size_t>(r));
  }
  SUBCASE("linearity") {
    const auto merged = reconstruct(dec, Grouping::parse("1,2,4"), m);
    const auto separate = reconstruct(dec, Grouping::parse("1;2;4"), m);
    const MFTS sum = add(add(separate.parts[0], separate.parts[1]), separate.parts[2]);
    for (int j = 0; j < 3; ++j) {
      CHECK(testing::max_abs(sum.variable(j).coefficients - merged.parts[0].variable(j).coefficients) < 1e-10);
    }
  }
  SUBCASE("labels") {
    Grouping g = Grouping::parse("1;2");
    g.labels = {"trend", "season"};
    CHECK(reconstruct(dec, g, m).labels == std::vector<std::string>{"trend", "season"});
  }
  SUBCASE("plan mismatch") {
    const MFTS other = testing::random_mfts(rng, 3, 21, 4);
    CHECK(error_of([&] { reconstruct(dec, Grouping::parse("1"), other); }) == ErrorCode::plan_mismatch);
  }
}

TEST_CASE("a single component of a sinusoid keeps its frequency") {
  Matrix c(1, 64);
  for (int t = 0; t < 64; ++t) c(0, t) = std::cos(2 * std::numbers::pi * 0.125 * t + 0.3);
  const MFTS m = testing::single_variable(unit_constant(), c);
  const auto dec = decompose(embed(m, 16));
  REQUIRE(dec.rank() == 2);
  const auto set = reconstruct(dec, Grouping::parse("1"), m);
  CHECK(dominant_frequency(set.parts[0].variable(0).coefficients) == doctest::Approx(0.125));
}

TEST_CASE("noiseless simulation signal") {
  sim::SimConfig cfg;
  cfg.noise = sim::NoiseKind::none;
  const auto data = sim::simulate_signal(cfg, 0);
  const auto dec = decompose(embed(data.observed, 20));
  REQUIRE(dec.rank() == 6);
  // All six components restore the projected signal; five leave the weakest
  // trend direction out.
  const auto six = reconstruct(dec, Grouping::parse("1,2,3,4,5,6"), data.observed);
  const auto five = reconstruct(dec, Grouping::parse("1;2,3;4,5"), data.observed);
  const MFTS five_sum = add(add(five.parts[0], five.parts[1]), five.parts[2]);
  for (int j = 0; j < 2; ++j) {
    const Matrix truth = evaluate(data.truth, j, data.sites);
    CHECK(testing::max_abs(evaluate(six.parts[0], j, data.sites) - truth) < 1e-9);
    CHECK(testing::max_abs(evaluate(five_sum, j, data.sites) - truth) > 1e-3);
  }
}
