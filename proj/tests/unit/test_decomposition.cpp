#include <cmath>
#include <numbers>

#include "mfssa/core/decomposition.hpp"
#include "mfssa/core/quadrature.hpp"
#include "mfssa/core/simulation.hpp"
#include "support.hpp"

using namespace mfssa;
using testing::error_of;

namespace {

BasisPtr unit_constant() { return make_bspline_basis(DomainSpec::interval(0, 1), 1, 0); }

// Dense SVD oracle, singular values only.
Vector dense_sigma(const Matrix& X) { return Eigen::JacobiSVD<Matrix>(X).singularValues(); }

}  // namespace

TEST_CASE("rank-one input with identity Gram") {
  Matrix c(1, 8);
  for (int t = 0; t < 8; ++t) c(0, t) = std::pow(1.5, t);
  const TrajectoryRep rep = embed(testing::single_variable(unit_constant(), c), 3);
  const TrajectoryDecomposition dec = decompose(rep);
  REQUIRE(dec.rank() == 1);
  CHECK(dec.sigma(0) == doctest::Approx(rep.B.norm()).epsilon(1e-13));
  const auto res = eigentriple_relations_check(dec, rep);
  CHECK(res.forward < 1e-13 * dec.sigma(0));
  CHECK(res.adjoint < 1e-13 * dec.sigma(0));
  // Psi is proportional to the first column of B (the generator's lag vector).
  const Vector b0 = rep.B.col(0).normalized();
  CHECK(std::abs(std::abs(dec.Psi.col(0).dot(b0)) - 1.0) < 1e-12);
}

TEST_CASE("decomposition invariants on random instances") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int N = testing::uniform_int(rng, 8, 30);
    const int L = testing::uniform_int(rng, 2, N / 2);
    const MFTS m = testing::random_mfts(rng, testing::uniform_int(rng, 1, 3), N, 6);
    const TrajectoryRep rep = embed(m, L);
    const TrajectoryDecomposition dec = decompose(rep);
    const int r = dec.rank();
    REQUIRE(r >= 1);
    CHECK(r <= std::min(rep.plan.rows(), rep.plan.columns()));
    for (int i = 0; i + 1 < r; ++i) CHECK(dec.sigma(i) >= dec.sigma(i + 1));
    CHECK(dec.sigma(r - 1) > 0.0);
    CHECK(testing::max_abs(dec.V.transpose() * dec.V - Matrix::Identity(r, r)) < 1e-10);
    CHECK(left_orthonormality_error(dec) < 1e-8);

    const auto res = eigentriple_relations_check(dec, rep);
    CHECK(res.forward < 1e-8 * dec.sigma(0));
    CHECK(res.adjoint < 1e-8 * dec.sigma(0));

    // Sum of rank-one contributions restores B.
    const Matrix sum = dec.Psi * dec.sigma.asDiagonal() * dec.V.transpose();
    CHECK(testing::relative_error(sum, rep.B) < 1e-8);

    // Sign convention: largest-magnitude entry of each v_i is positive.
    for (int i = 0; i < r; ++i) {
      Eigen::Index at;
      dec.V.col(i).cwiseAbs().maxCoeff(&at);
      CHECK(dec.V(at, i) > 0.0);
    }

    // Eckart-Young: truncation error equals the tail of the spectrum.
    const Matrix X = gram_sqrt(rep).half.apply(rep.B);
    const int t = testing::uniform_int(rng, 0, r);
    const Matrix approx = dec.U.leftCols(t) * dec.sigma.head(t).asDiagonal() * dec.V.leftCols(t).transpose();
    CHECK(std::abs((X - approx).norm() - dec.sigma.tail(r - t).norm()) < 1e-8 * dec.sigma(0));

    // Singular values agree with a dense SVD of the densely assembled G^{1/2} B.
    const auto [gh, ghi] = spd_sqrt(rep.gram.dense());
    const Vector s = dense_sigma(gh * rep.B);
    CHECK(testing::max_abs(s.head(r) - dec.sigma) < 1e-9 * dec.sigma(0));
  }
}

TEST_CASE("corrupted left coefficients are detected") {
  std::mt19937_64 rng(32);
  const MFTS m = testing::random_mfts(rng, 2, 20, 4, false);
  const TrajectoryRep rep = embed(m, 5);
  TrajectoryDecomposition dec = decompose(rep);
  dec.Psi.col(1).setZero();
  const auto res = eigentriple_relations_check(dec, rep);
  CHECK(res.forward == doctest::Approx(dec.sigma(1)).epsilon(1e-8));
}

TEST_CASE("scaling a univariate series scales the spectrum") {
  std::mt19937_64 rng(33);
  const MFTS m = testing::random_mfts(rng, 1, 25, 5);
  const auto d1 = decompose(embed(m, 6));
  const auto d3 = decompose(embed(scale(m, 3.0), 6));
  REQUIRE(d1.rank() == d3.rank());
  CHECK(testing::max_abs(d3.sigma - 3.0 * d1.sigma) < 1e-10 * d3.sigma(0));
  for (int i = 0; i < d1.rank(); ++i) {
    CHECK(std::abs(std::abs(d1.V.col(i).dot(d3.V.col(i))) - 1.0) < 1e-8);
  }
}

TEST_CASE("rank tolerance") {
  std::mt19937_64 rng(34);
  Matrix c = testing::random_matrix(rng, 1, 30);
  const MFTS m = testing::single_variable(unit_constant(), c);
  const auto full = decompose(embed(m, 8));
  const auto cut = decompose(embed(m, 8), 0.5);
  CHECK(cut.rank() < full.rank());
  for (int i = 0; i < cut.rank(); ++i) CHECK(cut.sigma(i) > 0.5 * cut.sigma(0));
  CHECK(error_of([&] { full.component(full.rank()); }) == ErrorCode::index_out_of_range);
  CHECK(full.component(0).sigma == full.sigma(0));
}

TEST_CASE("repeated singular values: the subspace is determined") {
  // cos(pi t / 2) with L and K multiples of the period gives sigma_1 == sigma_2.
  Matrix c(1, 15);
  for (int t = 0; t < 15; ++t) c(0, t) = std::cos(std::numbers::pi * t / 2.0) + std::sin(std::numbers::pi * t / 2.0);
  const TrajectoryRep rep = embed(testing::single_variable(unit_constant(), c), 4);
  const auto dec = decompose(rep);
  REQUIRE(dec.rank() == 2);
  CHECK(std::abs(dec.sigma(0) - dec.sigma(1)) < 1e-10 * dec.sigma(0));
  const Eigen::JacobiSVD<Matrix> svd(rep.B, Eigen::ComputeThinV);
  const Matrix P_oracle = svd.matrixV().leftCols(2) * svd.matrixV().leftCols(2).transpose();
  const Matrix P = dec.V * dec.V.transpose();
  CHECK(testing::max_abs(P - P_oracle) < 1e-10);
}

TEST_CASE("delta basis matches the vertically stacked trajectory SVD") {
  std::mt19937_64 rng(35);
  const auto d1 = make_delta_basis(testing::grid_1d(4));
  const auto d2 = make_delta_basis(testing::grid_1d(3), DomainSpec::interval(0, 2));
  const Matrix c1 = testing::random_matrix(rng, 4, 18), c2 = testing::random_matrix(rng, 3, 18);
  const MFTS m({FunctionalVariable{"a", d1, c1, std::nullopt}, FunctionalVariable{"b", d2, c2, std::nullopt}});
  const int L = 5, K = 14;
  // Oracle: each site is a scalar series; stack sqrt(measure) * its trajectory matrix.
  Matrix X(7 * L, K);
  for (int s = 0; s < 7; ++s) {
    const double w = s < 4 ? std::sqrt(0.25) : std::sqrt(2.0 / 3.0);
    for (int r = 0; r < L; ++r) {
      for (int k = 0; k < K; ++k) X(s * L + r, k) = w * (s < 4 ? c1(s, k + r) : c2(s - 4, k + r));
    }
  }
  const auto dec = decompose(embed(m, L));
  const Vector s = dense_sigma(X);
  REQUIRE(dec.rank() == K);
  CHECK(testing::max_abs(s.head(K) - dec.sigma) < 1e-8);
}

TEST_CASE("unfolded route agrees") {
  std::mt19937_64 rng(36);
  SUBCASE("p = 1 gives the identity permutation") {
    const EmbeddingPlan plan({3}, 10, 4);
    const auto perm = unfolding_permutation(plan);
    // For p = 1 with d = 1 the layouts coincide; otherwise the map is a true
    // transpose of the (l, r) grid.
    const auto id = unfolding_permutation(EmbeddingPlan({1}, 10, 4));
    for (int i = 0; i < 4; ++i) CHECK(id[i] == i);
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 12; ++i) CHECK(sorted[i] == i);
  }
  SUBCASE("random instances") {
    for (int trial = 0; trial < 50; ++trial) {
      const int p = testing::uniform_int(rng, 1, 3);
      const int L = testing::uniform_int(rng, 2, 3);
      const int N = testing::uniform_int(rng, L + 2, 10);
      const MFTS m = testing::random_mfts(rng, p, N, 2);
      const TrajectoryRep rep = embed(m, L);
      const auto report = vmfssa_oracle(rep);
      CHECK(report.rank_mfssa == report.rank_unfolded);
      CHECK(report.max_sigma_diff < 1e-10);
      CHECK(report.max_right_diff < 1e-8);
      CHECK(report.max_left_diff < 1e-8);
    }
  }
}

TEST_CASE("left functions") {
  SUBCASE("delta basis renders the raw coefficients") {
    std::mt19937_64 rng(37);
    const Sites sites = testing::grid_1d(5);
    const auto d = make_delta_basis(sites);
    const MFTS m = testing::single_variable(d, testing::random_matrix(rng, 5, 12));
    const auto dec = decompose(embed(m, 3));
    const auto out = render_left_functions(dec, 0, sites, 0, 2);
    REQUIRE(out.size() == 2);
    for (int i = 0; i < 2; ++i) {
      for (int r = 0; r < 3; ++r) {
        for (int s = 0; s < 5; ++s) CHECK(out[i](r, s) == doctest::Approx(dec.Psi(s * 3 + r, i)));
      }
    }
    CHECK(error_of([&] { render_left_functions(dec, 0, sites, 0, dec.rank() + 1); }) ==
          ErrorCode::index_out_of_range);
    CHECK(error_of([&] { render_left_functions(dec, 1, sites, 0, 1); }) == ErrorCode::index_out_of_range);
  }
  SUBCASE("rendered functions are orthonormal under quadrature") {
    std::mt19937_64 rng(38);
    const auto b1 = make_bspline_basis(DomainSpec::interval(0, 1), 6, 3);
    const auto b2 = make_bspline_basis(DomainSpec::interval(-1, 2), 5, 2);
    const MFTS m({FunctionalVariable{"a", b1, testing::random_matrix(rng, 6, 20), std::nullopt},
                  FunctionalVariable{"b", b2, testing::random_matrix(rng, 5, 20), std::nullopt}});
    const auto dec = decompose(embed(m, 4));
    const int r = std::min(dec.rank(), 5);
    Matrix inner = Matrix::Zero(r, r);
    for (int j = 0; j < 2; ++j) {
      const auto& axis = m.variable(j).basis->axes()[0];
      const auto bp = axis.breakpoints();
      const auto rule = gauss_legendre(6);
      std::vector<double> xs, ws;
      for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double h = 0.5 * (bp[k + 1] - bp[k]), mid = 0.5 * (bp[k + 1] + bp[k]);
        for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
          xs.push_back(mid + h * rule.nodes[n]);
          ws.push_back(h * rule.weights[n]);
        }
      }
      Sites s(xs.size(), 1);
      for (std::size_t k = 0; k < xs.size(); ++k) s(k, 0) = xs[k];
      const Eigen::Map<const Vector> w(ws.data(), ws.size());
      const auto f = render_left_functions(dec, j, s, 0, r);
      for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) inner(a, b) += (f[a] * w.asDiagonal() * f[b].transpose()).trace();
      }
    }
    CHECK(testing::max_abs(inner - Matrix::Identity(r, r)) < 1e-6);
  }
}

TEST_CASE("noiseless simulation signal spectrum") {
  sim::SimConfig cfg;
  cfg.noise = sim::NoiseKind::none;
  SUBCASE("trend plus two frequencies has rank 6") {
    const auto data = sim::simulate_signal(cfg, 0);
    const auto dec = decompose(embed(data.observed, 20));
    CHECK(dec.rank() == 6);
    CHECK(dec.sigma(5) / dec.sigma(0) > 1e-2);
  }
  SUBCASE("without the trend the rank is 4") {
    cfg.k = 0.0;
    const auto data = sim::simulate_signal(cfg, 0);
    const auto dec = decompose(embed(data.observed, 20));
    CHECK(dec.rank() == 4);
  }
}

TEST_CASE("decomposition export") {
  std::mt19937_64 rng(39);
  const MFTS m = testing::random_mfts(rng, 2, 12, 3);
  const auto dec = decompose(embed(m, 4));
  const Json j = decomposition_to_json(dec);
  CHECK(j["variant"] == "mfssa");
  CHECK(j["L"] == 4);
  CHECK(j["K"] == 9);
  CHECK(j["sigma"].size() == static_cast<std::size_t>(dec.rank()));
  CHECK(j["V"].size() == 9);
  CHECK(j["Psi"].size() == static_cast<std::size_t>(dec.plan.rows()));
  CHECK(j["d"].get<std::vector<int>>() == m.basis_sizes());
}
