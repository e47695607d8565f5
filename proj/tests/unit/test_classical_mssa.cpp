#include "mfssa/core/classical_mssa.hpp"
#include "support.hpp"

using namespace mfssa;
using testing::error_of;

TEST_CASE("embeddings") {
  VectorMTS one{(Matrix(1, 4) << 1, 2, 3, 4).finished()};
  const Matrix X = mssa_embed(one, 2, Stacking::vertical);
  CHECK(X == (Matrix(2, 3) << 1, 2, 3, 2, 3, 4).finished());
  CHECK(mssa_embed(one, 2, Stacking::horizontal) == X);

  VectorMTS two{(Matrix(2, 3) << 1, 2, 3, 10, 20, 30).finished()};
  CHECK(mssa_embed(two, 2, Stacking::vertical) == (Matrix(4, 2) << 1, 2, 2, 3, 10, 20, 20, 30).finished());
  CHECK(mssa_embed(two, 2, Stacking::horizontal) == (Matrix(2, 4) << 1, 2, 10, 20, 2, 3, 20, 30).finished());

  CHECK(error_of([&] { mssa_embed(one, 4, Stacking::vertical); }) == ErrorCode::invalid_argument);
  CHECK(error_of([] { VectorMTS{Matrix::Zero(2, 1)}.validate(); }) == ErrorCode::invalid_argument);
}

TEST_CASE("round trips") {
  std::mt19937_64 rng(61);
  for (auto stacking : {Stacking::vertical, Stacking::horizontal}) {
    for (int trial = 0; trial < 10; ++trial) {
      const int p = testing::uniform_int(rng, 1, 4);
      const int N = testing::uniform_int(rng, 6, 30);
      const int L = testing::uniform_int(rng, 2, N / 2);
      const VectorMTS y{testing::random_matrix(rng, p, N)};
      const auto dec = mssa_decompose(y, L, stacking);
      const auto parts = mssa_reconstruct(dec, Grouping::elementary(dec.rank()));
      Matrix sum = Matrix::Zero(p, N);
      for (const auto& part : parts) sum += part.values;
      CHECK(testing::relative_error(sum, y.values) < 1e-8);
    }
  }
}

TEST_CASE("rank one") {
  Matrix v(2, 10);
  for (int t = 0; t < 10; ++t) {
    v(0, t) = std::pow(1.1, t);
    v(1, t) = -3.0 * std::pow(1.1, t);
  }
  CHECK(mssa_decompose(VectorMTS{v}, 4, Stacking::vertical).rank() == 1);
  CHECK(mssa_decompose(VectorMTS{v}, 4, Stacking::horizontal).rank() == 1);
}

TEST_CASE("vertical and horizontal stacking differ") {
  std::mt19937_64 rng(62);
  const VectorMTS y{testing::random_matrix(rng, 3, 20)};
  const auto v = mssa_decompose(y, 5, Stacking::vertical);
  const auto h = mssa_decompose(y, 5, Stacking::horizontal);
  CHECK(v.rank() != h.rank());
  CHECK(std::abs(v.sigma(0) - h.sigma(0)) > 1e-6);
}

TEST_CASE("delta-basis MFSSA reproduces vertical MSSA") {
  std::mt19937_64 rng(63);
  const int n = 6, N = 25, L = 7;
  const Sites sites = testing::grid_1d(n);
  const auto d = make_delta_basis(sites);
  const Matrix values = testing::random_matrix(rng, n, N);
  const MFTS m = testing::single_variable(d, values);
  const auto fdec = decompose(embed(m, L));
  const auto vdec = mssa_decompose(VectorMTS{values}, L, Stacking::vertical);
  REQUIRE(fdec.rank() == vdec.rank());
  const double c = d->cell_measure();
  CHECK(testing::max_abs(fdec.sigma - std::sqrt(c) * vdec.sigma) < 1e-8);

  const auto g = Grouping::parse("1;2,3;4,5,6");
  const auto fset = reconstruct(fdec, g, m);
  const auto vset = mssa_reconstruct(vdec, g);
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(testing::max_abs(fset.parts[q].variable(0).coefficients - vset[q].values) < 1e-8);
  }
}

TEST_CASE("block averaging is the closest block-Hankel matrix") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = testing::uniform_int(rng, 1, 3);
    const int L = testing::uniform_int(rng, 1, 3);
    const int K = testing::uniform_int(rng, 2, 4);
    const int N = L + K - 1;
    const VectorMTS y{testing::random_matrix(rng, p, N)};
    auto dec = mssa_decompose(y, L, Stacking::horizontal);
    // Perturb to a non-Hankel matrix and reconstruct it through a fake
    // one-component decomposition with sigma = 1.
    const Matrix Z = testing::random_matrix(rng, L, p * K);
    const Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    dec.U = svd.matrixU() * svd.singularValues().asDiagonal();
    dec.V = svd.matrixV();
    dec.sigma = Vector::Ones(svd.singularValues().size());
    Grouping all;
    all.groups.emplace_back();
    for (int i = 0; i < dec.rank(); ++i) all.groups[0].push_back(i);
    const Matrix got = mssa_reconstruct(dec, all)[0].values;
    // Oracle: least squares over the p*N series values.
    Matrix M = Matrix::Zero(L * p * K, p * N);
    Vector z(L * p * K);
    for (int j = 0; j < p; ++j) {
      for (int r = 0; r < L; ++r) {
        for (int k = 0; k < K; ++k) {
          const int e = (j * K + k) * L + r;
          M(e, j * N + r + k) = 1.0;
          z(e) = Z(r, j * K + k);
        }
      }
    }
    const Vector a = M.colPivHouseholderQr().solve(z);
    for (int j = 0; j < p; ++j) {
      for (int t = 0; t < N; ++t) CHECK(std::abs(got(j, t) - a(j * N + t)) < 1e-10);
    }
  }
}
