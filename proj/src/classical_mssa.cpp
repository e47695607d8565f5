#include "mfssa/core/classical_mssa.hpp"

#include "mfssa/core/error.hpp"

namespace mfssa {

void VectorMTS::validate() const {
  if (values.rows() < 1) fail(ErrorCode::invalid_argument, "vector MTS needs at least one series");
  if (values.cols() < 2) fail(ErrorCode::invalid_argument, "vector MTS needs N >= 2");
  if (!values.allFinite()) fail(ErrorCode::numeric_failure, "vector MTS contains non-finite values");
}

Matrix mssa_embed(const VectorMTS& mts, int L, Stacking stacking) {
  mts.validate();
  const int p = mts.series_count();
  const int N = mts.length();
  if (L < 1 || L >= N) fail(ErrorCode::invalid_argument, "window length out of range");
  const int K = N - L + 1;
  Matrix X = stacking == Stacking::vertical ? Matrix(p * L, K) : Matrix(L, p * K);
  for (int j = 0; j < p; ++j) {
    for (int r = 0; r < L; ++r) {
      for (int k = 0; k < K; ++k) {
        if (stacking == Stacking::vertical) {
          X(j * L + r, k) = mts.values(j, r + k);
        } else {
          X(r, j * K + k) = mts.values(j, r + k);
        }
      }
    }
  }
  return X;
}

MssaDecomposition mssa_decompose(const VectorMTS& mts, int L, Stacking stacking, double tol) {
  const Matrix X = mssa_embed(mts, L, stacking);
  SingularTriples t = ordered_svd(X, tol);
  MssaDecomposition dec;
  dec.stacking = stacking;
  dec.p = mts.series_count();
  dec.N = mts.length();
  dec.L = L;
  dec.K = dec.N - L + 1;
  dec.sigma = std::move(t.sigma);
  dec.U = std::move(t.U);
  dec.V = std::move(t.V);
  return dec;
}

std::vector<VectorMTS> mssa_reconstruct(const MssaDecomposition& dec, const Grouping& grouping) {
  grouping.validate(dec.rank());
  std::vector<VectorMTS> out;
  for (const auto& group : grouping.groups) {
    Matrix Xg = Matrix::Zero(dec.U.rows(), dec.V.rows());
    for (int i : group) Xg.noalias() += dec.sigma(i) * dec.U.col(i) * dec.V.col(i).transpose();

    // Averaging entry (r, k) of block j onto time r + k is the same as
    // projecting each block onto the Hankel matrices.
    Matrix series = Matrix::Zero(dec.p, dec.N);
    Vector counts = Vector::Zero(dec.N);
    for (int r = 0; r < dec.L; ++r) {
      for (int k = 0; k < dec.K; ++k) counts(r + k) += 1.0;
    }
    for (int j = 0; j < dec.p; ++j) {
      for (int r = 0; r < dec.L; ++r) {
        for (int k = 0; k < dec.K; ++k) {
          series(j, r + k) += dec.stacking == Stacking::vertical ? Xg(j * dec.L + r, k) : Xg(r, j * dec.K + k);
        }
      }
    }
    series.array().rowwise() /= counts.transpose().array();
    out.push_back(VectorMTS{std::move(series)});
  }
  return out;
}

}  // namespace mfssa
