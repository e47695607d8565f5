#include "mfssa/core/embedding.hpp"

#include <cmath>
#include <sstream>

#include "mfssa/core/error.hpp"

namespace mfssa {

EmbeddingPlan::EmbeddingPlan(std::vector<int> basis_sizes, int N, int L)
    : sizes_(std::move(basis_sizes)), N_(N), L_(L), K_(N - L + 1), d_(0) {
  if (sizes_.empty()) fail(ErrorCode::invalid_argument, "embedding needs at least one variable");
  if (L < 1 || L >= N) {
    std::ostringstream os;
    os << "window length L=" << L << " out of range [1, " << N - 1 << "] for N=" << N;
    fail(ErrorCode::invalid_argument, os.str());
  }
  for (std::size_t j = 0; j < sizes_.size(); ++j) {
    if (sizes_[j] < 1) fail(ErrorCode::invalid_argument, "basis sizes must be positive");
    offsets_.push_back(d_);
    for (int l = 0; l < sizes_[j]; ++l) owner_.push_back(static_cast<int>(j));
    d_ += sizes_[j];
  }
}

std::pair<int, int> EmbeddingPlan::basis_index(int q) const {
  const int j = owner_.at(q);
  return {j, q - offsets_[j]};
}

// ---------------------------------------------------------------------------

StructuredGram::StructuredGram(std::vector<Matrix> blocks, int L)
    : blocks_(std::move(blocks)), L_(L), rows_(0) {
  for (const auto& b : blocks_) {
    if (b.rows() != b.cols()) fail(ErrorCode::invalid_argument, "Gram blocks must be square");
    rows_ += static_cast<int>(b.rows()) * L;
  }
}

Matrix StructuredGram::apply(const Matrix& x) const {
  if (x.rows() != rows_) fail(ErrorCode::invalid_argument, "structured Gram: row count mismatch");
  Matrix out(x.rows(), x.cols());
  // Within block j the rows of one column form an L x d_j column-major
  // matrix M with M(r, l) at l * L + r; (M_j (Kronecker) I_L) x = M * M_j^T.
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    Eigen::Index offset = 0;
    for (const auto& block : blocks_) {
      const Eigen::Index dj = block.rows();
      Eigen::Map<const Matrix> in(x.col(c).data() + offset, L_, dj);
      Eigen::Map<Matrix> res(out.col(c).data() + offset, L_, dj);
      res.noalias() = in * block.transpose();
      offset += dj * L_;
    }
  }
  return out;
}

Vector StructuredGram::apply(const Vector& x) const {
  Matrix m = x;
  return apply(m).col(0);
}

Matrix StructuredGram::dense() const {
  Matrix g = Matrix::Zero(rows_, rows_);
  Eigen::Index offset = 0;
  for (const auto& block : blocks_) {
    const Eigen::Index dj = block.rows();
    for (Eigen::Index a = 0; a < dj; ++a) {
      for (Eigen::Index b = 0; b < dj; ++b) {
        for (int r = 0; r < L_; ++r) g(offset + a * L_ + r, offset + b * L_ + r) = block(a, b);
      }
    }
    offset += dj * L_;
  }
  return g;
}

// ---------------------------------------------------------------------------

TrajectoryRep embed(const MFTS& mfts, int L) {
  EmbeddingPlan plan(mfts.basis_sizes(), mfts.length(), L);
  const int K = plan.columns();
  Matrix B(plan.rows(), K);
  std::vector<Matrix> blocks;
  std::vector<BasisPtr> bases;
  for (int j = 0; j < mfts.variable_count(); ++j) {
    const auto& v = mfts.variable(j);
    const int offset = plan.basis_offset(j);
    for (int l = 0; l < v.basis->size(); ++l) {
      const int q = offset + l;
      for (int r = 0; r < L; ++r) {
        for (int k = 0; k < K; ++k) B(plan.row(q, r), k) = v.coefficients(l, k + r);
      }
    }
    blocks.push_back(v.basis->gram());
    bases.push_back(v.basis);
  }
  return TrajectoryRep{std::move(plan), std::move(B), StructuredGram(std::move(blocks), L), std::move(bases)};
}

std::pair<Matrix, Matrix> spd_sqrt(const Matrix& block) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(block);
  if (eig.info() != Eigen::Success) fail(ErrorCode::numeric_failure, "Gram eigendecomposition failed");
  Vector lambda = eig.eigenvalues();
  const double lmax = lambda.maxCoeff();
  if (!(lmax > 0.0) || !std::isfinite(lmax)) {
    fail(ErrorCode::numeric_failure, "Gram block is not positive definite");
  }
  const double floor = kGramFloor * lmax;
  lambda = lambda.cwiseMax(floor);
  const Matrix& Q = eig.eigenvectors();
  Matrix half = Q * lambda.cwiseSqrt().asDiagonal() * Q.transpose();
  Matrix half_inv = Q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * Q.transpose();
  return {std::move(half), std::move(half_inv)};
}

GramRoots gram_sqrt(const StructuredGram& gram) {
  std::vector<Matrix> half;
  std::vector<Matrix> half_inv;
  for (const auto& block : gram.blocks()) {
    auto [h, hi] = spd_sqrt(block);
    half.push_back(std::move(h));
    half_inv.push_back(std::move(hi));
  }
  return GramRoots{StructuredGram(std::move(half), gram.window()),
                   StructuredGram(std::move(half_inv), gram.window())};
}

GramRoots gram_sqrt(const TrajectoryRep& rep) { return gram_sqrt(rep.gram); }

Vector forward_apply(const TrajectoryRep& rep, const Vector& a) {
  if (a.size() != rep.B.cols()) fail(ErrorCode::invalid_argument, "forward_apply: expected length K");
  return rep.B * a;
}

Vector adjoint_apply(const TrajectoryRep& rep, const Vector& z) {
  if (z.size() != rep.B.rows()) fail(ErrorCode::invalid_argument, "adjoint_apply: expected length Ld");
  return rep.B.transpose() * rep.gram.apply(z);
}

double inner_product(const TrajectoryRep& rep, const Vector& x, const Vector& y) {
  return x.dot(rep.gram.apply(y));
}

std::vector<Matrix> unembed(const Matrix& hankel, const EmbeddingPlan& plan) {
  if (hankel.rows() != plan.rows() || hankel.cols() != plan.columns()) {
    fail(ErrorCode::plan_mismatch, "unembed: matrix shape does not match the embedding plan");
  }
  const int K = plan.columns();
  std::vector<Matrix> out;
  for (int j = 0; j < plan.variable_count(); ++j) {
    const int dj = plan.basis_sizes()[j];
    Matrix c(dj, plan.length());
    for (int l = 0; l < dj; ++l) {
      const int q = plan.basis_offset(j) + l;
      for (int t = 0; t < plan.length(); ++t) {
        // Topmost entry of antidiagonal t in the L x K block.
        const int r = t < K ? 0 : t - K + 1;
        const int k = t - r;
        c(l, t) = hankel(plan.row(q, r), k);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace mfssa
