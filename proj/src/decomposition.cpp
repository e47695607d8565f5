#include "mfssa/core/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mfssa/core/error.hpp"

namespace mfssa {

namespace {

void fix_sign(Eigen::Ref<Vector> u, Eigen::Ref<Vector> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best_abs) {
      best_abs = std::abs(v(i));
      best = i;
    }
  }
  if (v.size() > 0 && v(best) < 0.0) {
    u = -u;
    v = -v;
  }
}

Vector align_sign(const Vector& x, const Vector& reference) {
  return x.dot(reference) < 0.0 ? Vector(-x) : x;
}

}  // namespace

SingularTriples ordered_svd(const Matrix& X, double tol) {
  if (!X.allFinite()) fail(ErrorCode::numeric_failure, "SVD input contains non-finite values");
  SingularTriples out;
  if (X.size() == 0) return out;
  const Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) fail(ErrorCode::numeric_failure, "SVD did not converge");
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? tol * s(0) : 0.0;
  int r = 0;
  while (r < s.size() && s(r) > cutoff && s(r) > 0.0) ++r;

  Matrix U = svd.matrixU().leftCols(r);
  Matrix V = svd.matrixV().leftCols(r);
  for (int i = 0; i < r; ++i) fix_sign(U.col(i), V.col(i));

  std::vector<int> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (s(a) != s(b)) return s(a) > s(b);
    for (Eigen::Index k = 0; k < V.rows(); ++k) {
      if (V(k, a) != V(k, b)) return V(k, a) > V(k, b);
    }
    return false;
  });

  out.sigma.resize(r);
  out.U.resize(U.rows(), r);
  out.V.resize(V.rows(), r);
  for (int i = 0; i < r; ++i) {
    out.sigma(i) = s(order[i]);
    out.U.col(i) = U.col(order[i]);
    out.V.col(i) = V.col(order[i]);
  }
  return out;
}

ElementaryComponent TrajectoryDecomposition::component(int i) const {
  if (i < 0 || i >= rank()) {
    fail(ErrorCode::index_out_of_range, "component " + std::to_string(i + 1) + " out of range");
  }
  return ElementaryComponent{i, sigma(i), V.col(i), Psi.col(i)};
}

TrajectoryDecomposition decompose(const TrajectoryRep& rep, double tol) {
  const GramRoots roots = gram_sqrt(rep);
  const Matrix X = roots.half.apply(rep.B);
  SingularTriples t = ordered_svd(X, tol);
  Matrix Psi = roots.half_inv.apply(t.U);
  return TrajectoryDecomposition{rep.plan, std::move(t.sigma), std::move(t.V), std::move(t.U),
                                 std::move(Psi), rep.gram, rep.bases};
}

RelationResiduals eigentriple_relations_check(const TrajectoryDecomposition& dec,
                                              const TrajectoryRep& rep) {
  RelationResiduals res;
  for (int i = 0; i < dec.rank(); ++i) {
    const Vector psi = dec.Psi.col(i);
    const Vector v = dec.V.col(i);
    const Vector fwd = forward_apply(rep, v) - dec.sigma(i) * psi;
    res.forward = std::max(res.forward, std::sqrt(std::max(0.0, inner_product(rep, fwd, fwd))));
    const Vector adj = adjoint_apply(rep, psi) - dec.sigma(i) * v;
    res.adjoint = std::max(res.adjoint, adj.norm());
  }
  return res;
}

double left_orthonormality_error(const TrajectoryDecomposition& dec) {
  if (dec.rank() == 0) return 0.0;
  const Matrix gram = dec.Psi.transpose() * dec.gram.apply(dec.Psi);
  return (gram - Matrix::Identity(dec.rank(), dec.rank())).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

std::vector<int> unfolding_permutation(const EmbeddingPlan& plan) {
  const int L = plan.window();
  std::vector<int> perm(plan.rows());
  for (int j = 0; j < plan.variable_count(); ++j) {
    const int dj = plan.basis_sizes()[j];
    const int base = plan.basis_offset(j) * L;
    for (int l = 0; l < dj; ++l) {
      for (int r = 0; r < L; ++r) {
        perm[base + l * L + r] = base + r * dj + l;
      }
    }
  }
  return perm;
}

UnfoldedDecomposition vmfssa_decompose(const TrajectoryRep& rep, double tol) {
  const auto& plan = rep.plan;
  const int L = plan.window();
  const auto perm = unfolding_permutation(plan);

  Matrix Bu(rep.B.rows(), rep.B.cols());
  for (int row = 0; row < plan.rows(); ++row) Bu.row(perm[row]) = rep.B.row(row);

  // blockdiag_j(I_L (Kronecker) G_j), assembled entry by entry.
  Matrix Gu = Matrix::Zero(plan.rows(), plan.rows());
  for (int j = 0; j < plan.variable_count(); ++j) {
    const Matrix& Gj = rep.gram.blocks()[j];
    const int dj = plan.basis_sizes()[j];
    const int base = plan.basis_offset(j) * L;
    for (int r = 0; r < L; ++r) Gu.block(base + r * dj, base + r * dj, dj, dj) = Gj;
  }
  const auto [half, half_inv] = spd_sqrt(Gu);

  SingularTriples t = ordered_svd(half * Bu, tol);
  Matrix Psi = half_inv * t.U;
  return UnfoldedDecomposition{plan, std::move(t.sigma), std::move(t.V), std::move(Psi)};
}

std::vector<std::vector<Matrix>> vmfssa_reconstruct(const UnfoldedDecomposition& dec,
                                                    const std::vector<std::vector<int>>& groups) {
  const auto& plan = dec.plan;
  const int L = plan.window();
  const int K = plan.columns();
  const int N = plan.length();
  std::vector<std::vector<Matrix>> out;
  for (const auto& group : groups) {
    Matrix Bg = Matrix::Zero(plan.rows(), K);
    for (int i : group) {
      if (i < 0 || i >= dec.sigma.size()) fail(ErrorCode::index_out_of_range, "vmfssa: component out of range");
      Bg.noalias() += dec.sigma(i) * dec.Psi.col(i) * dec.V.col(i).transpose();
    }
    std::vector<Matrix> per_var;
    for (int j = 0; j < plan.variable_count(); ++j) {
      const int dj = plan.basis_sizes()[j];
      const int base = plan.basis_offset(j) * L;
      Matrix c = Matrix::Zero(dj, N);
      Eigen::VectorXi counts = Eigen::VectorXi::Zero(N);
      for (int r = 0; r < L; ++r) {
        for (int k = 0; k < K; ++k) {
          for (int l = 0; l < dj; ++l) c(l, r + k) += Bg(base + r * dj + l, k);
          counts(r + k) += 1;
        }
      }
      for (int t = 0; t < N; ++t) c.col(t) /= counts(t);
      per_var.push_back(std::move(c));
    }
    out.push_back(std::move(per_var));
  }
  return out;
}

VmfssaReport vmfssa_oracle(const TrajectoryRep& rep, double tol) {
  const TrajectoryDecomposition dec = decompose(rep, tol);
  const UnfoldedDecomposition un = vmfssa_decompose(rep, tol);
  const auto perm = unfolding_permutation(rep.plan);

  VmfssaReport report;
  report.rank_mfssa = dec.rank();
  report.rank_unfolded = static_cast<int>(un.sigma.size());
  const int r = std::min(report.rank_mfssa, report.rank_unfolded);
  for (int i = 0; i < r; ++i) {
    report.max_sigma_diff = std::max(report.max_sigma_diff, std::abs(dec.sigma(i) - un.sigma(i)));
    const Vector v = align_sign(un.V.col(i), dec.V.col(i));
    report.max_right_diff = std::max(report.max_right_diff, (v - dec.V.col(i)).cwiseAbs().maxCoeff());
    Vector permuted(dec.Psi.rows());
    for (int row = 0; row < rep.plan.rows(); ++row) permuted(perm[row]) = dec.Psi(row, i);
    const Vector psi = align_sign(un.Psi.col(i), permuted);
    report.max_left_diff = std::max(report.max_left_diff, (psi - permuted).cwiseAbs().maxCoeff());
  }
  if (report.rank_mfssa != report.rank_unfolded) {
    report.max_sigma_diff = std::numeric_limits<double>::infinity();
  }
  return report;
}

// ---------------------------------------------------------------------------

std::vector<Matrix> render_left_functions(const TrajectoryDecomposition& dec, int variable,
                                          const Sites& sites, int first, int count) {
  const auto& plan = dec.plan;
  if (variable < 0 || variable >= plan.variable_count()) {
    fail(ErrorCode::index_out_of_range, "render: variable index out of range");
  }
  if (first < 0 || count < 0 || first + count > dec.rank()) {
    fail(ErrorCode::index_out_of_range, "render: component range out of range");
  }
  const Matrix design = dec.bases[variable]->evaluate(sites);
  const int dj = plan.basis_sizes()[variable];
  const int L = plan.window();
  std::vector<Matrix> out;
  for (int i = first; i < first + count; ++i) {
    // Coefficients of psi_i restricted to this variable, as an L x d_j matrix.
    Eigen::Map<const Matrix> coefs(dec.Psi.col(i).data() + plan.basis_offset(variable) * L, L, dj);
    out.push_back(coefs * design.transpose());
  }
  return out;
}

Json decomposition_to_json(const TrajectoryDecomposition& dec) {
  Json d = Json::array();
  for (int s : dec.plan.basis_sizes()) d.push_back(s);
  return Json{{"variant", "mfssa"},
              {"sigma", std::vector<double>(dec.sigma.data(), dec.sigma.data() + dec.sigma.size())},
              {"V", matrix_to_json(dec.V)},
              {"Psi", matrix_to_json(dec.Psi)},
              {"L", dec.plan.window()},
              {"K", dec.plan.columns()},
              {"d", d}};
}

}  // namespace mfssa
