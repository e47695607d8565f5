#include "mfssa/core/hmfssa.hpp"

#include "mfssa/core/error.hpp"

namespace mfssa {

HmfssaRep hmfssa_embed(const MFTS& mfts, int L) {
  const auto& first = mfts.variable(0);
  for (int j = 1; j < mfts.variable_count(); ++j) {
    const auto& b = *mfts.variable(j).basis;
    if (&b != first.basis.get() && !b.structurally_equal(*first.basis)) {
      fail(ErrorCode::common_domain_required,
           "horizontal embedding needs one common domain and basis; variable " + mfts.variable(j).name +
               " differs from " + first.name);
    }
  }
  const int p = mfts.variable_count();
  const int d = first.basis->size();
  EmbeddingPlan plan({d}, mfts.length(), L);
  const int K = plan.columns();
  Matrix B(plan.rows(), p * K);
  for (int j = 0; j < p; ++j) {
    const Matrix& c = mfts.variable(j).coefficients;
    for (int l = 0; l < d; ++l) {
      for (int r = 0; r < L; ++r) {
        for (int k = 0; k < K; ++k) B(plan.row(l, r), j * K + k) = c(l, k + r);
      }
    }
  }
  return HmfssaRep{std::move(plan), p, std::move(B), StructuredGram({first.basis->gram()}, L), first.basis};
}

HmfssaDecomposition hmfssa_decompose(const HmfssaRep& rep, double tol) {
  const GramRoots roots = gram_sqrt(rep.gram);
  SingularTriples t = ordered_svd(roots.half.apply(rep.B), tol);
  Matrix Psi = roots.half_inv.apply(t.U);
  return HmfssaDecomposition{rep.plan,         rep.variables, std::move(t.sigma), std::move(t.V),
                             std::move(t.U),   std::move(Psi), rep.gram,          rep.basis};
}

ReconstructionSet hmfssa_reconstruct(const HmfssaDecomposition& dec, const Grouping& grouping,
                                     const MFTS& source, bool include_residual) {
  if (source.variable_count() != dec.variables || source.length() != dec.plan.length() ||
      source.variable(0).basis->size() != dec.plan.total_basis_size()) {
    fail(ErrorCode::plan_mismatch, "hmfssa_reconstruct: decomposition was not produced from this series");
  }
  Grouping full = grouping;
  for (std::size_t q = full.labels.size(); q < full.groups.size(); ++q) full.labels.push_back(grouping.label(q));
  full.validate(dec.rank());
  if (include_residual) {
    auto rest = full.complement(dec.rank());
    if (!rest.empty()) {
      full.groups.push_back(std::move(rest));
      full.labels.push_back("residual");
    }
  }

  const int K = dec.plan.columns();
  const double total = dec.sigma.squaredNorm();
  ReconstructionSet set;
  for (std::size_t q = 0; q < full.groups.size(); ++q) {
    Matrix Bg = Matrix::Zero(dec.Psi.rows(), dec.V.rows());
    double share = 0.0;
    for (int i : full.groups[q]) {
      Bg.noalias() += dec.sigma(i) * dec.Psi.col(i) * dec.V.col(i).transpose();
      share += dec.sigma(i) * dec.sigma(i);
    }
    std::vector<Matrix> coefs;
    for (int j = 0; j < dec.variables; ++j) {
      const Matrix block = hankelize(Bg.middleCols(j * K, K), dec.plan);
      coefs.push_back(unembed(block, dec.plan).front());
    }
    set.parts.push_back(with_coefficients(source, std::move(coefs)));
    set.labels.push_back(full.labels[q]);
    set.shares.push_back(total > 0.0 ? share / total : 0.0);
  }
  return set;
}

double right_vector_block_share(const HmfssaDecomposition& dec, int component, int variable) {
  if (component < 0 || component >= dec.rank() || variable < 0 || variable >= dec.variables) {
    fail(ErrorCode::index_out_of_range, "right_vector_block_share: index out of range");
  }
  const int K = dec.plan.columns();
  const Vector v = dec.V.col(component);
  return v.segment(variable * K, K).squaredNorm() / v.squaredNorm();
}

Json hmfssa_to_json(const HmfssaDecomposition& dec) {
  return Json{{"variant", "hmfssa"},
              {"sigma", std::vector<double>(dec.sigma.data(), dec.sigma.data() + dec.sigma.size())},
              {"V", matrix_to_json(dec.V)},
              {"Psi", matrix_to_json(dec.Psi)},
              {"L", dec.plan.window()},
              {"K", dec.plan.columns()},
              {"p", dec.variables},
              {"d", Json::array({dec.plan.total_basis_size()})}};
}

}  // namespace mfssa
