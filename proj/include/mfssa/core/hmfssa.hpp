#pragma once

#include "mfssa/core/reconstruction.hpp"

namespace mfssa {

// Horizontal variant over a common domain: trajectory operator R^{pK} -> F^L
// whose column block j is the univariate embedding of variable j.
struct HmfssaRep {
  EmbeddingPlan plan;  // single shared basis of size d
  int variables = 0;
  Matrix B;            // Ld x pK
  StructuredGram gram;
  BasisPtr basis;
};

// All variables must share a structurally equal basis (common_domain_required
// otherwise).
HmfssaRep hmfssa_embed(const MFTS& mfts, int L);

struct HmfssaDecomposition {
  EmbeddingPlan plan;
  int variables = 0;
  Vector sigma;
  Matrix V;    // pK x r
  Matrix U;    // Ld x r
  Matrix Psi;  // Ld x r
  StructuredGram gram;
  BasisPtr basis;

  int rank() const { return static_cast<int>(sigma.size()); }
};

HmfssaDecomposition hmfssa_decompose(const HmfssaRep& rep, double tol = kDefaultRankTolerance);

// Column block j of each grouped matrix is hankelized per basis index and read
// back as variable j.
ReconstructionSet hmfssa_reconstruct(const HmfssaDecomposition& dec, const Grouping& grouping,
                                     const MFTS& source, bool include_residual = false);

// Fraction of ||v_i||^2 that falls in variable j's K-block.
double right_vector_block_share(const HmfssaDecomposition& dec, int component, int variable);

Json hmfssa_to_json(const HmfssaDecomposition& dec);

}  // namespace mfssa
