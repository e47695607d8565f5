#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mfssa/core/hmfssa.hpp"
#include "mfssa/core/separability.hpp"

namespace mfssa {

enum class Variant { mfssa, hmfssa };

const char* to_string(Variant v) noexcept;
Variant parse_variant(const std::string& name);

// Decomposition of the current (data, L) pair in whichever variant the
// session uses.
struct SessionDecomposition {
  Variant variant = Variant::mfssa;
  std::optional<TrajectoryDecomposition> mfssa;
  std::optional<HmfssaDecomposition> hmfssa;
  std::string fingerprint;

  int rank() const;
  const Vector& sigma() const;
  const Matrix& V() const;
  int window() const;
  Json to_json() const;
};

// Immutable view of a session. Readers hold a shared_ptr to one of these and
// never observe a half-applied mutation.
struct SessionState {
  std::shared_ptr<const MFTS> data;
  NormalizationRecord normalization;
  double tolerance = kDefaultRankTolerance;
  std::shared_ptr<const SessionDecomposition> decomposition;
  std::optional<Grouping> grouping;
  bool residual = false;
  std::shared_ptr<const ReconstructionSet> reconstructions;  // set with grouping
  std::vector<std::string> warnings;
};

// Analysis session: one MFTS, a window length, its decomposition and the
// analyst's grouping. Mutations are serialized; reads take a snapshot.
class AnalysisSession {
 public:
  AnalysisSession(MFTS data, double tolerance = kDefaultRankTolerance, Variant variant = Variant::mfssa,
                  NormalizationRecord normalization = {});

  std::shared_ptr<const SessionState> snapshot() const;

  // Scales the selected variables (empty = all) and drops the decomposition.
  std::shared_ptr<const SessionState> normalize(const std::vector<int>& variables);

  // Decomposes for window L (<= 0 selects floor(N/2)). Recomputes only when L
  // or the data changed; a grouping that no longer fits the rank is dropped.
  std::shared_ptr<const SessionState> decompose(int L);

  std::shared_ptr<const SessionState> set_grouping(Grouping grouping, bool residual);

  Variant variant() const { return variant_; }

 private:
  std::shared_ptr<const SessionState> publish(std::shared_ptr<SessionState> next);

  Variant variant_;
  mutable std::mutex mutate_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const SessionState> state_;
};

int default_window(int N);

// 64-bit FNV-1a over the coefficients, bases sizes, window, tolerance and
// variant, as 16 hex digits.
std::string decomposition_fingerprint(const MFTS& data, int L, double tolerance, Variant variant);

// Offending 1-based indices of an invalid grouping: repeated indices and
// indices beyond `rank`.
std::vector<int> grouping_offenders(const Grouping& grouping, int rank);

// Parses either the text grammar or an array of 1-based index arrays.
Grouping grouping_from_json(const Json& j);

// Views for export. All JSON shapes are documented in the README.
Json reconstruction_to_json(const SessionState& state, std::size_t group);
Json plotdata_to_json(const SessionState& state);
Json wcorrelation_json(const SessionState& state);
WCorrelationMatrix session_wcorrelation(const SessionState& state);
Json session_export(const SessionState& state);

// Rebuilds a session from session_export output.
std::shared_ptr<AnalysisSession> session_import(const Json& doc);

}  // namespace mfssa
