#include "mfssa/core/session.hpp"

#include <algorithm>
#include <cstring>
#include <iomanip>
#include <map>
#include <sstream>

#include "mfssa/core/error.hpp"

namespace mfssa {

namespace {

constexpr int kPlotComponents = 10;
constexpr int kElementaryWcor = 20;

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
  void text(const std::string& s) {
    value(s.size());
    bytes(s.data(), s.size());
  }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h_;
    return os.str();
  }

 private:
  std::uint64_t h_ = 14695981039346656037ULL;
};

Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Sites plot_sites(const DomainSpec& domain) {
  const int per_axis = domain.dimension() == 1 ? 64 : 8;
  const int n = domain.dimension() == 1 ? per_axis : per_axis * per_axis;
  Sites s(n, domain.dimension());
  for (int i = 0; i < n; ++i) {
    int rest = i;
    for (int a = domain.dimension() - 1; a >= 0; --a) {
      const auto& iv = domain.axes()[a];
      s(i, a) = iv.lo + iv.length() * (rest % per_axis) / (per_axis - 1);
      rest /= per_axis;
    }
  }
  return s;
}

// MFSSA-shaped view of an HMFSSA decomposition for rendering psi_i, which
// lives in one common space.
TrajectoryDecomposition as_single_space(const HmfssaDecomposition& h) {
  return TrajectoryDecomposition{h.plan, h.sigma, h.V, h.U, h.Psi, h.gram, {h.basis}};
}

ReconstructionSet reconstruct_state(const SessionDecomposition& dec, const MFTS& data, const Grouping& g,
                                    bool residual) {
  if (dec.variant == Variant::mfssa) return reconstruct(*dec.mfssa, g, data, residual);
  return hmfssa_reconstruct(*dec.hmfssa, g, data, residual);
}

const SessionDecomposition& require_decomposition(const SessionState& state) {
  if (!state.decomposition) fail(ErrorCode::invalid_argument, "session has no decomposition yet");
  return *state.decomposition;
}

}  // namespace

const char* to_string(Variant v) noexcept { return v == Variant::mfssa ? "mfssa" : "hmfssa"; }

Variant parse_variant(const std::string& name) {
  if (name == "mfssa") return Variant::mfssa;
  if (name == "hmfssa") return Variant::hmfssa;
  fail(ErrorCode::invalid_argument, "unknown variant \"" + name + "\"");
}

int SessionDecomposition::rank() const { return variant == Variant::mfssa ? mfssa->rank() : hmfssa->rank(); }
const Vector& SessionDecomposition::sigma() const { return variant == Variant::mfssa ? mfssa->sigma : hmfssa->sigma; }
const Matrix& SessionDecomposition::V() const { return variant == Variant::mfssa ? mfssa->V : hmfssa->V; }
int SessionDecomposition::window() const {
  return variant == Variant::mfssa ? mfssa->plan.window() : hmfssa->plan.window();
}

Json SessionDecomposition::to_json() const {
  Json j = variant == Variant::mfssa ? decomposition_to_json(*mfssa) : hmfssa_to_json(*hmfssa);
  j["fingerprint"] = fingerprint;
  j["rank"] = rank();
  return j;
}

int default_window(int N) { return std::max(1, N / 2); }

std::string decomposition_fingerprint(const MFTS& data, int L, double tolerance, Variant variant) {
  Fnv1a h;
  h.value(static_cast<int>(variant));
  h.value(L);
  h.value(tolerance);
  h.value(data.length());
  for (const auto& v : data.variables()) {
    h.text(basis_to_json(*v.basis).dump());
    h.text(domain_to_json(v.basis->domain()).dump());
    h.value(v.coefficients.rows());
    h.bytes(v.coefficients.data(), sizeof(double) * static_cast<std::size_t>(v.coefficients.size()));
  }
  return h.hex();
}

// ---------------------------------------------------------------------------

AnalysisSession::AnalysisSession(MFTS data, double tolerance, Variant variant, NormalizationRecord normalization)
    : variant_(variant) {
  if (!(tolerance >= 0.0) || tolerance >= 1.0) fail(ErrorCode::invalid_argument, "tolerance must lie in [0, 1)");
  if (variant == Variant::hmfssa) {
    const auto& first = *data.variable(0).basis;
    for (const auto& v : data.variables()) {
      if (!v.basis->structurally_equal(first)) {
        fail(ErrorCode::common_domain_required, "hmfssa needs one common basis; variable " + v.name + " differs");
      }
    }
  }
  if (normalization.scales.empty()) normalization.scales.assign(data.variable_count(), 1.0);
  if (static_cast<int>(normalization.scales.size()) != data.variable_count()) {
    fail(ErrorCode::invalid_argument, "normalization record does not match the series");
  }
  auto state = std::make_shared<SessionState>();
  state->normalization = std::move(normalization);
  state->data = std::make_shared<const MFTS>(std::move(data));
  state->tolerance = tolerance;
  state_ = std::move(state);
}

std::shared_ptr<const SessionState> AnalysisSession::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return state_;
}

std::shared_ptr<const SessionState> AnalysisSession::publish(std::shared_ptr<SessionState> next) {
  std::shared_ptr<const SessionState> frozen = std::move(next);
  std::lock_guard lock(snapshot_mutex_);
  state_ = frozen;
  return frozen;
}

std::shared_ptr<const SessionState> AnalysisSession::normalize(const std::vector<int>& variables) {
  std::lock_guard lock(mutate_);
  const auto current = snapshot();
  auto [scaled, record] = mfssa::normalize(*current->data, variables);
  auto next = std::make_shared<SessionState>();
  next->tolerance = current->tolerance;
  next->normalization = current->normalization;
  for (std::size_t j = 0; j < record.scales.size(); ++j) next->normalization.scales[j] *= record.scales[j];
  next->data = std::make_shared<const MFTS>(std::move(scaled));
  return publish(std::move(next));
}

std::shared_ptr<const SessionState> AnalysisSession::decompose(int L) {
  std::lock_guard lock(mutate_);
  const auto current = snapshot();
  const MFTS& data = *current->data;
  if (L <= 0) L = default_window(data.length());
  const std::string fp = decomposition_fingerprint(data, L, current->tolerance, variant_);
  if (current->decomposition && current->decomposition->fingerprint == fp) return current;

  auto dec = std::make_shared<SessionDecomposition>();
  dec->variant = variant_;
  dec->fingerprint = fp;
  auto next = std::make_shared<SessionState>(*current);
  next->warnings.clear();
  if (variant_ == Variant::mfssa) {
    const TrajectoryRep rep = embed(data, L);
    if (rep.plan.window_exceeds_half()) {
      next->warnings.push_back("window length " + std::to_string(L) + " exceeds floor(N/2) = " +
                               std::to_string(data.length() / 2));
    }
    dec->mfssa = mfssa::decompose(rep, current->tolerance);
  } else {
    const HmfssaRep rep = hmfssa_embed(data, L);
    if (rep.plan.window_exceeds_half()) {
      next->warnings.push_back("window length " + std::to_string(L) + " exceeds floor(N/2) = " +
                               std::to_string(data.length() / 2));
    }
    dec->hmfssa = hmfssa_decompose(rep, current->tolerance);
  }
  next->decomposition = dec;
  next->reconstructions.reset();
  if (next->grouping) {
    if (grouping_offenders(*next->grouping, dec->rank()).empty()) {
      next->reconstructions =
          std::make_shared<const ReconstructionSet>(reconstruct_state(*dec, data, *next->grouping, next->residual));
    } else {
      next->grouping.reset();
      next->residual = false;
      next->warnings.push_back("grouping dropped: it does not fit the new rank " + std::to_string(dec->rank()));
    }
  }
  return publish(std::move(next));
}

std::shared_ptr<const SessionState> AnalysisSession::set_grouping(Grouping grouping, bool residual) {
  std::lock_guard lock(mutate_);
  const auto current = snapshot();
  const auto& dec = require_decomposition(*current);
  if (current->grouping && current->grouping->groups == grouping.groups &&
      current->grouping->labels == grouping.labels && current->residual == residual) {
    return current;
  }
  grouping.validate(dec.rank());
  auto next = std::make_shared<SessionState>(*current);
  next->reconstructions =
      std::make_shared<const ReconstructionSet>(reconstruct_state(dec, *current->data, grouping, residual));
  next->grouping = std::move(grouping);
  next->residual = residual;
  return publish(std::move(next));
}

// ---------------------------------------------------------------------------

std::vector<int> grouping_offenders(const Grouping& grouping, int rank) {
  std::map<int, int> count;
  for (const auto& g : grouping.groups) {
    for (int i : g) ++count[i];
  }
  std::vector<int> out;
  for (const auto& [i, c] : count) {
    if (c > 1 || i < 0 || i >= rank) out.push_back(i + 1);
  }
  return out;
}

Grouping grouping_from_json(const Json& j) {
  if (j.is_string()) return Grouping::parse(j.get<std::string>());
  if (!j.is_array() || j.empty()) fail(ErrorCode::invalid_argument, "groups must be a string or a non-empty array");
  Grouping g;
  for (const auto& group : j) {
    if (!group.is_array() || group.empty()) fail(ErrorCode::invalid_argument, "each group must be a non-empty array");
    std::vector<int> idx;
    for (const auto& i : group) {
      if (!i.is_number_integer()) fail(ErrorCode::invalid_argument, "group entries must be integers");
      if (i.get<int>() < 1) fail(ErrorCode::index_out_of_range, "component indices start at 1");
      idx.push_back(i.get<int>() - 1);
    }
    g.groups.push_back(std::move(idx));
  }
  return g;
}

Json reconstruction_to_json(const SessionState& state, std::size_t group) {
  const auto& dec = require_decomposition(state);
  if (!state.reconstructions) fail(ErrorCode::invalid_argument, "no grouping has been set");
  const auto& set = *state.reconstructions;
  if (group >= set.parts.size()) {
    fail(ErrorCode::index_out_of_range, "group " + std::to_string(group + 1) + " out of range");
  }
  const bool is_residual = state.residual && group + 1 == set.parts.size() && set.labels[group] == "residual" &&
                           group >= state.grouping->groups.size();
  Json j = {{"fingerprint", dec.fingerprint},
            {"label", set.labels[group]},
            {"group", is_residual ? Json("residual") : Json(static_cast<int>(group) + 1)},
            {"grouping", state.grouping->to_string()},
            {"share", set.shares[group]},
            {"series", mfts_to_json(set.parts[group], state.data.get())}};
  j["variant"] = to_string(dec.variant);
  return j;
}

Json plotdata_to_json(const SessionState& state) {
  const auto& dec = require_decomposition(state);
  const Vector& s = dec.sigma();
  const int r = dec.rank();
  const double total = s.squaredNorm();
  Json share = Json::array(), cumulative = Json::array();
  double acc = 0.0;
  for (int i = 0; i < r; ++i) {
    share.push_back(s(i) * s(i) / total);
    acc += s(i) * s(i);
    cumulative.push_back(acc / total);
  }
  const int m = std::min(r, kPlotComponents);
  Json right = Json::array();
  for (int i = 0; i < m; ++i) right.push_back(vector_json(dec.V().col(i)));
  Json paired = Json::array();
  for (int i = 0; i + 1 < m; ++i) {
    paired.push_back({{"i", i + 1}, {"j", i + 2}, {"x", right[i]}, {"y", right[i + 1]}});
  }

  Json left = Json::array();
  const auto render = [&](const TrajectoryDecomposition& td, int variable, const std::string& name) {
    const DomainSpec& domain = td.bases[variable]->domain();
    const Sites sites = plot_sites(domain);
    Json comps = Json::array();
    for (const auto& f : render_left_functions(td, variable, sites, 0, m)) comps.push_back(matrix_to_json(f));
    left.push_back({{"variable", name},
                    {"index", variable},
                    {"dimension", domain.dimension()},
                    {"sites", grid_to_json(sites)},
                    {"components", comps}});
  };
  if (dec.variant == Variant::mfssa) {
    for (int j = 0; j < state.data->variable_count(); ++j) render(*dec.mfssa, j, state.data->variable(j).name);
  } else {
    render(as_single_space(*dec.hmfssa), 0, "common");
  }

  return Json{{"fingerprint", dec.fingerprint},
              {"variant", to_string(dec.variant)},
              {"L", dec.window()},
              {"K", dec.variant == Variant::mfssa ? dec.mfssa->plan.columns() : dec.hmfssa->plan.columns()},
              {"rank", r},
              {"scree", {{"sigma", vector_json(s)}, {"share", share}, {"cumulative_share", cumulative}}},
              {"right_vectors", right},
              {"paired", paired},
              {"left_functions", left}};
}

WCorrelationMatrix session_wcorrelation(const SessionState& state) {
  const auto& dec = require_decomposition(state);
  if (state.reconstructions) return wcorrelation_matrix(*state.reconstructions, dec.window());
  const int m = std::min(dec.rank(), kElementaryWcor);
  Grouping g = Grouping::elementary(m);
  for (int i = 0; i < m; ++i) g.labels.push_back(std::to_string(i + 1));
  return wcorrelation_matrix(reconstruct_state(dec, *state.data, g, false), dec.window());
}

Json wcorrelation_json(const SessionState& state) {
  const auto& dec = require_decomposition(state);
  const int m = std::min(dec.rank(), kElementaryWcor);
  Grouping g = Grouping::elementary(m);
  for (int i = 0; i < m; ++i) g.labels.push_back(std::to_string(i + 1));
  Json j = {{"fingerprint", dec.fingerprint},
            {"elementary", wcorrelation_to_json(wcorrelation_matrix(reconstruct_state(dec, *state.data, g, false),
                                                                    dec.window()))},
            {"groups", nullptr}};
  if (state.reconstructions) {
    j["groups"] = wcorrelation_to_json(wcorrelation_matrix(*state.reconstructions, dec.window()));
  }
  return j;
}

Json session_export(const SessionState& state) {
  Json vars = Json::array();
  for (const auto& v : state.data->variables()) {
    Json item = {{"name", v.name},
                 {"domain", domain_to_json(v.basis->domain())},
                 {"basis", basis_to_json(*v.basis)},
                 {"coefficients", matrix_to_json(v.coefficients.transpose())}};
    if (v.samples) {
      item["grid"] = grid_to_json(v.samples->sites);
      item["values"] = matrix_to_json(v.samples->values.transpose());
    } else if (v.basis->kind() == BasisKind::discrete_delta) {
      item["grid"] = grid_to_json(v.basis->delta_sites());
    }
    vars.push_back(std::move(item));
  }
  Json j = {{"format", "mfssa-session"},
            {"version", 1},
            {"variables", vars},
            {"normalization", state.normalization.scales},
            {"tolerance", state.tolerance},
            {"L", nullptr},
            {"variant", "mfssa"},
            {"grouping", nullptr},
            {"labels", nullptr},
            {"residual", state.residual}};
  if (state.decomposition) {
    j["L"] = state.decomposition->window();
    j["variant"] = to_string(state.decomposition->variant);
    j["fingerprint"] = state.decomposition->fingerprint;
  }
  if (state.grouping) {
    j["grouping"] = state.grouping->to_string();
    j["labels"] = state.grouping->labels;
  }
  return j;
}

std::shared_ptr<AnalysisSession> session_import(const Json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != "mfssa-session") {
      fail(ErrorCode::schema_violation, "not a session export");
    }
    std::vector<FunctionalVariable> vars;
    for (const auto& v : doc.at("variables")) {
      const DomainSpec domain = parse_domain(v.at("domain"));
      Sites grid;
      if (v.contains("grid")) grid = parse_grid(v.at("grid"), domain.dimension());
      FunctionalVariable fv;
      fv.name = v.at("name").get<std::string>();
      fv.basis = parse_basis(v.at("basis"), domain, grid);
      fv.coefficients = matrix_from_json(v.at("coefficients")).transpose();
      if (v.contains("values")) fv.samples = SampleGrid{grid, matrix_from_json(v.at("values")).transpose()};
      vars.push_back(std::move(fv));
    }
    const Variant variant = parse_variant(doc.value("variant", std::string("mfssa")));
    NormalizationRecord record;
    if (doc.contains("normalization")) record.scales = doc.at("normalization").get<std::vector<double>>();
    auto session = std::make_shared<AnalysisSession>(
        MFTS(std::move(vars)), doc.value("tolerance", kDefaultRankTolerance), variant, std::move(record));
    if (!doc.at("L").is_null()) {
      session->decompose(doc.at("L").get<int>());
      if (!doc.at("grouping").is_null()) {
        Grouping g = Grouping::parse(doc.at("grouping").get<std::string>());
        if (doc.contains("labels") && doc.at("labels").is_array()) g.labels = doc.at("labels").get<std::vector<std::string>>();
        session->set_grouping(std::move(g), doc.value("residual", false));
      }
    }
    return session;
  } catch (const Json::exception& e) {
    fail(ErrorCode::schema_violation, std::string("session import: ") + e.what());
  }
}

}  // namespace mfssa
