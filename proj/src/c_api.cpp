#include "mfssa/mfssa.h"

#include <cstdlib>
#include <cstring>
#include <functional>
#include <memory>
#include <string>

#include "mfssa/core/dataset_io.hpp"
#include "mfssa/core/error.hpp"
#include "mfssa/core/server.hpp"
#include "mfssa/core/session.hpp"
#include "mfssa/core/simulation.hpp"

struct mfssa_session {
  std::shared_ptr<mfssa::AnalysisSession> impl;
};

namespace {

thread_local std::string last_error;

mfssa_status status_of(mfssa::ErrorCode code) { return static_cast<mfssa_status>(static_cast<int>(code) + 1); }

mfssa_status record(mfssa_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
mfssa_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MFSSA_OK;
  } catch (const mfssa::Error& e) {
    return record(status_of(e.code()), e.what());
  } catch (const mfssa::Json::exception& e) {
    return record(MFSSA_SCHEMA_VIOLATION, e.what());
  } catch (const std::bad_alloc&) {
    return record(MFSSA_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(MFSSA_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) mfssa::fail(mfssa::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

double tolerance_or_default(double tol) { return tol > 0.0 ? tol : mfssa::kDefaultRankTolerance; }

mfssa::Variant variant_of(const char* name) { return name ? mfssa::parse_variant(name) : mfssa::Variant::mfssa; }

mfssa_status make_session(mfssa_session** out, const std::function<mfssa::MFTS()>& load, double tol,
                          const char* variant) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto impl = std::make_shared<mfssa::AnalysisSession>(load(), tolerance_or_default(tol), variant_of(variant));
    *out = new mfssa_session{std::move(impl)};
  });
}

std::shared_ptr<const mfssa::SessionState> state_of(const mfssa_session* s) {
  require(s, "session");
  return s->impl->snapshot();
}

}  // namespace

extern "C" {

const char* mfssa_version(void) { return "1.0.0"; }

const char* mfssa_status_name(mfssa_status status) {
  if (status == MFSSA_OK) return "ok";
  if (status == MFSSA_INTERNAL) return "internal";
  if (status > MFSSA_OK && status < MFSSA_INTERNAL) {
    return mfssa::to_string(static_cast<mfssa::ErrorCode>(static_cast<int>(status) - 1));
  }
  return "unknown";
}

const char* mfssa_last_error(void) { return last_error.c_str(); }

void mfssa_string_free(char* s) { std::free(s); }

mfssa_status mfssa_session_from_json(const char* dataset_json, double tolerance, const char* variant,
                                     mfssa_session** out) {
  return make_session(
      out,
      [&] {
        require(dataset_json, "dataset_json");
        mfssa::Json doc;
        try {
          doc = mfssa::Json::parse(dataset_json);
        } catch (const mfssa::Json::exception& e) {
          mfssa::fail(mfssa::ErrorCode::schema_violation, std::string("dataset is not JSON: ") + e.what());
        }
        return mfssa::ingest(doc);
      },
      tolerance, variant);
}

mfssa_status mfssa_session_from_file(const char* path, double tolerance, const char* variant, mfssa_session** out) {
  return make_session(
      out,
      [&] {
        require(path, "path");
        return mfssa::ingest_file(path);
      },
      tolerance, variant);
}

mfssa_status mfssa_session_from_csv(const char* path, const char* domain_json, const char* basis_json,
                                    double tolerance, const char* variant, mfssa_session** out) {
  return make_session(
      out,
      [&] {
        require(path, "path");
        require(domain_json, "domain_json");
        require(basis_json, "basis_json");
        return mfssa::ingest_csv(path, mfssa::Json::parse(domain_json), mfssa::Json::parse(basis_json));
      },
      tolerance, variant);
}

mfssa_status mfssa_session_import(const char* export_json, mfssa_session** out) {
  return guarded([&] {
    require(out, "out");
    require(export_json, "export_json");
    *out = nullptr;
    mfssa::Json doc;
    try {
      doc = mfssa::Json::parse(export_json);
    } catch (const mfssa::Json::exception& e) {
      mfssa::fail(mfssa::ErrorCode::schema_violation, std::string("export is not JSON: ") + e.what());
    }
    *out = new mfssa_session{mfssa::session_import(doc)};
  });
}

void mfssa_session_free(mfssa_session* session) { delete session; }

mfssa_status mfssa_session_normalize(mfssa_session* session, const int* variables, size_t count) {
  return guarded([&] {
    require(session, "session");
    require(count == 0 || variables, "variables");
    std::vector<int> which;
    for (size_t i = 0; i < count; ++i) which.push_back(variables[i] - 1);
    session->impl->normalize(which);
  });
}

mfssa_status mfssa_session_decompose(mfssa_session* session, int lag, char** json_out) {
  return guarded([&] {
    require(session, "session");
    const auto state = session->impl->decompose(lag);
    if (json_out) {
      mfssa::Json j = state->decomposition->to_json();
      j["warnings"] = state->warnings;
      *json_out = copy_out(j.dump());
    }
  });
}

mfssa_status mfssa_session_rank(const mfssa_session* session, int* rank) {
  return guarded([&] {
    require(rank, "rank");
    const auto state = state_of(session);
    if (!state->decomposition) mfssa::fail(mfssa::ErrorCode::invalid_argument, "session has no decomposition yet");
    *rank = state->decomposition->rank();
  });
}

mfssa_status mfssa_session_warnings(const mfssa_session* session, char** json_out) {
  return guarded([&] {
    require(json_out, "json_out");
    *json_out = copy_out(mfssa::Json(state_of(session)->warnings).dump());
  });
}

mfssa_status mfssa_session_set_grouping(mfssa_session* session, const char* groups, const char* labels_json,
                                        int residual) {
  return guarded([&] {
    require(session, "session");
    require(groups, "groups");
    mfssa::Grouping g = mfssa::Grouping::parse(groups);
    if (labels_json) g.labels = mfssa::Json::parse(labels_json).get<std::vector<std::string>>();
    session->impl->set_grouping(std::move(g), residual != 0);
  });
}

mfssa_status mfssa_session_group_count(const mfssa_session* session, int* count) {
  return guarded([&] {
    require(count, "count");
    const auto state = state_of(session);
    *count = state->reconstructions ? static_cast<int>(state->reconstructions->parts.size()) : 0;
  });
}

mfssa_status mfssa_session_reconstruction(const mfssa_session* session, int group, char** json_out) {
  return guarded([&] {
    require(json_out, "json_out");
    if (group < 1) mfssa::fail(mfssa::ErrorCode::index_out_of_range, "groups are numbered from 1");
    *json_out = copy_out(mfssa::reconstruction_to_json(*state_of(session), group - 1).dump());
  });
}

mfssa_status mfssa_session_wcorrelation(const mfssa_session* session, int as_csv, char** out) {
  return guarded([&] {
    require(out, "out");
    const auto state = state_of(session);
    *out = copy_out(as_csv ? mfssa::wcorrelation_to_csv(mfssa::session_wcorrelation(*state))
                           : mfssa::wcorrelation_json(*state).dump());
  });
}

mfssa_status mfssa_session_plotdata(const mfssa_session* session, char** json_out) {
  return guarded([&] {
    require(json_out, "json_out");
    *json_out = copy_out(mfssa::plotdata_to_json(*state_of(session)).dump());
  });
}

mfssa_status mfssa_session_export(const mfssa_session* session, char** json_out) {
  return guarded([&] {
    require(json_out, "json_out");
    *json_out = copy_out(mfssa::session_export(*state_of(session)).dump());
  });
}

mfssa_status mfssa_simulate(const char* request_json, int threads, char** csv_out) {
  return guarded([&] {
    require(request_json, "request_json");
    require(csv_out, "csv_out");
    mfssa::Json req;
    try {
      req = mfssa::Json::parse(request_json);
    } catch (const mfssa::Json::exception& e) {
      mfssa::fail(mfssa::ErrorCode::schema_violation, std::string("request is not JSON: ") + e.what());
    }
    if (!req.is_object()) mfssa::fail(mfssa::ErrorCode::schema_violation, "request must be an object");
    std::vector<mfssa::sim::SimConfig> configs;
    if (req.contains("preset")) {
      configs = mfssa::sim::preset(req.at("preset").get<std::string>(), req.value("seed", std::uint64_t{0}));
      if (req.contains("noise")) {
        // A single noise setting replaces the preset's noise sweep.
        auto one = configs.front();
        one.noise = mfssa::sim::parse_noise(req.at("noise").get<std::string>());
        configs = {one};
      }
      if (req.contains("replicates")) {
        for (auto& c : configs) c.replicates = req.at("replicates").get<int>();
      }
    } else {
      configs = mfssa::sim::configs_from_json(req);
    }
    std::vector<mfssa::sim::Method> methods = mfssa::sim::default_methods();
    if (req.contains("methods")) {
      methods.clear();
      for (const auto& m : req.at("methods")) methods.push_back(mfssa::sim::parse_method(m.get<std::string>()));
    }
    *csv_out = copy_out(mfssa::sim::study_to_csv(mfssa::sim::run_study(configs, methods, std::max(1, threads))));
  });
}

mfssa_status mfssa_far1_norm_check(double target, double* gamma0, double* norm_squared) {
  return guarded([&] {
    require(gamma0, "gamma0");
    require(norm_squared, "norm_squared");
    if (!(target > 0.0) || target >= 1.0) {
      mfssa::fail(mfssa::ErrorCode::invalid_argument, "operator norm target must lie in (0, 1)");
    }
    *gamma0 = mfssa::sim::gamma0_for_norm(target);
    *norm_squared = mfssa::sim::far1_norm_squared(*gamma0);
  });
}

mfssa_status mfssa_serve(const char* host, int port, const char* static_dir, double tolerance,
                         void (*on_bound)(int port, void* user), void* user) {
  return guarded([&] {
    mfssa::ServerOptions options;
    if (host) options.host = host;
    options.port = port;
    if (static_dir) options.static_dir = static_dir;
    options.tolerance = tolerance_or_default(tolerance);
    mfssa::Server server(options);
    const int bound = server.bind();
    if (on_bound) on_bound(bound, user);
    server.listen();
  });
}

}  // extern "C"
