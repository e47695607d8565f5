#include "mfssa/core/server.hpp"

#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include <httplib.h>

#include "mfssa/core/error.hpp"

namespace mfssa {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::overlapping_groups:
    case ErrorCode::index_out_of_range:
    case ErrorCode::undefined_correlation:
    case ErrorCode::common_domain_required:
      return 422;
    case ErrorCode::numeric_failure:
      return 500;
    default:
      return 400;
  }
}

namespace {

constexpr std::size_t kMaxPayload = 256u * 1024u * 1024u;

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const Json& extra = Json::object()) {
  Json body = {{"error", code}, {"message", message}};
  for (const auto& [k, v] : extra.items()) body[k] = v;
  send_json(res, status, body);
}

std::vector<int> zero_based(const Json& j) {
  std::vector<int> out;
  for (const auto& i : j) out.push_back(i.get<int>() - 1);
  return out;
}

}  // namespace

struct Server::Impl {
  ServerOptions options;
  httplib::Server http;
  mutable std::mutex registry_mutex;
  std::map<std::string, std::shared_ptr<AnalysisSession>> sessions;
  std::mt19937_64 ids{std::random_device{}()};
  bool bound = false;

  std::string add(std::shared_ptr<AnalysisSession> s) {
    std::lock_guard lock(registry_mutex);
    std::string id;
    do {
      std::ostringstream os;
      os << std::hex << ids();
      id = os.str();
    } while (sessions.count(id));
    sessions.emplace(id, std::move(s));
    return id;
  }

  std::shared_ptr<AnalysisSession> find(const std::string& id) const {
    std::lock_guard lock(registry_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  // Runs `body` for the session named by the first path capture, turning
  // engine errors into JSON error responses.
  template <typename F>
  void with_session(const httplib::Request& req, httplib::Response& res, F&& body) {
    const auto session = find(req.matches[1]);
    if (!session) {
      send_error(res, 404, "not_found", "no session " + std::string(req.matches[1]));
      return;
    }
    guarded(res, [&] { body(*session); });
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const Json::exception& e) {
      send_error(res, 400, "schema_violation", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception& e) {
        fail(ErrorCode::schema_violation, std::string("request body is not JSON: ") + e.what());
      }
      const bool wrapped = body.is_object() && body.contains("dataset");
      const Json& dataset = wrapped ? body.at("dataset") : body;
      const Json opts = wrapped ? body : Json::object();
      const double tol = opts.value("tolerance", options.tolerance);
      const Variant variant = parse_variant(opts.value("variant", std::string("mfssa")));
      auto session = std::make_shared<AnalysisSession>(ingest(dataset), tol, variant);
      if (opts.contains("normalize")) {
        const Json& n = opts.at("normalize");
        if (n.is_boolean()) {
          if (n.get<bool>()) session->normalize({});
        } else {
          session->normalize(zero_based(n));
        }
      }
      int lag = opts.value("lag", 0);
      if (req.has_param("lag")) lag = std::stoi(req.get_param_value("lag"));
      const auto state = session->decompose(lag);
      const auto& data = *state->data;
      const std::string id = add(session);
      send_json(res, 201,
                {{"id", id},
                 {"N", data.length()},
                 {"p", data.variable_count()},
                 {"basis_sizes", data.basis_sizes()},
                 {"L", state->decomposition->window()},
                 {"rank", state->decomposition->rank()},
                 {"fingerprint", state->decomposition->fingerprint},
                 {"warnings", state->warnings}});
    });
  }

  void import(const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception& e) {
        fail(ErrorCode::schema_violation, std::string("request body is not JSON: ") + e.what());
      }
      auto session = session_import(body);
      const auto state = session->snapshot();
      const std::string id = add(session);
      Json out = {{"id", id}};
      if (state->decomposition) out["fingerprint"] = state->decomposition->fingerprint;
      send_json(res, 201, out);
    });
  }

  void routes() {
    http.set_payload_max_length(kMaxPayload);
    // SO_REUSEADDR only: the library default also sets SO_REUSEPORT, which
    // lets a second server share an occupied port instead of failing.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    http.Post("/api/session/import", [this](const auto& req, auto& res) { import(req, res); });
    http.Post("/api/session", [this](const auto& req, auto& res) { create(req, res); });

    http.Get(R"(/api/session/([0-9a-f]+)/decomposition)", [this](const auto& req, auto& res) {
      with_session(req, res, [&](AnalysisSession& s) {
        auto state = s.snapshot();
        if (req.has_param("lag")) {
          std::size_t used = 0;
          const std::string text = req.get_param_value("lag");
          int lag = 0;
          try {
            lag = std::stoi(text, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != text.size() || lag < 1) fail(ErrorCode::invalid_argument, "lag must be a positive integer");
          state = s.decompose(lag);
        } else if (!state->decomposition) {
          state = s.decompose(0);
        }
        Json j = state->decomposition->to_json();
        j["warnings"] = state->warnings;
        send_json(res, 200, j);
      });
    });

    http.Get(R"(/api/session/([0-9a-f]+)/plotdata)", [this](const auto& req, auto& res) {
      with_session(req, res, [&](AnalysisSession& s) { send_json(res, 200, plotdata_to_json(*s.snapshot())); });
    });

    http.Put(R"(/api/session/([0-9a-f]+)/grouping)", [this](const auto& req, auto& res) {
      with_session(req, res, [&](AnalysisSession& s) {
        const Json body = Json::parse(req.body);
        if (!body.is_object() || !body.contains("groups")) {
          fail(ErrorCode::schema_violation, "grouping body needs \"groups\"");
        }
        Grouping g;
        const auto state = s.snapshot();
        const int rank = state->decomposition ? state->decomposition->rank() : 0;
        try {
          g = grouping_from_json(body.at("groups"));
          if (body.contains("labels")) g.labels = body.at("labels").get<std::vector<std::string>>();
          g.validate(rank);
        } catch (const Error& e) {
          Json extra = {{"rank", rank}};
          // The text grammar rejects overlaps while parsing; recover the
          // offending indices from a lenient reading.
          std::vector<int> offenders;
          if (!g.groups.empty()) {
            offenders = grouping_offenders(g, rank);
          } else if (body.at("groups").is_string()) {
            Grouping loose;
            std::stringstream groups(body.at("groups").get<std::string>());
            std::string part;
            while (std::getline(groups, part, ';')) {
              loose.groups.emplace_back();
              std::stringstream items(part);
              std::string item;
              while (std::getline(items, item, ',')) {
                try {
                  loose.groups.back().push_back(std::stoi(item) - 1);
                } catch (const std::exception&) {
                }
              }
            }
            offenders = grouping_offenders(loose, rank);
          }
          extra["offending"] = offenders;
          const int status = e.code() == ErrorCode::invalid_argument ? 422 : http_status(e.code());
          send_error(res, status, to_string(e.code()), e.what(), extra);
          return;
        }
        const auto next = s.set_grouping(std::move(g), body.value("residual", false));
        Json labels = next->reconstructions->labels;
        Json shares = next->reconstructions->shares;
        send_json(res, 200,
                  {{"fingerprint", next->decomposition->fingerprint},
                   {"grouping", next->grouping->to_string()},
                   {"labels", labels},
                   {"shares", shares},
                   {"residual", next->residual}});
      });
    });

    http.Get(R"(/api/session/([0-9a-f]+)/reconstruction/([^/]+))", [this](const auto& req, auto& res) {
      with_session(req, res, [&](AnalysisSession& s) {
        const auto state = s.snapshot();
        if (!state->reconstructions) {
          send_error(res, 409, "no_grouping", "set a grouping first");
          return;
        }
        const std::string key = req.matches[2];
        const auto& labels = state->reconstructions->labels;
        std::optional<std::size_t> index;
        if (!key.empty() && std::all_of(key.begin(), key.end(), [](char c) { return std::isdigit(c); })) {
          const auto n = std::stoul(key);
          if (n >= 1) index = n - 1;
        } else {
          for (std::size_t q = 0; q < labels.size(); ++q) {
            if (labels[q] == key) index = q;
          }
        }
        if (!index || *index >= labels.size()) {
          send_error(res, 404, "not_found", "no group " + key);
          return;
        }
        send_json(res, 200, reconstruction_to_json(*state, *index));
      });
    });

    http.Get(R"(/api/session/([0-9a-f]+)/wcorrelation)", [this](const auto& req, auto& res) {
      with_session(req, res, [&](AnalysisSession& s) { send_json(res, 200, wcorrelation_json(*s.snapshot())); });
    });

    http.Get(R"(/api/session/([0-9a-f]+)/export)", [this](const auto& req, auto& res) {
      with_session(req, res, [&](AnalysisSession& s) { send_json(res, 200, session_export(*s.snapshot())); });
    });

    http.Delete(R"(/api/session/([0-9a-f]+))", [this](const auto& req, auto& res) {
      std::lock_guard lock(registry_mutex);
      if (sessions.erase(req.matches[1]) == 0) {
        send_error(res, 404, "not_found", "no session " + std::string(req.matches[1]));
        return;
      }
      res.status = 204;
    });

    http.Get("/api/health", [](const auto&, auto& res) { send_json(res, 200, {{"status", "ok"}}); });

    if (!options.static_dir.empty() && !http.set_mount_point("/", options.static_dir)) {
      fail(ErrorCode::io_error, "static directory " + options.static_dir + " does not exist");
    }
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  auto& o = impl_->options;
  int port = o.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(o.host);
  } else if (!impl_->http.bind_to_port(o.host, port)) {
    port = -1;
  }
  if (port < 0) fail(ErrorCode::io_error, "cannot bind " + o.host + ":" + std::to_string(o.port));
  impl_->bound = true;
  return port;
}

void Server::listen() {
  if (!impl_->bound) fail(ErrorCode::invalid_argument, "bind() before listen()");
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

std::size_t Server::session_count() const {
  std::lock_guard lock(impl_->registry_mutex);
  return impl_->sessions.size();
}

}  // namespace mfssa
