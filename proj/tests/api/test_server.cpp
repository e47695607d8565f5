#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
// Before httplib.h: <resolv.h> defines _res, which Eigen uses as a name.
#include "mfssa/core/server.hpp"

#include <doctest.h>
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

using namespace mfssa;

namespace {

std::string dataset_text() {
  const char* p = std::getenv("MFSSA_TEST_DATASET");
  REQUIRE(p);
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Server on a free port for the lifetime of the fixture.
struct Running {
  Server server;
  int port;
  std::thread thread;

  explicit Running(ServerOptions o = {}) : server([&] {
    o.port = 0;
    return o;
  }()), port(server.bind()), thread([this] { server.listen(); }) {}

  ~Running() {
    server.stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60);
    return c;
  }
};

std::string create(httplib::Client& c, const std::string& body) {
  const auto res = c.Post("/api/session", body, "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  return Json::parse(res->body).at("id").get<std::string>();
}

}  // namespace

TEST_CASE("http status mapping") {
  CHECK(http_status(ErrorCode::overlapping_groups) == 422);
  CHECK(http_status(ErrorCode::index_out_of_range) == 422);
  CHECK(http_status(ErrorCode::common_domain_required) == 422);
  CHECK(http_status(ErrorCode::schema_violation) == 400);
  CHECK(http_status(ErrorCode::numeric_failure) == 500);
}

TEST_CASE("session lifecycle over HTTP") {
  Running r;
  auto c = r.client();
  const std::string data = dataset_text();

  const auto created = c.Post("/api/session", data, "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const Json info = Json::parse(created->body);
  const std::string id = info["id"];
  CHECK(info["N"] == 100);
  CHECK(info["L"] == 50);
  CHECK(r.server.session_count() == 1);
  const std::string base = "/api/session/" + id;

  // Decomposition is cached on (data, L).
  auto d1 = c.Get(base + "/decomposition?lag=20");
  REQUIRE(d1);
  REQUIRE(d1->status == 200);
  const Json dec = Json::parse(d1->body);
  CHECK(dec["L"] == 20);
  auto d2 = c.Get(base + "/decomposition");
  CHECK(Json::parse(d2->body)["fingerprint"] == dec["fingerprint"]);
  CHECK(d2->body == d1->body);
  CHECK(c.Get(base + "/decomposition?lag=abc")->status == 400);
  CHECK(c.Get(base + "/decomposition?lag=0")->status == 400);

  const auto plot = c.Get(base + "/plotdata");
  REQUIRE(plot->status == 200);
  CHECK(Json::parse(plot->body)["L"] == 20);

  // Grouping errors carry the offending indices.
  auto bad = c.Put(base + "/grouping", R"({"groups":"1;1,2"})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
  Json err = Json::parse(bad->body);
  CHECK(err["error"] == "overlapping_groups");
  CHECK(err["offending"] == Json::array({1}));
  bad = c.Put(base + "/grouping", R"({"groups":[[1],[2,10000]]})", "application/json");
  CHECK(bad->status == 422);
  err = Json::parse(bad->body);
  CHECK(err["error"] == "index_out_of_range");
  CHECK(err["offending"] == Json::array({10000}));
  CHECK(c.Put(base + "/grouping", R"({"groups":"1;;2"})", "application/json")->status == 422);
  CHECK(c.Put(base + "/grouping", R"({"nope":1})", "application/json")->status == 400);
  CHECK(c.Put(base + "/grouping", "not json", "application/json")->status == 400);
  CHECK(c.Get(base + "/reconstruction/1")->status == 409);

  const std::string grouping = R"({"groups":"1;2,3;4,5","labels":["mean","a","b"],"residual":true})";
  auto ok = c.Put(base + "/grouping", grouping, "application/json");
  REQUIRE(ok->status == 200);
  CHECK(Json::parse(ok->body)["labels"] == Json::array({"mean", "a", "b", "residual"}));

  const auto rec1 = c.Get(base + "/reconstruction/2");
  REQUIRE(rec1->status == 200);
  CHECK(Json::parse(rec1->body)["label"] == "a");
  CHECK(c.Get(base + "/reconstruction/b")->status == 200);
  CHECK(c.Get(base + "/reconstruction/residual")->status == 200);
  CHECK(c.Get(base + "/reconstruction/5")->status == 404);
  CHECK(c.Get(base + "/reconstruction/zzz")->status == 404);

  // Repeating the PUT is idempotent down to the bytes.
  REQUIRE(c.Put(base + "/grouping", grouping, "application/json")->status == 200);
  CHECK(c.Get(base + "/reconstruction/2")->body == rec1->body);

  const auto wc = c.Get(base + "/wcorrelation");
  REQUIRE(wc->status == 200);
  const Json w = Json::parse(wc->body);
  const Json& m = w["groups"]["matrix"];
  REQUIRE(m.size() == 4);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m[i][i].get<double>() == doctest::Approx(1.0));
    for (std::size_t j = 0; j < m.size(); ++j) {
      CHECK(m[i][j].get<double>() == m[j][i].get<double>());
      CHECK(std::abs(m[i][j].get<double>()) <= 1.0 + 1e-10);
    }
  }

  // Export then import into a new session with the same fingerprint.
  const auto exported = c.Get(base + "/export");
  REQUIRE(exported->status == 200);
  const auto imported = c.Post("/api/session/import", exported->body, "application/json");
  REQUIRE(imported->status == 201);
  const Json ij = Json::parse(imported->body);
  CHECK(ij["fingerprint"] == dec["fingerprint"]);
  const std::string base2 = "/api/session/" + ij["id"].get<std::string>();
  CHECK(c.Get(base2 + "/reconstruction/2")->body == rec1->body);
  CHECK(c.Get(base2 + "/export")->body == exported->body);
  CHECK(c.Post("/api/session/import", "{}", "application/json")->status == 400);

  CHECK(c.Delete(base2)->status == 204);
  CHECK(c.Get(base2 + "/export")->status == 404);
  CHECK(c.Get("/api/session/0123abcd/plotdata")->status == 404);
}

TEST_CASE("session creation options and errors") {
  Running r;
  auto c = r.client();
  const std::string data = dataset_text();
  const std::string wrapped =
      R"({"lag":12,"normalize":[2],"variant":"hmfssa","tolerance":1e-10,"dataset":)" + data + "}";
  const auto res = c.Post("/api/session", wrapped, "application/json");
  REQUIRE(res->status == 201);
  const Json info = Json::parse(res->body);
  CHECK(info["L"] == 12);
  const std::string base = "/api/session/" + info["id"].get<std::string>();
  const Json exported = Json::parse(c.Get(base + "/export")->body);
  CHECK(exported["variant"] == "hmfssa");
  CHECK(exported["normalization"][0] == 1.0);
  CHECK(exported["normalization"][1] != 1.0);
  CHECK(exported["tolerance"] == 1e-10);

  CHECK(c.Post("/api/session", "{", "application/json")->status == 400);
  const auto schema = c.Post("/api/session", R"({"variables":[]})", "application/json");
  CHECK(schema->status == 400);
  CHECK(Json::parse(schema->body)["error"] == "schema_violation");
  CHECK(c.Post("/api/session", R"({"variant":"x","dataset":)" + data + "}", "application/json")->status == 400);
  CHECK(c.Get("/api/health")->status == 200);
}

TEST_CASE("hmfssa rejects mixed bases with 422") {
  Running r;
  auto c = r.client();
  Json doc = Json::parse(dataset_text());
  doc["variables"][1]["basis"]["df"] = 9;
  const auto res =
      c.Post("/api/session", Json{{"dataset", doc}, {"variant", "hmfssa"}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 422);
  CHECK(Json::parse(res->body)["error"] == "common_domain_required");
}

TEST_CASE("concurrent sessions") {
  Running r;
  const std::string data = dataset_text();
  std::vector<std::thread> workers;
  std::atomic<int> failures{0};
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      auto c = r.client();
      const auto res = c.Post("/api/session", data, "application/json");
      if (!res || res->status != 201) {
        ++failures;
        return;
      }
      const std::string base = "/api/session/" + Json::parse(res->body)["id"].get<std::string>();
      for (int L = 10 + w; L < 30; L += 4) {
        const auto d = c.Get(base + "/decomposition?lag=" + std::to_string(L));
        if (!d || d->status != 200 || Json::parse(d->body)["L"] != L) ++failures;
      }
    });
  }
  for (auto& t : workers) t.join();
  CHECK(failures == 0);
  CHECK(r.server.session_count() == 4);
}

TEST_CASE("static files and bind failures") {
  const auto dir = std::filesystem::temp_directory_path() / "mfssa_static_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "index.html") << "<html>ok</html>";
  ServerOptions o;
  o.static_dir = dir.string();
  Running r(o);
  auto c = r.client();
  const auto res = c.Get("/index.html");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == "<html>ok</html>");

  ServerOptions clash;
  clash.port = r.port;
  Server second(clash);
  bool threw = false;
  try {
    second.bind();
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::io_error;
  }
  CHECK(threw);

  ServerOptions missing;
  missing.static_dir = (dir / "absent").string();
  bool missing_threw = false;
  try {
    Server s(missing);
  } catch (const Error& e) {
    missing_threw = e.code() == ErrorCode::io_error;
  }
  CHECK(missing_threw);
}
