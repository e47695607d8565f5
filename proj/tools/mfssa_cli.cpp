// mfssa command-line driver over the C API.
//
// Exit status: 0 on success, the mfssa_status value of the failure otherwise
// (see mfssa.h), CLI11's code for usage errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfssa/mfssa.h"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Failure {
  mfssa_status status;
};

void check(mfssa_status status) {
  if (status != MFSSA_OK) throw Failure{status};
}

std::string take(char* s) {
  std::string out(s ? s : "");
  mfssa_string_free(s);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    std::cerr << "mfssa: cannot write " << path << "\n";
    throw Failure{MFSSA_IO_ERROR};
  }
}

std::string read_text(const std::string& arg) {
  // "@file" reads JSON from a file; anything else is the JSON itself.
  if (arg.empty() || arg[0] != '@') return arg;
  std::ifstream in(arg.substr(1));
  if (!in) {
    std::cerr << "mfssa: cannot read " << arg.substr(1) << "\n";
    throw Failure{MFSSA_IO_ERROR};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      std::cerr << "mfssa: --normalize expects \"all\" or 1-based variable indices, got \"" << text << "\"\n";
      throw Failure{MFSSA_INVALID_ARGUMENT};
    }
  }
  return out;
}

struct Session {
  mfssa_session* s = nullptr;
  ~Session() { mfssa_session_free(s); }
};

struct AnalyzeArgs {
  std::string input;
  std::string domain;
  std::string basis;
  int lag = 0;
  std::string groups;
  std::string labels;
  std::string out = ".";
  std::optional<std::string> normalize;
  bool residual = false;
  std::string variant = "mfssa";
};

void analyze(const AnalyzeArgs& a, double tolerance) {
  Session session;
  std::string ext = fs::path(a.input).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".csv") {
    if (a.domain.empty() || a.basis.empty()) {
      std::cerr << "mfssa: CSV input needs --domain and --basis\n";
      throw Failure{MFSSA_INVALID_ARGUMENT};
    }
    check(mfssa_session_from_csv(a.input.c_str(), read_text(a.domain).c_str(), read_text(a.basis).c_str(), tolerance,
                                 a.variant.c_str(), &session.s));
  } else {
    check(mfssa_session_from_file(a.input.c_str(), tolerance, a.variant.c_str(), &session.s));
  }

  if (a.normalize) {
    const std::vector<int> which = (a.normalize->empty() || *a.normalize == "all")
                                       ? std::vector<int>{}
                                       : parse_index_list(*a.normalize);
    check(mfssa_session_normalize(session.s, which.data(), which.size()));
  }

  char* text = nullptr;
  check(mfssa_session_decompose(session.s, a.lag, &text));
  const std::string decomposition = take(text);
  for (const auto& w : Json::parse(decomposition).at("warnings")) std::cerr << "mfssa: warning: " << w.get<std::string>() << "\n";

  if (!a.groups.empty()) {
    check(mfssa_session_set_grouping(session.s, a.groups.c_str(), a.labels.empty() ? nullptr : read_text(a.labels).c_str(),
                                     a.residual ? 1 : 0));
  }

  fs::create_directories(a.out);
  write_file(fs::path(a.out) / "decomposition.json", decomposition);

  int parts = 0;
  check(mfssa_session_group_count(session.s, &parts));
  for (int q = 1; q <= parts; ++q) {
    check(mfssa_session_reconstruction(session.s, q, &text));
    const std::string json = take(text);
    const Json group = Json::parse(json).at("group");
    const std::string name = group.is_string() ? group.get<std::string>() : std::to_string(group.get<int>());
    write_file(fs::path(a.out) / ("reconstruction_" + name + ".json"), json);
  }

  check(mfssa_session_wcorrelation(session.s, 1, &text));
  write_file(fs::path(a.out) / "wcorrelation.csv", take(text));
  check(mfssa_session_plotdata(session.s, &text));
  write_file(fs::path(a.out) / "plotdata.json", take(text));

  int rank = 0;
  check(mfssa_session_rank(session.s, &rank));
  std::cout << "rank " << rank << ", " << parts << " reconstruction file(s) in " << a.out << "\n";
}

struct SimulateArgs {
  std::string preset = "desk";
  bool full = false;
  std::string config;
  std::string noise;
  bool norm_check = false;
  std::string methods;
  int replicates = 0;
  std::string out;
};

void simulate(const SimulateArgs& a, std::optional<unsigned long long> seed, int threads) {
  if (a.norm_check) {
    const std::vector<std::pair<std::string, double>> all = {{"far1_00", 0.0}, {"far1_05", 0.5}, {"far1_09", 0.9}};
    bool any = false;
    for (const auto& [name, target] : all) {
      if (!a.noise.empty() && a.noise != name) continue;
      if (target == 0.0) continue;
      double gamma0 = 0, norm_sq = 0;
      check(mfssa_far1_norm_check(target, &gamma0, &norm_sq));
      std::printf("%s target %.1f gamma0 %.15g norm_squared %.15f\n", name.c_str(), target, gamma0, norm_sq);
      any = true;
    }
    if (!any) {
      std::cerr << "mfssa: --norm-check needs --noise far1_05 or far1_09\n";
      throw Failure{MFSSA_INVALID_ARGUMENT};
    }
    return;
  }

  Json req;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) {
      std::cerr << "mfssa: cannot read " << a.config << "\n";
      throw Failure{MFSSA_IO_ERROR};
    }
    try {
      req = Json::parse(in);
    } catch (const Json::exception& e) {
      std::cerr << "mfssa: " << a.config << ": " << e.what() << "\n";
      throw Failure{MFSSA_SCHEMA_VIOLATION};
    }
    if (!req.is_object()) {
      std::cerr << "mfssa: " << a.config << ": expected an object\n";
      throw Failure{MFSSA_SCHEMA_VIOLATION};
    }
    if (!a.noise.empty()) req["noise"] = Json::array({a.noise});
  } else {
    req["preset"] = a.full ? "full" : a.preset;
    if (!a.noise.empty()) req["noise"] = a.noise;
  }
  if (seed) req["seed"] = *seed;
  if (a.replicates > 0) req["replicates"] = a.replicates;
  if (!a.methods.empty()) {
    Json m = Json::array();
    std::stringstream ss(a.methods);
    std::string item;
    while (std::getline(ss, item, ',')) m.push_back(item);
    req["methods"] = m;
  }

  char* csv = nullptr;
  check(mfssa_simulate(req.dump().c_str(), threads, &csv));
  const std::string text = take(csv);
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    write_file(a.out, text);
  }
}

void on_bound(int port, void* user) {
  std::cout << "listening on http://" << *static_cast<std::string*>(user) << ":" << port << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate functional singular spectrum analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<unsigned long long> seed;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  double tolerance = 1e-12;
  app.add_option("--seed", seed, "Simulation seed");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tolerance", tolerance, "Relative rank tolerance on sigma")->check(CLI::Range(0.0, 1.0));

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze", "Decompose a dataset and write reconstructions and diagnostics");
  analyze_cmd->add_option("--input", an.input, "Dataset JSON or single-variable CSV")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--domain", an.domain, "Domain JSON for CSV input (or @file)");
  analyze_cmd->add_option("--basis", an.basis, "Basis JSON for CSV input (or @file)");
  analyze_cmd->add_option("--lag", an.lag, "Window length L (default floor(N/2))")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--groups", an.groups, "Grouping, e.g. \"1;2,3;4,5\"");
  analyze_cmd->add_option("--labels", an.labels, "Group labels as a JSON array (or @file)");
  analyze_cmd->add_option("--out", an.out, "Output directory");
  analyze_cmd->add_option("--normalize", an.normalize, "Normalize variables: all, or 1-based list like 1,3")
      ->expected(0, 1);
  analyze_cmd->add_flag("--residual", an.residual, "Also write the residual reconstruction");
  analyze_cmd->add_option("--variant", an.variant, "mfssa or hmfssa")->check(CLI::IsMember({"mfssa", "hmfssa"}));

  SimulateArgs sa;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the simulation study and print mean RMSE as CSV");
  simulate_cmd->add_option("--preset", sa.preset, "desk or full")->check(CLI::IsMember({"desk", "full"}));
  simulate_cmd->add_flag("--full", sa.full, "Full grid with 100 replicates");
  simulate_cmd->add_option("--config", sa.config, "Study config JSON")->check(CLI::ExistingFile);
  simulate_cmd->add_option("--noise", sa.noise, "none, white, far1_00, far1_05 or far1_09");
  simulate_cmd->add_flag("--norm-check", sa.norm_check, "Print gamma0 and the re-quadratured squared kernel norm");
  simulate_cmd->add_option("--methods", sa.methods, "Comma-separated methods");
  simulate_cmd->add_option("--replicates", sa.replicates, "Override the replicate count")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--out", sa.out, "CSV output file (default stdout)");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the REST API");
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--static", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze_cmd) {
      if (an.normalize && an.normalize->empty()) an.normalize = "all";
      analyze(an, tolerance);
    } else if (*simulate_cmd) {
      simulate(sa, seed, threads);
    } else if (*serve_cmd) {
      check(mfssa_serve(host.c_str(), port, static_dir.empty() ? nullptr : static_dir.c_str(), tolerance, on_bound,
                        &host));
    }
  } catch (const Failure& f) {
    if (*mfssa_last_error()) {
      std::cerr << "mfssa: " << mfssa_status_name(f.status) << ": " << mfssa_last_error() << "\n";
    }
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "mfssa: " << e.what() << "\n";
    return static_cast<int>(MFSSA_INTERNAL);
  }
  return 0;
}
