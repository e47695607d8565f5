#include "mfssa/core/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "mfssa/core/classical_mssa.hpp"
#include "mfssa/core/error.hpp"
#include "mfssa/core/hmfssa.hpp"
#include "mfssa/core/quadrature.hpp"
#include "mfssa/core/reconstruction.hpp"

namespace mfssa::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double kernel_shape(double s, double u) {
  const double a = 2.0 * s - 1.0;
  const double b = 2.0 * u - 1.0;
  return 2.0 - a * a - b * b;
}

}  // namespace

const char* to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::white: return "white";
    case NoiseKind::far1_00: return "far1_00";
    case NoiseKind::far1_05: return "far1_05";
    case NoiseKind::far1_09: return "far1_09";
  }
  return "unknown";
}

NoiseKind parse_noise(const std::string& name) {
  for (auto kind : {NoiseKind::none, NoiseKind::white, NoiseKind::far1_00, NoiseKind::far1_05, NoiseKind::far1_09}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorCode::invalid_argument, "unknown noise model \"" + name + "\"");
}

double noise_norm_target(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::far1_05: return 0.5;
    case NoiseKind::far1_09: return 0.9;
    default: return 0.0;
  }
}

bool is_far1(NoiseKind kind) {
  return kind == NoiseKind::far1_00 || kind == NoiseKind::far1_05 || kind == NoiseKind::far1_09;
}

bool SimConfig::on_study_grid() const {
  const auto in = [](double x, std::initializer_list<double> xs) {
    return std::find(xs.begin(), xs.end(), x) != xs.end();
  };
  return in(N, {100, 200}) && in(L, {20, 40}) && in(k, {0.0, 0.02}) && in(omega1, {0.1, 0.5}) &&
         in(omega2, {0.0, 0.25}) && noise != NoiseKind::none && n_sites == 100 && df == 15;
}

// ---------------------------------------------------------------------------

double kernel_square_integral() {
  // The integrand is a polynomial of degree 4 per axis; 4 nodes are exact.
  return integrate([](double s) {
    return integrate([s](double u) { return std::pow(kernel_shape(s, u), 2); }, 0.0, 1.0, 4);
  }, 0.0, 1.0, 4);
}

double gamma0_for_norm(double target) {
  if (!(target >= 0.0)) fail(ErrorCode::invalid_argument, "kernel norm target must be non-negative");
  return target / std::sqrt(kernel_square_integral());
}

double far1_norm_squared(double gamma0) { return gamma0 * gamma0 * kernel_square_integral(); }

Sites unit_sites(int n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "need at least two sites");
  Sites s(n, 1);
  for (int i = 0; i < n; ++i) s(i, 0) = static_cast<double>(i) / (n - 1);
  return s;
}

Matrix signal_values(const SimConfig& cfg, int variable, const Sites& sites) {
  const Eigen::Index n = sites.rows();
  Matrix y(n, cfg.N);
  for (int t = 1; t <= cfg.N; ++t) {
    const double c1 = std::cos(kTwoPi * cfg.omega1 * t);
    const double s1 = std::sin(kTwoPi * cfg.omega1 * t);
    const double c2 = std::cos(kTwoPi * cfg.omega2 * t);
    const double s2 = std::sin(kTwoPi * cfg.omega2 * t);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = sites(i, 0);
      double v;
      if (variable == 0) {
        v = cfg.k * t + std::exp(s * s) * c1 - std::exp(1.0 - s * s) * c2 -
            s1 * std::cos(2.0 * kTwoPi * s) + s2 * std::sin(std::numbers::pi * s);
      } else {
        v = std::exp(s * s) * s1 + c1 * std::cos(2.0 * kTwoPi * s);
      }
      y(i, t - 1) = v;
    }
  }
  return y;
}

Matrix brownian_paths(const Sites& sites, int count, std::mt19937_64& rng) {
  const Eigen::Index n = sites.rows();
  Matrix paths(n, count);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < count; ++c) {
    paths(0, c) = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) {
      const double ds = sites(i, 0) - sites(i - 1, 0);
      paths(i, c) = paths(i - 1, c) + std::sqrt(ds) * normal(rng);
    }
  }
  return paths;
}

Matrix simulate_far1(double gamma0, int N, const Sites& sites, std::mt19937_64& rng, int burn_in) {
  const Eigen::Index n = sites.rows();
  // Kernel operator discretized with trapezoidal weights in u.
  Matrix op(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index m = 0; m < n; ++m) {
      double w = 0.0;
      if (m > 0) w += 0.5 * (sites(m, 0) - sites(m - 1, 0));
      if (m + 1 < n) w += 0.5 * (sites(m + 1, 0) - sites(m, 0));
      op(i, m) = gamma0 * kernel_shape(sites(i, 0), sites(m, 0)) * w;
    }
  }
  const int total = burn_in + N;
  const Matrix eps = brownian_paths(sites, total, rng);
  Matrix x(n, total);
  x.col(0) = eps.col(0);
  for (int t = 1; t < total; ++t) x.col(t) = op * x.col(t - 1) + eps.col(t);
  return x.rightCols(N);
}

Matrix simulate_white(double sd, int N, int n_sites, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix e(n_sites, N);
  for (int t = 0; t < N; ++t) {
    for (int i = 0; i < n_sites; ++i) e(i, t) = normal(rng);
  }
  return e;
}

std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
  return std::mt19937_64(seq);
}

SimulatedData simulate_signal(const SimConfig& cfg, std::uint64_t replicate) {
  const Sites sites = unit_sites(cfg.n_sites);
  const BasisPtr basis = make_bspline_basis(DomainSpec::interval(0.0, 1.0), cfg.df, cfg.degree);
  auto rng = replicate_rng(cfg.seed, replicate);
  const double gamma0 = gamma0_for_norm(noise_norm_target(cfg.noise));

  std::vector<Matrix> truth(2);
  std::vector<Matrix> observed(2);
  std::vector<FunctionalVariable> truth_vars;
  std::vector<FunctionalVariable> obs_vars;
  for (int j = 0; j < 2; ++j) {
    truth[j] = signal_values(cfg, j, sites);
    Matrix noise;
    switch (cfg.noise) {
      case NoiseKind::none: noise = Matrix::Zero(cfg.n_sites, cfg.N); break;
      case NoiseKind::white: noise = simulate_white(cfg.white_sd, cfg.N, cfg.n_sites, rng); break;
      default: noise = simulate_far1(gamma0, cfg.N, sites, rng, cfg.burn_in); break;
    }
    observed[j] = truth[j] + noise;
    const std::string name = "y" + std::to_string(j + 1);
    SampleGrid tg{sites, truth[j]};
    SampleGrid og{sites, observed[j]};
    truth_vars.push_back(FunctionalVariable{name, basis, project_samples(tg, *basis), tg});
    obs_vars.push_back(FunctionalVariable{name, basis, project_samples(og, *basis), og});
  }
  return SimulatedData{sites, std::move(truth), std::move(observed), MFTS(std::move(truth_vars)),
                       MFTS(std::move(obs_vars))};
}

// ---------------------------------------------------------------------------

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::mfssa: return "mfssa";
    case Method::hmfssa: return "hmfssa";
    case Method::fssa_per_variable: return "fssa_per_variable";
    case Method::mssa_horizontal: return "mssa_horizontal";
    case Method::mssa_vertical: return "mssa_vertical";
    case Method::dfpca: return "dfpca";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (auto m : {Method::mfssa, Method::hmfssa, Method::fssa_per_variable, Method::mssa_horizontal,
                 Method::mssa_vertical, Method::dfpca}) {
    if (name == to_string(m)) return m;
  }
  fail(ErrorCode::invalid_argument, "unknown method \"" + name + "\"");
}

std::vector<Method> default_methods() {
  return {Method::mfssa, Method::hmfssa, Method::fssa_per_variable, Method::mssa_horizontal, Method::dfpca};
}

double rmse(const std::vector<Matrix>& truth, const std::vector<Matrix>& estimate) {
  if (truth.size() != estimate.size()) fail(ErrorCode::invalid_argument, "rmse: variable count mismatch");
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (truth[j].rows() != estimate[j].rows() || truth[j].cols() != estimate[j].cols()) {
      fail(ErrorCode::invalid_argument, "rmse: shape mismatch");
    }
    sum += (truth[j] - estimate[j]).squaredNorm();
    count += static_cast<double>(truth[j].size());
  }
  return std::sqrt(sum / count);
}

namespace {

Grouping leading(int components, int rank) {
  Grouping g;
  g.groups.emplace_back();
  for (int i = 0; i < std::min(components, rank); ++i) g.groups.back().push_back(i);
  return g;
}

std::vector<Matrix> evaluate_all(const MFTS& series, const Sites& sites) {
  std::vector<Matrix> out;
  for (int j = 0; j < series.variable_count(); ++j) out.push_back(evaluate(series, j, sites));
  return out;
}

}  // namespace

std::vector<Matrix> reconstruct_with(Method method, const SimConfig& cfg, const SimulatedData& data) {
  switch (method) {
    case Method::mfssa: {
      const auto dec = decompose(embed(data.observed, cfg.L));
      const auto set = reconstruct(dec, leading(cfg.components, dec.rank()), data.observed);
      return evaluate_all(set.parts.front(), data.sites);
    }
    case Method::hmfssa: {
      const auto dec = hmfssa_decompose(hmfssa_embed(data.observed, cfg.L));
      const auto set = hmfssa_reconstruct(dec, leading(cfg.components, dec.rank()), data.observed);
      return evaluate_all(set.parts.front(), data.sites);
    }
    case Method::fssa_per_variable: {
      std::vector<Matrix> out;
      for (int j = 0; j < data.observed.variable_count(); ++j) {
        const MFTS single({data.observed.variable(j)});
        const auto dec = decompose(embed(single, cfg.L));
        const auto set = reconstruct(dec, leading(cfg.components, dec.rank()), single);
        out.push_back(evaluate(set.parts.front(), 0, data.sites));
      }
      return out;
    }
    case Method::mssa_horizontal:
    case Method::mssa_vertical: {
      // Q = [Q_1; Q_2]: every sample site of every variable is one scalar series.
      const Eigen::Index n = data.sites.rows();
      VectorMTS q{Matrix(2 * n, cfg.N)};
      q.values.topRows(n) = data.observed_values[0];
      q.values.bottomRows(n) = data.observed_values[1];
      const auto stacking = method == Method::mssa_horizontal ? Stacking::horizontal : Stacking::vertical;
      const auto dec = mssa_decompose(q, cfg.L, stacking);
      const auto parts = mssa_reconstruct(dec, leading(cfg.components, dec.rank()));
      return {parts.front().values.topRows(n), parts.front().values.bottomRows(n)};
    }
    case Method::dfpca:
      break;
  }
  fail(ErrorCode::invalid_argument, std::string("method ") + to_string(method) + " is not implemented");
}

std::vector<StudyRow> run_study(const std::vector<SimConfig>& configs, const std::vector<Method>& methods,
                                int threads) {
  std::vector<StudyRow> rows;
  std::vector<Method> active;
  for (Method m : methods) {
    if (m != Method::dfpca) active.push_back(m);
  }
  for (const auto& cfg : configs) {
    if (cfg.replicates < 1) fail(ErrorCode::invalid_argument, "replicates must be positive");
    // errors[rep][method]
    std::vector<std::vector<double>> errors(cfg.replicates, std::vector<double>(active.size(), 0.0));
    const auto work = [&](int first, int stride) {
      for (int rep = first; rep < cfg.replicates; rep += stride) {
        const auto data = simulate_signal(cfg, static_cast<std::uint64_t>(rep));
        for (std::size_t m = 0; m < active.size(); ++m) {
          errors[rep][m] = rmse(data.truth_values, reconstruct_with(active[m], cfg, data));
        }
      }
    };
    const int workers = std::max(1, std::min(threads, cfg.replicates));
    if (workers == 1) {
      work(0, 1);
    } else {
      std::vector<std::exception_ptr> failures(workers);
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            work(w, workers);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
      }
    }
    for (Method m : methods) {
      StudyRow row{cfg, m, std::nullopt};
      const auto it = std::find(active.begin(), active.end(), m);
      if (it != active.end()) {
        const auto idx = static_cast<std::size_t>(it - active.begin());
        double sum = 0.0;
        for (int rep = 0; rep < cfg.replicates; ++rep) sum += errors[rep][idx];
        row.mean_rmse = sum / cfg.replicates;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string study_to_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream os;
  os << "N,L,omega1,omega2,k,noise,method,mean_rmse,replicates,seed\n";
  for (const auto& row : rows) {
    const auto& c = row.config;
    os << c.N << ',' << c.L << ',' << c.omega1 << ',' << c.omega2 << ',' << c.k << ',' << to_string(c.noise) << ','
       << to_string(row.method) << ',';
    if (row.mean_rmse) {
      os << std::setprecision(12) << *row.mean_rmse << std::setprecision(6);
    } else {
      os << "NA";
    }
    os << ',' << c.replicates << ',' << c.seed << '\n';
  }
  return os.str();
}

std::vector<SimConfig> preset(const std::string& name, std::uint64_t seed) {
  std::vector<SimConfig> out;
  if (name == "desk") {
    for (auto noise : {NoiseKind::white, NoiseKind::far1_05}) {
      SimConfig c;
      c.noise = noise;
      c.seed = seed;
      c.replicates = 20;
      out.push_back(c);
    }
    return out;
  }
  if (name == "full") {
    for (auto noise : {NoiseKind::white, NoiseKind::far1_00, NoiseKind::far1_05, NoiseKind::far1_09}) {
      for (int L : {20, 40}) {
        for (int N : {100, 200}) {
          for (double w1 : {0.1, 0.5}) {
            for (double w2 : {0.0, 0.25}) {
              for (double k : {0.0, 0.02}) {
                SimConfig c;
                c.N = N;
                c.L = L;
                c.omega1 = w1;
                c.omega2 = w2;
                c.k = k;
                c.noise = noise;
                c.seed = seed;
                c.replicates = 100;
                out.push_back(c);
              }
            }
          }
        }
      }
    }
    return out;
  }
  fail(ErrorCode::invalid_argument, "unknown preset \"" + name + "\"");
}

std::vector<SimConfig> configs_from_json(const Json& j) {
  const auto list = [&](const char* key, auto fallback) {
    using T = decltype(fallback);
    std::vector<T> out;
    if (!j.contains(key)) return std::vector<T>{fallback};
    const Json& v = j.at(key);
    if (v.is_array()) {
      for (const auto& x : v) out.push_back(x.get<T>());
    } else {
      out.push_back(v.get<T>());
    }
    if (out.empty()) fail(ErrorCode::schema_violation, std::string("study config: empty \"") + key + "\"");
    return out;
  };
  const SimConfig defaults;
  std::vector<SimConfig> out;
  try {
    const auto Ns = list("N", defaults.N);
    const auto Ls = list("L", defaults.L);
    const auto ks = list("k", defaults.k);
    const auto w1s = list("omega1", defaults.omega1);
    const auto w2s = list("omega2", defaults.omega2);
    const auto noises = list("noise", std::string("white"));
    for (const auto& noise : noises) {
      for (int L : Ls) {
        for (int N : Ns) {
          for (double w1 : w1s) {
            for (double w2 : w2s) {
              for (double k : ks) {
                SimConfig c;
                c.N = N;
                c.L = L;
                c.k = k;
                c.omega1 = w1;
                c.omega2 = w2;
                c.noise = parse_noise(noise);
                c.replicates = j.value("replicates", defaults.replicates);
                c.seed = j.value("seed", defaults.seed);
                c.white_sd = j.value("white_sd", defaults.white_sd);
                c.components = j.value("components", defaults.components);
                out.push_back(c);
              }
            }
          }
        }
      }
    }
  } catch (const Json::exception& e) {
    fail(ErrorCode::schema_violation, std::string("study config: ") + e.what());
  }
  return out;
}

}  // namespace mfssa::sim
