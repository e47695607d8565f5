#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mfssa/core/dataset_io.hpp"
#include "mfssa/core/mfts.hpp"

namespace mfssa::sim {

// Error model added to the bivariate signal. `none` is a noiseless
// configuration outside the full study grid.
enum class NoiseKind { none, white, far1_00, far1_05, far1_09 };

const char* to_string(NoiseKind kind) noexcept;
NoiseKind parse_noise(const std::string& name);

// Target operator norm ||Psi|| of the FAR(1) kernel (0 for white/none).
double noise_norm_target(NoiseKind kind);
bool is_far1(NoiseKind kind);

struct SimConfig {
  int N = 100;
  int L = 20;
  double k = 0.02;
  double omega1 = 0.1;
  double omega2 = 0.25;
  NoiseKind noise = NoiseKind::white;
  double white_sd = 1.0;
  int replicates = 20;
  std::uint64_t seed = 0;
  int n_sites = 100;
  int df = 15;
  int degree = 3;
  int components = 5;
  int burn_in = 50;

  // True when every parameter lies on the full study grid.
  bool on_study_grid() const;
};

// Integral of (2 - (2s-1)^2 - (2u-1)^2)^2 over the unit square, by
// Gauss-Legendre quadrature.
double kernel_square_integral();

// gamma_0 such that the Hilbert-Schmidt norm of the kernel operator is
// `target`.
double gamma0_for_norm(double target);

// ||Psi||^2 recomputed by quadrature for a given gamma_0.
double far1_norm_squared(double gamma0);

// Equidistant sites on [0, 1] including both ends (n x 1).
Sites unit_sites(int n);

// Noise-free values of variable j (0 or 1) at the given sites, sites x N,
// for t = 1..N.
Matrix signal_values(const SimConfig& cfg, int variable, const Sites& sites);

// Discretized standard Brownian motion on the sites: B(s_0) = 0 and
// independent N(0, delta s) increments (sites x count).
Matrix brownian_paths(const Sites& sites, int count, std::mt19937_64& rng);

// X_t = Psi X_{t-1} + eps_t with Brownian eps, X_0 = eps_0, the kernel applied
// by trapezoidal quadrature on the sites, and `burn_in` leading steps
// dropped. Returns sites x N.
Matrix simulate_far1(double gamma0, int N, const Sites& sites, std::mt19937_64& rng, int burn_in = 50);

Matrix simulate_white(double sd, int N, int n_sites, std::mt19937_64& rng);

// Generator for one replicate: a fresh mt19937_64 seeded from
// seed_seq{seed low/high words, replicate low/high words}, so any replicate
// can be regenerated alone.
std::mt19937_64 replicate_rng(std::uint64_t seed, std::uint64_t replicate);

struct SimulatedData {
  Sites sites;
  std::vector<Matrix> truth_values;     // per variable, sites x N
  std::vector<Matrix> observed_values;  // per variable, sites x N
  MFTS truth;
  MFTS observed;
};

SimulatedData simulate_signal(const SimConfig& cfg, std::uint64_t replicate);

enum class Method { mfssa, hmfssa, fssa_per_variable, mssa_horizontal, mssa_vertical, dfpca };

const char* to_string(Method method) noexcept;
Method parse_method(const std::string& name);

// Root mean square error over variables, times and sites.
double rmse(const std::vector<Matrix>& truth, const std::vector<Matrix>& estimate);

// Reconstruction of the observed series from its leading `cfg.components`
// components, evaluated on the simulation sites. Not available for dfpca.
std::vector<Matrix> reconstruct_with(Method method, const SimConfig& cfg, const SimulatedData& data);

struct StudyRow {
  SimConfig config;
  Method method;
  std::optional<double> mean_rmse;  // empty for methods that are not implemented
};

// Every config x method; replicates run on up to `threads` workers and are
// merged by index, so output does not depend on scheduling.
std::vector<StudyRow> run_study(const std::vector<SimConfig>& configs, const std::vector<Method>& methods,
                                int threads = 1);

std::string study_to_csv(const std::vector<StudyRow>& rows);

// "desk": N=100, L=20, omega=(0.1, 0.25), k=0.02, white and far1_05, 20
// replicates. "full": the full study grid with 100 replicates.
std::vector<SimConfig> preset(const std::string& name, std::uint64_t seed);

std::vector<Method> default_methods();

// Study config document: arrays "N", "L", "k", "omega1", "omega2", "noise"
// expanded as a grid, plus scalars "replicates", "seed", "white_sd".
std::vector<SimConfig> configs_from_json(const Json& j);

}  // namespace mfssa::sim
