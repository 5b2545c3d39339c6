#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "spdelab/rng.hpp"
#include "spdelab/spectral_model.hpp"

namespace spdelab {

// Uniform observation grid on [0, T] with M coarse steps, each split into
// `oversample` fine simulation steps.
struct SimGrid {
  double horizon = 1.0;
  std::size_t observations = 1;
  std::size_t oversample = 1;

  std::size_t fine_steps() const { return observations * oversample; }
  double coarse_step() const { return horizon / static_cast<double>(observations); }
  double fine_step() const { return horizon / static_cast<double>(fine_steps()); }

  void validate() const;
};

struct Provenance {
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;
};

// Mode trajectories on the fine grid, row-major: row k holds u_k(i * delta),
// i = 0..M*F.
struct PathEnsemble {
  ModelParams params;
  std::vector<double> lambdas;
  SimGrid grid;
  std::vector<double> values;
  std::optional<Provenance> provenance;

  std::size_t modes() const { return lambdas.size(); }
  std::size_t row_length() const { return grid.fine_steps() + 1; }
  std::span<const double> row(std::size_t k) const {
    return {values.data() + k * row_length(), row_length()};
  }
  std::span<double> row(std::size_t k) { return {values.data() + k * row_length(), row_length()}; }
};

// u_k at the coarse nodes t_i = i * T / M, row-major N x (M + 1).
struct ObservationMatrix {
  std::size_t modes = 0;
  std::size_t observations = 0;
  double horizon = 1.0;
  std::vector<double> values;

  std::size_t row_length() const { return observations + 1; }
  double step() const { return horizon / static_cast<double>(observations); }
  std::span<const double> row(std::size_t k) const {
    return {values.data() + k * row_length(), row_length()};
  }
  std::span<double> row(std::size_t k) { return {values.data() + k * row_length(), row_length()}; }
};

// One-step coefficients of the exact OU transition for a fixed mode and step.
struct TransitionCoefficients {
  double decay = 1.0;      // e^{-a h}
  double noise_sd = 0.0;   // sqrt(sigma^2 lambda^{-2 gamma} (1 - e^{-2 a h}) / (2 a))
  double dw_path = 0.0;    // Brownian increment = dw_path * z_path + dw_bridge * z_bridge
  double dw_bridge = 0.0;
};

TransitionCoefficients transition_coefficients(const ModelParams& params, double lambda,
                                               double step);

double exact_transition(double u, double lambda, const ModelParams& params, double step,
                        double z);

// Fills `out` (length fine_steps + 1) with one mode's path, drawing from the
// path channel of `key`.
void simulate_mode(const ModelParams& params, double lambda, const SimGrid& grid,
                   double initial, const RngStreamKey& key, std::span<double> out);

PathEnsemble simulate_ensemble(const ModelParams& params, const EigenSequence& eigs,
                               const SimGrid& grid, std::size_t n_modes,
                               std::uint64_t master_seed, std::uint64_t replication);

ObservationMatrix subsample(const PathEnsemble& ensemble);

// Same fine path, relabelled with `observations` coarse steps. The fine step
// count must be divisible by `observations`.
PathEnsemble regrid(const PathEnsemble& ensemble, std::size_t observations);

// Fine-grid Brownian increments w_k(t_{j+1}) - w_k(t_j) of the driving noise,
// regenerated from the ensemble's stream keys.
std::vector<double> brownian_increments(const PathEnsemble& ensemble, std::size_t mode);

void brownian_increments(const ModelParams& params, double lambda, const SimGrid& grid,
                         const RngStreamKey& key, std::span<double> out);

// Binary dump: "SPDEOBS1", u64 N, u64 M, f64 T, then N*(M+1) f64, all little-endian.
void write_observations(const ObservationMatrix& obs, const std::filesystem::path& path);
ObservationMatrix read_observations(const std::filesystem::path& path);

}  // namespace spdelab
