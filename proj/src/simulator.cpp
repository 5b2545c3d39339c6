#include "spdelab/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spdelab/error.hpp"

namespace spdelab {
namespace {

constexpr char kMagic[8] = {'S', 'P', 'D', 'E', 'O', 'B', 'S', '1'};
constexpr std::size_t kHeaderBytes = 32;

static_assert(std::endian::native == std::endian::little,
              "observation dumps assume a little-endian host");

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    fail(ErrorCode::Io, "truncated observation dump: " + path.string());
  }
  return value;
}

}  // namespace

void SimGrid::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    fail(ErrorCode::InvalidArgument, "grid.T: must be a finite value > 0");
  }
  if (observations < 1) fail(ErrorCode::InvalidArgument, "grid.M: must be >= 1");
  if (oversample < 1) fail(ErrorCode::InvalidArgument, "grid.oversample: must be >= 1");
}

TransitionCoefficients transition_coefficients(const ModelParams& params, double lambda,
                                               double step) {
  const double rate = decay_rate(params, lambda);
  const double noise_scale = params.sigma * std::pow(lambda, -params.gamma);
  // Var of int_0^h e^{-a(h-s)} dw(s) and its covariance with w(h).
  const double var_x = one_minus_exp_neg(2.0 * rate * step) / (2.0 * rate);
  const double cov_xw = one_minus_exp_neg(rate * step) / rate;

  TransitionCoefficients c;
  c.decay = std::exp(-rate * step);
  c.noise_sd = noise_scale * std::sqrt(var_x);
  c.dw_path = cov_xw / std::sqrt(var_x);
  c.dw_bridge = std::sqrt(std::max(0.0, step - c.dw_path * c.dw_path));
  return c;
}

double exact_transition(double u, double lambda, const ModelParams& params, double step,
                        double z) {
  if (!(step > 0.0)) fail(ErrorCode::InvalidArgument, "exact_transition: step must be > 0");
  const auto c = transition_coefficients(params, lambda, step);
  return c.decay * u + c.noise_sd * z;
}

void simulate_mode(const ModelParams& params, double lambda, const SimGrid& grid,
                   double initial, const RngStreamKey& key, std::span<double> out) {
  const std::size_t steps = grid.fine_steps();
  if (out.size() != steps + 1) {
    fail(ErrorCode::InvalidArgument, "simulate_mode: output span has the wrong length");
  }
  const auto c = transition_coefficients(params, lambda, grid.fine_step());
  GaussianStream noise(key, StreamChannel::Path);
  double u = initial;
  out[0] = u;
  if (c.noise_sd == 0.0) {
    for (std::size_t i = 1; i <= steps; ++i) out[i] = u = c.decay * u;
    return;
  }
  for (std::size_t i = 1; i <= steps; ++i) {
    u = c.decay * u + c.noise_sd * noise.next();
    out[i] = u;
  }
}

PathEnsemble simulate_ensemble(const ModelParams& params, const EigenSequence& eigs,
                               const SimGrid& grid, std::size_t n_modes,
                               std::uint64_t master_seed, std::uint64_t replication) {
  grid.validate();
  if (n_modes > eigs.size()) {
    std::ostringstream msg;
    msg << "simulate_ensemble: N = " << n_modes << " exceeds the eigensequence length "
        << eigs.size();
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  PathEnsemble ens;
  ens.params = params;
  ens.lambdas.assign(eigs.lambdas.begin(), eigs.lambdas.begin() + static_cast<std::ptrdiff_t>(n_modes));
  ens.grid = grid;
  ens.values.resize(n_modes * ens.row_length());
  ens.provenance = Provenance{master_seed, replication};
  for (std::size_t k = 0; k < n_modes; ++k) {
    simulate_mode(params, ens.lambdas[k], grid, params.initial_value(k),
                  RngStreamKey{master_seed, replication, k}, ens.row(k));
  }
  return ens;
}

ObservationMatrix subsample(const PathEnsemble& ensemble) {
  ObservationMatrix obs;
  obs.modes = ensemble.modes();
  obs.observations = ensemble.grid.observations;
  obs.horizon = ensemble.grid.horizon;
  obs.values.resize(obs.modes * obs.row_length());
  const std::size_t stride = ensemble.grid.oversample;
  for (std::size_t k = 0; k < obs.modes; ++k) {
    const auto src = ensemble.row(k);
    auto dst = obs.row(k);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i * stride];
  }
  return obs;
}

PathEnsemble regrid(const PathEnsemble& ensemble, std::size_t observations) {
  const std::size_t fine = ensemble.grid.fine_steps();
  if (observations == 0 || fine % observations != 0) {
    std::ostringstream msg;
    msg << "regrid: M = " << observations << " does not divide the fine step count " << fine;
    fail(ErrorCode::InvalidArgument, msg.str());
  }
  PathEnsemble out = ensemble;
  out.grid.observations = observations;
  out.grid.oversample = fine / observations;
  return out;
}

void brownian_increments(const ModelParams& params, double lambda, const SimGrid& grid,
                         const RngStreamKey& key, std::span<double> out) {
  if (out.size() != grid.fine_steps()) {
    fail(ErrorCode::InvalidArgument, "brownian_increments: output span has the wrong length");
  }
  const auto c = transition_coefficients(params, lambda, grid.fine_step());
  GaussianStream path(key, StreamChannel::Path);
  GaussianStream bridge(key, StreamChannel::Bridge);
  for (double& dw : out) {
    const double z_path = path.next();
    dw = c.dw_path * z_path + c.dw_bridge * bridge.next();
  }
}

std::vector<double> brownian_increments(const PathEnsemble& ensemble, std::size_t mode) {
  if (!ensemble.provenance) {
    fail(ErrorCode::MissingProvenance,
         "Brownian increments unavailable: ensemble carries no stream provenance");
  }
  if (mode >= ensemble.modes()) fail(ErrorCode::InvalidArgument, "brownian_increments: bad mode");
  std::vector<double> out(ensemble.grid.fine_steps());
  brownian_increments(ensemble.params, ensemble.lambdas[mode], ensemble.grid,
                      RngStreamKey{ensemble.provenance->master_seed,
                                   ensemble.provenance->replication, mode},
                      out);
  return out;
}

void write_observations(const ObservationMatrix& obs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(out, obs.modes);
  put<std::uint64_t>(out, obs.observations);
  put<double>(out, obs.horizon);
  out.write(reinterpret_cast<const char*>(obs.values.data()),
            static_cast<std::streamsize>(obs.values.size() * sizeof(double)));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

ObservationMatrix read_observations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open observation dump: " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    fail(ErrorCode::Parse, "not an observation dump (bad magic): " + path.string());
  }
  ObservationMatrix obs;
  obs.modes = get<std::uint64_t>(in, path);
  obs.observations = get<std::uint64_t>(in, path);
  obs.horizon = get<double>(in, path);
  if (obs.modes == 0 || obs.observations == 0 || !(obs.horizon > 0.0)) {
    fail(ErrorCode::Parse, "invalid observation dump header: " + path.string());
  }
  const auto expected = obs.modes * obs.row_length();
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (expected / obs.row_length() != obs.modes || ec ||
      file_size != kHeaderBytes + expected * sizeof(double)) {
    fail(ErrorCode::Parse, "observation dump size does not match its header: " + path.string());
  }
  obs.values.resize(expected);
  if (!in.read(reinterpret_cast<char*>(obs.values.data()),
               static_cast<std::streamsize>(expected * sizeof(double)))) {
    fail(ErrorCode::Io, "truncated observation dump: " + path.string());
  }
  return obs;
}

}  // namespace spdelab
