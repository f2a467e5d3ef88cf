#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sysid/control.hpp"
#include "sysid/dynamics.hpp"
#include "sysid/estimator.hpp"

namespace sysid {

// Default prior: M0 = 0, K0 = kappa I, Q0 = q_scale I, n0 = d + n_offset.
struct PriorConfig {
  double kappa = 1e-2;
  double q_scale = 1.0;
  double n_offset = 2.0;
};

struct ModelConfig {
  int d = 3;
  int c = 2;
  int I = 1;
  int J = 0;
  LinkKind link = LinkKind::Identity;
  // Explicit plant matrices win over the generator when all three are present.
  std::optional<std::vector<Matrix>> F;
  std::optional<std::vector<Matrix>> B;
  std::optional<Matrix> V;
  ModelGeneratorConfig generator;

  bool explicit_plant() const { return F && B && V; }
  /// Replica k gets its own generated plant (generator.seed mixed with k);
  /// explicit matrices are shared by every replica.
  ModelSpec instantiate(std::uint64_t replica) const;
};

bool same_model(const ModelConfig& a, const ModelConfig& b);

struct OutputConfig {
  std::string path;
  std::string format = "csv";  // "csv" or "json"
};

struct ExperimentConfig {
  ModelConfig model;
  PriorConfig prior;
  StrategySpec strategy;
  long T = 2000;       // total plant steps including warm-up
  int replicas = 1;
  std::uint64_t seed = 1;
  OutputConfig output;
  bool noise_uses_posterior = false;  // residual against the post-update mean instead
  bool update_posterior = true;       // false: open-loop rollout against the frozen prior

  int warmup() const { return std::max(model.I, model.J) + 1; }
  void validate() const;
};

// One row per post-warm-up step.
struct TraceRecord {
  long t = 0;  // post-warm-up step index, 0-based
  Vector u;
  Vector r;
  Vector y;
  double param_error = 0.0;  // ||A_true - M_t||_F after the step-t update
  double noise_error = 0.0;  // ||e_t - e_hat_t||_2, pre-update residual by default
  double logdet_K = 0.0;
  double logdet_Q = 0.0;
  double joint_entropy = 0.0;
  double gamma = 0.0;
};

using Trace = std::vector<TraceRecord>;

struct ReplicaResult {
  Trace trace;
  std::string error;  // non-empty when the replica aborted
  bool ok() const { return error.empty(); }
};

ReplicaResult run_replica(const ExperimentConfig& cfg, int replica);

/// Runs every replica (parallel across replicas; ACTIVE_SYSID_THREADS caps the
/// worker count). Results are ordered by replica index and independent of the
/// thread count.
std::vector<ReplicaResult> run_experiment(const ExperimentConfig& cfg);

std::string strategy_name(const StrategySpec& s);

/// Per-strategy {median, q25, q75} of param_error and noise_error at the
/// T/4, T/2 and T checkpoints, keyed strategy -> checkpoint -> metric.
nlohmann::json compare_strategies(const std::vector<ExperimentConfig>& cfgs);

void write_trace_csv(std::ostream& os, const Trace& trace);
nlohmann::json trace_to_json(const Trace& trace);

/// Writes one file per replica; a _r<k> suffix is appended to the stem when
/// more than one replica is present.
std::vector<std::string> write_traces(const OutputConfig& out,
                                      const std::vector<ReplicaResult>& results);

}  // namespace sysid
