#pragma once

#include <cstdint>
#include <vector>

#include "sysid/linalg.hpp"

namespace sysid {

enum class LinkKind { Identity, Tanh };

/// Componentwise invertible link. Tanh inversion is only defined on (-1, 1);
/// out-of-range inputs throw std::domain_error rather than being clamped.
struct LinkFn {
  LinkKind kind = LinkKind::Identity;
  Vector forward(const Vector& z) const;
  Vector inverse(const Vector& r) const;
};

/// Ground-truth plant
///   r_{t+1} = g( sum_{i=0..I} F[i] r_{t-i} + sum_{j=0..J} B[j] u_{t+1-j} + e_{t+1} ),
/// e ~ N(0, V_true). F[i] is d x d, B[j] is d x c.
struct ModelSpec {
  std::vector<Matrix> F;
  std::vector<Matrix> B;
  Matrix V_true;
  LinkFn link;
  int d = 0;
  int c = 0;
  int I = 0;  // activity delay order
  int J = 0;  // control delay order

  int regressor_dim() const { return d * (I + 1) + c * (J + 1); }
  void validate() const;
};

/// Delay-line state. r_buffer holds r_{t-I}..r_t (oldest first), u_buffer
/// holds u_{t-J+1}..u_t (empty when J = 0).
struct History {
  std::vector<Vector> r_buffer;
  std::vector<Vector> u_buffer;
  long t = 0;

  static History zero_init(const ModelSpec& spec);
  /// Shift in the newly observed activity and the control that produced it.
  void push(const Vector& r_next, const Vector& u_applied);
};

/// Stacked regressor x_{t+1} = [r_{t-I}; ...; r_t; u_{t-J+1}; ...; u_t; u_next].
/// u_next occupies the trailing c slots.
Vector build_regressor(const History& h, const Vector& u_next);

/// A = [F_I, ..., F_0, B_J, ..., B_0], laid out so that A * build_regressor(...)
/// reproduces the delay sums of the plant.
Matrix stack_parameters(const ModelSpec& spec);

struct StepResult {
  Vector r;  // next activity
  Vector e;  // injected driving noise (for scoring only; estimators never see it)
};

/// Deterministic transition given the noise vector.
StepResult step_with_noise(const ModelSpec& spec, const History& h, const Vector& u_next,
                           const Vector& e_next);

/// Samples e ~ N(0, V_true) and advances one step.
StepResult step(const ModelSpec& spec, const History& h, const Vector& u_next, Rng& rng);

/// y = g^{-1}(r); with the true parameters y = A x + e exactly.
Vector linearize_observation(const ModelSpec& spec, const Vector& r_next);

struct ModelGeneratorConfig {
  std::uint64_t seed = 1;
  double spectral_radius = 0.9;  // companion-form cap for the generated F stack
  double b_scale = 0.5;
  double noise_scale = 0.1;  // sqrt of the V_true eigenvalue scale
};

/// Random stable plant: F blocks rescaled until the companion matrix spectral
/// radius is at or below the configured cap.
ModelSpec generate_model(int d, int c, int I, int J, LinkKind link,
                         const ModelGeneratorConfig& gen);

}  // namespace sysid
