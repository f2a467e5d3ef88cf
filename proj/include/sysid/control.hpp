#pragma once

#include <cstdint>

#include "sysid/dynamics.hpp"
#include "sysid/estimator.hpp"
#include "sysid/linalg.hpp"

namespace sysid {

enum class DomainKind { Box, Ball };

// Only deterministic rule currently defined: among optimal candidates return
// the lexicographically smallest vector.
enum class TieBreak { LexSmallest };

struct ControlDomain {
  DomainKind kind = DomainKind::Box;
  double bound = 1.0;  // box: ||u||_inf <= bound; ball: ||u||_2 <= bound
  TieBreak tie_break = TieBreak::LexSmallest;

  void validate() const;
  bool contains(const Vector& u, double tol = 1e-9) const;
};

enum class StrategyKind { Infomax, NoiseOptimal, TauInfomax, TauZero, Random, Zero };

struct StrategySpec {
  StrategyKind kind = StrategyKind::Infomax;
  ControlDomain domain;
  long tau = 0;               // switch step for the tau strategies
  std::uint64_t seed = 0;     // stream id for the random strategy
  bool alt_noise_formula = false;  // block-inverse feedback form instead of the exact minimizer

  void validate() const;
};

/// x' K^{-1} x with the cached inverse.
double quadratic_form(const PosteriorState& s, const Vector& x);

/// The regressor quadratic restricted to the next-control slots:
/// f(u) = c0 + 2 q.u + u' Puu u, where x(u) = [history; u].
struct ControlQuadratic {
  double c0 = 0.0;
  Vector q;
  Matrix Puu;
  double value(const Vector& u) const { return c0 + 2.0 * q.dot(u) + u.dot(Puu * u); }
};

ControlQuadratic control_quadratic(const PosteriorState& s, const History& h);

/// Global maximizer of a convex quadratic over the domain. Box maxima sit at
/// vertices: full enumeration for c <= 16, multi-start coordinate ascent
/// (certified against all 2c axis neighbors) beyond. Ball maxima sit on the
/// sphere and are found through the eigenbasis secular equation.
Vector maximize_quadratic(const ControlQuadratic& f, const ControlDomain& dom);

/// Exact minimizer. Interior solution -Puu^{-1} q when feasible; otherwise
/// projected coordinate descent (box) or the dual boundary solve (ball).
Vector minimize_quadratic(const ControlQuadratic& f, const ControlDomain& dom);

/// argmax_{u in dom} x(u)' K^{-1} x(u)
Vector infomax_control(const PosteriorState& s, const History& h, const ControlDomain& dom);

/// argmin_{u in dom} x(u)' K^{-1} x(u)
Vector noise_optimal_control(const PosteriorState& s, const History& h,
                             const ControlDomain& dom);

/// Alternate block form u = (K_uu)^{-1} K_uz r_t. Only defined for the I = 0,
/// J = 0 layout; it does not minimize the regressor quadratic in general and
/// is kept for comparison against the exact minimizer.
Vector noise_optimal_control_alt(const PosteriorState& s, const History& h);

/// Per-step dispatch. `t` is the post-warm-up step counter used by the tau
/// strategies; `rng` feeds only the random strategy.
Vector select_control(const StrategySpec& strat, const PosteriorState& s, const History& h,
                      long t, Rng& rng);

Vector sample_uniform_control(const ControlDomain& dom, int c, Rng& rng);

}  // namespace sysid
