#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "sysid/dynamics.hpp"
#include "sysid/estimator.hpp"
#include "sysid/validation.hpp"

using namespace sysid;

namespace {

Vector vec1(double a) { return Vector::Constant(1, a); }
Matrix mat1(double a) { return Matrix::Constant(1, 1, a); }

struct RandomSequence {
  std::vector<Vector> X, Y;
};

RandomSequence random_sequence(int d, int m, int length, std::uint64_t seed) {
  Rng rng(seed);
  RandomSequence seq;
  for (int i = 0; i < length; ++i) {
    seq.X.push_back(sample_standard_normal(m, rng));
    seq.Y.push_back(sample_standard_normal(d, rng));
  }
  return seq;
}

}  // namespace

TEST_CASE("init") {
  SUBCASE("K0 = I gives P = I") {
    PosteriorState s(Matrix::Zero(2, 3), Matrix::Identity(3, 3), Matrix::Identity(2, 2), 4.0);
    CHECK(max_abs(s.precision_inverse() - Matrix::Identity(3, 3)) < 1e-14);
    CHECK(s.d() == 2);
    CHECK(s.m() == 3);
  }
  SUBCASE("non-PD hyperparameters are rejected") {
    CHECK_THROWS_AS(
        PosteriorState(Matrix::Zero(1, 1), mat1(-1.0), mat1(1.0), 3.0),
        std::invalid_argument);
    CHECK_THROWS_AS(
        PosteriorState(Matrix::Zero(1, 1), mat1(1.0), mat1(1.0), -0.5),
        std::invalid_argument);
  }
  SUBCASE("default prior validates") {
    const int d = 3, m = 8;
    PosteriorState s(Matrix::Zero(d, m), 1e-2 * Matrix::Identity(m, m),
                     Matrix::Identity(d, d), d + 2.0);
    CHECK(s.dof() == d + 2.0);
  }
}

TEST_CASE("update: hand-evaluated scalar step") {
  PosteriorState s(Matrix::Zero(1, 1), mat1(1.0), mat1(1.0), 1.0);
  const auto diag = s.update(vec1(1.0), vec1(2.0));
  CHECK(s.mean()(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.precision()(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(diag.gamma == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.scatter()(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.dof() == 2.0);
  CHECK(s.update_count() == 1);
}

TEST_CASE("update: zero regressor leaves the A-belief unchanged") {
  Rng rng(31);
  PosteriorState s(sample_standard_normal_matrix(2, 3, rng), random_spd(3, 0.5, 2.0, rng),
                   random_spd(2, 0.5, 2.0, rng), 5.0);
  const Matrix m_before = s.mean();
  const Matrix k_before = s.precision();
  const Matrix p_before = s.precision_inverse();
  const Matrix q_before = s.scatter();
  const Vector y = sample_standard_normal(2, rng);
  const auto diag = s.update(Vector::Zero(3), y);
  CHECK(diag.gamma == 1.0);
  CHECK(max_abs(s.mean() - m_before) == 0.0);
  CHECK(max_abs(s.precision() - k_before) == 0.0);
  CHECK(max_abs(s.precision_inverse() - p_before) == 0.0);
  CHECK(max_abs(s.scatter() - (q_before + y * y.transpose())) < 1e-14);
}

TEST_CASE("update: rank-one inverse recursion hand case") {
  PosteriorState s(Matrix::Zero(1, 2), Matrix::Identity(2, 2), mat1(1.0), 2.0);
  Vector x(2);
  x << 1.0, 0.0;
  s.update(x, vec1(0.3));
  Matrix expected(2, 2);
  expected << 0.5, 0.0, 0.0, 1.0;
  CHECK(max_abs(s.precision_inverse() - expected) < 1e-14);
}

TEST_CASE("batch posterior against one-shot normal equations") {
  const int d = 2, m = 3, length = 20;
  Rng rng(40);
  const Matrix m0 = sample_standard_normal_matrix(d, m, rng);
  const Matrix k0 = random_spd(m, 0.5, 2.0, rng);
  const Matrix q0 = random_spd(d, 0.5, 2.0, rng);
  const double n0 = d + 2.0;
  const auto seq = random_sequence(d, m, length, 41);

  SUBCASE("empty sequence returns the prior") {
    const auto s = batch_posterior(m0, k0, q0, n0, {}, {});
    CHECK(max_abs(s.mean() - m0) == 0.0);
    CHECK(s.dof() == n0);
  }

  SUBCASE("K is exactly additive and M, Q match the direct solve") {
    const auto s = batch_posterior(m0, k0, q0, n0, seq.X, seq.Y);
    const auto oracle = oracles::batch_normal_equations(m0, k0, q0, n0, seq.X, seq.Y);
    CHECK(max_abs(s.precision() - oracle.K) / oracle.K.norm() < 1e-12);
    CHECK(max_abs(s.mean() - oracle.M) / oracle.M.norm() < 1e-8);
    CHECK(max_abs(s.scatter() - oracle.Q) / oracle.Q.norm() < 1e-8);
    CHECK(s.dof() == oracle.n);
  }

  SUBCASE("permutation invariance of the fold") {
    const auto s = batch_posterior(m0, k0, q0, n0, seq.X, seq.Y);
    std::vector<std::size_t> order(length);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(99);
    for (int round = 0; round < 5; ++round) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      std::vector<Vector> xs, ys;
      for (auto idx : order) {
        xs.push_back(seq.X[idx]);
        ys.push_back(seq.Y[idx]);
      }
      const auto permuted = batch_posterior(m0, k0, q0, n0, xs, ys);
      CHECK(max_abs(permuted.mean() - s.mean()) < 1e-8);
      CHECK(max_abs(permuted.precision() - s.precision()) < 1e-8);
      CHECK(max_abs(permuted.scatter() - s.scatter()) < 1e-8);
    }
  }
}

TEST_CASE("gamma: two formulas agree to 1e-10 and stay in (0, 1]") {
  Rng rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 5);
    PosteriorState s(Matrix::Zero(1, m), random_spd(m, 0.3, 3.0, rng), mat1(1.0), 3.0);
    const Vector x = 2.0 * sample_standard_normal(m, rng);
    const double via_p = gamma_via_inverse(s, x);
    const double via_solve = gamma_via_solve(s.precision(), x);
    CHECK(std::abs(via_p - via_solve) < 1e-10);
    CHECK(via_p > 0.0);
    CHECK(via_p <= 1.0);
  }
}

TEST_CASE("P drift stays below 1e-6 over 1e4 updates with refresh") {
  const int d = 2, m = 6;
  PosteriorState s(Matrix::Zero(d, m), 1e-2 * Matrix::Identity(m, m),
                   Matrix::Identity(d, d), d + 2.0);
  Rng rng(60);
  double worst_drift = 0.0;
  for (int t = 0; t < 10000; ++t) {
    s.update(sample_standard_normal(m, rng), sample_standard_normal(d, rng));
    worst_drift = std::max(worst_drift, s.inverse_drift());
  }
  CHECK(worst_drift < 1e-6);
}

TEST_CASE("posterior entropy bookkeeping") {
  Rng rng(70);
  const int d = 2, m = 4;
  PosteriorState s(Matrix::Zero(d, m), random_spd(m, 0.5, 2.0, rng),
                   random_spd(d, 0.5, 2.0, rng), d + 2.0);

  SUBCASE("delegates to the joint closed form") {
    CHECK(posterior_entropy(s) ==
          doctest::Approx(entropy_joint_mniw(s.precision(), s.scatter(), d, m, s.dof()))
              .epsilon(1e-14));
  }

  SUBCASE("ln|K| grows by ln(1 + x'Px) per update") {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector x = sample_standard_normal(m, rng);
      const Vector y = sample_standard_normal(d, rng);
      const double before = logdet_spd(s.precision(), "t");
      const double expected_gain = std::log(1.0 + x.dot(s.precision_inverse() * x));
      s.update(x, y);
      CHECK(logdet_spd(s.precision(), "t") - before ==
            doctest::Approx(expected_gain).epsilon(1e-10));
    }
  }

  SUBCASE("two updates commute in their effect on ln|K|") {
    const Vector x1 = sample_standard_normal(m, rng);
    const Vector x2 = sample_standard_normal(m, rng);
    const Vector y = Vector::Zero(d);
    PosteriorState a = s, b = s;
    a.update(x1, y);
    a.update(x2, y);
    b.update(x2, y);
    b.update(x1, y);
    CHECK(logdet_spd(a.precision(), "t") ==
          doctest::Approx(logdet_spd(b.precision(), "t")).epsilon(1e-8));
  }
}

TEST_CASE("conjugate factorization identity (library check, reduced tuples)") {
  const auto check = check_conjugate_factorization(20, 2, 3, 4321);
  CHECK(check.pass);
  CHECK(check.max_error < 1e-8);
}

TEST_CASE("predictive density") {
  SUBCASE("1-D quadrature mass and mode at Mx") {
    Rng rng(80);
    const int m = 2;
    PosteriorState s(sample_standard_normal_matrix(1, m, rng), random_spd(m, 0.5, 2.0, rng),
                     mat1(1.5), 3.0);
    const Vector x = sample_standard_normal(m, rng);
    const double mass = oracles::integrate(
        [&](double y) { return std::exp(predictive_logpdf(s, x, vec1(y))); }, -80.0, 80.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
    const double mode_value = (s.mean() * x)(0);
    const double at_mode = predictive_logpdf(s, x, vec1(mode_value));
    for (double delta : {-1.0, -0.3, 0.4, 1.2}) {
      CHECK(predictive_logpdf(s, x, vec1(mode_value + delta)) < at_mode);
    }
  }

  SUBCASE("matches the Monte-Carlo marginal likelihood in d=1, m=1") {
    PosteriorState s(mat1(0.4), mat1(2.0), mat1(1.3), 4.0);
    const Vector x = vec1(0.8);
    const Vector y = vec1(1.1);
    Rng rng(81);
    const int draws = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const Matrix v = sample_inverse_wishart({s.scatter(), s.dof()}, rng);
      const Matrix a = sample_matrix_normal({s.mean(), v, s.precision()}, rng);
      const double value = std::exp(mvn_logpdf(y, a * x, v));
      sum += value;
      sum_sq += value * value;
    }
    const double mc = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mc * mc) / draws);
    const double exact = std::exp(predictive_logpdf(s, x, y));
    CHECK(std::abs(mc - exact) < 4.5 * se);
  }
}

TEST_CASE("noise estimation") {
  SUBCASE("zero mean returns the observation") {
    PosteriorState s(Matrix::Zero(2, 3), Matrix::Identity(3, 3), Matrix::Identity(2, 2), 4.0);
    Vector y(2);
    y << 0.3, -0.4;
    CHECK(max_abs(estimate_noise(s, Vector::Zero(3), y) - y) == 0.0);
  }
  SUBCASE("y = Mx gives a zero residual") {
    Rng rng(90);
    PosteriorState s(sample_standard_normal_matrix(2, 3, rng), Matrix::Identity(3, 3),
                     Matrix::Identity(2, 2), 4.0);
    const Vector x = sample_standard_normal(3, rng);
    CHECK(max_abs(estimate_noise(s, x, s.mean() * x)) < 1e-15);
  }
  SUBCASE("with the true parameters the residual is the injected noise") {
    const ModelSpec spec =
        generate_model(2, 1, 1, 0, LinkKind::Identity, {.seed = 13, .noise_scale = 0.3});
    const Matrix a = stack_parameters(spec);
    PosteriorState s(a, Matrix::Identity(a.cols(), a.cols()), Matrix::Identity(2, 2), 4.0);
    History h = History::zero_init(spec);
    Rng rng(91);
    for (int t = 0; t < 100; ++t) {
      const Vector u = sample_standard_normal(1, rng);
      const Vector x = build_regressor(h, u);
      const auto out = step(spec, h, u, rng);
      const Vector y = linearize_observation(spec, out.r);
      CHECK(max_abs(estimate_noise(s, x, y) - out.e) < 1e-12);
      h.push(out.r, u);
    }
  }
}

TEST_CASE("noise covariance estimate") {
  SUBCASE("closed values") {
    PosteriorState s1(Matrix::Zero(1, 1), mat1(1.0), mat1(2.0), 5.0);
    CHECK(noise_covariance_estimate(s1)(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    PosteriorState s2(Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                      2.0 + 2.0);
    CHECK(max_abs(noise_covariance_estimate(s2) - Matrix::Identity(2, 2)) < 1e-14);
  }
  SUBCASE("n too small") {
    PosteriorState s(Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2), 2.5);
    CHECK_THROWS_AS(noise_covariance_estimate(s), std::invalid_argument);
  }
  SUBCASE("5000-step consistency within 10% Frobenius") {
    const ModelSpec spec =
        generate_model(2, 1, 0, 0, LinkKind::Identity, {.seed = 3, .noise_scale = 0.2});
    const int m = spec.regressor_dim();
    PosteriorState s(Matrix::Zero(2, m), 1e-2 * Matrix::Identity(m, m),
                     Matrix::Identity(2, 2), 4.0);
    History h = History::zero_init(spec);
    Rng rng(92);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int t = 0; t < 5000; ++t) {
      Vector u(1);
      u << unif(rng);
      const Vector x = build_regressor(h, u);
      const auto out = step(spec, h, u, rng);
      s.update(x, linearize_observation(spec, out.r));
      h.push(out.r, u);
    }
    const Matrix estimate = noise_covariance_estimate(s);
    CHECK((estimate - spec.V_true).norm() / spec.V_true.norm() < 0.10);
  }
}

TEST_CASE("posterior concentration under random excitation") {
  const ModelSpec spec =
      generate_model(3, 2, 1, 0, LinkKind::Identity, {.seed = 8, .noise_scale = 0.1});
  const Matrix a = stack_parameters(spec);
  const int m = spec.regressor_dim();
  PosteriorState s(Matrix::Zero(3, m), 1e-2 * Matrix::Identity(m, m),
                   Matrix::Identity(3, 3), 5.0);
  History h = History::zero_init(spec);
  Rng rng(93);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double initial_error = (a - s.mean()).norm();
  std::vector<double> errors;
  for (int t = 0; t < 2000; ++t) {
    Vector u(2);
    u << unif(rng), unif(rng);
    const Vector x = build_regressor(h, u);
    const auto out = step(spec, h, u, rng);
    s.update(x, linearize_observation(spec, out.r));
    h.push(out.r, u);
    errors.push_back((a - s.mean()).norm());
  }
  CHECK(errors.back() < initial_error / 100.0);
  // Decreasing trend: late-window mean far below mid-window mean.
  const double mid = std::accumulate(errors.begin() + 500, errors.begin() + 600, 0.0) / 100.0;
  const double late = std::accumulate(errors.end() - 100, errors.end(), 0.0) / 100.0;
  CHECK(late < mid);
}

TEST_CASE("update failures leave the state unchanged") {
  PosteriorState s(Matrix::Zero(1, 2), Matrix::Identity(2, 2), mat1(1.0), 2.0);
  const Matrix m_before = s.mean();
  Vector bad(2);
  bad << std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(s.update(bad, vec1(0.0)), std::invalid_argument);
  CHECK(max_abs(s.mean() - m_before) == 0.0);
  CHECK(s.update_count() == 0);
}

TEST_CASE("snapshot JSON round trip is exact") {
  Rng rng(94);
  PosteriorState s(sample_standard_normal_matrix(2, 4, rng), random_spd(4, 0.5, 2.0, rng),
                   random_spd(2, 0.5, 2.0, rng), 5.5);
  for (int t = 0; t < 7; ++t) {
    s.update(sample_standard_normal(4, rng), sample_standard_normal(2, rng));
  }
  const auto doc = nlohmann::json::parse(s.to_json().dump());
  const auto restored = PosteriorState::from_json(doc);
  CHECK(max_abs(restored.mean() - s.mean()) == 0.0);
  CHECK(max_abs(restored.precision() - s.precision()) == 0.0);
  CHECK(max_abs(restored.precision_inverse() - s.precision_inverse()) == 0.0);
  CHECK(max_abs(restored.scatter() - s.scatter()) == 0.0);
  CHECK(restored.dof() == s.dof());
  CHECK(restored.update_count() == s.update_count());
}
