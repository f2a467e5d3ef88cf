#include "sysid/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sysid {

Vector LinkFn::forward(const Vector& z) const {
  switch (kind) {
    case LinkKind::Identity:
      return z;
    case LinkKind::Tanh:
      return z.array().tanh();
  }
  throw std::logic_error("LinkFn::forward: unknown link kind");
}

Vector LinkFn::inverse(const Vector& r) const {
  switch (kind) {
    case LinkKind::Identity:
      return r;
    case LinkKind::Tanh: {
      for (long i = 0; i < r.size(); ++i) {
        if (!(std::abs(r[i]) < 1.0)) {
          throw std::domain_error("LinkFn::inverse: tanh inverse undefined at component " +
                                  std::to_string(i) + " = " + std::to_string(r[i]));
        }
      }
      return r.array().atanh();
    }
  }
  throw std::logic_error("LinkFn::inverse: unknown link kind");
}

void ModelSpec::validate() const {
  if (d <= 0 || c <= 0 || I < 0 || J < 0)
    throw std::invalid_argument("ModelSpec: need d > 0, c > 0, I >= 0, J >= 0");
  if (static_cast<int>(F.size()) != I + 1)
    throw std::invalid_argument("ModelSpec: expected " + std::to_string(I + 1) + " F matrices");
  if (static_cast<int>(B.size()) != J + 1)
    throw std::invalid_argument("ModelSpec: expected " + std::to_string(J + 1) + " B matrices");
  for (const auto& f : F) {
    if (f.rows() != d || f.cols() != d || !f.allFinite())
      throw std::invalid_argument("ModelSpec: every F matrix must be finite d x d");
  }
  for (const auto& b : B) {
    if (b.rows() != d || b.cols() != c || !b.allFinite())
      throw std::invalid_argument("ModelSpec: every B matrix must be finite d x c");
  }
  spd_cholesky(V_true, "ModelSpec: V_true");
}

History History::zero_init(const ModelSpec& spec) {
  History h;
  h.r_buffer.assign(spec.I + 1, Vector::Zero(spec.d));
  h.u_buffer.assign(spec.J, Vector::Zero(spec.c));
  h.t = 0;
  return h;
}

void History::push(const Vector& r_next, const Vector& u_applied) {
  if (!r_buffer.empty()) {
    r_buffer.erase(r_buffer.begin());
    r_buffer.push_back(r_next);
  }
  if (!u_buffer.empty()) {
    u_buffer.erase(u_buffer.begin());
    u_buffer.push_back(u_applied);
  }
  ++t;
}

Vector build_regressor(const History& h, const Vector& u_next) {
  if (h.r_buffer.empty()) throw std::invalid_argument("build_regressor: empty history");
  const long d = h.r_buffer.front().size();
  const long c = u_next.size();
  for (const auto& u : h.u_buffer) {
    if (u.size() != c) throw std::invalid_argument("build_regressor: control size mismatch");
  }
  const long m = d * static_cast<long>(h.r_buffer.size()) +
                 c * static_cast<long>(h.u_buffer.size() + 1);
  Vector x(m);
  long at = 0;
  for (const auto& r : h.r_buffer) {
    if (r.size() != d) throw std::invalid_argument("build_regressor: activity size mismatch");
    x.segment(at, d) = r;
    at += d;
  }
  for (const auto& u : h.u_buffer) {
    x.segment(at, c) = u;
    at += c;
  }
  x.segment(at, c) = u_next;
  return x;
}

Matrix stack_parameters(const ModelSpec& spec) {
  spec.validate();
  Matrix a(spec.d, spec.regressor_dim());
  long at = 0;
  // F blocks oldest delay first, matching the regressor layout r_{t-I}..r_t.
  for (int i = spec.I; i >= 0; --i) {
    a.middleCols(at, spec.d) = spec.F[i];
    at += spec.d;
  }
  for (int j = spec.J; j >= 0; --j) {
    a.middleCols(at, spec.c) = spec.B[j];
    at += spec.c;
  }
  return a;
}

StepResult step_with_noise(const ModelSpec& spec, const History& h, const Vector& u_next,
                           const Vector& e_next) {
  if (static_cast<int>(h.r_buffer.size()) != spec.I + 1 ||
      static_cast<int>(h.u_buffer.size()) != spec.J) {
    throw std::invalid_argument("step: history buffers do not match model orders");
  }
  if (u_next.size() != spec.c || e_next.size() != spec.d)
    throw std::invalid_argument("step: control or noise dimension mismatch");
  Vector z = e_next;
  for (int i = 0; i <= spec.I; ++i) {
    // r_buffer index (I - i) holds r_{t-i}.
    z += spec.F[i] * h.r_buffer[spec.I - i];
  }
  z += spec.B[0] * u_next;
  for (int j = 1; j <= spec.J; ++j) {
    // u_buffer back is u_t, so u_{t+1-j} sits j-1 slots from the end.
    z += spec.B[j] * h.u_buffer[spec.J - j];
  }
  return {spec.link.forward(z), e_next};
}

StepResult step(const ModelSpec& spec, const History& h, const Vector& u_next, Rng& rng) {
  const auto llt = spd_cholesky(spec.V_true, "step: V_true");
  const Vector e = Matrix(llt.matrixL()) * sample_standard_normal(spec.d, rng);
  return step_with_noise(spec, h, u_next, e);
}

Vector linearize_observation(const ModelSpec& spec, const Vector& r_next) {
  return spec.link.inverse(r_next);
}

namespace {

double companion_spectral_radius(const std::vector<Matrix>& f_blocks, int d) {
  const int order = static_cast<int>(f_blocks.size());
  const int n = d * order;
  Matrix companion = Matrix::Zero(n, n);
  for (int i = 0; i < order; ++i) companion.block(0, i * d, d, d) = f_blocks[i];
  if (order > 1)
    companion.block(d, 0, n - d, n - d) = Matrix::Identity(n - d, n - d);
  return Eigen::EigenSolver<Matrix>(companion, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

ModelSpec generate_model(int d, int c, int I, int J, LinkKind link,
                         const ModelGeneratorConfig& gen) {
  if (d <= 0 || c <= 0 || I < 0 || J < 0)
    throw std::invalid_argument("generate_model: need d > 0, c > 0, I >= 0, J >= 0");
  if (!(gen.spectral_radius > 0.0) || !(gen.noise_scale > 0.0))
    throw std::invalid_argument("generate_model: scales must be positive");
  Rng rng(gen.seed);
  ModelSpec spec;
  spec.d = d;
  spec.c = c;
  spec.I = I;
  spec.J = J;
  spec.link.kind = link;
  for (int i = 0; i <= I; ++i)
    spec.F.push_back(sample_standard_normal_matrix(d, d, rng) / std::sqrt(double(d * (I + 1))));
  for (int j = 0; j <= J; ++j)
    spec.B.push_back(gen.b_scale * sample_standard_normal_matrix(d, c, rng));
  double radius = companion_spectral_radius(spec.F, d);
  for (int iter = 0; iter < 64 && radius > gen.spectral_radius; ++iter) {
    const double shrink = gen.spectral_radius / radius;
    for (auto& f : spec.F) f *= shrink;
    radius = companion_spectral_radius(spec.F, d);
  }
  spec.V_true = gen.noise_scale * gen.noise_scale * random_spd(d, 0.5, 1.5, rng);
  spec.validate();
  return spec;
}

}  // namespace sysid
