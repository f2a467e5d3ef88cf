#include "sysid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "sysid/json_io.hpp"

namespace sysid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t stream) {
  return splitmix64(splitmix64(a) ^ splitmix64(b + 0x632be59bd9b4e019ULL) ^ stream);
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

void append_double(std::string& row, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  row += buf;
}

}  // namespace

ModelSpec ModelConfig::instantiate(std::uint64_t replica) const {
  if (explicit_plant()) {
    ModelSpec spec;
    spec.d = d;
    spec.c = c;
    spec.I = I;
    spec.J = J;
    spec.link.kind = link;
    spec.F = *F;
    spec.B = *B;
    spec.V_true = *V;
    spec.validate();
    return spec;
  }
  ModelGeneratorConfig gen = generator;
  gen.seed = mix_seed(generator.seed, replica, 0x706c616e74ULL);
  return generate_model(d, c, I, J, link, gen);
}

namespace {
bool mat_equal(const Matrix& x, const Matrix& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
}
}  // namespace

bool same_model(const ModelConfig& a, const ModelConfig& b) {
  if (a.d != b.d || a.c != b.c || a.I != b.I || a.J != b.J || a.link != b.link) return false;
  if (a.explicit_plant() != b.explicit_plant()) return false;
  if (a.explicit_plant()) {
    if (a.F->size() != b.F->size() || a.B->size() != b.B->size()) return false;
    for (std::size_t i = 0; i < a.F->size(); ++i)
      if (!mat_equal((*a.F)[i], (*b.F)[i])) return false;
    for (std::size_t j = 0; j < a.B->size(); ++j)
      if (!mat_equal((*a.B)[j], (*b.B)[j])) return false;
    return mat_equal(*a.V, *b.V);
  }
  return a.generator.seed == b.generator.seed &&
         a.generator.spectral_radius == b.generator.spectral_radius &&
         a.generator.b_scale == b.generator.b_scale &&
         a.generator.noise_scale == b.generator.noise_scale;
}

void ExperimentConfig::validate() const {
  if (model.d <= 0 || model.c <= 0 || model.I < 0 || model.J < 0)
    throw std::invalid_argument("config.model: need d > 0, c > 0, I >= 0, J >= 0");
  if (T < warmup())
    throw std::invalid_argument("config.T: horizon must cover the warm-up (" +
                                std::to_string(warmup()) + " steps)");
  if (replicas < 1) throw std::invalid_argument("config.replicas: must be >= 1");
  if (!(prior.kappa > 0.0) || !(prior.q_scale > 0.0))
    throw std::invalid_argument("config.prior: kappa and q_scale must be positive");
  if (!(prior.n_offset > 1.0))
    throw std::invalid_argument("config.prior: n_offset must exceed 1 so that n0 > d - 1");
  strategy.validate();
  if (output.format != "csv" && output.format != "json")
    throw std::invalid_argument("config.output.format: expected \"csv\" or \"json\"");
}

ReplicaResult run_replica(const ExperimentConfig& cfg, int replica) {
  cfg.validate();
  ReplicaResult result;
  try {
    const ModelSpec model = cfg.model.instantiate(replica);
    const Matrix a_true = stack_parameters(model);
    const int d = model.d, m = model.regressor_dim();

    PosteriorState state(Matrix::Zero(d, m), cfg.prior.kappa * Matrix::Identity(m, m),
                         cfg.prior.q_scale * Matrix::Identity(d, d), d + cfg.prior.n_offset);
    History h = History::zero_init(model);
    Rng plant_rng(mix_seed(cfg.seed, replica, 1));
    Rng control_rng(mix_seed(cfg.seed ^ cfg.strategy.seed, replica, 2));

    const int warmup = cfg.warmup();
    result.trace.reserve(static_cast<std::size_t>(std::max<long>(cfg.T - warmup, 0)));

    for (long step_idx = 0; step_idx < cfg.T; ++step_idx) {
      const long t = step_idx - warmup;  // post-warm-up counter
      const Vector u = t < 0 ? Vector::Zero(model.c)
                             : select_control(cfg.strategy, state, h, t, control_rng);
      const Vector x = build_regressor(h, u);
      const StepResult sr = step(model, h, u, plant_rng);
      const Vector y = linearize_observation(model, sr.r);

      Vector noise_hat = estimate_noise(state, x, y);
      double gamma;
      if (cfg.update_posterior) {
        gamma = state.update(x, y).gamma;
      } else {
        gamma = gamma_via_inverse(state, x);
      }
      if (cfg.noise_uses_posterior) noise_hat = estimate_noise(state, x, y);
      h.push(sr.r, u);

      if (t >= 0) {
        TraceRecord rec;
        rec.t = t;
        rec.u = u;
        rec.r = sr.r;
        rec.y = y;
        rec.param_error = (a_true - state.mean()).norm();
        rec.noise_error = (sr.e - noise_hat).norm();
        rec.logdet_K = logdet_spd(state.precision(), "trace: K");
        rec.logdet_Q = logdet_spd(state.scatter(), "trace: Q");
        rec.joint_entropy = posterior_entropy(state);
        rec.gamma = gamma;
        result.trace.push_back(std::move(rec));
      }
    }
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  return result;
}

std::vector<ReplicaResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ReplicaResult> results(cfg.replicas);
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("ACTIVE_SYSID_THREADS")) {
    const long parsed = std::strtol(cap, nullptr, 10);
    if (parsed > 0) workers = std::min<unsigned>(workers, static_cast<unsigned>(parsed));
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.replicas));

  if (workers <= 1) {
    for (int k = 0; k < cfg.replicas; ++k) results[k] = run_replica(cfg, k);
    return results;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next.fetch_add(1); k < cfg.replicas; k = next.fetch_add(1)) {
        results[k] = run_replica(cfg, k);
      }
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

std::string strategy_name(const StrategySpec& s) {
  switch (s.kind) {
    case StrategyKind::Infomax:
      return "infomax";
    case StrategyKind::NoiseOptimal:
      return s.alt_noise_formula ? "noise_optimal_alt" : "noise_optimal";
    case StrategyKind::TauInfomax:
      return "tau_infomax(" + std::to_string(s.tau) + ")";
    case StrategyKind::TauZero:
      return "tau_zero(" + std::to_string(s.tau) + ")";
    case StrategyKind::Random:
      return "random";
    case StrategyKind::Zero:
      return "zero";
  }
  return "unknown";
}

nlohmann::json compare_strategies(const std::vector<ExperimentConfig>& cfgs) {
  if (cfgs.empty()) throw std::invalid_argument("compare_strategies: no configurations");
  for (const auto& cfg : cfgs) {
    if (!same_model(cfg.model, cfgs.front().model) || cfg.seed != cfgs.front().seed ||
        cfg.T != cfgs.front().T || cfg.replicas != cfgs.front().replicas) {
      throw std::invalid_argument(
          "compare_strategies: configurations must share model, seed, T and replicas");
    }
  }
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& cfg : cfgs) {
    const auto results = run_experiment(cfg);
    for (int k = 0; k < cfg.replicas; ++k) {
      if (!results[k].ok()) {
        throw std::runtime_error("compare_strategies: replica " + std::to_string(k) +
                                 " aborted: " + results[k].error);
      }
    }
    const long n = static_cast<long>(results.front().trace.size());
    if (n == 0) throw std::invalid_argument("compare_strategies: empty traces");
    const std::vector<std::pair<std::string, long>> checkpoints = {
        {"T/4", std::max<long>(n / 4, 1) - 1},
        {"T/2", std::max<long>(n / 2, 1) - 1},
        {"T", n - 1}};
    nlohmann::json per_checkpoint = nlohmann::json::object();
    for (const auto& [label, idx] : checkpoints) {
      std::vector<double> param, noise;
      param.reserve(results.size());
      noise.reserve(results.size());
      for (const auto& rep : results) {
        param.push_back(rep.trace.at(idx).param_error);
        noise.push_back(rep.trace.at(idx).noise_error);
      }
      per_checkpoint[label] = {
          {"param_error",
           {{"median", quantile(param, 0.5)},
            {"q25", quantile(param, 0.25)},
            {"q75", quantile(param, 0.75)}}},
          {"noise_error",
           {{"median", quantile(noise, 0.5)},
            {"q25", quantile(noise, 0.25)},
            {"q75", quantile(noise, 0.75)}}}};
    }
    summary[strategy_name(cfg.strategy)] = std::move(per_checkpoint);
  }
  return summary;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  const long c = trace.empty() ? 0 : trace.front().u.size();
  const long d = trace.empty() ? 0 : trace.front().r.size();
  std::string header = "t";
  for (long i = 0; i < c; ++i) header += ",u_" + std::to_string(i);
  for (long i = 0; i < d; ++i) header += ",r_" + std::to_string(i);
  for (long i = 0; i < d; ++i) header += ",y_" + std::to_string(i);
  header += ",param_error,noise_error,logdetK,logdetQ,joint_entropy,gamma";
  os << header << '\n';
  std::string row;
  for (const auto& rec : trace) {
    row.clear();
    row += std::to_string(rec.t);
    const auto push = [&row](double v) {
      row += ',';
      append_double(row, v);
    };
    for (long i = 0; i < rec.u.size(); ++i) push(rec.u[i]);
    for (long i = 0; i < rec.r.size(); ++i) push(rec.r[i]);
    for (long i = 0; i < rec.y.size(); ++i) push(rec.y[i]);
    push(rec.param_error);
    push(rec.noise_error);
    push(rec.logdet_K);
    push(rec.logdet_Q);
    push(rec.joint_entropy);
    push(rec.gamma);
    os << row << '\n';
  }
}

nlohmann::json trace_to_json(const Trace& trace) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : trace) {
    arr.push_back({{"t", rec.t},
                   {"u", vector_to_json(rec.u)},
                   {"r", vector_to_json(rec.r)},
                   {"y", vector_to_json(rec.y)},
                   {"param_error", rec.param_error},
                   {"noise_error", rec.noise_error},
                   {"logdetK", rec.logdet_K},
                   {"logdetQ", rec.logdet_Q},
                   {"joint_entropy", rec.joint_entropy},
                   {"gamma", rec.gamma}});
  }
  return arr;
}

std::vector<std::string> write_traces(const OutputConfig& out,
                                      const std::vector<ReplicaResult>& results) {
  if (out.path.empty()) throw std::invalid_argument("output.path: missing");
  std::vector<std::string> written;
  for (std::size_t k = 0; k < results.size(); ++k) {
    std::string path = out.path;
    if (results.size() > 1) {
      const auto dot = path.find_last_of('.');
      const std::string suffix = "_r" + std::to_string(k);
      if (dot == std::string::npos)
        path += suffix;
      else
        path.insert(dot, suffix);
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    if (out.format == "json") {
      os << trace_to_json(results[k].trace).dump(2) << '\n';
    } else {
      write_trace_csv(os, results[k].trace);
    }
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace sysid
