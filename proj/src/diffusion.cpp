#include "fairgdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fairgdiff/error.hpp"
#include "fairgdiff/rng.hpp"

namespace fairgdiff {

namespace {

std::string tau_w(int layer) { return "tau" + std::to_string(layer) + ".w"; }
std::string tau_b(int layer) { return "tau" + std::to_string(layer) + ".b"; }

Eigen::VectorXd time_embedding(int t, int width) {
  const int half = width / 2;
  Eigen::VectorXd e(width);
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -double(i) / double(half));
    e[i] = std::sin(double(t) * freq);
    e[half + i] = std::cos(double(t) * freq);
  }
  return e;
}

struct TauTrace {
  std::vector<Eigen::MatrixXd> s, z, h;  // h[0] = X
  Eigen::VectorXd readout, c;
};

TauTrace tau_forward(const DenoiserParams& params, const BinaryMatrix& relation,
                     const Eigen::MatrixXd& x) {
  const auto& cfg = params.config;
  TauTrace t;
  t.h.push_back(x);
  const Eigen::MatrixXd m = relation.cast<double>();
  for (int l = 0; l < cfg.tau_layers; ++l) {
    t.s.push_back(m * t.h.back());
    Eigen::MatrixXd z =
        (t.s.back() * params.store.view(tau_w(l)).transpose()).rowwise() +
        params.store.view(tau_b(l)).row(0);
    t.z.push_back(z);
    t.h.push_back(z.unaryExpr([](double v) { return shifted_softplus(v); }));
  }
  t.readout = t.h.back().colwise().mean().transpose();
  t.c = params.store.view("tauh.w") * t.readout +
        params.store.view("tauh.b").col(0);
  return t;
}

struct MlpTrace {
  Eigen::VectorXd u, a1, h1, a2, h2, out;
};

MlpTrace mlp_forward(const DenoiserParams& params, const Eigen::VectorXd& z_t,
                     int t, const Eigen::VectorXd& c) {
  const auto& cfg = params.config;
  MlpTrace m;
  m.u.resize(params.latent_dim + cfg.time_dim + cfg.cond_dim);
  m.u << z_t, time_embedding(t, cfg.time_dim), c;
  m.a1 = params.store.view("eps1.w") * m.u + params.store.view("eps1.b").col(0);
  m.h1 = m.a1.unaryExpr([](double v) { return shifted_softplus(v); });
  m.a2 =
      params.store.view("eps2.w") * m.h1 + params.store.view("eps2.b").col(0);
  m.h2 = m.a2.unaryExpr([](double v) { return shifted_softplus(v); });
  m.out =
      params.store.view("eps3.w") * m.h2 + params.store.view("eps3.b").col(0);
  return m;
}

/// Squared-error of one conditioning branch; adds weight-scaled gradients
/// for every parameter the branch touches.
double branch_loss(const DenoiserParams& params, const NoiseSchedule& schedule,
                   const Eigen::VectorXd& z0, const TreatmentMatrix& relation,
                   const Eigen::MatrixXd& x, int t,
                   const Eigen::VectorXd& noise, double weight,
                   Eigen::VectorXd* g) {
  const auto& cfg = params.config;
  const Eigen::VectorXd zt = forward_sample(schedule, z0, t, noise);
  const TauTrace tau = tau_forward(params, relation.values, x);
  const MlpTrace mlp = mlp_forward(params, zt, t, tau.c);
  const double loss = (noise - mlp.out).squaredNorm();
  if (!g) return loss;

  auto gv = [&](const std::string& name) {
    return params.store.view_in(name, *g);
  };
  const auto dact = [](double v) { return sigmoid(v); };

  Eigen::VectorXd de = (2.0 * weight) * (mlp.out - noise);
  gv("eps3.w") += de * mlp.h2.transpose();
  gv("eps3.b").col(0) += de;
  Eigen::VectorXd dh2 = params.store.view("eps3.w").transpose() * de;
  Eigen::VectorXd da2 = (dh2.array() * mlp.a2.unaryExpr(dact).array()).matrix();
  gv("eps2.w") += da2 * mlp.h1.transpose();
  gv("eps2.b").col(0) += da2;
  Eigen::VectorXd dh1 = params.store.view("eps2.w").transpose() * da2;
  Eigen::VectorXd da1 = (dh1.array() * mlp.a1.unaryExpr(dact).array()).matrix();
  gv("eps1.w") += da1 * mlp.u.transpose();
  gv("eps1.b").col(0) += da1;
  const Eigen::VectorXd du = params.store.view("eps1.w").transpose() * da1;
  const Eigen::VectorXd dc = du.tail(cfg.cond_dim);

  gv("tauh.w") += dc * tau.readout.transpose();
  gv("tauh.b").col(0) += dc;
  const Eigen::VectorXd dreadout = params.store.view("tauh.w").transpose() * dc;

  const Eigen::Index n = x.rows();
  Eigen::MatrixXd dh = ((dreadout / double(n)).transpose()).replicate(n, 1);
  const Eigen::MatrixXd m = relation.values.cast<double>();
  for (int l = cfg.tau_layers - 1; l >= 0; --l) {
    Eigen::MatrixXd dz =
        (dh.array() * tau.z[l].unaryExpr(dact).array()).matrix();
    gv(tau_w(l)) += dz.transpose() * tau.s[l];
    gv(tau_b(l)).row(0) += dz.colwise().sum();
    if (l > 0) dh = m * (dz * params.store.view(tau_w(l)));
  }
  return loss;
}

void check_branch_inputs(const DenoiserParams& params,
                         const Eigen::VectorXd& z0,
                         const TreatmentMatrix& relation,
                         const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& noise) {
  if (z0.size() != params.latent_dim || noise.size() != params.latent_dim)
    throw precondition_error("latent or noise length does not match the model");
  if (x.cols() != params.feature_dim)
    throw precondition_error("feature width does not match the model");
  if (relation.n != int(x.rows()))
    throw precondition_error("relation and feature node counts differ");
}

}  // namespace

NoiseSchedule make_schedule(int steps, double beta_start, double beta_end) {
  if (steps < 1)
    throw config_error("schedule needs at least one step");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw config_error("schedule betas must satisfy 0 < start <= end < 1");
  NoiseSchedule s;
  s.steps = steps;
  s.beta.resize(steps);
  s.alpha.resize(steps);
  s.alpha_bar.resize(steps);
  double run = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : double(i) / double(steps - 1);
    s.beta[i] = beta_start + frac * (beta_end - beta_start);
    s.alpha[i] = 1.0 - s.beta[i];
    run *= s.alpha[i];
    s.alpha_bar[i] = run;
  }
  return s;
}

Eigen::VectorXd forward_sample(const NoiseSchedule& schedule,
                               const Eigen::VectorXd& z0, int t,
                               const Eigen::VectorXd& noise) {
  if (t < 1 || t > schedule.steps)
    throw precondition_error("step index outside the schedule");
  if (noise.size() != z0.size())
    throw precondition_error("noise and latent lengths differ");
  const double ab = schedule.alpha_bar[t - 1];
  return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * noise;
}

DenoiserParams init_denoiser(const DiffusionConfig& config, int latent_dim,
                             int feature_dim) {
  if (latent_dim < 1 || feature_dim < 1 || config.hidden_dim < 1 ||
      config.tau_hidden < 1 || config.tau_layers < 1 || config.cond_dim < 1)
    throw config_error("denoiser configuration must be positive");
  if (config.time_dim < 2 || config.time_dim % 2 != 0)
    throw config_error("time embedding width must be even and at least 2");
  if (config.gamma1 < 0.0 || config.gamma2 < 0.0 ||
      config.gamma1 + config.gamma2 <= 0.0)
    throw config_error("loss weights must be nonnegative with a positive sum");

  DenoiserParams p;
  p.config = config;
  p.latent_dim = latent_dim;
  p.feature_dim = feature_dim;
  for (int l = 0; l < config.tau_layers; ++l) {
    const int in = l == 0 ? feature_dim : config.tau_hidden;
    p.store.add(tau_w(l), config.tau_hidden, in);
    p.store.add(tau_b(l), 1, config.tau_hidden);
  }
  p.store.add("tauh.w", config.cond_dim, config.tau_hidden);
  p.store.add("tauh.b", config.cond_dim, 1);
  const int in_dim = latent_dim + config.time_dim + config.cond_dim;
  p.store.add("eps1.w", config.hidden_dim, in_dim);
  p.store.add("eps1.b", config.hidden_dim, 1);
  p.store.add("eps2.w", config.hidden_dim, config.hidden_dim);
  p.store.add("eps2.b", config.hidden_dim, 1);
  p.store.add("eps3.w", latent_dim, config.hidden_dim);
  p.store.add("eps3.b", latent_dim, 1);
  return p;
}

Eigen::VectorXd treatment_encode(const DenoiserParams& params,
                                 const TreatmentMatrix& treatment,
                                 const AttributedGraph& graph) {
  if (treatment.n != graph.n)
    throw precondition_error("relation and graph node counts differ");
  if (graph.features.cols() != params.feature_dim)
    throw precondition_error("feature width does not match the model");
  return tau_forward(params, treatment.values, graph.features).c;
}

Eigen::VectorXd denoise_predict(const DenoiserParams& params,
                                const Eigen::VectorXd& z_t, int t,
                                const Eigen::VectorXd& c) {
  if (z_t.size() != params.latent_dim)
    throw precondition_error("latent length does not match the model");
  if (c.size() != params.config.cond_dim)
    throw precondition_error("conditioning length does not match the model");
  if (t < 1) throw precondition_error("step index must be at least 1");
  return mlp_forward(params, z_t, t, c).out;
}

DiffusionLoss training_loss(const DenoiserParams& params,
                            const NoiseSchedule& schedule,
                            const TrainingPair& pair, int t,
                            const Eigen::VectorXd& noise_f,
                            const Eigen::VectorXd& noise_cf,
                            Eigen::VectorXd* grad) {
  if (t < 1 || t > schedule.steps)
    throw precondition_error("step index outside the schedule");
  check_branch_inputs(params, pair.z_factual, pair.t_factual, pair.features,
                      noise_f);
  if (grad) *grad = Eigen::VectorXd::Zero(params.store.size());

  const auto& cfg = params.config;
  DiffusionLoss out;
  out.factual = branch_loss(params, schedule, pair.z_factual, pair.t_factual,
                            pair.features, t, noise_f, cfg.gamma1, grad);
  if (cfg.gamma2 == 0.0) {
    out.counterfactual = 0.0;
    out.total = cfg.gamma1 * out.factual;
  } else {
    check_branch_inputs(params, pair.z_counterfactual, pair.t_counterfactual,
                        pair.features, noise_cf);
    out.counterfactual =
        branch_loss(params, schedule, pair.z_counterfactual,
                    pair.t_counterfactual, pair.features, t, noise_cf,
                    cfg.gamma2, grad);
    out.total = cfg.gamma1 * out.factual + cfg.gamma2 * out.counterfactual;
  }
  if (!std::isfinite(out.total))
    throw divergence_error("non-finite diffusion loss");
  return out;
}

DenoiserParams train_diffusion(const AutoencoderParams& ae,
                               const DiffusionConfig& config,
                               const std::vector<DiffusionSample>& corpus,
                               std::vector<double>* loss_trace) {
  if (!ae.trained)
    throw precondition_error("train_diffusion: autoencoder is not trained");
  if (corpus.empty())
    throw precondition_error("train_diffusion: empty corpus");
  const auto schedule =
      make_schedule(config.steps, config.beta_start, config.beta_end);
  const bool use_cf = config.gamma2 != 0.0;

  std::vector<TrainingPair> pairs;
  pairs.reserve(corpus.size());
  for (const auto& sample : corpus) {
    TrainingPair p;
    p.z_factual = encode_mean(ae, sample.factual);
    p.t_factual = sample.t_factual;
    p.features = sample.factual.features;
    if (use_cf) {
      p.z_counterfactual = encode_mean(ae, sample.counterfactual);
      p.t_counterfactual = sample.t_counterfactual;
    } else {
      p.z_counterfactual = Eigen::VectorXd::Zero(ae.config.latent_dim);
      p.t_counterfactual = sample.t_factual;
    }
    pairs.push_back(std::move(p));
  }

  DenoiserParams params =
      init_denoiser(config, ae.config.latent_dim, ae.feature_dim);
  Rng rng(config.seed);
  params.store.init_normal(rng);

  AdamOptimizer opt(params.store.size(), config.lr);
  Eigen::VectorXd grad(params.store.size());
  Eigen::VectorXd total_grad(params.store.size());
  Eigen::VectorXd noise_f(params.latent_dim), noise_cf(params.latent_dim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    total_grad.setZero();
    double total_loss = 0.0;
    for (const auto& pair : pairs) {
      const int t = 1 + int(rng.below(std::uint64_t(config.steps)));
      for (int k = 0; k < params.latent_dim; ++k) noise_f[k] = rng.normal();
      for (int k = 0; k < params.latent_dim; ++k) noise_cf[k] = rng.normal();
      try {
        const auto loss =
            training_loss(params, schedule, pair, t, noise_f, noise_cf, &grad);
        total_loss += loss.total;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::divergence)
          throw divergence_error("diffusion loss diverged at epoch " +
                                 std::to_string(epoch));
        throw;
      }
      total_grad += grad;
    }
    total_loss /= double(pairs.size());
    total_grad /= double(pairs.size());
    if (loss_trace) loss_trace->push_back(total_loss);
    opt.step(params.store.flat(), total_grad);
  }
  params.trained = true;
  return params;
}

Eigen::VectorXd sample_latent(const DenoiserParams& params,
                              const NoiseSchedule& schedule,
                              const Eigen::VectorXd& c, std::uint64_t seed) {
  if (c.size() != params.config.cond_dim)
    throw precondition_error("conditioning length does not match the model");
  Rng rng(seed);
  Eigen::VectorXd z(params.latent_dim);
  for (int k = 0; k < params.latent_dim; ++k) z[k] = rng.normal();
  Eigen::VectorXd xi(params.latent_dim);
  for (int t = schedule.steps; t >= 1; --t) {
    const double beta = schedule.beta[t - 1];
    const double alpha = schedule.alpha[t - 1];
    const double ab = schedule.alpha_bar[t - 1];
    const Eigen::VectorXd eps_hat = denoise_predict(params, z, t, c);
    z = (z - (beta / std::sqrt(1.0 - ab)) * eps_hat) / std::sqrt(alpha);
    if (t > 1) {
      for (int k = 0; k < params.latent_dim; ++k) xi[k] = rng.normal();
      z += std::sqrt(beta) * xi;
    }
  }
  return z;
}

AttributedGraph generate_fair_graph(const AutoencoderParams& ae,
                                    const DenoiserParams& diff,
                                    const NoiseSchedule& schedule,
                                    const AttributedGraph& graph,
                                    const TreatmentMatrix& t_cf,
                                    std::int64_t target_edges,
                                    std::uint64_t seed) {
  if (!ae.trained || !diff.trained)
    throw precondition_error("generate_fair_graph: models must be trained");
  if (graph.n > ae.config.n_max)
    throw precondition_error("generate_fair_graph: graph exceeds n_max");
  if (ae.config.latent_dim != diff.latent_dim)
    throw precondition_error("autoencoder and denoiser latent widths differ");

  const Eigen::VectorXd c = treatment_encode(diff, t_cf, graph);
  const Eigen::VectorXd z0 = sample_latent(diff, schedule, c, seed);
  const Eigen::MatrixXd logits = decode(ae, z0, graph.n);

  const std::int64_t pair_total =
      std::int64_t(graph.n) * (graph.n - 1) / 2;
  const std::int64_t budget =
      target_edges < 0 ? graph.edge_count() : target_edges;
  if (budget > pair_total)
    throw precondition_error("generate_fair_graph: edge budget exceeds pairs");

  struct Scored {
    double score;
    int i, j;
  };
  std::vector<Scored> scored;
  scored.reserve(std::size_t(pair_total));
  for (int i = 0; i < graph.n; ++i)
    for (int j = i + 1; j < graph.n; ++j)
      scored.push_back({logits(i, j), i, j});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  AttributedGraph out;
  out.n = graph.n;
  out.adjacency = BinaryMatrix::Zero(graph.n, graph.n);
  for (std::int64_t k = 0; k < budget; ++k) {
    out.adjacency(scored[k].i, scored[k].j) = 1;
    out.adjacency(scored[k].j, scored[k].i) = 1;
  }
  out.features = graph.features;
  out.sensitive = graph.sensitive;
  out.labels = graph.labels;
  out.name = graph.name;
  return out;
}

}  // namespace fairgdiff
