#include "fairgdiff/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fairgdiff/error.hpp"
#include "fairgdiff/rng.hpp"

namespace fairgdiff {

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

std::string enc_w(int layer) { return "enc" + std::to_string(layer) + ".w"; }
std::string enc_b(int layer) { return "enc" + std::to_string(layer) + ".b"; }
std::string dec_w(int layer) { return "dec" + std::to_string(layer) + ".w"; }
std::string dec_b(int layer) { return "dec" + std::to_string(layer) + ".b"; }

Eigen::Index pair_count(int n) {
  return static_cast<Eigen::Index>(n) * (n - 1) / 2;
}

struct EncoderTrace {
  // per layer: aggregated input S = (A+I) H, pre-activation Z, activation H
  std::vector<Eigen::MatrixXd> s, z, h;  // h[0] = X, h[l+1] = act(z[l])
  Eigen::VectorXd readout;               // column mean of h.back()
  Eigen::VectorXd mu, logvar;
};

void check_graph(const AutoencoderParams& params, const AttributedGraph& g) {
  if (g.n > params.config.n_max)
    throw precondition_error("graph has " + std::to_string(g.n) +
                             " nodes but n_max is " +
                             std::to_string(params.config.n_max));
  if (g.features.cols() != params.feature_dim)
    throw precondition_error("feature width does not match the autoencoder");
}

EncoderTrace encoder_forward(const AutoencoderParams& params,
                             const AttributedGraph& g) {
  const auto& cfg = params.config;
  EncoderTrace t;
  t.h.push_back(g.features);
  Eigen::MatrixXd m = g.adjacency.cast<double>();
  m.diagonal().array() += 1.0;
  for (int l = 0; l < cfg.layers; ++l) {
    t.s.push_back(m * t.h.back());
    Eigen::MatrixXd z =
        (t.s.back() * params.store.view(enc_w(l)).transpose()).rowwise() +
        params.store.view(enc_b(l)).row(0);
    t.z.push_back(z);
    t.h.push_back(z.unaryExpr([](double v) { return shifted_softplus(v); }));
  }
  t.readout = t.h.back().colwise().mean().transpose();
  t.mu = params.store.view("mu.w") * t.readout +
         params.store.view("mu.b").col(0);
  t.logvar = params.store.view("logvar.w") * t.readout +
             params.store.view("logvar.b").col(0);
  return t;
}

struct DecoderTrace {
  Eigen::VectorXd a1, h1, a2, h2, logits;  // logits over all n_max pairs
};

DecoderTrace decoder_forward(const AutoencoderParams& params,
                             const Eigen::VectorXd& z) {
  DecoderTrace t;
  t.a1 = params.store.view(dec_w(1)) * z + params.store.view(dec_b(1)).col(0);
  t.h1 = t.a1.unaryExpr([](double v) { return shifted_softplus(v); });
  t.a2 = params.store.view(dec_w(2)) * t.h1 + params.store.view(dec_b(2)).col(0);
  t.h2 = t.a2.unaryExpr([](double v) { return shifted_softplus(v); });
  t.logits =
      params.store.view(dec_w(3)) * t.h2 + params.store.view(dec_b(3)).col(0);
  return t;
}

}  // namespace

double shifted_softplus(double x) {
  return (x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x))) -
         kLn2;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

AutoencoderParams init_autoencoder(const AutoencoderConfig& config,
                                   int feature_dim) {
  if (config.n_max < 2 || config.latent_dim < 1 || config.layers < 1 ||
      config.hidden_dim < 1 || feature_dim < 1)
    throw config_error("autoencoder configuration must be positive");
  AutoencoderParams p;
  p.config = config;
  p.feature_dim = feature_dim;
  for (int l = 0; l < config.layers; ++l) {
    const int in = l == 0 ? feature_dim : config.hidden_dim;
    p.store.add(enc_w(l), config.hidden_dim, in);
    p.store.add(enc_b(l), 1, config.hidden_dim);
  }
  p.store.add("mu.w", config.latent_dim, config.hidden_dim);
  p.store.add("mu.b", config.latent_dim, 1);
  p.store.add("logvar.w", config.latent_dim, config.hidden_dim);
  p.store.add("logvar.b", config.latent_dim, 1);
  p.store.add(dec_w(1), config.hidden_dim, config.latent_dim);
  p.store.add(dec_b(1), config.hidden_dim, 1);
  p.store.add(dec_w(2), config.hidden_dim, config.hidden_dim);
  p.store.add(dec_b(2), config.hidden_dim, 1);
  p.store.add(dec_w(3), pair_count(config.n_max), config.hidden_dim);
  p.store.add(dec_b(3), pair_count(config.n_max), 1);
  return p;
}

LatentCode encode(const AutoencoderParams& params, const AttributedGraph& graph,
                  const Eigen::VectorXd& eps) {
  check_graph(params, graph);
  if (eps.size() != params.config.latent_dim)
    throw precondition_error("reparameterization noise has the wrong length");
  auto t = encoder_forward(params, graph);
  LatentCode code;
  code.mean = t.mu;
  code.logvar = t.logvar;
  code.sample =
      (t.mu.array() + (t.logvar.array() / 2.0).exp() * eps.array()).matrix();
  return code;
}

Eigen::VectorXd encode_mean(const AutoencoderParams& params,
                            const AttributedGraph& graph) {
  check_graph(params, graph);
  return encoder_forward(params, graph).mu;
}

Eigen::MatrixXd node_embeddings(const AutoencoderParams& params,
                                const AttributedGraph& graph) {
  check_graph(params, graph);
  return encoder_forward(params, graph).h.back();
}

Eigen::MatrixXd decode(const AutoencoderParams& params,
                       const Eigen::VectorXd& z, int n) {
  if (n > params.config.n_max)
    throw precondition_error("decode: n exceeds n_max");
  if (z.size() != params.config.latent_dim)
    throw precondition_error("decode: latent has the wrong length");
  auto t = decoder_forward(params, z);
  Eigen::MatrixXd logits(n, n);
  logits.setConstant(-std::numeric_limits<double>::infinity());
  Eigen::Index p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      logits(i, j) = logits(j, i) = t.logits[p];
      ++p;
    }
  return logits;
}

VaeLoss vae_loss(const AutoencoderParams& params, const AttributedGraph& graph,
                 const Eigen::VectorXd& eps, Eigen::VectorXd* grad) {
  check_graph(params, graph);
  const auto& cfg = params.config;
  if (eps.size() != cfg.latent_dim)
    throw precondition_error("reparameterization noise has the wrong length");

  auto enc = encoder_forward(params, graph);
  Eigen::VectorXd zs =
      (enc.mu.array() + (enc.logvar.array() / 2.0).exp() * eps.array())
          .matrix();
  auto dec = decoder_forward(params, zs);

  const int n = graph.n;
  const Eigen::Index pairs = pair_count(n);

  VaeLoss out;
  Eigen::VectorXd dlogits;
  if (grad) dlogits = Eigen::VectorXd::Zero(dec.logits.size());
  {
    Eigen::Index p = 0;
    double bce = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double logit = dec.logits[p];
        const double y = graph.adjacency(i, j);
        bce += (logit > 0 ? logit + std::log1p(std::exp(-logit))
                          : std::log1p(std::exp(logit))) -
               y * logit;
        if (grad) dlogits[p] = (sigmoid(logit) - y) / double(pairs);
        ++p;
      }
    out.bce = bce / double(pairs);
  }
  out.kl = 0.5 * (enc.mu.array().square() + enc.logvar.array().exp() - 1.0 -
                  enc.logvar.array())
                     .sum();
  out.total = out.bce + cfg.kl_weight * out.kl;

  if (!grad) return out;

  Eigen::VectorXd& g = *grad;
  g = Eigen::VectorXd::Zero(params.store.size());
  auto gview = [&](const std::string& name) {
    return params.store.view_in(name, g);
  };

  // decoder backward
  gview(dec_w(3)) = dlogits * dec.h2.transpose();
  gview(dec_b(3)).col(0) = dlogits;
  Eigen::VectorXd dh2 = params.store.view(dec_w(3)).transpose() * dlogits;
  Eigen::VectorXd da2 =
      (dh2.array() *
       dec.a2.unaryExpr([](double v) { return sigmoid(v); }).array())
          .matrix();
  gview(dec_w(2)) = da2 * dec.h1.transpose();
  gview(dec_b(2)).col(0) = da2;
  Eigen::VectorXd dh1 = params.store.view(dec_w(2)).transpose() * da2;
  Eigen::VectorXd da1 =
      (dh1.array() *
       dec.a1.unaryExpr([](double v) { return sigmoid(v); }).array())
          .matrix();
  gview(dec_w(1)) = da1 * zs.transpose();
  gview(dec_b(1)).col(0) = da1;
  Eigen::VectorXd dz = params.store.view(dec_w(1)).transpose() * da1;

  // latent heads: reparameterized sample plus the KL term
  Eigen::VectorXd dmu = dz + cfg.kl_weight * enc.mu;
  Eigen::VectorXd dlogvar =
      (dz.array() * 0.5 * (enc.logvar.array() / 2.0).exp() * eps.array() +
       cfg.kl_weight * 0.5 * (enc.logvar.array().exp() - 1.0))
          .matrix();
  gview("mu.w") = dmu * enc.readout.transpose();
  gview("mu.b").col(0) = dmu;
  gview("logvar.w") = dlogvar * enc.readout.transpose();
  gview("logvar.b").col(0) = dlogvar;

  Eigen::VectorXd dreadout = params.store.view("mu.w").transpose() * dmu +
                             params.store.view("logvar.w").transpose() * dlogvar;

  // mean readout spreads the gradient evenly over nodes
  Eigen::MatrixXd dh =
      ((dreadout / double(n)).transpose()).replicate(n, 1);

  Eigen::MatrixXd m = graph.adjacency.cast<double>();
  m.diagonal().array() += 1.0;
  for (int l = cfg.layers - 1; l >= 0; --l) {
    Eigen::MatrixXd dzl =
        (dh.array() *
         enc.z[l].unaryExpr([](double v) { return sigmoid(v); }).array())
            .matrix();
    gview(enc_w(l)) = dzl.transpose() * enc.s[l];
    gview(enc_b(l)).row(0) = dzl.colwise().sum();
    if (l > 0) dh = m * (dzl * params.store.view(enc_w(l)));
  }
  return out;
}

AutoencoderParams train_autoencoder(const std::vector<AttributedGraph>& graphs,
                                    const AutoencoderConfig& config,
                                    std::vector<double>* loss_trace) {
  if (graphs.empty())
    throw precondition_error("train_autoencoder: empty corpus");
  const int feature_dim = static_cast<int>(graphs[0].features.cols());
  for (const auto& g : graphs)
    if (g.n > config.n_max)
      throw precondition_error("train_autoencoder: graph exceeds n_max");

  AutoencoderParams params = init_autoencoder(config, feature_dim);
  Rng rng(config.seed);
  params.store.init_normal(rng);

  AdamOptimizer opt(params.store.size(), config.lr);
  Eigen::VectorXd grad(params.store.size());
  Eigen::VectorXd total_grad(params.store.size());
  Eigen::VectorXd eps(config.latent_dim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    total_grad.setZero();
    double total_loss = 0.0;
    for (const auto& g : graphs) {
      for (int k = 0; k < config.latent_dim; ++k) eps[k] = rng.normal();
      const auto loss = vae_loss(params, g, eps, &grad);
      if (!std::isfinite(loss.total))
        throw divergence_error("autoencoder loss diverged at epoch " +
                               std::to_string(epoch));
      total_loss += loss.total;
      total_grad += grad;
    }
    total_loss /= double(graphs.size());
    total_grad /= double(graphs.size());
    if (loss_trace) loss_trace->push_back(total_loss);
    opt.step(params.store.flat(), total_grad);
  }
  params.trained = true;
  return params;
}

double reconstruction_auc(const AutoencoderParams& params,
                          const AttributedGraph& graph) {
  check_graph(params, graph);
  const auto mu = encode_mean(params, graph);
  auto dec = decoder_forward(params, mu);

  // Mann-Whitney with midranks for tied scores
  struct Entry {
    double score;
    int label;
  };
  std::vector<Entry> entries;
  Eigen::Index p = 0;
  std::int64_t positives = 0;
  for (int i = 0; i < graph.n; ++i)
    for (int j = i + 1; j < graph.n; ++j) {
      entries.push_back({dec.logits[p], graph.adjacency(i, j)});
      positives += graph.adjacency(i, j);
      ++p;
    }
  const std::int64_t negatives = static_cast<std::int64_t>(entries.size()) -
                                 positives;
  if (positives == 0 || negatives == 0)
    return std::numeric_limits<double>::quiet_NaN();

  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].score == entries[i].score) ++j;
    const double midrank = 0.5 * (double(i + 1) + double(j));
    for (std::size_t k = i; k < j; ++k)
      if (entries[k].label) rank_sum += midrank;
    i = j;
  }
  const double u = rank_sum - double(positives) * (double(positives) + 1) / 2;
  return u / (double(positives) * double(negatives));
}

}  // namespace fairgdiff
