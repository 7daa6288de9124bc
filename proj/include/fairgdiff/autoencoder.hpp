#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fairgdiff/graph.hpp"
#include "fairgdiff/param_store.hpp"

namespace fairgdiff {

/// Smooth rectifier shifted so that act(0) = 0; derivative is the logistic
/// sigmoid.
double shifted_softplus(double x);
double sigmoid(double x);

struct AutoencoderConfig {
  int n_max = 512;
  int latent_dim = 16;
  int layers = 2;
  int hidden_dim = 32;
  int epochs = 200;
  double lr = 1e-2;
  double kl_weight = 1e-2;
  std::uint64_t seed = 0;
};

/// Whole-graph variational autoencoder: sum-aggregation message passing
/// into a mean readout with (mu, logvar) heads, and a 3-layer MLP decoder
/// emitting one logit per upper-triangle pair of an n_max-node graph.
struct AutoencoderParams {
  AutoencoderConfig config;
  int feature_dim = 0;
  bool trained = false;
  ParamStore store;
};

struct LatentCode {
  Eigen::VectorXd mean;
  Eigen::VectorXd logvar;
  Eigen::VectorXd sample;  // mean + exp(logvar/2) .* eps
};

AutoencoderParams init_autoencoder(const AutoencoderConfig& config,
                                   int feature_dim);

/// eps supplies the reparameterization draw; same length as the latent.
LatentCode encode(const AutoencoderParams& params, const AttributedGraph& graph,
                  const Eigen::VectorXd& eps);

/// Deterministic encoding: the posterior mean.
Eigen::VectorXd encode_mean(const AutoencoderParams& params,
                            const AttributedGraph& graph);

/// Per-node hidden states of the last message-passing layer (pre-readout).
Eigen::MatrixXd node_embeddings(const AutoencoderParams& params,
                                const AttributedGraph& graph);

/// Symmetric n x n logit matrix; diagonal holds -infinity.
Eigen::MatrixXd decode(const AutoencoderParams& params,
                       const Eigen::VectorXd& z, int n);

struct VaeLoss {
  double total = 0.0;
  double bce = 0.0;
  double kl = 0.0;
};

/// Mean upper-triangle BCE plus kl_weight * KL(N(mu, sigma^2) || N(0, I)),
/// with the reparameterization noise supplied explicitly so the value is a
/// deterministic function of the parameters. Writes the analytic gradient
/// with respect to every parameter when grad is given.
VaeLoss vae_loss(const AutoencoderParams& params, const AttributedGraph& graph,
                 const Eigen::VectorXd& eps, Eigen::VectorXd* grad = nullptr);

/// Adam on the corpus-mean vae_loss with fresh per-graph reparameterization
/// noise each epoch. Deterministic given config.seed.
AutoencoderParams train_autoencoder(const std::vector<AttributedGraph>& graphs,
                                    const AutoencoderConfig& config,
                                    std::vector<double>* loss_trace = nullptr);

/// AUC of decoded logits (from the posterior mean) separating edges from
/// non-edges over the upper triangle; NaN when the graph is complete or
/// empty.
double reconstruction_auc(const AutoencoderParams& params,
                          const AttributedGraph& graph);

}  // namespace fairgdiff
