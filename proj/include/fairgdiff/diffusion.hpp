#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fairgdiff/autoencoder.hpp"
#include "fairgdiff/graph.hpp"
#include "fairgdiff/param_store.hpp"
#include "fairgdiff/treatment.hpp"

namespace fairgdiff {

/// Variance schedule of the forward corruption process. Index 0 holds step
/// t = 1; alpha_bar is the cumulative signal retention.
struct NoiseSchedule {
  int steps = 0;
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;      // 1 - beta, exactly
  Eigen::VectorXd alpha_bar;  // running product of alpha
};

/// Linear interpolation from beta_start to beta_end over `steps` entries.
NoiseSchedule make_schedule(int steps, double beta_start, double beta_end);

/// z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) noise, 1 <= t <= T.
Eigen::VectorXd forward_sample(const NoiseSchedule& schedule,
                               const Eigen::VectorXd& z0, int t,
                               const Eigen::VectorXd& noise);

struct DiffusionConfig {
  int steps = 200;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  double gamma1 = 5.0;   // weight of the factual branch
  double gamma2 = 0.2;   // weight of the counterfactual branch
  int epochs = 300;
  double lr = 2e-3;
  int hidden_dim = 64;   // denoiser MLP width
  int tau_hidden = 32;   // relation-encoder message width
  int tau_layers = 2;
  int cond_dim = 16;     // conditioning vector width
  int time_dim = 16;     // sinusoidal step embedding width, even
  std::uint64_t seed = 0;
};

/// Denoiser MLP and relation encoder share one parameter store so both
/// receive gradient from the same loss.
struct DenoiserParams {
  DiffusionConfig config;
  int latent_dim = 0;
  int feature_dim = 0;
  bool trained = false;
  ParamStore store;
};

DenoiserParams init_denoiser(const DiffusionConfig& config, int latent_dim,
                             int feature_dim);

/// Conditioning vector c: message passing over the pair relation used as an
/// adjacency (its unit diagonal acts as the self-loop), node features as
/// inputs, mean readout, linear head. Sensitive values never enter except
/// through the relation itself.
Eigen::VectorXd treatment_encode(const DenoiserParams& params,
                                 const TreatmentMatrix& treatment,
                                 const AttributedGraph& graph);

/// Predicted noise from [z_t, sinusoidal embedding of t, c].
Eigen::VectorXd denoise_predict(const DenoiserParams& params,
                                const Eigen::VectorXd& z_t, int t,
                                const Eigen::VectorXd& c);

/// One training example: frozen latents of the factual and counterfactual
/// graphs plus the raw inputs of the conditioning branches. The relations
/// and features are kept (rather than precomputed conditioning vectors) so
/// the loss can push gradient into the relation encoder.
struct TrainingPair {
  Eigen::VectorXd z_factual;
  Eigen::VectorXd z_counterfactual;
  TreatmentMatrix t_factual;
  TreatmentMatrix t_counterfactual;
  Eigen::MatrixXd features;
};

struct DiffusionLoss {
  double total = 0.0;
  double factual = 0.0;
  double counterfactual = 0.0;
};

/// total = gamma1 * ||noise_f - eps(z_t^F, t, c^F)||^2
///       + gamma2 * ||noise_cf - eps(z_t^CF, t, c^CF)||^2.
/// gamma2 = 0 skips the counterfactual branch entirely, reducing to the
/// plain conditional objective bit for bit. Writes the analytic gradient
/// over denoiser and relation-encoder parameters jointly when grad is
/// given. Throws on a non-finite result.
DiffusionLoss training_loss(const DenoiserParams& params,
                            const NoiseSchedule& schedule,
                            const TrainingPair& pair, int t,
                            const Eigen::VectorXd& noise_f,
                            const Eigen::VectorXd& noise_cf,
                            Eigen::VectorXd* grad = nullptr);

struct DiffusionSample {
  AttributedGraph factual;
  AttributedGraph counterfactual;
  TreatmentMatrix t_factual;
  TreatmentMatrix t_counterfactual;
};

/// Adam over the corpus-mean training_loss. Latents come from the frozen
/// autoencoder's posterior means. Each epoch draws per-sample step indices
/// and both noise vectors from one seeded stream; the counterfactual noise
/// is drawn even when gamma2 = 0 so the reduction leaves the stream (and
/// hence every factual-branch draw) untouched.
DenoiserParams train_diffusion(const AutoencoderParams& ae,
                               const DiffusionConfig& config,
                               const std::vector<DiffusionSample>& corpus,
                               std::vector<double>* loss_trace = nullptr);

/// Ancestral reverse walk from z_T ~ N(0, I); sigma_t = sqrt(beta_t) except
/// the final step, which is deterministic. Bitwise reproducible from seed.
Eigen::VectorXd sample_latent(const DenoiserParams& params,
                              const NoiseSchedule& schedule,
                              const Eigen::VectorXd& c, std::uint64_t seed);

/// Samples a latent conditioned on the counterfactual relation, decodes it,
/// and keeps the top `target_edges` pairs (ties broken lexicographically).
/// target_edges < 0 means the input's edge count. Features, sensitive
/// values and labels are carried over unchanged.
AttributedGraph generate_fair_graph(const AutoencoderParams& ae,
                                    const DenoiserParams& diff,
                                    const NoiseSchedule& schedule,
                                    const AttributedGraph& graph,
                                    const TreatmentMatrix& t_cf,
                                    std::int64_t target_edges,
                                    std::uint64_t seed);

}  // namespace fairgdiff
