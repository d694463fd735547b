#pragma once

#include <optional>
#include <vector>

#include "pqrl/matrix.hpp"
#include "pqrl/rng.hpp"
#include "pqrl/vocab.hpp"

namespace pqrl {

// Factorized structured-response policy with closed-form log-probabilities,
// score-function gradients, and per-sample KL. Appearance and action channels
// are independent per-token Bernoullis; the emotion channel is either the
// same (exclusive_emotion off) or a categorical over the tokens plus an
// explicit "none" outcome (exclusive_emotion on, the default), so at most one
// emotion token is ever included and probabilities still sum to one over the
// reachable response space.
//
// Per-channel logits are an affine map of the sample features:
//   z = x * W + b,  W: F x V (V+1 for the exclusive emotion head), b: 1 x V.
// Parameters are flattened channel by channel (W row-major, then b) for the
// gradient vector contract.
class ToyPolicy {
 public:
  ToyPolicy(std::size_t feature_dim, const Vocabulary& vocab, bool exclusive_emotion = true);

  std::size_t feature_dim() const { return feature_dim_; }
  bool exclusive_emotion() const { return exclusive_emotion_; }
  std::size_t param_count() const;

  // Columns of the emotion head (tokens [+ none]).
  std::size_t emotion_outcomes() const { return heads_[2].w.cols(); }

  StructuredResponse sample(const Mat& x, Rng& rng) const;
  std::vector<StructuredResponse> sample_candidates(const Mat& x, std::size_t k, Rng& rng) const;
  StructuredResponse greedy(const Mat& x) const;

  double log_prob(const Mat& x, const StructuredResponse& y) const;
  std::vector<double> log_prob_grad(const Mat& x, const StructuredResponse& y) const;

  // KL[this(.|x) || ref(.|x)], exact closed form; >= 0.
  double kl_divergence(const ToyPolicy& ref, const Mat& x) const;
  // d/dparams(this) of the KL above, flattened.
  std::vector<double> kl_grad(const ToyPolicy& ref, const Mat& x) const;

  // Inclusion probabilities for a Bernoulli channel / outcome distribution
  // for the exclusive emotion head (tokens then "none").
  std::vector<double> channel_probs(Channel c, const Mat& x) const;

  // Flat parameter access (finite-difference tests, optimizer updates).
  double get_param(std::size_t i) const;
  void set_param(std::size_t i, double v);
  void add_scaled(const std::vector<double>& direction, double factor);

  // Logit setters for constructing specific test policies.
  void set_channel_weights(Channel c, const Mat& w, const Mat& b);

  const Vocabulary* vocab() const { return vocab_; }

 private:
  struct Head {
    Mat w;  // F x V
    Mat b;  // 1 x V
  };

  std::vector<double> emotion_distribution(const Mat& x) const;

  std::size_t feature_dim_;
  bool exclusive_emotion_;
  const Vocabulary* vocab_;
  std::array<Head, 3> heads_;
};

// Linear value model b_phi(x) = x * w + c used as the advantage baseline.
class ValueBaseline {
 public:
  explicit ValueBaseline(std::size_t feature_dim) : w_(feature_dim, 1), bias_(0.0) {}

  double predict(const Mat& x) const;
  // One gradient step of the squared error (predict(x) - target)^2.
  void update(const Mat& x, double target, double lr);

  const Mat& weights() const { return w_; }
  double bias() const { return bias_; }

 private:
  Mat w_;
  double bias_;
};

}  // namespace pqrl
