#pragma once

#include <array>

#include "pqrl/vocab.hpp"

namespace pqrl {

// Learnable per-channel mixing weights kept on the probability simplex by
// construction: three logits, weights = softmax(logits).
struct ChannelWeights {
  std::array<double, 3> logits = {0.0, 0.0, 0.0};

  std::array<double, 3> weights() const;
  double weight(Channel c) const { return weights()[static_cast<std::size_t>(c)]; }

  static ChannelWeights uniform() { return ChannelWeights{}; }
};

// Set-F1 similarity between predicted and ground-truth token sets:
// 2|p∩t| / (|p|+|t|); both empty -> 1, exactly one empty -> 0.
double channel_sim(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& truth);

// Weighted sum of per-channel similarities; lands in [0, 1].
double fine_grained_reward(const StructuredResponse& response, const StructuredResponse& truth,
                           const ChannelWeights& weights);

// One descent step on the logits; weights stay normalized by construction.
ChannelWeights update_channel_weights(const ChannelWeights& w, const std::array<double, 3>& grad,
                                      double lr);

}  // namespace pqrl
