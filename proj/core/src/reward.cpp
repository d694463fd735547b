#include "pqrl/reward.hpp"

#include <cmath>

namespace pqrl {

std::array<double, 3> ChannelWeights::weights() const {
  double m = std::max({logits[0], logits[1], logits[2]});
  std::array<double, 3> e;
  double z = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    e[i] = std::exp(logits[i] - m);
    z += e[i];
  }
  for (auto& v : e) v /= z;
  return e;
}

double channel_sim(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& truth) {
  if (pred.size() != truth.size())
    throw ShapeError("channel_sim: mask sizes differ (" + std::to_string(pred.size()) + " vs " +
                     std::to_string(truth.size()) + ")");
  std::size_t np = 0, nt = 0, inter = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    np += pred[i] != 0;
    nt += truth[i] != 0;
    inter += (pred[i] != 0 && truth[i] != 0);
  }
  if (np == 0 && nt == 0) return 1.0;
  if (np == 0 || nt == 0) return 0.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + nt);
}

double fine_grained_reward(const StructuredResponse& response, const StructuredResponse& truth,
                           const ChannelWeights& weights) {
  auto w = weights.weights();
  double r = 0.0;
  for (Channel c : kChannels)
    r += w[static_cast<std::size_t>(c)] * channel_sim(response.mask(c), truth.mask(c));
  return r;
}

ChannelWeights update_channel_weights(const ChannelWeights& w, const std::array<double, 3>& grad,
                                      double lr) {
  ChannelWeights out = w;
  for (std::size_t i = 0; i < 3; ++i) out.logits[i] -= lr * grad[i];
  return out;
}

}  // namespace pqrl
