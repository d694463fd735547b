#include "pqrl/policy.hpp"

#include <cmath>
#include <limits>

#include "pqrl/errors.hpp"

namespace pqrl {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double log_sigmoid(double z) { return -softplus(-z); }

}  // namespace

ToyPolicy::ToyPolicy(std::size_t feature_dim, const Vocabulary& vocab, bool exclusive_emotion)
    : feature_dim_(feature_dim), exclusive_emotion_(exclusive_emotion), vocab_(&vocab) {
  for (Channel c : kChannels) {
    std::size_t v = vocab.channel_size(c);
    if (c == Channel::kEmotion && exclusive_emotion) v += 1;  // trailing "none" outcome
    heads_[static_cast<std::size_t>(c)] = Head{Mat(feature_dim, v), Mat(1, v)};
  }
}

std::size_t ToyPolicy::param_count() const {
  std::size_t n = 0;
  for (const auto& h : heads_) n += h.w.size() + h.b.size();
  return n;
}

std::vector<double> ToyPolicy::channel_probs(Channel c, const Mat& x) const {
  const Head& h = heads_[static_cast<std::size_t>(c)];
  if (x.rows() != 1 || x.cols() != feature_dim_)
    throw ShapeError("policy: features must be 1x" + std::to_string(feature_dim_) + ", got " +
                     x.shape_str());
  if (c == Channel::kEmotion && exclusive_emotion_) return emotion_distribution(x);
  std::vector<double> p(h.w.cols());
  for (std::size_t j = 0; j < h.w.cols(); ++j) {
    double z = h.b(0, j);
    for (std::size_t f = 0; f < feature_dim_; ++f) z += x(0, f) * h.w(f, j);
    p[j] = sigmoid(z);
  }
  return p;
}

std::vector<double> ToyPolicy::emotion_distribution(const Mat& x) const {
  const Head& h = heads_[2];
  std::vector<double> z(h.w.cols());
  double m = -1e300;
  for (std::size_t j = 0; j < h.w.cols(); ++j) {
    z[j] = h.b(0, j);
    for (std::size_t f = 0; f < feature_dim_; ++f) z[j] += x(0, f) * h.w(f, j);
    m = std::max(m, z[j]);
  }
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return z;
}

StructuredResponse ToyPolicy::sample(const Mat& x, Rng& rng) const {
  StructuredResponse r = StructuredResponse::empty(*vocab_);
  for (Channel c : {Channel::kAppearance, Channel::kAction}) {
    auto p = channel_probs(c, x);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (rng.bernoulli(p[j])) r.set(c, j);
  }
  if (exclusive_emotion_) {
    auto p = emotion_distribution(x);
    double u = rng.uniform01();
    double acc = 0.0;
    std::size_t pick = p.size() - 1;
    for (std::size_t j = 0; j < p.size(); ++j) {
      acc += p[j];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    if (pick < vocab_->channel_size(Channel::kEmotion)) r.set(Channel::kEmotion, pick);
  } else {
    auto p = channel_probs(Channel::kEmotion, x);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (rng.bernoulli(p[j])) r.set(Channel::kEmotion, j);
  }
  return r;
}

std::vector<StructuredResponse> ToyPolicy::sample_candidates(const Mat& x, std::size_t k,
                                                             Rng& rng) const {
  std::vector<StructuredResponse> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(sample(x, rng));
  return out;
}

StructuredResponse ToyPolicy::greedy(const Mat& x) const {
  StructuredResponse r = StructuredResponse::empty(*vocab_);
  for (Channel c : {Channel::kAppearance, Channel::kAction}) {
    auto p = channel_probs(c, x);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > 0.5) r.set(c, j);
  }
  if (exclusive_emotion_) {
    auto p = emotion_distribution(x);
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.size(); ++j)
      if (p[j] > p[best]) best = j;
    if (best < vocab_->channel_size(Channel::kEmotion)) r.set(Channel::kEmotion, best);
  } else {
    auto p = channel_probs(Channel::kEmotion, x);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p[j] > 0.5) r.set(Channel::kEmotion, j);
  }
  return r;
}

double ToyPolicy::log_prob(const Mat& x, const StructuredResponse& y) const {
  double lp = 0.0;
  for (Channel c : kChannels) {
    const Head& h = heads_[static_cast<std::size_t>(c)];
    if (c == Channel::kEmotion && exclusive_emotion_) {
      std::size_t ve = vocab_->channel_size(c);
      std::size_t picked = ve;  // "none"
      std::size_t n = 0;
      for (std::size_t j = 0; j < ve; ++j)
        if (y.has(c, j)) {
          picked = j;
          ++n;
        }
      if (n > 1)
        return -std::numeric_limits<double>::infinity();  // unreachable under the mask
      auto p = emotion_distribution(x);
      lp += std::log(p[picked]);
      continue;
    }
    for (std::size_t j = 0; j < h.w.cols(); ++j) {
      double z = h.b(0, j);
      for (std::size_t f = 0; f < feature_dim_; ++f) z += x(0, f) * h.w(f, j);
      lp += y.has(c, j) ? log_sigmoid(z) : log_sigmoid(-z);
    }
  }
  return lp;
}

std::vector<double> ToyPolicy::log_prob_grad(const Mat& x, const StructuredResponse& y) const {
  std::vector<double> g(param_count(), 0.0);
  std::size_t off = 0;
  for (Channel c : kChannels) {
    const Head& h = heads_[static_cast<std::size_t>(c)];
    std::size_t v = h.w.cols();
    std::vector<double> dz(v);
    if (c == Channel::kEmotion && exclusive_emotion_) {
      auto p = emotion_distribution(x);
      std::size_t ve = vocab_->channel_size(c);
      std::size_t picked = ve;
      for (std::size_t j = 0; j < ve; ++j)
        if (y.has(c, j)) picked = j;
      for (std::size_t j = 0; j < v; ++j) dz[j] = (j == picked ? 1.0 : 0.0) - p[j];
    } else {
      auto p = channel_probs(c, x);
      for (std::size_t j = 0; j < v; ++j) dz[j] = (y.has(c, j) ? 1.0 : 0.0) - p[j];
    }
    for (std::size_t f = 0; f < feature_dim_; ++f)
      for (std::size_t j = 0; j < v; ++j) g[off + f * v + j] = x(0, f) * dz[j];
    for (std::size_t j = 0; j < v; ++j) g[off + feature_dim_ * v + j] = dz[j];
    off += v * (feature_dim_ + 1);
  }
  return g;
}

double ToyPolicy::kl_divergence(const ToyPolicy& ref, const Mat& x) const {
  double kl = 0.0;
  for (Channel c : kChannels) {
    if (c == Channel::kEmotion && exclusive_emotion_) {
      auto p = emotion_distribution(x);
      auto q = ref.emotion_distribution(x);
      for (std::size_t j = 0; j < p.size(); ++j) kl += p[j] * (std::log(p[j]) - std::log(q[j]));
      continue;
    }
    auto p = channel_probs(c, x);
    auto q = ref.channel_probs(c, x);
    for (std::size_t j = 0; j < p.size(); ++j) {
      kl += p[j] * (std::log(p[j]) - std::log(q[j]));
      kl += (1.0 - p[j]) * (std::log1p(-p[j]) - std::log1p(-q[j]));
    }
  }
  return kl;
}

std::vector<double> ToyPolicy::kl_grad(const ToyPolicy& ref, const Mat& x) const {
  std::vector<double> g(param_count(), 0.0);
  std::size_t off = 0;
  for (Channel c : kChannels) {
    const Head& h = heads_[static_cast<std::size_t>(c)];
    std::size_t v = h.w.cols();
    std::vector<double> dz(v);
    if (c == Channel::kEmotion && exclusive_emotion_) {
      auto p = emotion_distribution(x);
      auto q = ref.emotion_distribution(x);
      double kl_c = 0.0;
      for (std::size_t j = 0; j < v; ++j) kl_c += p[j] * (std::log(p[j]) - std::log(q[j]));
      for (std::size_t j = 0; j < v; ++j)
        dz[j] = p[j] * ((std::log(p[j]) - std::log(q[j])) - kl_c);
    } else {
      auto p = channel_probs(c, x);
      auto q = ref.channel_probs(c, x);
      for (std::size_t j = 0; j < v; ++j) {
        double t = (std::log(p[j]) - std::log(q[j])) - (std::log1p(-p[j]) - std::log1p(-q[j]));
        dz[j] = t * p[j] * (1.0 - p[j]);
      }
    }
    for (std::size_t f = 0; f < feature_dim_; ++f)
      for (std::size_t j = 0; j < v; ++j) g[off + f * v + j] = x(0, f) * dz[j];
    for (std::size_t j = 0; j < v; ++j) g[off + feature_dim_ * v + j] = dz[j];
    off += v * (feature_dim_ + 1);
  }
  return g;
}

double ToyPolicy::get_param(std::size_t i) const {
  for (const auto& h : heads_) {
    if (i < h.w.size()) return h.w.at_flat(i);
    i -= h.w.size();
    if (i < h.b.size()) return h.b.at_flat(i);
    i -= h.b.size();
  }
  throw ContractError("policy: parameter index out of range");
}

void ToyPolicy::set_param(std::size_t i, double v) {
  for (auto& h : heads_) {
    if (i < h.w.size()) {
      h.w.at_flat(i) = v;
      return;
    }
    i -= h.w.size();
    if (i < h.b.size()) {
      h.b.at_flat(i) = v;
      return;
    }
    i -= h.b.size();
  }
  throw ContractError("policy: parameter index out of range");
}

void ToyPolicy::add_scaled(const std::vector<double>& direction, double factor) {
  if (direction.size() != param_count())
    throw ContractError("policy: direction length " + std::to_string(direction.size()) +
                        " vs parameter count " + std::to_string(param_count()));
  std::size_t i = 0;
  for (auto& h : heads_) {
    for (std::size_t k = 0; k < h.w.size(); ++k) h.w.at_flat(k) += factor * direction[i++];
    for (std::size_t k = 0; k < h.b.size(); ++k) h.b.at_flat(k) += factor * direction[i++];
  }
}

void ToyPolicy::set_channel_weights(Channel c, const Mat& w, const Mat& b) {
  Head& h = heads_[static_cast<std::size_t>(c)];
  if (!w.same_shape(h.w) || !b.same_shape(h.b))
    throw ShapeError("policy: head shapes are " + h.w.shape_str() + " and " + h.b.shape_str());
  h.w = w;
  h.b = b;
}

double ValueBaseline::predict(const Mat& x) const {
  double y = bias_;
  for (std::size_t f = 0; f < w_.rows(); ++f) y += x(0, f) * w_(f, 0);
  return y;
}

void ValueBaseline::update(const Mat& x, double target, double lr) {
  if (!std::isfinite(target)) throw NumericRangeError("baseline: non-finite target");
  double err2 = 2.0 * (predict(x) - target);
  for (std::size_t f = 0; f < w_.rows(); ++f) w_(f, 0) -= lr * err2 * x(0, f);
  bias_ -= lr * err2;
}

}  // namespace pqrl
