#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pqrl/matrix.hpp"
#include "pqrl/rng.hpp"

namespace pqrl {

// A learnable tensor: value plus a same-shape gradient accumulator.
// Gradients must be zeroed before each backward pass (zero_grad / registry).
struct ParamTensor {
  std::string name;
  Mat value;
  Mat grad;

  ParamTensor() = default;
  ParamTensor(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
    grad = Mat(value.rows(), value.cols());
  }

  void zero_grad() { grad.fill(0.0); }

  // Plain gradient-descent step on the accumulated gradient.
  void sgd_step(double lr) {
    for (std::size_t i = 0; i < value.size(); ++i)
      value.at_flat(i) -= lr * grad.at_flat(i);
  }
};

// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
inline ParamTensor glorot_param(const std::string& name, std::size_t rows, std::size_t cols,
                                Rng& rng) {
  double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return ParamTensor(name, Mat::uniform(rows, cols, -a, a, rng));
}

inline ParamTensor const_param(const std::string& name, std::size_t rows, std::size_t cols,
                               double fill) {
  return ParamTensor(name, Mat(rows, cols, fill));
}

// Non-owning registry; groups drive stage freezing and checkpoint layout.
class ParamRegistry {
 public:
  struct Entry {
    ParamTensor* param;
    std::string group;
  };

  void add(ParamTensor& p, const std::string& group) { entries_.push_back({&p, group}); }
  void add_all(std::vector<ParamTensor*> ps, const std::string& group) {
    for (auto* p : ps) add(*p, group);
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  void zero_grad() {
    for (auto& e : entries_) e.param->zero_grad();
  }

  std::vector<std::string> groups() const {
    std::vector<std::string> gs;
    for (const auto& e : entries_) {
      bool seen = false;
      for (const auto& g : gs) seen = seen || g == e.group;
      if (!seen) gs.push_back(e.group);
    }
    return gs;
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace pqrl
