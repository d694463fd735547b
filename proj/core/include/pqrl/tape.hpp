#pragma once

#include <cstdint>
#include <vector>

#include "pqrl/matrix.hpp"
#include "pqrl/param.hpp"

namespace pqrl {

using NodeId = std::int32_t;

// Reverse-mode tape over a small fixed set of matrix primitives. Nodes are
// recorded in application order; backward() walks them in exact reverse order
// and accumulates gradients of a scalar (1x1) root into every leaf, adding
// into the bound ParamTensor accumulators for param leaves.
//
// Single-threaded per tape; parameter values are read once at leaf creation,
// so a tape snapshot is immutable during its forward/backward pass.
class Tape {
 public:
  // Leaves.
  NodeId input(Mat v);                 // constant/input leaf (gradient still available)
  NodeId param(ParamTensor& p);        // leaf bound to a learnable tensor

  // Primitives (forward runs eagerly at record time).
  NodeId matmul(NodeId a, NodeId b);
  NodeId matmul_nt(NodeId a, NodeId b);            // A * B^T
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId row_softmax(NodeId a);
  NodeId layer_norm(NodeId x, NodeId gain, NodeId bias);  // row-wise, eps 1e-5
  NodeId gelu(NodeId a);                            // tanh approximation
  NodeId mean_pool_rows(NodeId a);                  // Lxd -> 1xd
  NodeId broadcast_row_add(NodeId x, NodeId row);   // Lxd + (1xd to every row)
  NodeId hstack(NodeId a, NodeId b);                // [A | B], equal row count
  NodeId convex_blend(NodeId w, NodeId a, NodeId b);  // w(0,0)*A + w(0,1)*B, w is 1x2
  NodeId sum(NodeId a);                             // -> 1x1
  NodeId sum_squares(NodeId a);                     // -> 1x1

  const Mat& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Mat& grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  // Root must be 1x1 (ContractError otherwise). Accumulates into bound params.
  void backward(NodeId root);

  std::size_t node_count() const { return nodes_.size(); }

  static constexpr double kLayerNormEps = 1e-5;

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kMatMul,
    kMatMulNT,
    kAdd,
    kScale,
    kRowSoftmax,
    kLayerNorm,
    kGelu,
    kMeanPoolRows,
    kBroadcastRowAdd,
    kHStack,
    kConvexBlend,
    kSum,
    kSumSquares,
  };

  struct Node {
    Op op;
    NodeId a = -1, b = -1, c = -1;
    double scalar = 0.0;
    Mat value;
    Mat grad;
    Mat aux;        // layer_norm: normalized rows; row_softmax uses value itself
    Mat aux2;       // layer_norm: per-row inverse std (Lx1)
    ParamTensor* bound = nullptr;
  };

  NodeId push(Node n);
  Node& at(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& at(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }

  std::vector<Node> nodes_;
};

// Elementwise tanh-approximation GELU and its exact derivative.
double gelu_scalar(double x);
double gelu_grad_scalar(double x);

}  // namespace pqrl
