#pragma once

#include <cstddef>
#include <vector>

#include "pqrl/param.hpp"
#include "pqrl/tape.hpp"

namespace pqrl {

// Synthetic surrogate for per-block encoder outputs: layer i is P_i x D_i.
// (Temporal axis flattened into rows; desk-scale stacks use T = 1.)
struct LayerFeatureStack {
  std::vector<Mat> layers;

  std::size_t depth() const { return layers.size(); }
};

// Progressive cross-attention chain. Step 1 projects the prompt through wq;
// every later step uses the previous output directly as the query. Keys and
// values are per-step by default; shared_kv reuses step 0's pair everywhere
// (the equations reuse the symbols, so both readings are available).
class CA2Chain {
 public:
  CA2Chain(std::size_t depth, const std::vector<std::size_t>& layer_dims, std::size_t text_dim,
           std::size_t shared_dim, bool shared_kv, Rng& rng);

  std::size_t depth() const { return projections.size(); }
  std::size_t shared_dim() const { return shared_dim_; }
  bool shared_kv() const { return shared_kv_; }

  ParamTensor& wk(std::size_t step) { return shared_kv_ ? wks[0] : wks[step]; }
  ParamTensor& wv(std::size_t step) { return shared_kv_ ? wvs[0] : wvs[step]; }

  std::vector<ParamTensor*> params();

  std::vector<ParamTensor> projections;  // W_i: D_i x D
  ParamTensor wq;                        // first-step query projection, d_text x D
  std::vector<ParamTensor> wks;          // D x D per step (or a single shared one)
  std::vector<ParamTensor> wvs;

 private:
  std::size_t shared_dim_;
  bool shared_kv_;
};

// M learnable query rows conditioned by the mean-pooled prompt, then one
// cross-attention block over the visual tokens.
class QueryAggregator {
 public:
  QueryAggregator(std::size_t num_queries, std::size_t dim, Rng& rng);

  std::size_t num_queries() const { return queries.value.rows(); }
  std::size_t dim() const { return queries.value.cols(); }
  std::vector<ParamTensor*> params();

  ParamTensor queries;  // M x D
  ParamTensor wq, wk, wv;
};

// Text-conditioned scalar scoring head: Q from text, K/V from visual,
// residual layer norm, mean pool, two GELU layers, affine scalar output.
class WeightAdapter {
 public:
  WeightAdapter(std::size_t dim, std::size_t hidden, Rng& rng);

  std::size_t dim() const { return wq_text.value.rows(); }
  std::vector<ParamTensor*> params();

  ParamTensor wq_text, wk_vis, wv_vis;  // d x d
  ParamTensor ln_gain, ln_bias;         // 1 x d
  ParamTensor w1, b1;                   // d x h, 1 x h
  ParamTensor w2, b2;                   // h x h, 1 x h
  ParamTensor w_head, b_head;           // h x 1, 1 x 1
};

// Two-way softmax weights over the general/facial streams; components sum
// to 1 exactly (the second is computed as the complement).
struct FusionWeights {
  double general;
  double facial;
};

// --- operations -----------------------------------------------------------

// Layer features projected into the shared embedding space (index is 1-based).
NodeId project_layer(Tape& t, const LayerFeatureStack& stack, std::size_t index, CA2Chain& chain);

// Attention with an explicit query-side projection.
NodeId cross_attention(Tape& t, NodeId q_src, NodeId kv_src, ParamTensor& wq, ParamTensor& wk,
                       ParamTensor& wv);
// Attention with the query used directly (chain steps >= 2).
NodeId scaled_attention(Tape& t, NodeId query, NodeId kv_src, ParamTensor& wk, ParamTensor& wv);

NodeId ca2_forward(Tape& t, NodeId prompt, const LayerFeatureStack& stack, CA2Chain& chain);

NodeId qformer_forward(Tape& t, NodeId prompt, NodeId visual, QueryAggregator& agg);

NodeId adapter_score(Tape& t, NodeId visual, NodeId text, WeightAdapter& adapter);
double adapter_score_value(const Mat& visual, const Mat& text, WeightAdapter& adapter);

FusionWeights fuse(double s_general, double s_facial);
NodeId fuse_node(Tape& t, NodeId s_general, NodeId s_facial);  // 1x2 weights

Mat fused_visual(const Mat& v_general, const Mat& v_facial, const FusionWeights& w);
NodeId fused_visual_node(Tape& t, NodeId weights, NodeId v_general, NodeId v_facial);

// --- composed stack -------------------------------------------------------

// Full hierarchy: facial stream = aggregator over the CA^2 chain output,
// general stream = aggregator over raw general tokens, adapters score both
// against the prompt (which doubles as the text representation, so the
// prompt row count must equal the aggregators' query count).
class EncoderStack {
 public:
  struct Dims {
    std::size_t depth = 3;
    std::vector<std::size_t> layer_dims = {6, 8, 10};
    std::size_t text_dim = 8;
    std::size_t shared_dim = 8;
    std::size_t num_queries = 8;
    std::size_t adapter_hidden = 8;
    bool shared_kv = false;
  };

  EncoderStack(const Dims& dims, Rng& rng);

  struct Forward {
    NodeId fused;
    NodeId weights;  // 1x2
    NodeId score_general;
    NodeId score_facial;
    NodeId v_general;
    NodeId v_facial;
  };

  Forward forward(Tape& t, const Mat& prompt, const LayerFeatureStack& stack,
                  const Mat& general_tokens);

  // Scalar training loss: sum of squares of (fused - target).
  NodeId regression_loss(Tape& t, const Mat& prompt, const LayerFeatureStack& stack,
                         const Mat& general_tokens, const Mat& target);

  void register_params(ParamRegistry& reg);
  std::vector<ParamTensor*> params();

  const Dims& dims() const { return dims_; }

  CA2Chain chain;
  QueryAggregator agg_general;
  QueryAggregator agg_facial;
  WeightAdapter adapter_general;
  WeightAdapter adapter_facial;

 private:
  Dims dims_;
};

}  // namespace pqrl
