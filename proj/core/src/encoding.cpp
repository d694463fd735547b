#include "pqrl/encoding.hpp"

#include <cmath>

namespace pqrl {

CA2Chain::CA2Chain(std::size_t depth, const std::vector<std::size_t>& layer_dims,
                   std::size_t text_dim, std::size_t shared_dim, bool shared_kv, Rng& rng)
    : shared_dim_(shared_dim), shared_kv_(shared_kv) {
  if (depth == 0) throw ShapeError("ca2: chain depth must be >= 1");
  if (layer_dims.size() != depth) throw ShapeError("ca2: layer_dims size must equal depth");
  for (std::size_t i = 0; i < depth; ++i)
    projections.push_back(glorot_param("chain.proj" + std::to_string(i + 1), layer_dims[i],
                                       shared_dim, rng));
  wq = glorot_param("chain.wq", text_dim, shared_dim, rng);
  std::size_t kv_count = shared_kv ? 1 : depth;
  for (std::size_t i = 0; i < kv_count; ++i) {
    wks.push_back(glorot_param("chain.wk" + std::to_string(i + 1), shared_dim, shared_dim, rng));
    wvs.push_back(glorot_param("chain.wv" + std::to_string(i + 1), shared_dim, shared_dim, rng));
  }
}

std::vector<ParamTensor*> CA2Chain::params() {
  std::vector<ParamTensor*> ps;
  for (auto& p : projections) ps.push_back(&p);
  ps.push_back(&wq);
  for (auto& p : wks) ps.push_back(&p);
  for (auto& p : wvs) ps.push_back(&p);
  return ps;
}

QueryAggregator::QueryAggregator(std::size_t num_queries, std::size_t dim, Rng& rng) {
  if (num_queries == 0) throw ShapeError("aggregator: need at least one query row");
  queries = glorot_param("agg.queries", num_queries, dim, rng);
  wq = glorot_param("agg.wq", dim, dim, rng);
  wk = glorot_param("agg.wk", dim, dim, rng);
  wv = glorot_param("agg.wv", dim, dim, rng);
}

std::vector<ParamTensor*> QueryAggregator::params() { return {&queries, &wq, &wk, &wv}; }

WeightAdapter::WeightAdapter(std::size_t dim, std::size_t hidden, Rng& rng) {
  wq_text = glorot_param("adapter.wq_text", dim, dim, rng);
  wk_vis = glorot_param("adapter.wk_vis", dim, dim, rng);
  wv_vis = glorot_param("adapter.wv_vis", dim, dim, rng);
  ln_gain = const_param("adapter.ln_gain", 1, dim, 1.0);
  ln_bias = const_param("adapter.ln_bias", 1, dim, 0.0);
  w1 = glorot_param("adapter.w1", dim, hidden, rng);
  b1 = glorot_param("adapter.b1", 1, hidden, rng);
  w2 = glorot_param("adapter.w2", hidden, hidden, rng);
  b2 = glorot_param("adapter.b2", 1, hidden, rng);
  w_head = glorot_param("adapter.w_head", hidden, 1, rng);
  b_head = glorot_param("adapter.b_head", 1, 1, rng);
}

std::vector<ParamTensor*> WeightAdapter::params() {
  return {&wq_text, &wk_vis, &wv_vis, &ln_gain, &ln_bias, &w1, &b1, &w2, &b2, &w_head, &b_head};
}

NodeId project_layer(Tape& t, const LayerFeatureStack& stack, std::size_t index, CA2Chain& chain) {
  if (index < 1 || index > stack.depth())
    throw ShapeError("project_layer: index " + std::to_string(index) + " out of range 1.." +
                     std::to_string(stack.depth()));
  NodeId features = t.input(stack.layers[index - 1]);
  return t.matmul(features, t.param(chain.projections[index - 1]));
}

NodeId scaled_attention(Tape& t, NodeId query, NodeId kv_src, ParamTensor& wk, ParamTensor& wv) {
  NodeId k = t.matmul(kv_src, t.param(wk));
  NodeId v = t.matmul(kv_src, t.param(wv));
  double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(wk.value.cols()));
  NodeId logits = t.scale(t.matmul_nt(query, k), inv_sqrt_d);
  return t.matmul(t.row_softmax(logits), v);
}

NodeId cross_attention(Tape& t, NodeId q_src, NodeId kv_src, ParamTensor& wq, ParamTensor& wk,
                       ParamTensor& wv) {
  return scaled_attention(t, t.matmul(q_src, t.param(wq)), kv_src, wk, wv);
}

NodeId ca2_forward(Tape& t, NodeId prompt, const LayerFeatureStack& stack, CA2Chain& chain) {
  if (stack.depth() == 0) throw ShapeError("ca2_forward: empty layer stack");
  if (stack.depth() != chain.depth())
    throw ShapeError("ca2_forward: stack depth " + std::to_string(stack.depth()) +
                     " vs chain depth " + std::to_string(chain.depth()));
  NodeId out = cross_attention(t, prompt, project_layer(t, stack, 1, chain), chain.wq,
                               chain.wk(0), chain.wv(0));
  for (std::size_t i = 1; i < chain.depth(); ++i) {
    // The previous output is the query directly; no further query projection.
    out = scaled_attention(t, out, project_layer(t, stack, i + 1, chain), chain.wk(i),
                           chain.wv(i));
  }
  return out;
}

NodeId qformer_forward(Tape& t, NodeId prompt, NodeId visual, QueryAggregator& agg) {
  if (t.value(prompt).cols() != agg.dim())
    throw ShapeError("qformer_forward: prompt width " + t.value(prompt).shape_str() +
                     " vs query width " + std::to_string(agg.dim()));
  NodeId conditioned = t.broadcast_row_add(t.param(agg.queries), t.mean_pool_rows(prompt));
  return cross_attention(t, conditioned, visual, agg.wq, agg.wk, agg.wv);
}

NodeId adapter_score(Tape& t, NodeId visual, NodeId text, WeightAdapter& adapter) {
  const Mat& v = t.value(visual);
  const Mat& tx = t.value(text);
  if (v.cols() != tx.cols())
    throw ShapeError("adapter_score: width mismatch, visual " + v.shape_str() + " vs text " +
                     tx.shape_str());
  if (v.rows() != tx.rows())
    throw ShapeError("adapter_score: row mismatch, visual " + v.shape_str() + " vs text " +
                     tx.shape_str() + " (residual needs equal row counts)");
  NodeId q = t.matmul(text, t.param(adapter.wq_text));
  NodeId k = t.matmul(visual, t.param(adapter.wk_vis));
  NodeId vv = t.matmul(visual, t.param(adapter.wv_vis));
  double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(v.cols()));
  NodeId attn = t.row_softmax(t.scale(t.matmul_nt(q, k), inv_sqrt_d));
  NodeId aggregated = t.matmul(attn, vv);
  NodeId normed = t.layer_norm(t.add(visual, aggregated), t.param(adapter.ln_gain),
                               t.param(adapter.ln_bias));
  NodeId pooled = t.mean_pool_rows(normed);
  NodeId h1 = t.gelu(t.broadcast_row_add(t.matmul(pooled, t.param(adapter.w1)), t.param(adapter.b1)));
  NodeId h2 = t.gelu(t.broadcast_row_add(t.matmul(h1, t.param(adapter.w2)), t.param(adapter.b2)));
  return t.add(t.matmul(h2, t.param(adapter.w_head)), t.param(adapter.b_head));
}

double adapter_score_value(const Mat& visual, const Mat& text, WeightAdapter& adapter) {
  Tape t;
  NodeId s = adapter_score(t, t.input(visual), t.input(text), adapter);
  return t.value(s)(0, 0);
}

FusionWeights fuse(double s_general, double s_facial) {
  if (!std::isfinite(s_general) || !std::isfinite(s_facial))
    throw NumericRangeError("fuse: non-finite adapter score");
  double m = std::max(s_general, s_facial);
  double eg = std::exp(s_general - m);
  double ef = std::exp(s_facial - m);
  double wg = eg / (eg + ef);
  return FusionWeights{wg, 1.0 - wg};
}

NodeId fuse_node(Tape& t, NodeId s_general, NodeId s_facial) {
  return t.row_softmax(t.hstack(s_general, s_facial));
}

Mat fused_visual(const Mat& v_general, const Mat& v_facial, const FusionWeights& w) {
  if (!v_general.same_shape(v_facial))
    throw ShapeError("fused_visual: shape " + v_general.shape_str() + " vs " +
                     v_facial.shape_str());
  return add(scale(v_general, w.general), scale(v_facial, w.facial));
}

NodeId fused_visual_node(Tape& t, NodeId weights, NodeId v_general, NodeId v_facial) {
  return t.convex_blend(weights, v_general, v_facial);
}

EncoderStack::EncoderStack(const Dims& dims, Rng& rng)
    : chain(dims.depth, dims.layer_dims, dims.text_dim, dims.shared_dim, dims.shared_kv, rng),
      agg_general(dims.num_queries, dims.shared_dim, rng),
      agg_facial(dims.num_queries, dims.shared_dim, rng),
      adapter_general(dims.shared_dim, dims.adapter_hidden, rng),
      adapter_facial(dims.shared_dim, dims.adapter_hidden, rng),
      dims_(dims) {
  for (auto* p : agg_general.params()) p->name = "general." + p->name;
  for (auto* p : agg_facial.params()) p->name = "facial." + p->name;
  for (auto* p : adapter_general.params()) p->name = "general." + p->name;
  for (auto* p : adapter_facial.params()) p->name = "facial." + p->name;
}

EncoderStack::Forward EncoderStack::forward(Tape& t, const Mat& prompt,
                                            const LayerFeatureStack& stack,
                                            const Mat& general_tokens) {
  if (prompt.rows() != dims_.num_queries)
    throw ShapeError("encoder stack: prompt rows " + prompt.shape_str() +
                     " must equal query count " + std::to_string(dims_.num_queries) +
                     " (the prompt doubles as the adapters' text input)");
  NodeId p = t.input(prompt);
  NodeId g = t.input(general_tokens);
  NodeId facial_dense = ca2_forward(t, p, stack, chain);
  NodeId v_facial = qformer_forward(t, p, facial_dense, agg_facial);
  NodeId v_general = qformer_forward(t, p, g, agg_general);
  NodeId s_general = adapter_score(t, v_general, p, adapter_general);
  NodeId s_facial = adapter_score(t, v_facial, p, adapter_facial);
  NodeId w = fuse_node(t, s_general, s_facial);
  NodeId fused = fused_visual_node(t, w, v_general, v_facial);
  return Forward{fused, w, s_general, s_facial, v_general, v_facial};
}

NodeId EncoderStack::regression_loss(Tape& t, const Mat& prompt, const LayerFeatureStack& stack,
                                     const Mat& general_tokens, const Mat& target) {
  Forward f = forward(t, prompt, stack, general_tokens);
  NodeId diff = t.add(f.fused, t.scale(t.input(target), -1.0));
  return t.sum_squares(diff);
}

void EncoderStack::register_params(ParamRegistry& reg) {
  reg.add_all(chain.params(), "encoder");
  reg.add_all(agg_general.params(), "aggregator");
  reg.add_all(agg_facial.params(), "aggregator");
  reg.add_all(adapter_general.params(), "adapters");
  reg.add_all(adapter_facial.params(), "adapters");
}

std::vector<ParamTensor*> EncoderStack::params() {
  std::vector<ParamTensor*> ps;
  for (auto* p : chain.params()) ps.push_back(p);
  for (auto* p : agg_general.params()) ps.push_back(p);
  for (auto* p : agg_facial.params()) ps.push_back(p);
  for (auto* p : adapter_general.params()) ps.push_back(p);
  for (auto* p : adapter_facial.params()) ps.push_back(p);
  return ps;
}

}  // namespace pqrl
