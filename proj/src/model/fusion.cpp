#include "gazefuse/model/fusion.hpp"

#include <cmath>
#include <string>

#include "gazefuse/error.hpp"
#include "gazefuse/ops.hpp"
#include "init.hpp"

namespace gazefuse {

namespace {

constexpr double kEmbeddingStd = 0.02;

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const ParameterStore<T>& p, const std::string& name) {
  return ops::add(ops::matmul(x, p.get(name + ".weight")), p.get(name + ".bias"));
}

template <typename T>
BasicTensor<T> norm(const BasicTensor<T>& x, const ParameterStore<T>& p, const std::string& name) {
  return ops::layer_norm(x, p.get(name + ".gamma"), p.get(name + ".beta"));
}

template <typename T>
void add_linear(ParameterStore<T>& p, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  p.add(name + ".weight", init::fan_uniform<T>({in, out}, in, rng));
  p.add(name + ".bias", init::constant<T>({out}, T{0}));
}

template <typename T>
void add_norm(ParameterStore<T>& p, const std::string& name, std::size_t width) {
  p.add(name + ".gamma", init::constant<T>({width}, T{1}));
  p.add(name + ".beta", init::constant<T>({width}, T{0}));
}

}  // namespace

template <typename T>
BasicFusionModel<T>::BasicFusionModel(FusionModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed, "init");
  const std::size_t e = config_.embed_dim;
  add_linear(params_, "proj", config_.feature_dim_in, e, rng);
  params_.add("cls", init::normal<T>({1, e}, kEmbeddingStd, rng));
  if (config_.use_positional_embedding) {
    params_.add("pos", init::normal<T>({config_.sequence_length(), e}, kEmbeddingStd, rng));
  }
  if (config_.use_view_segment_embedding) {
    params_.add("segment", init::normal<T>({2, e}, kEmbeddingStd, rng));
    segment_ids_.assign(2 * config_.tokens_per_view, 0);
    std::fill(segment_ids_.begin() + static_cast<std::ptrdiff_t>(config_.tokens_per_view), segment_ids_.end(), 1);
  }
  const std::size_t ffn = config_.feedforward_multiplier * e;
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
    const std::string prefix = "encoder." + std::to_string(l);
    add_norm(params_, prefix + ".norm1", e);
    for (const char* proj : {"q", "k", "v", "out"}) add_linear(params_, prefix + ".attn." + proj, e, e, rng);
    add_norm(params_, prefix + ".norm2", e);
    add_linear(params_, prefix + ".ffn.fc1", e, ffn, rng);
    add_linear(params_, prefix + ".ffn.fc2", ffn, e, rng);
  }
  add_norm(params_, "encoder.norm", e);
  const auto& sizes = config_.head_layer_sizes;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const std::string prefix = "head." + std::to_string(i);
    add_linear(params_, prefix, sizes[i], sizes[i + 1], rng);
    if (i + 2 < sizes.size()) add_norm(params_, prefix + ".norm", sizes[i + 1]);
  }
}

template <typename T>
BasicTensor<T> BasicFusionModel<T>::project(const BasicTensor<T>& tokens) const {
  if (tokens.rank() != 2 || tokens.dim(0) != config_.tokens_per_view || tokens.dim(1) != config_.feature_dim_in) {
    throw DimensionError("fusion model expects " + std::to_string(config_.tokens_per_view) + " tokens of width " +
                         std::to_string(config_.feature_dim_in) + " per view, got " + shape_to_string(tokens.shape()));
  }
  return linear(tokens, params_, "proj");
}

template <typename T>
BasicTensor<T> BasicFusionModel<T>::encoder_layer(const BasicTensor<T>& x, std::size_t layer,
                                                  const ForwardContext& ctx) const {
  const std::string prefix = "encoder." + std::to_string(layer);
  const std::size_t heads = config_.attention_heads;
  const std::size_t head_dim = config_.embed_dim / heads;
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim)));

  const auto h = norm(x, params_, prefix + ".norm1");
  const auto q = linear(h, params_, prefix + ".attn.q");
  const auto k = linear(h, params_, prefix + ".attn.k");
  const auto v = linear(h, params_, prefix + ".attn.v");
  std::vector<BasicTensor<T>> head_outputs;
  head_outputs.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    const auto qh = ops::slice(q, 1, i * head_dim, head_dim);
    const auto kh = ops::slice(k, 1, i * head_dim, head_dim);
    const auto vh = ops::slice(v, 1, i * head_dim, head_dim);
    auto weights = ops::softmax(ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_sqrt), 1);
    weights = ops::dropout(weights, config_.dropout, ctx.train, ctx.dropout_rng);
    head_outputs.push_back(ops::matmul(weights, vh));
  }
  const auto attended = linear(ops::concat(head_outputs, 1), params_, prefix + ".attn.out");
  const auto mid = ops::add(x, attended);

  const auto h2 = norm(mid, params_, prefix + ".norm2");
  auto ff = linear(ops::relu(linear(h2, params_, prefix + ".ffn.fc1")), params_, prefix + ".ffn.fc2");
  ff = ops::dropout(ff, config_.dropout, ctx.train, ctx.dropout_rng);
  return ops::add(mid, ff);
}

template <typename T>
BasicTensor<T> BasicFusionModel<T>::forward(const BasicTensor<T>& view_a, const BasicTensor<T>& view_b,
                                            const ForwardContext& ctx) const {
  auto views = ops::concat<T>({project(view_a), project(view_b)}, 0);
  if (config_.use_view_segment_embedding) {
    views = ops::add(views, ops::embedding_lookup(params_.get("segment"), segment_ids_));
  }
  auto x = ops::concat<T>({params_.get("cls"), views}, 0);
  if (config_.use_positional_embedding) x = ops::add(x, params_.get("pos"));
  for (std::size_t l = 0; l < config_.encoder_layers; ++l) x = encoder_layer(x, l, ctx);
  x = norm(x, params_, std::string("encoder.norm"));

  auto h = ops::slice(x, 0, 0, 1);
  const auto& sizes = config_.head_layer_sizes;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const std::string prefix = "head." + std::to_string(i);
    h = linear(h, params_, prefix);
    if (i + 2 < sizes.size()) {
      h = ops::relu(norm(h, params_, prefix + ".norm"));
      h = ops::dropout(h, config_.dropout, ctx.train, ctx.dropout_rng);
    }
  }
  return ops::reshape(h, {1});
}

template class BasicFusionModel<float>;
template class BasicFusionModel<double>;

}  // namespace gazefuse
