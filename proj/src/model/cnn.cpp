#include "gazefuse/model/cnn.hpp"

#include <string>

#include "gazefuse/error.hpp"
#include "gazefuse/ops.hpp"
#include "init.hpp"

namespace gazefuse {

template <typename T>
BasicCnnBaseline<T>::BasicCnnBaseline(BaselineCnnConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed, "init");
  for (const char* s : {"stream_a", "stream_b"}) {
    std::size_t in = config_.in_channels;
    for (std::size_t b = 0; b < 3; ++b) {
      const std::string prefix = std::string(s) + ".block" + std::to_string(b) + ".conv";
      const std::size_t k = config_.kernel_sizes[b];
      const std::size_t out = config_.block_channels[b];
      params_.add(prefix + ".weight", init::fan_uniform<T>({out, in, k, k}, in * k * k, rng));
      params_.add(prefix + ".bias", init::constant<T>({out}, T{0}));
      in = out;
    }
  }
  std::size_t in = 2 * config_.block_channels.back();
  for (std::size_t i = 0; i < config_.fc_layer_sizes.size(); ++i) {
    const std::string prefix = "fc." + std::to_string(i);
    const std::size_t out = config_.fc_layer_sizes[i];
    params_.add(prefix + ".weight", init::fan_uniform<T>({in, out}, in, rng));
    params_.add(prefix + ".bias", init::constant<T>({out}, T{0}));
    in = out;
  }
}

template <typename T>
BasicTensor<T> BasicCnnBaseline<T>::stream(const BasicTensor<T>& image, const char* name) const {
  if (image.rank() != 3 || image.dim(0) != config_.in_channels) {
    throw DimensionError("cnn baseline expects a " + std::to_string(config_.in_channels) +
                         "-channel (c x h x w) raster, got " + shape_to_string(image.shape()));
  }
  auto x = image;
  for (std::size_t b = 0; b < 3; ++b) {
    const std::string prefix = std::string(name) + ".block" + std::to_string(b) + ".conv";
    x = ops::conv2d(x, params_.get(prefix + ".weight"), params_.get(prefix + ".bias"), 1,
                    config_.kernel_sizes[b] / 2);
    x = ops::relu(x);
    if (x.dim(1) < config_.pool_size || x.dim(2) < config_.pool_size) {
      throw ConfigError("cnn baseline: spatial extent " + shape_to_string(x.shape()) + " underflows the " +
                        std::to_string(config_.pool_size) + "x" + std::to_string(config_.pool_size) +
                        " pooling window in block " + std::to_string(b));
    }
    x = ops::max_pool2d(x, config_.pool_size, config_.pool_size);
  }
  x = ops::adaptive_avg_pool2d(x, 1, 1);
  return ops::reshape(x, {1, x.dim(0)});
}

template <typename T>
BasicTensor<T> BasicCnnBaseline<T>::forward(const BasicTensor<T>& view_a, const BasicTensor<T>& view_b,
                                            const ForwardContext& ctx) const {
  auto h = ops::concat<T>({stream(view_a, "stream_a"), stream(view_b, "stream_b")}, 1);
  const auto& sizes = config_.fc_layer_sizes;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::string prefix = "fc." + std::to_string(i);
    h = ops::add(ops::matmul(h, params_.get(prefix + ".weight")), params_.get(prefix + ".bias"));
    if (i + 1 < sizes.size()) {
      h = ops::dropout(ops::relu(h), config_.dropout, ctx.train, ctx.dropout_rng);
    }
  }
  return ops::reshape(h, {1});
}

template class BasicCnnBaseline<float>;
template class BasicCnnBaseline<double>;

}  // namespace gazefuse
