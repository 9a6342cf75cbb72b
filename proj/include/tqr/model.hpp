#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tqr/quantize.hpp"
#include "tqr/rng.hpp"
#include "tqr/tape.hpp"

namespace tqr {

enum class LayerKind {
  Dense,
  Conv2d,
  DepthwiseConv2d,
  SeparableConv2d,
  BatchNorm,
  Relu,
  Sigmoid,
  ResidualAdd,
  Flatten,
  GlobalAvgPool,
  SoftmaxOut,
};

std::string layer_kind_name(LayerKind k);

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int units = 0;    // dense width
  int kernel = 3;   // conv kernel side (odd)
  int channels = 0; // conv output channels
  int stride = 1;
  bool same_pad = true;
  int residual_from = -1; // earlier layer whose output residual_add consumes
  QuantizerSpec weight_quantizer;
  QuantizerSpec activation_quantizer;
};

struct ParamCounts {
  long total = 0;
  long trainable = 0;
  long non_trainable = 0;
};

enum class ForwardMode { FullPrecision, Quantized };

// batch-norm statistics source for a forward pass
enum class BnMode {
  Batch,       // current batch statistics, differentiable through them
  Moving,      // stored moving statistics (inference)
  FrozenBatch, // current batch statistics treated as constants
};

struct ForwardOptions {
  ForwardMode mode = ForwardMode::Quantized;
  BnMode bn = BnMode::Moving;
  bool update_moving = false; // fold batch statistics into moving stats
  long step = 0;
  const StochasticSchedule* schedule = nullptr;
  RngStream* rng = nullptr;  // absent => stochastic quantizers run deterministically
  double output_noise = 0.0; // stddev of additive noise on each layer output
};

struct LayerTrace {
  NodeId input = -1;
  NodeId output = -1;
  std::vector<NodeId> effective; // weight nodes as consumed (post-quantization)
  NodeId bn_inv = -1;            // batch-norm 1/sqrt(var+eps) node
};

struct ForwardRecord {
  NodeId input = -1;
  NodeId logits = -1;
  std::vector<NodeId> params;    // node per trainable tensor, in trainable() order
  std::vector<LayerTrace> layers;
};

// Feed-forward network over the layer kinds above. Master parameters are full
// precision; quantization is applied functionally during forward passes.
// Kernel/matrix weights pass through the layer's weight quantizer; biases and
// batch-norm affine parameters stay full precision.
class Model {
 public:
  Model() = default;
  Model(std::vector<int> input_shape, int classes, std::vector<LayerSpec> layers,
        std::uint64_t seed);

  ForwardRecord forward(Tape& tape, NodeId x, const ForwardOptions& opt);

  // single-call logits for a (batch, ...) input, discarding the tape
  Tensor predict(const Tensor& x, ForwardMode mode = ForwardMode::Quantized) const;

  int num_layers() const { return int(layers_.size()); }
  const LayerSpec& layer_spec(int i) const { return layers_[std::size_t(i)].spec; }
  const std::vector<int>& layer_input_shape(int i) const { return layers_[std::size_t(i)].in_shape; }
  const std::vector<int>& layer_output_shape(int i) const { return layers_[std::size_t(i)].out_shape; }
  std::vector<Tensor>& layer_weights(int i) { return layers_[std::size_t(i)].weights; }
  const std::vector<Tensor>& layer_weights(int i) const { return layers_[std::size_t(i)].weights; }
  std::vector<Tensor>& layer_stats(int i) { return layers_[std::size_t(i)].stats; }
  const std::vector<Tensor>& layer_stats(int i) const { return layers_[std::size_t(i)].stats; }

  // flat views over trainable tensors; order matches ForwardRecord::params
  std::vector<Tensor*> trainable();
  std::vector<const Tensor*> trainable() const;

  const std::vector<int>& input_shape() const { return input_shape_; }
  int classes() const { return classes_; }
  std::uint64_t seed() const { return seed_; }

  ParamCounts count_params() const;
  std::size_t flash_footprint() const;

  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  struct LayerState {
    LayerSpec spec;
    std::vector<int> in_shape, out_shape; // without the batch dimension
    std::vector<Tensor> weights;          // trainable
    std::vector<Tensor> stats;            // batch-norm moving mean/var
  };

  void build_shapes_and_params(RngStream& rng);
  kernels::ConvShape conv_descriptor(const LayerState& l, int batch) const;

  std::vector<int> input_shape_;
  int classes_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<LayerState> layers_;
};

// Stabilized row softmax with logits divided by T; throws for T <= 0.
Tensor softmax_with_temperature(const Tensor& logits, double T);

// row argmax, first maximum wins
int argmax_row(const Tensor& logits, int row);

// architecture presets
std::vector<LayerSpec> preset_conv_small(int classes);
std::vector<LayerSpec> preset_mlp_small(int hidden, int classes);

// set the weight/activation quantizer on every parametric layer (dense/conv)
void apply_weight_quantizer(std::vector<LayerSpec>& layers, const QuantizerSpec& q);
void apply_activation_quantizer(std::vector<LayerSpec>& layers, const QuantizerSpec& q);

} // namespace tqr
