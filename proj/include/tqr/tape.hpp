#pragma once

#include <functional>
#include <vector>

#include "tqr/kernels.hpp"
#include "tqr/quantize.hpp"
#include "tqr/tensor.hpp"

namespace tqr {

using NodeId = int;

// Reverse-mode autodiff over an eagerly evaluated op tape. Every recorded op
// computes its value immediately; grad() emits the backward pass as further
// tape ops, so gradients of expressions that themselves contain gradients
// (e.g. a squared-Jacobian penalty) are obtained by calling grad() on nodes
// produced by vjp_nodes().
class Tape {
 public:
  // leaves (identical mechanics; the names mark intent at call sites)
  NodeId input(Tensor v);
  NodeId constant(Tensor v);

  // elementwise & scalar-parameter ops
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId affine(NodeId a, double s, double t); // s*x + t
  NodeId relu(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId tanh(NodeId x);
  NodeId rsqrt(NodeId x); // 1/sqrt(x), x > 0

  // scalar-node arithmetic
  NodeId smul(NodeId a, NodeId s); // tensor times scalar node
  NodeId dot(NodeId a, NodeId b);  // scalar: sum of elementwise product

  // linear algebra on 2-D nodes
  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId col_sum(NodeId a);                 // (r,c) -> (c)
  NodeId row_broadcast(NodeId v, int rows); // (c) -> (rows,c)
  NodeId reshape(NodeId a, std::vector<int> shape);

  // convolution family; x is NHWC, w is HWIO (depthwise: HWC)
  NodeId conv2d(NodeId x, NodeId w, const kernels::ConvShape& s);
  NodeId conv2d_input_grad(NodeId u, NodeId w, const kernels::ConvShape& s);
  NodeId conv2d_weight_grad(NodeId x, NodeId u, const kernels::ConvShape& s);
  NodeId depthwise(NodeId x, NodeId w, const kernels::ConvShape& s);
  NodeId depthwise_input_grad(NodeId u, NodeId w, const kernels::ConvShape& s);
  NodeId depthwise_weight_grad(NodeId x, NodeId u, const kernels::ConvShape& s);

  // spatial pooling over the middle axis: (b,hw,c) -> (b,c) and back
  NodeId spatial_mean(NodeId x);
  NodeId spatial_repeat(NodeId y, int hw);

  // quantizer forward with straight-through gradient gating
  NodeId quantize_ste(NodeId x, const QuantizerSpec& spec, long step,
                      const StochasticSchedule* schedule, RngStream* rng);

  // scalar heads
  NodeId softmax_ce(NodeId logits, const Tensor& y_onehot, double T);
  NodeId max_except(NodeId z, int skip); // max over flat elements j != skip

  const Tensor& value(NodeId id) const;
  int size() const { return int(nodes_.size()); }

  // ∂loss/∂wrt for a scalar loss node; unreachable wrt nodes get zeros
  std::vector<Tensor> grad(NodeId loss, const std::vector<NodeId>& wrt);

  // Emit the vector-Jacobian product seedᵀ·(∂out/∂wrt) as differentiable tape
  // nodes; seed must match out's shape. grad() is this with a unit seed.
  std::vector<NodeId> vjp_nodes(NodeId out, NodeId seed, const std::vector<NodeId>& wrt);

 private:
  enum class Op {
    Leaf, Add, Sub, Mul, Scale, Affine, Relu, Sigmoid, Tanh, Rsqrt,
    Smul, Dot, Matmul, Transpose, ColSum, RowBroadcast, Reshape,
    Conv, ConvIG, ConvWG, Dw, DwIG, DwWG,
    SpatialMean, SpatialRepeat, QuantSTE, SoftmaxCE, MaxExcept,
  };

  struct Node {
    Tensor value;
    Op op = Op::Leaf;
    int in0 = -1, in1 = -1;
    double p0 = 0.0, p1 = 0.0; // op scalar parameters
    int extent = 0;            // rows / hw / skip index, depending on op
    kernels::ConvShape cs;
    Tensor saved; // backward payload: masks, softmax residual, argmax one-hot
  };

  NodeId push(Node n);
  const Node& node(NodeId id) const;
  void check_id(NodeId id) const;
  void check_same_shape(NodeId a, NodeId b, const char* what) const;

  void emit_backward(int id, std::vector<NodeId>& gmap);
  void accumulate(std::vector<NodeId>& gmap, int target, NodeId g);

  std::vector<Node> nodes_;
};

// Central-difference gradient oracle: (f(x+h·e_i) − f(x−h·e_i)) / 2h.
// Throws if f returns a non-finite value.
Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                            double h);

} // namespace tqr
