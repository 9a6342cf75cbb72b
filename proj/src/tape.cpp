#include "tqr/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace tqr {

namespace k = kernels;

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return NodeId(nodes_.size() - 1);
}

const Tape::Node& Tape::node(NodeId id) const {
  check_id(id);
  return nodes_[std::size_t(id)];
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || id >= int(nodes_.size())) throw std::out_of_range("node not on tape");
}

void Tape::check_same_shape(NodeId a, NodeId b, const char* what) const {
  if (!value(a).same_shape(value(b)))
    throw std::invalid_argument(std::string(what) + " shape mismatch: " + value(a).shape_str() +
                                " vs " + value(b).shape_str());
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

NodeId Tape::input(Tensor v) { return push({std::move(v), Op::Leaf, -1, -1, 0, 0, 0, {}, {}}); }

NodeId Tape::constant(Tensor v) { return input(std::move(v)); }

NodeId Tape::add(NodeId a, NodeId b) {
  check_same_shape(a, b, "add");
  Tensor out(value(a).shape());
  k::add(value(a).data(), value(b).data(), out.data(), std::size_t(out.size()));
  return push({std::move(out), Op::Add, a, b, 0, 0, 0, {}, {}});
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_same_shape(a, b, "sub");
  Tensor out(value(a).shape());
  k::sub(value(a).data(), value(b).data(), out.data(), std::size_t(out.size()));
  return push({std::move(out), Op::Sub, a, b, 0, 0, 0, {}, {}});
}

NodeId Tape::mul(NodeId a, NodeId b) {
  check_same_shape(a, b, "mul");
  Tensor out(value(a).shape());
  k::mul(value(a).data(), value(b).data(), out.data(), std::size_t(out.size()));
  return push({std::move(out), Op::Mul, a, b, 0, 0, 0, {}, {}});
}

NodeId Tape::scale(NodeId a, double s) {
  Tensor out(value(a).shape());
  k::scale(value(a).data(), s, out.data(), std::size_t(out.size()));
  return push({std::move(out), Op::Scale, a, -1, s, 0, 0, {}, {}});
}

NodeId Tape::affine(NodeId a, double s, double t) {
  const Tensor& x = value(a);
  Tensor out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = s * x[i] + t;
  return push({std::move(out), Op::Affine, a, -1, s, t, 0, {}, {}});
}

NodeId Tape::relu(NodeId x) {
  const Tensor& v = value(x);
  Tensor out(v.shape());
  k::relu(v.data(), out.data(), std::size_t(v.size()));
  // gradient gate: 1 strictly right of the kink, 0 at and left of it
  Tensor ones = Tensor::full(v.shape(), 1.0);
  Tensor mask(v.shape());
  k::relu_mask(v.data(), ones.data(), mask.data(), std::size_t(v.size()));
  return push({std::move(out), Op::Relu, x, -1, 0, 0, 0, {}, std::move(mask)});
}

NodeId Tape::sigmoid(NodeId x) {
  const Tensor& v = value(x);
  Tensor out(v.shape());
  for (std::int64_t i = 0; i < v.size(); ++i) {
    double z = v[i];
    if (z >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-z));
    } else {
      double e = std::exp(z);
      out[i] = e / (1.0 + e);
    }
  }
  return push({std::move(out), Op::Sigmoid, x, -1, 0, 0, 0, {}, {}});
}

NodeId Tape::tanh(NodeId x) {
  const Tensor& v = value(x);
  Tensor out(v.shape());
  for (std::int64_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return push({std::move(out), Op::Tanh, x, -1, 0, 0, 0, {}, {}});
}

NodeId Tape::rsqrt(NodeId x) {
  const Tensor& v = value(x);
  Tensor out(v.shape());
  for (std::int64_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw std::runtime_error("rsqrt requires strictly positive input");
    out[i] = 1.0 / std::sqrt(v[i]);
  }
  return push({std::move(out), Op::Rsqrt, x, -1, 0, 0, 0, {}, {}});
}

NodeId Tape::smul(NodeId a, NodeId s) {
  if (value(s).size() != 1) throw std::invalid_argument("smul scalar operand must have one element");
  Tensor out(value(a).shape());
  k::scale(value(a).data(), value(s).item(), out.data(), std::size_t(out.size()));
  return push({std::move(out), Op::Smul, a, s, 0, 0, 0, {}, {}});
}

NodeId Tape::dot(NodeId a, NodeId b) {
  check_same_shape(a, b, "dot");
  const Tensor &va = value(a), &vb = value(b);
  double acc = 0.0;
  for (std::int64_t i = 0; i < va.size(); ++i) acc += va[i] * vb[i];
  return push({Tensor::scalar(acc), Op::Dot, a, b, 0, 0, 0, {}, {}});
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor &va = value(a), &vb = value(b);
  if (va.ndim() != 2 || vb.ndim() != 2 || va.dim(1) != vb.dim(0))
    throw std::invalid_argument("matmul shape mismatch: " + va.shape_str() + " x " + vb.shape_str());
  Tensor out({va.dim(0), vb.dim(1)});
  k::gemm_nn(va.data(), vb.data(), out.data(), va.dim(0), va.dim(1), vb.dim(1), false);
  return push({std::move(out), Op::Matmul, a, b, 0, 0, 0, {}, {}});
}

NodeId Tape::transpose(NodeId a) {
  const Tensor& v = value(a);
  if (v.ndim() != 2) throw std::invalid_argument("transpose expects a 2-D node");
  Tensor out({v.dim(1), v.dim(0)});
  k::transpose(v.data(), out.data(), v.dim(0), v.dim(1));
  return push({std::move(out), Op::Transpose, a, -1, 0, 0, 0, {}, {}});
}

NodeId Tape::col_sum(NodeId a) {
  const Tensor& v = value(a);
  if (v.ndim() != 2) throw std::invalid_argument("col_sum expects a 2-D node");
  const int rows = v.dim(0), cols = v.dim(1);
  Tensor out({cols});
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out[c] += v[std::int64_t(r) * cols + c];
  return push({std::move(out), Op::ColSum, a, -1, 0, 0, rows, {}, {}});
}

NodeId Tape::row_broadcast(NodeId v, int rows) {
  const Tensor& x = value(v);
  if (x.ndim() != 1) throw std::invalid_argument("row_broadcast expects a 1-D node");
  if (rows <= 0) throw std::invalid_argument("row_broadcast rows must be positive");
  const int cols = x.dim(0);
  Tensor out({rows, cols});
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out[std::int64_t(r) * cols + c] = x[c];
  return push({std::move(out), Op::RowBroadcast, v, -1, 0, 0, rows, {}, {}});
}

NodeId Tape::reshape(NodeId a, std::vector<int> shape) {
  Tensor out = value(a).reshaped(std::move(shape));
  return push({std::move(out), Op::Reshape, a, -1, 0, 0, 0, {}, {}});
}

namespace {

void check_conv_args(const Tensor& x, const Tensor& w, const k::ConvShape& s, bool depthwise,
                     const char* what) {
  std::vector<int> xs{s.batch, s.in_h, s.in_w, s.in_c};
  std::vector<int> ws = depthwise ? std::vector<int>{s.k_h, s.k_w, s.in_c}
                                  : std::vector<int>{s.k_h, s.k_w, s.in_c, s.out_c};
  if (x.shape() != xs || w.shape() != ws)
    throw std::invalid_argument(std::string(what) + " operand shapes do not match descriptor: " +
                                x.shape_str() + ", " + w.shape_str());
}

} // namespace

NodeId Tape::conv2d(NodeId x, NodeId w, const k::ConvShape& s) {
  check_conv_args(value(x), value(w), s, false, "conv2d");
  Tensor out({s.batch, s.out_h(), s.out_w(), s.out_c});
  k::conv2d(value(x).data(), value(w).data(), out.data(), s);
  return push({std::move(out), Op::Conv, x, w, 0, 0, 0, s, {}});
}

NodeId Tape::conv2d_input_grad(NodeId u, NodeId w, const k::ConvShape& s) {
  std::vector<int> us{s.batch, s.out_h(), s.out_w(), s.out_c};
  if (value(u).shape() != us) throw std::invalid_argument("conv2d_input_grad upstream shape mismatch");
  check_conv_args(Tensor({s.batch, s.in_h, s.in_w, s.in_c}), value(w), s, false, "conv2d_input_grad");
  Tensor out({s.batch, s.in_h, s.in_w, s.in_c});
  k::conv2d_igrad(value(u).data(), value(w).data(), out.data(), s);
  return push({std::move(out), Op::ConvIG, u, w, 0, 0, 0, s, {}});
}

NodeId Tape::conv2d_weight_grad(NodeId x, NodeId u, const k::ConvShape& s) {
  std::vector<int> us{s.batch, s.out_h(), s.out_w(), s.out_c};
  if (value(u).shape() != us) throw std::invalid_argument("conv2d_weight_grad upstream shape mismatch");
  Tensor out({s.k_h, s.k_w, s.in_c, s.out_c});
  k::conv2d_wgrad(value(x).data(), value(u).data(), out.data(), s);
  return push({std::move(out), Op::ConvWG, x, u, 0, 0, 0, s, {}});
}

NodeId Tape::depthwise(NodeId x, NodeId w, const k::ConvShape& s) {
  check_conv_args(value(x), value(w), s, true, "depthwise");
  Tensor out({s.batch, s.out_h(), s.out_w(), s.in_c});
  k::dwconv2d(value(x).data(), value(w).data(), out.data(), s);
  return push({std::move(out), Op::Dw, x, w, 0, 0, 0, s, {}});
}

NodeId Tape::depthwise_input_grad(NodeId u, NodeId w, const k::ConvShape& s) {
  std::vector<int> us{s.batch, s.out_h(), s.out_w(), s.in_c};
  if (value(u).shape() != us) throw std::invalid_argument("depthwise_input_grad upstream shape mismatch");
  Tensor out({s.batch, s.in_h, s.in_w, s.in_c});
  k::dwconv2d_igrad(value(u).data(), value(w).data(), out.data(), s);
  return push({std::move(out), Op::DwIG, u, w, 0, 0, 0, s, {}});
}

NodeId Tape::depthwise_weight_grad(NodeId x, NodeId u, const k::ConvShape& s) {
  std::vector<int> us{s.batch, s.out_h(), s.out_w(), s.in_c};
  if (value(u).shape() != us) throw std::invalid_argument("depthwise_weight_grad upstream shape mismatch");
  Tensor out({s.k_h, s.k_w, s.in_c});
  k::dwconv2d_wgrad(value(x).data(), value(u).data(), out.data(), s);
  return push({std::move(out), Op::DwWG, x, u, 0, 0, 0, s, {}});
}

NodeId Tape::spatial_mean(NodeId x) {
  const Tensor& v = value(x);
  if (v.ndim() != 3) throw std::invalid_argument("spatial_mean expects a (batch,hw,c) node");
  const int b = v.dim(0), hw = v.dim(1), c = v.dim(2);
  Tensor out({b, c});
  for (int i = 0; i < b; ++i)
    for (int p = 0; p < hw; ++p)
      for (int j = 0; j < c; ++j) out[std::int64_t(i) * c + j] += v[(std::int64_t(i) * hw + p) * c + j];
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] /= double(hw);
  return push({std::move(out), Op::SpatialMean, x, -1, 0, 0, hw, {}, {}});
}

NodeId Tape::spatial_repeat(NodeId y, int hw) {
  const Tensor& v = value(y);
  if (v.ndim() != 2) throw std::invalid_argument("spatial_repeat expects a (batch,c) node");
  if (hw <= 0) throw std::invalid_argument("spatial_repeat extent must be positive");
  const int b = v.dim(0), c = v.dim(1);
  Tensor out({b, hw, c});
  for (int i = 0; i < b; ++i)
    for (int p = 0; p < hw; ++p)
      for (int j = 0; j < c; ++j) out[(std::int64_t(i) * hw + p) * c + j] = v[std::int64_t(i) * c + j];
  return push({std::move(out), Op::SpatialRepeat, y, -1, 0, 0, hw, {}, {}});
}

NodeId Tape::quantize_ste(NodeId x, const QuantizerSpec& spec, long step,
                          const StochasticSchedule* schedule, RngStream* rng) {
  const Tensor& v = value(x);
  Tensor out = quantize_forward(spec, v, step, schedule, rng);
  Tensor mask;
  if (spec.kind != QuantKind::Identity) {
    Tensor ones = Tensor::full(v.shape(), 1.0);
    mask = Tensor(v.shape());
    if (spec.kind == QuantKind::QuantizedRelu)
      k::ste_mask_relu(v.data(), ones.data(), spec.ste_clip, mask.data(), std::size_t(v.size()));
    else
      k::ste_mask(v.data(), ones.data(), spec.ste_clip, mask.data(), std::size_t(v.size()));
  }
  return push({std::move(out), Op::QuantSTE, x, -1, 0, 0, 0, {}, std::move(mask)});
}

NodeId Tape::softmax_ce(NodeId logits, const Tensor& y_onehot, double T) {
  const Tensor& z = value(logits);
  if (z.ndim() != 2 || !z.same_shape(y_onehot))
    throw std::invalid_argument("softmax_ce expects matching (batch,classes) logits and labels");
  if (!(T > 0.0)) throw std::invalid_argument("softmax temperature must be positive");
  const int b = z.dim(0), kk = z.dim(1);
  Tensor residual({b, kk}); // (p − y) / (batch · T)
  double loss = 0.0;
  for (int i = 0; i < b; ++i) {
    const double* zi = z.data() + std::int64_t(i) * kk;
    double m = zi[0] / T;
    for (int j = 1; j < kk; ++j) m = std::max(m, zi[j] / T);
    double denom = 0.0;
    for (int j = 0; j < kk; ++j) denom += std::exp(zi[j] / T - m);
    for (int j = 0; j < kk; ++j) {
      double p = std::exp(zi[j] / T - m) / denom;
      double y = y_onehot[std::int64_t(i) * kk + j];
      if (y != 0.0) loss -= y * std::log(std::max(p, 1e-12));
      residual[std::int64_t(i) * kk + j] = (p - y) / (double(b) * T);
    }
  }
  loss /= double(b);
  return push({Tensor::scalar(loss), Op::SoftmaxCE, logits, -1, T, 0, 0, {}, std::move(residual)});
}

NodeId Tape::max_except(NodeId z, int skip) {
  const Tensor& v = value(z);
  if (v.size() < 2) throw std::invalid_argument("max_except needs at least two elements");
  if (skip < 0 || skip >= v.size()) throw std::invalid_argument("max_except skip index out of range");
  int best = -1;
  for (std::int64_t i = 0; i < v.size(); ++i) {
    if (int(i) == skip) continue;
    if (best < 0 || v[i] > v[best]) best = int(i);
  }
  Tensor onehot(v.shape());
  onehot[best] = 1.0;
  return push({Tensor::scalar(v[best]), Op::MaxExcept, z, -1, 0, 0, skip, {}, std::move(onehot)});
}

void Tape::accumulate(std::vector<NodeId>& gmap, int target, NodeId g) {
  if (gmap[std::size_t(target)] < 0)
    gmap[std::size_t(target)] = g;
  else
    gmap[std::size_t(target)] = add(gmap[std::size_t(target)], g);
}

void Tape::emit_backward(int id, std::vector<NodeId>& gmap) {
  // copy, not reference: emitting ops below reallocates nodes_
  struct Rule {
    Op op;
    int in0, in1, extent;
    double p0;
    k::ConvShape cs;
    Tensor saved;
  };
  Rule n;
  {
    const Node& src = nodes_[std::size_t(id)];
    n = Rule{src.op, src.in0, src.in1, src.extent, src.p0, src.cs, src.saved};
  }
  const NodeId g = gmap[std::size_t(id)];
  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::Add:
      accumulate(gmap, n.in0, g);
      accumulate(gmap, n.in1, g);
      break;
    case Op::Sub:
      accumulate(gmap, n.in0, g);
      accumulate(gmap, n.in1, scale(g, -1.0));
      break;
    case Op::Mul:
      accumulate(gmap, n.in0, mul(g, n.in1));
      accumulate(gmap, n.in1, mul(g, n.in0));
      break;
    case Op::Scale:
    case Op::Affine:
      accumulate(gmap, n.in0, scale(g, n.p0));
      break;
    case Op::Relu:
      accumulate(gmap, n.in0, mul(g, constant(n.saved)));
      break;
    case Op::Sigmoid: {
      NodeId factor = mul(id, affine(id, -1.0, 1.0)); // y(1−y)
      accumulate(gmap, n.in0, mul(g, factor));
      break;
    }
    case Op::Tanh:
      accumulate(gmap, n.in0, mul(g, affine(mul(id, id), -1.0, 1.0)));
      break;
    case Op::Rsqrt:
      accumulate(gmap, n.in0, mul(g, scale(mul(mul(id, id), id), -0.5)));
      break;
    case Op::Smul:
      accumulate(gmap, n.in0, smul(g, n.in1));
      accumulate(gmap, n.in1, dot(g, n.in0));
      break;
    case Op::Dot:
      accumulate(gmap, n.in0, smul(n.in1, g));
      accumulate(gmap, n.in1, smul(n.in0, g));
      break;
    case Op::Matmul:
      accumulate(gmap, n.in0, matmul(g, transpose(n.in1)));
      accumulate(gmap, n.in1, matmul(transpose(n.in0), g));
      break;
    case Op::Transpose:
      accumulate(gmap, n.in0, transpose(g));
      break;
    case Op::ColSum:
      accumulate(gmap, n.in0, row_broadcast(g, n.extent));
      break;
    case Op::RowBroadcast:
      accumulate(gmap, n.in0, col_sum(g));
      break;
    case Op::Reshape:
      accumulate(gmap, n.in0, reshape(g, value(n.in0).shape()));
      break;
    case Op::Conv:
      accumulate(gmap, n.in0, conv2d_input_grad(g, n.in1, n.cs));
      accumulate(gmap, n.in1, conv2d_weight_grad(n.in0, g, n.cs));
      break;
    case Op::ConvIG:
      accumulate(gmap, n.in0, conv2d(g, n.in1, n.cs));
      accumulate(gmap, n.in1, conv2d_weight_grad(g, n.in0, n.cs));
      break;
    case Op::ConvWG:
      accumulate(gmap, n.in0, conv2d_input_grad(n.in1, g, n.cs));
      accumulate(gmap, n.in1, conv2d(n.in0, g, n.cs));
      break;
    case Op::Dw:
      accumulate(gmap, n.in0, depthwise_input_grad(g, n.in1, n.cs));
      accumulate(gmap, n.in1, depthwise_weight_grad(n.in0, g, n.cs));
      break;
    case Op::DwIG:
      accumulate(gmap, n.in0, depthwise(g, n.in1, n.cs));
      accumulate(gmap, n.in1, depthwise_weight_grad(g, n.in0, n.cs));
      break;
    case Op::DwWG:
      accumulate(gmap, n.in0, depthwise_input_grad(n.in1, g, n.cs));
      accumulate(gmap, n.in1, depthwise(n.in0, g, n.cs));
      break;
    case Op::SpatialMean:
      accumulate(gmap, n.in0, scale(spatial_repeat(g, n.extent), 1.0 / double(n.extent)));
      break;
    case Op::SpatialRepeat:
      accumulate(gmap, n.in0, scale(spatial_mean(g), double(n.extent)));
      break;
    case Op::QuantSTE:
      if (n.saved.size() == 0)
        accumulate(gmap, n.in0, g);
      else
        accumulate(gmap, n.in0, mul(g, constant(n.saved)));
      break;
    case Op::SoftmaxCE:
      accumulate(gmap, n.in0, smul(constant(n.saved), g));
      break;
    case Op::MaxExcept:
      accumulate(gmap, n.in0, smul(constant(n.saved), g));
      break;
  }
}

std::vector<NodeId> Tape::vjp_nodes(NodeId out, NodeId seed, const std::vector<NodeId>& wrt) {
  check_id(out);
  check_id(seed);
  for (NodeId w : wrt) check_id(w);
  if (!value(out).same_shape(value(seed)))
    throw std::invalid_argument("vjp seed shape mismatch: " + value(out).shape_str() + " vs " +
                                value(seed).shape_str());
  const int n0 = out + 1; // nodes recorded up to and including the root
  std::vector<char> reach(std::size_t(n0), 0);
  std::vector<int> stack{out};
  reach[std::size_t(out)] = 1;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const Node& n = nodes_[std::size_t(id)];
    for (int in : {n.in0, n.in1})
      if (in >= 0 && !reach[std::size_t(in)]) {
        reach[std::size_t(in)] = 1;
        stack.push_back(in);
      }
  }
  std::vector<NodeId> gmap(std::size_t(n0), -1);
  gmap[std::size_t(out)] = seed;
  for (int id = out; id >= 0; --id) {
    if (!reach[std::size_t(id)] || gmap[std::size_t(id)] < 0) continue;
    emit_backward(id, gmap);
  }
  std::vector<NodeId> result;
  result.reserve(wrt.size());
  for (NodeId w : wrt) {
    if (w < n0 && gmap[std::size_t(w)] >= 0)
      result.push_back(gmap[std::size_t(w)]);
    else
      result.push_back(constant(Tensor::zeros_like(value(w))));
  }
  return result;
}

std::vector<Tensor> Tape::grad(NodeId loss, const std::vector<NodeId>& wrt) {
  check_id(loss);
  if (value(loss).size() != 1) throw std::runtime_error("gradient root must be scalar");
  NodeId seed = constant(Tensor::full(value(loss).shape(), 1.0));
  std::vector<NodeId> ids = vjp_nodes(loss, seed, wrt);
  std::vector<Tensor> out;
  out.reserve(ids.size());
  for (NodeId id : ids) out.push_back(value(id));
  return out;
}

Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                            double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  Tensor g(x.shape());
  Tensor probe = x;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    double fp = f(probe);
    probe[i] = x[i] - h;
    double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("non-finite value in finite difference probe");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

} // namespace tqr
