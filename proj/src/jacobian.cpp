#include "tqr/jacobian.hpp"

#include <cmath>
#include <stdexcept>

#include "tqr/csv.hpp"

namespace tqr {

namespace {

ForwardOptions analysis_options(const JacobianOptions& opt) {
  ForwardOptions fo;
  fo.mode = opt.mode;
  fo.bn = BnMode::Moving;
  return fo;
}

// (1, input_shape...) view of a sample given with or without its batch axis
Tensor batched_input(const Model& m, const Tensor& x) {
  const std::vector<int>& in = m.input_shape();
  std::vector<int> batched = in;
  batched.insert(batched.begin(), 1);
  if (x.shape() == in) return x.reshaped(batched);
  if (x.shape() == batched) return x;
  if (x.ndim() == int(in.size()) + 1 && std::vector<int>(x.shape().begin() + 1, x.shape().end()) == in)
    throw std::invalid_argument("single sample required");
  throw std::invalid_argument("input shape " + x.shape_str() + " does not match model input");
}

Tensor onehot_like(const Tensor& t, std::int64_t k) {
  Tensor s = Tensor::zeros_like(t);
  s[k] = 1.0;
  return s;
}

// left-multiply J by the softmax Jacobian (diag(p) - p pᵀ)/T at the row `p`
Tensor softmax_chain(const Tensor& logits, const Tensor& J, double T) {
  Tensor p = softmax_with_temperature(logits, T);
  const int K = J.dim(0), D = J.dim(1);
  Tensor out({K, D});
  for (int d = 0; d < D; ++d) {
    double mix = 0.0;
    for (int j = 0; j < K; ++j) mix += p[j] * J[std::int64_t(j) * D + d];
    for (int k = 0; k < K; ++k)
      out[std::int64_t(k) * D + d] = p[k] * (J[std::int64_t(k) * D + d] - mix) / T;
  }
  return out;
}

kernels::ConvShape layer_conv_shape(const LayerSpec& s, const std::vector<int>& in_shape) {
  kernels::ConvShape cs;
  cs.batch = 1;
  cs.in_h = in_shape[0];
  cs.in_w = in_shape[1];
  cs.in_c = in_shape[2];
  cs.k_h = cs.k_w = s.kernel;
  cs.out_c = s.kind == LayerKind::Conv2d ? s.channels : in_shape[2];
  cs.stride = s.stride;
  cs.pad_h = cs.pad_w = s.same_pad ? (s.kernel - 1) / 2 : 0;
  return cs;
}

// counts[ky,kx] = number of output positions whose (ky,kx) tap reads a real
// input pixel rather than padding
Tensor tap_position_counts(const kernels::ConvShape& cs) {
  Tensor n({cs.k_h, cs.k_w});
  for (int ky = 0; ky < cs.k_h; ++ky) {
    int rows = 0;
    for (int oy = 0; oy < cs.out_h(); ++oy) {
      const int iy = oy * cs.stride + ky - cs.pad_h;
      if (iy >= 0 && iy < cs.in_h) ++rows;
    }
    for (int kx = 0; kx < cs.k_w; ++kx) {
      int cols = 0;
      for (int ox = 0; ox < cs.out_w(); ++ox) {
        const int ix = ox * cs.stride + kx - cs.pad_w;
        if (ix >= 0 && ix < cs.in_w) ++cols;
      }
      n[std::int64_t(ky) * cs.k_w + kx] = double(rows) * cols;
    }
  }
  return n;
}

Tensor broadcast_counts(const Tensor& counts, const std::vector<int>& weight_shape) {
  Tensor out(weight_shape);
  const std::int64_t trailing = out.size() / counts.size();
  for (std::int64_t i = 0; i < counts.size(); ++i)
    for (std::int64_t j = 0; j < trailing; ++j) out[i * trailing + j] = counts[i];
  return out;
}

// straight-through diagonal of an activation quantizer at pre-quant values
Tensor ste_diag(const QuantizerSpec& aq, const Tensor& pre_quant, Tensor upstream) {
  if (aq.kind == QuantKind::Identity) return upstream;
  return quantize_backward(aq, pre_quant, upstream);
}

} // namespace

JacobianMatrix jacobian_full(const Model& model, const Tensor& x, const JacobianOptions& opt) {
  Model& m = const_cast<Model&>(model); // forward without update_moving does not mutate
  Tensor xb = batched_input(model, x);
  Tape t;
  NodeId xi = t.input(xb);
  ForwardRecord rec = m.forward(t, xi, analysis_options(opt));
  const int K = model.classes();
  const std::int64_t D = shape_product(model.input_shape());
  Tensor J({K, int(D)});
  for (int k = 0; k < K; ++k) {
    NodeId seed = t.constant(onehot_like(t.value(rec.logits), k));
    std::vector<NodeId> g = t.vjp_nodes(rec.logits, seed, {xi});
    const Tensor& gv = t.value(g[0]);
    for (std::int64_t d = 0; d < D; ++d) J[std::int64_t(k) * D + d] = gv[d];
  }
  if (opt.post_softmax) J = softmax_chain(t.value(rec.logits), J, opt.temperature);
  JacobianMatrix out;
  out.matrix = std::move(J);
  out.point = xb.reshaped(model.input_shape());
  out.layer = -1;
  return out;
}

double jr_frobenius(const Model& model, const Tensor& x, const JacobianOptions& opt) {
  if (opt.post_softmax) {
    const Tensor& J = jacobian_full(model, x, opt).matrix;
    double s = 0.0;
    for (std::int64_t i = 0; i < J.size(); ++i) s += J[i] * J[i];
    return s;
  }
  Model& m = const_cast<Model&>(model);
  Tensor xb = batched_input(model, x);
  Tape t;
  NodeId xi = t.input(xb);
  ForwardRecord rec = m.forward(t, xi, analysis_options(opt));
  double total = 0.0;
  for (int k = 0; k < model.classes(); ++k) {
    NodeId seed = t.constant(onehot_like(t.value(rec.logits), k));
    std::vector<NodeId> g = t.vjp_nodes(rec.logits, seed, {xi});
    total += t.value(t.dot(g[0], g[0])).item();
  }
  return total;
}

JacobianMatrix jacobian_per_layer(const Model& model, const Tensor& x, int layer,
                                  const JacobianOptions& opt) {
  if (layer < 0 || layer >= model.num_layers())
    throw std::out_of_range("layer index " + std::to_string(layer) + " out of range");
  Model& m = const_cast<Model&>(model);
  Tensor xb = batched_input(model, x);
  Tape t;
  NodeId xi = t.input(xb);
  ForwardRecord rec = m.forward(t, xi, analysis_options(opt));
  const LayerTrace& tr = rec.layers[std::size_t(layer)];
  // copies: growing the tape below would invalidate references into it
  const Tensor out_v = t.value(tr.output);
  const Tensor in_v = t.value(tr.input);
  const std::int64_t K = out_v.size(), D = in_v.size();
  Tensor J({int(K), int(D)});
  for (std::int64_t k = 0; k < K; ++k) {
    NodeId seed = t.constant(onehot_like(out_v, k));
    std::vector<NodeId> g = t.vjp_nodes(tr.output, seed, {tr.input});
    const Tensor& gv = t.value(g[0]);
    for (std::int64_t d = 0; d < D; ++d) J[k * D + d] = gv[d];
  }
  JacobianMatrix out;
  out.matrix = std::move(J);
  out.point = xb.reshaped(model.input_shape());
  out.layer = layer;
  return out;
}

SensitivityProbe sensitivity_probe(const Model& model, const Tensor& x, const Tensor& x_p,
                                   int n_segment_samples, const JacobianOptions& opt) {
  if (!x.same_shape(x_p))
    throw std::invalid_argument("sensitivity probe operands must share a shape");
  if (n_segment_samples < 2)
    throw std::invalid_argument("sensitivity probe needs at least two segment samples");
  double dd = 0.0;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const double d = x_p[i] - x[i];
    dd += d * d;
  }
  if (dd == 0.0)
    throw std::invalid_argument("sensitivity probe requires x_p != x (zero denominator)");

  auto outputs = [&](const Tensor& p) {
    Tensor z = model.predict(batched_input(model, p), opt.mode);
    return opt.post_softmax ? softmax_with_temperature(z, opt.temperature) : z;
  };
  Tensor za = outputs(x), zb = outputs(x_p);
  double zz = 0.0;
  for (std::int64_t i = 0; i < za.size(); ++i) {
    const double d = zb[i] - za[i];
    zz += d * d;
  }

  SensitivityProbe probe;
  probe.ratio = zz / dd;
  for (int i = 0; i < n_segment_samples; ++i) {
    const double a = double(i) / (n_segment_samples - 1);
    Tensor p = Tensor::zeros_like(x);
    for (std::int64_t j = 0; j < x.size(); ++j) p[j] = x[j] + a * (x_p[j] - x[j]);
    probe.max_frob = std::max(probe.max_frob, jr_frobenius(model, p, opt));
  }
  probe.holds = probe.ratio <= probe.max_frob;
  return probe;
}

std::string probe_csv_header() { return "ratio,max_frob,holds"; }

std::string probe_csv_row(const SensitivityProbe& p) {
  return csv_double(p.ratio) + "," + csv_double(p.max_frob) + "," + (p.holds ? "1" : "0");
}

NodeId layer_frobenius_sq_node(Tape& t, const Model& model, const ForwardRecord& rec,
                               int layer) {
  if (layer < 0 || layer >= model.num_layers())
    throw std::out_of_range("layer index " + std::to_string(layer) + " out of range");
  if (t.value(rec.input).dim(0) != 1) throw std::invalid_argument("single sample required");
  const LayerSpec& s = model.layer_spec(layer);
  const std::vector<int>& in_shape = model.layer_input_shape(layer);
  const LayerTrace& tr = rec.layers[std::size_t(layer)];

  const bool parametric = s.kind == LayerKind::Dense || s.kind == LayerKind::Conv2d ||
                          s.kind == LayerKind::DepthwiseConv2d ||
                          s.kind == LayerKind::SeparableConv2d;
  if (s.activation_quantizer.kind != QuantKind::Identity &&
      s.kind != LayerKind::Relu && s.kind != LayerKind::Sigmoid)
    throw std::invalid_argument(
        "closed-form layer Frobenius norm supports activation quantizers on activation "
        "layers only");
  (void)parametric;

  switch (s.kind) {
    case LayerKind::Dense:
      return t.dot(tr.effective[0], tr.effective[0]);
    case LayerKind::Conv2d:
    case LayerKind::DepthwiseConv2d: {
      kernels::ConvShape cs = layer_conv_shape(s, in_shape);
      Tensor counts = broadcast_counts(tap_position_counts(cs), t.value(tr.effective[0]).shape());
      NodeId w = tr.effective[0];
      return t.dot(w, t.mul(w, t.constant(std::move(counts))));
    }
    case LayerKind::SeparableConv2d: {
      kernels::ConvShape cs = layer_conv_shape(s, in_shape);
      const int c = cs.in_c;
      NodeId wd = tr.effective[0], wp = tr.effective[1];
      // per-channel pointwise energy: q[c] = Σ_o P[c,o]²
      NodeId q = t.col_sum(t.transpose(t.mul(wp, wp)));
      // per-channel depthwise energy weighted by valid tap positions
      Tensor counts = broadcast_counts(tap_position_counts(cs), t.value(wd).shape());
      NodeId weighted = t.mul(t.mul(wd, wd), t.constant(std::move(counts)));
      NodeId r = t.col_sum(t.reshape(weighted, {cs.k_h * cs.k_w, c}));
      return t.dot(r, q);
    }
    case LayerKind::BatchNorm: {
      const std::int64_t n_spatial = shape_product(in_shape) / in_shape.back();
      NodeId g = t.mul(tr.effective[0], tr.bn_inv);
      return t.scale(t.dot(g, g), double(n_spatial));
    }
    case LayerKind::Relu: {
      const Tensor& xv = t.value(tr.input);
      Tensor mask = Tensor::zeros_like(xv);
      Tensor post = Tensor::zeros_like(xv);
      for (std::int64_t i = 0; i < xv.size(); ++i) {
        mask[i] = xv[i] > 0.0 ? 1.0 : 0.0;
        post[i] = xv[i] > 0.0 ? xv[i] : 0.0;
      }
      mask = ste_diag(s.activation_quantizer, post, std::move(mask));
      double sum = 0.0;
      for (std::int64_t i = 0; i < mask.size(); ++i) sum += mask[i] * mask[i];
      return t.constant(Tensor::scalar(sum));
    }
    case LayerKind::Sigmoid: {
      NodeId y = t.sigmoid(tr.input);
      NodeId slope = t.mul(y, t.affine(y, -1.0, 1.0));
      if (s.activation_quantizer.kind != QuantKind::Identity) {
        const Tensor& yv = t.value(y);
        Tensor ones = Tensor::full(yv.shape(), 1.0);
        slope = t.mul(slope, t.constant(ste_diag(s.activation_quantizer, yv, std::move(ones))));
      }
      return t.dot(slope, slope);
    }
    case LayerKind::ResidualAdd:
    case LayerKind::Flatten:
    case LayerKind::SoftmaxOut:
      return t.constant(Tensor::scalar(double(shape_product(in_shape))));
    case LayerKind::GlobalAvgPool: {
      const double hw = double(in_shape[0]) * in_shape[1];
      return t.constant(Tensor::scalar(double(in_shape[2]) / hw));
    }
  }
  throw std::logic_error("unhandled layer kind");
}

} // namespace tqr
