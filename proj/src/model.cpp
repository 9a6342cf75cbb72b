#include "tqr/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tqr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

std::string layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::DepthwiseConv2d: return "depthwise_conv2d";
    case LayerKind::SeparableConv2d: return "separable_conv2d";
    case LayerKind::BatchNorm: return "batch_norm";
    case LayerKind::Relu: return "relu";
    case LayerKind::Sigmoid: return "sigmoid";
    case LayerKind::ResidualAdd: return "residual_add";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::GlobalAvgPool: return "global_avg_pool";
    case LayerKind::SoftmaxOut: return "softmax_out";
  }
  return "unknown";
}

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.99;

int same_padding(int kernel) { return (kernel - 1) / 2; }

void glorot_fill(Tensor& t, long fan_in, long fan_out, RngStream& rng) {
  double bound = std::sqrt(6.0 / double(fan_in + fan_out));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
}

[[noreturn]] void layer_error(int index, const LayerSpec& spec, const std::string& msg) {
  throw std::invalid_argument("layer " + std::to_string(index) + " (" +
                              layer_kind_name(spec.kind) + "): " + msg);
}

} // namespace

Model::Model(std::vector<int> input_shape, int classes, std::vector<LayerSpec> layers,
             std::uint64_t seed)
    : input_shape_(std::move(input_shape)), classes_(classes), seed_(seed) {
  if (classes_ < 2) throw std::invalid_argument("model needs at least two classes");
  if (input_shape_.empty()) throw std::invalid_argument("model input shape must be non-empty");
  shape_product(input_shape_);
  layers_.reserve(layers.size());
  for (auto& spec : layers) layers_.push_back(LayerState{spec, {}, {}, {}, {}});
  RngStream rng(seed_);
  build_shapes_and_params(rng);
}

void Model::build_shapes_and_params(RngStream& rng) {
  std::vector<int> cur = input_shape_;
  for (int i = 0; i < int(layers_.size()); ++i) {
    LayerState& l = layers_[std::size_t(i)];
    const LayerSpec& s = l.spec;
    validate(s.weight_quantizer);
    validate(s.activation_quantizer);
    l.in_shape = cur;
    switch (s.kind) {
      case LayerKind::Dense: {
        if (cur.size() != 1) layer_error(i, s, "expects a flat input, got " + Tensor(cur).shape_str());
        if (s.units <= 0) layer_error(i, s, "units must be positive");
        Tensor w({cur[0], s.units});
        glorot_fill(w, cur[0], s.units, rng);
        l.weights = {std::move(w), Tensor({s.units})};
        cur = {s.units};
        break;
      }
      case LayerKind::Conv2d:
      case LayerKind::DepthwiseConv2d:
      case LayerKind::SeparableConv2d: {
        if (cur.size() != 3) layer_error(i, s, "expects (h,w,c) input");
        if (s.kernel < 1 || s.kernel % 2 == 0) layer_error(i, s, "kernel side must be odd");
        if (s.stride < 1) layer_error(i, s, "stride must be positive");
        const int h = cur[0], w = cur[1], c = cur[2];
        const int pad = s.same_pad ? same_padding(s.kernel) : 0;
        const int oh = (h + 2 * pad - s.kernel) / s.stride + 1;
        const int ow = (w + 2 * pad - s.kernel) / s.stride + 1;
        if (oh <= 0 || ow <= 0) layer_error(i, s, "kernel exceeds padded input");
        const long k2 = long(s.kernel) * s.kernel;
        if (s.kind == LayerKind::Conv2d) {
          if (s.channels <= 0) layer_error(i, s, "channels must be positive");
          Tensor wt({s.kernel, s.kernel, c, s.channels});
          glorot_fill(wt, k2 * c, k2 * s.channels, rng);
          l.weights = {std::move(wt), Tensor({s.channels})};
          cur = {oh, ow, s.channels};
        } else if (s.kind == LayerKind::DepthwiseConv2d) {
          Tensor wt({s.kernel, s.kernel, c});
          glorot_fill(wt, k2, k2, rng);
          l.weights = {std::move(wt), Tensor({c})};
          cur = {oh, ow, c};
        } else {
          if (s.channels <= 0) layer_error(i, s, "channels must be positive");
          Tensor wd({s.kernel, s.kernel, c});
          glorot_fill(wd, k2, k2, rng);
          Tensor wp({c, s.channels});
          glorot_fill(wp, c, s.channels, rng);
          l.weights = {std::move(wd), std::move(wp), Tensor({s.channels})};
          cur = {oh, ow, s.channels};
        }
        break;
      }
      case LayerKind::BatchNorm: {
        const int c = cur.back();
        l.weights = {Tensor::full({c}, 1.0), Tensor({c})};
        l.stats = {Tensor({c}), Tensor::full({c}, 1.0)};
        break;
      }
      case LayerKind::Relu:
      case LayerKind::Sigmoid:
        break;
      case LayerKind::ResidualAdd: {
        if (s.residual_from < 0 || s.residual_from >= i)
          layer_error(i, s, "residual source must name an earlier layer");
        if (layers_[std::size_t(s.residual_from)].out_shape != cur)
          layer_error(i, s, "residual operand shapes differ");
        break;
      }
      case LayerKind::Flatten:
        cur = {int(shape_product(cur))};
        break;
      case LayerKind::GlobalAvgPool: {
        if (cur.size() != 3) layer_error(i, s, "expects (h,w,c) input");
        cur = {cur[2]};
        break;
      }
      case LayerKind::SoftmaxOut: {
        if (i != int(layers_.size()) - 1) layer_error(i, s, "must be the final layer");
        if (cur != std::vector<int>{classes_}) layer_error(i, s, "expects (classes) logits input");
        break;
      }
    }
    l.out_shape = cur;
  }
  if (cur != std::vector<int>{classes_})
    throw std::invalid_argument("model output shape " + Tensor(cur).shape_str() +
                                " does not match class count " + std::to_string(classes_));
}

kernels::ConvShape Model::conv_descriptor(const LayerState& l, int batch) const {
  kernels::ConvShape cs;
  cs.batch = batch;
  cs.in_h = l.in_shape[0];
  cs.in_w = l.in_shape[1];
  cs.in_c = l.in_shape[2];
  cs.k_h = cs.k_w = l.spec.kernel;
  cs.out_c = l.spec.kind == LayerKind::DepthwiseConv2d ? l.in_shape[2] : l.spec.channels;
  cs.stride = l.spec.stride;
  cs.pad_h = cs.pad_w = l.spec.same_pad ? same_padding(l.spec.kernel) : 0;
  return cs;
}

ForwardRecord Model::forward(Tape& t, NodeId x, const ForwardOptions& opt) {
  const Tensor& xv = t.value(x);
  {
    std::vector<int> expect = input_shape_;
    expect.insert(expect.begin(), xv.ndim() > 0 ? xv.dim(0) : 0);
    if (xv.shape() != expect)
      throw std::invalid_argument("model input shape mismatch: got " + xv.shape_str() +
                                  ", expected (batch," + Tensor(input_shape_).shape_str().substr(1));
  }
  const int B = xv.dim(0);
  ForwardRecord rec;
  rec.input = x;
  rec.layers.resize(layers_.size());
  std::vector<NodeId> outs(layers_.size(), -1);
  NodeId cur = x;

  auto quantized_weight = [&](LayerState& l, int tensor_idx, LayerTrace& tr) -> NodeId {
    NodeId w = t.input(l.weights[std::size_t(tensor_idx)]);
    rec.params.push_back(w);
    QuantizerSpec q = l.spec.weight_quantizer;
    if (opt.mode == ForwardMode::Quantized && q.kind != QuantKind::Identity) {
      if (is_stochastic(q.kind) && opt.rng == nullptr) q.kind = deterministic_counterpart(q.kind);
      w = t.quantize_ste(w, q, opt.step, opt.schedule, opt.rng);
    }
    tr.effective.push_back(w);
    return w;
  };
  auto plain_param = [&](LayerState& l, int tensor_idx, LayerTrace& tr) -> NodeId {
    NodeId p = t.input(l.weights[std::size_t(tensor_idx)]);
    rec.params.push_back(p);
    tr.effective.push_back(p);
    return p;
  };
  // bias over the trailing channel axis of an n-d node
  auto channel_bias = [&](NodeId y, NodeId b) -> NodeId {
    const std::vector<int> shape = t.value(y).shape();
    const int c = shape.back();
    const int rows = int(t.value(y).size() / c);
    NodeId flat = t.reshape(y, {rows, c});
    NodeId sum = t.add(flat, t.row_broadcast(b, rows));
    return t.reshape(sum, shape);
  };

  for (int i = 0; i < int(layers_.size()); ++i) {
    LayerState& l = layers_[std::size_t(i)];
    LayerTrace& tr = rec.layers[std::size_t(i)];
    tr.input = cur;
    switch (l.spec.kind) {
      case LayerKind::Dense: {
        NodeId w = quantized_weight(l, 0, tr);
        NodeId b = plain_param(l, 1, tr);
        cur = t.add(t.matmul(cur, w), t.row_broadcast(b, B));
        break;
      }
      case LayerKind::Conv2d: {
        NodeId w = quantized_weight(l, 0, tr);
        NodeId b = plain_param(l, 1, tr);
        cur = channel_bias(t.conv2d(cur, w, conv_descriptor(l, B)), b);
        break;
      }
      case LayerKind::DepthwiseConv2d: {
        NodeId w = quantized_weight(l, 0, tr);
        NodeId b = plain_param(l, 1, tr);
        cur = channel_bias(t.depthwise(cur, w, conv_descriptor(l, B)), b);
        break;
      }
      case LayerKind::SeparableConv2d: {
        NodeId wd = quantized_weight(l, 0, tr);
        NodeId wp = quantized_weight(l, 1, tr);
        NodeId b = plain_param(l, 2, tr);
        kernels::ConvShape cs = conv_descriptor(l, B);
        cs.out_c = cs.in_c;
        NodeId dw = t.depthwise(cur, wd, cs);
        const int oh = cs.out_h(), ow = cs.out_w();
        NodeId flat = t.reshape(dw, {B * oh * ow, cs.in_c});
        NodeId pw = t.matmul(flat, wp);
        NodeId biased = t.add(pw, t.row_broadcast(b, B * oh * ow));
        cur = t.reshape(biased, {B, oh, ow, l.spec.channels});
        break;
      }
      case LayerKind::BatchNorm: {
        NodeId gamma = plain_param(l, 0, tr);
        NodeId beta = plain_param(l, 1, tr);
        const std::vector<int> shape = t.value(cur).shape();
        const int c = shape.back();
        const int rows = int(t.value(cur).size() / c);
        NodeId xr = t.reshape(cur, {rows, c});
        NodeId centered, inv;
        if (opt.bn == BnMode::Batch) {
          NodeId mu = t.scale(t.col_sum(xr), 1.0 / rows);
          NodeId ex2 = t.scale(t.col_sum(t.mul(xr, xr)), 1.0 / rows);
          NodeId var = t.sub(ex2, t.mul(mu, mu));
          inv = t.rsqrt(t.affine(var, 1.0, kBnEps));
          centered = t.sub(xr, t.row_broadcast(mu, rows));
          if (opt.update_moving) {
            const Tensor &m = t.value(mu), &v = t.value(var);
            for (std::int64_t j = 0; j < m.size(); ++j) {
              l.stats[0][j] = kBnMomentum * l.stats[0][j] + (1.0 - kBnMomentum) * m[j];
              l.stats[1][j] = kBnMomentum * l.stats[1][j] + (1.0 - kBnMomentum) * v[j];
            }
          }
        } else {
          Tensor m, v;
          if (opt.bn == BnMode::Moving) {
            m = l.stats[0];
            v = l.stats[1];
          } else {
            const Tensor& xval = t.value(xr);
            m = Tensor({c});
            v = Tensor({c});
            for (int r = 0; r < rows; ++r)
              for (int j = 0; j < c; ++j) m[j] += xval[std::int64_t(r) * c + j];
            for (std::int64_t j = 0; j < c; ++j) m[j] /= rows;
            for (int r = 0; r < rows; ++r)
              for (int j = 0; j < c; ++j) {
                double d = xval[std::int64_t(r) * c + j] - m[j];
                v[j] += d * d;
              }
            for (std::int64_t j = 0; j < c; ++j) v[j] /= rows;
          }
          Tensor invt({c});
          for (std::int64_t j = 0; j < c; ++j) invt[j] = 1.0 / std::sqrt(v[j] + kBnEps);
          centered = t.sub(xr, t.row_broadcast(t.constant(std::move(m)), rows));
          inv = t.constant(std::move(invt));
        }
        tr.bn_inv = inv;
        NodeId xhat = t.mul(centered, t.row_broadcast(inv, rows));
        NodeId y = t.add(t.mul(xhat, t.row_broadcast(gamma, rows)),
                         t.row_broadcast(beta, rows));
        cur = t.reshape(y, shape);
        break;
      }
      case LayerKind::Relu:
        cur = t.relu(cur);
        break;
      case LayerKind::Sigmoid:
        cur = t.sigmoid(cur);
        break;
      case LayerKind::ResidualAdd:
        cur = t.add(cur, outs[std::size_t(l.spec.residual_from)]);
        break;
      case LayerKind::Flatten:
        cur = t.reshape(cur, {B, int(shape_product(l.in_shape))});
        break;
      case LayerKind::GlobalAvgPool: {
        const int h = l.in_shape[0], w = l.in_shape[1], c = l.in_shape[2];
        cur = t.spatial_mean(t.reshape(cur, {B, h * w, c}));
        break;
      }
      case LayerKind::SoftmaxOut:
        break;
    }
    if (opt.mode == ForwardMode::Quantized && l.spec.activation_quantizer.kind != QuantKind::Identity) {
      QuantizerSpec q = l.spec.activation_quantizer;
      if (is_stochastic(q.kind) && opt.rng == nullptr) q.kind = deterministic_counterpart(q.kind);
      cur = t.quantize_ste(cur, q, opt.step, opt.schedule, opt.rng);
    }
    if (opt.output_noise > 0.0 && opt.rng != nullptr) {
      Tensor nz = Tensor::zeros_like(t.value(cur));
      for (std::int64_t j = 0; j < nz.size(); ++j) nz[j] = opt.rng->normal() * opt.output_noise;
      cur = t.add(cur, t.constant(std::move(nz)));
    }
    outs[std::size_t(i)] = cur;
    tr.output = cur;
  }
  rec.logits = cur;
  return rec;
}

Tensor Model::predict(const Tensor& x, ForwardMode mode) const {
  Tape t;
  NodeId xi = t.input(x);
  ForwardOptions opt;
  opt.mode = mode;
  opt.bn = BnMode::Moving;
  // forward() mutates only moving stats, and update_moving is off here
  ForwardRecord rec = const_cast<Model*>(this)->forward(t, xi, opt);
  return t.value(rec.logits);
}

std::vector<Tensor*> Model::trainable() {
  std::vector<Tensor*> out;
  for (auto& l : layers_)
    for (auto& w : l.weights) out.push_back(&w);
  return out;
}

std::vector<const Tensor*> Model::trainable() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_)
    for (const auto& w : l.weights) out.push_back(&w);
  return out;
}

ParamCounts Model::count_params() const {
  ParamCounts c;
  for (const auto& l : layers_) {
    for (const auto& w : l.weights) c.trainable += w.size();
    for (const auto& s : l.stats) c.non_trainable += s.size();
  }
  c.total = c.trainable + c.non_trainable;
  return c;
}

std::size_t Model::flash_footprint() const {
  std::size_t bytes = 0;
  for (const auto& l : layers_) {
    long params = 0;
    for (const auto& w : l.weights) params += w.size();
    for (const auto& s : l.stats) params += s.size();
    if (params == 0) continue;
    const long bits = weight_bits(l.spec.weight_quantizer);
    bytes += std::size_t((params * bits + 7) / 8);
  }
  return bytes;
}

namespace {

void write_bytes(std::ofstream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), std::streamsize(n));
}

template <typename T>
void write_pod(std::ofstream& os, T v) {
  write_bytes(os, &v, sizeof v);
}

void write_tensor(std::ofstream& os, const Tensor& t) {
  write_pod<std::uint8_t>(os, std::uint8_t(t.ndim()));
  for (int i = 0; i < t.ndim(); ++i) write_pod<std::int32_t>(os, t.dim(i));
  write_bytes(os, t.data(), sizeof(double) * std::size_t(t.size()));
}

void write_quantizer(std::ofstream& os, const QuantizerSpec& q) {
  write_pod<std::uint8_t>(os, std::uint8_t(q.kind));
  write_pod<std::int32_t>(os, q.bits);
  write_pod<double>(os, q.threshold);
  write_pod<double>(os, q.ste_clip);
}

void read_bytes(std::ifstream& is, void* p, std::size_t n) {
  if (!is.read(static_cast<char*>(p), std::streamsize(n)))
    throw std::runtime_error("truncated checkpoint");
}

template <typename T>
T read_pod(std::ifstream& is) {
  T v;
  read_bytes(is, &v, sizeof v);
  return v;
}

Tensor read_tensor(std::ifstream& is) {
  const int rank = read_pod<std::uint8_t>(is);
  std::vector<int> shape(std::size_t(rank), 0);
  for (int i = 0; i < rank; ++i) shape[std::size_t(i)] = read_pod<std::int32_t>(is);
  Tensor t(shape);
  read_bytes(is, t.data(), sizeof(double) * std::size_t(t.size()));
  return t;
}

QuantizerSpec read_quantizer(std::ifstream& is) {
  QuantizerSpec q;
  q.kind = QuantKind(read_pod<std::uint8_t>(is));
  q.bits = read_pod<std::int32_t>(is);
  q.threshold = read_pod<double>(is);
  q.ste_clip = read_pod<double>(is);
  return q;
}

} // namespace

void Model::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  os.write("TQRM", 4);
  write_pod<std::uint32_t>(os, 1); // format version
  write_pod<std::uint32_t>(os, std::uint32_t(input_shape_.size()));
  for (int d : input_shape_) write_pod<std::int32_t>(os, d);
  write_pod<std::int32_t>(os, classes_);
  write_pod<std::uint64_t>(os, seed_);
  write_pod<std::uint32_t>(os, std::uint32_t(layers_.size()));
  for (const auto& l : layers_) {
    write_pod<std::uint8_t>(os, std::uint8_t(l.spec.kind));
    write_pod<std::int32_t>(os, l.spec.units);
    write_pod<std::int32_t>(os, l.spec.kernel);
    write_pod<std::int32_t>(os, l.spec.channels);
    write_pod<std::int32_t>(os, l.spec.stride);
    write_pod<std::uint8_t>(os, l.spec.same_pad ? 1 : 0);
    write_pod<std::int32_t>(os, l.spec.residual_from);
    write_quantizer(os, l.spec.weight_quantizer);
    write_quantizer(os, l.spec.activation_quantizer);
    write_pod<std::uint32_t>(os, std::uint32_t(l.weights.size()));
    for (const auto& w : l.weights) write_tensor(os, w);
    write_pod<std::uint32_t>(os, std::uint32_t(l.stats.size()));
    for (const auto& s : l.stats) write_tensor(os, s);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  read_bytes(is, magic, 4);
  if (std::memcmp(magic, "TQRM", 4) != 0) throw std::runtime_error("bad checkpoint magic");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");
  const auto rank = read_pod<std::uint32_t>(is);
  std::vector<int> input_shape(rank);
  for (auto& d : input_shape) d = read_pod<std::int32_t>(is);
  const int classes = read_pod<std::int32_t>(is);
  const auto seed = read_pod<std::uint64_t>(is);
  const auto n_layers = read_pod<std::uint32_t>(is);
  std::vector<LayerSpec> specs(n_layers);
  std::vector<std::vector<Tensor>> weights(n_layers), stats(n_layers);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerSpec& s = specs[i];
    s.kind = LayerKind(read_pod<std::uint8_t>(is));
    s.units = read_pod<std::int32_t>(is);
    s.kernel = read_pod<std::int32_t>(is);
    s.channels = read_pod<std::int32_t>(is);
    s.stride = read_pod<std::int32_t>(is);
    s.same_pad = read_pod<std::uint8_t>(is) != 0;
    s.residual_from = read_pod<std::int32_t>(is);
    s.weight_quantizer = read_quantizer(is);
    s.activation_quantizer = read_quantizer(is);
    const auto nw = read_pod<std::uint32_t>(is);
    for (std::uint32_t j = 0; j < nw; ++j) weights[i].push_back(read_tensor(is));
    const auto ns = read_pod<std::uint32_t>(is);
    for (std::uint32_t j = 0; j < ns; ++j) stats[i].push_back(read_tensor(is));
  }
  Model m(input_shape, classes, specs, seed);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    auto check_assign = [&](std::vector<Tensor>& dst, std::vector<Tensor>& src) {
      if (dst.size() != src.size()) throw std::runtime_error("checkpoint layer tensor count mismatch");
      for (std::size_t j = 0; j < dst.size(); ++j) {
        if (!dst[j].same_shape(src[j])) throw std::runtime_error("checkpoint tensor shape mismatch");
        dst[j] = std::move(src[j]);
      }
    };
    check_assign(m.layers_[i].weights, weights[i]);
    check_assign(m.layers_[i].stats, stats[i]);
  }
  return m;
}

Tensor softmax_with_temperature(const Tensor& logits, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("softmax temperature must be positive");
  if (logits.ndim() != 2) throw std::invalid_argument("softmax expects (batch,classes) logits");
  const int b = logits.dim(0), k = logits.dim(1);
  Tensor out({b, k});
  for (int i = 0; i < b; ++i) {
    const double* z = logits.data() + std::int64_t(i) * k;
    double m = z[0] / T;
    for (int j = 1; j < k; ++j) m = std::max(m, z[j] / T);
    double denom = 0.0;
    for (int j = 0; j < k; ++j) denom += std::exp(z[j] / T - m);
    for (int j = 0; j < k; ++j) out[std::int64_t(i) * k + j] = std::exp(z[j] / T - m) / denom;
  }
  return out;
}

int argmax_row(const Tensor& logits, int row) {
  const int k = logits.dim(logits.ndim() - 1);
  const double* z = logits.data() + std::int64_t(row) * k;
  int best = 0;
  for (int j = 1; j < k; ++j)
    if (z[j] > z[best]) best = j;
  return best;
}

std::vector<LayerSpec> preset_conv_small(int classes) {
  auto conv = [](int ch) {
    LayerSpec s;
    s.kind = LayerKind::Conv2d;
    s.kernel = 3;
    s.channels = ch;
    return s;
  };
  auto plain = [](LayerKind k) {
    LayerSpec s;
    s.kind = k;
    return s;
  };
  auto dense = [](int units) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    return s;
  };
  LayerSpec dw = plain(LayerKind::DepthwiseConv2d);
  dw.kernel = 3;
  LayerSpec sep = plain(LayerKind::SeparableConv2d);
  sep.kernel = 3;
  sep.channels = 16;
  LayerSpec res = plain(LayerKind::ResidualAdd);
  res.residual_from = 2; // first activation block output
  return {
      conv(8),  plain(LayerKind::BatchNorm), plain(LayerKind::Relu),
      conv(8),  plain(LayerKind::BatchNorm), plain(LayerKind::Relu),
      res,
      dw,       plain(LayerKind::BatchNorm), plain(LayerKind::Relu),
      sep,      plain(LayerKind::BatchNorm), plain(LayerKind::Sigmoid),
      conv(16), plain(LayerKind::BatchNorm), plain(LayerKind::Relu),
      conv(24), plain(LayerKind::BatchNorm), plain(LayerKind::Relu),
      plain(LayerKind::GlobalAvgPool),
      dense(48), plain(LayerKind::Relu),
      dense(32), plain(LayerKind::Relu),
      dense(classes),
      plain(LayerKind::SoftmaxOut),
  };
}

std::vector<LayerSpec> preset_mlp_small(int hidden, int classes) {
  auto dense = [](int units) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    return s;
  };
  LayerSpec relu;
  relu.kind = LayerKind::Relu;
  LayerSpec out;
  out.kind = LayerKind::SoftmaxOut;
  return {dense(hidden), relu, dense(hidden), relu, dense(classes), out};
}

void apply_weight_quantizer(std::vector<LayerSpec>& layers, const QuantizerSpec& q) {
  for (auto& l : layers)
    switch (l.kind) {
      case LayerKind::Dense:
      case LayerKind::Conv2d:
      case LayerKind::DepthwiseConv2d:
      case LayerKind::SeparableConv2d:
        l.weight_quantizer = q;
        break;
      default:
        break;
    }
}

void apply_activation_quantizer(std::vector<LayerSpec>& layers, const QuantizerSpec& q) {
  for (auto& l : layers)
    switch (l.kind) {
      case LayerKind::Relu:
      case LayerKind::Sigmoid:
        l.activation_quantizer = q;
        break;
      default:
        break;
    }
}

} // namespace tqr
