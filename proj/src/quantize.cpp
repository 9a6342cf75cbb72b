#include "tqr/quantize.hpp"

#include <cmath>
#include <stdexcept>

#include "tqr/kernels.hpp"

namespace tqr {

void validate(const QuantizerSpec& spec) {
  switch (spec.kind) {
    case QuantKind::FixedPoint:
      if (spec.bits < 2 || spec.bits > 16)
        throw std::invalid_argument("fixed_point requires 2 <= bits <= 16");
      break;
    case QuantKind::QuantizedRelu:
      if (spec.bits < 1 || spec.bits > 16)
        throw std::invalid_argument("quantized_relu requires 1 <= bits <= 16");
      break;
    case QuantKind::Ternary:
    case QuantKind::StochasticTernary:
      if (!(spec.threshold > 0.0 && spec.threshold < 1.0))
        throw std::invalid_argument("ternary threshold must lie in (0,1)");
      break;
    default:
      break;
  }
  if (!(spec.ste_clip > 0.0)) throw std::invalid_argument("ste_clip must be positive");
}

bool is_stochastic(QuantKind k) {
  return k == QuantKind::StochasticBinary || k == QuantKind::StochasticTernary;
}

QuantKind deterministic_counterpart(QuantKind k) {
  if (k == QuantKind::StochasticBinary) return QuantKind::Binary;
  if (k == QuantKind::StochasticTernary) return QuantKind::Ternary;
  return k;
}

std::string quant_kind_name(QuantKind k) {
  switch (k) {
    case QuantKind::Identity: return "identity";
    case QuantKind::Binary: return "binary";
    case QuantKind::StochasticBinary: return "stochastic_binary";
    case QuantKind::Ternary: return "ternary";
    case QuantKind::StochasticTernary: return "stochastic_ternary";
    case QuantKind::FixedPoint: return "fixed_point";
    case QuantKind::QuantizedRelu: return "quantized_relu";
  }
  return "unknown";
}

QuantKind quant_kind_from_name(const std::string& name) {
  if (name == "identity") return QuantKind::Identity;
  if (name == "binary") return QuantKind::Binary;
  if (name == "stochastic_binary") return QuantKind::StochasticBinary;
  if (name == "ternary") return QuantKind::Ternary;
  if (name == "stochastic_ternary") return QuantKind::StochasticTernary;
  if (name == "fixed_point") return QuantKind::FixedPoint;
  if (name == "quantized_relu") return QuantKind::QuantizedRelu;
  throw std::invalid_argument("unknown quantizer kind: " + name);
}

int weight_bits(const QuantizerSpec& spec) {
  switch (spec.kind) {
    case QuantKind::Identity: return 32;
    case QuantKind::Binary:
    case QuantKind::StochasticBinary: return 1;
    case QuantKind::Ternary:
    case QuantKind::StochasticTernary: return 2;
    case QuantKind::FixedPoint:
    case QuantKind::QuantizedRelu: return spec.bits;
  }
  return 32;
}

double schedule_portion(const StochasticSchedule& s, long step) {
  if (step < 0) throw std::invalid_argument("schedule step must be non-negative");
  long clamped = std::min(step, s.total_steps);
  return s.r0 + (s.r_final - s.r0) * double(clamped) / double(s.total_steps);
}

namespace {

Tensor ternary_image(const QuantizerSpec& spec, const Tensor& x) {
  double amax = 0.0;
  for (std::int64_t i = 0; i < x.size(); ++i) amax = std::max(amax, std::fabs(x[i]));
  Tensor out(x.shape());
  if (amax == 0.0) return out;
  kernels::ternary_cut(x.data(), spec.threshold * amax, out.data(), std::size_t(x.size()));
  return out;
}

} // namespace

Tensor quantize_forward(const QuantizerSpec& spec, const Tensor& x, long step,
                        const StochasticSchedule* schedule, RngStream* rng) {
  validate(spec);
  if (is_stochastic(spec.kind) && rng == nullptr)
    throw std::invalid_argument("stochastic quantizer requires an rng stream");
  const std::size_t n = std::size_t(x.size());
  switch (spec.kind) {
    case QuantKind::Identity:
      return x;
    case QuantKind::Binary: {
      Tensor out(x.shape());
      kernels::sign_binary(x.data(), out.data(), n);
      return out;
    }
    case QuantKind::StochasticBinary: {
      Tensor out(x.shape());
      for (std::int64_t i = 0; i < x.size(); ++i) {
        double p = (std::min(std::max(x[i], -1.0), 1.0) + 1.0) / 2.0;
        out[i] = rng->bernoulli(p) ? 1.0 : -1.0;
      }
      return out;
    }
    case QuantKind::Ternary:
      return ternary_image(spec, x);
    case QuantKind::StochasticTernary: {
      Tensor t = ternary_image(spec, x);
      double e_max = 0.0;
      for (std::int64_t i = 0; i < x.size(); ++i)
        e_max = std::max(e_max, std::fabs(x[i] - t[i]));
      double r = schedule ? schedule_portion(*schedule, step) : 1.0;
      Tensor out(x.shape());
      for (std::int64_t i = 0; i < x.size(); ++i) {
        double p = e_max == 0.0 ? r : r * (1.0 - std::fabs(x[i] - t[i]) / e_max);
        out[i] = rng->bernoulli(p) ? t[i] : x[i];
      }
      return out;
    }
    case QuantKind::FixedPoint: {
      double s = std::ldexp(1.0, spec.bits - 1);
      Tensor out(x.shape());
      kernels::fixed_point(x.data(), s, -s, s - 1.0, out.data(), n);
      return out;
    }
    case QuantKind::QuantizedRelu: {
      double s = std::ldexp(1.0, spec.bits);
      Tensor pos(x.shape());
      kernels::relu(x.data(), pos.data(), n);
      Tensor out(x.shape());
      kernels::fixed_point(pos.data(), s, 0.0, s - 1.0, out.data(), n);
      return out;
    }
  }
  throw std::logic_error("unreachable quantizer kind");
}

Tensor quantize_backward(const QuantizerSpec& spec, const Tensor& x, const Tensor& upstream) {
  validate(spec);
  if (!x.same_shape(upstream))
    throw std::invalid_argument("quantize_backward shape mismatch: " + x.shape_str() + " vs " +
                                upstream.shape_str());
  const std::size_t n = std::size_t(x.size());
  Tensor out(x.shape());
  switch (spec.kind) {
    case QuantKind::Identity:
      return upstream;
    case QuantKind::QuantizedRelu:
      kernels::ste_mask_relu(x.data(), upstream.data(), spec.ste_clip, out.data(), n);
      return out;
    default:
      kernels::ste_mask(x.data(), upstream.data(), spec.ste_clip, out.data(), n);
      return out;
  }
}

} // namespace tqr
