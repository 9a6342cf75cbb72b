#pragma once

#include <string>

#include "tqr/rng.hpp"
#include "tqr/tensor.hpp"

namespace tqr {

enum class QuantKind {
  Identity,
  Binary,
  StochasticBinary,
  Ternary,
  StochasticTernary,
  FixedPoint,
  QuantizedRelu,
};

struct QuantizerSpec {
  QuantKind kind = QuantKind::Identity;
  int bits = 8;                   // fixed_point / quantized_relu
  double threshold = 1.0 / 3.0;   // ternary cutoff, relative to max|x|
  double ste_clip = 1.0;          // gradient pass-through half-width

  bool operator==(const QuantizerSpec&) const = default;
};

// throws std::invalid_argument on out-of-range bits/threshold/ste_clip
void validate(const QuantizerSpec& spec);

bool is_stochastic(QuantKind k);

// stochastic kinds map to their deterministic counterparts (deployed-model
// semantics for evaluation and attacks); deterministic kinds map to themselves
QuantKind deterministic_counterpart(QuantKind k);

std::string quant_kind_name(QuantKind k);
QuantKind quant_kind_from_name(const std::string& name);

// bit-width a weight of this quantizer occupies in flash
int weight_bits(const QuantizerSpec& spec);

// Growing quantized portion r(step): linear from r0 at step 0 to r_final at
// total_steps, clamped beyond.
struct StochasticSchedule {
  double r0 = 1.0;
  double r_final = 1.0;
  long total_steps = 1;

  bool operator==(const StochasticSchedule&) const = default;
};

double schedule_portion(const StochasticSchedule& s, long step);

// Forward quantization. `schedule` may be null (stochastic_ternary then uses a
// fully quantized portion r=1); `rng` is required for stochastic kinds.
Tensor quantize_forward(const QuantizerSpec& spec, const Tensor& x, long step,
                        const StochasticSchedule* schedule, RngStream* rng);

// Straight-through estimator: upstream gated to zero outside the pass-through
// region (|x| <= ste_clip; quantized_relu: 0 <= x <= ste_clip; identity: no
// gating).
Tensor quantize_backward(const QuantizerSpec& spec, const Tensor& x, const Tensor& upstream);

} // namespace tqr
