#pragma once

#include <string>

#include "tqr/model.hpp"

namespace tqr {

// Row k holds the gradient of output component k with respect to the
// flattened input of the network (layer == -1) or of one layer.
struct JacobianMatrix {
  Tensor matrix; // (out_dim, in_dim)
  Tensor point;  // evaluation input, batch dimension stripped
  int layer = -1;
};

// Analysis runs the straight-through path for quantized models by default:
// the exact Jacobian of a piecewise-constant quantizer is zero almost
// everywhere, which says nothing about sensitivity. Pass
// ForwardMode::FullPrecision to bypass quantizers entirely.
struct JacobianOptions {
  ForwardMode mode = ForwardMode::Quantized;
  bool post_softmax = false; // differentiate softmax(z/T) instead of logits
  double temperature = 1.0;
};

JacobianMatrix jacobian_full(const Model& model, const Tensor& x,
                             const JacobianOptions& opt = {});

// Σ_k ||∇_x z_k||²; agrees with the entrywise sum of squares of
// jacobian_full but is computed without materializing the matrix.
double jr_frobenius(const Model& model, const Tensor& x, const JacobianOptions& opt = {});

// Jacobian of layer `layer`'s output with respect to its own input, at the
// activations induced by x. post_softmax is ignored here.
JacobianMatrix jacobian_per_layer(const Model& model, const Tensor& x, int layer,
                                  const JacobianOptions& opt = {});

struct SensitivityProbe {
  double ratio = 0.0;    // ||z(x_p) - z(x)||² / ||x_p - x||²
  double max_frob = 0.0; // max ||J||_F² over the sampled segment
  bool holds = false;    // ratio <= max_frob
};

// Samples n_segment_samples equally spaced points on [x, x_p] (endpoints
// included) for the Frobenius bound. The bound is sampled, not certified;
// on non-linear models `holds` is a report, not a guarantee.
SensitivityProbe sensitivity_probe(const Model& model, const Tensor& x, const Tensor& x_p,
                                   int n_segment_samples = 16,
                                   const JacobianOptions& opt = {});

std::string probe_csv_header(); // "ratio,max_frob,holds"
std::string probe_csv_row(const SensitivityProbe& p);

// Squared Frobenius norm of layer `layer`'s input-output Jacobian for the
// single-sample forward recorded in `rec`, emitted as a differentiable tape
// node via closed forms (no per-row backward passes). Straight-through masks
// from activation quantizers enter as constants; parametric layers must keep
// an identity activation quantizer (attach quantizers to the activation
// layers instead, as apply_activation_quantizer does).
NodeId layer_frobenius_sq_node(Tape& t, const Model& model, const ForwardRecord& rec,
                               int layer);

} // namespace tqr
