#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tqr/attacks.hpp"
#include "tqr/dataset.hpp"
#include "tqr/model.hpp"
#include "tqr/train.hpp"

namespace tqr {

struct DatasetSpec {
  std::string kind = "synthetic_gaussians"; // cifar10_binary | synthetic_gaussians | synthetic_checkerboard
  std::string path;                         // cifar10_binary record file
  std::vector<int> classes = {0, 1};        // cifar: kept labels; synthetic: class count
  int downsample = 1;                       // cifar grayscale block factor, one of {1,2,4}
  long cap = 0;                             // cifar record cap, 0 = unlimited
  long samples = 200;                       // synthetic sample count
  double separation = 8.0;                  // gaussian cluster center distance

  bool operator==(const DatasetSpec&) const = default;
};

// Replaces one layer's quantizers; a field is applied only when its has_ flag
// was set by the config (absent JSON keys leave the preset/global choice).
struct LayerQuantOverride {
  int layer = 0;
  bool has_weight = false;
  bool has_activation = false;
  QuantizerSpec weight_quantizer;
  QuantizerSpec activation_quantizer;

  bool operator==(const LayerQuantOverride&) const = default;
};

struct ModelSpec {
  std::string preset = "mlp_small"; // mlp_small | conv_small
  int hidden = 32;                  // mlp_small width
  QuantizerSpec weight_quantizer;     // applied to every parametric layer
  QuantizerSpec activation_quantizer; // applied to every activation layer
  std::vector<LayerQuantOverride> overrides;

  bool operator==(const ModelSpec&) const = default;
};

// One JSON document drives a whole run; the top-level seed is the only
// randomness source (train and attack seeds derive from it), so equal configs
// give byte-identical reports.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = "out";
  DatasetSpec dataset;
  ModelSpec model;
  TrainConfig train;
  std::vector<AttackConfig> attacks;
  int kfold = 5;
  std::vector<double> sweep;                  // epsilon list for the sweep subcommand
  std::vector<double> temperatures = {1, 50}; // distill subcommand

  bool operator==(const ExperimentConfig&) const = default;

  void validate() const;
};

// Strict JSON: an unknown key at any level is an error, so typos cannot
// silently fall back to defaults. parse_config(serialize_config(c)) == c.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);

Dataset build_dataset(const DatasetSpec& spec, std::uint64_t seed);
std::vector<LayerSpec> build_layers(const ModelSpec& spec, int classes);
Model build_model(const ModelSpec& spec, const Dataset& data, std::uint64_t seed);

// Subcommands: train, evaluate, attack, sweep, kfold, distill, footprint,
// selftest. Exit 0 on success, 1 on flag/config errors, 2 on runtime errors.
int run(int argc, const char* const* argv);

} // namespace tqr
