#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tqr/dataset.hpp"
#include "tqr/model.hpp"

namespace tqr {

enum class Optimizer { Sgd, Rmsprop, Adamax };
enum class JrMode { Off, Full, PerLayer };

Optimizer optimizer_from_name(const std::string& name);
std::string optimizer_name(Optimizer o);
JrMode jr_mode_from_name(const std::string& name);
std::string jr_mode_name(JrMode m);

struct TrainConfig {
  int epochs = 1;
  int batch_size = 32;
  double lr_min = 1e-4;
  double lr_max = 1e-2;
  Optimizer optimizer = Optimizer::Rmsprop;
  double jr_lambda = 0.01; // active only when jr_mode != Off
  JrMode jr_mode = JrMode::Off;
  double distill_T = 1.0; // softmax temperature inside the training loss
  std::uint64_t seed = 0;
  StochasticSchedule schedule;
  double output_noise = 0.0; // stddev of additive per-layer output noise

  bool operator==(const TrainConfig&) const = default;

  void validate() const;
};

struct FoldPlan {
  int K = 0;
  std::vector<std::vector<long>> train_idx;
  std::vector<std::vector<long>> val_idx;
};

// shuffled partition into K validation folds of size floor(n/K) or ceil(n/K)
FoldPlan kfold_split(long n, int K, std::uint64_t seed);

// lr_min + 0.5*(lr_max - lr_min)*(1 + cos(pi*step/total_steps))
double cosine_lr(long step, long total_steps, double lr_min, double lr_max);

// mean over the batch of -sum_k y_k*log(softmax(z/T)_k), log clamped at 1e-12
double cross_entropy_loss(const Tensor& logits, const Tensor& y_onehot, double T);

struct Batch {
  Tensor x; // (B, input shape...)
  Tensor y; // (B, classes) one-hot
};

// cross-entropy plus jr_lambda times the Jacobian regularizer selected by
// jr_mode, evaluated with training-forward semantics at step 0
double joint_loss(Model& model, const Batch& batch, const TrainConfig& cfg);

struct TrainState {
  std::vector<Tensor> m1, m2; // per-tensor optimizer slots
  long adamax_t = 0;
};

// One quantization-aware step: quantized forward, straight-through backward,
// optimizer update applied to the full-precision masters. Returns the
// pre-update batch loss.
double qat_train_step(Model& model, const Batch& batch, const TrainConfig& cfg, long step,
                      double lr, RngStream& rng, TrainState& state);

struct EpochStats {
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

std::string history_csv_header(); // "epoch,loss,train_acc,val_acc,lr"
std::string history_csv_row(int epoch, const EpochStats& s);

// Full training loop: epochs * ceil(n/batch_size) steps under cosine LR.
// val_acc tracks `validation` when given, else the training set.
TrainHistory train(Model& model, const Dataset& data, const TrainConfig& cfg,
                   const Dataset* validation = nullptr);

// fraction of records whose quantized-mode argmax matches the label
double accuracy(const Model& model, const Dataset& data);

} // namespace tqr
