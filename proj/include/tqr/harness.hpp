#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tqr/attacks.hpp"
#include "tqr/dataset.hpp"
#include "tqr/model.hpp"
#include "tqr/train.hpp"

namespace tqr {

// Runs fn(0..n-1) on up to `threads` workers. Iterations must be independent;
// callers own ordering by writing to per-index slots. The first exception
// thrown by any iteration is rethrown after all workers finish.
void parallel_for(long n, int threads, const std::function<void(long)>& fn);

// One (model, attack, epsilon, fold) measurement. `mean`/`std_dev` aggregate
// the condition across folds and repeat on every fold row. `seconds` holds
// measured wall time in memory only; the CSV always prints 0.000 so repeated
// runs stay byte-identical.
struct ReportRecord {
  std::string model;
  std::string quantizer;
  std::string attack; // "clean" or an attack kind name
  double epsilon = 0.0;
  int fold = 0;
  double accuracy = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
  long footprint_bytes = 0;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::vector<ReportRecord> records;

  std::string csv() const;     // model,quantizer,attack,epsilon,fold,accuracy,mean,std,footprint_bytes,seconds
  std::string summary() const; // condition-level table, one row per (model, attack, epsilon)
};

// Label for report rows: kind of the first non-identity weight quantizer
// ("fixed_point@8" includes the bit width), or "fp32" when every layer is
// full precision.
std::string quantizer_label(const Model& model);

Dataset dataset_subset(const Dataset& data, const std::vector<long>& indices);

double evaluate_clean(const Model& model, const Dataset& data);

struct AttackEvaluation {
  double accuracy = 0.0;  // top-1 on the adversarial inputs
  AdversarialBatch batch; // merged in sample order
};

// Attacks every sample with per-sample seed cfg.seed ^ index, so results do
// not depend on the thread count. A sample the boundary attack cannot seed
// keeps its clean input with success=false instead of failing the run.
AttackEvaluation evaluate_under_attack(const Model& model, const Dataset& data,
                                       const AttackConfig& cfg, int threads = 1);

// One record per epsilon, sharing `base`'s settings and seed across the list
// so rows are paired. `eps_list` must be non-empty and ascending.
ExperimentReport epsilon_sweep(const Model& model, const Dataset& data, AttackKind kind,
                               const std::vector<double>& eps_list, const AttackConfig& base,
                               const std::string& model_label = "model", int threads = 1);

using ModelBuilder = std::function<Model(std::uint64_t seed)>;

// Trains a fresh model per fold (fold-derived seed) and evaluates clean
// accuracy plus every configured attack on that fold's validation split.
// Attack seeds derive from the fold only, so conditions stay paired.
ExperimentReport kfold_robustness(const ModelBuilder& builder, const Dataset& data,
                                  const TrainConfig& cfg,
                                  const std::vector<AttackConfig>& attacks, int K,
                                  const std::string& model_label = "model", int threads = 1);

// One K-fold robustness block per training temperature; the T=1 block is the
// undistilled baseline.
ExperimentReport distillation_compare(const ModelBuilder& builder, const Dataset& data,
                                      const TrainConfig& cfg,
                                      const std::vector<AttackConfig>& attacks, int K,
                                      const std::vector<double>& temperatures, int threads = 1);

} // namespace tqr
