#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tqr/model.hpp"

namespace tqr {

enum class AttackKind { Fgsm, Pgd, CwL2, Square, Boundary, Zoo };
enum class AttackNorm { Linf, L2 };

AttackKind attack_kind_from_name(const std::string& name);
std::string attack_kind_name(AttackKind k);
AttackNorm attack_norm_from_name(const std::string& name);
std::string attack_norm_name(AttackNorm n);

struct AttackConfig {
  AttackKind kind = AttackKind::Fgsm;
  double epsilon = 0.1; // ball radius (linf kinds); boundary per-step size
  double alpha = 0.01;  // pgd / zoo step size
  int max_iter = 10;
  AttackNorm norm = AttackNorm::Linf;
  double cw_kappa = 0.0; // confidence margin
  double cw_c = 1.0;     // misclassification trade-off constant
  double cw_lr = 0.05;   // Adam rate in tanh space
  long query_budget = 0; // black-box kinds; 0 = bounded by max_iter only
  std::uint64_t seed = 0;
  double bound_lo = -128.0;
  double bound_hi = 127.0;
  bool pgd_random_start = false;
  double zoo_h = 1e-4; // symmetric-difference probe step
  int zoo_coords = 16; // coordinates estimated per iteration
  double square_p_init = 0.5;
  // Interpret epsilon/alpha as [0,1]-image units and scale by 255 for models
  // fed [-128,127] grayscale inputs.
  bool epsilon_unit_scale = false;

  bool operator==(const AttackConfig&) const = default;

  void validate() const;
  double eff_epsilon() const { return epsilon_unit_scale ? epsilon * 255.0 : epsilon; }
  double eff_alpha() const { return epsilon_unit_scale ? alpha * 255.0 : alpha; }
};

struct AdversarialResult {
  bool success = false; // argmax(model(x')) != true label
  long queries = 0;
  double norm = 0.0; // achieved perturbation size (linf or l2 per attack)
};

struct AdversarialBatch {
  Tensor x_adv; // (B, input shape...)
  std::vector<AdversarialResult> results;
};

// Black-box view of a classifier: logits only, every call counted. Black-box
// attacks compile against this interface alone, so they cannot touch
// gradients by construction.
class ScoreOracle {
 public:
  virtual ~ScoreOracle() = default;
  virtual Tensor logits(const Tensor& x) = 0; // (1, shape...) -> (1, K)
  long queries() const { return queries_; }

 protected:
  long queries_ = 0;
};

class ModelOracle final : public ScoreOracle {
 public:
  explicit ModelOracle(const Model& m, ForwardMode mode = ForwardMode::Quantized)
      : model_(m), mode_(mode) {}
  Tensor logits(const Tensor& x) override {
    ++queries_;
    return model_.predict(x, mode_);
  }

 private:
  const Model& model_;
  ForwardMode mode_;
};

// White-box attacks. `y` holds true labels; `queries` counts forward passes.
AdversarialBatch fgsm(const Model& model, const Tensor& x, const std::vector<int>& y,
                      const AttackConfig& cfg);
AdversarialBatch pgd(const Model& model, const Tensor& x, const std::vector<int>& y,
                     const AttackConfig& cfg);
AdversarialBatch cw_l2(const Model& model, const Tensor& x, const std::vector<int>& y,
                       const AttackConfig& cfg);

// Black-box attacks; per-sample randomness comes from cfg.seed ^ sample index.
AdversarialBatch square_attack(ScoreOracle& oracle, const Tensor& x, const std::vector<int>& y,
                               const AttackConfig& cfg);
AdversarialBatch boundary_attack(ScoreOracle& oracle, const Tensor& x, const std::vector<int>& y,
                                 const AttackConfig& cfg);
AdversarialBatch zoo_attack(ScoreOracle& oracle, const Tensor& x, const std::vector<int>& y,
                            const AttackConfig& cfg);

// Symmetric-difference estimate of d(cross-entropy)/dx at the given
// coordinates; entries off the coordinate list stay zero.
Tensor zoo_gradient_estimate(ScoreOracle& oracle, const Tensor& x, int label,
                             const std::vector<long>& coords, double h);

// dispatch on cfg.kind, building the oracle for black-box kinds
AdversarialBatch run_attack(const Model& model, const Tensor& x, const std::vector<int>& y,
                            const AttackConfig& cfg);

// x' tensor as a raw (rank,dims,payload) record plus a CSV sidecar
// `index,success,queries,norm`
void save_adversarial_batch(const AdversarialBatch& batch, const std::string& tensor_path,
                            const std::string& csv_path);
Tensor load_adversarial_tensor(const std::string& tensor_path);

// reference hyperparameter presets (epsilon in [0,1]-image units)
AttackConfig preset_fgsm();            // eps 0.3
AttackConfig preset_pgd();             // eps 32/255, alpha 2/255, 7 iters
AttackConfig preset_square_coarse();   // eps 0.3, 10 iters
AttackConfig preset_square_fine();     // eps 0.05, 10000 iters
AttackConfig preset_boundary();        // step 0.01, 5000 iters
AttackConfig preset_zoo();             // eps 0.3, our iteration budget
std::vector<double> preset_fgsm_sweep(); // {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}

} // namespace tqr
