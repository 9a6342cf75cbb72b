#include "tqr/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tqr/csv.hpp"
#include "tqr/jacobian.hpp"

namespace tqr {

Optimizer optimizer_from_name(const std::string& name) {
  if (name == "sgd") return Optimizer::Sgd;
  if (name == "rmsprop") return Optimizer::Rmsprop;
  if (name == "adamax") return Optimizer::Adamax;
  throw std::invalid_argument("unknown optimizer: " + name);
}

std::string optimizer_name(Optimizer o) {
  switch (o) {
    case Optimizer::Sgd: return "sgd";
    case Optimizer::Rmsprop: return "rmsprop";
    case Optimizer::Adamax: return "adamax";
  }
  return "unknown";
}

JrMode jr_mode_from_name(const std::string& name) {
  if (name == "off") return JrMode::Off;
  if (name == "full") return JrMode::Full;
  if (name == "per_layer") return JrMode::PerLayer;
  throw std::invalid_argument("unknown jr mode: " + name);
}

std::string jr_mode_name(JrMode m) {
  switch (m) {
    case JrMode::Off: return "off";
    case JrMode::Full: return "full";
    case JrMode::PerLayer: return "per_layer";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (!(lr_min > 0.0) || !(lr_min <= lr_max))
    throw std::invalid_argument("learning rates must satisfy 0 < lr_min <= lr_max");
  if (jr_lambda < 0.0) throw std::invalid_argument("jr_lambda must be non-negative");
  if (distill_T < 1.0) throw std::invalid_argument("distillation temperature must be at least 1");
  if (output_noise < 0.0) throw std::invalid_argument("output noise must be non-negative");
  if (schedule.r0 < 0.0 || schedule.r0 > 1.0 || schedule.r_final < 0.0 || schedule.r_final > 1.0)
    throw std::invalid_argument("schedule portions must lie in [0,1]");
  if (schedule.total_steps < 1) throw std::invalid_argument("schedule total_steps must be at least 1");
}

FoldPlan kfold_split(long n, int K, std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("kfold needs at least two folds");
  if (long(K) > n)
    throw std::invalid_argument("more folds (" + std::to_string(K) + ") than samples (" +
                                std::to_string(n) + ")");
  std::vector<long> perm(std::size_t(n), 0L);
  std::iota(perm.begin(), perm.end(), 0L);
  RngStream rng(seed);
  rng.shuffle(perm);
  FoldPlan plan;
  plan.K = K;
  plan.train_idx.resize(std::size_t(K));
  plan.val_idx.resize(std::size_t(K));
  const long base = n / K, extra = n % K;
  long pos = 0;
  for (int f = 0; f < K; ++f) {
    const long len = base + (f < extra ? 1 : 0);
    auto& val = plan.val_idx[std::size_t(f)];
    val.assign(perm.begin() + pos, perm.begin() + pos + len);
    auto& tr = plan.train_idx[std::size_t(f)];
    tr.assign(perm.begin(), perm.begin() + pos);
    tr.insert(tr.end(), perm.begin() + pos + len, perm.end());
    pos += len;
  }
  return plan;
}

double cosine_lr(long step, long total_steps, double lr_min, double lr_max) {
  if (total_steps < 1) throw std::invalid_argument("total_steps must be at least 1");
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(M_PI * double(step) / double(total_steps)));
}

double cross_entropy_loss(const Tensor& logits, const Tensor& y_onehot, double T) {
  if (logits.ndim() != 2 || !logits.same_shape(y_onehot))
    throw std::invalid_argument("cross entropy expects matching (batch,classes) logits and labels");
  Tensor p = softmax_with_temperature(logits, T);
  const int B = logits.dim(0), K = logits.dim(1);
  double total = 0.0;
  for (int i = 0; i < B; ++i)
    for (int k = 0; k < K; ++k) {
      const double y = y_onehot[std::int64_t(i) * K + k];
      if (y != 0.0) total -= y * std::log(std::max(p[std::int64_t(i) * K + k], 1e-12));
    }
  return total / B;
}

namespace {

struct LossGraph {
  NodeId loss = -1;
  std::vector<NodeId> params; // master-order CE params, then JR-forward params
};

Tensor sample_row(const Tensor& x, long row) {
  std::vector<int> shape = x.shape();
  shape[0] = 1;
  Tensor out(shape);
  const std::int64_t stride = out.size();
  std::copy(x.data() + row * stride, x.data() + (row + 1) * stride, out.data());
  return out;
}

LossGraph build_loss(Tape& t, Model& m, const Batch& b, const TrainConfig& cfg, long step,
                     RngStream& rng, bool update_moving) {
  const int B = b.x.dim(0);
  // both forwards derive the same per-step stream so stochastic quantizers
  // draw identically in the loss and regularizer graphs
  RngStream ce_draws = rng.derive(std::uint64_t(step));
  ForwardOptions fo;
  fo.mode = ForwardMode::Quantized;
  fo.bn = BnMode::Batch;
  fo.update_moving = update_moving;
  fo.step = step;
  fo.schedule = &cfg.schedule;
  fo.rng = &ce_draws;
  fo.output_noise = cfg.output_noise;
  NodeId x = t.input(b.x);
  ForwardRecord rec = m.forward(t, x, fo);
  LossGraph g;
  g.loss = t.softmax_ce(rec.logits, b.y, cfg.distill_T);
  g.params = rec.params;
  if (cfg.jr_mode == JrMode::Off || cfg.jr_lambda == 0.0) return g;

  RngStream jr_draws = rng.derive(std::uint64_t(step));
  ForwardOptions fj = fo;
  fj.update_moving = false;
  fj.rng = &jr_draws;
  fj.output_noise = 0.0;
  NodeId jr = -1;
  if (cfg.jr_mode == JrMode::Full) {
    fj.bn = BnMode::FrozenBatch;
    NodeId xj = t.input(b.x);
    ForwardRecord rj = m.forward(t, xj, fj);
    const int K = m.classes();
    NodeId acc = -1;
    for (int k = 0; k < K; ++k) {
      Tensor seed({B, K});
      for (int i = 0; i < B; ++i) seed[std::int64_t(i) * K + k] = 1.0;
      std::vector<NodeId> gs = t.vjp_nodes(rj.logits, t.constant(std::move(seed)), {xj});
      NodeId sq = t.dot(gs[0], gs[0]);
      acc = acc < 0 ? sq : t.add(acc, sq);
    }
    jr = t.scale(acc, 1.0 / B);
    g.params.insert(g.params.end(), rj.params.begin(), rj.params.end());
  } else {
    // one random sample, one random layer; single-sample batch statistics are
    // degenerate, so this forward reads the moving statistics instead
    fj.bn = BnMode::Moving;
    const long sample = rng.below(B);
    const int layer = int(rng.below(m.num_layers()));
    NodeId xj = t.input(sample_row(b.x, sample));
    ForwardRecord rj = m.forward(t, xj, fj);
    jr = layer_frobenius_sq_node(t, m, rj, layer);
    g.params.insert(g.params.end(), rj.params.begin(), rj.params.end());
  }
  g.loss = t.add(g.loss, t.scale(jr, cfg.jr_lambda));
  return g;
}

} // namespace

double joint_loss(Model& model, const Batch& batch, const TrainConfig& cfg) {
  cfg.validate();
  Tape t;
  RngStream rng(cfg.seed);
  LossGraph g = build_loss(t, model, batch, cfg, 0, rng, false);
  return t.value(g.loss).item();
}

double qat_train_step(Model& model, const Batch& batch, const TrainConfig& cfg, long step,
                      double lr, RngStream& rng, TrainState& state) {
  Tape t;
  LossGraph g = build_loss(t, model, batch, cfg, step, rng, true);
  const double loss = t.value(g.loss).item();
  if (!std::isfinite(loss)) throw std::runtime_error("diverged at step " + std::to_string(step));

  std::vector<Tensor> grads = t.grad(g.loss, g.params);
  std::vector<Tensor*> masters = model.trainable();
  const std::size_t nm = masters.size();
  for (std::size_t i = nm; i < grads.size(); ++i) {
    Tensor& dst = grads[i % nm];
    const Tensor& src = grads[i];
    for (std::int64_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }

  if (state.m1.empty()) {
    for (std::size_t i = 0; i < nm; ++i) {
      state.m1.push_back(Tensor::zeros_like(*masters[i]));
      state.m2.push_back(Tensor::zeros_like(*masters[i]));
    }
  }
  constexpr double kRmsRho = 0.9, kBeta1 = 0.9, kBeta2 = 0.999, kOptEps = 1e-7;
  if (cfg.optimizer == Optimizer::Adamax) ++state.adamax_t;
  for (std::size_t i = 0; i < nm; ++i) {
    Tensor& w = *masters[i];
    const Tensor& gr = grads[i];
    switch (cfg.optimizer) {
      case Optimizer::Sgd:
        for (std::int64_t j = 0; j < w.size(); ++j) w[j] -= lr * gr[j];
        break;
      case Optimizer::Rmsprop: {
        Tensor& v = state.m2[i];
        for (std::int64_t j = 0; j < w.size(); ++j) {
          v[j] = kRmsRho * v[j] + (1.0 - kRmsRho) * gr[j] * gr[j];
          w[j] -= lr * gr[j] / (std::sqrt(v[j]) + kOptEps);
        }
        break;
      }
      case Optimizer::Adamax: {
        Tensor& mo = state.m1[i];
        Tensor& u = state.m2[i];
        const double corr = 1.0 - std::pow(kBeta1, double(state.adamax_t));
        for (std::int64_t j = 0; j < w.size(); ++j) {
          mo[j] = kBeta1 * mo[j] + (1.0 - kBeta1) * gr[j];
          u[j] = std::max(kBeta2 * u[j], std::fabs(gr[j]));
          w[j] -= (lr / corr) * mo[j] / (u[j] + kOptEps);
        }
        break;
      }
    }
  }
  return loss;
}

double accuracy(const Model& model, const Dataset& data) {
  if (data.records.empty()) throw std::invalid_argument("empty dataset");
  const long n = data.size();
  constexpr long kChunk = 256;
  long correct = 0;
  for (long at = 0; at < n; at += kChunk) {
    std::vector<long> idx;
    for (long i = at; i < std::min(n, at + kChunk); ++i) idx.push_back(i);
    auto [x, y] = data.batch(idx);
    Tensor logits = model.predict(x);
    for (std::size_t r = 0; r < idx.size(); ++r)
      if (argmax_row(logits, int(r)) == data.records[std::size_t(idx[r])].label) ++correct;
  }
  return double(correct) / double(n);
}

std::string history_csv_header() { return "epoch,loss,train_acc,val_acc,lr"; }

std::string history_csv_row(int epoch, const EpochStats& s) {
  return std::to_string(epoch) + "," + csv_double(s.loss) + "," + csv_double(s.train_acc) + "," +
         csv_double(s.val_acc) + "," + csv_double(s.lr);
}

TrainHistory train(Model& model, const Dataset& data, const TrainConfig& cfg,
                   const Dataset* validation) {
  cfg.validate();
  if (data.records.empty()) throw std::invalid_argument("empty dataset");
  const long n = data.size();
  const long steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = steps_per_epoch * cfg.epochs;
  RngStream rng(cfg.seed);
  TrainState state;
  TrainHistory hist;
  std::vector<long> order(std::size_t(n), 0L);
  std::iota(order.begin(), order.end(), 0L);
  long step = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    rng.shuffle(order);
    const double epoch_lr = cosine_lr(step, total_steps, cfg.lr_min, cfg.lr_max);
    double loss_sum = 0.0;
    for (long s = 0; s < steps_per_epoch; ++s) {
      const long lo = s * cfg.batch_size;
      const long hi = std::min(n, lo + cfg.batch_size);
      std::vector<long> idx(order.begin() + lo, order.begin() + hi);
      auto [x, y] = data.batch(idx);
      const double lr = cosine_lr(step, total_steps, cfg.lr_min, cfg.lr_max);
      Batch b{std::move(x), std::move(y)};
      loss_sum += qat_train_step(model, b, cfg, step, lr, rng, state);
      ++step;
    }
    EpochStats st;
    st.loss = loss_sum / double(steps_per_epoch);
    st.train_acc = accuracy(model, data);
    st.val_acc = validation ? accuracy(model, *validation) : st.train_acc;
    st.lr = epoch_lr;
    hist.epochs.push_back(st);
  }
  return hist;
}

} // namespace tqr
