// Acceptance gate: ten end-to-end checks, one printed PASS/FAIL line each.
// Exit status is zero only when every criterion passes inside its time budget.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tqr/attacks.hpp"
#include "tqr/cli.hpp"
#include "tqr/dataset.hpp"
#include "tqr/harness.hpp"
#include "tqr/jacobian.hpp"
#include "tqr/model.hpp"
#include "tqr/quantize.hpp"
#include "tqr/rng.hpp"
#include "tqr/tape.hpp"
#include "tqr/train.hpp"

namespace fs = std::filesystem;
using namespace tqr;

namespace {

LayerSpec dense(int units) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.units = units;
  return s;
}

LayerSpec conv(int channels, int kernel) {
  LayerSpec s;
  s.kind = LayerKind::Conv2d;
  s.channels = channels;
  s.kernel = kernel;
  return s;
}

LayerSpec depthwise(int kernel) {
  LayerSpec s;
  s.kind = LayerKind::DepthwiseConv2d;
  s.kernel = kernel;
  return s;
}

LayerSpec separable(int channels, int kernel) {
  LayerSpec s;
  s.kind = LayerKind::SeparableConv2d;
  s.channels = channels;
  s.kernel = kernel;
  return s;
}

LayerSpec plain(LayerKind k) {
  LayerSpec s;
  s.kind = k;
  return s;
}

Tensor random_tensor(std::vector<int> shape, RngStream& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Tensor onehot(const std::vector<int>& labels, int classes) {
  Tensor y({int(labels.size()), classes});
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[std::int64_t(i) * classes + labels[i]] = 1.0;
  return y;
}

double model_loss(Model& m, const Tensor& x, const Tensor& y, double T) {
  Tape t;
  ForwardOptions fo;
  fo.bn = BnMode::Batch;
  ForwardRecord rec = m.forward(t, t.input(x), fo);
  return t.value(t.softmax_ce(rec.logits, y, T))[0];
}

std::vector<Tensor> model_grads(Model& m, const Tensor& x, const Tensor& y, double T) {
  Tape t;
  ForwardOptions fo;
  fo.bn = BnMode::Batch;
  ForwardRecord rec = m.forward(t, t.input(x), fo);
  return t.grad(t.softmax_ce(rec.logits, y, T), rec.params);
}

// (m,k) x (k,n) -> (m,n)
Tensor matmul_small(const Tensor& a, const Tensor& b) {
  const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  Tensor c({m, n});
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p) {
      const double av = a[std::int64_t(i) * k + p];
      for (int j = 0; j < n; ++j) c[std::int64_t(i) * n + j] += av * b[std::int64_t(p) * n + j];
    }
  return c;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

class CountingOracle final : public ScoreOracle {
 public:
  explicit CountingOracle(const Model& m) : model_(m) {}
  Tensor logits(const Tensor& x) override {
    ++queries_;
    return model_.predict(x);
  }

 private:
  const Model& model_;
};

// ---------------------------------------------------------------- criterion 1

bool gradient_oracle(std::string& detail) {
  struct Arch {
    const char* name;
    std::vector<int> shape;
    std::vector<LayerSpec> layers;
    double T;
  };
  const std::vector<Arch> archs = {
      {"dense", {6}, {dense(5), plain(LayerKind::Relu), dense(3), plain(LayerKind::SoftmaxOut)}, 1.0},
      {"conv2d",
       {5, 5, 2},
       {conv(3, 3), plain(LayerKind::Relu), plain(LayerKind::GlobalAvgPool), dense(3),
        plain(LayerKind::SoftmaxOut)},
       1.0},
      {"depthwise",
       {5, 5, 2},
       {depthwise(3), plain(LayerKind::Relu), plain(LayerKind::GlobalAvgPool), dense(3),
        plain(LayerKind::SoftmaxOut)},
       1.0},
      {"separable",
       {5, 5, 2},
       {separable(3, 3), plain(LayerKind::Sigmoid), plain(LayerKind::GlobalAvgPool), dense(3),
        plain(LayerKind::SoftmaxOut)},
       1.0},
      {"batch-norm",
       {4, 4, 2},
       {plain(LayerKind::BatchNorm), plain(LayerKind::Relu), plain(LayerKind::GlobalAvgPool),
        dense(3), plain(LayerKind::SoftmaxOut)},
       1.0},
      {"softmax-ce", {6}, {dense(3), plain(LayerKind::SoftmaxOut)}, 2.5},
  };

  const double h = 1e-5;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const Arch& arch : archs) {
      Model m(arch.shape, 3, arch.layers, seed);
      RngStream rng(seed * 1000 + 7);
      std::vector<int> xshape = arch.shape;
      xshape.insert(xshape.begin(), 3);
      Tensor x = random_tensor(xshape, rng, -1.5, 1.5);
      Tensor y = onehot({0, 1, 2}, 3);

      std::vector<Tensor> ad = model_grads(m, x, y, arch.T);
      std::vector<Tensor*> masters = m.trainable();
      for (std::size_t k = 0; k < masters.size(); ++k) {
        for (std::int64_t j = 0; j < masters[k]->size(); ++j) {
          const double saved = (*masters[k])[j];
          (*masters[k])[j] = saved + h;
          const double up = model_loss(m, x, y, arch.T);
          (*masters[k])[j] = saved - h;
          const double down = model_loss(m, x, y, arch.T);
          (*masters[k])[j] = saved;
          const double fd = (up - down) / (2.0 * h);
          const double rel = std::fabs(ad[k][j] - fd) / std::max(1.0, std::fabs(fd));
          worst = std::max(worst, rel);
        }
      }
    }
  }
  detail = "max relative error " + fmt("%.2e", worst);
  return worst < 1e-4;
}

// ---------------------------------------------------------------- criterion 2

bool jacobian_identities(std::string& detail) {
  double worst_dual = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Model m({4, 4, 2}, 3,
            {conv(3, 3), plain(LayerKind::Sigmoid), plain(LayerKind::GlobalAvgPool), dense(3),
             plain(LayerKind::SoftmaxOut)},
            seed);
    RngStream rng(seed + 50);
    Tensor x = random_tensor({1, 4, 4, 2}, rng, -1.0, 1.0);
    for (bool post : {false, true}) {
      JacobianOptions opt;
      opt.post_softmax = post;
      opt.temperature = post ? 2.0 : 1.0;
      JacobianMatrix J = jacobian_full(m, x, opt);
      double sumsq = 0.0;
      for (std::int64_t i = 0; i < J.matrix.size(); ++i) sumsq += J.matrix[i] * J.matrix[i];
      const double dual = jr_frobenius(m, x, opt);
      worst_dual = std::max(worst_dual, std::fabs(dual - sumsq) / std::max(1.0, sumsq));
    }
  }

  double worst_chain = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Model m({4}, 3, {dense(5), plain(LayerKind::Sigmoid), dense(3), plain(LayerKind::SoftmaxOut)},
            seed);
    RngStream rng(seed + 90);
    Tensor x = random_tensor({1, 4}, rng, -1.2, 1.2);
    Tensor chain = jacobian_per_layer(m, x, 0).matrix;
    for (int l = 1; l < m.num_layers(); ++l)
      chain = matmul_small(jacobian_per_layer(m, x, l).matrix, chain);
    JacobianMatrix full = jacobian_full(m, x);
    for (std::int64_t i = 0; i < chain.size(); ++i) {
      const double err =
          std::fabs(chain[i] - full.matrix[i]) / std::max(1.0, std::fabs(full.matrix[i]));
      worst_chain = std::max(worst_chain, err);
    }
  }

  detail = "dual-formula err " + fmt("%.2e", worst_dual) + ", chain err " + fmt("%.2e", worst_chain);
  return worst_dual < 1e-10 && worst_chain < 1e-8;
}

// ---------------------------------------------------------------- criterion 3

bool quantizer_suite(std::string& detail) {
  bool ok = true;
  std::string why;

  QuantizerSpec bin;
  bin.kind = QuantKind::Binary;
  QuantizerSpec tern;
  tern.kind = QuantKind::Ternary;
  QuantizerSpec fx;
  fx.kind = QuantKind::FixedPoint;
  fx.bits = 3;

  {
    RngStream rng(31);
    Tensor x = random_tensor({64}, rng, -2.0, 2.0);
    Tensor qb = quantize_forward(bin, x, 0, nullptr, nullptr);
    Tensor qt = quantize_forward(tern, x, 0, nullptr, nullptr);
    Tensor qf = quantize_forward(fx, x, 0, nullptr, nullptr);
    for (std::int64_t i = 0; i < 64; ++i) {
      if (qb[i] != 1.0 && qb[i] != -1.0) ok = false;
      if (qt[i] != 1.0 && qt[i] != -1.0 && qt[i] != 0.0) ok = false;
      const double grid = qf[i] * 4.0;
      if (std::fabs(grid - std::nearbyint(grid)) > 1e-9 || grid < -4.0 || grid > 3.0) ok = false;
    }
    if (!ok) why = "codomain";

    for (const QuantizerSpec& q : {bin, tern, fx}) {
      Tensor once = quantize_forward(q, x, 0, nullptr, nullptr);
      Tensor twice = quantize_forward(q, once, 0, nullptr, nullptr);
      for (std::int64_t i = 0; i < 64; ++i)
        if (once[i] != twice[i]) {
          ok = false;
          why = "idempotence";
        }
    }

    Tensor sorted = x;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    for (const QuantizerSpec& q : {bin, tern, fx}) {
      Tensor qs = quantize_forward(q, sorted, 0, nullptr, nullptr);
      for (std::int64_t i = 1; i < 64; ++i)
        if (qs[i] < qs[i - 1]) {
          ok = false;
          why = "monotonicity";
        }
    }
  }

  {
    Tensor z({3}, {0.0, 0.5, -0.5});
    if (quantize_forward(bin, z, 0, nullptr, nullptr)[0] != 1.0) {
      ok = false;
      why = "binary sign(0)";
    }
    Tensor edge({2}, {0.3, 0.9}); // cutoff sits exactly at 0.3
    if (quantize_forward(tern, edge, 0, nullptr, nullptr)[0] != 0.0) {
      ok = false;
      why = "ternary tie-break";
    }
  }

  {
    QuantizerSpec stq;
    stq.kind = QuantKind::StochasticTernary;
    StochasticSchedule sched;
    sched.r0 = 0.7;
    sched.r_final = 0.7;
    sched.total_steps = 1;
    Tensor x({6}, {0.9, 0.5, 0.05, -0.7, -0.2, 0.45});
    Tensor t = quantize_forward(tern, x, 0, nullptr, nullptr);
    double e_max = 0.0;
    for (int i = 0; i < 6; ++i) e_max = std::max(e_max, std::fabs(x[i] - t[i]));

    RngStream rng(123);
    const int draws = 10000;
    std::vector<long> replaced(6, 0);
    for (int d = 0; d < draws; ++d) {
      Tensor out = quantize_forward(stq, x, 0, &sched, &rng);
      for (int i = 0; i < 6; ++i)
        if (out[i] == t[i]) ++replaced[std::size_t(i)];
    }
    for (int i = 0; i < 6; ++i) {
      const double expected = 0.7 * (1.0 - std::fabs(x[i] - t[i]) / e_max);
      const double got = double(replaced[std::size_t(i)]) / draws;
      if (std::fabs(got - expected) > 0.02) {
        ok = false;
        why = "monte carlo portion (coord " + std::to_string(i) + " " + fmt("%.3f", got) +
              " vs " + fmt("%.3f", expected) + ")";
      }
    }
  }

  {
    StochasticSchedule s;
    s.r0 = 0.25;
    s.r_final = 0.9;
    s.total_steps = 200;
    if (schedule_portion(s, 0) != 0.25 || schedule_portion(s, 200) != 0.9 ||
        schedule_portion(s, 10000) != 0.9) {
      ok = false;
      why = "schedule endpoints";
    }
    if (std::fabs(schedule_portion(s, 100) - 0.575) > 1e-15) {
      ok = false;
      why = "schedule midpoint";
    }
  }

  detail = ok ? "codomain, idempotence, monotonicity, tie-breaks, MC portion, schedule" : why;
  return ok;
}

// ---------------------------------------------------------------- criterion 4

bool attack_containment(std::string& detail) {
  Dataset data = synthesize_dataset(SyntheticKind::Gaussians, 200, 77);
  Model m(data.shape, data.classes, preset_mlp_small(8, data.classes), 42);
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 32;
  tc.seed = 42;
  train(m, data, tc);

  auto [x, yb] = data.full_batch();
  (void)yb;
  std::vector<int> y;
  for (const DatasetRecord& r : data.records) y.push_back(r.label);
  const std::int64_t dim = x.size() / data.size();

  bool ok = true;
  std::string why;
  auto check_batch = [&](const char* kind, const AdversarialBatch& out, const AttackConfig& cfg,
                         bool linf_kind) {
    Tensor logits = m.predict(out.x_adv);
    for (long i = 0; i < data.size(); ++i) {
      for (std::int64_t j = 0; j < dim; ++j) {
        const double v = out.x_adv[i * dim + j];
        if (v < cfg.bound_lo - 1e-9 || v > cfg.bound_hi + 1e-9) {
          ok = false;
          why = std::string(kind) + " bounds";
        }
        if (linf_kind && std::fabs(v - x[i * dim + j]) > cfg.eff_epsilon() + 1e-9) {
          ok = false;
          why = std::string(kind) + " epsilon ball";
        }
      }
      if (out.results[std::size_t(i)].success != (argmax_row(logits, int(i)) != y[std::size_t(i)])) {
        ok = false;
        why = std::string(kind) + " success flag";
      }
    }
  };

  AttackConfig base;
  base.bound_lo = -12.0;
  base.bound_hi = 12.0;
  base.seed = 3;

  {
    AttackConfig cfg = base;
    cfg.epsilon = 0.4;
    check_batch("fgsm", fgsm(m, x, y, cfg), cfg, true);
  }
  {
    AttackConfig cfg = base;
    cfg.kind = AttackKind::Pgd;
    cfg.epsilon = 0.4;
    cfg.alpha = 0.1;
    cfg.max_iter = 10;
    cfg.pgd_random_start = true;
    check_batch("pgd", pgd(m, x, y, cfg), cfg, true);
  }
  {
    AttackConfig cfg = base;
    cfg.kind = AttackKind::CwL2;
    cfg.max_iter = 60;
    cfg.cw_c = 2.0;
    check_batch("cw", cw_l2(m, x, y, cfg), cfg, false);
  }

  // black-box kinds run through a counting oracle: the only model access is
  // logits(), and the reported per-sample queries must account for every call
  {
    AttackConfig cfg = base;
    cfg.kind = AttackKind::Square;
    cfg.epsilon = 0.4;
    cfg.max_iter = 50;
    CountingOracle oracle(m);
    AdversarialBatch out = square_attack(oracle, x, y, cfg);
    check_batch("square", out, cfg, true);
    long total = 0;
    for (const AdversarialResult& r : out.results) total += r.queries;
    if (total != oracle.queries()) {
      ok = false;
      why = "square query accounting";
    }
  }
  {
    AttackConfig cfg = base;
    cfg.kind = AttackKind::Zoo;
    cfg.epsilon = 0.4;
    cfg.alpha = 0.05;
    cfg.max_iter = 10;
    cfg.zoo_coords = 4;
    CountingOracle oracle(m);
    AdversarialBatch out = zoo_attack(oracle, x, y, cfg);
    check_batch("zoo", out, cfg, true);
    long total = 0;
    for (const AdversarialResult& r : out.results) total += r.queries;
    if (total != oracle.queries()) {
      ok = false;
      why = "zoo query accounting";
    }
  }
  {
    AttackConfig cfg = base;
    cfg.kind = AttackKind::Boundary;
    cfg.epsilon = 0.05;
    cfg.max_iter = 60;
    long unseeded = 0;
    for (long i = 0; i < data.size(); ++i) {
      Tensor xi({1, int(dim)});
      std::copy(x.data() + i * dim, x.data() + (i + 1) * dim, xi.data());
      AttackConfig per = cfg;
      per.seed = cfg.seed ^ std::uint64_t(i);
      CountingOracle oracle(m);
      AdversarialBatch one;
      try {
        one = boundary_attack(oracle, xi, {y[std::size_t(i)]}, per);
      } catch (const std::runtime_error&) {
        ++unseeded;
        continue;
      }
      if (one.results[0].queries != oracle.queries()) {
        ok = false;
        why = "boundary query accounting";
      }
      for (std::int64_t j = 0; j < dim; ++j)
        if (one.x_adv[j] < cfg.bound_lo - 1e-9 || one.x_adv[j] > cfg.bound_hi + 1e-9) {
          ok = false;
          why = "boundary bounds";
        }
      if (one.results[0].success !=
          (argmax_row(m.predict(one.x_adv), 0) != y[std::size_t(i)])) {
        ok = false;
        why = "boundary success flag";
      }
    }
    if (unseeded > data.size() / 2) {
      ok = false;
      why = "boundary seeding (" + std::to_string(unseeded) + " of 200 failed)";
    }
  }

  detail = ok ? "six attack kinds contained, flags consistent, queries accounted" : why;
  return ok;
}

// ---------------------------------------------------------------- criterion 5

bool preset_snapshot(std::string& detail) {
  bool ok = true;
  const AttackConfig f = preset_fgsm();
  ok &= f.kind == AttackKind::Fgsm && f.epsilon == 0.3;
  const AttackConfig p = preset_pgd();
  ok &= p.kind == AttackKind::Pgd && p.epsilon == 32.0 / 255.0 && p.alpha == 2.0 / 255.0 &&
        p.max_iter == 7;
  const AttackConfig sc = preset_square_coarse();
  ok &= sc.kind == AttackKind::Square && sc.epsilon == 0.3 && sc.max_iter == 10;
  const AttackConfig sf = preset_square_fine();
  ok &= sf.kind == AttackKind::Square && sf.epsilon == 0.05 && sf.max_iter == 10000;
  const AttackConfig b = preset_boundary();
  ok &= b.kind == AttackKind::Boundary && b.epsilon == 0.01 && b.max_iter == 5000;
  ok &= preset_fgsm_sweep() == std::vector<double>{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  detail = "fgsm 0.3; pgd 32/255, 2/255, 7; square (0.3,10)/(0.05,10000); boundary (0.01,5000)";
  return ok;
}

// ---------------------------------------------------------------- criterion 6

// Synthetic CIFAR-format task: 4x4-uniform blocks so the 8x8 grayscale
// downsample is lossless; the class signal is a bright top or bottom band, and
// every block carries heavy uniform noise that a non-regularized model is free
// to fit.
void write_toy_cifar(const std::string& path, int n_records) {
  RngStream rng(4242);
  std::vector<DatasetRecord> records;
  records.reserve(std::size_t(n_records));
  for (int i = 0; i < n_records; ++i) {
    const int label = i % 2;
    double block[8][8];
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) {
        const bool signal = (label == 0) ? r < 2 : r >= 6;
        double v = 100.0 + (signal ? 90.0 : 0.0) + std::floor(rng.uniform(-50.0, 51.0));
        block[r][c] = std::min(std::max(v, 0.0), 255.0);
      }
    DatasetRecord rec;
    rec.label = label;
    rec.features = Tensor({32, 32, 3});
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const double v = block[y / 4][x / 4];
        for (int c = 0; c < 3; ++c) rec.features[(std::int64_t(y) * 32 + x) * 3 + c] = v;
      }
    records.push_back(std::move(rec));
  }
  write_cifar10_binary(path, records);
}

bool robustness_reproduction(std::string& detail) {
  const std::string path = (fs::temp_directory_path() / "tqr_acceptance_cifar.bin").string();
  write_toy_cifar(path, 800);

  std::vector<DatasetRecord> raw = load_cifar10_binary(path, {0, 1}, 0);
  Dataset all = preprocess_cifar(raw, {0, 1}, 4);
  fs::remove(path);

  std::vector<long> train_idx, test_idx;
  for (long i = 0; i < 600; ++i) train_idx.push_back(i);
  for (long i = 600; i < 800; ++i) test_idx.push_back(i);
  Dataset train_ds = dataset_subset(all, train_idx);
  Dataset test_ds = dataset_subset(all, test_idx);

  TrainConfig base;
  base.epochs = 30;
  base.batch_size = 32;
  base.lr_max = 5e-3;
  base.lr_min = 5e-4;

  ModelSpec fp_spec;
  fp_spec.hidden = 24;
  ModelSpec stq_spec = fp_spec;
  stq_spec.weight_quantizer.kind = QuantKind::StochasticTernary;

  const long steps_per_epoch = (train_ds.size() + base.batch_size - 1) / base.batch_size;

  AttackConfig attack = preset_fgsm();
  attack.epsilon = 0.1; // 25.5 raw units after the x255 image scale

  double fp_adv = 0.0, stq_adv = 0.0, jr_adv = 0.0, fp_clean = 0.0;
  const std::vector<std::uint64_t> seeds = {101, 202, 303};
  for (std::uint64_t seed : seeds) {
    TrainConfig tc = base;
    tc.seed = seed;

    Model fp = build_model(fp_spec, train_ds, seed);
    train(fp, train_ds, tc);
    fp_clean += evaluate_clean(fp, test_ds) / double(seeds.size());
    fp_adv += evaluate_under_attack(fp, test_ds, attack, 4).accuracy / double(seeds.size());

    Model stq = build_model(stq_spec, train_ds, seed);
    TrainConfig stq_tc = tc;
    stq_tc.schedule.r0 = 0.25;
    stq_tc.schedule.r_final = 1.0;
    stq_tc.schedule.total_steps = base.epochs * steps_per_epoch;
    train(stq, train_ds, stq_tc);
    stq_adv += evaluate_under_attack(stq, test_ds, attack, 4).accuracy / double(seeds.size());

    Model jr = build_model(fp_spec, train_ds, seed);
    TrainConfig jr_tc = tc;
    jr_tc.jr_mode = JrMode::Full;
    jr_tc.jr_lambda = 0.01;
    train(jr, train_ds, jr_tc);
    jr_adv += evaluate_under_attack(jr, test_ds, attack, 4).accuracy / double(seeds.size());
  }

  detail = "fgsm@0.1 acc: fp " + fmt("%.3f", fp_adv) + " (clean " + fmt("%.3f", fp_clean) +
           "), stq " + fmt("%.3f", stq_adv) + ", jr " + fmt("%.3f", jr_adv);
  return stq_adv >= fp_adv + 0.05 && jr_adv >= fp_adv + 0.05;
}

// ---------------------------------------------------------------- criterion 7

bool footprint_arithmetic(std::string& detail) {
  QuantizerSpec tern;
  tern.kind = QuantKind::Ternary;
  QuantizerSpec bin;
  bin.kind = QuantKind::Binary;
  QuantizerSpec fx2;
  fx2.kind = QuantKind::FixedPoint;
  fx2.bits = 2;

  std::vector<LayerSpec> stack = {dense(6), plain(LayerKind::Relu), dense(4), dense(2),
                                  plain(LayerKind::SoftmaxOut)};
  stack[0].weight_quantizer = tern; // 54 params at 2 bits -> 14 bytes
  stack[2].weight_quantizer = bin;  // 28 params at 1 bit  -> 4 bytes
  Model m({8}, 2, stack, 1);        // head: 10 params at 32 bits -> 40 bytes
  const std::size_t expected = (54 * 2 + 7) / 8 + (28 * 1 + 7) / 8 + (10 * 32 + 7) / 8;
  bool ok = m.flash_footprint() == expected && expected == 58;

  // 1000 parameters at 2 bits must cost exactly 250 bytes, and the same
  // parameter count at 1 bit strictly less
  std::vector<LayerSpec> wide2 = {dense(2), plain(LayerKind::SoftmaxOut)};
  wide2[0].weight_quantizer = fx2;
  std::vector<LayerSpec> wide1 = wide2;
  wide1[0].weight_quantizer = bin;
  Model two({499}, 2, wide2, 1);
  Model one({499}, 2, wide1, 1);
  ok &= two.count_params().total == 1000;
  ok &= two.flash_footprint() == 250;
  ok &= one.flash_footprint() < two.flash_footprint();

  detail = "hand-counted stack = 58 bytes; 1000 params @2bit = 250; binary < 2-bit";
  return ok;
}

// ---------------------------------------------------------------- criterion 8

bool temperature_softmax(std::string& detail) {
  RngStream rng(8);
  bool ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor z = random_tensor({1, 10}, rng, -8.0, 8.0);
    Tensor p1 = softmax_with_temperature(z, 1.0);
    Tensor p50 = softmax_with_temperature(z, 50.0);
    if (argmax_row(p1, 0) != argmax_row(p50, 0)) ok = false;
    double h1 = 0.0, h50 = 0.0;
    for (int j = 0; j < 10; ++j) {
      h1 -= p1[j] * std::log(p1[j]);
      h50 -= p50[j] * std::log(p50[j]);
    }
    if (h50 < h1 - 1e-12) ok = false;
  }
  detail = "argmax invariant and entropy monotone over 1000 vectors, T in {1, 50}";
  return ok;
}

// ---------------------------------------------------------------- criterion 9

bool kfold_protocol(std::string& detail) {
  bool ok = true;
  std::string why;

  FoldPlan plan = kfold_split(103, 5, 11);
  std::vector<int> hits(103, 0);
  for (int f = 0; f < 5; ++f) {
    const auto& val = plan.val_idx[std::size_t(f)];
    const auto& tr = plan.train_idx[std::size_t(f)];
    if (val.size() + tr.size() != 103) ok = false;
    if (val.size() != std::size_t(f < 3 ? 21 : 20)) ok = false;
    std::vector<int> seen(103, 0);
    for (long i : tr) ++seen[std::size_t(i)];
    for (long i : val) {
      ++hits[std::size_t(i)];
      if (seen[std::size_t(i)] != 0) ok = false;
    }
  }
  for (int h : hits)
    if (h != 1) ok = false;
  if (!ok) why = "partition invariants";

  Dataset data = synthesize_dataset(SyntheticKind::Gaussians, 60, 5);
  ModelBuilder builder = [&data](std::uint64_t seed) {
    return Model(data.shape, data.classes, preset_mlp_small(4, data.classes), seed);
  };
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  tc.seed = 11;
  AttackConfig fg;
  fg.epsilon = 0.25;
  fg.bound_lo = -20.0;
  fg.bound_hi = 20.0;
  AttackConfig sq;
  sq.kind = AttackKind::Square;
  sq.epsilon = 0.4;
  sq.max_iter = 10;
  sq.bound_lo = -20.0;
  sq.bound_hi = 20.0;

  const std::string first = kfold_robustness(builder, data, tc, {fg, sq}, 5, "mlp", 2).csv();
  const std::string second = kfold_robustness(builder, data, tc, {fg, sq}, 5, "mlp", 2).csv();
  if (first != second) {
    ok = false;
    why = "two identical runs differ";
  }
  TrainConfig other = tc;
  other.seed = 12;
  if (first == kfold_robustness(builder, data, other, {fg, sq}, 5, "mlp", 2).csv()) {
    ok = false;
    why = "seed has no effect, determinism check is vacuous";
  }

  detail = ok ? "K=5 partition invariants; repeated pipeline runs byte-identical" : why;
  return ok;
}

// --------------------------------------------------------------- criterion 10

bool zoo_gradient_quality(std::string& detail) {
  Model m({4}, 3, {dense(6), plain(LayerKind::Sigmoid), dense(3), plain(LayerKind::SoftmaxOut)},
          19);
  RngStream rng(97);
  double worst = 1.0;
  for (int trial = 0; trial < 5; ++trial) {
    Tensor x = random_tensor({1, 4}, rng, -1.0, 1.0);
    const int label = trial % 3;

    Tape t;
    NodeId xi = t.input(x);
    ForwardOptions fo;
    ForwardRecord rec = m.forward(t, xi, fo);
    Tensor y({1, 3});
    y[label] = 1.0;
    Tensor exact = t.grad(t.softmax_ce(rec.logits, y, 1.0), {xi})[0];

    CountingOracle oracle(m);
    Tensor est = zoo_gradient_estimate(oracle, x, label, {0, 1, 2, 3}, 1e-4);
    double dot = 0.0, ne = 0.0, ng = 0.0;
    for (int i = 0; i < 4; ++i) {
      dot += est[i] * exact[i];
      ne += est[i] * est[i];
      ng += exact[i] * exact[i];
    }
    worst = std::min(worst, dot / std::sqrt(ne * ng));
  }
  detail = "min cosine similarity " + fmt("%.4f", worst) + " over 5 points";
  return worst >= 0.99;
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient oracle vs central finite differences", 30, gradient_oracle},
      {2, "jacobian dual formula and per-layer chain", 30, jacobian_identities},
      {3, "quantizer codomain, draws, and schedule", 20, quantizer_suite},
      {4, "attack containment and query accounting", 120, attack_containment},
      {5, "attack preset hyperparameters", 1, preset_snapshot},
      {6, "quantized and regularized robustness ordering", 1800, robustness_reproduction},
      {7, "flash footprint arithmetic", 1, footprint_arithmetic},
      {8, "temperature softmax invariants", 5, temperature_softmax},
      {9, "k-fold partition and pipeline determinism", 600, kfold_protocol},
      {10, "zoo gradient estimate quality", 10, zoo_gradient_quality},
  };

  int passed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      ok = c.fn(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && secs > c.budget_s) {
      ok = false;
      detail += " [exceeded " + fmt("%.0f", c.budget_s) + "s budget]";
    }
    std::printf("criterion %2d: %s  %s — %s (%.1fs)\n", c.id, ok ? "PASS" : "FAIL", c.name,
                detail.c_str(), secs);
    std::fflush(stdout);
    if (ok) ++passed;
  }
  std::printf("acceptance: %d/10 criteria passed\n", passed);
  return passed == 10 ? 0 : 1;
}
