#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tqr/attacks.hpp"
#include "tqr/dataset.hpp"
#include "tqr/rng.hpp"
#include "tqr/tape.hpp"

using namespace tqr;

namespace {

LayerSpec dense(int units) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.units = units;
  return s;
}

LayerSpec plain(LayerKind k) {
  LayerSpec s;
  s.kind = k;
  return s;
}

// z = [w00 x0 + w10 x1, w01 x0 + w11 x1] via the stored (in,out) layout
Model linear_model(double w00, double w01, double w10, double w11) {
  Model m({2}, 2, {dense(2)}, 0);
  m.layer_weights(0)[0] = Tensor({2, 2}, {w00, w01, w10, w11});
  m.layer_weights(0)[1] = Tensor({2});
  return m;
}

// z = [x0, -x0]: class 0 iff x0 > 0, decision boundary at x0 = 0
Model sign_model() { return linear_model(1.0, -1.0, 0.0, 0.0); }

Model constant_model() { return linear_model(0.0, 0.0, 0.0, 0.0); }

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

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed, double lo, double hi) {
  Tensor t(std::move(shape));
  RngStream rng(seed);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

double l2(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

void check_containment(const Tensor& x_adv, const Tensor& x, double eps, double lo, double hi) {
  for (std::int64_t i = 0; i < x.size(); ++i) {
    CHECK(x_adv[i] >= lo - 1e-12);
    CHECK(x_adv[i] <= hi + 1e-12);
    CHECK(std::fabs(x_adv[i] - x[i]) <= eps + 1e-12);
  }
}

Tensor row(const Tensor& batch, long r) {
  std::vector<int> shape = batch.shape();
  shape[0] = 1;
  Tensor out(shape);
  const std::int64_t stride = out.size();
  for (std::int64_t i = 0; i < stride; ++i) out[i] = batch[r * stride + i];
  return out;
}

std::string temp_path(const std::string& name) { return "/tmp/tqr_attacks_" + name; }

} // namespace

TEST_CASE("attack names round-trip") {
  for (AttackKind k : {AttackKind::Fgsm, AttackKind::Pgd, AttackKind::CwL2, AttackKind::Square,
                       AttackKind::Boundary, AttackKind::Zoo})
    CHECK(attack_kind_from_name(attack_kind_name(k)) == k);
  CHECK_THROWS_WITH_AS(attack_kind_from_name("deepfool"), "unknown attack kind: deepfool",
                       std::invalid_argument);
  CHECK(attack_norm_from_name("linf") == AttackNorm::Linf);
  CHECK(attack_norm_from_name("l2") == AttackNorm::L2);
  CHECK(attack_norm_name(AttackNorm::L2) == "l2");
  CHECK_THROWS_WITH_AS(attack_norm_from_name("l1"), "unknown attack norm: l1",
                       std::invalid_argument);
}

TEST_CASE("attack config validation messages") {
  AttackConfig ok;
  CHECK_NOTHROW(ok.validate());

  auto expect = [](void (*mutate)(AttackConfig&), const char* msg) {
    AttackConfig c;
    mutate(c);
    CHECK_THROWS_WITH_AS(c.validate(), msg, std::invalid_argument);
  };
  expect([](AttackConfig& c) { c.epsilon = -0.1; }, "epsilon must be non-negative");
  expect([](AttackConfig& c) { c.alpha = 0.0; }, "alpha must be positive");
  expect([](AttackConfig& c) { c.max_iter = 0; }, "max_iter must be at least 1");
  expect([](AttackConfig& c) { c.cw_kappa = -1.0; }, "cw confidence must be non-negative");
  expect([](AttackConfig& c) { c.cw_c = 0.0; }, "cw trade-off constant must be positive");
  expect([](AttackConfig& c) { c.cw_lr = -0.5; }, "cw learning rate must be positive");
  expect([](AttackConfig& c) { c.bound_lo = 1.0; c.bound_hi = 1.0; },
         "input bounds must satisfy lo < hi");
  expect([](AttackConfig& c) { c.kind = AttackKind::Pgd; c.epsilon = 0.1; c.alpha = 0.2; },
         "pgd step alpha exceeds the epsilon ball");
  expect([](AttackConfig& c) { c.zoo_h = 0.0; }, "zoo probe step must be positive");
  expect([](AttackConfig& c) { c.zoo_coords = 0; }, "zoo coordinate count must be at least 1");
  expect([](AttackConfig& c) { c.square_p_init = 0.0; }, "square p_init must lie in (0,1]");
  expect([](AttackConfig& c) { c.square_p_init = 1.5; }, "square p_init must lie in (0,1]");
  expect([](AttackConfig& c) { c.query_budget = -1; }, "query budget must be non-negative");

  // alpha above epsilon is legal for non-pgd kinds (zoo uses both independently)
  AttackConfig zoo;
  zoo.kind = AttackKind::Zoo;
  zoo.epsilon = 0.1;
  zoo.alpha = 0.2;
  CHECK_NOTHROW(zoo.validate());
}

TEST_CASE("fgsm closed form: signed step, sign(0) freezes coordinates") {
  Model m = sign_model();
  // y=0 at x0>0: the loss gradient pushes x0 down and never touches x1
  Tensor x({1, 2}, {0.5, 0.3});
  AttackConfig cfg;
  cfg.epsilon = 0.1;
  AdversarialBatch out = fgsm(m, x, {0}, cfg);
  CHECK(out.x_adv[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(out.x_adv[1] == 0.3); // zero-gradient coordinate stays put exactly
  CHECK(out.results[0].queries == 2);
  CHECK(out.results[0].norm == doctest::Approx(0.1).epsilon(1e-9));
  CHECK_FALSE(out.results[0].success); // 0.4 still classifies as 0

  cfg.epsilon = 0.6;
  out = fgsm(m, x, {0}, cfg);
  CHECK(out.x_adv[0] == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(out.results[0].success);
}

TEST_CASE("fgsm at epsilon zero returns the input bitwise") {
  Model m({2}, 2, preset_mlp_small(8, 2), 7);
  Tensor x = random_tensor({4, 2}, 3, -3.0, 3.0);
  AttackConfig cfg;
  cfg.epsilon = 0.0;
  AdversarialBatch out = fgsm(m, x, {0, 1, 0, 1}, cfg);
  CHECK(bitwise_equal(out.x_adv, x));

  Tensor logits = m.predict(x);
  for (int i = 0; i < 4; ++i)
    CHECK(out.results[std::size_t(i)].success == (argmax_row(logits, i) != (i % 2)));
}

TEST_CASE("fgsm clips to the input box") {
  Model m = sign_model();
  Tensor x({1, 2}, {0.4, 0.3});
  AttackConfig cfg;
  cfg.epsilon = 0.2;
  cfg.bound_lo = -0.45;
  cfg.bound_hi = 0.45;
  // y=1 pushes x0 up, into the 0.45 ceiling
  AdversarialBatch out = fgsm(m, x, {1}, cfg);
  CHECK(out.x_adv[0] == doctest::Approx(0.45).epsilon(1e-12));
  check_containment(out.x_adv, x, cfg.epsilon, cfg.bound_lo, cfg.bound_hi);
}

TEST_CASE("pgd stays inside the epsilon ball and the input box") {
  Model m({2}, 2, preset_mlp_small(8, 2), 5);
  Dataset data = synthesize_dataset(SyntheticKind::Gaussians, 8, 11);
  auto [x, yb] = data.full_batch();
  (void)yb;
  std::vector<int> y;
  for (const auto& r : data.records) y.push_back(r.label);

  AttackConfig cfg;
  cfg.kind = AttackKind::Pgd;
  cfg.epsilon = 0.3;
  cfg.alpha = 0.1;
  cfg.max_iter = 5;
  cfg.bound_lo = -8.0;
  cfg.bound_hi = 8.0;
  AdversarialBatch out = pgd(m, x, y, cfg);
  check_containment(out.x_adv, x, cfg.epsilon, cfg.bound_lo, cfg.bound_hi);
  for (const auto& r : out.results) CHECK(r.queries == cfg.max_iter + 1);

  cfg.pgd_random_start = true;
  AdversarialBatch rs = pgd(m, x, y, cfg);
  check_containment(rs.x_adv, x, cfg.epsilon, cfg.bound_lo, cfg.bound_hi);
  AdversarialBatch rs2 = pgd(m, x, y, cfg);
  CHECK(bitwise_equal(rs.x_adv, rs2.x_adv));
  cfg.seed = 99;
  AdversarialBatch rs3 = pgd(m, x, y, cfg);
  CHECK_FALSE(bitwise_equal(rs.x_adv, rs3.x_adv));
}

TEST_CASE("single-step pgd with alpha == epsilon reproduces fgsm") {
  Model m({2}, 2, preset_mlp_small(8, 2), 9);
  Tensor x = random_tensor({5, 2}, 17, -4.0, 4.0);
  std::vector<int> y{0, 1, 1, 0, 1};

  AttackConfig f;
  f.epsilon = 0.25;
  AttackConfig p = f;
  p.kind = AttackKind::Pgd;
  p.alpha = p.epsilon;
  p.max_iter = 1;

  AdversarialBatch a = fgsm(m, x, y, f);
  AdversarialBatch b = pgd(m, x, y, p);
  CHECK(bitwise_equal(a.x_adv, b.x_adv));
  for (std::size_t i = 0; i < y.size(); ++i)
    CHECK(a.results[i].success == b.results[i].success);
}

TEST_CASE("cw finds the minimal-l2 crossing of a known boundary") {
  // boundary at x0 = 0, starting from x0 = 1: the cheapest success is an l2
  // norm of 1
  Model m = sign_model();
  Tensor x({1, 2}, {1.0, 0.0});
  AttackConfig cfg;
  cfg.kind = AttackKind::CwL2;
  cfg.max_iter = 500;
  cfg.cw_lr = 0.05;
  cfg.cw_c = 2.0;
  cfg.bound_lo = -8.0;
  cfg.bound_hi = 8.0;

  AdversarialBatch out = cw_l2(m, x, {0}, cfg);
  REQUIRE(out.results[0].success);
  CHECK(out.x_adv[0] < 0.0);
  CHECK(out.results[0].norm == doctest::Approx(1.0).epsilon(0.05));
  CHECK(out.results[0].norm ==
        doctest::Approx(l2(row(out.x_adv, 0), row(x, 0))).epsilon(1e-9));
  CHECK(out.results[0].queries == cfg.max_iter + 1);
  // tanh reparametrization keeps iterates strictly interior
  CHECK(out.x_adv[0] > cfg.bound_lo);
  CHECK(out.x_adv[1] < cfg.bound_hi);

  // kappa reshapes the objective but the tracker still keeps the smallest
  // plain misclassification, so the norm stays near the boundary distance
  AttackConfig conf = cfg;
  conf.cw_kappa = 0.5;
  AdversarialBatch margin = cw_l2(m, x, {0}, conf);
  REQUIRE(margin.results[0].success);
  CHECK(argmax_row(m.predict(margin.x_adv), 0) != 0);
  CHECK(margin.results[0].norm >= 1.0 - 1e-9);
  CHECK(margin.results[0].norm <= 1.3);
}

TEST_CASE("cw returns immediately on clean misclassification") {
  Model m = sign_model();
  Tensor x({1, 2}, {2.0, 0.0});
  AttackConfig cfg;
  cfg.kind = AttackKind::CwL2;
  AdversarialBatch out = cw_l2(m, x, {1}, cfg); // label 1 is already wrong for x0>0
  CHECK(out.results[0].success);
  CHECK(out.results[0].norm == 0.0);
  CHECK(out.results[0].queries == 1);
  CHECK(bitwise_equal(out.x_adv, x));
}

TEST_CASE("square attack: containment, query accounting, determinism") {
  Model m({2}, 2, preset_mlp_small(8, 2), 13);
  Dataset data = synthesize_dataset(SyntheticKind::Gaussians, 4, 21);
  auto [x, yb] = data.full_batch();
  (void)yb;
  std::vector<int> y;
  for (const auto& r : data.records) y.push_back(r.label);

  AttackConfig cfg;
  cfg.kind = AttackKind::Square;
  cfg.epsilon = 0.4;
  cfg.max_iter = 30;
  cfg.bound_lo = -8.0;
  cfg.bound_hi = 8.0;
  cfg.seed = 5;

  CountingOracle oracle(m);
  AdversarialBatch out = square_attack(oracle, x, y, cfg);
  check_containment(out.x_adv, x, cfg.epsilon, cfg.bound_lo, cfg.bound_hi);

  long total = 0;
  for (const auto& r : out.results) {
    CHECK(r.queries >= 1);
    CHECK(r.queries <= cfg.max_iter + 1);
    total += r.queries;
  }
  CHECK(total == oracle.queries()); // every evaluation went through the oracle

  CountingOracle again(m);
  AdversarialBatch rerun = square_attack(again, x, y, cfg);
  CHECK(bitwise_equal(out.x_adv, rerun.x_adv));

  AttackConfig budget = cfg;
  budget.query_budget = 3;
  CountingOracle capped(m);
  AdversarialBatch small = square_attack(capped, x, y, budget);
  for (const auto& r : small.results) CHECK(r.queries <= budget.query_budget);
}

TEST_CASE("square attack leaves a constant model's input at the stripe init") {
  // margins never improve on a flat landscape, so no candidate is accepted
  Model m = constant_model();
  Tensor x({1, 2}, {0.0, 0.0});
  AttackConfig cfg;
  cfg.kind = AttackKind::Square;
  cfg.epsilon = 0.5;
  cfg.max_iter = 10;
  CountingOracle oracle(m);
  AdversarialBatch out = square_attack(oracle, x, {0}, cfg);
  CHECK_FALSE(out.results[0].success);
  for (std::int64_t i = 0; i < out.x_adv.size(); ++i)
    CHECK(std::fabs(std::fabs(out.x_adv[i]) - cfg.epsilon) < 1e-12);
}

TEST_CASE("boundary attack walks the decision boundary without gradients") {
  Model m = sign_model();
  Tensor x({1, 2}, {3.0, 0.0});
  AttackConfig cfg;
  cfg.kind = AttackKind::Boundary;
  cfg.epsilon = 0.05;
  cfg.max_iter = 100;
  cfg.bound_lo = -8.0;
  cfg.bound_hi = 8.0;
  cfg.seed = 2;

  CountingOracle oracle(m);
  AdversarialBatch out = boundary_attack(oracle, x, {0}, cfg);
  REQUIRE(out.results[0].success);
  CHECK(argmax_row(m.predict(out.x_adv), 0) != 0);
  CHECK(out.results[0].norm == doctest::Approx(l2(row(out.x_adv, 0), row(x, 0))).epsilon(1e-9));
  // the true minimum distance to the boundary x0=0 is 3
  CHECK(out.results[0].norm >= 3.0 - 1e-9);
  CHECK(out.results[0].queries == oracle.queries());

  // distance is non-increasing along one run: a longer run with the same
  // stream can only end closer
  AttackConfig shorter = cfg;
  shorter.max_iter = 5;
  CountingOracle o2(m);
  AdversarialBatch few = boundary_attack(o2, x, {0}, shorter);
  CHECK(out.results[0].norm <= few.results[0].norm + 1e-12);
}

TEST_CASE("boundary attack reports failure to seed and clean misses") {
  Model m = constant_model(); // every input classifies as 0
  AttackConfig cfg;
  cfg.kind = AttackKind::Boundary;
  cfg.max_iter = 5;
  CountingOracle oracle(m);
  Tensor x({1, 2}, {0.0, 0.0});
  CHECK_THROWS_WITH_AS(boundary_attack(oracle, x, {0}, cfg), "cannot seed boundary attack",
                       std::runtime_error);

  CountingOracle o2(m);
  AdversarialBatch out = boundary_attack(o2, x, {1}, cfg); // label 1 is already wrong
  CHECK(out.results[0].success);
  CHECK(out.results[0].norm == 0.0);
  CHECK(out.results[0].queries == 1);
}

TEST_CASE("zoo gradient estimate matches autodiff on a smooth model") {
  Model m({4}, 3, {dense(6), plain(LayerKind::Sigmoid), dense(3)}, 19);
  Tensor x = random_tensor({1, 4}, 23, -1.0, 1.0);
  const int label = 1;

  Tape t;
  NodeId xi = t.input(x);
  ForwardOptions fo;
  ForwardRecord rec = m.forward(t, xi, fo);
  Tensor onehot({1, 3});
  onehot[label] = 1.0;
  Tensor exact = t.grad(t.softmax_ce(rec.logits, onehot, 1.0), {xi})[0];

  CountingOracle oracle(m);
  Tensor est = zoo_gradient_estimate(oracle, x, label, {0, 1, 2, 3}, 1e-4);
  CHECK(oracle.queries() == 8); // two probes per coordinate

  double dot = 0.0, ne = 0.0, ng = 0.0;
  for (std::int64_t i = 0; i < est.size(); ++i) {
    CHECK(std::fabs(est[i] - exact[i]) < 1e-6);
    dot += est[i] * exact[i];
    ne += est[i] * est[i];
    ng += exact[i] * exact[i];
  }
  CHECK(dot / std::sqrt(ne * ng) >= 0.999);

  CHECK_THROWS_AS(zoo_gradient_estimate(oracle, x, label, {99}, 1e-4), std::out_of_range);
  CHECK_THROWS_WITH_AS(zoo_gradient_estimate(oracle, x, label, {0}, 0.0),
                       "zoo probe step must be positive", std::invalid_argument);
}

TEST_CASE("zoo attack ascends the estimated gradient inside the ball") {
  Model m = sign_model();
  Tensor x({1, 2}, {0.5, 0.25});
  AttackConfig cfg;
  cfg.kind = AttackKind::Zoo;
  cfg.epsilon = 0.3;
  cfg.alpha = 0.01;
  cfg.max_iter = 40;
  cfg.zoo_coords = 16;
  CountingOracle oracle(m);
  AdversarialBatch out = zoo_attack(oracle, x, {0}, cfg);
  // x0 presses against the epsilon wall; the flat coordinate never moves
  CHECK(out.x_adv[0] == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(out.x_adv[1] == 0.25);
  CHECK(out.results[0].queries == long(cfg.max_iter) * 2 * cfg.zoo_coords + 1);
  CHECK(out.results[0].queries == oracle.queries());
  check_containment(out.x_adv, x, cfg.epsilon, cfg.bound_lo, cfg.bound_hi);

  AttackConfig budget = cfg;
  budget.query_budget = 50;
  CountingOracle capped(m);
  AdversarialBatch small = zoo_attack(capped, x, {0}, budget);
  CHECK(small.results[0].queries <= budget.query_budget);
}

TEST_CASE("per-sample seed folding makes chunked runs identical to batched runs") {
  Model m({2}, 2, preset_mlp_small(8, 2), 29);
  Tensor x = random_tensor({3, 2}, 31, -4.0, 4.0);
  std::vector<int> y{0, 1, 1};

  AttackConfig cfg;
  cfg.kind = AttackKind::Square;
  cfg.epsilon = 0.4;
  cfg.max_iter = 20;
  cfg.bound_lo = -8.0;
  cfg.bound_hi = 8.0;
  cfg.seed = 77;

  CountingOracle oracle(m);
  AdversarialBatch batched = square_attack(oracle, x, y, cfg);
  for (long b = 0; b < 3; ++b) {
    AttackConfig per = cfg;
    per.seed = cfg.seed ^ std::uint64_t(b); // (seed ^ b) ^ 0 inside the attack
    CountingOracle single(m);
    Tensor xb = row(x, b);
    AdversarialBatch one = square_attack(single, xb, {y[std::size_t(b)]}, per);
    CHECK(bitwise_equal(one.x_adv, row(batched.x_adv, b)));
    CHECK(one.results[0].success == batched.results[std::size_t(b)].success);
    CHECK(one.results[0].queries == batched.results[std::size_t(b)].queries);
  }

  // white-box fgsm is seed-free; slicing commutes with the attack outright
  AttackConfig f;
  f.epsilon = 0.2;
  AdversarialBatch fb = fgsm(m, x, y, f);
  for (long b = 0; b < 3; ++b) {
    AdversarialBatch one = fgsm(m, row(x, b), {y[std::size_t(b)]}, f);
    CHECK(bitwise_equal(one.x_adv, row(fb.x_adv, b)));
  }
}

TEST_CASE("run_attack dispatches every kind") {
  Model m({2}, 2, preset_mlp_small(8, 2), 37);
  Dataset data = synthesize_dataset(SyntheticKind::Gaussians, 3, 41);
  auto [x, yb] = data.full_batch();
  (void)yb;
  std::vector<int> y;
  for (const auto& r : data.records) y.push_back(r.label);

  for (AttackKind k : {AttackKind::Fgsm, AttackKind::Pgd, AttackKind::CwL2, AttackKind::Square,
                       AttackKind::Boundary, AttackKind::Zoo}) {
    CAPTURE(attack_kind_name(k));
    AttackConfig cfg;
    cfg.kind = k;
    cfg.epsilon = 0.2;
    cfg.alpha = 0.05;
    cfg.max_iter = 5;
    cfg.bound_lo = -8.0;
    cfg.bound_hi = 8.0;
    cfg.seed = 3;
    AdversarialBatch out = run_attack(m, x, y, cfg);
    CHECK(out.x_adv.shape() == x.shape());
    REQUIRE(out.results.size() == y.size());
    for (const auto& r : out.results) {
      CHECK(r.queries >= 1);
      CHECK(r.norm >= 0.0);
    }
  }
}

TEST_CASE("adversarial batches save and load bit-exactly") {
  AdversarialBatch batch;
  batch.x_adv = random_tensor({2, 3}, 43, -2.0, 2.0);
  AdversarialResult r0;
  r0.success = true;
  r0.queries = 2;
  r0.norm = 0.5;
  AdversarialResult r1;
  r1.success = false;
  r1.queries = 3;
  r1.norm = 0.25;
  batch.results = {r0, r1};

  const std::string tpath = temp_path("batch.bin");
  const std::string cpath = temp_path("batch.csv");
  save_adversarial_batch(batch, tpath, cpath);

  Tensor back = load_adversarial_tensor(tpath);
  CHECK(bitwise_equal(back, batch.x_adv));

  std::ifstream cs(cpath);
  std::stringstream ss;
  ss << cs.rdbuf();
  CHECK(ss.str() == "index,success,queries,norm\n0,1,2,0.5\n1,0,3,0.25\n");

  std::remove(tpath.c_str());
  std::remove(cpath.c_str());

  CHECK_THROWS_WITH_AS(load_adversarial_tensor("/tmp/definitely_missing_tqr.bin"),
                       "cannot open tensor file: /tmp/definitely_missing_tqr.bin",
                       std::runtime_error);
  const std::string cut = temp_path("cut.bin");
  {
    std::ofstream os(cut, std::ios::binary);
    const std::uint8_t rank = 2;
    os.write(reinterpret_cast<const char*>(&rank), 1);
    const std::int32_t d = 3;
    os.write(reinterpret_cast<const char*>(&d), sizeof d);
  }
  CHECK_THROWS_WITH_AS(load_adversarial_tensor(cut), "truncated tensor file",
                       std::runtime_error);
  std::remove(cut.c_str());
}

TEST_CASE("presets pin the reference hyperparameters") {
  AttackConfig f = preset_fgsm();
  CHECK(f.kind == AttackKind::Fgsm);
  CHECK(f.epsilon == 0.3);
  CHECK(f.epsilon_unit_scale);
  CHECK(f.bound_lo == -128.0);
  CHECK(f.bound_hi == 127.0);
  CHECK(f.eff_epsilon() == doctest::Approx(76.5));

  AttackConfig p = preset_pgd();
  CHECK(p.kind == AttackKind::Pgd);
  CHECK(p.epsilon == doctest::Approx(32.0 / 255.0));
  CHECK(p.alpha == doctest::Approx(2.0 / 255.0));
  CHECK(p.max_iter == 7);

  AttackConfig sc = preset_square_coarse();
  CHECK(sc.kind == AttackKind::Square);
  CHECK(sc.epsilon == 0.3);
  CHECK(sc.max_iter == 10);
  AttackConfig sf = preset_square_fine();
  CHECK(sf.epsilon == 0.05);
  CHECK(sf.max_iter == 10000);

  AttackConfig b = preset_boundary();
  CHECK(b.kind == AttackKind::Boundary);
  CHECK(b.epsilon == 0.01);
  CHECK_FALSE(b.epsilon_unit_scale); // relative contraction step, not pixels
  CHECK(b.max_iter == 5000);

  AttackConfig z = preset_zoo();
  CHECK(z.kind == AttackKind::Zoo);
  CHECK(z.epsilon == 0.3);
  CHECK(z.alpha == 0.01);
  CHECK(z.max_iter == 200);

  CHECK(preset_fgsm_sweep() == std::vector<double>{0.05, 0.1, 0.15, 0.2, 0.25, 0.3});
}

TEST_CASE("attack batch plumbing rejects malformed inputs") {
  Model m = sign_model();
  AttackConfig cfg;
  CHECK_THROWS_WITH_AS(fgsm(m, Tensor({2}, {1.0, 2.0}), {0}, cfg),
                       "attack input must be a (batch, ...) tensor", std::invalid_argument);
  CHECK_THROWS_WITH_AS(fgsm(m, Tensor({2, 2}), {0}, cfg),
                       "attack input batch and label counts differ", std::invalid_argument);
  CHECK_THROWS_WITH_AS(fgsm(m, Tensor({1, 2}), {5}, cfg), "attack label out of range",
                       std::invalid_argument);
}
