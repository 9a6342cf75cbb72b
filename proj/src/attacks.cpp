#include "tqr/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "tqr/csv.hpp"
#include "tqr/rng.hpp"

namespace tqr {

AttackKind attack_kind_from_name(const std::string& name) {
  if (name == "fgsm") return AttackKind::Fgsm;
  if (name == "pgd") return AttackKind::Pgd;
  if (name == "cw_l2") return AttackKind::CwL2;
  if (name == "square") return AttackKind::Square;
  if (name == "boundary") return AttackKind::Boundary;
  if (name == "zoo") return AttackKind::Zoo;
  throw std::invalid_argument("unknown attack kind: " + name);
}

std::string attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::Fgsm: return "fgsm";
    case AttackKind::Pgd: return "pgd";
    case AttackKind::CwL2: return "cw_l2";
    case AttackKind::Square: return "square";
    case AttackKind::Boundary: return "boundary";
    case AttackKind::Zoo: return "zoo";
  }
  return "unknown";
}

AttackNorm attack_norm_from_name(const std::string& name) {
  if (name == "linf") return AttackNorm::Linf;
  if (name == "l2") return AttackNorm::L2;
  throw std::invalid_argument("unknown attack norm: " + name);
}

std::string attack_norm_name(AttackNorm n) {
  return n == AttackNorm::Linf ? "linf" : "l2";
}

void AttackConfig::validate() const {
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (cw_kappa < 0.0) throw std::invalid_argument("cw confidence must be non-negative");
  if (!(cw_c > 0.0)) throw std::invalid_argument("cw trade-off constant must be positive");
  if (!(cw_lr > 0.0)) throw std::invalid_argument("cw learning rate must be positive");
  if (!(bound_lo < bound_hi)) throw std::invalid_argument("input bounds must satisfy lo < hi");
  if (kind == AttackKind::Pgd && alpha > epsilon)
    throw std::invalid_argument("pgd step alpha exceeds the epsilon ball");
  if (!(zoo_h > 0.0)) throw std::invalid_argument("zoo probe step must be positive");
  if (zoo_coords < 1) throw std::invalid_argument("zoo coordinate count must be at least 1");
  if (!(square_p_init > 0.0 && square_p_init <= 1.0))
    throw std::invalid_argument("square p_init must lie in (0,1]");
  if (query_budget < 0) throw std::invalid_argument("query budget must be non-negative");
}

namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Tensor onehot_batch(const std::vector<int>& y, int classes) {
  Tensor out({int(y.size()), classes});
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= classes)
      throw std::invalid_argument("attack label out of range");
    out[std::int64_t(i) * classes + y[i]] = 1.0;
  }
  return out;
}

void check_batch(const Tensor& x, const std::vector<int>& y) {
  if (x.ndim() < 2) throw std::invalid_argument("attack input must be a (batch, ...) tensor");
  if (x.dim(0) != int(y.size()))
    throw std::invalid_argument("attack input batch and label counts differ");
}

Tensor sample_row(const Tensor& x, long row) {
  std::vector<int> shape = x.shape();
  shape[0] = 1;
  Tensor out(shape);
  const std::int64_t stride = out.size();
  std::copy(x.data() + row * stride, x.data() + (row + 1) * stride, out.data());
  return out;
}

void store_row(Tensor& batch, long row, const Tensor& sample) {
  const std::int64_t stride = sample.size();
  std::copy(sample.data(), sample.data() + stride, batch.data() + row * stride);
}

double linf_dist(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double l2_dist(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// z_y - max_{j != y} z_j over a (1,K) logits tensor
double margin_of(const Tensor& logits, int y) {
  const int K = logits.dim(1);
  double other = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < K; ++j)
    if (j != y) other = std::max(other, logits[j]);
  return logits[y] - other;
}

double ce_of(const Tensor& logits, int y) {
  const int K = logits.dim(1);
  double m = logits[0];
  for (int j = 1; j < K; ++j) m = std::max(m, logits[j]);
  double denom = 0.0;
  for (int j = 0; j < K; ++j) denom += std::exp(logits[j] - m);
  return std::log(denom) - (logits[y] - m);
}

// d(mean cross-entropy)/dx on the straight-through quantized path
Tensor input_gradient(const Model& model, const Tensor& x, const Tensor& y_onehot) {
  Model& m = const_cast<Model&>(model);
  Tape t;
  NodeId xi = t.input(x);
  ForwardOptions fo;
  ForwardRecord rec = m.forward(t, xi, fo);
  NodeId loss = t.softmax_ce(rec.logits, y_onehot, 1.0);
  return t.grad(loss, {xi})[0];
}

void fill_success(const Model& model, const Tensor& x_adv, const std::vector<int>& y,
                  AdversarialBatch& out) {
  Tensor logits = model.predict(x_adv);
  for (std::size_t i = 0; i < y.size(); ++i)
    out.results[i].success = argmax_row(logits, int(i)) != y[i];
}

} // namespace

AdversarialBatch fgsm(const Model& model, const Tensor& x, const std::vector<int>& y,
                      const AttackConfig& cfg) {
  cfg.validate();
  check_batch(x, y);
  const double eps = cfg.eff_epsilon();
  Tensor g = input_gradient(model, x, onehot_batch(y, model.classes()));
  AdversarialBatch out;
  out.x_adv = x;
  for (std::int64_t i = 0; i < x.size(); ++i)
    out.x_adv[i] = std::clamp(x[i] + eps * sign0(g[i]), cfg.bound_lo, cfg.bound_hi);
  out.results.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.results[i].queries = 2; // one gradient pass, one verdict pass
    out.results[i].norm = linf_dist(sample_row(out.x_adv, long(i)), sample_row(x, long(i)));
  }
  fill_success(model, out.x_adv, y, out);
  return out;
}

AdversarialBatch pgd(const Model& model, const Tensor& x, const std::vector<int>& y,
                     const AttackConfig& cfg) {
  cfg.validate();
  check_batch(x, y);
  if (cfg.alpha > cfg.epsilon)
    throw std::invalid_argument("pgd step alpha exceeds the epsilon ball");
  const double eps = cfg.eff_epsilon();
  const double alpha = cfg.eff_alpha();
  const std::int64_t stride = x.size() / x.dim(0);
  Tensor y_onehot = onehot_batch(y, model.classes());
  Tensor cur = x;
  if (cfg.pgd_random_start) {
    for (long b = 0; b < x.dim(0); ++b) {
      RngStream rs(cfg.seed ^ std::uint64_t(b));
      for (std::int64_t j = 0; j < stride; ++j) {
        const std::int64_t at = b * stride + j;
        cur[at] = std::clamp(x[at] + rs.uniform(-eps, eps), cfg.bound_lo, cfg.bound_hi);
      }
    }
  }
  for (int it = 0; it < cfg.max_iter; ++it) {
    Tensor g = input_gradient(model, cur, y_onehot);
    for (std::int64_t i = 0; i < cur.size(); ++i) {
      double v = cur[i] + alpha * sign0(g[i]);
      v = std::clamp(v, x[i] - eps, x[i] + eps);
      cur[i] = std::clamp(v, cfg.bound_lo, cfg.bound_hi);
    }
  }
  AdversarialBatch out;
  out.x_adv = std::move(cur);
  out.results.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.results[i].queries = cfg.max_iter + 1;
    out.results[i].norm = linf_dist(sample_row(out.x_adv, long(i)), sample_row(x, long(i)));
  }
  fill_success(model, out.x_adv, y, out);
  return out;
}

AdversarialBatch cw_l2(const Model& model, const Tensor& x, const std::vector<int>& y,
                       const AttackConfig& cfg) {
  cfg.validate();
  check_batch(x, y);
  Model& m = const_cast<Model&>(model);
  const double lo = cfg.bound_lo, hi = cfg.bound_hi;
  const double half = (hi - lo) / 2.0, mid = lo + half;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;

  AdversarialBatch out;
  out.x_adv = x;
  out.results.resize(y.size());
  for (long b = 0; b < x.dim(0); ++b) {
    Tensor xs = sample_row(x, b);
    AdversarialResult& res = out.results[std::size_t(b)];
    {
      Tensor z = model.predict(xs);
      ++res.queries;
      if (argmax_row(z, 0) != y[std::size_t(b)]) {
        res.success = true;
        res.norm = 0.0;
        continue;
      }
    }
    Tensor w = Tensor::zeros_like(xs);
    for (std::int64_t i = 0; i < w.size(); ++i) {
      const double u = std::clamp((xs[i] - mid) / half, -1.0 + 1e-8, 1.0 - 1e-8);
      w[i] = std::atanh(u);
    }
    Tensor onehot({1, model.classes()});
    onehot[y[std::size_t(b)]] = 1.0;
    Tensor adam_m = Tensor::zeros_like(w), adam_v = Tensor::zeros_like(w);
    Tensor best = xs;
    double best_norm = std::numeric_limits<double>::infinity();
    Tensor last = xs;
    for (int it = 1; it <= cfg.max_iter; ++it) {
      Tape t;
      NodeId wi = t.input(w);
      NodeId xw = t.affine(t.tanh(wi), half, mid);
      ForwardOptions fo;
      ForwardRecord rec = m.forward(t, xw, fo);
      ++res.queries;
      NodeId zt = t.dot(rec.logits, t.constant(onehot));
      NodeId diff = t.sub(zt, t.max_except(rec.logits, y[std::size_t(b)]));
      NodeId f = t.sub(t.relu(t.affine(diff, 1.0, cfg.cw_kappa)),
                       t.constant(Tensor::scalar(cfg.cw_kappa)));
      NodeId delta = t.sub(xw, t.constant(xs));
      NodeId obj = t.add(t.dot(delta, delta), t.scale(f, cfg.cw_c));
      Tensor g = t.grad(obj, {wi})[0];

      last = t.value(xw);
      const double norm = l2_dist(last, xs);
      if (argmax_row(t.value(rec.logits), 0) != y[std::size_t(b)] && norm < best_norm) {
        best = last;
        best_norm = norm;
      }
      const double corr1 = 1.0 - std::pow(kBeta1, double(it));
      const double corr2 = 1.0 - std::pow(kBeta2, double(it));
      for (std::int64_t i = 0; i < w.size(); ++i) {
        adam_m[i] = kBeta1 * adam_m[i] + (1.0 - kBeta1) * g[i];
        adam_v[i] = kBeta2 * adam_v[i] + (1.0 - kBeta2) * g[i] * g[i];
        w[i] -= cfg.cw_lr * (adam_m[i] / corr1) / (std::sqrt(adam_v[i] / corr2) + kAdamEps);
      }
    }
    if (best_norm < std::numeric_limits<double>::infinity()) {
      store_row(out.x_adv, b, best);
      res.success = true;
      res.norm = best_norm;
    } else {
      store_row(out.x_adv, b, last);
      res.success = false;
      res.norm = l2_dist(last, xs);
    }
  }
  return out;
}

AdversarialBatch square_attack(ScoreOracle& oracle, const Tensor& x, const std::vector<int>& y,
                               const AttackConfig& cfg) {
  cfg.validate();
  check_batch(x, y);
  const double eps = cfg.eff_epsilon();
  const std::vector<int> shape(x.shape().begin() + 1, x.shape().end());
  const int H = shape.size() == 3 ? shape[0] : 1;
  const int W = shape.size() == 3 ? shape[1] : int(shape_product(shape));
  const int C = shape.size() == 3 ? shape[2] : 1;

  AdversarialBatch out;
  out.x_adv = x;
  out.results.resize(y.size());
  for (long b = 0; b < x.dim(0); ++b) {
    RngStream rng(cfg.seed ^ std::uint64_t(b));
    const int label = y[std::size_t(b)];
    Tensor xs = sample_row(x, b);
    const long q0 = oracle.queries();

    Tensor cur = xs;
    for (int w = 0; w < W; ++w)
      for (int c = 0; c < C; ++c) {
        const double s = rng.bernoulli(0.5) ? eps : -eps;
        for (int h = 0; h < H; ++h) {
          const std::int64_t at = (std::int64_t(h) * W + w) * C + c;
          cur[at] = std::clamp(xs[at] + s, cfg.bound_lo, cfg.bound_hi);
        }
      }
    Tensor z = oracle.logits(cur);
    double best_margin = margin_of(z, label);
    bool success = argmax_row(z, 0) != label;

    for (int it = 0; it < cfg.max_iter && !success; ++it) {
      if (cfg.query_budget > 0 && oracle.queries() - q0 >= cfg.query_budget) break;
      const double frac = double(it) / double(cfg.max_iter);
      double p = cfg.square_p_init;
      if (frac >= 0.5) p /= 2.0;
      if (frac >= 0.8) p /= 2.0;
      if (frac >= 0.9) p /= 2.0;
      if (frac >= 0.95) p /= 2.0;
      int side = int(std::lround(std::sqrt(p * double(H) * double(W))));
      side = std::clamp(side, 1, std::min(H, W));
      const int r0 = int(rng.below(H - side + 1));
      const int c0 = int(rng.below(W - side + 1));
      Tensor cand = cur;
      for (int c = 0; c < C; ++c) {
        const double s = rng.bernoulli(0.5) ? eps : -eps;
        for (int dr = 0; dr < side; ++dr)
          for (int dc = 0; dc < side; ++dc) {
            const std::int64_t at = (std::int64_t(r0 + dr) * W + (c0 + dc)) * C + c;
            cand[at] = std::clamp(xs[at] + s, cfg.bound_lo, cfg.bound_hi);
          }
      }
      Tensor zc = oracle.logits(cand);
      const double mc = margin_of(zc, label);
      if (mc < best_margin) {
        cur = std::move(cand);
        best_margin = mc;
        success = argmax_row(zc, 0) != label;
      }
    }
    store_row(out.x_adv, b, cur);
    AdversarialResult& res = out.results[std::size_t(b)];
    res.success = success;
    res.queries = oracle.queries() - q0;
    res.norm = linf_dist(cur, xs);
  }
  return out;
}

AdversarialBatch boundary_attack(ScoreOracle& oracle, const Tensor& x, const std::vector<int>& y,
                                 const AttackConfig& cfg) {
  cfg.validate();
  check_batch(x, y);
  constexpr int kInitResamples = 100;
  AdversarialBatch out;
  out.x_adv = x;
  out.results.resize(y.size());
  for (long b = 0; b < x.dim(0); ++b) {
    RngStream rng(cfg.seed ^ std::uint64_t(b));
    const int label = y[std::size_t(b)];
    Tensor xs = sample_row(x, b);
    const long q0 = oracle.queries();
    AdversarialResult& res = out.results[std::size_t(b)];

    if (argmax_row(oracle.logits(xs), 0) != label) {
      res.success = true;
      res.norm = 0.0;
      res.queries = oracle.queries() - q0;
      continue;
    }

    Tensor cur = xs;
    bool seeded = false;
    for (int attempt = 0; attempt < kInitResamples && !seeded; ++attempt) {
      Tensor cand = Tensor::zeros_like(xs);
      for (std::int64_t i = 0; i < cand.size(); ++i)
        cand[i] = rng.uniform(cfg.bound_lo, cfg.bound_hi);
      if (argmax_row(oracle.logits(cand), 0) != label) {
        cur = std::move(cand);
        seeded = true;
      }
    }
    if (!seeded) throw std::runtime_error("cannot seed boundary attack");

    double dist = l2_dist(cur, xs);
    for (int it = 0; it < cfg.max_iter; ++it) {
      if (cfg.query_budget > 0 && oracle.queries() - q0 >= cfg.query_budget) break;
      Tensor d = Tensor::zeros_like(xs);
      double dd = 0.0;
      for (std::int64_t i = 0; i < d.size(); ++i) {
        d[i] = cur[i] - xs[i];
        dd += d[i] * d[i];
      }
      Tensor eta = Tensor::zeros_like(xs);
      double ed = 0.0;
      for (std::int64_t i = 0; i < eta.size(); ++i) {
        eta[i] = rng.normal();
        ed += eta[i] * d[i];
      }
      double ee = 0.0;
      for (std::int64_t i = 0; i < eta.size(); ++i) {
        if (dd > 0.0) eta[i] -= (ed / dd) * d[i];
        ee += eta[i] * eta[i];
      }
      if (ee == 0.0) continue;
      const double target = cfg.epsilon * std::sqrt(dd);
      const double scale = target / std::sqrt(ee);
      Tensor cand = Tensor::zeros_like(xs);
      for (std::int64_t i = 0; i < cand.size(); ++i) {
        const double sphere = cur[i] + eta[i] * scale;
        const double stepped = xs[i] + (sphere - xs[i]) * (1.0 - cfg.epsilon);
        cand[i] = std::clamp(stepped, cfg.bound_lo, cfg.bound_hi);
      }
      const double cand_dist = l2_dist(cand, xs);
      if (cand_dist <= dist && argmax_row(oracle.logits(cand), 0) != label) {
        cur = std::move(cand);
        dist = cand_dist;
      }
    }
    store_row(out.x_adv, b, cur);
    res.success = true;
    res.norm = dist;
    res.queries = oracle.queries() - q0;
  }
  return out;
}

Tensor zoo_gradient_estimate(ScoreOracle& oracle, const Tensor& x, int label,
                             const std::vector<long>& coords, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("zoo probe step must be positive");
  Tensor g = Tensor::zeros_like(x);
  Tensor probe = x;
  for (long c : coords) {
    if (c < 0 || c >= x.size()) throw std::out_of_range("zoo coordinate out of range");
    probe[c] = x[c] + h;
    const double up = ce_of(oracle.logits(probe), label);
    probe[c] = x[c] - h;
    const double down = ce_of(oracle.logits(probe), label);
    probe[c] = x[c];
    g[c] = (up - down) / (2.0 * h);
  }
  return g;
}

AdversarialBatch zoo_attack(ScoreOracle& oracle, const Tensor& x, const std::vector<int>& y,
                            const AttackConfig& cfg) {
  cfg.validate();
  check_batch(x, y);
  const double eps = cfg.eff_epsilon();
  const double alpha = cfg.eff_alpha();
  AdversarialBatch out;
  out.x_adv = x;
  out.results.resize(y.size());
  for (long b = 0; b < x.dim(0); ++b) {
    RngStream rng(cfg.seed ^ std::uint64_t(b));
    const int label = y[std::size_t(b)];
    Tensor xs = sample_row(x, b);
    const long q0 = oracle.queries();

    Tensor cur = xs;
    for (int it = 0; it < cfg.max_iter; ++it) {
      if (cfg.query_budget > 0 &&
          oracle.queries() - q0 + 2 * cfg.zoo_coords > cfg.query_budget)
        break;
      std::vector<long> coords;
      coords.reserve(std::size_t(cfg.zoo_coords));
      for (int c = 0; c < cfg.zoo_coords; ++c) coords.push_back(rng.below(cur.size()));
      Tensor g = zoo_gradient_estimate(oracle, cur, label, coords, cfg.zoo_h);
      for (long c : coords) {
        double v = cur[c] + alpha * sign0(g[c]);
        v = std::clamp(v, xs[c] - eps, xs[c] + eps);
        cur[c] = std::clamp(v, cfg.bound_lo, cfg.bound_hi);
      }
    }
    store_row(out.x_adv, b, cur);
    AdversarialResult& res = out.results[std::size_t(b)];
    res.success = argmax_row(oracle.logits(cur), 0) != label;
    res.queries = oracle.queries() - q0;
    res.norm = linf_dist(cur, xs);
  }
  return out;
}

AdversarialBatch run_attack(const Model& model, const Tensor& x, const std::vector<int>& y,
                            const AttackConfig& cfg) {
  switch (cfg.kind) {
    case AttackKind::Fgsm: return fgsm(model, x, y, cfg);
    case AttackKind::Pgd: return pgd(model, x, y, cfg);
    case AttackKind::CwL2: return cw_l2(model, x, y, cfg);
    case AttackKind::Square: {
      ModelOracle oracle(model);
      return square_attack(oracle, x, y, cfg);
    }
    case AttackKind::Boundary: {
      ModelOracle oracle(model);
      return boundary_attack(oracle, x, y, cfg);
    }
    case AttackKind::Zoo: {
      ModelOracle oracle(model);
      return zoo_attack(oracle, x, y, cfg);
    }
  }
  throw std::logic_error("unhandled attack kind");
}

void save_adversarial_batch(const AdversarialBatch& batch, const std::string& tensor_path,
                            const std::string& csv_path) {
  {
    std::ofstream os(tensor_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open tensor file for writing: " + tensor_path);
    const Tensor& t = batch.x_adv;
    const std::uint8_t rank = std::uint8_t(t.ndim());
    os.write(reinterpret_cast<const char*>(&rank), 1);
    for (int i = 0; i < t.ndim(); ++i) {
      const std::int32_t d = t.dim(i);
      os.write(reinterpret_cast<const char*>(&d), sizeof d);
    }
    os.write(reinterpret_cast<const char*>(t.data()),
             std::streamsize(sizeof(double) * std::size_t(t.size())));
    if (!os) throw std::runtime_error("failed writing tensor file: " + tensor_path);
  }
  std::ofstream cs(csv_path);
  if (!cs) throw std::runtime_error("cannot open sidecar for writing: " + csv_path);
  cs << "index,success,queries,norm\n";
  for (std::size_t i = 0; i < batch.results.size(); ++i) {
    const AdversarialResult& r = batch.results[i];
    cs << i << "," << (r.success ? 1 : 0) << "," << r.queries << "," << csv_double(r.norm)
       << "\n";
  }
  if (!cs) throw std::runtime_error("failed writing sidecar: " + csv_path);
}

Tensor load_adversarial_tensor(const std::string& tensor_path) {
  std::ifstream is(tensor_path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open tensor file: " + tensor_path);
  std::uint8_t rank = 0;
  if (!is.read(reinterpret_cast<char*>(&rank), 1))
    throw std::runtime_error("truncated tensor file");
  std::vector<int> shape;
  for (int i = 0; i < int(rank); ++i) {
    std::int32_t d = 0;
    if (!is.read(reinterpret_cast<char*>(&d), sizeof d))
      throw std::runtime_error("truncated tensor file");
    shape.push_back(d);
  }
  Tensor t(shape);
  if (!is.read(reinterpret_cast<char*>(t.data()),
               std::streamsize(sizeof(double) * std::size_t(t.size()))))
    throw std::runtime_error("truncated tensor file");
  return t;
}

namespace {

AttackConfig image_preset(AttackKind kind) {
  AttackConfig c;
  c.kind = kind;
  c.epsilon_unit_scale = true;
  c.bound_lo = -128.0;
  c.bound_hi = 127.0;
  return c;
}

} // namespace

AttackConfig preset_fgsm() {
  AttackConfig c = image_preset(AttackKind::Fgsm);
  c.epsilon = 0.3;
  return c;
}

AttackConfig preset_pgd() {
  AttackConfig c = image_preset(AttackKind::Pgd);
  c.epsilon = 32.0 / 255.0;
  c.alpha = 2.0 / 255.0;
  c.max_iter = 7;
  return c;
}

AttackConfig preset_square_coarse() {
  AttackConfig c = image_preset(AttackKind::Square);
  c.epsilon = 0.3;
  c.max_iter = 10;
  return c;
}

AttackConfig preset_square_fine() {
  AttackConfig c = image_preset(AttackKind::Square);
  c.epsilon = 0.05;
  c.max_iter = 10000;
  return c;
}

AttackConfig preset_boundary() {
  AttackConfig c = image_preset(AttackKind::Boundary);
  c.epsilon = 0.01; // relative step size, not an image magnitude
  c.epsilon_unit_scale = false;
  c.max_iter = 5000;
  return c;
}

AttackConfig preset_zoo() {
  AttackConfig c = image_preset(AttackKind::Zoo);
  c.epsilon = 0.3;
  c.alpha = 0.01;
  c.max_iter = 200;
  return c;
}

std::vector<double> preset_fgsm_sweep() { return {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}; }

} // namespace tqr
