#include "tqr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "tqr/csv.hpp"
#include "tqr/quantize.hpp"

namespace tqr {

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  const int workers = int(std::min<long>(std::max(threads, 1), n));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

using ConditionKey = std::tuple<std::string, std::string, double>; // model, attack, epsilon

ConditionKey key_of(const ReportRecord& r) { return {r.model, r.attack, r.epsilon}; }

// fills mean/std_dev on every record from its (model, attack, epsilon) group
void finalize_stats(std::vector<ReportRecord>& records) {
  std::map<ConditionKey, std::pair<double, long>> sums;
  for (const ReportRecord& r : records) {
    auto& [sum, count] = sums[key_of(r)];
    sum += r.accuracy;
    ++count;
  }
  std::map<ConditionKey, double> sq;
  for (const ReportRecord& r : records) {
    const auto& [sum, count] = sums[key_of(r)];
    const double d = r.accuracy - sum / double(count);
    sq[key_of(r)] += d * d;
  }
  for (ReportRecord& r : records) {
    const auto& [sum, count] = sums[key_of(r)];
    r.mean = sum / double(count);
    r.std_dev = std::sqrt(sq[key_of(r)] / double(count));
  }
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

} // namespace

std::string ExperimentReport::csv() const {
  std::string out = "model,quantizer,attack,epsilon,fold,accuracy,mean,std,footprint_bytes,seconds\n";
  for (const ReportRecord& r : records) {
    out += r.model;
    out += ',';
    out += r.quantizer;
    out += ',';
    out += r.attack;
    out += ',';
    out += csv_double(r.epsilon);
    out += ',';
    out += std::to_string(r.fold);
    out += ',';
    out += csv_double(r.accuracy);
    out += ',';
    out += csv_double(r.mean);
    out += ',';
    out += csv_double(r.std_dev);
    out += ',';
    out += std::to_string(r.footprint_bytes);
    out += ",0.000\n";
  }
  return out;
}

std::string ExperimentReport::summary() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %-20s %-9s %8s %9s %9s %10s\n", "model", "quantizer",
                "attack", "epsilon", "mean", "std", "bytes");
  out += line;
  std::vector<ConditionKey> seen;
  for (const ReportRecord& r : records) {
    if (std::find(seen.begin(), seen.end(), key_of(r)) != seen.end()) continue;
    seen.push_back(key_of(r));
    std::snprintf(line, sizeof line, "%-14s %-20s %-9s %8.4f %9.4f %9.4f %10ld\n",
                  r.model.c_str(), r.quantizer.c_str(), r.attack.c_str(), r.epsilon, r.mean,
                  r.std_dev, r.footprint_bytes);
    out += line;
  }
  return out;
}

std::string quantizer_label(const Model& model) {
  for (int i = 0; i < model.num_layers(); ++i) {
    const QuantizerSpec& q = model.layer_spec(i).weight_quantizer;
    if (q.kind == QuantKind::Identity) continue;
    std::string label = quant_kind_name(q.kind);
    if (q.kind == QuantKind::FixedPoint) label += "@" + std::to_string(q.bits);
    return label;
  }
  return "fp32";
}

Dataset dataset_subset(const Dataset& data, const std::vector<long>& indices) {
  Dataset out;
  out.shape = data.shape;
  out.classes = data.classes;
  out.records.reserve(indices.size());
  for (long i : indices) {
    if (i < 0 || i >= data.size()) throw std::out_of_range("dataset subset index out of range");
    out.records.push_back(data.records[std::size_t(i)]);
  }
  return out;
}

double evaluate_clean(const Model& model, const Dataset& data) { return accuracy(model, data); }

AttackEvaluation evaluate_under_attack(const Model& model, const Dataset& data,
                                       const AttackConfig& cfg, int threads) {
  cfg.validate();
  if (data.records.empty()) throw std::invalid_argument("empty dataset");
  const long n = data.size();

  std::vector<int> sample_shape = data.shape;
  sample_shape.insert(sample_shape.begin(), 1);

  AttackEvaluation ev;
  std::vector<int> merged_shape = data.shape;
  merged_shape.insert(merged_shape.begin(), int(n));
  ev.batch.x_adv = Tensor(merged_shape);
  ev.batch.results.resize(std::size_t(n));

  const std::int64_t stride = shape_product(data.shape);
  parallel_for(n, threads, [&](long i) {
    const DatasetRecord& rec = data.records[std::size_t(i)];
    Tensor xi(sample_shape);
    std::copy(rec.features.data(), rec.features.data() + stride, xi.data());
    AttackConfig per = cfg;
    per.seed = cfg.seed ^ std::uint64_t(i);
    AdversarialBatch one;
    try {
      one = run_attack(model, xi, {rec.label}, per);
    } catch (const std::runtime_error& e) {
      if (std::string(e.what()) != "cannot seed boundary attack") throw;
      one.x_adv = xi;
      one.results.resize(1);
      one.results[0].success = false;
      one.results[0].queries = 101; // clean check plus the exhausted resample budget
      one.results[0].norm = 0.0;
    }
    std::copy(one.x_adv.data(), one.x_adv.data() + stride, ev.batch.x_adv.data() + i * stride);
    ev.batch.results[std::size_t(i)] = one.results[0];
  });

  long correct = 0;
  constexpr long kChunk = 256;
  for (long at = 0; at < n; at += kChunk) {
    const long take = std::min(kChunk, n - at);
    std::vector<int> chunk_shape = data.shape;
    chunk_shape.insert(chunk_shape.begin(), int(take));
    Tensor xc(chunk_shape);
    std::copy(ev.batch.x_adv.data() + at * stride, ev.batch.x_adv.data() + (at + take) * stride,
              xc.data());
    Tensor logits = model.predict(xc);
    for (long r = 0; r < take; ++r)
      if (argmax_row(logits, int(r)) == data.records[std::size_t(at + r)].label) ++correct;
  }
  ev.accuracy = double(correct) / double(n);
  return ev;
}

ExperimentReport epsilon_sweep(const Model& model, const Dataset& data, AttackKind kind,
                               const std::vector<double>& eps_list, const AttackConfig& base,
                               const std::string& model_label, int threads) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon list must be non-empty");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] > eps_list[i - 1]))
      throw std::invalid_argument("epsilon list must be ascending");

  ExperimentReport report;
  const std::string qlabel = quantizer_label(model);
  const long footprint = long(model.flash_footprint());
  for (double eps : eps_list) {
    AttackConfig cfg = base;
    cfg.kind = kind;
    cfg.epsilon = eps;
    const double t0 = now_seconds();
    AttackEvaluation ev = evaluate_under_attack(model, data, cfg, threads);
    ReportRecord rec;
    rec.model = model_label;
    rec.quantizer = qlabel;
    rec.attack = attack_kind_name(kind);
    rec.epsilon = eps;
    rec.fold = 0;
    rec.accuracy = ev.accuracy;
    rec.footprint_bytes = footprint;
    rec.seconds = now_seconds() - t0;
    report.records.push_back(std::move(rec));
  }
  finalize_stats(report.records);
  return report;
}

ExperimentReport kfold_robustness(const ModelBuilder& builder, const Dataset& data,
                                  const TrainConfig& cfg,
                                  const std::vector<AttackConfig>& attacks, int K,
                                  const std::string& model_label, int threads) {
  cfg.validate();
  FoldPlan plan = kfold_split(data.size(), K, cfg.seed);

  ExperimentReport report;
  for (int f = 0; f < K; ++f) {
    const std::uint64_t fold_seed =
        cfg.seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(f + 1));
    Model model = builder(fold_seed);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed;
    Dataset train_ds = dataset_subset(data, plan.train_idx[std::size_t(f)]);
    Dataset val_ds = dataset_subset(data, plan.val_idx[std::size_t(f)]);
    double t0 = now_seconds();
    train(model, train_ds, fold_cfg, &val_ds);
    const double train_secs = now_seconds() - t0;

    const std::string qlabel = quantizer_label(model);
    const long footprint = long(model.flash_footprint());

    t0 = now_seconds();
    ReportRecord clean;
    clean.model = model_label;
    clean.quantizer = qlabel;
    clean.attack = "clean";
    clean.epsilon = 0.0;
    clean.fold = f;
    clean.accuracy = accuracy(model, val_ds);
    clean.footprint_bytes = footprint;
    clean.seconds = train_secs + (now_seconds() - t0);
    report.records.push_back(std::move(clean));

    for (const AttackConfig& a : attacks) {
      AttackConfig per_fold = a;
      per_fold.seed = a.seed ^ fold_seed;
      t0 = now_seconds();
      AttackEvaluation ev = evaluate_under_attack(model, val_ds, per_fold, threads);
      ReportRecord rec;
      rec.model = model_label;
      rec.quantizer = qlabel;
      rec.attack = attack_kind_name(a.kind);
      rec.epsilon = a.epsilon;
      rec.fold = f;
      rec.accuracy = ev.accuracy;
      rec.footprint_bytes = footprint;
      rec.seconds = now_seconds() - t0;
      report.records.push_back(std::move(rec));
    }
  }
  finalize_stats(report.records);
  return report;
}

ExperimentReport distillation_compare(const ModelBuilder& builder, const Dataset& data,
                                      const TrainConfig& cfg,
                                      const std::vector<AttackConfig>& attacks, int K,
                                      const std::vector<double>& temperatures, int threads) {
  if (temperatures.empty()) throw std::invalid_argument("temperature list must be non-empty");
  ExperimentReport report;
  for (double T : temperatures) {
    TrainConfig cfg_t = cfg;
    cfg_t.distill_T = T;
    ExperimentReport block = kfold_robustness(builder, data, cfg_t, attacks, K,
                                              "T=" + csv_double(T), threads);
    report.records.insert(report.records.end(), block.records.begin(), block.records.end());
  }
  finalize_stats(report.records);
  return report;
}

} // namespace tqr
