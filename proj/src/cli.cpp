#include "tqr/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "tqr/csv.hpp"
#include "tqr/harness.hpp"
#include "tqr/quantize.hpp"
#include "tqr/rng.hpp"
#include "tqr/tape.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace tqr {

namespace {

void check_keys(const json& o, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!o.is_object())
    throw std::invalid_argument("config value at '" + path + "' must be an object");
  for (const auto& item : o.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument("unknown config key: " +
                                  (path.empty() ? item.key() : path + "." + item.key()));
  }
}

template <typename T>
void get_to(const json& o, const char* key, T& out) {
  if (o.contains(key)) o.at(key).get_to(out);
}

QuantizerSpec parse_quantizer(const json& o, const std::string& path) {
  check_keys(o, path, {"kind", "bits", "threshold", "ste_clip"});
  QuantizerSpec q;
  if (o.contains("kind")) q.kind = quant_kind_from_name(o.at("kind").get<std::string>());
  get_to(o, "bits", q.bits);
  get_to(o, "threshold", q.threshold);
  get_to(o, "ste_clip", q.ste_clip);
  return q;
}

ordered_json quantizer_json(const QuantizerSpec& q) {
  return {{"kind", quant_kind_name(q.kind)},
          {"bits", q.bits},
          {"threshold", q.threshold},
          {"ste_clip", q.ste_clip}};
}

DatasetSpec parse_dataset(const json& o) {
  check_keys(o, "dataset",
             {"kind", "path", "classes", "downsample", "cap", "samples", "separation"});
  DatasetSpec d;
  get_to(o, "kind", d.kind);
  get_to(o, "path", d.path);
  get_to(o, "classes", d.classes);
  get_to(o, "downsample", d.downsample);
  get_to(o, "cap", d.cap);
  get_to(o, "samples", d.samples);
  get_to(o, "separation", d.separation);
  return d;
}

ordered_json dataset_json(const DatasetSpec& d) {
  return {{"kind", d.kind},         {"path", d.path}, {"classes", d.classes},
          {"downsample", d.downsample}, {"cap", d.cap},   {"samples", d.samples},
          {"separation", d.separation}};
}

ModelSpec parse_model(const json& o) {
  check_keys(o, "model",
             {"preset", "hidden", "weight_quantizer", "activation_quantizer", "layer_overrides"});
  ModelSpec m;
  get_to(o, "preset", m.preset);
  get_to(o, "hidden", m.hidden);
  if (o.contains("weight_quantizer"))
    m.weight_quantizer = parse_quantizer(o.at("weight_quantizer"), "model.weight_quantizer");
  if (o.contains("activation_quantizer"))
    m.activation_quantizer =
        parse_quantizer(o.at("activation_quantizer"), "model.activation_quantizer");
  if (o.contains("layer_overrides")) {
    const json& arr = o.at("layer_overrides");
    if (!arr.is_array())
      throw std::invalid_argument("config value at 'model.layer_overrides' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "model.layer_overrides[" + std::to_string(i) + "]";
      check_keys(arr[i], path, {"layer", "weight_quantizer", "activation_quantizer"});
      if (!arr[i].contains("layer"))
        throw std::invalid_argument(path + " needs a layer index");
      LayerQuantOverride ov;
      arr[i].at("layer").get_to(ov.layer);
      if (arr[i].contains("weight_quantizer")) {
        ov.has_weight = true;
        ov.weight_quantizer = parse_quantizer(arr[i].at("weight_quantizer"), path);
      }
      if (arr[i].contains("activation_quantizer")) {
        ov.has_activation = true;
        ov.activation_quantizer = parse_quantizer(arr[i].at("activation_quantizer"), path);
      }
      m.overrides.push_back(std::move(ov));
    }
  }
  return m;
}

ordered_json model_json(const ModelSpec& m) {
  ordered_json o = {{"preset", m.preset},
                    {"hidden", m.hidden},
                    {"weight_quantizer", quantizer_json(m.weight_quantizer)},
                    {"activation_quantizer", quantizer_json(m.activation_quantizer)}};
  if (!m.overrides.empty()) {
    ordered_json arr = ordered_json::array();
    for (const LayerQuantOverride& ov : m.overrides) {
      ordered_json e = {{"layer", ov.layer}};
      if (ov.has_weight) e["weight_quantizer"] = quantizer_json(ov.weight_quantizer);
      if (ov.has_activation) e["activation_quantizer"] = quantizer_json(ov.activation_quantizer);
      arr.push_back(std::move(e));
    }
    o["layer_overrides"] = std::move(arr);
  }
  return o;
}

TrainConfig parse_train(const json& o) {
  check_keys(o, "train",
             {"epochs", "batch_size", "lr_min", "lr_max", "optimizer", "jr_lambda", "jr_mode",
              "distill_T", "output_noise", "schedule"});
  TrainConfig t;
  get_to(o, "epochs", t.epochs);
  get_to(o, "batch_size", t.batch_size);
  get_to(o, "lr_min", t.lr_min);
  get_to(o, "lr_max", t.lr_max);
  if (o.contains("optimizer"))
    t.optimizer = optimizer_from_name(o.at("optimizer").get<std::string>());
  get_to(o, "jr_lambda", t.jr_lambda);
  if (o.contains("jr_mode")) t.jr_mode = jr_mode_from_name(o.at("jr_mode").get<std::string>());
  get_to(o, "distill_T", t.distill_T);
  get_to(o, "output_noise", t.output_noise);
  if (o.contains("schedule")) {
    const json& s = o.at("schedule");
    check_keys(s, "train.schedule", {"r0", "r_final", "total_steps"});
    get_to(s, "r0", t.schedule.r0);
    get_to(s, "r_final", t.schedule.r_final);
    get_to(s, "total_steps", t.schedule.total_steps);
  }
  return t;
}

ordered_json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"lr_min", t.lr_min},
          {"lr_max", t.lr_max},
          {"optimizer", optimizer_name(t.optimizer)},
          {"jr_lambda", t.jr_lambda},
          {"jr_mode", jr_mode_name(t.jr_mode)},
          {"distill_T", t.distill_T},
          {"output_noise", t.output_noise},
          {"schedule",
           {{"r0", t.schedule.r0},
            {"r_final", t.schedule.r_final},
            {"total_steps", t.schedule.total_steps}}}};
}

AttackConfig attack_preset_by_name(const std::string& name) {
  if (name == "fgsm") return preset_fgsm();
  if (name == "pgd") return preset_pgd();
  if (name == "square_coarse") return preset_square_coarse();
  if (name == "square_fine") return preset_square_fine();
  if (name == "boundary") return preset_boundary();
  if (name == "zoo") return preset_zoo();
  throw std::invalid_argument("unknown attack preset: " + name);
}

AttackConfig parse_attack(const json& o, const std::string& path) {
  check_keys(o, path,
             {"preset", "kind", "epsilon", "alpha", "max_iter", "norm", "cw_kappa", "cw_c",
              "cw_lr", "query_budget", "bound_lo", "bound_hi", "pgd_random_start", "zoo_h",
              "zoo_coords", "square_p_init", "epsilon_unit_scale"});
  AttackConfig a;
  if (o.contains("preset")) a = attack_preset_by_name(o.at("preset").get<std::string>());
  if (o.contains("kind")) a.kind = attack_kind_from_name(o.at("kind").get<std::string>());
  get_to(o, "epsilon", a.epsilon);
  get_to(o, "alpha", a.alpha);
  get_to(o, "max_iter", a.max_iter);
  if (o.contains("norm")) a.norm = attack_norm_from_name(o.at("norm").get<std::string>());
  get_to(o, "cw_kappa", a.cw_kappa);
  get_to(o, "cw_c", a.cw_c);
  get_to(o, "cw_lr", a.cw_lr);
  get_to(o, "query_budget", a.query_budget);
  get_to(o, "bound_lo", a.bound_lo);
  get_to(o, "bound_hi", a.bound_hi);
  get_to(o, "pgd_random_start", a.pgd_random_start);
  get_to(o, "zoo_h", a.zoo_h);
  get_to(o, "zoo_coords", a.zoo_coords);
  get_to(o, "square_p_init", a.square_p_init);
  get_to(o, "epsilon_unit_scale", a.epsilon_unit_scale);
  return a;
}

ordered_json attack_json(const AttackConfig& a) {
  return {{"kind", attack_kind_name(a.kind)},
          {"epsilon", a.epsilon},
          {"alpha", a.alpha},
          {"max_iter", a.max_iter},
          {"norm", attack_norm_name(a.norm)},
          {"cw_kappa", a.cw_kappa},
          {"cw_c", a.cw_c},
          {"cw_lr", a.cw_lr},
          {"query_budget", a.query_budget},
          {"bound_lo", a.bound_lo},
          {"bound_hi", a.bound_hi},
          {"pgd_random_start", a.pgd_random_start},
          {"zoo_h", a.zoo_h},
          {"zoo_coords", a.zoo_coords},
          {"square_p_init", a.square_p_init},
          {"epsilon_unit_scale", a.epsilon_unit_scale}};
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  check_keys(j, "",
             {"seed", "threads", "out_dir", "dataset", "model", "train", "attacks", "kfold",
              "sweep", "temperatures"});
  ExperimentConfig c;
  get_to(j, "seed", c.seed);
  get_to(j, "threads", c.threads);
  get_to(j, "out_dir", c.out_dir);
  if (j.contains("dataset")) c.dataset = parse_dataset(j.at("dataset"));
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("train")) c.train = parse_train(j.at("train"));
  if (j.contains("attacks")) {
    const json& arr = j.at("attacks");
    if (!arr.is_array())
      throw std::invalid_argument("config value at 'attacks' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.attacks.push_back(parse_attack(arr[i], "attacks[" + std::to_string(i) + "]"));
  }
  get_to(j, "kfold", c.kfold);
  get_to(j, "sweep", c.sweep);
  get_to(j, "temperatures", c.temperatures);
  return c;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out_dir"] = cfg.out_dir;
  j["dataset"] = dataset_json(cfg.dataset);
  j["model"] = model_json(cfg.model);
  j["train"] = train_json(cfg.train);
  ordered_json attacks = ordered_json::array();
  for (const AttackConfig& a : cfg.attacks) attacks.push_back(attack_json(a));
  j["attacks"] = std::move(attacks);
  j["kfold"] = cfg.kfold;
  j["sweep"] = cfg.sweep;
  j["temperatures"] = cfg.temperatures;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  ExperimentConfig cfg = parse_config(buf.str());
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (threads < 1) throw std::invalid_argument("threads must be at least 1");
  if (kfold < 2) throw std::invalid_argument("kfold must be at least 2");
  if (dataset.classes.empty()) throw std::invalid_argument("class subset must be non-empty");
  if (dataset.downsample != 1 && dataset.downsample != 2 && dataset.downsample != 4)
    throw std::invalid_argument("downsample factor must be 1, 2, or 4");
  if (dataset.cap < 0) throw std::invalid_argument("sample cap must be non-negative");
  if (dataset.kind == "cifar10_binary") {
    if (dataset.path.empty()) throw std::invalid_argument("cifar dataset needs a path");
    if (!fs::exists(dataset.path))
      throw std::invalid_argument("dataset file does not exist: " + dataset.path);
  } else if (dataset.kind == "synthetic_gaussians" ||
             dataset.kind == "synthetic_checkerboard") {
    if (dataset.samples < 2)
      throw std::invalid_argument("synthetic dataset needs at least two samples");
    if (!(dataset.separation > 0.0))
      throw std::invalid_argument("cluster separation must be positive");
    if (dataset.kind == "synthetic_checkerboard" && dataset.classes.size() != 2)
      throw std::invalid_argument("checkerboard dataset is two-class");
  } else {
    throw std::invalid_argument("unknown dataset kind: " + dataset.kind);
  }
  if (model.preset != "mlp_small" && model.preset != "conv_small")
    throw std::invalid_argument("unknown model preset: " + model.preset);
  if (model.hidden < 1) throw std::invalid_argument("hidden width must be at least 1");
  train.validate();
  for (const AttackConfig& a : attacks) a.validate();
}

Dataset build_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.kind == "cifar10_binary") {
    std::vector<DatasetRecord> raw = load_cifar10_binary(spec.path, spec.classes, spec.cap);
    return preprocess_cifar(raw, spec.classes, spec.downsample);
  }
  if (spec.kind == "synthetic_gaussians")
    return synthesize_dataset(SyntheticKind::Gaussians, spec.samples, seed, spec.separation,
                              int(spec.classes.size()));
  if (spec.kind == "synthetic_checkerboard")
    return synthesize_dataset(SyntheticKind::Checkerboard, spec.samples, seed);
  throw std::invalid_argument("unknown dataset kind: " + spec.kind);
}

std::vector<LayerSpec> build_layers(const ModelSpec& spec, int classes) {
  std::vector<LayerSpec> layers;
  if (spec.preset == "conv_small")
    layers = preset_conv_small(classes);
  else if (spec.preset == "mlp_small")
    layers = preset_mlp_small(spec.hidden, classes);
  else
    throw std::invalid_argument("unknown model preset: " + spec.preset);
  if (spec.weight_quantizer.kind != QuantKind::Identity)
    apply_weight_quantizer(layers, spec.weight_quantizer);
  if (spec.activation_quantizer.kind != QuantKind::Identity)
    apply_activation_quantizer(layers, spec.activation_quantizer);
  for (const LayerQuantOverride& ov : spec.overrides) {
    if (ov.layer < 0 || ov.layer >= int(layers.size()))
      throw std::out_of_range("quantizer override layer index out of range");
    if (ov.has_weight) layers[std::size_t(ov.layer)].weight_quantizer = ov.weight_quantizer;
    if (ov.has_activation)
      layers[std::size_t(ov.layer)].activation_quantizer = ov.activation_quantizer;
  }
  return layers;
}

Model build_model(const ModelSpec& spec, const Dataset& data, std::uint64_t seed) {
  std::vector<LayerSpec> layers = build_layers(spec, data.classes);
  if (spec.preset == "mlp_small" && data.shape.size() > 1) {
    LayerSpec flat;
    flat.kind = LayerKind::Flatten;
    layers.insert(layers.begin(), flat); // dense stacks need flat features
  }
  return Model(data.shape, data.classes, std::move(layers), seed);
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << text;
  if (!os) throw std::runtime_error("failed writing output file: " + path);
}

std::string default_model_path(const ExperimentConfig& cfg) {
  return cfg.out_dir + "/model.ckpt";
}

int cmd_train(const ExperimentConfig& cfg) {
  Dataset data = build_dataset(cfg.dataset, cfg.seed);
  Model model = build_model(cfg.model, data, cfg.seed);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  TrainHistory hist = train(model, data, tc);
  fs::create_directories(cfg.out_dir);
  std::string rows = history_csv_header() + "\n";
  for (std::size_t e = 0; e < hist.epochs.size(); ++e)
    rows += history_csv_row(int(e), hist.epochs[e]) + "\n";
  write_text(cfg.out_dir + "/history.csv", rows);
  model.save(default_model_path(cfg));
  const EpochStats& last = hist.epochs.back();
  std::printf("epochs %zu  final loss %.6f  train acc %.4f\n", hist.epochs.size(), last.loss,
              last.train_acc);
  std::printf("checkpoint: %s\n", default_model_path(cfg).c_str());
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& model_path) {
  Dataset data = build_dataset(cfg.dataset, cfg.seed);
  Model model = Model::load(model_path.empty() ? default_model_path(cfg) : model_path);
  std::printf("clean accuracy %.4f\n", evaluate_clean(model, data));
  return 0;
}

int cmd_attack(const ExperimentConfig& cfg, const std::string& model_path) {
  if (cfg.attacks.empty()) throw std::invalid_argument("config lists no attacks");
  Dataset data = build_dataset(cfg.dataset, cfg.seed);
  Model model = Model::load(model_path.empty() ? default_model_path(cfg) : model_path);
  fs::create_directories(cfg.out_dir);
  for (std::size_t i = 0; i < cfg.attacks.size(); ++i) {
    AttackConfig att = cfg.attacks[i];
    att.seed = cfg.seed;
    AttackEvaluation ev = evaluate_under_attack(model, data, att, cfg.threads);
    const std::string stem =
        cfg.out_dir + "/adv_" + std::to_string(i) + "_" + attack_kind_name(att.kind);
    save_adversarial_batch(ev.batch, stem + ".bin", stem + ".csv");
    std::printf("%s epsilon %g accuracy %.4f -> %s.{bin,csv}\n",
                attack_kind_name(att.kind).c_str(), att.epsilon, ev.accuracy, stem.c_str());
  }
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& model_path) {
  Dataset data = build_dataset(cfg.dataset, cfg.seed);
  Model model = Model::load(model_path.empty() ? default_model_path(cfg) : model_path);
  AttackConfig base = cfg.attacks.empty() ? preset_fgsm() : cfg.attacks.front();
  base.seed = cfg.seed;
  const std::vector<double> eps = cfg.sweep.empty() ? preset_fgsm_sweep() : cfg.sweep;
  ExperimentReport report =
      epsilon_sweep(model, data, base.kind, eps, base, cfg.model.preset, cfg.threads);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/sweep.csv", report.csv());
  std::fputs(report.summary().c_str(), stdout);
  return 0;
}

int cmd_kfold(const ExperimentConfig& cfg) {
  Dataset data = build_dataset(cfg.dataset, cfg.seed);
  ModelBuilder builder = [&cfg, &data](std::uint64_t seed) {
    return build_model(cfg.model, data, seed);
  };
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  ExperimentReport report =
      kfold_robustness(builder, data, tc, cfg.attacks, cfg.kfold, cfg.model.preset, cfg.threads);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/kfold.csv", report.csv());
  write_text(cfg.out_dir + "/kfold_summary.txt", report.summary());
  std::fputs(report.summary().c_str(), stdout);
  return 0;
}

int cmd_distill(const ExperimentConfig& cfg) {
  Dataset data = build_dataset(cfg.dataset, cfg.seed);
  ModelBuilder builder = [&cfg, &data](std::uint64_t seed) {
    return build_model(cfg.model, data, seed);
  };
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  ExperimentReport report = distillation_compare(builder, data, tc, cfg.attacks, cfg.kfold,
                                                 cfg.temperatures, cfg.threads);
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/distill.csv", report.csv());
  write_text(cfg.out_dir + "/distill_summary.txt", report.summary());
  std::fputs(report.summary().c_str(), stdout);
  return 0;
}

int cmd_footprint(const ExperimentConfig& cfg) {
  // only the input geometry matters, so skip loading actual records
  std::vector<int> shape;
  int classes = 0;
  if (cfg.dataset.kind == "cifar10_binary") {
    const int side = 32 / cfg.dataset.downsample;
    shape = {side, side, 1};
    classes = int(cfg.dataset.classes.size());
  } else {
    shape = {2};
    classes = cfg.dataset.kind == "synthetic_checkerboard" ? 2
                                                           : int(cfg.dataset.classes.size());
  }
  Dataset probe;
  probe.shape = shape;
  probe.classes = std::max(classes, 2);
  Model model = build_model(cfg.model, probe, cfg.seed);
  std::printf("%zu bytes\n", model.flash_footprint());
  return 0;
}

bool selftest_check(const char* name, bool ok) {
  std::printf("%s %s\n", ok ? "ok" : "FAIL", name);
  return ok;
}

int cmd_selftest() {
  bool all = true;

  {
    FoldPlan plan = kfold_split(103, 5, 11);
    std::vector<int> hits(103, 0);
    bool ok = plan.K == 5;
    for (int f = 0; f < 5 && ok; ++f) {
      for (long i : plan.val_idx[std::size_t(f)]) ++hits[std::size_t(i)];
      std::vector<int> seen(103, 0);
      for (long i : plan.train_idx[std::size_t(f)]) ++seen[std::size_t(i)];
      for (long i : plan.val_idx[std::size_t(f)])
        if (seen[std::size_t(i)] != 0) ok = false;
      if (plan.train_idx[std::size_t(f)].size() + plan.val_idx[std::size_t(f)].size() != 103)
        ok = false;
    }
    for (int h : hits)
      if (h != 1) ok = false;
    all &= selftest_check("kfold partition", ok);
  }

  {
    const double hi = cosine_lr(0, 100, 1e-4, 1e-2);
    const double lo = cosine_lr(100, 100, 1e-4, 1e-2);
    all &= selftest_check("cosine lr endpoints", hi == 1e-2 && lo == 1e-4);
  }

  {
    RngStream rng(3);
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
      Tensor z({1, 10});
      for (int j = 0; j < 10; ++j) z[j] = rng.uniform(-5.0, 5.0);
      Tensor p1 = softmax_with_temperature(z, 1.0);
      Tensor p50 = softmax_with_temperature(z, 50.0);
      if (argmax_row(p1, 0) != argmax_row(p50, 0)) ok = false;
      double h1 = 0.0, h50 = 0.0;
      for (int j = 0; j < 10; ++j) {
        h1 -= p1[j] * std::log(p1[j]);
        h50 -= p50[j] * std::log(p50[j]);
      }
      if (!(h50 >= h1)) ok = false;
    }
    all &= selftest_check("temperature softmax", ok);
  }

  {
    QuantizerSpec tern;
    tern.kind = QuantKind::Ternary;
    QuantizerSpec bin;
    bin.kind = QuantKind::Binary;
    RngStream rng(5);
    Tensor x({64});
    for (int i = 0; i < 64; ++i) x[i] = rng.uniform(-3.0, 3.0);
    Tensor qt = quantize_forward(tern, x, 0, nullptr, nullptr);
    Tensor qb = quantize_forward(bin, x, 0, nullptr, nullptr);
    Tensor qtt = quantize_forward(tern, qt, 0, nullptr, nullptr);
    bool ok = true;
    double mt = 0.0;
    for (int i = 0; i < 64; ++i) mt = std::max(mt, std::fabs(qt[i]));
    for (int i = 0; i < 64; ++i) {
      if (qt[i] != 0.0 && std::fabs(std::fabs(qt[i]) - mt) > 1e-12) ok = false;
      if (std::fabs(qb[i]) != std::fabs(qb[0])) ok = false;
      if (qtt[i] != qt[i]) ok = false;
    }
    all &= selftest_check("quantizer codomain and idempotence", ok);
  }

  {
    Tape t;
    RngStream rng(9);
    Tensor x({1, 4}), w({4, 3}), target({1, 3});
    for (int i = 0; i < 4; ++i) x[i] = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 12; ++i) w[i] = rng.uniform(-1.0, 1.0);
    target[1] = 1.0;
    NodeId wi = t.input(w);
    NodeId loss = t.softmax_ce(t.matmul(t.constant(x), wi), target, 1.0);
    Tensor g = t.grad(loss, {wi})[0];
    bool ok = true;
    const double h = 1e-6;
    for (int i = 0; i < 12 && ok; ++i) {
      auto eval = [&](double delta) {
        Tape s;
        Tensor wd = w;
        wd[i] += delta;
        return s.value(s.softmax_ce(s.matmul(s.constant(x), s.input(wd)), target, 1.0))[0];
      };
      const double fd = (eval(h) - eval(-h)) / (2.0 * h);
      if (std::fabs(fd - g[i]) > 1e-6 * std::max(1.0, std::fabs(fd))) ok = false;
    }
    all &= selftest_check("autodiff vs finite differences", ok);
  }

  {
    Dataset data = synthesize_dataset(SyntheticKind::Gaussians, 40, 21);
    Model model(data.shape, data.classes, preset_mlp_small(8, data.classes), 21);
    std::vector<int> labels;
    for (const DatasetRecord& r : data.records) labels.push_back(r.label);
    Tensor x = data.full_batch().first;
    AttackConfig cfg = preset_fgsm();
    cfg.epsilon_unit_scale = false;
    cfg.epsilon = 0.25;
    cfg.bound_lo = -20.0;
    cfg.bound_hi = 20.0;
    AdversarialBatch a = fgsm(model, x, labels, cfg);
    AdversarialBatch b = fgsm(model, x, labels, cfg);
    bool ok = true;
    for (std::int64_t i = 0; i < a.x_adv.size(); ++i)
      if (a.x_adv[i] != b.x_adv[i]) ok = false;
    for (std::size_t i = 0; i < a.results.size(); ++i) {
      if (a.results[i].success != b.results[i].success) ok = false;
      if (a.results[i].norm > cfg.epsilon + 1e-12) ok = false;
    }
    all &= selftest_check("attack determinism and containment", ok);
  }

  return all ? 0 : 2;
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"train tiny quantized nets, measure Jacobians, attack the result"};
  app.require_subcommand(1);

  std::string config_path, out_dir, model_path;
  std::uint64_t seed_val = 0;
  int threads_val = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    CLI::Option* c = sub->add_option("--config", config_path, "experiment JSON file");
    if (needs_config) c->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed_val, "seed (overrides config)");
    sub->add_option("--threads", threads_val, "worker threads (overrides config)");
  };

  CLI::App* s_train = app.add_subcommand("train", "train a model from the config");
  CLI::App* s_eval = app.add_subcommand("evaluate", "clean accuracy of a saved model");
  CLI::App* s_attack = app.add_subcommand("attack", "attack a saved model, write batches");
  CLI::App* s_sweep = app.add_subcommand("sweep", "accuracy across an epsilon list");
  CLI::App* s_kfold = app.add_subcommand("kfold", "cross-validated robustness table");
  CLI::App* s_distill = app.add_subcommand("distill", "robustness per training temperature");
  CLI::App* s_foot = app.add_subcommand("footprint", "flash bytes of the configured model");
  CLI::App* s_self = app.add_subcommand("selftest", "run the built-in invariant checks");
  for (CLI::App* sub : {s_train, s_eval, s_attack, s_sweep, s_kfold, s_distill, s_foot})
    add_common(sub, true);
  for (CLI::App* sub : {s_eval, s_attack, s_sweep})
    sub->add_option("--model", model_path, "checkpoint path (default <out>/model.ckpt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (s_self->parsed()) return cmd_selftest();

  CLI::App* sub = app.get_subcommands().front();
  ExperimentConfig cfg;
  try {
    cfg = load_config_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (sub->count("--seed") > 0) cfg.seed = seed_val;
    if (sub->count("--threads") > 0) cfg.threads = threads_val;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (s_train->parsed()) return cmd_train(cfg);
    if (s_eval->parsed()) return cmd_evaluate(cfg, model_path);
    if (s_attack->parsed()) return cmd_attack(cfg, model_path);
    if (s_sweep->parsed()) return cmd_sweep(cfg, model_path);
    if (s_kfold->parsed()) return cmd_kfold(cfg);
    if (s_distill->parsed()) return cmd_distill(cfg);
    if (s_foot->parsed()) return cmd_footprint(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace tqr
