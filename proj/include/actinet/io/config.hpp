#pragma once

// Single declarative run configuration (JSON). Unknown keys are errors at
// every nesting level, so a typo never silently falls back to a default.
// Also houses the spec <-> JSON conversions reused by the checkpoint's
// architecture echo.

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "actinet/core/types.hpp"
#include "actinet/io/common.hpp"
#include "actinet/models/dataset.hpp"
#include "actinet/models/specs.hpp"
#include "actinet/synth/generator.hpp"

namespace actinet::io {

using nlohmann::json;

// Wraps a JSON object; get() marks keys as consumed and done() rejects
// leftovers by name.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw std::runtime_error("config: '" + path_ + "' must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& child(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!j_.contains(key)) return fallback;
    seen_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::runtime_error("config: bad value for '" + path_ + "." + key + "'");
    }
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw std::runtime_error("config: unknown key '" + path_ + "." + it.key() + "'");
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Spec conversions ------------------------------------------------------------

inline json stages_to_json(const std::vector<ConvStage>& stages) {
  json a = json::array();
  for (const ConvStage& s : stages)
    a.push_back({{"filters", s.filters},
                 {"kernel_width", s.kernel_width},
                 {"pool_width", s.pool_width}});
  return a;
}

inline std::vector<ConvStage> stages_from_json(const json& a, const std::string& path) {
  if (!a.is_array()) throw std::runtime_error("config: '" + path + "' must be an array");
  std::vector<ConvStage> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    StrictObject o(a[i], path + "[" + std::to_string(i) + "]");
    ConvStage s;
    s.filters = o.get<int>("filters", 0);
    s.kernel_width = o.get<int>("kernel_width", 0);
    s.pool_width = o.get<int>("pool_width", 1);
    o.done();
    out.push_back(s);
  }
  return out;
}

inline json spec_to_json(const SequentialCnnSpec& s) {
  return {{"input_length", s.input_length},
          {"stages", stages_to_json(s.stages)},
          {"dense", s.dense},
          {"classes", s.classes}};
}

inline SequentialCnnSpec seq_spec_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  SequentialCnnSpec s;
  s.input_length = o.get<int>("input_length", s.input_length);
  if (o.has("stages")) s.stages = stages_from_json(o.child("stages"), path + ".stages");
  s.dense = o.get<std::vector<int>>("dense", s.dense);
  s.classes = o.get<int>("classes", s.classes);
  o.done();
  return s;
}

inline json spec_to_json(const MultiTaskCnnSpec& s) {
  return {{"input_length", s.input_length},
          {"trunk", stages_to_json(s.trunk)},
          {"aux_dense", s.aux_dense},
          {"aux_classes", s.aux_classes},
          {"main_convs", stages_to_json(s.main_convs)},
          {"main_dense_pre_concat", s.main_dense_pre_concat},
          {"main_dense_post_concat", s.main_dense_post_concat},
          {"classes", s.classes},
          {"aux_loss_weight", s.aux_loss_weight},
          {"main_loss_weight", s.main_loss_weight}};
}

inline MultiTaskCnnSpec mtl_spec_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  MultiTaskCnnSpec s;
  s.input_length = o.get<int>("input_length", s.input_length);
  if (o.has("trunk")) s.trunk = stages_from_json(o.child("trunk"), path + ".trunk");
  s.aux_dense = o.get<std::vector<int>>("aux_dense", s.aux_dense);
  s.aux_classes = o.get<int>("aux_classes", s.aux_classes);
  if (o.has("main_convs"))
    s.main_convs = stages_from_json(o.child("main_convs"), path + ".main_convs");
  s.main_dense_pre_concat =
      o.get<std::vector<int>>("main_dense_pre_concat", s.main_dense_pre_concat);
  s.main_dense_post_concat =
      o.get<std::vector<int>>("main_dense_post_concat", s.main_dense_post_concat);
  s.classes = o.get<int>("classes", s.classes);
  s.aux_loss_weight = o.get<double>("aux_loss_weight", s.aux_loss_weight);
  s.main_loss_weight = o.get<double>("main_loss_weight", s.main_loss_weight);
  o.done();
  return s;
}

inline json spec_to_json(const MlpBaselineSpec& s) {
  return {{"input_features", s.input_features},
          {"hidden", s.hidden},
          {"classes", s.classes},
          {"batchnorm", s.batchnorm},
          {"dropout_keep", s.dropout_keep}};
}

inline MlpBaselineSpec mlp_spec_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  MlpBaselineSpec s;
  s.input_features = o.get<int>("input_features", s.input_features);
  s.hidden = o.get<std::vector<int>>("hidden", s.hidden);
  s.classes = o.get<int>("classes", s.classes);
  s.batchnorm = o.get<bool>("batchnorm", s.batchnorm);
  s.dropout_keep = o.get<double>("dropout_keep", s.dropout_keep);
  o.done();
  return s;
}

// Run configuration -----------------------------------------------------------

struct PatientConfig {
  PatientProfile profile;
  std::optional<AttackSchedule> schedule;
  // Attack days expand to concrete spans via make_nocturnal_schedule when the
  // config gives days but no explicit ranges.
  bool auto_ranges = false;
  double attack_start_hour_lo = 1.0;
  double attack_start_hour_hi = 4.0;
  int attack_duration_lo = 60;
  int attack_duration_hi = 180;
};

struct GeneratorConfig {
  int num_days = 20;
  int patient_count = 3;  // used when no explicit per-patient list is given
  DaytimeConfig daytime;
  PatientProfile default_profile;
  std::vector<PatientConfig> patients;  // optional explicit list
};

struct ClusterConfig {
  int downsample = 10;
  int k = 2;
  std::string labels = "attack";     // attack | patient
  std::string encoding = "states";   // states | activity
  double smoothing_half_width = 2;   // used only for activity encoding
};

struct RunConfig {
  std::uint64_t seed = 1;
  GeneratorConfig generator;
  std::string model = "seq-cnn";
  TrainConfig train;
  SamplingConfig sampling;
  SequentialCnnSpec seq_cnn;
  MultiTaskCnnSpec mtl_cnn;
  MlpBaselineSpec mlp;
  ClusterConfig cluster;
};

inline PatientProfile profile_from_json(const json& j, const std::string& path,
                                        const PatientProfile& base = {}) {
  StrictObject o(j, path);
  PatientProfile p = base;
  p.wake_mean = o.get<double>("wake_mean", p.wake_mean);
  p.wake_std = o.get<double>("wake_std", p.wake_std);
  p.sleep_mean = o.get<double>("sleep_mean", p.sleep_mean);
  p.sleep_std = o.get<double>("sleep_std", p.sleep_std);
  p.restlessness = o.get<double>("restlessness", p.restlessness);
  if (o.has("falling_duration_range")) {
    const auto v = o.child("falling_duration_range").get<std::vector<int>>();
    if (v.size() != 2)
      throw std::runtime_error("config: '" + path + ".falling_duration_range' needs [lo, hi]");
    p.falling_duration_range = {v[0], v[1]};
  }
  p.siesta_probability_per_day =
      o.get<double>("siesta_probability_per_day", p.siesta_probability_per_day);
  if (o.has("siesta_duration_range")) {
    const auto v = o.child("siesta_duration_range").get<std::vector<int>>();
    if (v.size() != 2)
      throw std::runtime_error("config: '" + path + ".siesta_duration_range' needs [lo, hi]");
    p.siesta_duration_range = {v[0], v[1]};
  }
  p.bed_time = o.get<double>("bed_time", p.bed_time);
  p.rise_time = o.get<double>("rise_time", p.rise_time);
  p.bed_jitter = o.get<double>("bed_jitter", p.bed_jitter);
  p.rise_jitter = o.get<double>("rise_jitter", p.rise_jitter);
  p.siesta_level = o.get<double>("siesta_level", p.siesta_level);
  o.done();
  return p;
}

inline PatientConfig patient_from_json(const json& j, const std::string& path,
                                       const PatientProfile& base) {
  StrictObject o(j, path);
  PatientConfig pc;
  pc.profile = o.has("profile")
                   ? profile_from_json(o.child("profile"), path + ".profile", base)
                   : base;
  if (o.has("schedule")) {
    StrictObject so(o.child("schedule"), path + ".schedule");
    AttackSchedule sched;
    for (int d : so.get<std::vector<int>>("attack_days", {}))
      sched.attack_days.insert(d);
    sched.nocturnal_fragmentation = so.get<double>("nocturnal_fragmentation", 0.0);
    if (so.has("ranges")) {
      for (const auto& r : so.child("ranges").get<std::vector<std::vector<int>>>()) {
        if (r.size() != 2)
          throw std::runtime_error("config: '" + path + ".schedule.ranges' needs [start, end] pairs");
        sched.attack_epoch_ranges.push_back({r[0], r[1]});
      }
    } else {
      pc.auto_ranges = true;
      pc.attack_start_hour_lo = so.get<double>("attack_start_hour_lo", pc.attack_start_hour_lo);
      pc.attack_start_hour_hi = so.get<double>("attack_start_hour_hi", pc.attack_start_hour_hi);
      pc.attack_duration_lo = so.get<int>("attack_duration_lo", pc.attack_duration_lo);
      pc.attack_duration_hi = so.get<int>("attack_duration_hi", pc.attack_duration_hi);
    }
    so.done();
    pc.schedule = std::move(sched);
  }
  o.done();
  return pc;
}

inline GeneratorConfig generator_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  GeneratorConfig g;
  g.num_days = o.get<int>("num_days", g.num_days);
  g.patient_count = o.get<int>("patient_count", g.patient_count);
  if (o.has("daytime")) {
    StrictObject d(o.child("daytime"), path + ".daytime");
    g.daytime.day_start = d.get<double>("day_start", g.daytime.day_start);
    g.daytime.day_end = d.get<double>("day_end", g.daytime.day_end);
    d.done();
  }
  if (o.has("profile"))
    g.default_profile = profile_from_json(o.child("profile"), path + ".profile");
  if (o.has("patients")) {
    const json& arr = o.child("patients");
    if (!arr.is_array())
      throw std::runtime_error("config: '" + path + ".patients' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      g.patients.push_back(patient_from_json(
          arr[i], path + ".patients[" + std::to_string(i) + "]", g.default_profile));
  }
  o.done();
  return g;
}

inline TrainConfig train_from_json(StrictObject& o) {
  TrainConfig t;
  t.batch_size = o.get<int>("batch_size", t.batch_size);
  t.momentum = o.get<double>("momentum", t.momentum);
  t.learning_rate = o.get<double>("learning_rate", t.learning_rate);
  t.lr_decay_every = o.get<int>("lr_decay_every", t.lr_decay_every);
  t.lr_decay = o.get<double>("lr_decay", t.lr_decay);
  t.epochs = o.get<int>("epochs", t.epochs);
  return t;
}

inline SamplingConfig sampling_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  SamplingConfig s;
  s.train_fraction = o.get<double>("train_fraction", s.train_fraction);
  s.common_stride = o.get<int>("common_stride", s.common_stride);
  s.rare_stride = o.get<int>("rare_stride", s.rare_stride);
  s.eval_stride = o.get<int>("eval_stride", s.eval_stride);
  o.done();
  return s;
}

inline ClusterConfig cluster_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  ClusterConfig c;
  c.downsample = o.get<int>("downsample", c.downsample);
  c.k = o.get<int>("k", c.k);
  c.labels = o.get<std::string>("labels", c.labels);
  c.encoding = o.get<std::string>("encoding", c.encoding);
  c.smoothing_half_width = o.get<double>("smoothing_half_width", c.smoothing_half_width);
  if (c.labels != "attack" && c.labels != "patient")
    throw std::runtime_error("config: cluster.labels must be 'attack' or 'patient'");
  if (c.encoding != "states" && c.encoding != "activity")
    throw std::runtime_error("config: cluster.encoding must be 'states' or 'activity'");
  o.done();
  return c;
}

inline RunConfig parse_run_config(const json& j) {
  StrictObject o(j, "");
  RunConfig cfg;
  cfg.seed = o.get<std::uint64_t>("seed", cfg.seed);
  if (o.has("generator")) cfg.generator = generator_from_json(o.child("generator"), "generator");
  if (o.has("train")) {
    StrictObject t(o.child("train"), "train");
    cfg.model = t.get<std::string>("model", cfg.model);
    cfg.train = train_from_json(t);
    if (t.has("sampling"))
      cfg.sampling = sampling_from_json(t.child("sampling"), "train.sampling");
    if (t.has("seq_cnn"))
      cfg.seq_cnn = seq_spec_from_json(t.child("seq_cnn"), "train.seq_cnn");
    if (t.has("mtl_cnn"))
      cfg.mtl_cnn = mtl_spec_from_json(t.child("mtl_cnn"), "train.mtl_cnn");
    if (t.has("mlp")) cfg.mlp = mlp_spec_from_json(t.child("mlp"), "train.mlp");
    t.done();
  }
  if (o.has("cluster")) cfg.cluster = cluster_from_json(o.child("cluster"), "cluster");
  o.done();
  cfg.train.seed = cfg.seed;
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config '" + path + "': " + e.what());
  }
  return parse_run_config(j);
}

// Expands the generator section into concrete per-patient profiles and
// schedules aligned by index (empty schedule list when no patient has one).
inline std::pair<std::vector<PatientProfile>, std::vector<AttackSchedule>>
expand_generator_config(const GeneratorConfig& g, std::uint64_t seed) {
  std::vector<PatientConfig> patients = g.patients;
  if (patients.empty())
    patients.resize(std::max(1, g.patient_count), PatientConfig{g.default_profile, {}, false});
  std::vector<PatientProfile> profiles;
  std::vector<AttackSchedule> schedules;
  bool any_schedule = false;
  for (std::size_t i = 0; i < patients.size(); ++i) {
    profiles.push_back(patients[i].profile);
    AttackSchedule sched;
    if (patients[i].schedule) {
      any_schedule = true;
      sched = *patients[i].schedule;
      if (patients[i].auto_ranges)
        sched = make_nocturnal_schedule(
            g.num_days, sched.attack_days, sched.nocturnal_fragmentation,
            derive_seed(seed, 0xa77ac4 + i), patients[i].attack_start_hour_lo,
            patients[i].attack_start_hour_hi, patients[i].attack_duration_lo,
            patients[i].attack_duration_hi);
    }
    schedules.push_back(std::move(sched));
  }
  if (!any_schedule) schedules.clear();
  return {std::move(profiles), std::move(schedules)};
}

}  // namespace actinet::io
