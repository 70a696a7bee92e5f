// Command-line surface for the pipeline: generate synthetic cohorts, train
// and evaluate the classifiers, predict state sequences, cluster day
// patterns, and run the gradient checker. All randomness flows from --seed
// (or the config seed), so every artifact-producing command is deterministic.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "actinet/actinet.hpp"
#include "actinet/io/checkpoint.hpp"
#include "actinet/io/common.hpp"
#include "actinet/io/config.hpp"
#include "actinet/io/report.hpp"
#include "actinet/io/series_csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace actinet;

namespace {

io::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return io::RunConfig{};
  return io::load_run_config(path);
}

// --data accepts series files and/or directories of *.csv files.
std::vector<LabeledSeries> load_data(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".csv")
          found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      if (found.empty())
        throw std::runtime_error("no .csv series files in directory '" + in + "'");
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  std::vector<LabeledSeries> cohort;
  for (const std::string& f : files) {
    std::vector<LabeledSeries> part = io::load_series(f);
    for (LabeledSeries& s : part) {
      for (const LabeledSeries& seen : cohort)
        if (seen.patient_id == s.patient_id)
          throw std::runtime_error("patient '" + s.patient_id +
                                   "' appears in more than one input file");
      cohort.push_back(std::move(s));
    }
  }
  return cohort;
}

Graph build_graph_for(const std::string& model, const io::RunConfig& cfg) {
  const ModelKind kind = model_kind_from_name(model);
  switch (kind) {
    case ModelKind::SequentialCnn: return build_sequential_cnn(cfg.seq_cnn);
    case ModelKind::MultiTaskCnn: return build_multitask_cnn(cfg.mtl_cnn);
    case ModelKind::MlpBaseline: return build_mlp_baseline(cfg.mlp);
  }
  throw std::logic_error("unreachable");
}

json spec_json_for(const std::string& model, const io::RunConfig& cfg) {
  switch (model_kind_from_name(model)) {
    case ModelKind::SequentialCnn: return io::spec_to_json(cfg.seq_cnn);
    case ModelKind::MultiTaskCnn: return io::spec_to_json(cfg.mtl_cnn);
    case ModelKind::MlpBaseline: return io::spec_to_json(cfg.mlp);
  }
  throw std::logic_error("unreachable");
}

json preprocess_to_json(const Preprocess& p) {
  json j = {{"input_mean", p.input.mean}, {"input_std", p.input.std}};
  if (!p.features.empty()) {
    j["feature_mean"] = p.features.mean;
    j["feature_std"] = p.features.std;
  }
  return j;
}

Preprocess preprocess_from_json(const json& j) {
  Preprocess p;
  p.input.mean = j.at("input_mean").get<double>();
  p.input.std = j.at("input_std").get<double>();
  if (j.contains("feature_mean")) {
    p.features.mean = j.at("feature_mean").get<std::vector<double>>();
    p.features.std = j.at("feature_std").get<std::vector<double>>();
  }
  return p;
}

struct LoadedModel {
  Graph graph;
  ModelKind kind;
  Preprocess prep;
  SamplingConfig sampling;
  MultiTaskCnnSpec mtl_spec;  // for head weights when kind == MultiTaskCnn
};

LoadedModel load_model(const std::string& ckpt_path) {
  const io::LoadedCheckpoint ck = io::load_checkpoint(ckpt_path);
  const std::string model = ck.meta.at("model").get<std::string>();
  LoadedModel m{Graph{}, model_kind_from_name(model), {}, {}, {}};
  io::RunConfig cfg;
  switch (m.kind) {
    case ModelKind::SequentialCnn:
      cfg.seq_cnn = io::seq_spec_from_json(ck.meta.at("spec"), "checkpoint.spec");
      break;
    case ModelKind::MultiTaskCnn:
      cfg.mtl_cnn = io::mtl_spec_from_json(ck.meta.at("spec"), "checkpoint.spec");
      m.mtl_spec = cfg.mtl_cnn;
      break;
    case ModelKind::MlpBaseline:
      cfg.mlp = io::mlp_spec_from_json(ck.meta.at("spec"), "checkpoint.spec");
      break;
  }
  m.graph = build_graph_for(model, cfg);
  ck.restore_into(m.graph);
  m.prep = preprocess_from_json(ck.meta.at("preprocess"));
  if (ck.meta.contains("sampling")) {
    m.sampling = io::sampling_from_json(ck.meta.at("sampling"), "checkpoint.sampling");
  }
  return m;
}

// Requested-vs-stored architecture guard for commands that take --model.
void check_model_match(const std::string& requested, const std::string& ckpt_path) {
  const io::LoadedCheckpoint ck = io::load_checkpoint(ckpt_path);
  const std::string stored = ck.meta.at("model").get<std::string>();
  if (requested != stored)
    throw std::runtime_error("checkpoint '" + ckpt_path + "' holds a " + stored +
                             " model, but " + requested + " was requested");
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed, bool seed_given) {
  io::RunConfig cfg = load_config_or_default(config_path);
  if (seed_given) cfg.seed = seed;
  auto [profiles, schedules] = io::expand_generator_config(cfg.generator, cfg.seed);
  const std::vector<LabeledSeries> cohort = generate_cohort(
      profiles, schedules, cfg.generator.num_days, cfg.seed, cfg.generator.daytime);
  for (const LabeledSeries& s : cohort) {
    const std::string path = (fs::path(out_dir) / (s.patient_id + ".csv")).string();
    io::save_series(s, path);
    std::printf("wrote %s (%zu epochs, %d days)\n", path.c_str(), s.size(),
                static_cast<int>(s.size()) / kEpochsPerDay);
  }
  return 0;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& data,
              const std::string& model, const std::string& out,
              std::uint64_t seed, bool seed_given) {
  io::RunConfig cfg = load_config_or_default(config_path);
  if (seed_given) cfg.seed = seed;
  if (!model.empty()) cfg.model = model;
  cfg.train.seed = cfg.seed;

  const std::vector<LabeledSeries> cohort = load_data(data);
  const SplitRefs split = build_split_refs(cohort, cfg.sampling);
  std::printf("dataset: %zu train / %zu test windows from %zu patients\n",
              split.train.size(), split.test.size(), cohort.size());

  const ModelKind kind = model_kind_from_name(cfg.model);
  Preprocess prep;
  prep.input = fit_input_scaler(split.train);
  if (kind == ModelKind::MlpBaseline) prep.features = fit_feature_scaler(split.train);

  Graph g = build_graph_for(cfg.model, cfg);
  g.init_params(derive_seed(cfg.seed, 0x1217));
  std::printf("model %s: %zu parameters\n", cfg.model.c_str(), g.param_count());

  HeadWeights weights;
  if (kind == ModelKind::MultiTaskCnn) {
    weights.aux = cfg.mtl_cnn.aux_loss_weight;
    weights.main = cfg.mtl_cnn.main_loss_weight;
  }
  const TrainResult res =
      train_model(g, kind, split.train, split.test, prep, cfg.train, weights);
  for (const EpochPoint& p : res.curve.points)
    std::printf("epoch %3d  loss %.4f  train_acc %.4f  test_acc %.4f  (%.1fs)\n",
                p.epoch, p.loss, p.train_accuracy, p.test_accuracy, p.seconds);
  std::printf("best epoch %d, test accuracy %.4f\n", res.best_epoch,
              res.best_test_accuracy);

  const ConfusionMatrix cm = evaluate_model(g, kind, split.test, prep);
  json meta = {{"model", cfg.model},
               {"spec", spec_json_for(cfg.model, cfg)},
               {"train_config",
                {{"batch_size", cfg.train.batch_size},
                 {"momentum", cfg.train.momentum},
                 {"learning_rate", cfg.train.learning_rate},
                 {"lr_decay_every", cfg.train.lr_decay_every},
                 {"lr_decay", cfg.train.lr_decay},
                 {"epochs", cfg.train.epochs},
                 {"seed", cfg.seed}}},
               {"sampling",
                {{"train_fraction", cfg.sampling.train_fraction},
                 {"common_stride", cfg.sampling.common_stride},
                 {"rare_stride", cfg.sampling.rare_stride},
                 {"eval_stride", cfg.sampling.eval_stride}}},
               {"preprocess", preprocess_to_json(prep)},
               {"final",
                {{"best_epoch", res.best_epoch},
                 {"test_accuracy", res.best_test_accuracy},
                 {"optimizer_steps", res.optimizer_steps}}}};
  io::save_checkpoint(g, meta, out);
  io::atomic_write_file(out + ".metrics.csv", io::metrics_to_csv(cm));
  io::atomic_write_file(out + ".convergence.csv", io::convergence_to_csv(res.curve));
  std::printf("wrote %s, %s.metrics.csv, %s.convergence.csv\n", out.c_str(),
              out.c_str(), out.c_str());
  return 0;
}

int cmd_evaluate(const std::string& ckpt, const std::vector<std::string>& data,
                 const std::string& matrix_csv, const std::string& report_path,
                 const std::string& metrics_csv, const std::string& pool) {
  ConfusionMatrix cm;
  std::string title;
  if (!matrix_csv.empty()) {
    cm = io::confusion_from_csv(io::read_file(matrix_csv));
    title = "Evaluation of fixture matrix " + matrix_csv;
  } else {
    if (ckpt.empty() || data.empty())
      throw std::runtime_error("evaluate needs --ckpt and --data (or --matrix)");
    LoadedModel m = load_model(ckpt);
    const std::vector<LabeledSeries> cohort = load_data(data);
    const SplitRefs split = build_split_refs(cohort, m.sampling);
    const std::vector<WindowRef>* refs = &split.test;
    std::vector<WindowRef> all;
    if (pool == "train") {
      refs = &split.train;
    } else if (pool == "all") {
      all = split.train;
      all.insert(all.end(), split.test.begin(), split.test.end());
      refs = &all;
    }
    cm = evaluate_model(m.graph, m.kind, *refs, m.prep);
    title = "Evaluation of " + ckpt + " on " + pool + " pool (" +
            std::to_string(refs->size()) + " windows)";
  }
  const std::string report = io::format_evaluation_report(cm, title);
  io::atomic_write_file(report_path, report);
  const std::string csv_path =
      metrics_csv.empty() ? report_path + ".metrics.csv" : metrics_csv;
  io::atomic_write_file(csv_path, io::metrics_to_csv(cm));
  io::atomic_write_file(report_path + ".confusion.csv", io::confusion_to_csv(cm));
  std::fputs(report.c_str(), stdout);
  std::printf("wrote %s, %s\n", report_path.c_str(), csv_path.c_str());
  return 0;
}

int cmd_predict(const std::string& ckpt, const std::string& data,
                const std::string& out) {
  LoadedModel m = load_model(ckpt);
  std::vector<LabeledSeries> cohort = io::load_series(data);
  for (LabeledSeries& s : cohort) {
    const std::vector<SleepState> pred = predict_series(m.graph, m.kind, s, m.prep);
    for (std::size_t i = 0; i < s.size(); ++i) s.epochs[i].state = pred[i];
  }
  io::save_series(cohort, out);
  std::printf("wrote %s (%zu series)\n", out.c_str(), cohort.size());
  return 0;
}

int cmd_cluster(const std::string& config_path, const std::vector<std::string>& data,
                const std::string& out_dir, const std::string& use_predictions,
                int k_override, int downsample_override) {
  io::RunConfig cfg = load_config_or_default(config_path);
  if (k_override > 0) cfg.cluster.k = k_override;
  if (downsample_override > 0) cfg.cluster.downsample = downsample_override;

  std::vector<LabeledSeries> cohort = load_data(data);
  if (!use_predictions.empty()) {
    LoadedModel m = load_model(use_predictions);
    for (LabeledSeries& s : cohort) {
      const std::vector<SleepState> pred = predict_series(m.graph, m.kind, s, m.prep);
      for (std::size_t i = 0; i < s.size(); ++i) s.epochs[i].state = pred[i];
    }
  }

  std::vector<DayVector> days;
  for (const LabeledSeries& s : cohort)
    for (DayVector& d : partition_days(s)) days.push_back(std::move(d));
  if (days.size() < 2) throw std::runtime_error("cluster: fewer than 2 whole days");

  DistanceMatrix dist;
  if (cfg.cluster.encoding == "activity") {
    std::vector<std::vector<double>> seqs;
    for (const LabeledSeries& s : cohort) {
      const LabeledSeries sm =
          smooth_series(s, static_cast<int>(cfg.cluster.smoothing_half_width));
      const std::size_t full = sm.size() / kEpochsPerDay;
      for (std::size_t d = 0; d < full; ++d) {
        std::vector<double> seq;
        for (int i = 0; i < kEpochsPerDay; i += cfg.cluster.downsample) {
          double sum = 0.0;
          int c = 0;
          for (int j = i; j < std::min(kEpochsPerDay, i + cfg.cluster.downsample); ++j, ++c)
            sum += sm.epochs[d * kEpochsPerDay + j].activity;
          seq.push_back(sum / c);
        }
        seqs.push_back(std::move(seq));
      }
    }
    dist = pairwise_dtw_sequences(seqs);
  } else {
    dist = pairwise_dtw(days, cfg.cluster.downsample);
  }

  std::vector<DendroLeaf> leaves;
  std::vector<std::string> names;
  for (const DayVector& d : days) {
    leaves.push_back({d.patient_id, d.day_index, d.has_attack});
    names.push_back(d.patient_id + "_day" + std::to_string(d.day_index));
  }
  const Dendrogram tree = upgma(dist, leaves);
  const std::vector<int> assignment = cut_tree(tree, cfg.cluster.k);

  std::vector<int> attack_labels, patient_labels;
  std::map<std::string, int> pid_codes;
  for (const DayVector& d : days) {
    attack_labels.push_back(d.has_attack ? 1 : 0);
    patient_labels.push_back(
        pid_codes.try_emplace(d.patient_id, static_cast<int>(pid_codes.size()))
            .first->second);
  }
  const SeparationScore vs_attack = separation_score(assignment, attack_labels);
  const SeparationScore vs_patient = separation_score(assignment, patient_labels);

  io::atomic_write_file((fs::path(out_dir) / "distances.csv").string(),
                        io::distance_matrix_to_csv(dist, names));
  io::atomic_write_file((fs::path(out_dir) / "tree.newick").string(),
                        export_tree(tree) + "\n");
  io::atomic_write_file((fs::path(out_dir) / "tree.json").string(),
                        io::dendrogram_to_json(tree).dump(2) + "\n");
  std::string assign_csv = "leaf,cluster,attack,patient\n";
  for (std::size_t i = 0; i < days.size(); ++i)
    assign_csv += names[i] + ',' + std::to_string(assignment[i]) + ',' +
                  std::to_string(attack_labels[i]) + ',' + days[i].patient_id + '\n';
  io::atomic_write_file((fs::path(out_dir) / "assignments.csv").string(), assign_csv);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "days: %zu\nk: %d\npurity_vs_attack: %.6f\nari_vs_attack: %.6f\n"
                "purity_vs_patient: %.6f\nari_vs_patient: %.6f\n",
                days.size(), cfg.cluster.k, vs_attack.purity,
                vs_attack.adjusted_rand_index, vs_patient.purity,
                vs_patient.adjusted_rand_index);
  io::atomic_write_file((fs::path(out_dir) / "separation.txt").string(), buf);
  std::fputs(buf, stdout);
  std::printf("artifacts in %s\n", out_dir.c_str());
  return 0;
}

int cmd_gradcheck(const std::string& model, int samples, double step, double tolerance,
                  std::uint64_t seed) {
  io::RunConfig cfg;
  Graph g = build_graph_for(model, cfg);
  g.init_params(derive_seed(seed, 0x1217));
  const ModelKind kind = model_kind_from_name(model);

  Rng rng(derive_seed(seed, 0x6c));
  const FeatShape in_shape = g.input_shape();
  Tensor x(2, in_shape.channels, in_shape.length);
  for (double& v : x.v) v = rng.normal(0.0, 1.0);

  std::vector<Tensor> targets;
  std::vector<double> weights;
  if (kind == ModelKind::MultiTaskCnn) {
    Tensor aux(2, 2, 1);
    for (int b = 0; b < 2; ++b) {
      const double f = rng.uniform();
      aux.at(b, 0, 0) = f;
      aux.at(b, 1, 0) = 1.0 - f;
    }
    targets.push_back(aux);
    weights.push_back(cfg.mtl_cnn.aux_loss_weight);
  }
  Tensor main_t(2, kNumStates, 1);
  for (int b = 0; b < 2; ++b)
    main_t.at(b, static_cast<int>(rng.uniform_int(0, kNumStates - 1)), 0) = 1.0;
  targets.push_back(main_t);
  weights.push_back(1.0);

  const GradCheckReport rep =
      grad_check(g, x, targets, weights, samples, step, derive_seed(seed, 0x9c));
  std::printf("model %s: checked %d parameters, max error %.3e, mean error %.3e\n",
              model.c_str(), rep.checked, rep.max_error, rep.mean_error);
  std::printf("worst: %s[%zu] analytic %.6e numeric %.6e\n", rep.worst.block.c_str(),
              rep.worst.index, rep.worst.analytic, rep.worst.numeric);
  const bool ok = rep.pass(tolerance);
  std::printf("%s (tolerance %.1e)\n", ok ? "PASS" : "FAIL", tolerance);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Actigraphy sleep/wake state detection and day-pattern clustering"};
  app.require_subcommand(1);

  std::string config_path, out, model, ckpt, matrix_csv, report_path, metrics_csv;
  std::string predictions_ckpt, pool = "test";
  std::vector<std::string> data;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int k_override = 0, downsample_override = 0;
  int gc_samples = 200;
  double gc_step = 1e-5, gc_tol = 1e-4;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* gen = app.add_subcommand("generate", "Generate a synthetic labeled cohort");
  gen->add_option("--config", config_path, "Run configuration (JSON)");
  gen->add_option("--out", out, "Output directory")->required();
  add_seed(gen);

  CLI::App* train = app.add_subcommand("train", "Train a classifier");
  train->add_option("--config", config_path, "Run configuration (JSON)");
  train->add_option("--data", data, "Series files or directories")->required();
  train->add_option("--model", model, "seq-cnn | mtl-cnn | mlp");
  train->add_option("--out", out, "Checkpoint output path")->required();
  add_seed(train);

  CLI::App* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint or a fixture matrix");
  eval->add_option("--ckpt", ckpt, "Checkpoint path");
  eval->add_option("--data", data, "Series files or directories");
  eval->add_option("--matrix", matrix_csv, "Precomputed confusion-matrix CSV");
  eval->add_option("--report", report_path, "Report output path")->required();
  eval->add_option("--metrics-csv", metrics_csv, "Metrics CSV path");
  eval->add_option("--pool", pool, "test | train | all")
      ->check(CLI::IsMember({"test", "train", "all"}));

  CLI::App* predict = app.add_subcommand("predict", "Predict per-epoch states for a series file");
  predict->add_option("--ckpt", ckpt, "Checkpoint path")->required();
  predict->add_option("--data", data, "Input series file")->required()->expected(1);
  predict->add_option("--out", out, "Output series file")->required();

  CLI::App* cluster = app.add_subcommand("cluster", "DTW + UPGMA day clustering");
  cluster->add_option("--config", config_path, "Run configuration (JSON)");
  cluster->add_option("--data", data, "Labeled series files or directories")->required();
  cluster->add_option("--out", out, "Output directory")->required();
  cluster->add_option("--use-predictions", predictions_ckpt,
                      "Replace labels with this checkpoint's predictions");
  cluster->add_option("--k", k_override, "Cluster count for the cut");
  cluster->add_option("--downsample", downsample_override,
                      "Per-day downsampling factor before DTW");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  gradcheck->add_option("--model", model, "seq-cnn | mtl-cnn | mlp")->required();
  gradcheck->add_option("--samples", gc_samples, "Parameters to sample");
  gradcheck->add_option("--step", gc_step, "Central difference step");
  gradcheck->add_option("--tolerance", gc_tol, "Max relative error");
  add_seed(gradcheck);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config_path, out, seed, seed_given);
    if (train->parsed()) return cmd_train(config_path, data, model, out, seed, seed_given);
    if (eval->parsed())
      return cmd_evaluate(ckpt, data, matrix_csv, report_path, metrics_csv, pool);
    if (predict->parsed()) return cmd_predict(ckpt, data[0], out);
    if (cluster->parsed())
      return cmd_cluster(config_path, data, out, predictions_ckpt, k_override,
                         downsample_override);
    if (gradcheck->parsed())
      return cmd_gradcheck(model, gc_samples, gc_step, gc_tol, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
