// Copyright 2026 The VJMHT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vjmht/clustering.hpp"
#include "vjmht/error.hpp"
#include "vjmht/evaluation.hpp"
#include "vjmht/gradcheck.hpp"
#include "vjmht/io.hpp"
#include "vjmht/model.hpp"
#include "vjmht/segmentation.hpp"
#include "vjmht/summarize.hpp"
#include "vjmht/synth.hpp"
#include "vjmht/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vjmht;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

// Writes to <out>/<name> when --out is set, otherwise to stdout.
void emit(const Globals& g, const std::string& name, const json& j) {
  if (g.out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(fs::path(g.out) / name, j);
    std::cerr << "wrote " << (fs::path(g.out) / name).string() << "\n";
  }
}

train::TrainConfig load_config(const Globals& g) {
  auto cfg = g.config.empty() ? train::TrainConfig{} : train::TrainConfig::from_json(read_json(g.config));
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

json nan_to_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json report_json(const eval::EvalReport& r) {
  return {{"precision", r.precision},
          {"recall", r.recall},
          {"f_measure", r.f_measure},
          {"f_measure_mean", r.f_measure_mean},
          {"f_measure_max", r.f_measure_max},
          {"kendall_tau", nan_to_null(r.kendall_tau)},
          {"spearman_rho", nan_to_null(r.spearman_rho)},
          {"aggregation_mode", r.aggregation_mode == eval::Aggregation::mean ? "mean" : "max"}};
}

std::vector<VideoRecord> load_with_cuts(const std::string& manifest_path, const train::TrainConfig& cfg,
                                        io::DatasetManifest* manifest_out = nullptr) {
  auto manifest = io::read_manifest(manifest_path);
  auto videos = io::load_dataset(manifest);
  io::ensure_boundaries(manifest, videos, cfg.kts);
  if (manifest_out) *manifest_out = std::move(manifest);
  return videos;
}

// -- subcommands --------------------------------------------------------------

void add_segment(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("segment", "KTS shot boundaries for one feature file or a whole manifest");
  auto features = std::make_shared<std::string>();
  auto manifest = std::make_shared<std::string>();
  auto segments = std::make_shared<std::size_t>(0);
  cmd->add_option("--features", *features, "VJMF feature file; prints its cuts");
  cmd->add_option("--manifest", *manifest, "Dataset manifest; fills the cuts cache");
  cmd->add_option("--segments", *segments, "Force exactly this many segments");
  cmd->callback([=, &g] {
    const auto cfg = load_config(g);
    if (!features->empty()) {
      const auto f = io::load_features(*features);
      const auto cuts = *segments > 0 ? seg::kts_fixed(f, *segments, cfg.kts.kernel) : seg::kts(f, cfg.kts);
      emit(g, fs::path(*features).stem().string() + ".cuts.json", json(cuts.cuts()));
    } else if (!manifest->empty()) {
      io::DatasetManifest m;
      const auto videos = load_with_cuts(*manifest, cfg, &m);
      json out = json::object();
      for (const auto& v : videos) out[v.id] = v.boundaries->cuts();
      emit(g, "cuts.json", out);
    } else {
      throw CLI::ValidationError("segment", "one of --features or --manifest is required");
    }
  });
}

void add_cluster(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("cluster", "Group videos with k-means");
  auto manifest = std::make_shared<std::string>();
  auto model_path = std::make_shared<std::string>();
  auto k = std::make_shared<std::size_t>(0);
  cmd->add_option("--manifest", *manifest, "Dataset manifest")->required();
  cmd->add_option("--model", *model_path, "Pretrained model for video representations");
  cmd->add_option("-k,--clusters", *k, "Number of clusters (default n_clusters from config)");
  cmd->callback([=, &g] {
    const auto cfg = load_config(g);
    std::optional<model::VjmhtParams> pretrained;
    if (!model_path->empty()) pretrained = model::load_params(*model_path);
    auto videos = pretrained ? load_with_cuts(*manifest, cfg) : io::load_dataset(io::read_manifest(*manifest));
    for (auto& v : videos) v.cluster_id.reset();
    const auto ids = train::assign_clusters(videos, *k > 0 ? *k : cfg.n_clusters, cfg.seed,
                                            pretrained ? &*pretrained : nullptr);
    json out = json::object();
    for (std::size_t i = 0; i < videos.size(); ++i) out[videos[i].id] = ids[i];
    emit(g, "clusters.json", out);
  });
}

void add_train(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("train", "Train a model; writes model.bin, loss_log.json and config.json to --out");
  auto manifest = std::make_shared<std::string>();
  auto fold = std::make_shared<int>(-1);
  auto clusters_path = std::make_shared<std::string>();
  cmd->add_option("--manifest", *manifest, "Dataset manifest")->required();
  cmd->add_option("--fold", *fold, "Train on the other four of five seeded folds")->check(CLI::Range(0, 4));
  cmd->add_option("--clusters", *clusters_path, "clusters.json from the cluster subcommand")
      ->check(CLI::ExistingFile);
  cmd->callback([=, &g] {
    if (g.out.empty()) throw CLI::ValidationError("train", "--out is required");
    const auto cfg = load_config(g);
    auto videos = load_with_cuts(*manifest, cfg);
    json split;
    if (*fold >= 0) {
      const auto folds = train::five_fold_split(videos.size(), cfg.seed);
      std::vector<VideoRecord> subset;
      json train_ids = json::array(), test_ids = json::array();
      for (auto i : folds.train_indices(static_cast<std::size_t>(*fold))) {
        subset.push_back(videos[i]);
        train_ids.push_back(videos[i].id);
      }
      for (auto i : folds.test[static_cast<std::size_t>(*fold)]) test_ids.push_back(videos[i].id);
      split = {{"fold", *fold}, {"train", train_ids}, {"test", test_ids}};
      videos = std::move(subset);
    }
    std::optional<std::vector<int>> clusters;
    if (!clusters_path->empty()) {
      const json ids = read_json(*clusters_path);
      clusters.emplace();
      for (const auto& v : videos) {
        if (!ids.contains(v.id)) throw InvalidArgument("train: no cluster for video " + v.id + " in " + *clusters_path);
        clusters->push_back(ids.at(v.id).get<int>());
      }
    }
    const auto result = train::train(videos, cfg, clusters, [](const train::EpochLog& e, const auto&) {
      std::cerr << "epoch " << e.epoch << " lr " << e.lr << " loss " << e.total << "\n";
    });
    const fs::path out(g.out);
    fs::create_directories(out);
    model::save_params(result.params, out / "model.bin");
    write_json(out / "loss_log.json", train::loss_log_json(result.log, cfg.mode));
    write_json(out / "config.json", cfg.to_json());
    if (!split.is_null()) write_json(out / "split.json", split);
    std::cerr << "wrote " << (out / "model.bin").string() << "\n";
  });
}

void add_summarize(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("summarize", "Score videos and select key shots");
  auto manifest = std::make_shared<std::string>();
  auto model_path = std::make_shared<std::string>();
  auto gamma = std::make_shared<double>(summary::kDefaultGamma);
  auto mode = std::make_shared<std::string>("mean");
  auto only = std::make_shared<std::vector<std::string>>();
  cmd->add_option("--manifest", *manifest, "Dataset manifest")->required();
  cmd->add_option("--model", *model_path, "Trained model file")->required();
  cmd->add_option("--gamma", *gamma, "Summary length as a fraction of the video");
  cmd->add_option("--value-mode", *mode, "Shot value: mean or sum of frame scores")
      ->check(CLI::IsMember({"mean", "sum"}));
  cmd->add_option("--video", *only, "Restrict to these video ids");
  cmd->callback([=, &g] {
    const auto params = model::load_params(*model_path);
    const auto videos = load_with_cuts(*manifest, load_config(g));
    const auto value_mode = *mode == "sum" ? summary::ValueMode::sum : summary::ValueMode::mean;
    json out = json::array();
    for (const auto& v : videos) {
      if (!only->empty() && std::find(only->begin(), only->end(), v.id) == only->end()) continue;
      const auto pred = model::forward_single(params, v);
      const auto s = summary::generate_summary(pred.frame_scores, *v.boundaries, *gamma, value_mode);
      json runs = json::array();
      for (const auto& [start, len] : s.runs()) runs.push_back({start, len});
      out.push_back({{"video_id", v.id},
                     {"gamma", *gamma},
                     {"selected_shots", s.selected_shots},
                     {"y", runs},
                     {"frame_scores", pred.frame_scores}});
    }
    emit(g, "predictions.json", out);
  });
}

void add_eval(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("eval", "Compare predictions with annotations");
  auto manifest = std::make_shared<std::string>();
  auto predictions = std::make_shared<std::string>();
  auto aggregation = std::make_shared<std::string>("mean");
  cmd->add_option("--manifest", *manifest, "Dataset manifest")->required();
  cmd->add_option("--predictions", *predictions, "Output of summarize")->required();
  cmd->add_option("--aggregation", *aggregation, "F-measure over annotators: mean or max")
      ->check(CLI::IsMember({"mean", "max"}));
  cmd->callback([=, &g] {
    const auto videos = io::load_dataset(io::read_manifest(*manifest));
    std::map<std::string, const VideoRecord*> by_id;
    for (const auto& v : videos) by_id[v.id] = &v;
    const auto mode = *aggregation == "max" ? eval::Aggregation::max : eval::Aggregation::mean;

    json per_video = json::array();
    std::vector<eval::EvalReport> reports;
    for (const auto& p : read_json(*predictions)) {
      const auto id = p.at("video_id").get<std::string>();
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw InvalidArgument("prediction for unknown video " + id);
      const auto& v = *it->second;
      std::vector<std::uint8_t> y(v.frame_count(), 0);
      for (const auto& run : p.at("y")) {
        const auto start = run.at(0).get<std::size_t>(), len = run.at(1).get<std::size_t>();
        if (start + len > y.size()) throw FormatError("summary run exceeds video " + id);
        std::fill(y.begin() + static_cast<std::ptrdiff_t>(start), y.begin() + static_cast<std::ptrdiff_t>(start + len), 1);
      }
      const auto scores = p.at("frame_scores").get<std::vector<double>>();
      std::vector<double> reference;
      if (v.gt_scores) reference = *v.gt_scores;
      const auto r = eval::evaluate_video(y, scores, v.user_summaries, reference, mode);
      reports.push_back(r);
      auto j = report_json(r);
      j["video_id"] = id;
      per_video.push_back(j);
    }
    emit(g, "eval.json", {{"videos", per_video}, {"aggregate", report_json(eval::aggregate_reports(reports))}});
  });
}

void add_synth(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("synth", "Generate a synthetic dataset with planted shots under --out");
  auto cfg = std::make_shared<synth::SynthConfig>();
  auto planted = std::make_shared<bool>(false);
  cmd->add_option("--videos", cfg->n_videos, "Number of videos");
  cmd->add_option("--frames", cfg->frames, "Frames per video");
  cmd->add_option("--dim", cfg->dim, "Feature dimension");
  cmd->add_option("--clusters", cfg->n_clusters, "Number of clusters");
  cmd->add_option("--noise", cfg->noise, "Per-coordinate frame noise");
  cmd->add_flag("--planted-cuts", *planted, "Store planted boundaries in the cuts cache");
  cmd->callback([=, &g] {
    if (g.out.empty()) throw CLI::ValidationError("synth", "--out is required");
    if (g.seed) cfg->seed = *g.seed;
    const auto videos = synth::synth_videos(*cfg);
    synth::write_dataset(videos, g.out, *planted);
    std::cerr << "wrote " << (fs::path(g.out) / "manifest.json").string() << "\n";
  });
}

void add_gradcheck(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("gradcheck", "Finite-difference check of the training loss on a toy model");
  auto coords = std::make_shared<std::size_t>(256);
  auto tol = std::make_shared<double>(1e-4);
  cmd->add_option("--coordinates", *coords, "Sampled parameter entries per mode");
  cmd->add_option("--tolerance", *tol, "Maximum allowed relative error");
  cmd->callback([=, &g] {
    json out = json::object();
    bool ok = true;
    for (bool supervised : {true, false}) {
      gradcheck::GradcheckConfig cfg;
      cfg.seed = g.seed.value_or(0);
      cfg.coordinates = *coords;
      cfg.supervised = supervised;
      const auto r = gradcheck::run(cfg);
      ok = ok && r.max_relative_error < *tol;
      out[supervised ? "supervised" : "unsupervised"] = {{"checked", r.checked},
                                                         {"max_relative_error", r.max_relative_error},
                                                         {"max_absolute_error", r.max_absolute_error},
                                                         {"worst", r.worst}};
    }
    out["pass"] = ok;
    emit(g, "gradcheck.json", out);
    if (!ok) throw Error("gradient check exceeded tolerance");
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical transformer video co-summarization"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->option_text("UINT");
  app.add_option("--config", g.config, "TrainConfig JSON file");
  app.add_option("--out", g.out, "Output directory");
  add_segment(app, g);
  add_cluster(app, g);
  add_train(app, g);
  add_summarize(app, g);
  add_eval(app, g);
  add_synth(app, g);
  add_gradcheck(app, g);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
