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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vjmht/model.hpp"
#include "vjmht/segmentation.hpp"
#include "vjmht/video.hpp"

namespace vjmht::train {

enum class TrainMode { supervised, unsupervised };
enum class PairMode { intra_cluster, inter_cluster, random, none };

const char* to_string(TrainMode m);
const char* to_string(PairMode m);
PairMode parse_pair_mode(const std::string& s);
TrainMode parse_train_mode(const std::string& s);

struct TrainConfig {
  TrainMode mode = TrainMode::supervised;
  double alpha = 0.01;
  double beta = 0.1;
  double epsilon = 0.5;
  std::size_t epochs = 60;
  std::size_t batch_videos = 2;
  double lr_initial = 1e-5;
  double lr_after_epoch_30 = 1e-6;
  /// Epoch at which lr_after_epoch_30 takes over.
  std::size_t lr_drop_epoch = 30;
  std::uint64_t seed = 0;
  PairMode pair_mode = PairMode::intra_cluster;
  std::size_t n_clusters = 25;
  model::ModelConfig model;
  seg::KtsConfig kts;

  void validate() const;
  double learning_rate(std::size_t epoch) const { return epoch < lr_drop_epoch ? lr_initial : lr_after_epoch_30; }

  /// JSON keys are the field names above; model dims sit at the top level
  /// (d_f, d_s, ...), KTS settings under "kts". Missing keys keep defaults.
  static TrainConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// -- optimiser --------------------------------------------------------------

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::size_t step = 0;
  std::vector<std::vector<double>> m, v;
};

/// One bias-corrected Adam update using each tensor's accumulated gradient.
void adam_step(std::span<ad::Tensor* const> params, AdamState& state, double lr, const AdamConfig& cfg = {});

// -- data plumbing ----------------------------------------------------------

/// One epoch of joint batches. Every video leads exactly one batch (the lead
/// video carries the reconstruction term); lead order is shuffled.
/// intra_cluster: partners from the lead's cluster; videos whose cluster is
/// too small train alone. inter_cluster: one video from each of N distinct
/// clusters. random: partners uniformly without replacement. none: singletons.
std::vector<std::vector<std::size_t>> sample_pairs(std::span<const int> assignments, PairMode mode,
                                                   std::size_t batch_videos, std::uint64_t seed);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> test;  // five disjoint index sets

  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Seeded shuffle then round-robin assignment into five folds.
FoldSplit five_fold_split(std::size_t n_videos, std::uint64_t seed);

/// Cluster id per video: the ids already on the records if every video has
/// one, otherwise k-means (k = min(n_clusters, n)) on clustering
/// representations.
std::vector<int> assign_clusters(std::span<const VideoRecord> videos, std::size_t n_clusters, std::uint64_t seed,
                                 const model::VjmhtParams* pretrained = nullptr);

// -- training loop ------------------------------------------------------------

struct EpochLog {
  std::size_t epoch = 0;
  double lr = 0.0;
  double total = 0.0;
  std::optional<double> sup;  // supervised mode only
  double rec = 0.0;
  double reg = 0.0;
  /// Mean predicted frame score over the epoch's batches, as seen by L_reg.
  double mean_score = 0.0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  model::VjmhtParams params;
  std::vector<EpochLog> log;
  std::vector<double> step_losses;
  std::vector<int> clusters;
};

using EpochCallback = std::function<void(const EpochLog&, const model::VjmhtParams&)>;

/// Adam over joint batches; parameters are stored at single precision
/// after every step. Videos must carry boundaries (and gt_scores in
/// supervised mode). Deterministic given cfg.seed.
TrainResult train(std::span<const VideoRecord> videos, const TrainConfig& cfg,
                  std::optional<std::vector<int>> clusters = std::nullopt, const EpochCallback& on_epoch = {});

nlohmann::json loss_log_json(const std::vector<EpochLog>& log, TrainMode mode);

}  // namespace vjmht::train
