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

#include "vjmht/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "vjmht/clustering.hpp"

namespace vjmht::train {

using nlohmann::json;

const char* to_string(TrainMode m) { return m == TrainMode::supervised ? "supervised" : "unsupervised"; }

const char* to_string(PairMode m) {
  switch (m) {
    case PairMode::intra_cluster: return "intra_cluster";
    case PairMode::inter_cluster: return "inter_cluster";
    case PairMode::random: return "random";
    case PairMode::none: return "none";
  }
  return "?";
}

PairMode parse_pair_mode(const std::string& s) {
  for (auto m : {PairMode::intra_cluster, PairMode::inter_cluster, PairMode::random, PairMode::none}) {
    if (s == to_string(m)) return m;
  }
  throw InvalidArgument("unknown pair_mode '" + s + "'");
}

TrainMode parse_train_mode(const std::string& s) {
  if (s == "supervised") return TrainMode::supervised;
  if (s == "unsupervised") return TrainMode::unsupervised;
  throw InvalidArgument("unknown mode '" + s + "'");
}

void TrainConfig::validate() const {
  if (alpha < 0.0 || beta < 0.0) throw InvalidArgument("alpha and beta must be non-negative");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (batch_videos == 0) throw InvalidArgument("batch_videos must be at least 1");
  if (lr_initial < 0.0 || lr_after_epoch_30 < 0.0) throw InvalidArgument("learning rates must be non-negative");
  model.validate();
  kts.validate();
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  try {
    if (j.contains("mode")) c.mode = parse_train_mode(j["mode"].get<std::string>());
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_videos = j.value("batch_videos", c.batch_videos);
    c.lr_initial = j.value("lr_initial", c.lr_initial);
    c.lr_after_epoch_30 = j.value("lr_after_epoch_30", c.lr_after_epoch_30);
    c.lr_drop_epoch = j.value("lr_drop_epoch", c.lr_drop_epoch);
    c.seed = j.value("seed", c.seed);
    if (j.contains("pair_mode")) c.pair_mode = parse_pair_mode(j["pair_mode"].get<std::string>());
    c.n_clusters = j.value("n_clusters", c.n_clusters);
    auto& m = c.model;
    m.d_f = j.value("d_f", m.d_f);
    m.d_s = j.value("d_s", m.d_s);
    m.d_v = j.value("d_v", m.d_v);
    m.f_layers = j.value("f_layers", m.f_layers);
    m.f_heads = j.value("f_heads", m.f_heads);
    m.f_ffn = j.value("f_ffn", m.f_ffn);
    m.s_layers = j.value("s_layers", m.s_layers);
    m.s_heads = j.value("s_heads", m.s_heads);
    m.s_ffn = j.value("s_ffn", m.s_ffn);
    if (j.contains("kts")) {
      const auto& k = j["kts"];
      c.kts.max_segments = k.value("max_segments", c.kts.max_segments);
      c.kts.penalty_coefficient = k.value("penalty_coefficient", c.kts.penalty_coefficient);
      const auto kernel = k.value("kernel", std::string("linear"));
      if (kernel == "rbf") {
        c.kts.kernel = seg::Kernel::rbf(k.value("sigma", 1.0));
      } else if (kernel != "linear") {
        throw InvalidArgument("unknown kernel '" + kernel + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config: ") + e.what());
  }
  return c;
}

json TrainConfig::to_json() const {
  return {{"mode", to_string(mode)},
          {"alpha", alpha},
          {"beta", beta},
          {"epsilon", epsilon},
          {"epochs", epochs},
          {"batch_videos", batch_videos},
          {"lr_initial", lr_initial},
          {"lr_after_epoch_30", lr_after_epoch_30},
          {"lr_drop_epoch", lr_drop_epoch},
          {"seed", seed},
          {"pair_mode", to_string(pair_mode)},
          {"n_clusters", n_clusters},
          {"d_f", model.d_f},
          {"d_s", model.d_s},
          {"d_v", model.d_v},
          {"f_layers", model.f_layers},
          {"f_heads", model.f_heads},
          {"f_ffn", model.f_ffn},
          {"s_layers", model.s_layers},
          {"s_heads", model.s_heads},
          {"s_ffn", model.s_ffn},
          {"kts",
           {{"max_segments", kts.max_segments},
            {"penalty_coefficient", kts.penalty_coefficient},
            {"kernel", kts.kernel.kind == seg::Kernel::Kind::rbf ? "rbf" : "linear"},
            {"sigma", kts.kernel.sigma}}}};
}

// -- Adam -------------------------------------------------------------------

void adam_step(std::span<ad::Tensor* const> params, AdamState& state, double lr, const AdamConfig& cfg) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(p->size(), 0.0);
      state.v.emplace_back(p->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("adam: state does not match parameter list");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->grad().size() != params[k]->size() || state.m[k].size() != params[k]->size()) {
      throw DimensionError("adam: parameter " + std::to_string(k) + " has no matching gradient/state");
    }
    for (double g : params[k]->grad()) {
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in parameter " + std::to_string(k));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto data = params[k]->data();
    auto grad = params[k]->grad();
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < data.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      data[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
}

// -- pairing & folds --------------------------------------------------------

std::vector<std::vector<std::size_t>> sample_pairs(std::span<const int> assignments, PairMode mode,
                                                   std::size_t batch_videos, std::uint64_t seed) {
  const std::size_t n = assignments.size();
  if (batch_videos == 0) throw InvalidArgument("sample_pairs: batch size must be positive");
  std::mt19937_64 rng(seed);
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) members[assignments[i]].push_back(i);

  auto sizes = [&] {
    std::string s;
    for (const auto& [c, v] : members) s += (s.empty() ? "" : ", ") + std::to_string(c) + ":" + std::to_string(v.size());
    return "{" + s + "}";
  };
  const std::size_t partners = mode == PairMode::none ? 0 : batch_videos - 1;
  if (partners > 0) {
    if (mode == PairMode::intra_cluster) {
      const bool any = std::any_of(members.begin(), members.end(),
                                   [&](const auto& kv) { return kv.second.size() >= batch_videos; });
      if (!any) throw InvalidArgument("intra_cluster pairing infeasible, cluster sizes " + sizes());
    } else if (mode == PairMode::inter_cluster && members.size() < batch_videos) {
      throw InvalidArgument("inter_cluster pairing needs " + std::to_string(batch_videos) +
                            " clusters, cluster sizes " + sizes());
    } else if (mode == PairMode::random && n < batch_videos) {
      throw InvalidArgument("random pairing needs at least " + std::to_string(batch_videos) + " videos");
    }
  }

  std::vector<std::size_t> leads(n);
  std::iota(leads.begin(), leads.end(), 0);
  std::shuffle(leads.begin(), leads.end(), rng);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t lead : leads) {
    std::vector<std::size_t> batch{lead};
    if (partners > 0) {
      std::vector<std::size_t> pool;
      if (mode == PairMode::intra_cluster) {
        const auto& same = members[assignments[lead]];
        if (same.size() >= batch_videos) {
          for (auto v : same) {
            if (v != lead) pool.push_back(v);
          }
          std::shuffle(pool.begin(), pool.end(), rng);
          pool.resize(partners);
        }
      } else if (mode == PairMode::inter_cluster) {
        std::vector<int> others;
        for (const auto& [c, v] : members) {
          if (c != assignments[lead]) others.push_back(c);
        }
        std::shuffle(others.begin(), others.end(), rng);
        for (std::size_t k = 0; k < partners; ++k) {
          const auto& m = members[others[k]];
          std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
          pool.push_back(m[pick(rng)]);
        }
      } else {
        for (std::size_t v = 0; v < n; ++v) {
          if (v != lead) pool.push_back(v);
        }
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(partners);
      }
      batch.insert(batch.end(), pool.begin(), pool.end());
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < test.size(); ++f) {
    if (f != fold) out.insert(out.end(), test[f].begin(), test[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldSplit five_fold_split(std::size_t n_videos, std::uint64_t seed) {
  if (n_videos < 5) throw InvalidArgument("five-fold split needs at least 5 videos, got " + std::to_string(n_videos));
  std::vector<std::size_t> order(n_videos);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldSplit split;
  split.test.resize(5);
  for (std::size_t i = 0; i < n_videos; ++i) split.test[i % 5].push_back(order[i]);
  for (auto& f : split.test) std::sort(f.begin(), f.end());
  return split;
}

std::vector<int> assign_clusters(std::span<const VideoRecord> videos, std::size_t n_clusters, std::uint64_t seed,
                                 const model::VjmhtParams* pretrained) {
  if (videos.empty()) return {};
  const bool planted = std::all_of(videos.begin(), videos.end(), [](const auto& v) { return v.cluster_id.has_value(); });
  std::vector<int> out;
  if (planted) {
    for (const auto& v : videos) out.push_back(*v.cluster_id);
    return out;
  }
  std::vector<cluster::Point> points;
  for (const auto& v : videos) points.push_back(cluster::clustering_representation(v, pretrained));
  const std::size_t k = std::clamp<std::size_t>(n_clusters, 1, videos.size());
  return cluster::kmeans(points, k, seed).assignments;
}

// -- loop ---------------------------------------------------------------------

json EpochLog::to_json() const {
  json j{{"epoch", epoch}, {"lr", lr}, {"total", total}, {"rec", rec}, {"reg", reg}, {"mean_score", mean_score}};
  if (sup) j["sup"] = *sup;
  return j;
}

json loss_log_json(const std::vector<EpochLog>& log, TrainMode mode) {
  json epochs = json::array();
  for (const auto& e : log) epochs.push_back(e.to_json());
  return {{"mode", to_string(mode)}, {"epochs", epochs}};
}

TrainResult train(std::span<const VideoRecord> videos, const TrainConfig& cfg, std::optional<std::vector<int>> clusters,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (videos.empty()) throw InvalidArgument("train: no videos");
  const bool supervised = cfg.mode == TrainMode::supervised;
  for (const auto& v : videos) {
    if (!v.boundaries) throw InvalidArgument("train: video " + v.id + " has no shot boundaries");
    if (v.features.cols() != cfg.model.d_f) {
      throw DimensionError("train: video " + v.id + " has " + std::to_string(v.features.cols()) +
                           "-dim features, model expects d_f = " + std::to_string(cfg.model.d_f));
    }
    if (supervised && !v.gt_scores) throw InvalidArgument("train: supervised mode but video " + v.id + " lacks gt scores");
  }

  TrainResult res;
  res.clusters = clusters ? std::move(*clusters) : assign_clusters(videos, cfg.n_clusters, cfg.seed);
  if (res.clusters.size() != videos.size()) throw DimensionError("train: one cluster id per video required");

  res.params = model::VjmhtParams::init(cfg.model, cfg.seed);
  res.params.set_requires_grad(true);
  const auto tensors = res.params.tensors();
  AdamState adam;
  const model::LossWeights weights{cfg.alpha, cfg.beta, cfg.epsilon};

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate(epoch);
    const std::uint64_t epoch_seed = cfg.seed * 0x9E3779B97F4A7C15ULL + epoch + 1;
    const auto batches = sample_pairs(res.clusters, cfg.pair_mode, cfg.batch_videos, epoch_seed);

    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    double sup_acc = 0.0;
    for (const auto& batch : batches) {
      std::vector<const VideoRecord*> members;
      for (auto i : batch) members.push_back(&videos[i]);
      res.params.zero_grad();
      ad::Tape tape;
      const auto bound = model::bind(tape, res.params);
      const auto loss = model::batch_loss(bound, members, weights, supervised);
      tape.backward(loss.total);
      adam_step(tensors, adam, lr);
      res.params.round_to_float();

      const double total = loss.total.value()[0];
      res.step_losses.push_back(total);
      log.total += total;
      log.rec += loss.rec.value()[0];
      log.reg += loss.reg.value()[0];
      if (loss.sup) sup_acc += loss.sup->value()[0];
      double batch_mean = 0.0;
      for (const auto& fs : loss.frame_scores) {
        const auto vals = fs.value().data();
        batch_mean += std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
      }
      log.mean_score += batch_mean / static_cast<double>(loss.frame_scores.size());
    }
    const double nb = static_cast<double>(batches.size());
    log.total /= nb;
    log.rec /= nb;
    log.reg /= nb;
    log.mean_score /= nb;
    if (supervised) log.sup = sup_acc / nb;
    if (!std::isfinite(log.total)) throw NumericError("train: non-finite epoch loss");
    res.log.push_back(log);
    if (on_epoch) on_epoch(log, res.params);
  }
  res.params.set_requires_grad(false);
  return res;
}

}  // namespace vjmht::train
