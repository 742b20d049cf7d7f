/* Copyright 2026 The Lataug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "lataug/checkpoint.hpp"

#include <map>

#include <nlohmann/json.hpp>

namespace lataug {

namespace {

constexpr char kMagic[4] = {'V', 'A', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

using TensorEntry = std::pair<std::string, const Eigen::MatrixXd*>;

void write_container(const nlohmann::json& meta, const std::vector<TensorEntry>& tensors,
                     const std::string& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  const std::string meta_bytes = meta.dump();
  put_u32(buf, static_cast<std::uint32_t>(meta_bytes.size()));
  buf.append(meta_bytes);
  put_u32(buf, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put_u32(buf, static_cast<std::uint32_t>(name.size()));
    buf.append(name);
    put_u32(buf, static_cast<std::uint32_t>(tensor->rows()));
    put_u32(buf, static_cast<std::uint32_t>(tensor->cols()));
    const double* data = tensor->data();
    for (Eigen::Index i = 0; i < tensor->size(); ++i) put_f64(buf, data[i]);
  }
  write_file_bytes(path, buf);
}

struct Container {
  nlohmann::json meta;
  std::map<std::string, Eigen::MatrixXd> tensors;
};

Container read_container(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  ByteReader reader(bytes, path);
  if (reader.get_bytes(4) != std::string(kMagic, 4)) {
    throw DataError(path + ": bad magic, not a checkpoint container");
  }
  const std::uint32_t version = reader.get_u32();
  if (version != kVersion) {
    throw DataError(path + ": unsupported container version " + std::to_string(version));
  }
  Container container;
  const std::uint32_t meta_len = reader.get_u32();
  const std::string meta_bytes = reader.get_bytes(meta_len);
  try {
    container.meta = nlohmann::json::parse(meta_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid metadata block: " + e.what());
  }
  const std::uint32_t count = reader.get_u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = reader.get_u32();
    const std::string name = reader.get_bytes(name_len);
    const std::uint32_t rows = reader.get_u32();
    const std::uint32_t cols = reader.get_u32();
    Eigen::MatrixXd tensor(rows, cols);
    double* data = tensor.data();
    for (Eigen::Index k = 0; k < tensor.size(); ++k) data[k] = reader.get_f64();
    if (!container.tensors.emplace(name, std::move(tensor)).second) {
      throw DataError(path + ": duplicate tensor '" + name + "'");
    }
  }
  if (!reader.done()) throw DataError(path + ": trailing bytes after tensor table");
  return container;
}

const Eigen::MatrixXd& require_tensor(const Container& container, const std::string& name,
                                      const std::string& path) {
  auto it = container.tensors.find(name);
  if (it == container.tensors.end()) {
    throw DataError(path + ": missing tensor '" + name + "'");
  }
  return it->second;
}

void load_shaped(const Container& container, const std::string& name, Eigen::MatrixXd* dst,
                 const std::string& path) {
  const Eigen::MatrixXd& src = require_tensor(container, name, path);
  if (src.rows() != dst->rows() || src.cols() != dst->cols()) {
    throw DataError(path + ": tensor '" + name + "' has shape " + std::to_string(src.rows()) +
                    "x" + std::to_string(src.cols()) + ", expected " +
                    std::to_string(dst->rows()) + "x" + std::to_string(dst->cols()));
  }
  *dst = src;
}

nlohmann::json vae_config_to_json(const VaeConfig& cfg) {
  return {{"latent_dim", cfg.latent_dim},     {"encoder_layers", cfg.encoder_layers},
          {"decoder_layers", cfg.decoder_layers}, {"hidden", cfg.hidden},
          {"segment_len", cfg.segment_len},   {"feature_dim", cfg.feature_dim}};
}

VaeConfig vae_config_from_json(const nlohmann::json& j) {
  VaeConfig cfg;
  cfg.latent_dim = j.at("latent_dim").get<int>();
  cfg.encoder_layers = j.at("encoder_layers").get<int>();
  cfg.decoder_layers = j.at("decoder_layers").get<int>();
  cfg.hidden = j.at("hidden").get<int>();
  cfg.segment_len = j.at("segment_len").get<int>();
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.validate();
  return cfg;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return {{"batch_size", cfg.batch_size},
          {"patience", cfg.patience},
          {"dev_fraction", cfg.dev_fraction},
          {"seed", cfg.seed},
          {"max_epochs", cfg.max_epochs},
          {"stochastic", cfg.stochastic},
          {"use_kl", cfg.use_kl},
          {"adam",
           {{"beta1", cfg.adam.beta1},
            {"beta2", cfg.adam.beta2},
            {"epsilon", cfg.adam.epsilon},
            {"learning_rate", cfg.adam.learning_rate},
            {"l2_weight", cfg.adam.l2_weight}}}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.patience = j.at("patience").get<int>();
  cfg.dev_fraction = j.at("dev_fraction").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.max_epochs = j.at("max_epochs").get<int>();
  cfg.stochastic = j.at("stochastic").get<bool>();
  cfg.use_kl = j.at("use_kl").get<bool>();
  const nlohmann::json& adam = j.at("adam");
  cfg.adam.beta1 = adam.at("beta1").get<double>();
  cfg.adam.beta2 = adam.at("beta2").get<double>();
  cfg.adam.epsilon = adam.at("epsilon").get<double>();
  cfg.adam.learning_rate = adam.at("learning_rate").get<double>();
  cfg.adam.l2_weight = adam.at("l2_weight").get<double>();
  cfg.validate();
  return cfg;
}

// Allocates model tensors for the given architecture; values are overwritten
// by the caller.
void allocate_model(VaeModel* model, const VaeConfig& cfg) {
  Rng scratch(0);
  model->init(cfg, scratch);
}

}  // namespace

void save_checkpoint(const TrainerCheckpoint& checkpoint, const std::string& path) {
  const TrainerState& state = checkpoint.state;
  nlohmann::json meta;
  meta["kind"] = "trainer";
  meta["vae"] = vae_config_to_json(state.model.config);
  meta["train"] = train_config_to_json(state.config);
  meta["rng"] = state.rng.serialize();
  meta["epoch"] = state.epoch;
  meta["epochs_since_improve"] = state.epochs_since_improve;
  meta["stopped"] = state.stopped;
  meta["adam_step"] = state.adam.step;

  std::vector<TensorEntry> tensors;
  const ConstTensorList model_tensors = state.model.tensors();
  const ConstTensorList best_tensors = state.best_model.tensors();
  for (const ConstNamedTensor& t : model_tensors) tensors.push_back({"model." + t.name, t.value});
  for (const ConstNamedTensor& t : best_tensors) tensors.push_back({"best." + t.name, t.value});
  for (std::size_t i = 0; i < model_tensors.size(); ++i) {
    tensors.push_back({"adam.m." + model_tensors[i].name, &state.adam.m[i]});
    tensors.push_back({"adam.v." + model_tensors[i].name, &state.adam.v[i]});
  }

  Eigen::MatrixXd best_dev(1, 1);
  best_dev(0, 0) = state.best_dev_elbo;
  tensors.push_back({"aux.best_dev_elbo", &best_dev});

  Eigen::MatrixXd history(static_cast<Eigen::Index>(state.history.size()), 7);
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    const EpochStats& row = state.history[i];
    const Eigen::Index r = static_cast<Eigen::Index>(i);
    history(r, 0) = static_cast<double>(row.epoch);
    history(r, 1) = row.train_elbo;
    history(r, 2) = row.train_kl;
    history(r, 3) = row.train_recon;
    history(r, 4) = row.dev_elbo;
    history(r, 5) = row.dev_kl;
    history(r, 6) = row.dev_recon;
  }
  tensors.push_back({"aux.history", &history});

  Eigen::MatrixXd norm_mean = checkpoint.norm_stats.mean;
  Eigen::MatrixXd norm_std = checkpoint.norm_stats.std;
  tensors.push_back({"norm.mean", &norm_mean});
  tensors.push_back({"norm.std", &norm_std});

  write_container(meta, tensors, path);
}

TrainerCheckpoint load_checkpoint(const std::string& path) {
  const Container container = read_container(path);
  if (container.meta.value("kind", "") != "trainer") {
    throw DataError(path + ": container does not hold a training checkpoint");
  }

  TrainerCheckpoint checkpoint;
  TrainerState& state = checkpoint.state;
  try {
    const VaeConfig arch = vae_config_from_json(container.meta.at("vae"));
    state.config = train_config_from_json(container.meta.at("train"));
    state.rng = Rng::deserialize(container.meta.at("rng").get<std::string>());
    state.epoch = container.meta.at("epoch").get<int>();
    state.epochs_since_improve = container.meta.at("epochs_since_improve").get<int>();
    state.stopped = container.meta.at("stopped").get<bool>();
    allocate_model(&state.model, arch);
    allocate_model(&state.best_model, arch);
    state.adam.init(state.model.tensors());
    state.adam.step = container.meta.at("adam_step").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed metadata: " + e.what());
  }

  for (NamedTensor& t : state.model.tensors()) {
    load_shaped(container, "model." + t.name, t.value, path);
  }
  for (NamedTensor& t : state.best_model.tensors()) {
    load_shaped(container, "best." + t.name, t.value, path);
  }
  const TensorList model_tensors = state.model.tensors();
  for (std::size_t i = 0; i < model_tensors.size(); ++i) {
    load_shaped(container, "adam.m." + model_tensors[i].name, &state.adam.m[i], path);
    load_shaped(container, "adam.v." + model_tensors[i].name, &state.adam.v[i], path);
  }

  const Eigen::MatrixXd& best_dev = require_tensor(container, "aux.best_dev_elbo", path);
  if (best_dev.size() != 1) throw DataError(path + ": aux.best_dev_elbo must be 1x1");
  state.best_dev_elbo = best_dev(0, 0);

  const Eigen::MatrixXd& history = require_tensor(container, "aux.history", path);
  if (history.rows() > 0 && history.cols() != 7) {
    throw DataError(path + ": aux.history must have 7 columns");
  }
  state.history.resize(static_cast<std::size_t>(history.rows()));
  for (Eigen::Index r = 0; r < history.rows(); ++r) {
    EpochStats& row = state.history[static_cast<std::size_t>(r)];
    row.epoch = static_cast<int>(history(r, 0));
    row.train_elbo = history(r, 1);
    row.train_kl = history(r, 2);
    row.train_recon = history(r, 3);
    row.dev_elbo = history(r, 4);
    row.dev_kl = history(r, 5);
    row.dev_recon = history(r, 6);
  }

  const Eigen::MatrixXd& norm_mean = require_tensor(container, "norm.mean", path);
  const Eigen::MatrixXd& norm_std = require_tensor(container, "norm.std", path);
  if (norm_mean.cols() != 1 || norm_std.cols() != 1 || norm_mean.rows() != norm_std.rows()) {
    throw DataError(path + ": malformed normalization statistics");
  }
  checkpoint.norm_stats.mean = norm_mean.col(0);
  checkpoint.norm_stats.std = norm_std.col(0);
  return checkpoint;
}

void save_analysis(const AnalysisArtifacts& artifacts, const std::string& path) {
  const Eigen::Index dim = artifacts.subspace.center.size();
  nlohmann::json meta;
  meta["kind"] = "analysis";
  meta["latent_dim"] = dim;
  meta["sample_count"] = artifacts.subspace.sample_count;
  nlohmann::json ids = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::array();
  for (const NuisanceRepresentation& rep : artifacts.representations) {
    ids.push_back(rep.utterance_id);
    counts.push_back(rep.segment_count);
  }
  meta["utterance_ids"] = std::move(ids);
  meta["segment_counts"] = std::move(counts);

  Eigen::MatrixXd reps(static_cast<Eigen::Index>(artifacts.representations.size()), dim);
  for (std::size_t i = 0; i < artifacts.representations.size(); ++i) {
    reps.row(static_cast<Eigen::Index>(i)) = artifacts.representations[i].mean.transpose();
  }
  Eigen::MatrixXd center = artifacts.subspace.center;
  Eigen::MatrixXd values = artifacts.subspace.eigenvalues;

  std::vector<TensorEntry> tensors;
  tensors.push_back({"reps", &reps});
  tensors.push_back({"center", &center});
  tensors.push_back({"eigenvectors", &artifacts.subspace.eigenvectors});
  tensors.push_back({"eigenvalues", &values});
  write_container(meta, tensors, path);
}

AnalysisArtifacts load_analysis(const std::string& path) {
  const Container container = read_container(path);
  if (container.meta.value("kind", "") != "analysis") {
    throw DataError(path + ": container does not hold analysis artifacts");
  }
  AnalysisArtifacts artifacts;
  Eigen::Index dim = 0;
  try {
    dim = container.meta.at("latent_dim").get<Eigen::Index>();
    artifacts.subspace.sample_count = container.meta.at("sample_count").get<int>();
    const auto ids = container.meta.at("utterance_ids").get<std::vector<std::string>>();
    const auto counts = container.meta.at("segment_counts").get<std::vector<int>>();
    if (ids.size() != counts.size()) {
      throw DataError(path + ": utterance_ids/segment_counts length mismatch");
    }
    const Eigen::MatrixXd& reps = require_tensor(container, "reps", path);
    if (reps.rows() != static_cast<Eigen::Index>(ids.size()) || reps.cols() != dim) {
      throw DataError(path + ": representation matrix shape mismatch");
    }
    artifacts.representations.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      artifacts.representations[i].utterance_id = ids[i];
      artifacts.representations[i].segment_count = counts[i];
      artifacts.representations[i].mean = reps.row(static_cast<Eigen::Index>(i)).transpose();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed metadata: " + e.what());
  }

  const Eigen::MatrixXd& center = require_tensor(container, "center", path);
  const Eigen::MatrixXd& vectors = require_tensor(container, "eigenvectors", path);
  const Eigen::MatrixXd& values = require_tensor(container, "eigenvalues", path);
  if (center.rows() != dim || center.cols() != 1 || vectors.rows() != dim ||
      vectors.cols() != dim || values.rows() != dim || values.cols() != 1) {
    throw DataError(path + ": subspace tensor shape mismatch");
  }
  artifacts.subspace.center = center.col(0);
  artifacts.subspace.eigenvectors = vectors;
  artifacts.subspace.eigenvalues = values.col(0);
  return artifacts;
}

}  // namespace lataug
