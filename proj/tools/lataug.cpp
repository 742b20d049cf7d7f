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

#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "lataug/augment.hpp"
#include "lataug/checkpoint.hpp"
#include "lataug/common.hpp"
#include "lataug/dsp.hpp"
#include "lataug/eval.hpp"
#include "lataug/feature_archive.hpp"
#include "lataug/latent.hpp"
#include "lataug/manifest.hpp"
#include "lataug/model.hpp"
#include "lataug/trainer.hpp"
#include "lataug/wav.hpp"

// Subcommand front end over the library pipeline:
//   extract -> train -> analyze -> augment -> evaluate
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

namespace {

using lataug::AnalysisArtifacts;
using lataug::AugmentMode;
using lataug::Corpus;
using lataug::DataError;
using lataug::Domain;
using lataug::DspConfig;
using lataug::FeatureArchive;
using lataug::Manifest;
using lataug::NormStats;
using lataug::NuisanceRepresentation;
using lataug::NumericError;
using lataug::PerturbationSpec;
using lataug::ReconstructSpec;
using lataug::ReplacementSpec;
using lataug::TrainConfig;
using lataug::Trainer;
using lataug::TrainerCheckpoint;
using lataug::Utterance;
using lataug::VaeConfig;

// "source" | "target" | "all" -> optional filter.
std::optional<Domain> parse_domain_filter(const std::string& name) {
  if (name == "all") return std::nullopt;
  return lataug::parse_domain(name);
}

std::vector<Utterance> filter_by_domain(const std::vector<Utterance>& utterances,
                                        const std::optional<Domain>& keep) {
  if (!keep.has_value()) return utterances;
  std::vector<Utterance> out;
  for (const Utterance& u : utterances) {
    if (u.domain == *keep) out.push_back(u);
  }
  return out;
}

struct ExtractArgs {
  std::string manifest_path;
  std::string out_archive;
  std::string out_stats;
  DspConfig dsp;
};

int run_extract(const ExtractArgs& args) {
  args.dsp.validate();
  const Manifest manifest = lataug::read_manifest(args.manifest_path);
  if (manifest.entries.empty()) throw DataError("manifest has no entries");

  FeatureArchive archive;
  archive.header.feature_dim = static_cast<std::uint32_t>(args.dsp.n_mels);
  archive.header.frame_shift_ms = static_cast<std::uint32_t>(args.dsp.frame_shift_ms);
  archive.header.frame_length_ms = static_cast<std::uint32_t>(args.dsp.frame_length_ms);
  archive.utterances.reserve(manifest.entries.size());

  for (const lataug::ManifestEntry& entry : manifest.entries) {
    if (!entry.audio_path.has_value()) {
      throw DataError("utterance " + entry.id + ": manifest entry has no audio path");
    }
    Utterance utt;
    utt.id = entry.id;
    utt.domain = entry.domain;
    utt.transcript = entry.transcript;
    try {
      const lataug::WavData wav = lataug::read_wav(*entry.audio_path);
      utt.frames = lataug::extract_fbank(wav.samples, wav.sample_rate, args.dsp);
    } catch (const DataError& e) {
      throw DataError("utterance " + entry.id + ": " + e.what());
    }
    archive.utterances.push_back(std::move(utt));
  }

  lataug::write_feature_archive(archive, args.out_archive);
  const NormStats stats = lataug::compute_norm_stats(archive.utterances);
  lataug::save_norm_stats(stats, args.out_stats);
  std::fprintf(stderr, "extract: %zu utterances -> %s\n", archive.utterances.size(),
               args.out_archive.c_str());
  return 0;
}

struct TrainArgs {
  std::string archive_path;
  std::string manifest_path;
  std::string stats_path;
  std::string out_checkpoint;
  std::string history_csv;
  std::string resume_path;
  std::string domain = "all";
  int epochs = 0;  // per-invocation cap; 0 = up to config.max_epochs
  bool feature_dim_given = false;
  VaeConfig arch;
  TrainConfig config;
};

int run_train(const TrainArgs& args) {
  const Corpus corpus = lataug::load_corpus(args.archive_path, args.manifest_path);
  const std::vector<Utterance> selected =
      filter_by_domain(corpus.utterances, parse_domain_filter(args.domain));
  if (selected.empty()) throw DataError("no utterances left after domain filter");

  TrainerCheckpoint checkpoint;
  bool fresh = args.resume_path.empty();
  if (fresh) {
    if (args.stats_path.empty()) throw DataError("fresh training runs require --stats");
    checkpoint.norm_stats = lataug::load_norm_stats(args.stats_path);
  } else {
    checkpoint = lataug::load_checkpoint(args.resume_path);
    if (checkpoint.state.stopped) {
      std::fprintf(stderr, "train: checkpoint already stopped at epoch %d\n",
                   checkpoint.state.epoch);
    }
  }
  VaeConfig arch = fresh ? args.arch : checkpoint.state.model.config;
  if (fresh && !args.feature_dim_given) {
    arch.feature_dim = static_cast<int>(corpus.header.feature_dim);
  }
  if (arch.feature_dim != static_cast<int>(corpus.header.feature_dim)) {
    throw DataError("archive feature dim " + std::to_string(corpus.header.feature_dim) +
                    " does not match model feature dim " + std::to_string(arch.feature_dim));
  }
  const TrainConfig& config = fresh ? args.config : checkpoint.state.config;

  std::vector<lataug::Segment> all_segments;
  for (const Utterance& utt : selected) {
    const Eigen::MatrixXd normalized = lataug::normalize_frames(utt.frames, checkpoint.norm_stats);
    std::vector<lataug::Segment> segs =
        lataug::segment_utterance(normalized, utt.id, arch.segment_len);
    for (lataug::Segment& s : segs) all_segments.push_back(std::move(s));
  }

  std::vector<lataug::Segment> train_segments;
  std::vector<lataug::Segment> dev_segments;
  lataug::split_segments(all_segments, config.dev_fraction, config.seed, &train_segments,
                         &dev_segments);
  std::fprintf(stderr, "train: %zu train / %zu dev segments\n", train_segments.size(),
               dev_segments.size());

  Trainer trainer = fresh ? Trainer(arch, config, std::move(train_segments),
                                    std::move(dev_segments))
                          : Trainer(std::move(checkpoint.state), std::move(train_segments),
                                    std::move(dev_segments));

  const int budget = args.epochs > 0 ? args.epochs : config.max_epochs;
  try {
    const std::vector<lataug::EpochStats> run_stats = trainer.run(budget);
    for (const lataug::EpochStats& s : run_stats) {
      std::fprintf(stderr,
                   "epoch %d train_elbo %.6f dev_elbo %.6f kl %.6f recon %.6f\n",
                   s.epoch, s.train_elbo, s.dev_elbo, s.dev_kl, s.dev_recon);
    }
  } catch (const NumericError&) {
    // Persist what survived before reporting the failure.
    TrainerCheckpoint out{trainer.state(), checkpoint.norm_stats};
    lataug::save_checkpoint(out, args.out_checkpoint);
    if (!args.history_csv.empty()) {
      lataug::write_history_csv(trainer.history(), args.history_csv);
    }
    throw;
  }

  TrainerCheckpoint out{trainer.state(), checkpoint.norm_stats};
  lataug::save_checkpoint(out, args.out_checkpoint);
  if (!args.history_csv.empty()) {
    lataug::write_history_csv(trainer.history(), args.history_csv);
  }
  std::fprintf(stderr, "train: checkpoint -> %s (epoch %d, stopped=%d)\n",
               args.out_checkpoint.c_str(), trainer.state().epoch,
               trainer.state().stopped ? 1 : 0);
  return 0;
}

struct AnalyzeArgs {
  std::string checkpoint_path;
  std::string archive_path;
  std::string manifest_path;  // optional; required for a domain filter
  std::string out_analysis;
  std::string eigen_csv;
  std::string domain = "all";
  int threads = 1;
};

int run_analyze(const AnalyzeArgs& args) {
  const TrainerCheckpoint checkpoint = lataug::load_checkpoint(args.checkpoint_path);
  const lataug::VaeModel& model = checkpoint.state.best_model;

  std::vector<Utterance> utterances;
  if (!args.manifest_path.empty()) {
    Corpus corpus = lataug::load_corpus(args.archive_path, args.manifest_path);
    utterances = std::move(corpus.utterances);
  } else {
    if (args.domain != "all") throw DataError("domain filter requires a manifest");
    utterances = lataug::read_feature_archive(args.archive_path).utterances;
  }
  utterances = filter_by_domain(utterances, parse_domain_filter(args.domain));
  for (Utterance& utt : utterances) {
    utt.frames = lataug::normalize_frames(utt.frames, checkpoint.norm_stats);
  }

  AnalysisArtifacts artifacts;
  artifacts.representations =
      lataug::corpus_nuisance_representations(model, utterances, args.threads);
  artifacts.subspace = lataug::fit_nuisance_subspace(artifacts.representations);
  lataug::save_analysis(artifacts, args.out_analysis);
  if (!args.eigen_csv.empty()) {
    lataug::write_eigen_spectrum_csv(artifacts.subspace, args.eigen_csv);
  }
  std::fprintf(stderr, "analyze: %zu representations -> %s\n",
               artifacts.representations.size(), args.out_analysis.c_str());
  return 0;
}

struct AugmentArgs {
  std::string checkpoint_path;
  std::string analysis_path;
  std::string archive_path;
  std::string manifest_path;
  std::string out_archive;
  std::string out_manifest;
  std::string mode = "reconstruct";
  std::string pool = "target";
  std::string variant = "soft";
  std::string domain = "all";
  double gamma = 1.0;
  int rank = 1;
  std::uint64_t seed = 0;
  int fold = 1;
  int threads = 1;
  bool stochastic_encode = false;
};

int run_augment(const AugmentArgs& args) {
  const TrainerCheckpoint checkpoint = lataug::load_checkpoint(args.checkpoint_path);
  const AnalysisArtifacts analysis = lataug::load_analysis(args.analysis_path);
  const Corpus corpus = lataug::load_corpus(args.archive_path, args.manifest_path);
  const std::vector<Utterance> selected =
      filter_by_domain(corpus.utterances, parse_domain_filter(args.domain));
  if (selected.empty()) throw DataError("no utterances left after domain filter");
  if (args.fold < 1) throw DataError("fold must be >= 1");

  // Partner domains come from the manifest backing the analysis inputs; ids
  // missing there cannot join a replacement pool.
  std::unordered_map<std::string, Domain> rep_domains;
  for (const NuisanceRepresentation& rep : analysis.representations) {
    const lataug::ManifestEntry* entry = corpus.manifest.find(rep.utterance_id);
    if (entry != nullptr) rep_domains.emplace(rep.utterance_id, entry->domain);
  }

  AugmentMode mode;
  if (args.mode == "reconstruct") {
    mode = ReconstructSpec{args.seed};
  } else if (args.mode == "replace") {
    ReplacementSpec spec;
    spec.pool = lataug::parse_domain(args.pool);
    spec.seed = args.seed;
    mode = spec;
  } else if (args.mode == "perturb") {
    PerturbationSpec spec;
    spec.variant = lataug::parse_perturb_variant(args.variant);
    spec.gamma = args.gamma;
    spec.rank = args.rank;
    spec.seed = args.seed;
    mode = spec;
  } else {
    throw DataError("unknown augmentation mode: " + args.mode);
  }

  std::vector<Corpus> passes;
  passes.reserve(static_cast<std::size_t>(args.fold));
  for (int k = 0; k < args.fold; ++k) {
    passes.push_back(lataug::augment_corpus(
        checkpoint.state.best_model, selected, checkpoint.norm_stats,
        analysis.representations, rep_domains, analysis.subspace, mode,
        args.stochastic_encode, static_cast<std::uint64_t>(k), args.threads));
  }
  const Corpus result = args.fold == 1 ? std::move(passes.front())
                                       : lataug::concat_corpora(passes);
  lataug::save_corpus(result, args.out_archive, args.out_manifest);
  std::fprintf(stderr, "augment: %zu records -> %s\n", result.utterances.size(),
               args.out_archive.c_str());
  return 0;
}

struct EvalReconArgs {
  std::string checkpoint_path;
  std::string archive_path;
  std::string out_csv;
  int threads = 1;
};

int run_eval_recon(const EvalReconArgs& args) {
  const TrainerCheckpoint checkpoint = lataug::load_checkpoint(args.checkpoint_path);
  const FeatureArchive archive = lataug::read_feature_archive(args.archive_path);
  const lataug::ReconstructionReport report = lataug::reconstruction_report(
      checkpoint.state.best_model, archive.utterances, checkpoint.norm_stats, args.threads);
  if (!args.out_csv.empty()) lataug::write_reconstruction_csv(report, args.out_csv);
  std::printf("mean_mse %.17g\nmedian_mse %.17g\n", report.mean_mse, report.median_mse);
  return 0;
}

struct EvalShiftArgs {
  std::string archive_a;
  std::string archive_b;
  std::string out_csv;
};

int run_eval_shift(const EvalShiftArgs& args) {
  const FeatureArchive a = lataug::read_feature_archive(args.archive_a);
  const FeatureArchive b = lataug::read_feature_archive(args.archive_b);
  const lataug::DomainShiftReport report =
      lataug::domain_shift_report(a.utterances, b.utterances);
  if (!args.out_csv.empty()) lataug::write_domain_shift_csv(report, args.out_csv);
  std::printf("domain_shift_score %.17g\n", report.score);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space speech data augmentation toolkit"};
  app.require_subcommand(1);

  ExtractArgs extract_args;
  CLI::App* extract = app.add_subcommand(
      "extract", "Extract log-mel filterbank features from a WAV manifest");
  extract->add_option("--manifest", extract_args.manifest_path, "input manifest JSON")
      ->required();
  extract->add_option("--out", extract_args.out_archive, "output feature archive")->required();
  extract->add_option("--stats", extract_args.out_stats, "output normalization stats JSON")
      ->required();
  extract->add_option("--frame-length-ms", extract_args.dsp.frame_length_ms,
                      "analysis window length")->capture_default_str();
  extract->add_option("--frame-shift-ms", extract_args.dsp.frame_shift_ms, "frame shift")->capture_default_str();
  extract->add_option("--n-mels", extract_args.dsp.n_mels, "mel filterbank size")->capture_default_str();
  extract->add_option("--fft-size", extract_args.dsp.fft_size, "FFT length (power of two)")->capture_default_str();
  extract->add_option("--sample-rate", extract_args.dsp.sample_rate, "expected sample rate")->capture_default_str();
  extract->add_option("--log-floor", extract_args.dsp.log_floor, "power floor before log")->capture_default_str();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train the sequence VAE on a feature archive");
  train->add_option("--archive", train_args.archive_path, "input feature archive")->required();
  train->add_option("--manifest", train_args.manifest_path, "input manifest JSON")->required();
  train->add_option("--stats", train_args.stats_path, "normalization stats JSON (fresh runs)");
  train->add_option("--out", train_args.out_checkpoint, "output checkpoint")->required();
  train->add_option("--history", train_args.history_csv, "output per-epoch history CSV");
  train->add_option("--resume", train_args.resume_path, "checkpoint to continue from");
  train->add_option("--domain", train_args.domain, "train on source|target|all")->capture_default_str();
  train->add_option("--epochs", train_args.epochs,
                    "epoch cap for this invocation (0 = run to stop)")->capture_default_str();
  train->add_option("--latent-dim", train_args.arch.latent_dim, "latent dimensionality")->capture_default_str();
  train->add_option("--hidden", train_args.arch.hidden, "LSTM hidden size")->capture_default_str();
  train->add_option("--encoder-layers", train_args.arch.encoder_layers, "encoder depth")->capture_default_str();
  train->add_option("--decoder-layers", train_args.arch.decoder_layers, "decoder depth")->capture_default_str();
  train->add_option("--segment-len", train_args.arch.segment_len, "frames per segment")->capture_default_str();
  CLI::Option* feature_dim_opt =
      train->add_option("--feature-dim", train_args.arch.feature_dim,
                        "feature channels (default: archive header)");
  train->add_option("--batch-size", train_args.config.batch_size, "minibatch size")->capture_default_str();
  train->add_option("--patience", train_args.config.patience,
                    "epochs without dev improvement before stopping")->capture_default_str();
  train->add_option("--dev-fraction", train_args.config.dev_fraction, "dev split fraction")->capture_default_str();
  train->add_option("--max-epochs", train_args.config.max_epochs, "total epoch cap")->capture_default_str();
  train->add_option("--seed", train_args.config.seed, "master seed")->capture_default_str();
  train->add_option("--lr", train_args.config.adam.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--beta1", train_args.config.adam.beta1, "Adam beta1")->capture_default_str();
  train->add_option("--beta2", train_args.config.adam.beta2, "Adam beta2")->capture_default_str();
  train->add_option("--adam-eps", train_args.config.adam.epsilon, "Adam epsilon")->capture_default_str();
  train->add_option("--l2", train_args.config.adam.l2_weight, "L2 regularization strength")->capture_default_str();

  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Fit per-utterance nuisance representations and their PCA subspace");
  analyze->add_option("--checkpoint", analyze_args.checkpoint_path, "trained checkpoint")
      ->required();
  analyze->add_option("--archive", analyze_args.archive_path, "input feature archive")
      ->required();
  analyze->add_option("--manifest", analyze_args.manifest_path, "input manifest JSON");
  analyze->add_option("--out", analyze_args.out_analysis, "output analysis file")->required();
  analyze->add_option("--eigen-csv", analyze_args.eigen_csv, "output eigenvalue spectrum CSV");
  analyze->add_option("--domain", analyze_args.domain, "fit on source|target|all")->capture_default_str();
  analyze->add_option("--threads", analyze_args.threads, "worker threads")->capture_default_str();

  AugmentArgs augment_args;
  CLI::App* augment = app.add_subcommand(
      "augment", "Generate an augmented corpus through the trained VAE");
  augment->add_option("--checkpoint", augment_args.checkpoint_path, "trained checkpoint")
      ->required();
  augment->add_option("--analysis", augment_args.analysis_path, "analysis file")->required();
  augment->add_option("--archive", augment_args.archive_path, "input feature archive")
      ->required();
  augment->add_option("--manifest", augment_args.manifest_path, "input manifest JSON")
      ->required();
  augment->add_option("--out", augment_args.out_archive, "output feature archive")->required();
  augment->add_option("--out-manifest", augment_args.out_manifest, "output manifest JSON")
      ->required();
  augment->add_option("--mode", augment_args.mode, "reconstruct|replace|perturb")->capture_default_str();
  augment->add_option("--pool", augment_args.pool, "replacement partner domain")->capture_default_str();
  augment->add_option("--variant", augment_args.variant, "soft|uniform|reverse|hard")->capture_default_str();
  augment->add_option("--gamma", augment_args.gamma, "perturbation ratio")->capture_default_str();
  augment->add_option("--rank", augment_args.rank, "directions kept by the hard variant")->capture_default_str();
  augment->add_option("--domain", augment_args.domain, "augment source|target|all utterances")->capture_default_str();
  augment->add_option("--seed", augment_args.seed, "master seed")->capture_default_str();
  augment->add_option("--fold", augment_args.fold,
                      "output size as a multiple of the input corpus")->capture_default_str();
  augment->add_option("--threads", augment_args.threads, "worker threads")->capture_default_str();
  augment->add_flag("--stochastic-encode", augment_args.stochastic_encode,
                    "sample latents instead of using posterior means");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluation reports");
  evaluate->require_subcommand(1);

  EvalReconArgs recon_args;
  CLI::App* recon = evaluate->add_subcommand(
      "recon", "Per-utterance reconstruction error under the trained model");
  recon->add_option("--checkpoint", recon_args.checkpoint_path, "trained checkpoint")
      ->required();
  recon->add_option("--archive", recon_args.archive_path, "input feature archive")->required();
  recon->add_option("--out", recon_args.out_csv, "output CSV");
  recon->add_option("--threads", recon_args.threads, "worker threads")->capture_default_str();

  EvalShiftArgs shift_args;
  CLI::App* shift = evaluate->add_subcommand(
      "shift", "Symmetric-KL domain-shift score between two feature archives");
  shift->add_option("--archive-a", shift_args.archive_a, "first feature archive")->required();
  shift->add_option("--archive-b", shift_args.archive_b, "second feature archive")->required();
  shift->add_option("--out", shift_args.out_csv, "output per-channel CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  train_args.feature_dim_given = feature_dim_opt->count() > 0;

  try {
    if (app.got_subcommand(extract)) return run_extract(extract_args);
    if (app.got_subcommand(train)) return run_train(train_args);
    if (app.got_subcommand(analyze)) return run_analyze(analyze_args);
    if (app.got_subcommand(augment)) return run_augment(augment_args);
    if (app.got_subcommand(evaluate)) {
      if (evaluate->got_subcommand(recon)) return run_eval_recon(recon_args);
      if (evaluate->got_subcommand(shift)) return run_eval_shift(shift_args);
    }
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
