// Copyright 2026 The napt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "napt/evaluation.h"

#ifndef NAPT_VERSION
#define NAPT_VERSION "unknown"
#endif

namespace napt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Writes to two streams at once.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == EOF) return !EOF;
    const int r1 = a_->sputc(char(c)), r2 = b_->sputc(char(c));
    return r1 == EOF || r2 == EOF ? EOF : c;
  }
  int sync() override { return a_->pubsync() | b_->pubsync(); }

 private:
  std::streambuf *a_, *b_;
};

// Options every subcommand accepts.
struct Common {
  std::string config;
  std::optional<uint64_t> seed;
  std::string run_dir;
  std::string set;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file (missing keys keep defaults)");
  app->add_option("--seed", c.seed, "Global seed");
  app->add_option("--run-dir", c.run_dir,
                  std::string("Directory for run.json and logs (default: $") + kRunDirEnv +
                      ", else the output's directory)");
  app->add_option("--set", c.set, "JSON merge patch applied after the config file");
}

template <typename T>
void put(json& patch, const std::string& section, const std::string& key,
         const std::optional<T>& v) {
  if (v) patch[section][key] = *v;
}

RunConfig resolve(const Common& c, json patch) {
  if (!c.set.empty()) {
    json extra;
    try {
      extra = json::parse(c.set);
    } catch (const json::parse_error& e) {
      throw ConfigError("--set", std::string("invalid JSON: ") + e.what());
    }
    // Explicit flags win over --set.
    extra.merge_patch(patch);
    patch = extra;
  }
  if (c.seed) patch["seed"] = *c.seed;
  if (patch.is_null()) patch = json::object();
  return c.config.empty() ? config_from_json("{}", patch.dump())
                          : load_config(c.config, patch.dump());
}

fs::path run_dir_for(const Common& c, const fs::path& out) {
  if (!c.run_dir.empty()) return c.run_dir;
  if (const char* env = std::getenv(kRunDirEnv); env && *env) return env;
  const fs::path parent = out.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void write_run_record(const fs::path& dir, const std::string& command, const RunConfig& cfg,
                      int argc, const char* const* argv) {
  fs::create_directories(dir);
  json args = json::array();
  for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
  const json j = {
      {"command", command},
      {"config_digest", config_digest(cfg)},
      {"seed", cfg.seed},
      {"config", json::parse(config_to_json(cfg))},
      {"argv", args},
      {"versions",
       {{"napt", NAPT_VERSION},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
        {"checkpoint_format", Checkpoint::kVersion}}}};
  write_file_atomic(dir / "run.json", j.dump(2) + "\n");
}

// Digest sidecar for outputs whose format has no room for one.
void write_sidecar(const fs::path& artifact, const RunConfig& cfg, const std::string& command) {
  const json j = {{"artifact", artifact.filename().string()},
                  {"command", command},
                  {"config_digest", config_digest(cfg)},
                  {"seed", cfg.seed}};
  write_file_atomic(artifact.string() + ".meta.json", j.dump() + "\n");
}

// Tees `out` into <run_dir>/<name> for the lifetime of the object.
class RunLog {
 public:
  RunLog(std::ostream& out, const fs::path& dir, const std::string& name)
      : file_(dir / name), tee_(out.rdbuf(), file_.rdbuf()), stream_(&tee_) {}
  std::ostream& stream() { return stream_; }

 private:
  std::ofstream file_;
  TeeBuf tee_;
  std::ostream stream_;
};

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noise-aware self-supervised speech encoders and MOS prediction", "napt"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NAPT_VERSION);
  Common common;

  // synth
  auto* synth = app.add_subcommand("synth", "Build a mixture manifest or the toy corpus");
  add_common(synth, common);
  bool toy = false;
  std::string clean_dir, noise_dir, synth_out;
  std::size_t n_records = 100;
  double clean_frac = 0.2, eval_frac = 0.1;
  synth->add_flag("--toy", toy, "Generate the synthetic toy corpus into --out");
  synth->add_option("--clean-dir", clean_dir, "Directory of clean WAV files");
  synth->add_option("--noise-dir", noise_dir, "Directory of <tag>/*.wav noise files");
  synth->add_option("--n", n_records, "Number of mixtures");
  synth->add_option("--clean-frac", clean_frac, "Fraction of clean records")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--eval-frac", eval_frac, "Fraction of eval records")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--out", synth_out, "Manifest path, or output directory with --toy")->required();

  // features
  auto* feats = app.add_subcommand("features", "Compute one feature matrix for a WAV file");
  add_common(feats, common);
  std::string feat_in, feat_kind, feat_out;
  feats->add_option("--input", feat_in, "Input WAV")->required();
  feats->add_option("--kind", feat_kind, "mel, lps, mfcc or prosody")->required();
  feats->add_option("--out", feat_out, "Output feature file")->required();

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Pre-train an encoder with its workers");
  add_common(pre, common);
  std::string manifest, pre_out, log_name = "pretrain.log.jsonl";
  std::optional<std::string> encoder, workers, sign;
  std::optional<double> alpha, beta, gamma, lr;
  std::optional<int> epochs, batch_size, max_steps;
  pre->add_option("--manifest", manifest, "Mixture manifest")->required();
  pre->add_option("--encoder", encoder, "pase or masked");
  pre->add_option("--workers", workers, "all, ssl, noise or a comma list of worker names");
  pre->add_option("--alpha", alpha, "Spectral-energy worker weight");
  pre->add_option("--beta", beta, "Noise-category worker weight");
  pre->add_option("--gamma", gamma, "SNR worker weight");
  pre->add_option("--sign", sign, "additive or literal");
  pre->add_option("--epochs", epochs, "Epochs");
  pre->add_option("--batch-size", batch_size, "Batch size");
  pre->add_option("--lr", lr, "Learning rate");
  pre->add_option("--max-steps", max_steps, "Stop after this many steps (0: no limit)");
  pre->add_option("--out", pre_out, "Checkpoint path")->required();

  // train-mos
  auto* tmos = app.add_subcommand("train-mos", "Train the MOS head on a frozen encoder");
  add_common(tmos, common);
  std::string enc_ckpt, mos_manifest, tmos_out;
  std::optional<std::string> expect_encoder;
  std::optional<int> mos_epochs, mos_batch;
  std::optional<double> mos_lr;
  tmos->add_option("--encoder-ckpt", enc_ckpt, "Pre-trained encoder checkpoint")->required();
  tmos->add_option("--mos-manifest", mos_manifest, "MOS training manifest")->required();
  tmos->add_option("--encoder", expect_encoder, "Fail unless the checkpoint holds this encoder");
  tmos->add_option("--epochs", mos_epochs, "Epochs");
  tmos->add_option("--batch-size", mos_batch, "Batch size");
  tmos->add_option("--lr", mos_lr, "Learning rate");
  tmos->add_option("--out", tmos_out, "MOS head checkpoint path")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "Score a MOS test manifest");
  add_common(ev, common);
  std::string ev_enc, ev_mos, ev_manifest, ev_out;
  ev->add_option("--encoder-ckpt", ev_enc, "Encoder checkpoint")->required();
  ev->add_option("--mos-ckpt", ev_mos, "MOS head checkpoint")->required();
  ev->add_option("--manifest", ev_manifest, "MOS test manifest")->required();
  ev->add_option("--out", ev_out, "Report path (JSON)")->required();

  // ablate
  auto* ab = app.add_subcommand("ablate", "Run the worker ablation table");
  add_common(ab, common);
  std::string spec_path, ab_out, ab_manifest, ab_mos_train, ab_mos_test, work_dir;
  std::optional<std::string> ab_encoder;
  std::optional<int> ab_epochs, ab_max_steps;
  ab->add_option("--spec", spec_path, "Ablation spec JSON (default: the full table)");
  ab->add_option("--manifest", ab_manifest, "Pre-training manifest")->required();
  ab->add_option("--mos-train", ab_mos_train, "MOS training manifest")->required();
  ab->add_option("--mos-test", ab_mos_test, "MOS test manifest")->required();
  ab->add_option("--work-dir", work_dir, "Row checkpoints (default: <out>.rows)");
  ab->add_option("--encoder", ab_encoder, "pase or masked");
  ab->add_option("--epochs", ab_epochs, "Pre-training epochs per row");
  ab->add_option("--max-steps", ab_max_steps, "Pre-training step limit per row");
  ab->add_option("--out", ab_out, "CSV table path")->required();

  if (argc > 1 && argv[1][0] != '-' && !app.get_subcommand_no_throw(argv[1])) {
    err << "napt: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);  // --help, --help-all, --version
  } catch (const CLI::ParseError& e) {
    err << "napt: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    json patch = json::object();
    if (synth->parsed()) {
      const RunConfig cfg = resolve(common, patch);
      const fs::path outp = synth_out;
      fs::path manifest_path;
      if (toy) {
        manifest_path = synth_toy_corpus(outp, cfg.seed);
      } else {
        if (clean_dir.empty() || noise_dir.empty())
          throw ConfigError("synth", "--clean-dir and --noise-dir are required without --toy");
        ManifestOptions o;
        o.n_records = n_records;
        o.clean_fraction = clean_frac;
        o.eval_fraction = eval_frac;
        o.seed = cfg.seed;
        if (!outp.parent_path().empty()) fs::create_directories(outp.parent_path());
        write_manifest(outp, build_manifest(clean_dir, noise_dir, o, outp.parent_path()));
        manifest_path = outp;
      }
      write_sidecar(manifest_path, cfg, "synth");
      write_run_record(run_dir_for(common, manifest_path), "synth", cfg, argc, argv);
      out << manifest_path.string() << "\n";
    } else if (feats->parsed()) {
      const RunConfig cfg = resolve(common, patch);
      const FeatureMatrix f =
          compute_features(load_wav(feat_in), feature_kind_from_string(feat_kind), cfg.frames);
      write_feature_file(feat_out, f);
      write_sidecar(feat_out, cfg, "features");
      write_run_record(run_dir_for(common, feat_out), "features", cfg, argc, argv);
      out << f.frames.rows() << " x " << f.frames.cols() << " " << feat_kind << " -> " << feat_out
          << "\n";
    } else if (pre->parsed()) {
      put(patch, "pretrain", "encoder", encoder);
      put(patch, "pretrain", "workers", workers);
      put(patch, "pretrain", "alpha", alpha);
      put(patch, "pretrain", "beta", beta);
      put(patch, "pretrain", "gamma", gamma);
      put(patch, "pretrain", "sign_convention", sign);
      put(patch, "pretrain", "epochs", epochs);
      put(patch, "pretrain", "batch_size", batch_size);
      put(patch, "pretrain", "lr", lr);
      put(patch, "pretrain", "max_steps", max_steps);
      RunConfig cfg = resolve(common, patch);
      const fs::path dir = run_dir_for(common, pre_out);
      cfg.run_dir = dir.string();
      write_run_record(dir, "pretrain", cfg, argc, argv);
      if (!fs::path(pre_out).parent_path().empty())
        fs::create_directories(fs::path(pre_out).parent_path());
      RunLog log(out, dir, log_name);
      const PretrainResult r = pretrain(manifest, cfg, pre_out, &log.stream());
      out << "checkpoint " << r.checkpoint.string() << " after " << r.steps.size() << " steps\n";
    } else if (tmos->parsed()) {
      put(patch, "mos", "epochs", mos_epochs);
      put(patch, "mos", "batch_size", mos_batch);
      put(patch, "mos", "lr", mos_lr);
      RunConfig cfg = resolve(common, patch);
      const fs::path dir = run_dir_for(common, tmos_out);
      cfg.run_dir = dir.string();
      write_run_record(dir, "train-mos", cfg, argc, argv);
      std::optional<EncoderKind> expected;
      if (expect_encoder) expected = encoder_kind_from_string(*expect_encoder);
      if (!fs::path(tmos_out).parent_path().empty())
        fs::create_directories(fs::path(tmos_out).parent_path());
      RunLog log(out, dir, "train-mos.log.jsonl");
      const MosTrainResult r =
          train_mos(mos_manifest, enc_ckpt, cfg, tmos_out, &log.stream(), expected);
      out << "train mse " << r.train_mse << "; encoder unchanged: "
          << (r.encoder_unchanged ? "yes" : "no") << "\n";
    } else if (ev->parsed()) {
      const EvalReport rep = evaluate(ev_enc, ev_mos, ev_manifest);
      if (!fs::path(ev_out).parent_path().empty())
        fs::create_directories(fs::path(ev_out).parent_path());
      write_file_atomic(ev_out, rep.to_json() + "\n");
      RunConfig cfg = config_from_json(load_checkpoint(ev_mos).config_json);
      if (common.seed) cfg.seed = *common.seed;
      write_run_record(run_dir_for(common, ev_out), "eval", cfg, argc, argv);
      out << rep.to_json() << "\n";
    } else if (ab->parsed()) {
      put(patch, "pretrain", "encoder", ab_encoder);
      put(patch, "pretrain", "epochs", ab_epochs);
      put(patch, "pretrain", "max_steps", ab_max_steps);
      RunConfig cfg = resolve(common, patch);
      AblationSpec spec = AblationSpec::table();
      if (!spec_path.empty()) {
        std::ifstream f(spec_path);
        if (!f) throw Error("cannot read " + spec_path);
        std::stringstream ss;
        ss << f.rdbuf();
        spec = AblationSpec::from_json(ss.str());
      }
      const fs::path outp = ab_out;
      const fs::path dir = run_dir_for(common, outp);
      cfg.run_dir = dir.string();
      write_run_record(dir, "ablate", cfg, argc, argv);
      AblationInputs in{ab_manifest, ab_mos_train, ab_mos_test,
                        work_dir.empty() ? fs::path(outp.string() + ".rows") : fs::path(work_dir)};
      RunLog log(out, dir, "ablate.log.jsonl");
      const auto rows = run_ablation(spec, cfg, in, &log.stream());
      if (!outp.parent_path().empty()) fs::create_directories(outp.parent_path());
      write_file_atomic(outp, ablation_csv(rows));
      write_sidecar(outp, cfg, "ablate");
      int failed = 0;
      for (const auto& r : rows) failed += !r.report;
      out << rows.size() - std::size_t(failed) << " of " << rows.size() << " rows -> "
          << outp.string() << "\n";
      if (failed) {
        err << "napt: " << failed << " ablation row(s) failed\n";
        return 1;
      }
    }
  } catch (const ConfigError& e) {
    err << "napt: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "napt: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace napt::cli
