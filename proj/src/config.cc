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

#include "napt/config.h"

#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"

namespace napt {
namespace {

using json = nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      const auto x = v->get<int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(field(key), "out of range");
      out = int(x);
    }
  }
  void get(const std::string& key, uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
      out = v->get<uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Rethrows enum parse errors under the full field path.
template <typename F>
auto parse_enum(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(field, std::string(e.what()).substr(e.field().size() + 2));
  }
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

json pase_json(const PaseEncoderConfig& c, const std::string& preset) {
  json blocks = json::array();
  for (const auto& b : c.conv_blocks) blocks.push_back({b.channels, b.kernel, b.stride});
  return {{"preset", preset},           {"sinc_filters", c.sinc_filters},
          {"sinc_kernel", c.sinc_kernel}, {"sinc_stride", c.sinc_stride},
          {"conv_blocks", blocks},        {"projection_dim", c.projection_dim}};
}

}  // namespace

void RunConfig::validate() const {
  require(frames.hop_samples == 160, "frames.hop_samples", "must be 160 (10 ms)");
  require(frames.n_fft == 512, "frames.n_fft", "must be 512 (the LPS worker predicts 257 bins)");
  require(frames.frame_len_samples >= frames.hop_samples && frames.frame_len_samples <= frames.n_fft,
          "frames.frame_len_samples", "must lie in [hop_samples, n_fft]");
  require(frames.n_mels >= 20 && frames.n_mels <= 256, "frames.n_mels", "must lie in [20, 256]");
  require(frames.n_mfcc == 20, "frames.n_mfcc", "must be 20 (the MFCC worker predicts 20)");
  require(pase_preset == "desk" || pase_preset == "paper", "pase.preset", "expected desk or paper");
  pase.validate();
  masked.validate();
  require(masked.input_dim == frames.n_mels, "masked.input_dim", "must equal frames.n_mels");

  const auto& p = pretrain;
  require(p.weights.alpha >= 0, "pretrain.alpha", "must be >= 0");
  require(p.weights.beta >= 0, "pretrain.beta", "must be >= 0");
  require(p.weights.gamma >= 0, "pretrain.gamma", "must be >= 0");
  require(p.epochs >= 0, "pretrain.epochs", "must be >= 0");
  require(p.batch_size >= 2, "pretrain.batch_size", "must be >= 2");
  require(p.adam.lr > 0, "pretrain.lr", "must be > 0");
  require(p.adam.beta1 >= 0 && p.adam.beta1 < 1, "pretrain.beta1", "must lie in [0, 1)");
  require(p.adam.beta2 >= 0 && p.adam.beta2 < 1, "pretrain.beta2", "must lie in [0, 1)");
  require(p.adam.weight_decay >= 0, "pretrain.weight_decay", "must be >= 0");
  require(p.max_steps >= 0, "pretrain.max_steps", "must be >= 0");
  require(p.encoder == EncoderKind::kMasked || !p.workers.empty(), "pretrain.workers",
          "the PASE encoder needs at least one worker");

  require(mos.hidden >= 1, "mos.hidden", "must be >= 1");
  require(mos.dropout >= 0 && mos.dropout < 1, "mos.dropout", "must lie in [0, 1)");
  require(mos.lr > 0, "mos.lr", "must be > 0");
  require(mos.weight_decay >= 0, "mos.weight_decay", "must be >= 0");
  require(mos.batch_size >= 1, "mos.batch_size", "must be >= 1");
  require(mos.epochs >= 0, "mos.epochs", "must be >= 0");
  require(mos.score_min < mos.score_max, "mos.score_range", "min must be below max");
}

std::string config_to_json(const RunConfig& c, bool with_run_dir) {
  json workers = json::array();
  for (WorkerName w : kAllWorkers)
    if (c.pretrain.workers.count(w)) workers.push_back(to_string(w));
  json j = {
      {"seed", c.seed},
      {"frames",
       {{"frame_len_samples", c.frames.frame_len_samples},
        {"hop_samples", c.frames.hop_samples},
        {"n_fft", c.frames.n_fft},
        {"n_mels", c.frames.n_mels},
        {"n_mfcc", c.frames.n_mfcc}}},
      {"pase", pase_json(c.pase, c.pase_preset)},
      {"masked",
       {{"layers", c.masked.layers},
        {"heads", c.masked.heads},
        {"ff_dim", c.masked.ff_dim},
        {"hidden", c.masked.hidden},
        {"dropout", c.masked.dropout},
        {"mask_frac", c.masked.mask_frac},
        {"zero_frac", c.masked.zero_frac},
        {"random_frac", c.masked.random_frac},
        {"keep_frac", c.masked.keep_frac},
        {"loss_masked_only", c.masked.loss_masked_only}}},
      {"pretrain",
       {{"alpha", c.pretrain.weights.alpha},
        {"beta", c.pretrain.weights.beta},
        {"gamma", c.pretrain.weights.gamma},
        {"sign_convention", to_string(c.pretrain.weights.sign)},
        {"epochs", c.pretrain.epochs},
        {"batch_size", c.pretrain.batch_size},
        {"encoder", to_string(c.pretrain.encoder)},
        {"workers", workers},
        {"lr", c.pretrain.adam.lr},
        {"beta1", c.pretrain.adam.beta1},
        {"beta2", c.pretrain.adam.beta2},
        {"weight_decay", c.pretrain.adam.weight_decay},
        {"max_steps", c.pretrain.max_steps}}},
      {"mos",
       {{"hidden", c.mos.hidden},
        {"dropout", c.mos.dropout},
        {"lr", c.mos.lr},
        {"weight_decay", c.mos.weight_decay},
        {"batch_size", c.mos.batch_size},
        {"epochs", c.mos.epochs},
        {"score_range", {c.mos.score_min, c.mos.score_max}},
        {"pooling", "mean"}}},
  };
  if (with_run_dir) j["run_dir"] = c.run_dir;
  return j.dump();
}

RunConfig config_from_json(const std::string& text, const std::string& overrides) {
  json j;
  try {
    j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
    const json patch = json::parse(overrides);
    if (!j.is_object()) throw ConfigError("<file>", "the top level must be an object");
    if (!patch.is_object()) throw ConfigError("<overrides>", "the top level must be an object");
    j.merge_patch(patch);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  root.get("run_dir", c.run_dir);

  if (const json* v = root.take("frames")) {
    Section s(*v, "frames");
    s.get("frame_len_samples", c.frames.frame_len_samples);
    s.get("hop_samples", c.frames.hop_samples);
    s.get("n_fft", c.frames.n_fft);
    s.get("n_mels", c.frames.n_mels);
    s.get("n_mfcc", c.frames.n_mfcc);
    s.finish();
  }
  c.masked.input_dim = c.frames.n_mels;

  if (const json* v = root.take("pase")) {
    Section s(*v, "pase");
    s.get("preset", c.pase_preset);
    require(c.pase_preset == "desk" || c.pase_preset == "paper", "pase.preset",
            "expected desk or paper");
    c.pase = c.pase_preset == "paper" ? PaseEncoderConfig::paper() : PaseEncoderConfig::desk();
    s.get("sinc_filters", c.pase.sinc_filters);
    s.get("sinc_kernel", c.pase.sinc_kernel);
    s.get("sinc_stride", c.pase.sinc_stride);
    s.get("projection_dim", c.pase.projection_dim);
    if (const json* b = s.take("conv_blocks")) {
      require(b->is_array(), "pase.conv_blocks", "expected a list of [channels, kernel, stride]");
      c.pase.conv_blocks.clear();
      for (const json& e : *b) {
        require(e.is_array() && e.size() == 3 && e[0].is_number_integer() &&
                    e[1].is_number_integer() && e[2].is_number_integer(),
                "pase.conv_blocks", "expected a list of [channels, kernel, stride]");
        c.pase.conv_blocks.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
      }
    }
    s.finish();
  }

  if (const json* v = root.take("masked")) {
    Section s(*v, "masked");
    s.get("layers", c.masked.layers);
    s.get("heads", c.masked.heads);
    s.get("ff_dim", c.masked.ff_dim);
    s.get("hidden", c.masked.hidden);
    s.get("dropout", c.masked.dropout);
    s.get("mask_frac", c.masked.mask_frac);
    s.get("zero_frac", c.masked.zero_frac);
    s.get("random_frac", c.masked.random_frac);
    s.get("keep_frac", c.masked.keep_frac);
    s.get("loss_masked_only", c.masked.loss_masked_only);
    s.finish();
  }

  if (const json* v = root.take("pretrain")) {
    Section s(*v, "pretrain");
    auto& p = c.pretrain;
    s.get("alpha", p.weights.alpha);
    s.get("beta", p.weights.beta);
    s.get("gamma", p.weights.gamma);
    std::string sign = to_string(p.weights.sign), enc = to_string(p.encoder);
    s.get("sign_convention", sign);
    p.weights.sign = parse_enum("pretrain.sign_convention",
                                [&] { return sign_convention_from_string(sign); });
    s.get("encoder", enc);
    p.encoder = parse_enum("pretrain.encoder", [&] { return encoder_kind_from_string(enc); });
    s.get("epochs", p.epochs);
    s.get("batch_size", p.batch_size);
    s.get("lr", p.adam.lr);
    s.get("beta1", p.adam.beta1);
    s.get("beta2", p.adam.beta2);
    s.get("weight_decay", p.adam.weight_decay);
    s.get("max_steps", p.max_steps);
    if (const json* w = s.take("workers")) {
      std::string list;
      if (w->is_string()) {
        list = w->get<std::string>();
      } else {
        require(w->is_array(), "pretrain.workers", "expected a list of worker names");
        for (const json& e : *w) {
          require(e.is_string(), "pretrain.workers", "expected a list of worker names");
          list += e.get<std::string>() + ",";
        }
      }
      p.workers = parse_enum("pretrain.workers", [&] { return parse_worker_list(list); });
    }
    s.finish();
  }

  if (const json* v = root.take("mos")) {
    Section s(*v, "mos");
    s.get("hidden", c.mos.hidden);
    s.get("dropout", c.mos.dropout);
    s.get("lr", c.mos.lr);
    s.get("weight_decay", c.mos.weight_decay);
    s.get("batch_size", c.mos.batch_size);
    s.get("epochs", c.mos.epochs);
    if (const json* r = s.take("score_range")) {
      require(r->is_array() && r->size() == 2 && (*r)[0].is_number() && (*r)[1].is_number(),
              "mos.score_range", "expected [min, max]");
      c.mos.score_min = (*r)[0].get<double>();
      c.mos.score_max = (*r)[1].get<double>();
    }
    std::string pooling = "mean";
    s.get("pooling", pooling);
    require(pooling == "mean", "mos.pooling", "only mean pooling is supported");
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigError("<file>", "cannot read " + path.string());
    text.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }
  return config_from_json(text, overrides);
}

std::string config_digest(const RunConfig& cfg) {
  return hex16(fnv1a64(config_to_json(cfg, false)));
}

}  // namespace napt
