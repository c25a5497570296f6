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

#include "napt/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace napt {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_pair(const std::vector<double>& a, const std::vector<double>& b, std::size_t min_n) {
  if (a.size() != b.size())
    throw Error("metric inputs differ in length: " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  if (a.size() < min_n)
    throw Error("metric needs at least " + std::to_string(min_n) + " values");
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, 1);
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return s / double(pred.size());
}

std::optional<double> lcc(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, 2);
  return pearson(pred, truth);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double mean_rank = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

std::optional<double> srcc(const std::vector<double>& pred, const std::vector<double>& truth) {
  check_pair(pred, truth, 2);
  return pearson(average_ranks(pred), average_ranks(truth));
}

std::string EvalReport::to_json() const {
  json j = {{"mse", mse}, {"n", n}, {"run_id", run_id}, {"config_digest", config_digest}};
  j["lcc"] = lcc ? json(*lcc) : json(nullptr);
  j["srcc"] = srcc ? json(*srcc) : json(nullptr);
  return j.dump();
}

EvalReport evaluate(const Checkpoint& encoder, const Checkpoint& head,
                    const std::vector<MosRecord>& records, const fs::path& manifest) {
  if (records.empty()) throw Error("evaluation manifest is empty");
  if (head.parent_digest != encoder.digest)
    throw Error("MOS head was trained on encoder " + head.parent_digest + ", not " +
                encoder.digest);
  const auto model = model_from_checkpoint(encoder, false);
  const LoadedMosHead h = load_mos_head(head);
  if (h.head.latent_dim() != model->latent_dim())
    throw Error("MOS head expects latents of width " + std::to_string(h.head.latent_dim()) +
                ", encoder produces " + std::to_string(model->latent_dim()));
  std::vector<double> pred, truth;
  uint64_t id = fnv1a64(encoder.digest + "|" + head.digest + "|");
  for (const TensorEntry& t : head.tensors)
    id = fnv1a64(std::string(reinterpret_cast<const char*>(t.value.data()),
                             sizeof(float) * std::size_t(t.value.size())),
                 id);
  for (const MosRecord& r : records) {
    pred.push_back(mos_forward(model->encode(load_mos_audio(r, manifest)), h.head));
    truth.push_back(r.mos);
    id = fnv1a64(r.id + "|", id);
  }
  EvalReport rep;
  rep.mse = mse(pred, truth);
  rep.n = int(records.size());
  if (records.size() >= 2) {
    rep.lcc = lcc(pred, truth);
    rep.srcc = srcc(pred, truth);
  }
  rep.run_id = hex16(id);
  rep.config_digest = head.digest;
  return rep;
}

EvalReport evaluate(const fs::path& encoder_ckpt, const fs::path& head_ckpt,
                    const fs::path& manifest) {
  return evaluate(load_checkpoint(encoder_ckpt), load_checkpoint(head_ckpt),
                  read_mos_manifest(manifest), manifest);
}

AblationSpec AblationSpec::table() {
  using W = WorkerName;
  const std::set<W> noise = {W::kEnergy, W::kCategory, W::kSnr};
  auto without = [&](std::initializer_list<W> extra) {
    std::set<W> s = noise;
    s.insert(extra);
    return s;
  };
  return {{
      {"PASE baseline", noise},
      {"- waveform", without({W::kWaveform})},
      {"- LPS", without({W::kLps})},
      {"- MFCC", without({W::kMfcc})},
      {"- Prosody", without({W::kProsody})},
      {"- SPC", without({W::kSpc})},
      {"- GIM", without({W::kGim})},
      {"- LIM", without({W::kLim})},
      {"PASE + Noise workers", {}},
      {"- SNR", {W::kSnr}},
      {"- Category of noise", {W::kCategory}},
      {"- Spectral Energy Distribution", {W::kEnergy}},
      {"- MFCC, SNR", {W::kMfcc, W::kSnr}},
  }};
}

AblationSpec AblationSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<spec>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<spec>", "the top level must be an object");
  for (const auto& [k, v] : j.items())
    if (k != "rows") throw ConfigError(k, "unknown key");
  if (!j.contains("rows")) return table();
  if (!j["rows"].is_array()) throw ConfigError("rows", "must be a list");
  AblationSpec spec;
  for (std::size_t i = 0; i < j["rows"].size(); ++i) {
    const json& r = j["rows"][i];
    const std::string where = "rows[" + std::to_string(i) + "]";
    if (!r.is_object()) throw ConfigError(where, "must be an object");
    for (const auto& [k, v] : r.items())
      if (k != "label" && k != "remove") throw ConfigError(where + "." + k, "unknown key");
    if (!r.contains("label") || !r["label"].is_string())
      throw ConfigError(where + ".label", "must be a string");
    AblationRow row{r["label"].get<std::string>(), {}};
    if (r.contains("remove")) {
      if (!r["remove"].is_array()) throw ConfigError(where + ".remove", "must be a list");
      for (const json& w : r["remove"]) {
        if (!w.is_string()) throw ConfigError(where + ".remove", "worker names are strings");
        try {
          row.removed.insert(worker_from_string(w.get<std::string>()));
        } catch (const ConfigError& e) {
          throw ConfigError(where + ".remove", e.what());
        }
      }
    }
    spec.rows.push_back(std::move(row));
  }
  if (spec.rows.empty()) throw ConfigError("rows", "needs at least one row");
  return spec;
}

std::string AblationSpec::to_json() const {
  json j = json::array();
  for (const AblationRow& r : rows) {
    json names = json::array();
    for (WorkerName w : r.removed) names.push_back(to_string(w));
    j.push_back({{"label", r.label}, {"remove", names}});
  }
  return json({{"rows", j}}).dump();
}

std::vector<AblationOutcome> run_ablation(const AblationSpec& spec, const RunConfig& base,
                                          const AblationInputs& in, std::ostream* log) {
  std::vector<AblationOutcome> out;
  for (std::size_t i = 0; i < spec.rows.size(); ++i) {
    const AblationRow& row = spec.rows[i];
    AblationOutcome o{row.label, std::nullopt, ""};
    try {
      RunConfig cfg = base;
      cfg.pretrain.workers = {kAllWorkers.begin(), kAllWorkers.end()};
      for (WorkerName w : row.removed) cfg.pretrain.workers.erase(w);
      if (effective_workers(cfg.pretrain.encoder, cfg.pretrain.workers).empty() &&
          cfg.pretrain.encoder == EncoderKind::kPase)
        throw Error("row removes every worker");
      const fs::path dir = in.work_dir / ("row" + std::to_string(i));
      fs::create_directories(dir);
      pretrain(in.pretrain_manifest, cfg, dir / "encoder.ckpt");
      train_mos(in.mos_train, dir / "encoder.ckpt", cfg, dir / "mos.ckpt", nullptr,
                cfg.pretrain.encoder);
      o.report = evaluate(dir / "encoder.ckpt", dir / "mos.ckpt", in.mos_test);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    if (log) {
      json j = {{"row", i}, {"label", row.label}, {"workers_removed", format_worker_list(row.removed)}};
      if (o.report) j["report"] = json::parse(o.report->to_json());
      else j["error"] = o.error;
      *log << j.dump() << std::endl;
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::string ablation_csv(const std::vector<AblationOutcome>& rows) {
  std::string s = "label,mse,lcc,srcc,n\n";
  for (const auto& r : rows) {
    s += csv_field(r.label);
    if (r.report) {
      s += "," + number(r.report->mse) + "," + (r.report->lcc ? number(*r.report->lcc) : "") + "," +
           (r.report->srcc ? number(*r.report->srcc) : "") + "," + std::to_string(r.report->n);
    } else {
      s += ",,,,0";
    }
    s += "\n";
  }
  return s;
}

}  // namespace napt
