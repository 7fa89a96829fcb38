// Copyright (c) 2026 The segmenter authors
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

#include "segmenter/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "segmenter/rttm.hpp"

namespace segmenter {

ScoreCounts counts_to_score(int64_t tp, int64_t fp, int64_t fn) {
  ScoreCounts s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  if (tp + fp + fn == 0) {
    // Nothing positive anywhere: perfect agreement by convention.
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  s.f1 = 2 * tp + fp + fn > 0
             ? 2.0 * static_cast<double>(tp) / (2.0 * tp + fp + fn)
             : 0.0;
  return s;
}

ScoreCounts score(const std::vector<uint8_t>& ref,
                  const std::vector<uint8_t>& hyp) {
  if (ref.size() != hyp.size())
    throw std::invalid_argument("score: ref/hyp length mismatch");
  int64_t tp = 0, fp = 0, fn = 0;
  for (size_t t = 0; t < ref.size(); ++t) {
    tp += ref[t] && hyp[t];
    fp += !ref[t] && hyp[t];
    fn += ref[t] && !hyp[t];
  }
  return counts_to_score(tp, fp, fn);
}

SweepResult sweep_threshold(const std::vector<std::vector<double>>& pos_probs,
                            const std::vector<std::vector<uint8_t>>& refs) {
  if (pos_probs.size() != refs.size() || pos_probs.empty())
    throw std::invalid_argument("sweep_threshold: bad inputs");
  SweepResult best;
  best.f1 = -1.0;
  for (int i = 1; i <= 99; ++i) {
    const double theta = i / 100.0;
    int64_t tp = 0, fp = 0, fn = 0;
    for (size_t r = 0; r < refs.size(); ++r) {
      if (pos_probs[r].size() != refs[r].size())
        throw std::invalid_argument(
            "sweep_threshold: probability/reference length mismatch");
      for (size_t t = 0; t < refs[r].size(); ++t) {
        const bool hyp = pos_probs[r][t] >= theta;
        tp += refs[r][t] && hyp;
        fp += !refs[r][t] && hyp;
        fn += refs[r][t] && !hyp;
      }
    }
    const double f1 = counts_to_score(tp, fp, fn).f1;
    if (f1 > best.f1) {  // strict: ties keep the smaller threshold
      best.f1 = f1;
      best.threshold = theta;
    }
  }
  return best;
}

namespace {

DomainSummary summarize(const std::string& domain, std::vector<double> xs) {
  DomainSummary s;
  s.domain = domain;
  s.count = static_cast<int>(xs.size());
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  auto quantile = [&](double q) {
    // Linear interpolation between closest ranks.
    const double pos = q * (static_cast<double>(xs.size()) - 1.0);
    const auto lo = static_cast<size_t>(std::floor(pos));
    const auto hi = static_cast<size_t>(std::ceil(pos));
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
  };
  s.min = xs.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = xs.back();
  return s;
}

std::vector<DomainSummary> domain_summaries(
    const std::vector<RecordingScore>& recs, bool use_vad) {
  std::map<std::string, std::vector<double>> by_domain;
  for (const auto& r : recs) {
    if (use_vad && !r.ref_has_vad && r.vad.fp == 0) continue;
    if (!use_vad && !r.ref_has_osd && r.osd.fp == 0) continue;
    by_domain[r.domain].push_back(use_vad ? r.vad.f1 : r.osd.f1);
  }
  std::vector<DomainSummary> out;
  for (auto& [domain, xs] : by_domain)
    out.push_back(summarize(domain, std::move(xs)));
  return out;
}

nlohmann::json counts_json(const ScoreCounts& s) {
  return {{"tp", s.tp},           {"fp", s.fp},
          {"fn", s.fn},           {"precision", s.precision},
          {"recall", s.recall},   {"f1", s.f1}};
}

ScoreCounts counts_from_json(const nlohmann::json& j) {
  ScoreCounts s;
  s.tp = j["tp"];
  s.fp = j["fp"];
  s.fn = j["fn"];
  s.precision = j["precision"];
  s.recall = j["recall"];
  s.f1 = j["f1"];
  return s;
}

}  // namespace

ScoreReport evaluate(const System& system, const DatasetManifest& manifest,
                     const std::string& mode, double hop_s,
                     double fixed_threshold) {
  if (mode != "2class" && mode != "3class")
    throw std::invalid_argument("evaluate: mode must be 2class or 3class");
  const Task task = system.task();
  if (mode == "3class" && task != Task::kJoint)
    throw std::invalid_argument("evaluate: 3class mode needs a joint system");
  if (mode == "2class" && task == Task::kJoint)
    throw std::invalid_argument(
        "evaluate: 2class mode needs a dedicated system");

  const auto eval_entries = manifest.partition("eval");
  if (eval_entries.empty())
    throw std::invalid_argument("evaluate: empty eval partition");

  auto infer_entry = [&](const ManifestEntry& e, PosteriorSequence* post,
                         FrameLabels* labels) {
    if (system.path() == FeaturePath::kEmbedding) {
      if (e.embedding_path.empty())
        throw std::runtime_error("evaluate: entry " + e.recording_id +
                                 " has no embedding file");
      *post = system.infer_embeddings(load_embeddings(e.embedding_path), hop_s);
      *labels = rasterize_labels(
          parse_rttm(e.rttm_path),
          static_cast<double>(post->num_frames) / kFrameRate);
    } else {
      const auto clip = load_audio(e.audio_path);
      *post = system.infer(clip, hop_s);
      *labels = rasterize_labels(parse_rttm(e.rttm_path), clip.duration_s());
    }
  };

  ScoreReport report;
  report.mode = mode;
  report.task = task_name(task);
  report.has_vad = task != Task::kOsd;
  report.has_osd = task != Task::kVad;

  double threshold = -1.0;
  if (mode == "2class" && fixed_threshold > 0.0 && fixed_threshold < 1.0) {
    threshold = fixed_threshold;
  } else if (mode == "2class") {
    // Tune the detection threshold on dev.
    const auto dev_entries = manifest.partition("dev");
    if (dev_entries.empty())
      throw std::invalid_argument("evaluate: 2class mode needs a dev "
                                  "partition for threshold tuning");
    std::vector<std::vector<double>> probs;
    std::vector<std::vector<uint8_t>> refs;
    for (const auto& e : dev_entries) {
      PosteriorSequence post;
      FrameLabels labels;
      infer_entry(e, &post, &labels);
      const int64_t T = std::min(post.num_frames, labels.num_frames());
      std::vector<double> p(static_cast<size_t>(T));
      std::vector<uint8_t> r(static_cast<size_t>(T));
      for (int64_t t = 0; t < T; ++t) {
        p[static_cast<size_t>(t)] = post.at(t, 1);
        const int cls = labels.classes[static_cast<size_t>(t)];
        r[static_cast<size_t>(t)] =
            task == Task::kVad ? (cls >= 1) : (cls == 2);
      }
      probs.push_back(std::move(p));
      refs.push_back(std::move(r));
    }
    threshold = sweep_threshold(probs, refs).threshold;
  }
  report.threshold = threshold;

  int64_t vtp = 0, vfp = 0, vfn = 0, otp = 0, ofp = 0, ofn = 0;
  double vad_macro_sum = 0.0, osd_macro_sum = 0.0;
  for (const auto& e : eval_entries) {
    PosteriorSequence post;
    FrameLabels labels;
    infer_entry(e, &post, &labels);
    const int64_t T = std::min(post.num_frames, labels.num_frames());

    std::vector<uint8_t> vad_hyp, osd_hyp;
    if (mode == "3class") {
      merge_joint(post, &vad_hyp, &osd_hyp);
    } else {
      auto hyp = binarize_2class(post, threshold);
      if (task == Task::kVad)
        vad_hyp = std::move(hyp);
      else
        osd_hyp = std::move(hyp);
    }

    RecordingScore rec;
    rec.recording_id = e.recording_id;
    rec.domain = e.domain;
    std::vector<uint8_t> vad_ref(static_cast<size_t>(T)),
        osd_ref(static_cast<size_t>(T));
    for (int64_t t = 0; t < T; ++t) {
      const int cls = labels.classes[static_cast<size_t>(t)];
      vad_ref[static_cast<size_t>(t)] = cls >= 1;
      osd_ref[static_cast<size_t>(t)] = cls == 2;
      rec.ref_has_vad |= cls >= 1;
      rec.ref_has_osd |= cls == 2;
    }
    if (!vad_hyp.empty()) {
      vad_hyp.resize(static_cast<size_t>(T));
      rec.vad = score(vad_ref, vad_hyp);
      vtp += rec.vad.tp;
      vfp += rec.vad.fp;
      vfn += rec.vad.fn;
      vad_macro_sum += rec.vad.f1;
    }
    if (!osd_hyp.empty()) {
      osd_hyp.resize(static_cast<size_t>(T));
      rec.osd = score(osd_ref, osd_hyp);
      otp += rec.osd.tp;
      ofp += rec.osd.fp;
      ofn += rec.osd.fn;
      osd_macro_sum += rec.osd.f1;
    }
    report.recordings.push_back(std::move(rec));
  }
  const auto n = static_cast<double>(report.recordings.size());
  if (report.has_vad) {
    report.vad_micro = counts_to_score(vtp, vfp, vfn);
    report.vad_macro = vad_macro_sum / n;
    report.vad_domains = domain_summaries(report.recordings, /*use_vad=*/true);
  }
  if (report.has_osd) {
    report.osd_micro = counts_to_score(otp, ofp, ofn);
    report.osd_macro = osd_macro_sum / n;
    report.osd_domains = domain_summaries(report.recordings, /*use_vad=*/false);
  }
  return report;
}

std::string score_report_to_json(const ScoreReport& r) {
  nlohmann::json j;
  j["mode"] = r.mode;
  j["task"] = r.task;
  j["threshold"] = r.threshold;
  j["has_vad"] = r.has_vad;
  j["has_osd"] = r.has_osd;
  if (r.has_vad) {
    j["vad_micro"] = counts_json(r.vad_micro);
    j["vad_macro"] = r.vad_macro;
  }
  if (r.has_osd) {
    j["osd_micro"] = counts_json(r.osd_micro);
    j["osd_macro"] = r.osd_macro;
  }
  j["recordings"] = nlohmann::json::array();
  for (const auto& rec : r.recordings) {
    nlohmann::json jr{{"recording_id", rec.recording_id},
                      {"domain", rec.domain},
                      {"ref_has_vad", rec.ref_has_vad},
                      {"ref_has_osd", rec.ref_has_osd}};
    if (r.has_vad) jr["vad"] = counts_json(rec.vad);
    if (r.has_osd) jr["osd"] = counts_json(rec.osd);
    j["recordings"].push_back(jr);
  }
  auto domains_json = [](const std::vector<DomainSummary>& ds) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : ds)
      arr.push_back({{"domain", d.domain},
                     {"count", d.count},
                     {"min", d.min},
                     {"q1", d.q1},
                     {"median", d.median},
                     {"q3", d.q3},
                     {"max", d.max}});
    return arr;
  };
  if (r.has_vad) j["vad_domains"] = domains_json(r.vad_domains);
  if (r.has_osd) j["osd_domains"] = domains_json(r.osd_domains);
  return j.dump(2);
}

ScoreReport score_report_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  ScoreReport r;
  r.mode = j["mode"];
  r.task = j["task"];
  r.threshold = j["threshold"];
  r.has_vad = j["has_vad"];
  r.has_osd = j["has_osd"];
  if (r.has_vad) {
    r.vad_micro = counts_from_json(j["vad_micro"]);
    r.vad_macro = j["vad_macro"];
  }
  if (r.has_osd) {
    r.osd_micro = counts_from_json(j["osd_micro"]);
    r.osd_macro = j["osd_macro"];
  }
  for (const auto& jr : j["recordings"]) {
    RecordingScore rec;
    rec.recording_id = jr["recording_id"];
    rec.domain = jr["domain"];
    rec.ref_has_vad = jr["ref_has_vad"];
    rec.ref_has_osd = jr["ref_has_osd"];
    if (r.has_vad) rec.vad = counts_from_json(jr["vad"]);
    if (r.has_osd) rec.osd = counts_from_json(jr["osd"]);
    r.recordings.push_back(std::move(rec));
  }
  auto domains_from = [](const nlohmann::json& arr) {
    std::vector<DomainSummary> out;
    for (const auto& jd : arr) {
      DomainSummary d;
      d.domain = jd["domain"];
      d.count = jd["count"];
      d.min = jd["min"];
      d.q1 = jd["q1"];
      d.median = jd["median"];
      d.q3 = jd["q3"];
      d.max = jd["max"];
      out.push_back(std::move(d));
    }
    return out;
  };
  if (r.has_vad && j.contains("vad_domains"))
    r.vad_domains = domains_from(j["vad_domains"]);
  if (r.has_osd && j.contains("osd_domains"))
    r.osd_domains = domains_from(j["osd_domains"]);
  return r;
}

std::string score_report_to_table(const ScoreReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "mode=" << r.mode << " task=" << r.task;
  if (r.threshold >= 0) os << " threshold=" << std::setprecision(2)
                           << r.threshold << std::setprecision(4);
  os << "\n";
  os << "track  micro_f1  macro_f1  precision  recall\n";
  if (r.has_vad)
    os << "vad    " << r.vad_micro.f1 << "    " << r.vad_macro << "    "
       << r.vad_micro.precision << "     " << r.vad_micro.recall << "\n";
  if (r.has_osd)
    os << "osd    " << r.osd_micro.f1 << "    " << r.osd_macro << "    "
       << r.osd_micro.precision << "     " << r.osd_micro.recall << "\n";
  auto domain_rows = [&](const char* track,
                         const std::vector<DomainSummary>& ds) {
    for (const auto& d : ds)
      os << track << " " << d.domain << " n=" << d.count << " min=" << d.min
         << " q1=" << d.q1 << " median=" << d.median << " q3=" << d.q3
         << " max=" << d.max << "\n";
  };
  if (r.has_vad) domain_rows("vad", r.vad_domains);
  if (r.has_osd) domain_rows("osd", r.osd_domains);
  return os.str();
}

std::string score_report_to_csv(const ScoreReport& r) {
  std::ostringstream os;
  os << "recording_id,domain,vad_f1,osd_f1,ref_has_vad,ref_has_osd\n";
  for (const auto& rec : r.recordings)
    os << rec.recording_id << "," << rec.domain << ","
       << (r.has_vad ? rec.vad.f1 : -1.0) << ","
       << (r.has_osd ? rec.osd.f1 : -1.0) << "," << int(rec.ref_has_vad)
       << "," << int(rec.ref_has_osd) << "\n";
  return os.str();
}

Comparison compare_systems(const ScoreReport& vad_2class,
                           const ScoreReport& osd_2class,
                           const ScoreReport& joint_3class,
                           const TrainReport& vad_train,
                           const TrainReport& osd_train,
                           const TrainReport& joint_train) {
  if (vad_2class.task != "vad" || osd_2class.task != "osd" ||
      joint_3class.task != "joint")
    throw std::invalid_argument("compare_systems: reports in wrong order");
  Comparison cmp;
  ComparisonRow vad_row{"vad_dedicated", vad_2class.vad_micro.f1, -1,
                        vad_train.seconds_to_best, vad_train.best_epoch};
  ComparisonRow osd_row{"osd_dedicated", -1, osd_2class.osd_micro.f1,
                        osd_train.seconds_to_best, osd_train.best_epoch};
  ComparisonRow joint_row{"joint", joint_3class.vad_micro.f1,
                          joint_3class.osd_micro.f1,
                          joint_train.seconds_to_best, joint_train.best_epoch};
  cmp.rows = {vad_row, osd_row, joint_row};
  cmp.delta_vad_f1 = joint_row.vad_f1 - vad_row.vad_f1;
  cmp.delta_osd_f1 = joint_row.osd_f1 - osd_row.osd_f1;
  cmp.dedicated_seconds_total =
      vad_train.seconds_to_best + osd_train.seconds_to_best;
  return cmp;
}

std::string comparison_to_csv(const Comparison& cmp) {
  std::ostringstream os;
  os << "system,vad_f1,osd_f1,seconds_to_best,epochs_to_best\n";
  for (const auto& row : cmp.rows)
    os << row.system << "," << row.vad_f1 << "," << row.osd_f1 << ","
       << row.seconds_to_best << "," << row.epochs_to_best << "\n";
  os << "delta_vad_f1," << cmp.delta_vad_f1 << ",,,\n";
  os << "delta_osd_f1,," << cmp.delta_osd_f1 << ",,\n";
  os << "dedicated_seconds_total,,," << cmp.dedicated_seconds_total << ",\n";
  return os.str();
}

std::vector<SpatialRow> spatial_report(const System& system,
                                       const DatasetManifest& manifest,
                                       const std::string& partition) {
  const auto entries = manifest.partition(partition);
  if (entries.empty())
    throw std::invalid_argument("spatial_report: empty partition");
  struct Accum {
    std::vector<double> sum;
    int64_t frames = 0;
    int count = 0;
  };
  std::map<std::string, Accum> groups;
  for (const auto& e : entries) {
    const auto clip = load_audio(e.audio_path);
    const auto weights = system.channel_weights(clip);
    const auto labels =
        rasterize_labels(parse_rttm(e.rttm_path), clip.duration_s());
    auto& acc = groups[e.domain];
    if (acc.sum.empty())
      acc.sum.assign(static_cast<size_t>(weights.num_channels), 0.0);
    if (static_cast<int>(acc.sum.size()) != weights.num_channels)
      throw std::runtime_error("spatial_report: channel count varies within "
                               "group " + e.domain);
    const int64_t T = std::min(weights.num_frames, labels.num_frames());
    for (int64_t t = 0; t < T; ++t) {
      if (labels.classes[static_cast<size_t>(t)] < 1) continue;
      for (int m = 0; m < weights.num_channels; ++m)
        acc.sum[static_cast<size_t>(m)] += weights.at(t, m);
      ++acc.frames;
    }
    ++acc.count;
  }
  std::vector<SpatialRow> rows;
  for (auto& [room, acc] : groups) {
    SpatialRow row;
    row.room = room;
    row.count = acc.count;
    row.mean_weight.resize(acc.sum.size(), 0.0);
    for (size_t m = 0; m < acc.sum.size(); ++m)
      row.mean_weight[m] =
          acc.frames > 0 ? acc.sum[m] / static_cast<double>(acc.frames) : 0.0;
    const double mx =
        *std::max_element(row.mean_weight.begin(), row.mean_weight.end());
    row.normalized = row.mean_weight;
    if (mx > 0)
      for (auto& v : row.normalized) v /= mx;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string spatial_report_to_csv(const std::vector<SpatialRow>& rows) {
  std::ostringstream os;
  os << "room,count,channel,mean_weight,normalized\n";
  for (const auto& row : rows)
    for (size_t m = 0; m < row.mean_weight.size(); ++m)
      os << row.room << "," << row.count << "," << m << ","
         << row.mean_weight[m] << "," << row.normalized[m] << "\n";
  return os.str();
}

}  // namespace segmenter
