/* Copyright 2026 The mixvc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "mixvc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "mixvc/errors.hpp"
#include "mixvc/frontend.hpp"

namespace mixvc {

// ---- sequence metrics -------------------------------------------------

EditOps edit_ops(const std::vector<int>& ref, const std::vector<int>& hyp) {
  const size_t r = ref.size(), h = hyp.size();
  std::vector<std::vector<size_t>> d(r + 1, std::vector<size_t>(h + 1, 0));
  for (size_t i = 0; i <= r; ++i) d[i][0] = i;
  for (size_t j = 0; j <= h; ++j) d[0][j] = j;
  for (size_t i = 1; i <= r; ++i) {
    for (size_t j = 1; j <= h; ++j) {
      size_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      size_t ins = d[i][j - 1] + 1;
      size_t del = d[i - 1][j] + 1;
      d[i][j] = std::min({sub, ins, del});
    }
  }
  // Backtrace; on cost ties prefer substitution, then insertion, then
  // deletion, so the op split is well defined.
  EditOps ops;
  size_t i = r, j = h;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++ops.substitutions;
      --i;
      --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ++ops.insertions;
      --j;
    } else {
      ++ops.deletions;
      --i;
    }
  }
  return ops;
}

double word_error_rate(const std::vector<int>& ref,
                       const std::vector<int>& hyp) {
  if (ref.empty()) throw DataError("empty reference sequence");
  return double(edit_ops(ref, hyp).total()) / double(ref.size());
}

std::vector<int> collapse_runs(const std::vector<int>& frames,
                               size_t min_run) {
  std::vector<int> out;
  size_t i = 0;
  while (i < frames.size()) {
    size_t j = i;
    while (j < frames.size() && frames[j] == frames[i]) ++j;
    if (j - i >= min_run && (out.empty() || out.back() != frames[i]))
      out.push_back(frames[i]);
    i = j;
  }
  return out;
}

std::vector<int> dedup_adjacent(const std::vector<int>& seq) {
  std::vector<int> out;
  for (int s : seq)
    if (out.empty() || out.back() != s) out.push_back(s);
  return out;
}

// ---- correlation ------------------------------------------------------

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw NumericError("correlation length mismatch");
  const size_t n = a.size();
  if (n < 2) throw NumericError("correlation needs n >= 2");
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(n);
  mb /= double(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0)
    throw NumericError("correlation undefined for constant input");
  return sab / std::sqrt(saa * sbb);
}

CorrelationCI fisher_ci(double r, size_t n) {
  if (n < 4) throw DataError("fisher interval needs n >= 4");
  CorrelationCI ci;
  ci.r = r;
  ci.n = n;
  if (r >= 1.0 || r <= -1.0) {
    ci.lo = ci.hi = std::clamp(r, -1.0, 1.0);
    return ci;
  }
  double z = std::atanh(r);
  double hw = 1.96 / std::sqrt(double(n - 3));
  ci.lo = std::tanh(z - hw);
  ci.hi = std::tanh(z + hw);
  return ci;
}

double pitch_correlation(const PitchContour& a, const PitchContour& b,
                         size_t min_frames) {
  size_t n = std::min(a.f0.size(), b.f0.size());
  std::vector<double> xa, xb;
  for (size_t t = 0; t < n; ++t) {
    if (a.voiced[t] && b.voiced[t]) {
      xa.push_back(a.f0[t]);
      xb.push_back(b.f0[t]);
    }
  }
  if (xa.size() < min_frames) return 0.0;
  try {
    return pearson(xa, xb);
  } catch (const NumericError&) {
    return 0.0;
  }
}

// ---- tests of significance ---------------------------------------------

double student_t_pdf(double x, double dof) {
  if (dof <= 0) throw UsageError("dof must be positive");
  double lc = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
              0.5 * std::log(dof * M_PI);
  return std::exp(lc - (dof + 1.0) / 2.0 * std::log1p(x * x / dof));
}

namespace {

double simpson_rule(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth, double dof) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = student_t_pdf(lm, dof), frm = student_t_pdf(rm, dof);
  double left = simpson_rule(fa, flm, fm, a, m);
  double right = simpson_rule(fm, frm, fb, m, b);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, tol / 2.0, depth - 1, dof) +
         adaptive_simpson(m, b, fm, frm, fb, right, tol / 2.0, depth - 1, dof);
}

double integrate_pdf(double a, double b, double dof) {
  if (b <= a) return 0.0;
  double fa = student_t_pdf(a, dof), fb = student_t_pdf(b, dof);
  double fm = student_t_pdf(0.5 * (a + b), dof);
  double whole = simpson_rule(fa, fm, fb, a, b);
  return adaptive_simpson(a, b, fa, fm, fb, whole, 1e-10, 60, dof);
}

}  // namespace

double student_t_cdf(double x, double dof) {
  if (std::isnan(x)) throw NumericError("t statistic is NaN");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  // The density integrates to 1/2 on each side of zero; integrate the
  // finite interval [0, |x|] and use symmetry.
  double tail = integrate_pdf(0.0, std::fabs(x), dof);
  double c = x >= 0 ? 0.5 + tail : 0.5 - tail;
  return std::clamp(c, 0.0, 1.0);
}

TTestResult paired_ttest(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("paired samples differ in length");
  const size_t n = a.size();
  if (n < 2) throw DataError("paired t-test needs n >= 2");
  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= double(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / double(n - 1));

  TTestResult res;
  res.n = n;
  res.mean_diff = mean;
  if (sd == 0.0) {
    // All differences identical: significance is unambiguous without a
    // distribution.
    if (mean != 0.0) {
      res.t = mean > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    } else {
      res.t = 0.0;
      res.p = 1.0;
    }
    return res;
  }
  res.t = mean / (sd / std::sqrt(double(n)));
  double dof = double(n - 1);
  res.p = std::clamp(2.0 * (1.0 - student_t_cdf(std::fabs(res.t), dof)), 0.0,
                     1.0);
  return res;
}

std::vector<double> holm_correct(const std::vector<double>& pvals) {
  const size_t m = pvals.size();
  for (double p : pvals)
    if (std::isnan(p) || p < 0.0 || p > 1.0)
      throw DataError("p-value out of [0, 1]");
  std::vector<size_t> order(m);
  for (size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t x, size_t y) { return pvals[x] < pvals[y]; });
  std::vector<double> out(m, 0.0);
  double running = 0.0;
  for (size_t k = 0; k < m; ++k) {
    double adj = std::min(1.0, double(m - k) * pvals[order[k]]);
    running = std::max(running, adj);
    out[order[k]] = running;
  }
  return out;
}

// ---- score files and reports ---------------------------------------------

void write_scores(const std::vector<ScoreRow>& rows,
                  const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  f << std::setprecision(17);
  for (const ScoreRow& r : rows)
    f << r.testcase << '\t' << r.system << '\t' << r.score << '\n';
}

std::vector<ScoreRow> read_scores(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read " + path);
  std::vector<ScoreRow> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected 3 tab-separated fields");
    ScoreRow r;
    r.testcase = fields[0];
    r.system = fields[1];
    try {
      size_t used = 0;
      r.score = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": bad score '" + fields[2] + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string build_report(const std::vector<ScoreRow>& rows,
                         const std::string& title) {
  std::map<std::string, std::map<std::string, double>> by_system;
  for (const ScoreRow& r : rows) {
    auto [it, inserted] = by_system[r.system].emplace(r.testcase, r.score);
    (void)it;
    if (!inserted)
      throw DataError("duplicate score for testcase '" + r.testcase +
                      "' in system '" + r.system + "'");
  }
  std::ostringstream out;
  out << "== " << title << " ==\n";
  out << std::fixed << std::setprecision(6);
  out << "system\tn\tmean\tsd\n";
  for (const auto& [sys, scores] : by_system) {
    double mean = 0.0;
    for (const auto& [tc, s] : scores) mean += s;
    mean /= double(scores.size());
    double ss = 0.0;
    for (const auto& [tc, s] : scores) ss += (s - mean) * (s - mean);
    double sd = scores.size() > 1 ? std::sqrt(ss / double(scores.size() - 1))
                                  : 0.0;
    out << sys << '\t' << scores.size() << '\t' << mean << '\t' << sd << '\n';
  }

  struct Pair {
    std::string a, b;
    TTestResult res;
    size_t overlap = 0;
    bool tested = false;
  };
  std::vector<Pair> pairs;
  for (auto i = by_system.begin(); i != by_system.end(); ++i) {
    for (auto j = std::next(i); j != by_system.end(); ++j) {
      Pair pr;
      pr.a = i->first;
      pr.b = j->first;
      std::vector<double> va, vb;
      for (const auto& [tc, s] : i->second) {
        auto it = j->second.find(tc);
        if (it != j->second.end()) {
          va.push_back(s);
          vb.push_back(it->second);
        }
      }
      pr.overlap = va.size();
      if (va.size() >= 2) {
        pr.res = paired_ttest(va, vb);
        pr.tested = true;
      }
      pairs.push_back(std::move(pr));
    }
  }
  std::vector<double> ps;
  for (const Pair& pr : pairs)
    if (pr.tested) ps.push_back(pr.res.p);
  std::vector<double> holm = holm_correct(ps);

  if (!pairs.empty()) {
    out << "pairwise paired t-tests (two-sided, Holm-corrected):\n";
    out << "a\tb\tn\tmean_diff\tt\tp\tp_holm\tsignificant_0.05\n";
    size_t k = 0;
    for (const Pair& pr : pairs) {
      if (!pr.tested) {
        out << pr.a << '\t' << pr.b << '\t' << pr.overlap
            << "\tinsufficient shared testcases\n";
        continue;
      }
      double ph = holm[k++];
      out << pr.a << '\t' << pr.b << '\t' << pr.res.n << '\t'
          << pr.res.mean_diff << '\t' << pr.res.t << '\t' << pr.res.p << '\t'
          << ph << '\t' << (ph < 0.05 ? "yes" : "no") << '\n';
    }
  }
  return out.str();
}

// ---- whole-model evaluation ------------------------------------------

namespace {

struct CachedUtt {
  const ManifestEntry* entry = nullptr;
  Tensor mel;
  Tensor content;             // mixed features [T][D]
  std::vector<double> emb;    // frozen speaker embedding
};

// Recognizer features: log-mel minus the utterance mean (cepstral-style
// normalization), which removes most of the static speaker envelope and
// makes the symbol recognizer transfer across voices.
std::vector<double> recognizer_frame(const Tensor& mel,
                                     const std::vector<double>& utt_mean,
                                     size_t t) {
  std::vector<double> row(mel.dim(1));
  for (size_t m = 0; m < mel.dim(1); ++m) row[m] = mel.at(t, m) - utt_mean[m];
  return row;
}

std::vector<double> utterance_mean(const Tensor& mel) {
  std::vector<double> mean(mel.dim(1), 0.0);
  for (size_t t = 0; t < mel.dim(0); ++t)
    for (size_t m = 0; m < mel.dim(1); ++m) mean[m] += mel.at(t, m);
  for (double& v : mean) v /= double(mel.dim(0));
  return mean;
}

std::vector<int> decode_symbols(const LinearClassifier& clf,
                                const Tensor& mel) {
  std::vector<double> mean = utterance_mean(mel);
  std::vector<int> frames(mel.dim(0));
  for (size_t t = 0; t < mel.dim(0); ++t)
    frames[t] = clf.predict(recognizer_frame(mel, mean, t));
  return collapse_runs(frames);
}

}  // namespace

double mean_score(const std::vector<ScoreRow>& rows) {
  if (rows.empty()) throw DataError("no scores to average");
  double s = 0.0;
  for (const ScoreRow& r : rows) s += r.score;
  return s / double(rows.size());
}

EvalOutputs evaluate_model(const Model& model, const CorpusManifest& manifest,
                           const EvalConfig& cfg) {
  EvalOutputs out;
  const std::string sys = cfg.system.empty()
                              ? mix_mode_name(model.config().mixer.mode)
                              : cfg.system;
  const size_t stride = std::max<size_t>(1, cfg.probe_stride);

  std::map<std::string, Alignment> align;
  for (auto& [id, al] : read_alignments(manifest.root + "/alignments.tsv"))
    align.emplace(id, std::move(al));

  std::vector<CachedUtt> utts(manifest.entries.size());
  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& e = manifest.entries[i];
    Waveform w = read_wav(manifest.root + "/" + e.path);
    utts[i].entry = &e;
    utts[i].mel = mel_spectrogram(w);
    utts[i].content = model.mix_content(model.encode_stack(w, e.utt_id));
    utts[i].emb = model.speaker_embedding(w);
    if (!align.count(e.utt_id))
      throw DataError("no alignment for utterance '" + e.utt_id + "'");
    if (align.at(e.utt_id).symbols.size() != utts[i].mel.dim(0))
      throw DataError("alignment length mismatch for '" + e.utt_id + "'");
  }

  // Frame-symbol recognizer on normalized log-mel. It is measurement
  // apparatus (like the alignments it is trained on), not a learned-feature
  // probe, so it trains on all real audio except the dev split -- including
  // held-out speakers' real recordings, never on decoded output -- and its
  // generalization is reported on dev utterances.
  ProbeDataset mel_train, mel_dev;
  for (const CachedUtt& u : utts) {
    ProbeDataset& dst = u.entry->split == "dev" ? mel_dev : mel_train;
    const Alignment& al = align.at(u.entry->utt_id);
    std::vector<double> mean = utterance_mean(u.mel);
    for (size_t t = 0; t < u.mel.dim(0); t += stride) {
      dst.x.push_back(recognizer_frame(u.mel, mean, t));
      dst.y.push_back(al.symbols[t]);
    }
  }
  if (mel_train.x.empty()) throw DataError("no utterances to evaluate");
  LinearClassifier symbol_clf =
      train_classifier(mel_train, kNumSymbols, 500, 1.0);
  out.mel_probe = classifier_accuracy(symbol_clf,
                                      mel_dev.x.empty() ? mel_train : mel_dev);

  // Probes on the content features the mixer exposes (train split).
  {
    std::set<int> spk_set;
    for (const CachedUtt& u : utts)
      if (u.entry->split == "train") spk_set.insert(u.entry->speaker_id);
    std::map<int, int> spk_class;
    for (int id : spk_set) spk_class.emplace(id, int(spk_class.size()));

    ProbeDataset spk_data, sym_data;
    for (const CachedUtt& u : utts) {
      if (u.entry->split != "train") continue;
      const size_t T = u.content.dim(0), D = u.content.dim(1);
      std::vector<double> mean(D, 0.0);
      for (size_t t = 0; t < T; ++t)
        for (size_t d = 0; d < D; ++d) mean[d] += u.content.at(t, d);
      for (double& v : mean) v /= double(T);
      spk_data.x.push_back(std::move(mean));
      spk_data.y.push_back(spk_class.at(u.entry->speaker_id));

      const Alignment& al = align.at(u.entry->utt_id);
      for (size_t t = 0; t < T; t += stride) {
        std::vector<double> row(D);
        for (size_t d = 0; d < D; ++d) row[d] = u.content.at(t, d);
        sym_data.x.push_back(std::move(row));
        sym_data.y.push_back(al.symbols[t]);
      }
    }
    // The probe is meaningful only with >= 2 speakers of >= 10 utterances;
    // otherwise it is skipped rather than computed on thin data.
    std::map<int, size_t> per_class;
    for (int y : spk_data.y) ++per_class[y];
    size_t smallest = spk_data.y.empty() ? 0 : SIZE_MAX;
    for (const auto& [cls, cnt] : per_class)
      smallest = std::min(smallest, cnt);
    if (per_class.size() >= 2 && smallest >= 10) {
      out.speaker_probe = probe_holdout_accuracy(
          spk_data, int(spk_class.size()), 0.75, 10);
      out.speaker_probe_chance = majority_baseline(spk_data.y);
      out.speaker_probe_ok = true;
    }
    out.content_probe =
        probe_holdout_accuracy(sym_data, kNumSymbols, 0.75, 2);
    out.content_probe_chance = majority_baseline(sym_data.y);
  }

  // Held-out reconstruction and zero-shot conversions.
  std::map<int, std::vector<const CachedUtt*>> test_by_spk;
  for (const CachedUtt& u : utts)
    if (u.entry->split == "test")
      test_by_spk[u.entry->speaker_id].push_back(&u);

  size_t n_test = 0;
  double l1_sum = 0.0, real_wer_sum = 0.0;
  for (const auto& [spk_id, group] : test_by_spk) {
    for (const CachedUtt* u : group) {
      Tensor recon = model.decode_mel(u->content, u->emb);
      double diff = 0.0;
      for (size_t i = 0; i < recon.numel(); ++i)
        diff += std::fabs(recon.data[i] - u->mel.data[i]);
      l1_sum += diff / double(recon.numel());
      ++n_test;
      std::vector<int> ref = dedup_adjacent(u->entry->symbols);
      out.recon_wer.push_back(
          {u->entry->utt_id, sys,
           word_error_rate(ref, decode_symbols(symbol_clf, recon))});
      // Recognizer floor: the same metric on the real recording.
      real_wer_sum +=
          word_error_rate(ref, decode_symbols(symbol_clf, u->mel));
    }
  }
  out.recon_l1 = n_test > 0 ? l1_sum / double(n_test) : 0.0;
  out.real_wer = n_test > 0 ? real_wer_sum / double(n_test) : 0.0;

  for (const auto& [src_spk, group] : test_by_spk) {
    for (const CachedUtt* src : group) {
      PitchContour src_pitch = f0_from_mel(src->mel);
      std::vector<int> ref = dedup_adjacent(src->entry->symbols);
      size_t used = 0;
      for (const auto& [tgt_spk, tgt_group] : test_by_spk) {
        if (tgt_spk == src_spk || used >= cfg.max_targets) continue;
        const CachedUtt* tgt = tgt_group.front();
        Tensor conv = model.decode_mel(src->content, tgt->emb);
        std::string tc = src->entry->utt_id + "->spk" +
                         std::to_string(tgt_spk);
        out.conv_wer.push_back(
            {tc, sys, word_error_rate(ref, decode_symbols(symbol_clf, conv))});
        out.conv_f0.push_back(
            {tc, sys, pitch_correlation(src_pitch, f0_from_mel(conv))});
        const std::vector<double> conv_emb =
            model.speaker_encoder().encode_mel(conv);
        double cos = 0.0;
        for (size_t i = 0; i < conv_emb.size(); ++i)
          cos += conv_emb[i] * tgt->emb[i];
        out.conv_sim.push_back({tc, sys, cos});
        ++used;
        ++out.n_conversions;
      }
    }
  }
  return out;
}

void write_eval_summary(const EvalOutputs& out, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  f << std::setprecision(17);
  f << "recon_l1\t" << out.recon_l1 << '\n';
  if (out.speaker_probe_ok) {
    f << "speaker_probe\t" << out.speaker_probe << '\n';
    f << "speaker_probe_chance\t" << out.speaker_probe_chance << '\n';
  } else {
    f << "speaker_probe\tskipped (needs 2+ speakers with 10+ train "
         "utterances)\n";
  }
  f << "content_probe\t" << out.content_probe << '\n';
  f << "content_probe_chance\t" << out.content_probe_chance << '\n';
  f << "mel_probe\t" << out.mel_probe << '\n';
  f << "real_wer\t" << out.real_wer << '\n';
  f << "n_conversions\t" << out.n_conversions << '\n';
  if (!out.recon_wer.empty())
    f << "mean_recon_wer\t" << mean_score(out.recon_wer) << '\n';
  if (!out.conv_wer.empty())
    f << "mean_conv_wer\t" << mean_score(out.conv_wer) << '\n';
  if (!out.conv_f0.empty())
    f << "mean_f0_corr\t" << mean_score(out.conv_f0) << '\n';
  if (!out.conv_sim.empty())
    f << "mean_speaker_sim\t" << mean_score(out.conv_sim) << '\n';
}

}  // namespace mixvc
