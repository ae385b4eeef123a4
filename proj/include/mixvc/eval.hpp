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
#ifndef MIXVC_EVAL_HPP_
#define MIXVC_EVAL_HPP_

#include <string>
#include <vector>

#include "mixvc/probe.hpp"
#include "mixvc/trainer.hpp"

namespace mixvc {

// ---- sequence metrics -----------------------------------------------------

struct EditOps {
  size_t substitutions = 0, insertions = 0, deletions = 0;
  size_t total() const { return substitutions + insertions + deletions; }
};

// Levenshtein alignment of hyp against ref (unit costs). When several op
// choices give the same distance the backtrace prefers substitution, then
// insertion, then deletion, so the reported op split is deterministic.
EditOps edit_ops(const std::vector<int>& ref, const std::vector<int>& hyp);

// (S + I + D) / |ref|. The reference must be nonempty.
double word_error_rate(const std::vector<int>& ref,
                       const std::vector<int>& hyp);

// Frame decoding: group equal consecutive labels into runs, drop runs
// shorter than min_run (treated as glitches), then merge adjacent equal
// symbols that dropping exposed.
std::vector<int> collapse_runs(const std::vector<int>& frames,
                               size_t min_run = 3);

// Merges adjacent equal symbols; applied to reference scripts so that a
// boundary between identical neighbors (invisible in frame labels) is not
// counted against the hypothesis.
std::vector<int> dedup_adjacent(const std::vector<int>& seq);

// ---- correlation ------------------------------------------------------

// Sample Pearson correlation; NumericError on n < 2 or zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

struct CorrelationCI {
  double r = 0.0, lo = 0.0, hi = 0.0;
  size_t n = 0;
};

// 95% confidence interval via the Fisher z-transform (half-width
// 1.96/sqrt(n-3)); requires n >= 4.
CorrelationCI fisher_ci(double r, size_t n);

// Correlation between two pitch tracks over frames voiced in both; returns
// 0 when fewer than min_frames frames overlap or either track is constant.
double pitch_correlation(const PitchContour& a, const PitchContour& b,
                         size_t min_frames = 8);

// ---- tests of significance ----------------------------------------------

double student_t_pdf(double x, double dof);
// P(T <= x) for Student's t with `dof` degrees of freedom, by adaptive
// Simpson integration of the density (absolute tolerance 1e-10).
double student_t_cdf(double x, double dof);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;       // two-sided
  double mean_diff = 0.0;
  size_t n = 0;
};

// Paired two-sided t-test on differences a[i]-b[i] (sample sd, n-1 dof).
// Degenerate zero-variance differences give p=0 when the mean differs from
// zero and p=1 otherwise. Requires n >= 2.
TTestResult paired_ttest(const std::vector<double>& a,
                         const std::vector<double>& b);

// Holm step-down correction; preserves input order.
std::vector<double> holm_correct(const std::vector<double>& pvals);

// ---- score files and reports ----------------------------------------------

struct ScoreRow {
  std::string testcase;
  std::string system;
  double score = 0.0;
};

// Plain rows `testcase_id<TAB>system<TAB>score`, no header.
void write_scores(const std::vector<ScoreRow>& rows, const std::string& path);
std::vector<ScoreRow> read_scores(const std::string& path);

// Per-system summary plus all pairwise paired t-tests (on testcases the two
// systems share), Holm-corrected across the pairs. `title` labels the block.
std::string build_report(const std::vector<ScoreRow>& rows,
                         const std::string& title);

// ---- whole-model evaluation -------------------------------------------

struct EvalConfig {
  std::string system;      // row label; empty = the model's mix-mode name
  size_t max_targets = 2;  // conversion targets per source utterance
  size_t probe_stride = 2; // frame subsampling for frame-level probes
};

struct EvalOutputs {
  std::vector<ScoreRow> conv_wer, conv_f0, conv_sim, recon_wer;
  double recon_l1 = 0.0;          // mean over test split
  // The speaker probe needs >= 2 train speakers with >= 10 utterances each;
  // on smaller corpora it is skipped and speaker_probe_ok stays false.
  bool speaker_probe_ok = false;
  double speaker_probe = 0.0;     // on mixed content features, train split
  double speaker_probe_chance = 0.0;
  double content_probe = 0.0;     // frame symbols from content features
  double content_probe_chance = 0.0;
  double mel_probe = 0.0;         // recognizer accuracy on held-out frames
  double real_wer = 0.0;          // recognizer WER on real test recordings
  size_t n_conversions = 0;
};

// Evaluates a trained model against a corpus: reconstruction error and
// symbol recovery on the held-out split, probe accuracies on the content
// features the mixer exposes, and zero-shot conversions between held-out
// speakers scored for symbol WER, pitch-contour correlation and speaker
// similarity.
EvalOutputs evaluate_model(const Model& model, const CorpusManifest& manifest,
                           const EvalConfig& cfg);

void write_eval_summary(const EvalOutputs& out, const std::string& path);

// Mean of the scores in `rows` (DataError if empty).
double mean_score(const std::vector<ScoreRow>& rows);

}  // namespace mixvc

#endif  // MIXVC_EVAL_HPP_
