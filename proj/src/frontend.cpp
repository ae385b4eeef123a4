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
#include "mixvc/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "mixvc/errors.hpp"

namespace mixvc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr size_t kNumBins = kFftSize / 2 + 1;
constexpr size_t kMinLag = 40;   // 400 Hz
constexpr size_t kMaxLag = 228;  // ~70 Hz

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) {
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& a) {
  size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * kPi / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

struct Filterbank {
  std::vector<double> edges;                 // kNumMels + 2 Hz edges
  std::vector<std::vector<double>> weights;  // [kNumMels][kNumBins]
  std::vector<double> centers;
};

const Filterbank& filterbank() {
  static const Filterbank fb = [] {
    Filterbank f;
    f.edges.resize(kNumMels + 2);
    double mel_max = hz_to_mel(8000.0);
    for (size_t i = 0; i < kNumMels + 2; ++i) {
      f.edges[i] =
          mel_to_hz(mel_max * static_cast<double>(i) / (kNumMels + 1));
    }
    f.weights.assign(kNumMels, std::vector<double>(kNumBins, 0.0));
    for (size_t m = 0; m < kNumMels; ++m) {
      double lo = f.edges[m], c = f.edges[m + 1], hi = f.edges[m + 2];
      f.centers.push_back(c);
      for (size_t b = 0; b < kNumBins; ++b) {
        double freq = static_cast<double>(b) * kSampleRate / kFftSize;
        double up = (freq - lo) / (c - lo);
        double dn = (hi - freq) / (hi - c);
        f.weights[m][b] = std::max(0.0, std::min(up, dn));
      }
    }
    return f;
  }();
  return fb;
}

// Response of every mel filter at an arbitrary frequency; only the (at most
// two) overlapping triangles are nonzero.
void tri_response_at(double freq, double* num, double* den,
                     const std::vector<double>& energy) {
  const Filterbank& fb = filterbank();
  *num = 0.0;
  *den = 0.0;
  auto it = std::upper_bound(fb.edges.begin(), fb.edges.end(), freq);
  long hi_idx = it - fb.edges.begin();  // edges[hi_idx-1] <= freq < edges[hi_idx]
  for (long m = hi_idx - 2; m <= hi_idx; ++m) {
    if (m < 0 || m >= static_cast<long>(kNumMels)) continue;
    double lo = fb.edges[m], c = fb.edges[m + 1], hi = fb.edges[m + 2];
    double up = (freq - lo) / (c - lo);
    double dn = (hi - freq) / (hi - c);
    double w = std::max(0.0, std::min(up, dn));
    if (w <= 0.0) continue;
    *num += w * energy[m];
    *den += w;
  }
}

std::vector<double> frame_power_spectrum(const std::vector<double>& samples,
                                         size_t start) {
  static const std::vector<double> hann = [] {
    std::vector<double> w(kWindowLength);
    for (size_t i = 0; i < kWindowLength; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                  static_cast<double>(kWindowLength));
    }
    return w;
  }();
  std::vector<std::complex<double>> buf(kFftSize, {0.0, 0.0});
  for (size_t i = 0; i < kWindowLength; ++i) {
    buf[i] = samples[start + i] * hann[i];
  }
  fft(buf);
  std::vector<double> power(kNumBins);
  for (size_t b = 0; b < kNumBins; ++b) power[b] = std::norm(buf[b]);
  return power;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

size_t frame_count(size_t n_samples) {
  if (n_samples < kWindowLength) return 0;
  return (n_samples - kWindowLength) / kHopLength + 1;
}

const std::vector<double>& mel_center_frequencies() {
  return filterbank().centers;
}

Tensor mel_spectrogram(const Waveform& wave) {
  if (wave.sample_rate != kSampleRate) {
    throw UsageError("mel_spectrogram requires 16 kHz input");
  }
  size_t t_frames = frame_count(wave.samples.size());
  if (t_frames == 0) {
    throw DataError("waveform shorter than one analysis window");
  }
  const Filterbank& fb = filterbank();
  Tensor out({t_frames, kNumMels});
  for (size_t t = 0; t < t_frames; ++t) {
    std::vector<double> power =
        frame_power_spectrum(wave.samples, t * kHopLength);
    for (size_t m = 0; m < kNumMels; ++m) {
      double e = 0.0;
      for (size_t b = 0; b < kNumBins; ++b) {
        e += fb.weights[m][b] * power[b];
      }
      out.at(t, m) = std::log(std::max(e, kLogFloor));
    }
  }
  return out;
}

PitchContour estimate_f0(const Waveform& wave, double voicing_threshold,
                         double rms_gate) {
  if (wave.sample_rate != kSampleRate) {
    throw UsageError("estimate_f0 requires 16 kHz input");
  }
  size_t t_frames = frame_count(wave.samples.size());
  PitchContour pc;
  pc.f0.assign(t_frames, 0.0);
  pc.voiced.assign(t_frames, 0);
  for (size_t t = 0; t < t_frames; ++t) {
    const double* x = &wave.samples[t * kHopLength];
    double energy = 0.0;
    for (size_t i = 0; i < kWindowLength; ++i) energy += x[i] * x[i];
    double rms = std::sqrt(energy / kWindowLength);
    if (rms < rms_gate) continue;

    double best = -2.0;
    size_t best_lag = 0;
    std::vector<double> ncc(kMaxLag + 2, -2.0);
    for (size_t lag = kMinLag; lag <= kMaxLag; ++lag) {
      size_t n = kWindowLength - lag;
      double num = 0.0, e0 = 0.0, e1 = 0.0;
      for (size_t i = 0; i < n; ++i) {
        num += x[i] * x[i + lag];
        e0 += x[i] * x[i];
        e1 += x[i + lag] * x[i + lag];
      }
      double den = std::sqrt(e0 * e1);
      double r = den > 0.0 ? num / den : 0.0;
      ncc[lag] = r;
      if (r > best) {
        best = r;
        best_lag = lag;
      }
    }
    if (best < voicing_threshold) continue;

    // A periodic frame peaks at every integer multiple of the true period,
    // and rounding or jitter phase drift can hand the global maximum to a
    // subharmonic. Prefer the smallest lag whose local peak comes close to
    // the best.
    for (size_t l = kMinLag + 1; l + 1 < best_lag; ++l) {
      if (ncc[l] >= best - 0.03 && ncc[l] >= ncc[l - 1] &&
          ncc[l] >= ncc[l + 1]) {
        best_lag = l;
        break;
      }
    }

    double lag = static_cast<double>(best_lag);
    if (best_lag > kMinLag && best_lag < kMaxLag) {
      double y0 = ncc[best_lag - 1], y1 = ncc[best_lag], y2 = ncc[best_lag + 1];
      double denom = y0 - 2.0 * y1 + y2;
      if (std::fabs(denom) > 1e-12) {
        lag += std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);
      }
    }
    pc.f0[t] = std::clamp(kSampleRate / lag, 70.0, 400.0);
    pc.voiced[t] = 1;
  }
  return pc;
}

PitchContour f0_from_mel(const Tensor& logmel, double voicing_threshold,
                         double energy_gate) {
  if (logmel.rank() != 2 || logmel.dim(1) != kNumMels) {
    throw ShapeError("f0_from_mel expects a [T][40] log-mel matrix");
  }
  constexpr size_t kNumCand = 192;
  static const std::vector<double> cand = [] {
    std::vector<double> c(kNumCand);
    double lo = std::log(165.0), hi = std::log(400.0);
    for (size_t i = 0; i < kNumCand; ++i) {
      c[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (kNumCand - 1));
    }
    return c;
  }();
  const double log_step = std::log(cand[1]) - std::log(cand[0]);

  size_t t_frames = logmel.dim(0);
  std::vector<std::vector<double>> scores(t_frames);
  std::vector<uint8_t> active(t_frames, 0);
  for (size_t t = 0; t < t_frames; ++t) {
    std::vector<double> energy(kNumMels);
    double total = 0.0;
    for (size_t m = 0; m < kNumMels; ++m) {
      energy[m] = std::max(std::exp(logmel.at(t, m)) - kLogFloor, 0.0);
      total += energy[m];
    }
    if (total < energy_gate) continue;
    active[t] = 1;
    scores[t].resize(kNumCand);
    for (size_t i = 0; i < kNumCand; ++i) {
      double c = cand[i];
      int nh = std::min(16, static_cast<int>(7600.0 / c));
      double on = 0.0, off = 0.0;
      for (int h = 1; h <= nh; ++h) {
        double num, den;
        tri_response_at(h * c, &num, &den, energy);
        on += std::log(num / (den + 1e-12) + 1e-12);
        tri_response_at((h - 0.5) * c, &num, &den, energy);
        off += std::log(num / (den + 1e-12) + 1e-12);
      }
      scores[t][i] = (on - off) / nh;
    }
  }

  auto pick = [&](const std::vector<double>& s, size_t lo, size_t hi,
                  double* f0_out) -> bool {
    size_t best = lo;
    for (size_t i = lo; i < hi; ++i) {
      if (s[i] > s[best]) best = i;
    }
    if (s[best] < voicing_threshold) return false;
    double log_f = std::log(cand[best]);
    if (best > 0 && best + 1 < kNumCand) {
      double y0 = s[best - 1], y1 = s[best], y2 = s[best + 1];
      double denom = y0 - 2.0 * y1 + y2;
      if (std::fabs(denom) > 1e-12) {
        log_f += std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5) * log_step;
      }
    }
    *f0_out = std::exp(log_f);
    return true;
  };

  // Pass 1: unrestricted, to locate the utterance register.
  std::vector<double> first;
  for (size_t t = 0; t < t_frames; ++t) {
    double f;
    if (active[t] && pick(scores[t], 0, kNumCand, &f)) first.push_back(f);
  }
  PitchContour pc;
  pc.f0.assign(t_frames, 0.0);
  pc.voiced.assign(t_frames, 0);
  if (first.empty()) return pc;

  // Pass 2: restrict candidates to +/- 5 semitones around the median.
  double center = std::log(median_of(first));
  double half_band = 5.0 / 12.0 * std::log(2.0);
  size_t lo = 0, hi = kNumCand;
  while (lo + 1 < kNumCand && std::log(cand[lo]) < center - half_band) ++lo;
  while (hi > lo + 1 && std::log(cand[hi - 1]) > center + half_band) --hi;
  for (size_t t = 0; t < t_frames; ++t) {
    double f;
    if (active[t] && pick(scores[t], lo, hi, &f)) {
      pc.f0[t] = f;
      pc.voiced[t] = 1;
    }
  }

  // Median-3 smoothing, then local outlier replacement.
  std::vector<double> med = pc.f0;
  for (size_t t = 1; t + 1 < t_frames; ++t) {
    if (pc.voiced[t - 1] && pc.voiced[t] && pc.voiced[t + 1]) {
      med[t] = median_of({pc.f0[t - 1], pc.f0[t], pc.f0[t + 1]});
    }
  }
  std::vector<double> out = med;
  for (size_t t = 0; t < t_frames; ++t) {
    if (!pc.voiced[t]) continue;
    std::vector<double> window;
    size_t w_lo = t >= 2 ? t - 2 : 0;
    size_t w_hi = std::min(t_frames, t + 3);
    for (size_t u = w_lo; u < w_hi; ++u) {
      if (pc.voiced[u]) window.push_back(med[u]);
    }
    if (window.size() >= 3) {
      double m = median_of(window);
      if (std::fabs(std::log(out[t] / m)) > 0.12) out[t] = m;
    }
  }
  pc.f0 = std::move(out);
  return pc;
}

void write_matrix(const Tensor& m, const std::string& path) {
  if (m.rank() != 2) throw ShapeError("write_matrix expects rank-2");
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path);
  os.precision(17);
  for (size_t i = 0; i < m.dim(0); ++i) {
    for (size_t j = 0; j < m.dim(1); ++j) {
      if (j) os << ' ';
      os << m.at(i, j);
    }
    os << '\n';
  }
  if (!os) throw DataError("write failed: " + path);
}

Tensor read_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open matrix: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (!rows.empty() && row.size() != rows.back().size()) {
      throw DataError("ragged matrix in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty matrix file: " + path);
  Tensor t({rows.size(), rows[0].size()});
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) t.at(i, j) = rows[i][j];
  }
  return t;
}

}  // namespace mixvc
