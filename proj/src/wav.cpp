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
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "mixvc/errors.hpp"
#include "mixvc/synth.hpp"

namespace mixvc {

namespace {

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::ifstream& is, T* v) {
  is.read(reinterpret_cast<char*>(v), sizeof(T));
  return static_cast<bool>(is);
}

}  // namespace

void write_wav(const Waveform& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path);
  uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  os.write("RIFF", 4);
  put<uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put<uint32_t>(os, 16);
  put<uint16_t>(os, 1);  // PCM
  put<uint16_t>(os, 1);  // mono
  put<uint32_t>(os, static_cast<uint32_t>(w.sample_rate));
  put<uint32_t>(os, static_cast<uint32_t>(w.sample_rate * 2));
  put<uint16_t>(os, 2);   // block align
  put<uint16_t>(os, 16);  // bits per sample
  os.write("data", 4);
  put<uint32_t>(os, data_bytes);
  for (double x : w.samples) {
    double c = std::clamp(x, -1.0, 1.0);
    int16_t q = static_cast<int16_t>(std::lrint(c * 32767.0));
    put<int16_t>(os, q);
  }
  if (!os) throw DataError("write failed: " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open wav: " + path);
  char tag[4];
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "RIFF", 4) != 0) {
    throw DataError("malformed header: " + path);
  }
  uint32_t riff_size;
  if (!get(is, &riff_size)) throw DataError("malformed header: " + path);
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "WAVE", 4) != 0) {
    throw DataError("malformed header: " + path);
  }

  Waveform w;
  bool have_fmt = false;
  while (is.read(tag, 4)) {
    uint32_t chunk_size;
    if (!get(is, &chunk_size)) throw DataError("malformed header: " + path);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw DataError("malformed header: " + path);
      uint16_t format, channels, block_align, bits;
      uint32_t sample_rate, byte_rate;
      if (!get(is, &format) || !get(is, &channels) || !get(is, &sample_rate) ||
          !get(is, &byte_rate) || !get(is, &block_align) || !get(is, &bits)) {
        throw DataError("malformed header: " + path);
      }
      if (format != 1 || channels != 1 || bits != 16) {
        throw DataError("unsupported encoding: " + path +
                        " (need PCM 16-bit mono)");
      }
      w.sample_rate = static_cast<int>(sample_rate);
      is.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw DataError("malformed header: " + path);
      size_t n = chunk_size / 2;
      w.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        int16_t q;
        if (!get(is, &q)) throw DataError("truncated wav data: " + path);
        w.samples[i] = std::clamp(q / 32767.0, -1.0, 1.0);
      }
      return w;
    } else {
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw DataError("malformed header: " + path + " (no data chunk)");
}

}  // namespace mixvc
