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
#ifndef MIXVC_TESTS_TESTUTIL_HPP_
#define MIXVC_TESTS_TESTUTIL_HPP_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "mixvc/tensor.hpp"

namespace mixvc::testutil {

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("mixvc_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline double rel_err(double analytic, double numeric) {
  double denom = std::max({1e-8, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / denom;
}

struct FdReport {
  size_t checked = 0;
  double max_rel_err = 0.0;
};

// Central-difference gradient check. `loss_value` must recompute the scalar
// objective from scratch for any assignment of the named tensors;
// `analytic` holds the reverse-mode gradients for the same names at `at`.
// Every entry is perturbed unless stride > 1 subsamples them.
inline FdReport check_gradients(
    const std::map<std::string, Tensor>& at,
    const std::function<double(const std::map<std::string, Tensor>&)>&
        loss_value,
    const std::map<std::string, Tensor>& analytic, double eps = 1e-5,
    size_t stride = 1) {
  FdReport rep;
  std::map<std::string, Tensor> work = at;
  for (const auto& [name, grad] : analytic) {
    Tensor& t = work.at(name);
    for (size_t i = 0; i < t.numel(); i += std::max<size_t>(1, stride)) {
      double keep = t.data[i];
      t.data[i] = keep + eps;
      double up = loss_value(work);
      t.data[i] = keep - eps;
      double down = loss_value(work);
      t.data[i] = keep;
      double numeric = (up - down) / (2.0 * eps);
      rep.max_rel_err =
          std::max(rep.max_rel_err, rel_err(grad.data[i], numeric));
      ++rep.checked;
    }
  }
  return rep;
}

}  // namespace mixvc::testutil

#endif  // MIXVC_TESTS_TESTUTIL_HPP_
