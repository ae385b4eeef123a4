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
#include "mixvc/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "mixvc/errors.hpp"

namespace mixvc {

namespace {

void check_dataset(const ProbeDataset& d, int n_classes, const char* which) {
  if (d.x.size() != d.y.size() || d.x.empty())
    throw DataError(std::string("probe ") + which +
                    " set empty or labels misaligned");
  size_t dim = d.x[0].size();
  if (dim == 0) throw DataError("probe features are empty");
  for (const auto& row : d.x)
    if (row.size() != dim) throw DataError("ragged probe features");
  for (int label : d.y)
    if (label < 0 || label >= n_classes)
      throw DataError("probe label out of range");
}

std::vector<double> standardize(const LinearClassifier& clf,
                                const std::vector<double>& row) {
  std::vector<double> z(clf.dim + 1);
  for (size_t j = 0; j < clf.dim; ++j)
    z[j] = clf.sd[j] > 1e-12 ? (row[j] - clf.mean[j]) / clf.sd[j] : 0.0;
  z[clf.dim] = 1.0;  // bias column
  return z;
}

}  // namespace

int LinearClassifier::predict(const std::vector<double>& x) const {
  if (x.size() != dim) throw ShapeError("classifier input size mismatch");
  std::vector<double> z = standardize(*this, x);
  int best = 0;
  double best_s = -1e300;
  for (int k = 0; k < classes; ++k) {
    double s = 0.0;
    for (size_t j = 0; j <= dim; ++j) s += w[size_t(k) * (dim + 1) + j] * z[j];
    if (s > best_s) {
      best_s = s;
      best = k;
    }
  }
  return best;
}

LinearClassifier train_classifier(const ProbeDataset& train, int n_classes,
                                  size_t iters, double lr) {
  if (n_classes < 2) throw DataError("probe needs at least 2 classes");
  check_dataset(train, n_classes, "train");
  LinearClassifier clf;
  clf.dim = train.x[0].size();
  clf.classes = n_classes;
  const size_t dim = clf.dim;
  const size_t n = train.x.size();
  const size_t c = size_t(n_classes);

  // Standardize with train statistics; constant features drop to zero.
  clf.mean.assign(dim, 0.0);
  clf.sd.assign(dim, 0.0);
  for (const auto& row : train.x)
    for (size_t j = 0; j < dim; ++j) clf.mean[j] += row[j];
  for (double& m : clf.mean) m /= double(n);
  for (const auto& row : train.x)
    for (size_t j = 0; j < dim; ++j)
      clf.sd[j] += (row[j] - clf.mean[j]) * (row[j] - clf.mean[j]);
  for (double& s : clf.sd) s = std::sqrt(s / double(n));

  std::vector<std::vector<double>> xtr(n);
  for (size_t i = 0; i < n; ++i) xtr[i] = standardize(clf, train.x[i]);

  clf.w.assign(c * (dim + 1), 0.0);
  std::vector<double> logits(c), probs(c), grad(c * (dim + 1));
  for (size_t it = 0; it < iters; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      const std::vector<double>& z = xtr[i];
      double mx = -1e300;
      for (size_t k = 0; k < c; ++k) {
        double s = 0.0;
        for (size_t j = 0; j <= dim; ++j) s += clf.w[k * (dim + 1) + j] * z[j];
        logits[k] = s;
        mx = std::max(mx, s);
      }
      double denom = 0.0;
      for (size_t k = 0; k < c; ++k) {
        probs[k] = std::exp(logits[k] - mx);
        denom += probs[k];
      }
      for (size_t k = 0; k < c; ++k) {
        double err = probs[k] / denom - (int(k) == train.y[i] ? 1.0 : 0.0);
        for (size_t j = 0; j <= dim; ++j)
          grad[k * (dim + 1) + j] += err * z[j];
      }
    }
    const double step = lr / double(n);
    for (size_t j = 0; j < clf.w.size(); ++j) clf.w[j] -= step * grad[j];
  }
  return clf;
}

double classifier_accuracy(const LinearClassifier& clf,
                           const ProbeDataset& data) {
  check_dataset(data, clf.classes, "test");
  size_t correct = 0;
  for (size_t i = 0; i < data.x.size(); ++i)
    if (clf.predict(data.x[i]) == data.y[i]) ++correct;
  return double(correct) / double(data.x.size());
}

double logistic_probe(const ProbeDataset& train, const ProbeDataset& test,
                      int n_classes, size_t iters, double lr) {
  LinearClassifier clf = train_classifier(train, n_classes, iters, lr);
  if (!test.x.empty() && test.x[0].size() != clf.dim)
    throw DataError("probe train/test dimensionality differs");
  return classifier_accuracy(clf, test);
}

double probe_holdout_accuracy(const ProbeDataset& data, int n_classes,
                              double train_frac, size_t min_per_class,
                              size_t iters, double lr) {
  check_dataset(data, n_classes, "holdout");
  if (train_frac <= 0.0 || train_frac >= 1.0)
    throw UsageError("train_frac must be in (0, 1)");
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < data.y.size(); ++i) by_class[data.y[i]].push_back(i);
  if (by_class.size() < 2)
    throw DataError("probe needs at least 2 classes present");
  ProbeDataset train, test;
  for (const auto& [label, idx] : by_class) {
    if (idx.size() < min_per_class || idx.size() < 2)
      throw DataError("class " + std::to_string(label) +
                      " has too few probe examples");
    size_t n_train = size_t(std::ceil(train_frac * double(idx.size())));
    n_train = std::clamp<size_t>(n_train, 1, idx.size() - 1);
    for (size_t k = 0; k < idx.size(); ++k) {
      ProbeDataset& dst = k < n_train ? train : test;
      dst.x.push_back(data.x[idx[k]]);
      dst.y.push_back(label);
    }
  }
  return logistic_probe(train, test, n_classes, iters, lr);
}

double majority_baseline(const std::vector<int>& y) {
  if (y.empty()) throw DataError("empty label vector");
  std::map<int, size_t> counts;
  size_t best = 0;
  for (int v : y) best = std::max(best, ++counts[v]);
  return double(best) / double(y.size());
}

}  // namespace mixvc
