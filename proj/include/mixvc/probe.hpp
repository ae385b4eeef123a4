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
#ifndef MIXVC_PROBE_HPP_
#define MIXVC_PROBE_HPP_

#include <cstddef>
#include <vector>

namespace mixvc {

struct ProbeDataset {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

// Multinomial logistic-regression probe trained by full-batch gradient
// descent on softmax cross-entropy. Inputs are standardized with the
// training set's mean/sd (applied to everything scored later); a bias column
// is appended. Deterministic: zero init, fixed iteration count.
struct LinearClassifier {
  size_t dim = 0;
  int classes = 0;
  std::vector<double> mean, sd;  // per-feature standardization
  std::vector<double> w;         // [classes][dim+1], bias last

  int predict(const std::vector<double>& x) const;
};

LinearClassifier train_classifier(const ProbeDataset& train, int n_classes,
                                  size_t iters = 500, double lr = 1.0);

double classifier_accuracy(const LinearClassifier& clf,
                           const ProbeDataset& data);

// train_classifier + classifier_accuracy in one call.
double logistic_probe(const ProbeDataset& train, const ProbeDataset& test,
                      int n_classes, size_t iters = 500, double lr = 1.0);

// Deterministic stratified holdout: for each class, the first
// ceil(train_frac * n) examples (in dataset order) train the probe and the
// rest evaluate it. Every class must have at least min_per_class examples
// and at least one example on each side of the split.
double probe_holdout_accuracy(const ProbeDataset& data, int n_classes,
                              double train_frac = 0.75,
                              size_t min_per_class = 2,
                              size_t iters = 500, double lr = 1.0);

// Chance level for the label distribution in `y`: the frequency of the most
// common class (the accuracy of always guessing it).
double majority_baseline(const std::vector<int>& y);

}  // namespace mixvc

#endif  // MIXVC_PROBE_HPP_
