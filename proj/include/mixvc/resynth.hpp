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
#ifndef MIXVC_RESYNTH_HPP_
#define MIXVC_RESYNTH_HPP_

#include "mixvc/frontend.hpp"

namespace mixvc {

// Listening-grade sinusoidal resynthesis of a log-mel matrix: per voiced
// frame, a bank of harmonics at the mel-domain pitch estimate with
// amplitudes read off a triangular-filter reconstruction of the power
// envelope, overlap-added at the analysis hop. Evaluation never depends on
// this; it exists so converted utterances can be auditioned.
Waveform resynthesize(const Tensor& logmel);

}  // namespace mixvc

#endif  // MIXVC_RESYNTH_HPP_
