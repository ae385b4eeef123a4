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
#ifndef MIXVC_CONVERT_HPP_
#define MIXVC_CONVERT_HPP_

#include <string>

#include "mixvc/trainer.hpp"

namespace mixvc {

// Zero-shot conversion: content features from the source utterance, speaker
// embedding from the (possibly unseen) target utterance, decoded to a
// log-mel matrix. Runs the exact arithmetic of the training forward pass, so
// converting an utterance to its own speaker embedding reproduces the
// reconstruction bit for bit.
Tensor convert_utterance(const Model& model, const Waveform& source,
                         const Waveform& target,
                         const std::string& source_utt_id = "");

}  // namespace mixvc

#endif  // MIXVC_CONVERT_HPP_
