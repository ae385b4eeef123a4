# Copyright 2026 The mixvc Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""End-to-end smoke test of the python module: tiny corpus, short training,
conversion, statistics helpers."""

import math
import os
import tempfile

import mixvc


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    with tempfile.TemporaryDirectory(prefix="mixvc_py_") as tmp:
        corpus = os.path.join(tmp, "corpus")
        os.makedirs(corpus)
        n = mixvc.gen_data(corpus, n_speakers=4, n_utts=3, seed=5)
        assert n == 12, n

        run = os.path.join(tmp, "run")
        ckpt = mixvc.train(
            corpus, run, {"train.steps": "5", "train.batch_size": "2"}
        )
        assert os.path.exists(ckpt), ckpt
        assert os.path.exists(os.path.join(run, "loss_log.tsv"))

        src = os.path.join(corpus, "wav", "spk00_utt00.wav")
        tgt = os.path.join(corpus, "wav", "spk03_utt01.wav")
        mel = mixvc.convert(src, tgt, ckpt)
        assert len(mel) > 10 and len(mel[0]) == 40
        assert all(math.isfinite(v) for row in mel for v in row)

        # Self-conversion must reproduce the model's reconstruction exactly.
        mel_self = mixvc.convert(src, src, ckpt)
        mel_self2 = mixvc.convert(src, src, ckpt)
        assert mel_self == mel_self2

        f0, voiced = mixvc.f0_from_mel(mixvc.mel_spectrogram(mixvc.read_wav(src)))
        assert len(f0) == len(voiced) > 0
        assert any(voiced)

        audio = mixvc.resynthesize(mel)
        assert len(audio) > 1000 and max(abs(s) for s in audio) <= 0.75 + 1e-9

        assert approx(mixvc.word_error_rate([1, 2, 3], [1, 2, 3]), 0.0)
        assert approx(mixvc.word_error_rate([1, 2, 3], [1, 3]), 1.0 / 3.0)

        t, p = mixvc.paired_ttest([1.0, -1.0, 2.0, 0.0], [0.0, 0.0, 0.0, 0.0])
        assert abs(t - 0.7745966692414834) < 1e-12, t
        assert abs(p - 0.49502) < 5e-5, p

        holm = mixvc.holm_correct([0.01, 0.04, 0.03])
        assert all(
            approx(a, b) for a, b in zip(holm, [0.03, 0.06, 0.06])
        ), holm

        try:
            mixvc.train(corpus, run, {"train.steps": "bogus"})
            raise AssertionError("expected UsageError")
        except mixvc.UsageError:
            pass

    print("python smoke: all assertions passed")


if __name__ == "__main__":
    main()
