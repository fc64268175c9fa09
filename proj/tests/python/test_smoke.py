# Copyright 2026 The itft-lab Authors
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

import json
import math
import pathlib

import pytest

import itft_lab

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def test_version():
    assert itft_lab.__version__ == "0.1.0"


def test_divergence_hand_case():
    assert itft_lab.js_divergence({"a": 0.5, "b": 0.5}, {"a": 1.0}) == pytest.approx(0.31127812445913283, rel=1e-12)
    assert itft_lab.js_divergence({"a": 1.0}, {"b": 1.0}) == 1.0
    assert itft_lab.kl_divergence({"a": 1.0}, {"a": 0.5, "b": 0.5}) == pytest.approx(1.0)
    with pytest.raises(itft_lab.Error):
        itft_lab.kl_divergence({"a": 0.5, "b": 0.5}, {"a": 1.0})


def test_token_counts_and_stopwords():
    stop = set(itft_lab.english_stopwords())
    assert "the" in stop
    counts = itft_lab.token_counts(["The cat, the hat."], stopwords=stop, keep_punctuation=False)
    assert counts == {"cat": 1, "hat": 1}


@pytest.mark.parametrize("path", sorted((FIXTURES / "bleu").glob("*.json")), ids=lambda p: p.stem)
def test_bleu_fixtures(path):
    case = json.loads(path.read_text())
    got = itft_lab.bleu(case["hypotheses"], case["references"])
    assert got["score"] == pytest.approx(case["expected"]["score"], rel=1e-9, abs=1e-9)


def test_subword_round_trip(tmp_path):
    pool = ["hello world", "hello there", "world of words"]
    model = itft_lab.SubwordModel.train(pool, itft_lab.minimum_vocab_size(pool) + 10)
    assert model.decode(model.encode("hello world")) == "hello world"
    model.save(str(tmp_path / "m.json"))
    again = itft_lab.SubwordModel.load(str(tmp_path / "m.json"))
    assert again.id == model.id
    assert itft_lab.sp_bleu(tmp_path / "m.json", pool, pool)["score"] == 100.0


def test_synthetic_and_pearson():
    a, b = itft_lab.synthetic_domains(0.5, grammar=4, lexicon=10, n_pairs=20, seed=3)
    assert len(a) == len(b) == 20
    assert all(len(s.split()) == len(t.split()) for s, t in a)
    r, r2 = itft_lab.pearson([1, 2, 3], [2, 1, 4])
    assert r2 == pytest.approx(3 / 7)
    assert r == pytest.approx(math.sqrt(3 / 7))
