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
"""Python access to the itft-lab core.

Metrics and records come back as plain dicts and lists.
"""

import json

from . import _core
from ._core import (
    Error,
    SubwordModel,
    english_stopwords,
    js_divergence,
    kl_divergence,
    minimum_vocab_size,
    pearson,
    read_corpus,
    synthetic_domains,
    token_counts,
    word_tokenize,
)

__version__ = _core.__version__

__all__ = [
    "Error",
    "SubwordModel",
    "aggregate",
    "bleu",
    "divergence_matrix",
    "english_stopwords",
    "js_divergence",
    "kl_divergence",
    "minimum_vocab_size",
    "pearson",
    "read_corpus",
    "records",
    "sp_bleu",
    "synthetic_domains",
    "token_counts",
    "word_tokenize",
]


def bleu(hypotheses, references):
    """Corpus BLEU over whitespace tokens with exponential smoothing."""
    return json.loads(_core.bleu_json(list(hypotheses), list(references)))


def sp_bleu(model, hypotheses, references):
    """Corpus BLEU over the pieces of `model` (a SubwordModel or a model path)."""
    if not isinstance(model, SubwordModel):
        model = SubwordModel.load(str(model))
    return json.loads(_core.sp_bleu_json(model, list(hypotheses), list(references)))


def divergence_matrix(train, test, pivot="en", train_size=25000, test_size=1000, seed=222):
    """Divergence matrix between labelled sets of corpus sidecars.

    `train` and `test` map a label to a list of sidecar paths.
    """
    as_paths = lambda sets: {k: [str(p) for p in v] for k, v in sets.items()}
    return json.loads(
        _core.divergence_matrix_json(as_paths(train), as_paths(test), pivot, train_size, test_size, seed)
    )


def records(store):
    return json.loads(_core.records_json(str(store)))


def aggregate(store, group_by):
    return json.loads(_core.aggregate_json(str(store), list(group_by)))
