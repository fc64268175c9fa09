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
"""Writes small line-aligned corpora and their expected divergence matrix.

The expected values are computed here with plain Python (whitespace tokens,
lowercased, base-2 Jensen-Shannon), independently of the C++ code.
"""

import collections
import json
import math
import pathlib
import random

OUT = pathlib.Path(__file__).parent / "divergence"

# (label, xx language, vocabulary window start)
CORPORA = [("bible", "si", 0), ("gov", "si", 8), ("news", "ta", 14)]
LINES = 40
WINDOW = 12


def words(prefix, start):
    return [f"{prefix}{i:02d}" for i in range(start, start + WINDOW)]


def jsd(p, q):
    m = {k: 0.5 * p.get(k, 0.0) + 0.5 * q.get(k, 0.0) for k in set(p) | set(q)}
    total = 0.0
    for d in (p, q):
        total += 0.5 * sum(v * math.log2(v / m[k]) for k, v in d.items() if v > 0)
    return total


def dist(lines):
    c = collections.Counter(tok.lower() for line in lines for tok in line.split())
    n = sum(c.values())
    return {k: v / n for k, v in c.items()}


def main():
    OUT.mkdir(exist_ok=True)
    rng = random.Random(222)
    sides = {}
    for label, xx, start in CORPORA:
        en_words = words("En", start)
        xx_words = words(xx, start)
        en, tgt = [], []
        for _ in range(LINES):
            n = rng.randint(3, 8)
            idx = [rng.randrange(WINDOW) for _ in range(n)]
            en.append(" ".join(en_words[i] for i in idx))
            tgt.append(" ".join(xx_words[i] for i in reversed(idx)))
        (OUT / f"{label}.en").write_text("\n".join(en) + "\n")
        (OUT / f"{label}.{xx}").write_text("\n".join(tgt) + "\n")
        sides[label] = {"en": en, xx: tgt}

    labels = [c[0] for c in CORPORA]
    matrix = []
    for r in labels:
        row = []
        for c in labels:
            shared = sorted(set(sides[r]) & set(sides[c]))
            vals = [jsd(dist(sides[r][lang]), dist(sides[c][lang])) for lang in shared]
            row.append(sum(vals) / len(vals))
        matrix.append(row)
    (OUT / "expected.json").write_text(json.dumps({"labels": labels, "values": matrix}, indent=1) + "\n")


if __name__ == "__main__":
    main()
