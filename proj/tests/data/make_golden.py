#!/usr/bin/env python3
# Copyright 2026  The anonvec Authors
# Licensed under the Apache License, Version 2.0.
#
# Regenerates fixture_utterances.jsonl, fixture_theta.json and
# golden_anonymized.jsonl. The expected output is computed here in plain
# Python, independently of the C++ code.
import json, random
rng = random.Random(20261016)
dim = 6
speakers = ["alice", "bob", "carol"]
utts = []
for s in speakers:
    for u in ["u2", "u1", "u3"]:  # written out of id order on purpose
        utts.append({"speaker_id": s, "utterance_id": s + "-" + u,
                     "vector": [rng.uniform(-1, 1) for _ in range(dim)]})
with open("fixture_utterances.jsonl", "w") as f:
    f.write(json.dumps({"dim": dim}) + "\n")
    for r in utts: f.write(json.dumps(r) + "\n")
w = [rng.uniform(-0.1, 0.1) for _ in range(dim)]
mask = [1, 1, 0, 1, 1, 1]
l1 = sum(abs(x) * m for x, m in zip(w, mask))
assert l1 / dim <= 0.1
with open("fixture_theta.json", "w") as f:
    json.dump({"dim": dim, "epsilon": 0.1, "mask": mask, "w": w, "seed": 7,
               "iters_run": 3}, f); f.write("\n")
out = []
for s in speakers:
    mine = sorted([u for u in utts if u["speaker_id"] == s], key=lambda u: u["utterance_id"])
    mean = [0.0] * dim
    for u in mine:
        for d in range(dim): mean[d] += u["vector"][d]
    mean = [x / len(mine) for x in mean]
    anon = [mean[d] + w[d] * mask[d] for d in range(dim)]
    out.append({"speaker_id": s, "utterance_id": s, "vector": anon})
with open("golden_anonymized.jsonl", "w") as f:
    f.write(json.dumps({"dim": dim}) + "\n")
    for r in out: f.write(json.dumps(r) + "\n")
