#!/usr/bin/env python3
"""Writes tests/data/full_vocab_dump.jsonl: records listing every token of a
small vocabulary (tail_mass 0), plus the entropy of each record computed here.
"""
import json
import math
import random
import sys
from pathlib import Path


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "tests" / "data"
    rng = random.Random(7)
    lines = [json.dumps({"header": {"tool": "gen_full_dump.py", "vocab": "full"}})]
    entropies = {}
    for q in range(12):
        vocab = rng.choice([16, 64, 256, 1000])
        temp = rng.choice([0.3, 1.0, 3.0])
        logits = [rng.gauss(0.0, 1.0) / temp for _ in range(vocab)]
        labels = 4
        for j in range(labels):
            logits[j] += 2.0
        m = max(logits)
        w = [math.exp(x - m) for x in logits]
        s = sum(w)
        probs = [x / s for x in w]
        h = -sum(p * math.log(p) for p in probs if p > 0)
        qid = f"full-{q:02d}"
        entropies[qid] = h
        tokens = [{"token_text": f"t{i}", "token_id": 100 + i, "prob": p} for i, p in enumerate(probs)]
        cp = {chr(65 + j): probs[j] for j in range(labels)}
        chosen = max(range(labels), key=lambda j: (probs[j], -j))
        rec = {
            "format_version": "1", "question_id": qid, "model_id": "full-lm",
            "dataset_id": "full", "top_tokens": tokens, "tail_mass": 0.0,
            "tail_count": 0, "choice_probs": cp, "chosen_label": chr(65 + chosen),
            "choice_count": labels,
        }
        lines.append(json.dumps(rec))
    (out_dir / "full_vocab_dump.jsonl").write_text("\n".join(lines) + "\n")
    (out_dir / "full_vocab_entropy.json").write_text(json.dumps(entropies, indent=1) + "\n")


if __name__ == "__main__":
    main()
