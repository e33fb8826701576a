#!/usr/bin/env python3
"""Writes the synthetic survey corpus used by the cleaning tests.

Outputs tests/data/survey_synthetic.tsv and survey_synthetic_expected.json.
The expected tallies come from a plain rule trace in this script.
"""
import json
import random
import sys
from pathlib import Path

REFUSALS = [
    "don't know/refused", "don't know/skipped", "don't know/skippedrefused",
    "no answer", "not selected", "not selected/no answer", "not sure/refused",
    "not sure/skipped", "omit", "refused", "refused/web blank", "skip",
    "skipped", "skipped on web", "skipped/refused", "skipped/web blank",
    "web blank",
]
# Look like refusals but are not on the list; must be kept.
NEAR_MISSES = [
    "None of the above", "Refused to say", "don't know", "No opinion",
    "Skipped a meal", "Neither", "Other", "not sure",
]
ANSWERS = [
    "Yes", "No", "Approve", "Disapprove", "Agree", "Disagree", "Very likely",
    "Somewhat likely", "Not too likely", "Not at all likely", "Better", "Worse",
    "About the same", "Favor", "Oppose", "Excellent", "Good", "Fair", "Poor",
]
WIDTH = 8


def refusal_variant(rng):
    text = rng.choice(REFUSALS)
    style = rng.randrange(4)
    if style == 1:
        text = text.upper()
    elif style == 2:
        text = text.title()
    elif style == 3:
        text = "  " + text + " "
    return text


def split_percent(rng, total, parts):
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    edges = [0] + cuts + [total]
    return [edges[i + 1] - edges[i] for i in range(parts)]


def make_question(rng, idx):
    n_real = rng.choice([1, 2, 2, 3, 3, 4, 4, 5, 6])
    n_ref = rng.choice([0, 0, 0, 1, 1, 2])
    if rng.random() < 0.05:
        n_real = 0
        n_ref = rng.choice([1, 2, 3])
    choices = rng.sample(ANSWERS, min(n_real, len(ANSWERS)))
    if n_real >= 2 and rng.random() < 0.2:
        choices[-1] = rng.choice(NEAR_MISSES)
    ref = [refusal_variant(rng) for _ in range(n_ref)]
    ref_pct = [rng.randint(1, 6) for _ in ref]

    n = len(choices)
    mode = rng.random()
    if n == 0:
        real_pct = []
    elif mode < 0.55:
        # refusal share taken out of 100, rounding noise inside the window
        target = 100 - sum(ref_pct) if rng.random() < 0.3 else 100
        real_pct = split_percent(rng, max(target, 0), n)
        noise = rng.randint(-(n - 1), n - 1)
        real_pct[0] = max(0, real_pct[0] + noise)
    elif mode < 0.75:
        # exactly on an edge of the window (excluded) or one step inside
        edge = rng.choice([100 - n, 100 + n, 100 - n + 1, 100 + n - 1])
        real_pct = split_percent(rng, edge, n)
    else:
        # decimal percentages near 100
        raw = [rng.random() for _ in range(n)]
        s = sum(raw)
        real_pct = [round(100.0 * r / s, 1) for r in raw]

    cells = [(c, p) for c, p in zip(choices, real_pct)] + list(zip(ref, ref_pct))
    rng.shuffle(cells)
    cells = cells[:WIDTH]
    return {
        "question_id": f"s{idx:04d}",
        "text": f"Synthetic survey question {idx}?",
        "choices": [c for c, _ in cells],
        "ratios": [p for _, p in cells],
    }


def fmt(p):
    return str(p) if isinstance(p, int) else f"{p:.1f}"


def trace(questions):
    refusals = {r.lower() for r in REFUSALS}
    stats = dict(total_in=len(questions), refusal_choices_removed=0,
                 dropped_lt2_choices=0, dropped_invalid_sum=0, total_out=0)
    kept = []
    for q in questions:
        pairs = []
        for c, p in zip(q["choices"], q["ratios"]):
            if c.strip().lower() in refusals:
                stats["refusal_choices_removed"] += 1
            else:
                pairs.append((c, p))
        if len(pairs) < 2:
            stats["dropped_lt2_choices"] += 1
            continue
        n = len(pairs)
        s = sum(p for _, p in pairs)
        if not (100 - n < s < 100 + n):
            stats["dropped_invalid_sum"] += 1
            continue
        kept.append(q["question_id"])
    stats["total_out"] = len(kept)
    return stats, kept


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "tests" / "data"
    rng = random.Random(20240925)
    questions = [make_question(rng, i) for i in range(400)]

    lines = ["# synthetic survey corpus; regenerate with tools/gen_survey_corpus.py",
             "\t".join(["question_id", "text"] + [f"choice_{j+1}" for j in range(WIDTH)]
                       + [f"ratio_{j+1}" for j in range(WIDTH)])]
    for q in questions:
        k = len(q["choices"])
        choices = q["choices"] + [""] * (WIDTH - k)
        ratios = [fmt(p) for p in q["ratios"]] + [""] * (WIDTH - k)
        lines.append("\t".join([q["question_id"], q["text"]] + choices + ratios))
    (out_dir / "survey_synthetic.tsv").write_text("\n".join(lines) + "\n")

    stats, kept = trace(questions)
    (out_dir / "survey_synthetic_expected.json").write_text(
        json.dumps({"stats": stats, "kept": kept}, indent=1) + "\n")
    print(json.dumps(stats))


if __name__ == "__main__":
    main()
