"""Trace how fast token-specific masking rates stabilize.

Runs the decision sweep over a planted corpus, snapshots the rate table
at a fixed document interval, and prints the mean per-token rate change
between consecutive snapshots as a TSV stream.  The tail of the trace
answers "how little of the corpus do the rates actually need": the
delta typically falls below typical stop thresholds within the first
tenth of the corpus.
"""

import argparse
import sys

import numpy as np

from pmimask.cooccur import CooccurrenceTable, count_document
from pmimask.masker import choose_masking, eligible_positions
from pmimask.pmi import build_pmi
from pmimask.rates import RateTable, convergence_delta
from pmimask.synth import planted_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-docs", type=int, default=10_000)
    ap.add_argument("--interval", type=int, default=200)
    ap.add_argument("--window", type=int, default=11)
    ap.add_argument("--min-count", type=int, default=5)
    ap.add_argument("--rate", type=float, default=0.15)
    ap.add_argument("--s", type=int, default=30)
    ap.add_argument("--threshold", type=float, default=0.008)
    ap.add_argument("--seed", type=int, default=20260822)
    args = ap.parse_args()

    pc = planted_corpus(n_docs=args.n_docs, seed=args.seed)
    specials = pc.vocab.special_ids
    acc = CooccurrenceTable.empty(pc.vocab.size, args.window)
    for doc in pc.documents:
        count_document(doc, args.window, acc)
    pmi = build_pmi(acc, pc.vocab.size, args.min_count)

    table = RateTable.empty(pc.vocab.size, args.rate)
    prev = None
    crossed = None
    print("docs_processed\tfraction\tdelta")
    for i, doc in enumerate(pc.documents, 1):
        dec = choose_masking(doc, args.s, args.rate, pmi, args.seed, specials)
        if dec is not None:
            elig = eligible_positions(doc.tokens, specials)
            np.add.at(table.occurrences, doc.tokens[elig], 1)
            np.add.at(table.masked_count, doc.tokens[dec.chosen.positions], 1)
        if i % args.interval == 0:
            if prev is not None:
                delta = convergence_delta(prev, table)
                print(f"{i}\t{i / args.n_docs:.3f}\t{delta:.6f}")
                if crossed is None and delta < args.threshold:
                    crossed = i
            prev = table.copy()
    if crossed is None:
        print(f"delta never fell below {args.threshold}", file=sys.stderr)
    else:
        print(
            f"delta < {args.threshold} first reached at {crossed} docs "
            f"({crossed / args.n_docs:.1%} of the corpus)",
            file=sys.stderr,
        )


if __name__ == "__main__":
    main()
