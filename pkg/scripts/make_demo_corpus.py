"""Regenerate the bundled demo corpus under tests/data/demo.

The demo corpus is a 400-document planted corpus used by the CLI tests
and the README walkthrough.  It is checked in; rerun this only when the
generator changes, and expect the test suite to notice if the bytes move.
"""

from pathlib import Path

from pmimask.synth import planted_corpus

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "demo"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    pc = planted_corpus(n_docs=400, seed=20260822)
    pc.write(OUT / "corpus.txt", OUT / "vocab.txt")
    n_tokens = sum(len(d.tokens) for d in pc.documents)
    print(f"wrote {len(pc.documents)} docs, {n_tokens} tokens to {OUT}")


if __name__ == "__main__":
    main()
