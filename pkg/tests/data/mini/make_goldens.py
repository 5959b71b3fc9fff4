"""Write the mini-corpus golden files from hand-enumerated literals.

Standard library only, no package imports: the goldens pin the binary
formats independently of the code under test.  Derivation, window = 3
(position pairs i < j with j - i <= 2, counted once, canonical key
(min_id, max_id), no pairs across documents):

    ids: [PAD]=0 [UNK]=1 [MASK]=2 the=3 cat=4 sat=5 mat=6 on=7

    doc 0  "the cat sat on the" = [3,4,5,7,3]
        (0,1)->(3,4)  (0,2)->(3,5)  (1,2)->(4,5)  (1,3)->(4,7)
        (2,3)->(5,7)  (2,4)->(3,5)  (3,4)->(3,7)
    doc 1  "the sat mat" = [3,5,6]
        (0,1)->(3,5)  (0,2)->(3,6)  (1,2)->(5,6)
    doc 2  ""  (no tokens, no pairs)

    unigram: the 3, cat 1, sat 2, mat 1, on 1
    pairs:   (3,4) 1  (3,5) 3  (3,6) 1  (3,7) 1
             (4,5) 1  (4,7) 1  (5,6) 1  (5,7) 1     total = 10

    pair-occurrence marginals (count of stored pairs containing the
    token, self-pairs twice): the 6, cat 3, sat 6, mat 2, on 3
    pmi(a,b) = ln(count * 10 / (occ_a * occ_b))
"""

import math
import struct
from pathlib import Path

HERE = Path(__file__).parent

VOCAB_SIZE = 8
WINDOW = 3
UNIGRAM = [0, 0, 0, 3, 1, 2, 1, 1]
PAIRS = [
    (3, 4, 1),
    (3, 5, 3),
    (3, 6, 1),
    (3, 7, 1),
    (4, 5, 1),
    (4, 7, 1),
    (5, 6, 1),
    (5, 7, 1),
]
TOTAL = 10
OCC = {3: 6, 4: 3, 5: 6, 6: 2, 7: 3}
MIN_COUNT = 1


def counts_bytes() -> bytes:
    out = struct.pack("<4sIIIQ", b"CoOC", 1, VOCAB_SIZE, WINDOW, len(PAIRS))
    out += struct.pack(f"<{VOCAB_SIZE}Q", *UNIGRAM)
    for a, b, c in PAIRS:
        out += struct.pack("<IIQ", a, b, c)
    return out


def pmi_bytes() -> bytes:
    ids = list(range(VOCAB_SIZE))  # all ids fit the top-8 cap
    out = struct.pack("<4sIIIQ", b"PMI1", 1, len(ids), MIN_COUNT, len(PAIRS))
    out += struct.pack(f"<{len(ids)}I", *ids)
    for a, b, c in PAIRS:
        value = math.log(c * TOTAL / (OCC[a] * OCC[b]))
        out += struct.pack("<IIf", a, b, value)
    return out


def main() -> None:
    (HERE / "golden_counts.bin").write_bytes(counts_bytes())
    (HERE / "golden_pmi.bin").write_bytes(pmi_bytes())
    print("wrote golden_counts.bin and golden_pmi.bin")


if __name__ == "__main__":
    main()
