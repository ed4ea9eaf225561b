"""Word-level operation counters used as the energy proxy.

Counting convention: every bind-style XOR contributes its word count to
xor_words; every Hamming distance contributes its word count to both
xor_words and popcount_words (the distance kernel XORs then popcounts).
Accumulation and majority thresholding are not part of the proxy.

Counters are plain ints incremented at the semantic layer, not inside the
kernels, so they cost nothing on the hot path and are exact regardless of
which backend executes.
"""

from dataclasses import dataclass


@dataclass
class OpCounters:
    xor_words: int = 0
    popcount_words: int = 0

    def reset(self) -> None:
        self.xor_words = 0
        self.popcount_words = 0

    def add_xor(self, words: int) -> None:
        self.xor_words += words

    def add_hamming(self, words: int) -> None:
        self.xor_words += words
        self.popcount_words += words

    def snapshot(self) -> dict:
        return {"xor_words": self.xor_words, "popcount_words": self.popcount_words}


COUNTERS = OpCounters()
