"""Fixed-width multi-word unsigned values."""

from __future__ import annotations

from dataclasses import dataclass

WORD_BITS = 64
WORD_MASK = (1 << WORD_BITS) - 1


@dataclass(frozen=True)
class WideValue:
    """A ``width``-bit value stored as little-endian 64-bit words.

    Bits above ``width`` are always zero.  Signed values are stored in
    two's-complement form; use :meth:`to_signed` to read them back.
    """

    width: int
    words: tuple[int, ...]

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be positive")
        if len(self.words) != n_words(self.width):
            raise ValueError(f"{self.width}-bit value needs {n_words(self.width)} words")
        top = self.width % WORD_BITS
        if any(w < 0 or w > WORD_MASK for w in self.words) or (
                top and self.words[-1] >> top):
            raise ValueError("value is not in canonical form")

    @classmethod
    def from_int(cls, value: int, width: int) -> "WideValue":
        value &= (1 << width) - 1
        words = tuple((value >> (WORD_BITS * i)) & WORD_MASK for i in range(n_words(width)))
        return cls(width, words)

    def to_int(self) -> int:
        out = 0
        for i, w in enumerate(self.words):
            out |= w << (WORD_BITS * i)
        return out

    def to_signed(self) -> int:
        v = self.to_int()
        sign = 1 << (self.width - 1)
        return (v ^ sign) - sign

    def __int__(self) -> int:
        return self.to_int()

    def __index__(self) -> int:
        return self.to_int()

    def __repr__(self) -> str:
        return f"WideValue({self.width}, {self.to_int():#x})"


def n_words(width: int) -> int:
    return -(-width // WORD_BITS)
