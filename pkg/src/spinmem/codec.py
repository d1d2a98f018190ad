"""Text <-> 5-bit character codes <-> bit arrays.

The alphabet is space plus a-z with codes 0..26, written most significant bit
first. Codes 27..31 have no symbol and are rejected on decode.
"""

from __future__ import annotations

from typing import Iterable, Sequence

ALPHABET = " abcdefghijklmnopqrstuvwxyz"
BITS_PER_CHAR = 5
_CODES = {ch: i for i, ch in enumerate(ALPHABET)}


class DecodeError(ValueError):
    pass


def as_bits(bits: Iterable[int] | str) -> tuple[int, ...]:
    """Validate a bit sequence. Accepts ints or a string such as ``"10110"``."""
    if isinstance(bits, str):
        bits = bits.strip()
        if set(bits) - {"0", "1"}:
            raise ValueError(f"bit string may only contain 0 and 1: {bits!r}")
        out = tuple(int(c) for c in bits)
    else:
        out = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in out):
            raise ValueError("bits must be 0 or 1")
    if not out:
        raise ValueError("bit array must not be empty")
    return out


def bits_to_str(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def text_to_bits(text: str) -> tuple[int, ...]:
    text = text.lower()
    bits = []
    for pos, ch in enumerate(text):
        if ch not in _CODES:
            raise ValueError(f"character {ch!r} at position {pos} is not in the 27-symbol alphabet")
        code = _CODES[ch]
        bits.extend((code >> s) & 1 for s in range(BITS_PER_CHAR - 1, -1, -1))
    return tuple(bits)


def bits_to_text(bits: Sequence[int]) -> str:
    bits = as_bits(bits)
    if len(bits) % BITS_PER_CHAR:
        raise DecodeError(f"bit length {len(bits)} is not a multiple of {BITS_PER_CHAR}")
    chars = []
    for g in range(len(bits) // BITS_PER_CHAR):
        code = bits_to_number(bits[g * BITS_PER_CHAR : (g + 1) * BITS_PER_CHAR])
        if code >= len(ALPHABET):
            raise DecodeError(f"group {g} has code {code}, which is outside 0..{len(ALPHABET) - 1}")
        chars.append(ALPHABET[code])
    return "".join(chars)


def bits_to_number(bits: Sequence[int]) -> int:
    value = 0
    for b in as_bits(bits):
        value = (value << 1) | b
    return value


def number_to_bits(value: int, width: int | None = None) -> tuple[int, ...]:
    """Big-endian bits of a non-negative integer, left-padded to ``width``."""
    if value < 0:
        raise ValueError("only non-negative integers can be stored")
    natural = max(value.bit_length(), 1)
    if width is None:
        width = natural
    elif width < natural:
        raise ValueError(f"{value} needs {natural} bits, more than width {width}")
    return tuple((value >> s) & 1 for s in range(width - 1, -1, -1))
