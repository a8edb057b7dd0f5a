"""Bit-string helpers. Bit strings are tuples of 0/1 ints throughout."""

from __future__ import annotations

from typing import Iterable, Union

from qcert.errors import InvalidArgument

Bits = tuple[int, ...]
BitsLike = Union[str, Iterable[int]]


def to_bits(value: BitsLike) -> Bits:
    """Accept "1011", [1, 0, 1, 1] or any iterable of 0/1 values."""
    if isinstance(value, str):
        s = value.replace(" ", "")
        if any(ch not in "01" for ch in s):
            raise InvalidArgument(f"bit string may only contain 0 and 1: {value!r}")
        return tuple(int(ch) for ch in s)
    out = tuple(int(b) for b in value)
    if any(b not in (0, 1) for b in out):
        raise InvalidArgument(f"bits must be 0 or 1: {out!r}")
    return out


def bits_str(bits: Iterable[int]) -> str:
    return "".join(str(b) for b in bits)


def xor_bits(*strings: Bits) -> Bits:
    lengths = {len(s) for s in strings}
    if len(lengths) > 1:
        raise InvalidArgument(f"bit strings differ in length: {sorted(lengths)}")
    out = [0] * (lengths.pop() if lengths else 0)
    for s in strings:
        for i, b in enumerate(s):
            out[i] ^= b
    return tuple(out)


def hamming(a: Bits, b: Bits) -> int:
    if len(a) != len(b):
        raise InvalidArgument(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))
