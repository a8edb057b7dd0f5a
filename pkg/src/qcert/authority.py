"""Certificate authority: master keys, Bell-pair batches, certificates.

The CA shares a master key with both clients. Bit ``k`` of the key selects
the Bell type of pair ``k`` (0 -> beta_00, 1 -> beta_01). Alice holds side A
of every pair and Bob side B; each collapses their halves into a classical
certificate. Because beta_00 yields equal outcomes and beta_01 opposite ones,

    alice_cert XOR bob_cert == key

which is what :func:`verify` checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from qcert.bits import Bits, BitsLike, bits_str, to_bits, xor_bits
from qcert.errors import InvalidArgument
from qcert.qsim import BellType, EntangledPair, Side, measure_half
from qcert.rng import RandomSource


@dataclass(frozen=True)
class MasterKey:
    bits: Bits

    def __post_init__(self):
        object.__setattr__(self, "bits", to_bits(self.bits))

    @classmethod
    def parse(cls, value: BitsLike) -> MasterKey:
        return cls(to_bits(value))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return bits_str(self.bits)

    @property
    def value(self) -> int:
        """Big-endian integer value of the key bits (0 for the empty key)."""
        return int(str(self), 2) if self.bits else 0

    def bell_types(self) -> list[BellType]:
        return [BellType(b) for b in self.bits]


@dataclass(frozen=True)
class Certificate:
    bits: Bits

    def __post_init__(self):
        object.__setattr__(self, "bits", to_bits(self.bits))

    @classmethod
    def parse(cls, value: BitsLike) -> Certificate:
        return cls(to_bits(value))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return bits_str(self.bits)


@dataclass(frozen=True)
class AuthResult:
    authentic: bool
    residue: Bits

    def __str__(self) -> str:
        verdict = "authentic" if self.authentic else "not authentic"
        return f"{bits_str(self.residue)} ({verdict})"


@dataclass
class PairBatchView:
    """One side's handle on a batch of pairs shared with the other side."""

    pairs: list[EntangledPair]
    side: Side

    def __len__(self) -> int:
        return len(self.pairs)


class PlacementMode(str, Enum):
    KEYED_BLOCK = "KeyedBlock"
    APPEND_END = "AppendEnd"


def gen_master_key(n: int, rng: RandomSource) -> MasterKey:
    if n < 0:
        raise InvalidArgument(f"key length must be nonnegative, got {n}")
    return MasterKey(rng.next_bits(n))


def issue_batch(key: MasterKey) -> tuple[PairBatchView, PairBatchView]:
    """Create one Bell pair per key bit; return Alice's (A) and Bob's (B) views."""
    pairs = [EntangledPair(t) for t in key.bell_types()]
    return PairBatchView(pairs, Side.A), PairBatchView(pairs, Side.B)


def collapse_certificate(halves: PairBatchView, rng: RandomSource) -> Certificate:
    return Certificate(tuple(measure_half(p, halves.side, rng) for p in halves.pairs))


def verify(key: MasterKey, received_cert: Certificate, local_cert: Certificate) -> AuthResult:
    """XOR the key with both certificates; any 1 in the residue rejects."""
    if not len(key) == len(received_cert) == len(local_cert):
        raise InvalidArgument(
            "key and certificates must have equal length: "
            f"{len(key)}, {len(received_cert)}, {len(local_cert)}"
        )
    residue = xor_bits(key.bits, received_cert.bits, local_cert.bits)
    return AuthResult(authentic=not any(residue), residue=residue)


def block_positions(offset: int, n: int) -> list[int]:
    return list(range(offset, offset + n))


def placement_positions(
    key: MasterKey,
    message_len: int,
    mode: PlacementMode = PlacementMode.KEYED_BLOCK,
) -> list[int]:
    """Stream indices occupied by the certificate.

    KeyedBlock puts the certificate as a contiguous block at offset
    ``key.value mod (message_len + 1)``; AppendEnd puts it after the message.
    """
    if message_len < 0:
        raise InvalidArgument(f"message_len must be nonnegative, got {message_len}")
    mode = PlacementMode(mode)
    if mode is PlacementMode.APPEND_END:
        offset = message_len
    else:
        offset = key.value % (message_len + 1)
    return block_positions(offset, len(key))


def _check_positions(positions: Sequence[int], total: int) -> None:
    prev = -1
    for p in positions:
        if not isinstance(p, int) or p <= prev or p >= total:
            raise InvalidArgument(
                f"positions must be strictly increasing indices in [0, {total}): {list(positions)}"
            )
        prev = p


def assemble_stream(message: BitsLike, cert: Certificate, positions: Sequence[int]) -> Bits:
    message = to_bits(message)
    if len(positions) != len(cert):
        raise InvalidArgument(
            f"got {len(positions)} positions for a certificate of length {len(cert)}"
        )
    total = len(message) + len(cert)
    _check_positions(positions, total)
    stream = [None] * total
    for p, b in zip(positions, cert.bits):
        stream[p] = b
    msg = iter(message)
    return tuple(b if b is not None else next(msg) for b in stream)


def extract_stream(stream: BitsLike, positions: Sequence[int]) -> tuple[Bits, Certificate]:
    stream = to_bits(stream)
    _check_positions(positions, len(stream))
    taken = set(positions)
    message = tuple(b for i, b in enumerate(stream) if i not in taken)
    return message, Certificate(tuple(stream[p] for p in positions))
