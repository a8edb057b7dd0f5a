"""Exact one- and two-qubit state simulation.

Amplitudes are Python complex numbers. Gates are limited to 2x2 unitaries
(rotations, identity and their adjoints); two-qubit states only appear as
Bell pairs handed out by the certificate authority.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

from qcert.errors import AlreadyCollapsed, InvalidArgument
from qcert.rng import RandomSource

NORM_TOL = 1e-9
UNITARY_TOL = 1e-12
# A basis probability this close to 0 or 1 is treated as exact.
BASIS_SNAP = 1e-12

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _check_finite(*values: complex) -> None:
    for v in values:
        if not cmath.isfinite(v):
            raise InvalidArgument(f"non-finite amplitude {v!r}")


@dataclass(frozen=True, slots=True)
class StateVec1:
    """Single-qubit state a0|0> + a1|1>."""

    a0: complex
    a1: complex

    def __post_init__(self):
        _check_finite(self.a0, self.a1)

    def norm_sq(self) -> float:
        return abs(self.a0) ** 2 + abs(self.a1) ** 2

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_sq() - 1.0) <= tol


ZERO = StateVec1(1.0 + 0j, 0j)
ONE = StateVec1(0j, 1.0 + 0j)


@dataclass(frozen=True, slots=True)
class StateVec2:
    """Two-qubit state over |00>, |01>, |10>, |11> (first index is side A)."""

    a00: complex
    a01: complex
    a10: complex
    a11: complex

    def __post_init__(self):
        _check_finite(self.a00, self.a01, self.a10, self.a11)

    def amplitudes(self) -> tuple[complex, complex, complex, complex]:
        return (self.a00, self.a01, self.a10, self.a11)

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes())

    @classmethod
    def basis(cls, a: int, b: int) -> StateVec2:
        amps = [0j, 0j, 0j, 0j]
        amps[2 * a + b] = 1.0 + 0j
        return cls(*amps)


@dataclass(frozen=True, slots=True)
class Unitary2:
    """Row-major 2x2 matrix [[m00, m01], [m10, m11]]."""

    m00: complex
    m01: complex
    m10: complex
    m11: complex

    def __post_init__(self):
        _check_finite(self.m00, self.m01, self.m10, self.m11)

    def __matmul__(self, other):
        if isinstance(other, Unitary2):
            return Unitary2(
                self.m00 * other.m00 + self.m01 * other.m10,
                self.m00 * other.m01 + self.m01 * other.m11,
                self.m10 * other.m00 + self.m11 * other.m10,
                self.m10 * other.m01 + self.m11 * other.m11,
            )
        if isinstance(other, StateVec1):
            return apply1(self, other)
        return NotImplemented

    def entries(self) -> tuple[complex, complex, complex, complex]:
        return (self.m00, self.m01, self.m10, self.m11)

    def max_abs_diff(self, other: Unitary2) -> float:
        return max(abs(x - y) for x, y in zip(self.entries(), other.entries()))

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return (adjoint(self) @ self).max_abs_diff(IDENTITY) <= tol


IDENTITY = Unitary2(1.0 + 0j, 0j, 0j, 1.0 + 0j)


def rotation(theta: float) -> Unitary2:
    """Real plane rotation [[cos t, -sin t], [sin t, cos t]]."""
    if not math.isfinite(theta):
        raise InvalidArgument(f"rotation angle must be finite, got {theta!r}")
    c, s = math.cos(theta), math.sin(theta)
    return Unitary2(complex(c), complex(-s), complex(s), complex(c))


def adjoint(u: Unitary2) -> Unitary2:
    """Conjugate transpose."""
    return Unitary2(
        u.m00.conjugate(), u.m10.conjugate(), u.m01.conjugate(), u.m11.conjugate()
    )


def apply1(u: Unitary2, psi: StateVec1) -> StateVec1:
    return StateVec1(
        u.m00 * psi.a0 + u.m01 * psi.a1,
        u.m10 * psi.a0 + u.m11 * psi.a1,
    )


def _sample_zero(p0: float, rng: RandomSource) -> bool:
    # Always consume exactly one draw so stream alignment does not depend on the state.
    r = rng.next_real()
    if p0 >= 1.0 - BASIS_SNAP:
        return True
    if p0 <= BASIS_SNAP:
        return False
    return r < p0


def measure1(psi: StateVec1, rng: RandomSource) -> tuple[int, StateVec1]:
    """Computational-basis measurement under the Born rule.

    Returns the outcome bit and the collapsed basis state.
    """
    p0 = abs(psi.a0) ** 2 / psi.norm_sq()
    if _sample_zero(p0, rng):
        return 0, ZERO
    return 1, ONE


class Side(str, Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True, slots=True)
class BellType:
    """Selects beta_00 (parity 0) or beta_01 (parity 1)."""

    parity: int

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise InvalidArgument(f"Bell parity must be 0 or 1, got {self.parity!r}")

    def __str__(self) -> str:
        return f"b0{self.parity}"


def bell_state(t: BellType) -> StateVec2:
    if t.parity == 0:
        return StateVec2(complex(_INV_SQRT2), 0j, 0j, complex(_INV_SQRT2))
    return StateVec2(0j, complex(_INV_SQRT2), complex(_INV_SQRT2), 0j)


@dataclass
class EntangledPair:
    """A shared Bell pair.

    Collapse is lazy: the first measurement on either side samples the joint
    outcome from ``joint`` and records both bits; the second side then reads
    its stored bit without consuming randomness.
    """

    bell: BellType
    joint: StateVec2 = None  # type: ignore[assignment]
    outcome_a: int | None = None
    outcome_b: int | None = None
    measured: set[Side] = field(default_factory=set)

    def __post_init__(self):
        if self.joint is None:
            self.joint = bell_state(self.bell)

    @property
    def collapsed(self) -> bool:
        return self.outcome_a is not None


def measure_half(pair: EntangledPair, side: Side, rng: RandomSource) -> int:
    side = Side(side)
    if side in pair.measured:
        raise AlreadyCollapsed(f"side {side.value} of this pair was already measured")
    if not pair.collapsed:
        probs = [abs(a) ** 2 for a in pair.joint.amplitudes()]
        total = sum(probs)
        r = rng.next_real() * total
        acc = 0.0
        idx = 3
        for i, p in enumerate(probs):
            acc += p
            if p > 0.0 and r < acc:
                idx = i
                break
        while probs[idx] == 0.0:
            # float round-off pushed r past the last nonzero bucket
            idx -= 1
        pair.outcome_a, pair.outcome_b = idx >> 1, idx & 1
        pair.joint = StateVec2.basis(pair.outcome_a, pair.outcome_b)
    pair.measured.add(side)
    return pair.outcome_a if side is Side.A else pair.outcome_b
