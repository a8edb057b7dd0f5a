"""The three-stage exchange over a tappable simulated channel.

For each message bit b (encoded as |b>):

    stage 1  Alice -> Bob   R(tA)|b>
    stage 2  Bob -> Alice   R(tB) R(tA)|b>
    stage 3  Alice -> Bob   R(-tA) R(tB) R(tA)|b>  ==  R(tB)|b>
    Bob applies R(-tB) and measures.

Rotations commute, so an untouched qubit arrives as |b> and Bob's
measurement is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Optional, Protocol, Sequence

from qcert.authority import (
    Certificate,
    MasterKey,
    PlacementMode,
    assemble_stream,
    extract_stream,
    placement_positions,
)
from qcert.bits import Bits, BitsLike, to_bits
from qcert.errors import InvalidArgument
from qcert.qsim import ONE, ZERO, StateVec1, apply1, measure1, rotation
from qcert.rng import RandomSource


class TapPoint(IntEnum):
    STAGE1 = 1
    STAGE2 = 2
    STAGE3 = 3

    @classmethod
    def parse(cls, value) -> TapPoint:
        if isinstance(value, str):
            v = value.strip().lower().removeprefix("stage")
            return cls(int(v))
        return cls(value)


ALL_STAGES = frozenset(TapPoint)


@dataclass(frozen=True)
class PartySecret:
    """A party's secret rotation angle, kept in [0, 2*pi)."""

    angle: float

    def __post_init__(self):
        if not math.isfinite(self.angle):
            raise InvalidArgument(f"secret angle must be finite, got {self.angle!r}")
        object.__setattr__(self, "angle", self.angle % (2.0 * math.pi))

    @classmethod
    def random(cls, rng: RandomSource) -> PartySecret:
        return cls(rng.next_angle())


@dataclass(frozen=True, slots=True)
class Transmission:
    stage: TapPoint
    qubit_index: int
    state_before_tap: StateVec1
    state_after_tap: StateVec1


@dataclass
class SessionTranscript:
    sent_bits: Bits
    received_bits: Bits
    transmissions: list[Transmission] = field(default_factory=list)
    tapped: dict[TapPoint, bool] = field(default_factory=dict)
    # Bob's pre-measurement states, one per bit.
    final_states: list[StateVec1] = field(default_factory=list)


class Interceptor(Protocol):
    """Called with each passing qubit; returns the state to forward.

    An optional ``stages`` attribute restricts which stages are tapped;
    without it every stage is tapped.
    """

    def __call__(self, stage: TapPoint, qubit_index: int, state: StateVec1) -> StateVec1: ...


def encode_bit(b: int) -> StateVec1:
    if b == 0:
        return ZERO
    if b == 1:
        return ONE
    raise InvalidArgument(f"bit must be 0 or 1, got {b!r}")


def _tapped_stages(interceptor: Optional[Callable]) -> frozenset[TapPoint]:
    if interceptor is None:
        return frozenset()
    return frozenset(getattr(interceptor, "stages", ALL_STAGES))


def run_session(
    alice: PartySecret,
    bob: PartySecret,
    bits: BitsLike,
    interceptor: Optional[Interceptor] = None,
    rng: Optional[RandomSource] = None,
) -> SessionTranscript:
    """Send ``bits`` from Alice to Bob one qubit at a time."""
    bits = to_bits(bits)
    if not bits:
        raise InvalidArgument("message must be nonempty")
    if rng is None:
        rng = RandomSource(0)
    taps = _tapped_stages(interceptor)
    ua, ub = rotation(alice.angle), rotation(bob.angle)
    ua_inv, ub_inv = rotation(-alice.angle), rotation(-bob.angle)

    transcript = SessionTranscript(
        sent_bits=bits,
        received_bits=(),
        tapped={s: s in taps for s in TapPoint},
    )
    log = transcript.transmissions

    def send(stage: TapPoint, idx: int, state: StateVec1) -> StateVec1:
        out = state
        if stage in taps:
            out = interceptor(stage, idx, state)
            if not out.is_normalized():
                raise InvalidArgument(
                    f"interceptor returned an unnormalized state at {stage.name}, qubit {idx}"
                )
        log.append(Transmission(stage, idx, state, out))
        return out

    received = []
    for idx, b in enumerate(bits):
        q = send(TapPoint.STAGE1, idx, apply1(ua, encode_bit(b)))
        q = send(TapPoint.STAGE2, idx, apply1(ub, q))
        q = send(TapPoint.STAGE3, idx, apply1(ua_inv, q))
        final = apply1(ub_inv, q)
        transcript.final_states.append(final)
        outcome, _ = measure1(final, rng)
        received.append(outcome)
    transcript.received_bits = tuple(received)
    return transcript


def run_certified_session(
    alice: PartySecret,
    bob: PartySecret,
    message: BitsLike,
    alice_cert: Certificate,
    key: MasterKey,
    interceptor: Optional[Interceptor] = None,
    rng: Optional[RandomSource] = None,
    placement: PlacementMode = PlacementMode.KEYED_BLOCK,
) -> tuple[Bits, Certificate, SessionTranscript]:
    """Embed Alice's (already collapsed) certificate, run the exchange, split on Bob's side."""
    message = to_bits(message)
    if len(alice_cert) != len(key):
        raise InvalidArgument(
            f"certificate length {len(alice_cert)} does not match key length {len(key)}"
        )
    positions = placement_positions(key, len(message), placement)
    stream = assemble_stream(message, alice_cert, positions)
    transcript = run_session(alice, bob, stream, interceptor, rng)
    received_message, received_cert = extract_stream(transcript.received_bits, positions)
    return received_message, received_cert, transcript


class InterceptResend:
    """Measures every qubit passing the given stage and forwards the collapsed state."""

    def __init__(self, stage: TapPoint, rng: RandomSource):
        self.stage = TapPoint(stage)
        self.stages = frozenset({self.stage})
        self.rng = rng
        self.measured: list[int] = []

    def __call__(self, stage: TapPoint, qubit_index: int, state: StateVec1) -> StateVec1:
        bit, collapsed = measure1(state, self.rng)
        self.measured.append(bit)
        return collapsed


def passthrough(stages: Sequence[TapPoint] = tuple(TapPoint)) -> Interceptor:
    """An interceptor that forwards every state unchanged."""

    def tap(stage: TapPoint, qubit_index: int, state: StateVec1) -> StateVec1:
        return state

    tap.stages = frozenset(stages)  # type: ignore[attr-defined]
    return tap
