"""Eve: intercept-resend and man-in-the-middle attacks.

A man-in-the-middle Eve terminates Alice's session (playing Bob) and opens
her own session with Bob (playing Alice). Against the plain protocol Bob has
no way to notice. Against the certified protocol Eve must also supply a
certificate that passes Bob's XOR check, without access to the master key
or to either side's Bell halves. The forging helpers below only receive what
Eve can observe: Alice's decrypted stream, the certificate length and the
placement convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from qcert.authority import (
    AuthResult,
    Certificate,
    MasterKey,
    PlacementMode,
    assemble_stream,
    block_positions,
    collapse_certificate,
    extract_stream,
    issue_batch,
    placement_positions,
    verify,
)
from qcert.bits import Bits, BitsLike, to_bits
from qcert.errors import InvalidArgument
from qcert.rng import RandomSource
from qcert.three_stage import InterceptResend, PartySecret, TapPoint, run_session

OffsetPolicy = Union[str, int]


class StrategyKind(str, Enum):
    INTERCEPT_RESEND = "InterceptResend"
    MITM_PLAIN = "MitmPlain"
    MITM_GUESS_CERT = "MitmGuessCert"
    MITM_KNOWN_PLAINTEXT_CERT = "MitmKnownPlaintextCert"


@dataclass(frozen=True)
class EveStrategy:
    """``stage`` applies to InterceptResend; ``offset_guess`` to the
    known-plaintext attack ("uniform", "append", or a fixed block offset)."""

    kind: StrategyKind
    stage: Optional[TapPoint] = None
    offset_guess: OffsetPolicy = "uniform"

    @classmethod
    def intercept_resend(cls, stage: TapPoint = TapPoint.STAGE1) -> EveStrategy:
        return cls(StrategyKind.INTERCEPT_RESEND, stage=TapPoint(stage))

    @classmethod
    def mitm_plain(cls) -> EveStrategy:
        return cls(StrategyKind.MITM_PLAIN)

    @classmethod
    def guess_cert(cls) -> EveStrategy:
        return cls(StrategyKind.MITM_GUESS_CERT)

    @classmethod
    def known_plaintext_cert(cls, offset_guess: OffsetPolicy = "uniform") -> EveStrategy:
        return cls(StrategyKind.MITM_KNOWN_PLAINTEXT_CERT, offset_guess=offset_guess)


@dataclass(frozen=True)
class AttackOutcome:
    eve_learned: Bits
    bob_received_message: Bits
    bob_auth: Optional[AuthResult] = None
    # what Alice actually put on the wire (message with certificate embedded)
    alice_stream: Bits = ()

    @property
    def detected(self) -> bool:
        return self.bob_auth is not None and not self.bob_auth.authentic


def _nonempty(name: str, bits: Bits) -> None:
    if not bits:
        raise InvalidArgument(f"{name} must be nonempty")


def run_mitm_plain(
    alice: PartySecret,
    bob: PartySecret,
    eve: PartySecret,
    message: BitsLike,
    forged: BitsLike,
    rng: RandomSource,
) -> AttackOutcome:
    message, forged = to_bits(message), to_bits(forged)
    _nonempty("message", message)
    _nonempty("forged", forged)
    with_alice = run_session(alice, eve, message, rng=rng)
    with_bob = run_session(eve, bob, forged, rng=rng)
    return AttackOutcome(
        eve_learned=with_alice.received_bits,
        bob_received_message=with_bob.received_bits,
        alice_stream=message,
    )


def _guess_offset(policy: OffsetPolicy, message_len: int, rng: RandomSource) -> int:
    if policy == "uniform":
        return rng.next_below(message_len + 1)
    if policy == "append":
        return message_len
    if isinstance(policy, int) and not isinstance(policy, bool) and 0 <= policy <= message_len:
        return policy
    raise InvalidArgument(f"offset_guess must be 'uniform', 'append' or an offset in [0, {message_len}]")


def forge_guess(forged: Bits, cert_len: int, rng: RandomSource) -> Bits:
    """Forged message plus N uniform certificate bits at a uniform block offset."""
    offset = rng.next_below(len(forged) + 1)
    guess = Certificate(rng.next_bits(cert_len))
    return assemble_stream(forged, guess, block_positions(offset, cert_len))


def forge_known_plaintext(
    alice_stream: Bits, forged: Bits, cert_len: int, policy: OffsetPolicy, rng: RandomSource
) -> Bits:
    """Lift the block at a guessed offset from Alice's stream and re-embed it there."""
    offset = _guess_offset(policy, len(forged), rng)
    if offset + cert_len > len(alice_stream):
        raise InvalidArgument("guessed block runs past the end of Alice's stream")
    lifted = Certificate(alice_stream[offset:offset + cert_len])
    return assemble_stream(forged, lifted, block_positions(offset, cert_len))


def run_mitm_certified(
    alice: PartySecret,
    bob: PartySecret,
    eve: PartySecret,
    message: BitsLike,
    forged: BitsLike,
    key: Optional[MasterKey],
    strategy: EveStrategy,
    rng: RandomSource,
    placement: PlacementMode = PlacementMode.KEYED_BLOCK,
) -> AttackOutcome:
    """Full MITM against the certified protocol.

    Draw order from ``rng``: Alice's certificate collapse, the Alice-Eve
    session, Eve's forgery, the Eve-Bob session, Bob's certificate collapse.
    """
    if key is None:
        raise InvalidArgument("certified MITM requires a master key")
    if strategy.kind not in (StrategyKind.MITM_GUESS_CERT, StrategyKind.MITM_KNOWN_PLAINTEXT_CERT):
        raise InvalidArgument(f"not a certified-MITM strategy: {strategy.kind.value}")
    message, forged = to_bits(message), to_bits(forged)
    _nonempty("message", message)
    if len(forged) != len(message):
        raise InvalidArgument("forged message must have the same length as Alice's message")
    n = len(key)

    alice_halves, bob_halves = issue_batch(key)
    alice_cert = collapse_certificate(alice_halves, rng)
    alice_positions = placement_positions(key, len(message), placement)
    alice_stream = assemble_stream(message, alice_cert, alice_positions)
    eve_learned = run_session(alice, eve, alice_stream, rng=rng).received_bits

    if strategy.kind is StrategyKind.MITM_GUESS_CERT:
        forged_stream = forge_guess(forged, n, rng)
    else:
        forged_stream = forge_known_plaintext(eve_learned, forged, n, strategy.offset_guess, rng)

    bob_stream = run_session(eve, bob, forged_stream, rng=rng).received_bits
    bob_positions = placement_positions(key, len(bob_stream) - n, placement)
    bob_message, received_cert = extract_stream(bob_stream, bob_positions)
    bob_cert = collapse_certificate(bob_halves, rng)
    return AttackOutcome(
        eve_learned=eve_learned,
        bob_received_message=bob_message,
        bob_auth=verify(key, received_cert, bob_cert),
        alice_stream=alice_stream,
    )


def run_intercept_resend(
    alice: PartySecret,
    bob: PartySecret,
    stage: TapPoint,
    message: BitsLike,
    rng: RandomSource,
) -> AttackOutcome:
    """Eve measures every qubit at one stage in the computational basis."""
    message = to_bits(message)
    _nonempty("message", message)
    eve = InterceptResend(TapPoint(stage), rng.split())
    transcript = run_session(alice, bob, message, eve, rng)
    return AttackOutcome(
        eve_learned=tuple(eve.measured),
        bob_received_message=transcript.received_bits,
        alice_stream=message,
    )
