"""Deterministic Monte-Carlo scenario runner.

Trial ``i`` draws everything from ``RandomSource(derive_trial_seed(seed, i))``
in this fixed order (changing it changes every golden file):

1. angles for Alice, Bob and Eve (three draws, always taken; fixed angles
   from the config then override Alice's and Bob's)
2. Alice's message, ``message_len`` bits
3. the master key, ``cert_len`` bits (certified scenarios only)
4. Eve's forged message, ``message_len`` bits (MITM scenarios only)
5. protocol randomness: collapses, measurements, Eve's guesses

Per-trial records and the summary serialize to JSON lines with a fixed field
order; see ``TRIAL_FIELDS`` and ``SUMMARY_FIELDS``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Any, Iterable, Optional, Sequence

from qcert.adversary import (
    EveStrategy,
    run_intercept_resend,
    run_mitm_certified,
    run_mitm_plain,
)
from qcert.authority import PlacementMode, extract_stream, gen_master_key, placement_positions
from qcert.bits import bits_str, hamming
from qcert.errors import ConfigError
from qcert.rng import MASK64, RandomSource
from qcert.three_stage import PartySecret, TapPoint, run_session

Z95 = 1.959963984540054

_GAMMA = 0x9E3779B97F4A7C15


class Scenario(str, Enum):
    HONEST = "Honest"
    INTERCEPT_RESEND = "InterceptResend"
    MITM_PLAIN = "MitmPlain"
    MITM_GUESS_CERT = "MitmGuessCert"
    MITM_KNOWN_PLAINTEXT_CERT = "MitmKnownPlaintextCert"

    @property
    def certified(self) -> bool:
        return self in (Scenario.MITM_GUESS_CERT, Scenario.MITM_KNOWN_PLAINTEXT_CERT)

    @property
    def mitm(self) -> bool:
        return self in (
            Scenario.MITM_PLAIN,
            Scenario.MITM_GUESS_CERT,
            Scenario.MITM_KNOWN_PLAINTEXT_CERT,
        )


def _mix64(z: int) -> int:
    # SplitMix64 finalizer
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Two SplitMix64 rounds over ``master_seed XOR trial_index``.

    Each round is a bijection on 64-bit words, so distinct indices below
    2**64 always give distinct seeds for a fixed master seed.
    """
    z = (master_seed ^ trial_index) & MASK64
    z = _mix64((z + _GAMMA) & MASK64)
    return _mix64((z + _GAMMA) & MASK64)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    message_len: int
    cert_len: int = 0
    trials: int = 1
    seed: int = 0
    angles: Optional[tuple[float, float]] = None
    placement_mode: PlacementMode = PlacementMode.KEYED_BLOCK
    intercept_stage: Optional[TapPoint] = None

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioConfig:
        """Build and validate a config; unknown keys are rejected."""
        if not isinstance(data, dict):
            raise ConfigError("config", "expected an object of ScenarioConfig fields")
        known = set(cls.field_names())
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        for key in ("scenario", "message_len"):
            if key not in data:
                raise ConfigError(key, "required field missing")
        kw = dict(data)
        try:
            kw["scenario"] = Scenario(kw["scenario"])
        except ValueError:
            raise ConfigError(
                "scenario", f"must be one of {[s.value for s in Scenario]}, got {data['scenario']!r}"
            ) from None
        if "placement_mode" in kw:
            try:
                kw["placement_mode"] = PlacementMode(kw["placement_mode"])
            except ValueError:
                raise ConfigError(
                    "placement_mode",
                    f"must be one of {[m.value for m in PlacementMode]}, got {data['placement_mode']!r}",
                ) from None
        if kw.get("intercept_stage") is not None:
            try:
                kw["intercept_stage"] = TapPoint.parse(kw["intercept_stage"])
            except (ValueError, TypeError):
                raise ConfigError(
                    "intercept_stage", f"must be 1, 2 or 3, got {data['intercept_stage']!r}"
                ) from None
        if kw.get("angles") is not None:
            a = kw["angles"]
            if not isinstance(a, (list, tuple)) or len(a) != 2:
                raise ConfigError("angles", "must be a pair [theta_a, theta_b] or null")
            kw["angles"] = tuple(a)
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        def want_int(name: str, lo: int, hi: Optional[int] = None) -> None:
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < lo or (hi is not None and v > hi):
                bound = f"in [{lo}, {hi}]" if hi is not None else f">= {lo}"
                raise ConfigError(name, f"must be an integer {bound}, got {v!r}")

        want_int("message_len", 1)
        want_int("cert_len", 0)
        want_int("trials", 1)
        want_int("seed", 0, MASK64)
        if self.scenario.certified and self.cert_len == 0:
            raise ConfigError("cert_len", f"must be positive for {self.scenario.value}")
        if self.angles is not None:
            for a in self.angles:
                if isinstance(a, bool) or not isinstance(a, (int, float)) or not math.isfinite(a):
                    raise ConfigError("angles", f"angles must be finite numbers, got {self.angles!r}")
        if self.intercept_stage is not None and self.scenario is not Scenario.INTERCEPT_RESEND:
            raise ConfigError("intercept_stage", "only meaningful for InterceptResend")

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.value,
            "message_len": self.message_len,
            "cert_len": self.cert_len,
            "trials": self.trials,
            "seed": self.seed,
            "angles": list(self.angles) if self.angles is not None else None,
            "placement_mode": self.placement_mode.value,
            "intercept_stage": int(self.intercept_stage) if self.intercept_stage is not None else None,
        }


TRIAL_FIELDS = ("trial_index", "detected", "bob_bit_errors", "eve_match_count", "auth_residue")


@dataclass(frozen=True)
class TrialResult:
    """One trial. ``None`` marks a field that does not apply to the scenario.

    ``bob_bit_errors`` counts differences between Bob's received message and
    what his immediate sender transmitted (Eve's forgery under MITM).
    ``eve_match_count`` counts Eve's recovered bits that equal Alice's message.
    """

    trial_index: int
    detected: Optional[bool]
    bob_bit_errors: int
    eve_match_count: Optional[int]
    auth_residue: Optional[str]

    def to_record(self) -> dict[str, Any]:
        return {"record": "trial", **{k: getattr(self, k) for k in TRIAL_FIELDS}}


SUMMARY_FIELDS = (
    "scenario",
    "trials",
    "message_len",
    "cert_len",
    "seed",
    "detection_rate",
    "detection_ci95",
    "mean_bob_ber",
    "bob_ber_ci95",
    "mean_eve_match",
    "eve_match_ci95",
)


@dataclass(frozen=True)
class AggregateStats:
    trials: int
    detection_rate: Optional[float]
    detection_ci95: Optional[float]
    mean_bob_ber: float
    bob_ber_ci95: float
    mean_eve_match: Optional[float]
    eve_match_ci95: Optional[float]


def ci95_half_width(p: float, n: int) -> float:
    """Normal-approximation binomial half-width: 1.96 * sqrt(p (1 - p) / n)."""
    return Z95 * math.sqrt(p * (1.0 - p) / n)


def _draw_parties(config: ScenarioConfig, rng: RandomSource):
    alice, bob, eve = (PartySecret.random(rng) for _ in range(3))
    if config.angles is not None:
        alice, bob = PartySecret(config.angles[0]), PartySecret(config.angles[1])
    return alice, bob, eve


def run_trial(config: ScenarioConfig, trial_index: int) -> TrialResult:
    rng = RandomSource(derive_trial_seed(config.seed, trial_index))
    alice, bob, eve = _draw_parties(config, rng)
    message = rng.next_bits(config.message_len)
    sc = config.scenario
    key = gen_master_key(config.cert_len, rng) if sc.certified else None
    forged = rng.next_bits(config.message_len) if sc.mitm else None

    if sc is Scenario.HONEST:
        received = run_session(alice, bob, message, rng=rng).received_bits
        return TrialResult(trial_index, None, hamming(received, message), None, None)

    if sc is Scenario.INTERCEPT_RESEND:
        stage = config.intercept_stage or TapPoint.STAGE1
        out = run_intercept_resend(alice, bob, stage, message, rng)
        return TrialResult(
            trial_index,
            None,
            hamming(out.bob_received_message, message),
            config.message_len - hamming(out.eve_learned, message),
            None,
        )

    if sc is Scenario.MITM_PLAIN:
        out = run_mitm_plain(alice, bob, eve, message, forged, rng)
        return TrialResult(
            trial_index,
            None,
            hamming(out.bob_received_message, forged),
            config.message_len - hamming(out.eve_learned, message),
            None,
        )

    strategy = EveStrategy.guess_cert() if sc is Scenario.MITM_GUESS_CERT else EveStrategy.known_plaintext_cert()
    out = run_mitm_certified(alice, bob, eve, message, forged, key, strategy, rng, config.placement_mode)
    # The referee (not Eve) knows the true positions and scores her message recovery.
    eve_message, _ = extract_stream(
        out.eve_learned, placement_positions(key, config.message_len, config.placement_mode)
    )
    return TrialResult(
        trial_index,
        out.detected,
        hamming(out.bob_received_message, forged),
        config.message_len - hamming(eve_message, message),
        bits_str(out.bob_auth.residue),
    )


def aggregate(config: ScenarioConfig, results: Iterable[TrialResult]) -> AggregateStats:
    """Pure function of the trial records; input order is irrelevant."""
    results = sorted(results, key=lambda r: r.trial_index)
    n = len(results)
    bits = n * config.message_len

    det = [r.detected for r in results if r.detected is not None]
    detection = sum(det) / len(det) if det else None

    ber = sum(r.bob_bit_errors for r in results) / bits
    eve = [r.eve_match_count for r in results if r.eve_match_count is not None]
    eve_rate = sum(eve) / (len(eve) * config.message_len) if eve else None
    return AggregateStats(
        trials=n,
        detection_rate=detection,
        detection_ci95=ci95_half_width(detection, len(det)) if det else None,
        mean_bob_ber=ber,
        bob_ber_ci95=ci95_half_width(ber, bits),
        mean_eve_match=eve_rate,
        eve_match_ci95=ci95_half_width(eve_rate, len(eve) * config.message_len) if eve else None,
    )


def _run_chunk(args: tuple[ScenarioConfig, Sequence[int]]) -> list[TrialResult]:
    config, indices = args
    return [run_trial(config, i) for i in indices]


def run_trials(
    config: ScenarioConfig, workers: int = 1
) -> tuple[list[TrialResult], AggregateStats]:
    """Run every trial of ``config``; results are merged by trial index."""
    config.validate()
    indices = range(config.trials)
    if workers <= 1:
        results = [run_trial(config, i) for i in indices]
    else:
        chunks = [(config, indices[k::workers]) for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
        results.sort(key=lambda r: r.trial_index)
    return results, aggregate(config, results)


def summary_record(config: ScenarioConfig, stats: AggregateStats) -> dict[str, Any]:
    values = {**config.to_dict(), **asdict(stats)}
    return {"record": "summary", **{k: values[k] for k in SUMMARY_FIELDS}}


def _dumps(record: dict[str, Any]) -> str:
    return json.dumps(record, separators=(", ", ": "), allow_nan=False)


def to_jsonl(config: ScenarioConfig, results: Sequence[TrialResult], stats: AggregateStats) -> str:
    lines = [_dumps(r.to_record()) for r in results]
    lines.append(_dumps(summary_record(config, stats)))
    return "\n".join(lines) + "\n"


def format_summary(config: ScenarioConfig, stats: AggregateStats) -> str:
    """Fixed-order human-readable summary table."""

    def fmt(v: Optional[float]) -> str:
        return "n/a" if v is None else f"{v:.6f}"

    rows = [
        ("scenario", config.scenario.value),
        ("trials", str(stats.trials)),
        ("message_len", str(config.message_len)),
        ("cert_len", str(config.cert_len)),
        ("seed", str(config.seed)),
        ("detection_rate", fmt(stats.detection_rate)),
        ("detection_ci95", fmt(stats.detection_ci95)),
        ("mean_bob_ber", fmt(stats.mean_bob_ber)),
        ("bob_ber_ci95", fmt(stats.bob_ber_ci95)),
        ("mean_eve_match", fmt(stats.mean_eve_match)),
        ("eve_match_ci95", fmt(stats.eve_match_ci95)),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"
