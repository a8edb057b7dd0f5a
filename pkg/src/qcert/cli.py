"""Command-line entry point.

    qcert run --config scenario.json [--seed S] [--trials N] [--out PATH] [--set key=value ...]
    qcert demo
    qcert bell-test [--pairs N] [--seed S]
    qcert attack-sweep [--n-values 1,2,4,8] [--trials N] [--seed S] [--message-len M]

Exit codes: 0 success, 2 usage or validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence, TextIO

from qcert.authority import Certificate, MasterKey, collapse_certificate, issue_batch, verify
from qcert.bits import bits_str
from qcert.errors import ConfigError
from qcert.harness import (
    Scenario,
    ScenarioConfig,
    format_summary,
    run_trials,
    to_jsonl,
)
from qcert.qsim import BellType
from qcert.rng import RandomSource

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


def _spaced(bits) -> str:
    return " ".join(str(b) for b in bits)


def demo_text() -> str:
    """The worked certificate check for master key 1001, both cases."""
    key = MasterKey.parse("1001")
    local = Certificate.parse("1100")
    lines = [
        f"Master key: {key}",
        "Certificate Bell types: [" + " ".join(f"beta0{t.parity}" for t in key.bell_types()) + "]",
        "Bob checks: master key XOR received certificate XOR his certificate",
    ]
    for title, received in (("Case 1", "0101"), ("Case 2", "0001")):
        cert = Certificate.parse(received)
        result = verify(key, cert, local)
        verdict = "Authentic" if result.authentic else "Not Authentic"
        lines += [
            "",
            title,
            f"  {_spaced(key.bits)}   Master Key",
            f"^ {_spaced(cert.bits)}   Alice's Certificate",
            f"  {_spaced(local.bits)}   Bob's Certificate",
            "  " + "-" * (2 * len(key) - 1),
            f"  {_spaced(result.residue)}   residue {bits_str(result.residue)}: {verdict}",
        ]
    return "\n".join(lines) + "\n"


def cmd_demo(out: Optional[TextIO] = None) -> int:
    (out or sys.stdout).write(demo_text())
    return EXIT_OK


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _load_config(args: argparse.Namespace) -> dict:
    with open(args.config, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError("--set", f"expected key=value, got {item!r}")
        data[key.strip()] = _parse_value(raw)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.trials is not None:
        data["trials"] = args.trials
    return data


def cmd_run(args: argparse.Namespace, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if not args.config:
        err.write("error: run requires --config PATH\n")
        return EXIT_USAGE
    try:
        config = ScenarioConfig.from_dict(_load_config(args))
    except ConfigError as exc:
        err.write(f"error: invalid config field {exc.field!r}: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        err.write(f"error: cannot read config: {exc}\n")
        return EXIT_IO

    results, stats = run_trials(config, workers=args.workers)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(to_jsonl(config, results, stats))
        except OSError as exc:
            err.write(f"error: cannot write {args.out}: {exc}\n")
            return EXIT_IO
    out.write(format_summary(config, stats))
    return EXIT_OK


def bell_test_text(pairs: int, seed: int) -> str:
    rng = RandomSource(seed)
    rows = []
    for parity in (0, 1):
        key = MasterKey((parity,) * pairs)
        alice_view, bob_view = issue_batch(key)
        ca = collapse_certificate(alice_view, rng)
        cb = collapse_certificate(bob_view, rng)
        equal = sum(a == b for a, b in zip(ca.bits, cb.bits))
        rows.append(
            (str(BellType(parity)), pairs, equal / pairs, sum(ca.bits) / pairs, sum(cb.bits) / pairs)
        )
    lines = [f"{'type':<5} {'pairs':>7} {'P(equal)':>9} {'P(a=1)':>8} {'P(b=1)':>8}"]
    for name, n, eq, pa, pb in rows:
        lines.append(f"{name:<5} {n:>7d} {eq:>9.4f} {pa:>8.4f} {pb:>8.4f}")
    return "\n".join(lines) + "\n"


def cmd_bell_test(args: argparse.Namespace, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    if args.pairs < 1:
        err.write("error: --pairs must be positive\n")
        return EXIT_USAGE
    out.write(bell_test_text(args.pairs, args.seed))
    return EXIT_OK


def _parse_n_values(raw: str) -> list[int]:
    try:
        values = [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("n_values", f"expected comma-separated integers, got {raw!r}") from None
    if not values:
        raise ConfigError("n_values", "at least one N is required")
    for v in values:
        if v < 1:
            raise ConfigError("n_values", f"N must be >= 1, got {v}")
    return values


def cmd_attack_sweep(args: argparse.Namespace, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        n_values = _parse_n_values(args.n_values)
        configs = [
            ScenarioConfig.from_dict(
                {
                    "scenario": Scenario.MITM_GUESS_CERT.value,
                    "message_len": args.message_len,
                    "cert_len": n,
                    "trials": args.trials,
                    "seed": args.seed,
                }
            )
            for n in n_values
        ]
    except ConfigError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    out.write(f"{'N':>3} {'empirical':>10} {'analytic':>11} {'ci95':>9}\n")
    for n, config in zip(n_values, configs):
        _, stats = run_trials(config, workers=args.workers)
        analytic = 1.0 - 2.0 ** -n
        out.write(f"{n:>3d} {stats.detection_rate:>10.6f} {analytic:>11.8f} {stats.detection_ci95:>9.6f}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcert", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("--config", help="JSON scenario config")
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--out", help="write per-trial JSON lines plus summary here")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    run.add_argument("--workers", type=int, default=1)

    sub.add_parser("demo", help="print the key-1001 certificate check")

    bell = sub.add_parser("bell-test", help="Bell-pair correlation statistics")
    bell.add_argument("--pairs", type=int, default=10_000)
    bell.add_argument("--seed", type=int, default=0)

    sweep = sub.add_parser("attack-sweep", help="guessing-Eve detection rate versus certificate length")
    sweep.add_argument("--n-values", default="1,2,4,8")
    sweep.add_argument("--trials", type=int, default=2_000)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--message-len", type=int, default=16)
    sweep.add_argument("--workers", type=int, default=1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "run":
        return cmd_run(args)
    if args.verb == "demo":
        return cmd_demo()
    if args.verb == "bell-test":
        return cmd_bell_test(args)
    return cmd_attack_sweep(args)


if __name__ == "__main__":
    sys.exit(main())
