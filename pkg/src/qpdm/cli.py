"""Command-line front end: support estimation, full mining, quantum vs
classical comparison, and the exhaustive-key attack demo.

JSON on stdout is the canonical output and is byte-identical for identical
(flags, seed) pairs; csv and table renderings are derived from it. Timing
goes to stderr. Exit codes: 0 ok, 2 estimate not accepted within
max_rounds, 64 usage or validation error, 66 unreadable or malformed
database file.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .classical import (
    BitLog,
    ClassicalKey,
    classical_support,
    exhaustive_key_attack,
    index_set,
    next_prime,
    valid_exponents,
)
from .counting import CountingConfig, default_counting_width, joint_support
from .dataset import ParseError, exact_support, pad_to_power_of_two, parse_database, vertical_partition
from .miner import quantum_estimator, run_mining
from .protocol import Transcript, build_qram, transcript_total

EXIT_OK = 0
EXIT_NOT_ACCEPTED = 2
EXIT_USAGE = 64
EXIT_FILE = 66

ENC_FLAGS = {"bitflip": "bitflip", "modadd": "modadd", "cyclic": "cyclic"}


class UsageError(ValueError):
    pass


class FileError(ValueError):
    pass


@dataclass
class RunConfig:
    db_path: str
    split: int
    s: float
    c: float | None
    p: int
    seed: int | None
    key_family: str
    agreement_band: float
    max_rounds: int
    fmt: str
    output: str | None
    with_exact_oracle: bool
    transcript_dump: bool

    def counting(self) -> CountingConfig:
        return CountingConfig(
            p=self.p,
            s=self.s,
            agreement_band=self.agreement_band,
            max_rounds=self.max_rounds,
            key_family=self.key_family,
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(sub):
    sub.add_argument("--db", required=True, help="database file (csv or bitstring lines)")
    sub.add_argument("--split", required=True, type=int, help="Alice holds items 1..split")
    sub.add_argument("--s", type=float, default=0.25, help="preset support threshold")
    sub.add_argument("--p", type=int, default=None, help="counting width (default from 2000/s)")
    sub.add_argument("--seed", type=int, default=None, help="rng seed (env QPDM_SEED as fallback)")
    sub.add_argument("--ci", action="store_true", help="require an explicit seed")
    sub.add_argument("--enc", choices=sorted(ENC_FLAGS), default="bitflip", help="key family")
    sub.add_argument("--band", type=float, default=0.01, help="agreement band as multiple of s")
    sub.add_argument("--max-rounds", type=int, default=20)
    sub.add_argument("--format", choices=("json", "csv", "table"), default="json")
    sub.add_argument("--output", default=None, help="write the report here instead of stdout")
    sub.add_argument("--with-exact-oracle", action="store_true")
    sub.add_argument("--transcript-dump", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="qpdm", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    est = subs.add_parser("estimate", parents=[], help="two-party support estimate")
    _add_common(est)
    est.add_argument("--items", required=True, help="comma-separated item indices, e.g. 1,3")

    mine = subs.add_parser("mine", help="full two-party Apriori mining run")
    _add_common(mine)
    mine.add_argument("--c", type=float, required=True, help="confidence threshold")

    cmp_ = subs.add_parser("compare", help="quantum qubits vs classical bits for one itemset")
    _add_common(cmp_)
    cmp_.add_argument("--items", required=True)
    cmp_.add_argument("--prime", type=int, default=None, help="classical prime (default: next prime > N)")
    cmp_.add_argument("--eA", type=int, default=None)
    cmp_.add_argument("--eB", type=int, default=None)

    atk = subs.add_parser("attack-demo", help="exhaustive-key attack on the classical protocol")
    atk.add_argument("--p", type=int, required=True)
    atk.add_argument("--eA", type=int, required=True)
    atk.add_argument("--eB", type=int, required=True)
    atk.add_argument("--S1", required=True, help="comma-separated values, e.g. 2,8")
    atk.add_argument("--format", choices=("json", "csv", "table"), default="json")
    atk.add_argument("--output", default=None)
    return parser


def _parse_items(text: str, k: int | None = None) -> frozenset:
    parts = [cell.strip() for cell in text.split(",") if cell.strip()]
    if not parts:
        raise UsageError("empty itemset")
    try:
        items = frozenset(int(cell) for cell in parts)
    except ValueError:
        raise UsageError(f"itemset {text!r} is not a comma-separated list of integers")
    if any(i < 1 for i in items):
        raise UsageError("item indices are 1-based")
    if k is not None and any(i > k for i in items):
        raise UsageError(f"item index outside 1..{k}")
    return items


def _resolve_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("QPDM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QPDM_SEED={env!r} is not an integer")
    if args.ci:
        raise UsageError("--ci requires a seed (flag or QPDM_SEED)")
    return None


def _run_config(args) -> RunConfig:
    if not 0 < args.s < 1:
        raise UsageError("support threshold s must lie in (0, 1)")
    c = getattr(args, "c", None)
    if c is not None and not 0 < c < 1:
        raise UsageError("confidence threshold c must lie in (0, 1)")
    if args.band <= 0:
        raise UsageError("agreement band must be positive")
    if args.max_rounds < 1:
        raise UsageError("max rounds must be >= 1")
    p = args.p if args.p is not None else default_counting_width(args.s)
    if p < 1:
        raise UsageError("counting width must be >= 1")
    return RunConfig(
        db_path=args.db,
        split=args.split,
        s=args.s,
        c=c,
        p=p,
        seed=_resolve_seed(args),
        key_family=args.enc,
        agreement_band=args.band,
        max_rounds=args.max_rounds,
        fmt=args.format,
        output=args.output,
        with_exact_oracle=args.with_exact_oracle,
        transcript_dump=args.transcript_dump,
    )


def _load_db(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}")
    try:
        return parse_database(text)
    except ParseError as exc:
        raise FileError(f"{path}: {exc}")


def _build_parties(db, split):
    if not 1 <= split < db.n_items:
        raise UsageError(f"split must lie in 1..{db.n_items - 1}")
    padded = pad_to_power_of_two(db)
    n = (padded.n_transactions - 1).bit_length()
    alice_view, bob_view = vertical_partition(padded, split)
    return build_qram(alice_view, n), build_qram(bob_view, n), padded, n


def cmd_estimate(args) -> int:
    cfg = _run_config(args)
    db = _load_db(cfg.db_path)
    items = _parse_items(args.items, db.n_items)
    alice, bob, padded, n = _build_parties(db, cfg.split)
    transcript = Transcript()
    rng = np.random.default_rng(cfg.seed)
    est = joint_support(alice, bob, items, cfg.counting(), rng, transcript)
    report = {
        "command": "estimate",
        "itemset": sorted(items),
        "estimate": float(est.value),
        "error_bound": est.error_bound,
        "rounds": est.rounds_used,
        "accepted": est.accepted,
        "s1": est.s1,
        "s2": est.s2,
        "qubits_sent": transcript_total(transcript)[0],
    }
    if cfg.with_exact_oracle:
        exact = exact_support(db, items)
        report["exact"] = float(exact)
        report["abs_error"] = abs(float(est.value) - float(exact))
        padded_fraction = Fraction(
            int(exact * db.original_count), padded.n_transactions
        )
        if padded_fraction >= Fraction(1, 2):
            report["warning"] = (
                "padded-space support >= 1/2: the counting readout cannot "
                "distinguish it from its complement"
            )
    if cfg.transcript_dump:
        report["transcript"] = transcript.to_json()
    _emit(report, cfg.fmt, cfg.output)
    return EXIT_OK if est.accepted else EXIT_NOT_ACCEPTED


def cmd_mine(args) -> int:
    cfg = _run_config(args)
    if cfg.c is None:
        raise UsageError("mine requires --c")
    db = _load_db(cfg.db_path)
    alice, bob, padded, n = _build_parties(db, cfg.split)
    transcript = Transcript()
    started = time.perf_counter()
    estimator = quantum_estimator(alice, bob, cfg.counting(), cfg.seed, transcript)
    mining = run_mining(
        alice,
        bob,
        cfg.counting(),
        cfg.c,
        estimator,
        transcript,
        exact_db=db if cfg.with_exact_oracle else None,
    )
    elapsed = time.perf_counter() - started
    report = {
        "command": "mine",
        "s": cfg.s,
        "c": cfg.c,
        "split": cfg.split,
        **mining.to_json_dict(),
    }
    if cfg.transcript_dump:
        report["transcript"] = transcript.to_json()
    print(f"mine: {elapsed:.2f}s wall clock", file=sys.stderr)
    _emit(report, cfg.fmt, cfg.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _run_config(args)
    db = _load_db(cfg.db_path)
    items = _parse_items(args.items, db.n_items)
    alice, bob, padded, n = _build_parties(db, cfg.split)
    rng = np.random.default_rng(cfg.seed)
    transcript = Transcript()
    est = joint_support(alice, bob, items, cfg.counting(), rng, transcript)
    total_qubits, per_call = transcript_total(transcript)

    prime = args.prime if args.prime is not None else next_prime(max(db.original_count, 4))
    exponents = valid_exponents(prime)
    if not exponents:
        raise UsageError(f"prime {prime} admits no valid exponents")
    e_a = args.eA if args.eA is not None else int(rng.choice(exponents))
    e_b = args.eB if args.eB is not None else int(rng.choice(exponents))
    try:
        key_a, key_b = ClassicalKey(prime, e_a), ClassicalKey(prime, e_b)
        bits = BitLog()
        s1 = index_set(alice.view, items)
        s2 = index_set(bob.view, items)
        classical_value = classical_support(s1, s2, key_a, key_b, db.original_count, bits)
    except ValueError as exc:
        raise UsageError(str(exc))

    report = {
        "command": "compare",
        "itemset": sorted(items),
        "exact_support": float(exact_support(db, items)),
        "quantum": {
            "estimate": float(est.value),
            "accepted": est.accepted,
            "rounds": est.rounds_used,
            "oracle_calls": len(transcript.events) // 4,
            "qubits_total": total_qubits,
            "qubits_per_call_max": per_call,
        },
        "classical": {
            "support": float(classical_value),
            "prime": prime,
            "set_sizes": [len(s1), len(s2)],
            "bits_total": bits.total,
        },
    }
    if cfg.transcript_dump:
        report["transcript"] = transcript.to_json()
    _emit(report, cfg.fmt, cfg.output)
    return EXIT_OK


def cmd_attack_demo(args) -> int:
    s1 = _parse_items(args.S1)
    try:
        key_a = ClassicalKey(args.p, args.eA)
        key_b = ClassicalKey(args.p, args.eB)
        singly = {key_a.encrypt(x) for x in s1}
        doubly = {key_b.encrypt(x) for x in singly}
        started = time.perf_counter()
        candidates = exhaustive_key_attack(args.p, singly, doubly)
        elapsed = time.perf_counter() - started
    except ValueError as exc:
        raise UsageError(str(exc))
    report = {
        "p": args.p,
        "singly": sorted(singly),
        "doubly": sorted(doubly),
        "candidates": candidates,
        "elapsed": elapsed,
    }
    _emit(report, args.format, args.output)
    return EXIT_OK


def _scalar(value) -> bool:
    return not isinstance(value, (dict, list))


def _flatten(obj, prefix="") -> list[tuple[str, object]]:
    items = []
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, f"{name}."))
        elif isinstance(value, list) and all(_scalar(v) for v in value):
            items.append((name, " ".join(str(v) for v in value)))
        elif _scalar(value):
            items.append((name, value))
    return items


def _as_csv(report: dict) -> str:
    if report.get("command") == "mine":
        lines = ["X,Y,support,confidence"]
        for rule in report["rules"]:
            x = " ".join(str(i) for i in rule["X"])
            y = " ".join(str(i) for i in rule["Y"])
            lines.append(f"{x},{y},{rule['support']},{rule['confidence']}")
        return "\n".join(lines)
    flat = _flatten(report)
    header = ",".join(key for key, _ in flat)
    row = ",".join(str(value) for _, value in flat)
    return f"{header}\n{row}"


def _as_table(obj, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            if _scalar(value):
                lines.append(f"{pad}{key}: {value}")
            else:
                lines.append(f"{pad}{key}:")
                lines.extend(_as_table(value, indent + 1))
    elif isinstance(obj, list):
        if all(_scalar(v) for v in obj):
            lines.append(f"{pad}{' '.join(str(v) for v in obj)}")
        else:
            for entry in obj:
                lines.append(f"{pad}-")
                lines.extend(_as_table(entry, indent + 1))
    else:
        lines.append(f"{pad}{obj}")
    return lines


def _emit(report: dict, fmt: str, output: str | None) -> None:
    if fmt == "json":
        text = json.dumps(report, indent=2)
    elif fmt == "csv":
        text = _as_csv(report)
    else:
        text = "\n".join(_as_table(report))
    if output is None:
        print(text)
    else:
        # built fully before writing: no partial files on error
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")


COMMANDS = {
    "estimate": cmd_estimate,
    "mine": cmd_mine,
    "compare": cmd_compare,
    "attack-demo": cmd_attack_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qpdm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileError as exc:
        print(f"qpdm: error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except ValueError as exc:
        print(f"qpdm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
