"""Command-line front end.

Subcommands: `ring` (torsion parameter + certificate), `eval` (value of a
formula), `check` (property suite), `witness` (prime in the two-congruence
progression), `report` (suite + optional evaluation rendered to CSV files
and matplotlib figures in a directory).

Exit codes: 0 success, 1 check failure, 2 input error, 3 resource cap or
search bound exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass

from . import evaluator, formula, group_model, harness, k0ring, lincell, numtheory
from .evaluator import ResourceCapError
from .formula import ParseError
from .group_model import InvalidDescriptor, ScanBoundExhausted


@dataclass
class RunConfig:
    """Everything a command run needs, assembled from the parsed arguments."""

    command: str
    group_path: str | None = None
    formula_text: str | None = None
    formula_file: str | None = None
    out_format: str = "text"
    seed: int | None = None
    max_tuples: int = evaluator.DEFAULT_MAX_TUPLES
    max_cells: int = evaluator.DEFAULT_MAX_CELLS
    trace: bool = False
    config_path: str | None = None
    inject_fault: bool = False
    out_dir: str | None = None
    scan_bound: int = group_model.DEFAULT_SCAN_BOUND
    witness_n: int = 0
    witness_q: int = 0
    witness_bound: int = 10**6

    def load_group(self) -> group_model.GroupDescriptor:
        """Validated descriptor; every group-bound command starts here."""
        return group_model.load_descriptor(self.group_path)

    def formula_input(self) -> str | None:
        if self.formula_file:
            with open(self.formula_file) as fh:
                return fh.read().strip()
        return self.formula_text


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="k0calc",
        description="exact value-ring calculator for dense subgroups of Q",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    ring = sub.add_parser("ring", help="torsion parameter q and its certificate")
    ring.add_argument("--group", required=True, help="group descriptor JSON file")
    ring.add_argument("--format", choices=["text", "json"], default="text")
    ring.add_argument("--scan-bound", type=_positive, default=group_model.DEFAULT_SCAN_BOUND)

    ev = sub.add_parser("eval", help="value of a quantifier-free formula")
    ev.add_argument("--group", required=True)
    ev.add_argument("formula", nargs="?", help="formula text (or use --formula-file)")
    ev.add_argument("--formula-file")
    ev.add_argument("--format", choices=["text", "json"], default="text")
    ev.add_argument("--trace", action="store_true", help="include the evaluation trace")
    ev.add_argument("--max-tuples", type=_positive, default=evaluator.DEFAULT_MAX_TUPLES)
    ev.add_argument("--max-cells", type=_positive, default=evaluator.DEFAULT_MAX_CELLS)

    chk = sub.add_parser("check", help="run the property-check suite")
    chk.add_argument("--config", help="suite configuration JSON file")
    chk.add_argument("--seed", type=int)
    chk.add_argument("--format", choices=["text", "json"], default="text")
    chk.add_argument(
        "--inject-fault",
        action="store_true",
        help="perturb evaluator outputs; the suite must then fail (self-test)",
    )

    wit = sub.add_parser("witness", help="prime Q = -1 (mod n), Q = 2 (mod q)")
    wit.add_argument("n", type=_positive)
    wit.add_argument("q", type=_positive)
    wit.add_argument("--bound", type=_positive, default=10**6)
    wit.add_argument("--format", choices=["text", "json"], default="text")

    rep = sub.add_parser("report", help="suite + optional eval as CSV and figures")
    rep.add_argument("--group", required=True)
    rep.add_argument("--out", required=True, help="output directory")
    rep.add_argument("--formula", help="formula to evaluate and draw")
    rep.add_argument("--config")
    rep.add_argument("--seed", type=int)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.group_path = getattr(args, "group", None)
    cfg.out_format = getattr(args, "format", "text")
    cfg.seed = getattr(args, "seed", None)
    cfg.trace = getattr(args, "trace", False)
    cfg.config_path = getattr(args, "config", None)
    cfg.inject_fault = getattr(args, "inject_fault", False)
    cfg.out_dir = getattr(args, "out", None)
    cfg.scan_bound = getattr(args, "scan_bound", group_model.DEFAULT_SCAN_BOUND)
    cfg.max_tuples = getattr(args, "max_tuples", evaluator.DEFAULT_MAX_TUPLES)
    cfg.max_cells = getattr(args, "max_cells", evaluator.DEFAULT_MAX_CELLS)
    cfg.formula_text = getattr(args, "formula", None)
    cfg.formula_file = getattr(args, "formula_file", None)
    if args.command == "witness":
        cfg.witness_n = args.n
        cfg.witness_q = args.q
        cfg.witness_bound = args.bound
    return cfg


_COMMANDS = {}


def main(argv=None) -> int:
    cfg = config_from_args(build_parser().parse_args(argv))
    try:
        return _COMMANDS[cfg.command](cfg)
    except (InvalidDescriptor, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ResourceCapError, ScanBoundExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


_KNOWN_FERMAT_PRIMES = (2, 3, 5, 17, 257, 65537)


def _ring_notes(desc, cert) -> list[str]:
    notes = []
    if desc.s_kind == "finite":
        notes.append(
            "only finitely many primes are division-closed, which always collapses q to 1"
        )
    if cert.q == 1:
        if desc.s_kind == "cofinite":
            fermats = [p for p in sorted(desc.s_primes) if numtheory.is_fermat_prime(p)]
        else:
            fermats = [p for p in _KNOWN_FERMAT_PRIMES if not desc.in_s(p)]
        if fermats:
            p = fermats[0]
            n = max((p - 1).bit_length() - 1, 0)
            notes.append(
                f"the prime {p} = 2^{n} + 1 is not division-closed and p - 1 = {p - 1} "
                "is a power of two, so q = 1"
            )
    return notes


def cmd_ring(cfg: RunConfig) -> int:
    desc = cfg.load_group()
    cert = group_model.compute_q(desc, scan_bound=cfg.scan_bound)
    ring = k0ring.RingSpec(cert.q)
    notes = _ring_notes(desc, cert)
    if cfg.out_format == "json":
        out = {
            "group": group_model.descriptor_to_json(desc),
            "ring": ring.describe(),
            "trivial": cert.trivial,
            "notes": notes,
        }
        out.update(cert.to_json())
        print(json.dumps(out, indent=2))
        return 0
    print(f"group: {desc.describe()}")
    print(f"q = {cert.q}")
    print(f"candidate ring: {ring.describe()}")
    if cert.kind == "exact-gcd":
        print(f"evidence: exact gcd over the complement {list(cert.complement_primes)}")
        for p, pm1, g in cert.gcd_trace:
            print(f"  p = {p}: p - 1 = {pm1}, running gcd = {g}")
        print(f"  odd part of final gcd: {cert.q}")
    else:
        print(f"evidence: witness primes (complement scan: {list(cert.scanned_primes)})")
        for qp, p in cert.witnesses:
            print(f"  odd candidate {qp} killed by p = {p}: {qp} does not divide {p - 1}")
    print("verdict: " + ("trivial ring (q = 1)" if cert.trivial else "nontrivial candidate ring"))
    for note in notes:
        print(f"note: {note}")
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    desc = cfg.load_group()
    text = cfg.formula_input()
    if not text:
        print("error: no formula given", file=sys.stderr)
        return 2
    f = formula.parse(text)
    cert = group_model.compute_q(desc)
    ring = k0ring.RingSpec(cert.q)
    value, trace = evaluator.evaluate(
        desc, ring, f, max_tuples=cfg.max_tuples, max_cells=cfg.max_cells
    )
    if cfg.out_format == "json":
        out = {"formula": text, "value": value.to_json(), "text": value.text()}
        if cfg.trace:
            out["trace"] = trace.to_json()
        print(json.dumps(out, indent=2))
        return 0
    print(value.text())
    if cfg.trace:
        print(f"trace: {trace.summary()}")
    return 0


def cmd_check(cfg: RunConfig) -> int:
    config = harness.load_suite_config(cfg.config_path) if cfg.config_path else None
    if cfg.seed is not None:
        config = dict(config or harness.DEFAULT_SUITE_CONFIG)
        config["seed"] = cfg.seed
    reports = harness.run_suite(config, tamper_values=cfg.inject_fault)
    if cfg.out_format == "json":
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        for r in reports:
            print(r.line())
    failed = any(not r.passed for r in reports if not r.skipped)
    return 1 if failed else 0


def cmd_witness(cfg: RunConfig) -> int:
    n, q = cfg.witness_n, cfg.witness_q
    if q % 2 == 0:
        print("error: q must be odd", file=sys.stderr)
        return 2
    if math.gcd(n, q) != 1:
        print(f"error: n = {n} and q = {q} are not coprime", file=sys.stderr)
        return 2
    solved = numtheory.crt_solve([(-1, n), (2, q)])
    assert solved is not None  # coprime moduli never conflict
    residue, modulus = solved
    prime = numtheory.find_prime_in_ap(residue, modulus, cfg.witness_bound)
    if prime is None:
        print(
            f"error: no prime = {residue} (mod {modulus}) below {cfg.witness_bound}",
            file=sys.stderr,
        )
        return 3
    note = (
        f"{q} does not divide Q - 1 = {prime - 1}, so Q must be division-closed "
        "in any group whose torsion parameter is divisible by q"
    )
    if cfg.out_format == "json":
        print(
            json.dumps(
                {
                    "n": n,
                    "q": q,
                    "residue": residue,
                    "modulus": modulus,
                    "prime": prime,
                    "note": note,
                },
                indent=2,
            )
        )
        return 0
    print(f"target: Q = -1 (mod {n}) and Q = 2 (mod {q})")
    print(f"combined residue class: {residue} (mod {modulus})")
    print(f"smallest prime: Q = {prime}")
    print(f"check: {prime} mod {n} = {prime % n}, {prime} mod {q} = {prime % q}")
    print(f"note: {note}")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    from . import plotting

    desc = cfg.load_group()
    cert = group_model.compute_q(desc)
    ring = k0ring.RingSpec(cert.q)
    os.makedirs(cfg.out_dir, exist_ok=True)

    config = (
        harness.load_suite_config(cfg.config_path)
        if cfg.config_path
        else dict(harness.DEFAULT_SUITE_CONFIG)
    )
    config["groups"] = [group_model.descriptor_to_json(desc)]
    if cfg.seed is not None:
        config["seed"] = cfg.seed
    reports = harness.run_suite(config)

    checks_csv = os.path.join(cfg.out_dir, "checks.csv")
    with open(checks_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "trials", "failures", "elapsed_s", "status"])
        for r in reports:
            status = "skip" if r.skipped else ("pass" if r.passed else "fail")
            writer.writerow([r.name, r.trials, len(r.failures), f"{r.elapsed:.4f}", status])
    plotting.save_check_summary(reports, os.path.join(cfg.out_dir, "checks.png"))

    if cfg.formula_text:
        f = formula.parse(cfg.formula_text)
        value, trace = evaluator.evaluate(desc, ring, f)
        eval_csv = os.path.join(cfg.out_dir, "eval.csv")
        with open(eval_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["formula", "q", "a", "b", "value", "L", "live_tuples", "cells"])
            writer.writerow(
                [
                    cfg.formula_text,
                    value.q,
                    value.a,
                    value.b,
                    value.text(),
                    trace.L,
                    trace.surviving_tuples,
                    trace.cell_count,
                ]
            )
        norm = formula.normalize(desc, f)
        if formula.is_normalized_divfree(norm) and f.arity in (1, 2):
            cells = lincell.decompose_formula(norm, f.arity)
            plotting.save_cell_figure(
                cells,
                os.path.join(cfg.out_dir, "cells.png"),
                title=f"{cfg.formula_text}  ->  {value.text()}",
            )

    failed = any(not r.passed for r in reports if not r.skipped)
    print(f"report written to {cfg.out_dir}")
    return 1 if failed else 0


_COMMANDS.update(
    {
        "ring": cmd_ring,
        "eval": cmd_eval,
        "check": cmd_check,
        "witness": cmd_witness,
        "report": cmd_report,
    }
)


if __name__ == "__main__":
    raise SystemExit(main())
