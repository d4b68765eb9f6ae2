"""Command-line front end.

Subcommands: ``run-deutsch``, ``run-dj``, ``prepare-cavity``, ``cat-prep``,
``feasibility``. Reports go to stdout as JSON (default) or two-column CSV,
diagnostics to stderr.

Exit codes: 0 success, 1 usage error, 2 oracle file / class violation,
3 numeric-invariant failure (e.g. Fock truncation bound).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from pathlib import Path

import numpy as np

from .errors import NumericInvariantError, OracleClassError, OracleParseError
from .feasibility import HardwareParams, feasibility_report, max_feasible_atoms
from .hilbert import fidelity_up_to_phase
from .optics import DEFAULT_ALPHA, DEFAULT_TAIL_EPSILON
from .protocols import (
    ExecutionMode,
    Mode,
    OracleSpec,
    cat_prep_trials,
    minus_state,
    prepare_minus_fock,
    prepare_odd_cat,
    run_deutsch_jozsa,
)

SCHEMA_VERSION = 1
SEED_ENV = "CAVITY_DJ_SEED"
NAMED_ORACLES = ("constant0", "constant1", "parity", "random-balanced")

EXIT_OK, EXIT_USAGE, EXIT_ORACLE, EXIT_NUMERIC = 0, 1, 2, 3

_MODE_ALIASES = {
    "ideal": Mode.IDEAL_GATE,
    "ideal-gate": Mode.IDEAL_GATE,
    "ideal_gate": Mode.IDEAL_GATE,
    "two-level": Mode.TWO_LEVEL_FOCK,
    "two-level-fock": Mode.TWO_LEVEL_FOCK,
    "two_level_fock": Mode.TWO_LEVEL_FOCK,
    "coherent": Mode.THREE_LEVEL_COHERENT,
    "three-level": Mode.THREE_LEVEL_COHERENT,
    "three-level-coherent": Mode.THREE_LEVEL_COHERENT,
    "three_level_coherent": Mode.THREE_LEVEL_COHERENT,
}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# input parsing
# --------------------------------------------------------------------------


def parse_oracle_file(path) -> OracleSpec:
    """Read an oracle file: line 1 ``n``, line 2 the ``2**n`` truth-table bits.

    Entry ``X`` of line 2 is ``F(X)`` with atom A1 as the most significant bit.
    """
    text = Path(path).read_text()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise OracleParseError("empty oracle file", line=1, column=1)
    head = lines[0].strip()
    if not re.fullmatch(r"\d+", head):
        raise OracleParseError(f"expected a positive integer n, got {lines[0]!r}", line=1, column=1)
    n = int(head)
    if n < 1:
        raise OracleParseError("n must be at least 1", line=1, column=1)
    if len(lines) < 2:
        raise OracleParseError("missing truth table line", line=2, column=1)
    table = lines[1].rstrip("\r")
    for col, ch in enumerate(table, start=1):
        if ch not in "01":
            raise OracleParseError(f"unexpected character {ch!r}, expected '0' or '1'", line=2, column=col)
    if len(table) != 2**n:
        raise OracleParseError(
            f"truth table has {len(table)} entries, expected 2^{n} = {2 ** n}",
            line=2,
            column=len(table) + 1,
        )
    for extra, line in enumerate(lines[2:], start=3):
        if line.strip():
            raise OracleParseError("unexpected content after the truth table", line=extra, column=1)
    return OracleSpec.from_string(n, table)


def parse_angle(text: str) -> float:
    """``pi``, ``2pi``, ``0.5*pi``, ``pi/2`` or plain radians."""
    s = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/(\d+(?:\.\d*)?))?", s)
    if m:
        coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(m.group(1))
        if coef is None:
            coef = float(m.group(1))
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def _seed_arg(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed, "flag"
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _seed_arg(env), "env"
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{SEED_ENV}: {exc}") from None
    return None, "default"


def _resolve_mode(args) -> ExecutionMode:
    kind = _MODE_ALIASES[args.mode]
    if kind is Mode.THREE_LEVEL_COHERENT:
        alpha = DEFAULT_ALPHA if args.alpha is None else args.alpha
        eps = DEFAULT_TAIL_EPSILON if args.tail_epsilon is None else args.tail_epsilon
        return ExecutionMode.coherent(alpha, eps)
    if args.alpha is not None or args.tail_epsilon is not None:
        raise UsageError("--alpha / --tail-epsilon only apply to the coherent mode")
    return ExecutionMode(kind)


def _resolve_oracle(name: str, n: int, seed) -> OracleSpec:
    if name == "constant0":
        return OracleSpec.constant(n, 0)
    if name == "constant1":
        return OracleSpec.constant(n, 1)
    if name == "parity":
        return OracleSpec.parity(n)
    if name == "random-balanced":
        if seed is None:
            raise UsageError(f"--oracle random-balanced needs --seed (or {SEED_ENV})")
        return OracleSpec.random_balanced(n, seed)
    path = Path(name)
    if not path.is_file():
        raise UsageError(f"--oracle must be one of {', '.join(NAMED_ORACLES)} or an existing file, got {name!r}")
    oracle = parse_oracle_file(path)
    if oracle.n != n:
        raise UsageError(f"oracle file has n={oracle.n} but the run asks for n={n}")
    return oracle


# --------------------------------------------------------------------------
# deterministic serialization
# --------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in report")
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with insertion-ordered keys and 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _scalar(obj)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    else:
        yield prefix, obj


def to_csv(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["field", "value"])
    for key, v in _flatten(obj):
        if v is None:
            text = ""
        elif isinstance(v, str):
            text = v
        else:
            text = _scalar(v)
        w.writerow([key, text])
    return buf.getvalue()


def render(obj, fmt: str) -> str:
    return to_json(obj) + "\n" if fmt == "json" else to_csv(obj)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _envelope(command: str, config: dict) -> dict:
    return {"schema": SCHEMA_VERSION, "command": command, "config": config}


def _run_config(args, n, seed, seed_source, mode) -> dict:
    return {
        "mode": mode.kind.value,
        "n": n,
        "oracle": args.oracle,
        "alpha": mode.alpha,
        "tail_epsilon": mode.tail_epsilon,
        "seed": seed,
        "seed_source": seed_source,
        "shots": args.shots,
        "output_format": args.format,
    }


def _cmd_run(args, n: int) -> dict:
    seed, source = _resolve_seed(args)
    mode = _resolve_mode(args)
    oracle = _resolve_oracle(args.oracle, n, seed)
    report = run_deutsch_jozsa(oracle, mode, seed=seed or 0, shots=args.shots)
    out = _envelope(args.command, _run_config(args, n, seed, source, mode))
    out.update(report.to_dict())
    return out


def _cmd_prepare_cavity(args) -> dict:
    cavity = prepare_minus_fock()
    out = _envelope(args.command, {"output_format": args.format})
    out.update({
        "cavity_dim": cavity.dims[0],
        "cavity_amplitudes": [[float(a.real), float(a.imag)] for a in cavity.amps],
        "fidelity_vs_minus": fidelity_up_to_phase(cavity, minus_state()),
    })
    return out


def _cmd_cat_prep(args) -> dict:
    seed, source = _resolve_seed(args)
    seed = seed or 0
    c_g = 1 / math.sqrt(2)
    c_f = (1j if args.detect == "f" else -1j) * c_g
    prep = prepare_odd_cat(c_f, c_g, args.alpha, seed=seed, tail_epsilon=args.tail_epsilon)
    config = {
        "alpha": args.alpha,
        "detect": args.detect,
        "tail_epsilon": args.tail_epsilon,
        "seed": seed,
        "seed_source": source,
        "shots": args.shots,
        "output_format": args.format,
    }
    out = _envelope(args.command, config)
    out.update({
        "c_f": [c_f.real, c_f.imag],
        "c_g": [c_g, 0.0],
        "n_max": prep.truncation.n_max,
        "detected_level": prep.detected_level,
        "target_level": prep.target_level,
        "status": prep.status,
        "postselect_probability": prep.postselect_probability,
        "fidelity_with_odd_cat": prep.fidelity_with_odd_cat,
        "cat_overlap": math.exp(-2 * args.alpha**2),
    })
    if args.shots:
        stats = cat_prep_trials(c_f, c_g, args.alpha, args.shots, seed, args.tail_epsilon)
        out.update({"successes": stats.successes, "empirical_rate": stats.empirical_rate})
    return out


def _cmd_feasibility(args) -> dict:
    hw = HardwareParams(
        g=2 * math.pi * args.g_khz * 1e3,
        delta=2 * math.pi * args.delta_khz * 1e3,
        radiative_time=args.radiative_time,
        cavity_damping_time=args.damping_time,
    )
    rep = feasibility_report(hw, args.phi, args.n)
    config = {
        "phi": args.phi,
        "phi_text": args.phi_text,
        "n": args.n,
        "g_khz": args.g_khz,
        "delta_khz": args.delta_khz,
        "radiative_time": args.radiative_time,
        "damping_time": args.damping_time,
        "output_format": args.format,
    }
    out = _envelope(args.command, config)
    out.update(rep.to_dict())
    out["max_feasible_atoms"] = max_feasible_atoms(hw, args.phi)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cavity-dj", description="Cavity-QED Deutsch / Deutsch-Jozsa simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    def seeded(sp):
        sp.add_argument("--seed", type=_seed_arg, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
        sp.add_argument("--shots", type=_nonneg_int, default=0, help="sampled readouts; 0 = exact only")

    for name in ("run-deutsch", "run-dj"):
        sp = sub.add_parser(name)
        if name == "run-dj":
            sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--oracle", default="parity" if name == "run-dj" else "constant0",
                        help=f"{' | '.join(NAMED_ORACLES)} | path to an oracle file")
        sp.add_argument("--mode", choices=sorted(_MODE_ALIASES), default="ideal")
        sp.add_argument("--alpha", type=float, default=None)
        sp.add_argument("--tail-epsilon", type=_positive_float, default=None)
        seeded(sp)
        common(sp)

    sp = sub.add_parser("prepare-cavity")
    common(sp)

    sp = sub.add_parser("cat-prep")
    sp.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    sp.add_argument("--detect", choices=("f", "g"), default="f")
    sp.add_argument("--tail-epsilon", type=_positive_float, default=DEFAULT_TAIL_EPSILON)
    seeded(sp)
    common(sp)

    sp = sub.add_parser("feasibility")
    sp.add_argument("--phi", dest="phi_text", default="pi")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--g-khz", type=_positive_float, default=25.0, help="coupling g / 2pi in kHz")
    sp.add_argument("--delta-khz", type=_positive_float, default=100.0, help="detuning / 2pi in kHz")
    sp.add_argument("--radiative-time", type=_positive_float, default=1e-2)
    sp.add_argument("--damping-time", type=_positive_float, default=1e-2)
    common(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    try:
        if args.command == "run-deutsch":
            out = _cmd_run(args, 1)
        elif args.command == "run-dj":
            if args.n < 1:
                raise UsageError("--n must be >= 1")
            out = _cmd_run(args, args.n)
        elif args.command == "prepare-cavity":
            out = _cmd_prepare_cavity(args)
        elif args.command == "cat-prep":
            out = _cmd_cat_prep(args)
        else:
            try:
                args.phi = parse_angle(args.phi_text)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(str(exc)) from None
            if args.n < 1:
                raise UsageError("--n must be >= 1")
            out = _cmd_feasibility(args)
    except (OracleParseError, OracleClassError) as exc:
        print(f"cavity-dj: oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except NumericInvariantError as exc:
        print(f"cavity-dj: numeric invariant failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError) as exc:
        print(f"cavity-dj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    sys.stdout.write(render(out, args.format))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
