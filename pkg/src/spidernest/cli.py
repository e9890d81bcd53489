"""Command-line driver: ``reduce``, ``verify`` and ``bench``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import zlib
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from . import circuit as C
from .circuit import Circuit, CircuitError, parse_qc, write_qc
from .gadgetize import run_pipeline
from .nest import DEFAULT_REPS, OptimizerConfig, optimize
from .phasepoly import ORACLE_LIMIT
from .verify import (MAX_QUBITS, VerificationLimitError, circuit_equiv_postselected,
                     circuit_phase_polynomial, diag_equiv)

log = logging.getLogger("spidernest")

EXIT_OK, EXIT_DIFF, EXIT_PARSE, EXIT_VERIFY, EXIT_SKIPPED = 0, 1, 2, 3, 4
# full statevector checks cost 2**(n_total + n_inputs) amplitudes
FULL_WORK_LIMIT = 22


@dataclass
class RunStats:
    circuit_name: str
    n: int
    delta_n: int
    t_raw: int
    t_initial: int
    t_final: int
    acceptances: int
    seed: int
    reps: int
    wall_seconds: float
    wall_seconds_optimize: float
    verified: str
    fusion_changed_count: bool

    def record(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _read(path: str) -> Circuit:
    return parse_qc(Path(path).read_text(encoding="utf-8"))


def _needs_extended(c: Circuit) -> bool:
    return any(g.kind in (C.PREP_PLUS, C.PREP_MINUS_Y, C.MEASX) or g.cond for g in c.gates)


def reduce_circuit(c: Circuit, name: str, reps: int, seed: int, verify: bool):
    """Run the whole pipeline; returns (output circuit, stats, phi before, phi after)."""
    t0 = time.perf_counter()
    d = run_pipeline(c)
    if d.phi.n >= 4:
        phi, ost = optimize(d.phi, OptimizerConfig(reps=reps, seed=seed))
        acc, t_opt = ost.acceptances, ost.wall_seconds
    else:
        phi, acc, t_opt = d.phi.copy(), 0, 0.0
    out = d.recompose(phi)
    verified = "skipped"
    if verify:
        if out.n_total <= MAX_QUBITS and out.n_total + out.n_inputs <= FULL_WORK_LIMIT:
            if not circuit_equiv_postselected(c, out):
                raise _VerifyFailed(f"{name}: output is not equivalent to the input")
            verified = "full"
        elif phi.n <= ORACLE_LIMIT:
            if not diag_equiv(d.phi, phi):
                raise _VerifyFailed(f"{name}: optimized phase polynomial differs")
            verified = "diag"
    stats = RunStats(
        circuit_name=name, n=d.n_original, delta_n=d.delta_n, t_raw=d.stats["t_raw"],
        t_initial=d.phi.t_count(), t_final=phi.t_count(), acceptances=acc, seed=seed, reps=reps,
        wall_seconds=round(time.perf_counter() - t0, 4), wall_seconds_optimize=round(t_opt, 4),
        verified=verified, fusion_changed_count=d.stats["t_raw"] != d.phi.t_count(),
    )
    return out, stats, d.phi, phi


class _VerifyFailed(Exception):
    pass


def cmd_reduce(args) -> int:
    try:
        c = _read(args.input)
    except (OSError, CircuitError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        out, stats, _, phi = reduce_circuit(c, Path(args.input).stem, args.reps, args.seed, args.verify)
    except _VerifyFailed as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VERIFY
    if args.dump_phi:
        sys.stderr.write(phi.dump())
    if args.output:
        text = write_qc(out, extended=args.extended_qc or _needs_extended(out))
        Path(args.output).write_text(text, encoding="utf-8")
    rec = stats.record()
    if args.stats:
        Path(args.stats).write_text(rec + "\n", encoding="utf-8")
    else:
        print(rec)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        a, b = _read(args.a), _read(args.b)
    except (OSError, CircuitError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.diag:
            ha, hb = circuit_phase_polynomial(a), circuit_phase_polynomial(b)
            if ha.n != hb.n:
                n = max(ha.n, hb.n)
                ha = type(ha)(n, ha.coeffs)
                hb = type(hb)(n, hb.coeffs)
            rep = diag_equiv(ha, hb)
        else:
            rep = circuit_equiv_postselected(a, b, tol=args.tol)
    except VerificationLimitError as e:
        print(f"skipped: {e}")
        return EXIT_SKIPPED
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    print(rep.summary())
    return EXIT_OK if rep.equivalent else EXIT_DIFF


def _corpus(path: str | None) -> list[tuple[str, str]]:
    if path is None:
        root = resources.files("spidernest") / "data"
        files = [f for f in root.iterdir() if f.name.endswith(".qc")]
    else:
        files = list(Path(path).glob("*.qc"))
    return [(f.name, f.read_text(encoding="utf-8")) for f in sorted(files, key=lambda f: f.name)]


def file_seed(seed: int, filename: str) -> int:
    return seed ^ zlib.crc32(filename.encode("utf-8"))


def _table(rows: list[RunStats], errors: dict[str, str]) -> str:
    head = f"{'circuit':<18}{'n':>4}{'dn':>4}{'T raw':>7}{'T init':>8}{'T final':>9}{'time s':>9}  verified"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r.circuit_name:<18}{r.n:>4}{r.delta_n:>4}{r.t_raw:>7}{r.t_initial:>8}"
                     f"{r.t_final:>9}{r.wall_seconds:>9.2f}  {r.verified}")
    for name, msg in errors.items():
        lines.append(f"{name:<18}  FAILED: {msg}")
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    rows: list[RunStats] = []
    errors: dict[str, str] = {}
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for fname, text in _corpus(args.dir):
        name = fname[:-3]
        try:
            c = parse_qc(text)
            out, stats, _, _ = reduce_circuit(c, name, args.reps, file_seed(args.seed, fname), True)
        except (CircuitError, ValueError, _VerifyFailed) as e:
            log.error("%s: %s", fname, e)
            errors[name] = str(e)
            continue
        rows.append(stats)
        if out_dir:
            (out_dir / fname).write_text(write_qc(out, extended=_needs_extended(out)), encoding="utf-8")
    sys.stdout.write(_table(rows, errors))
    if args.report:
        recs = [r.record() for r in rows]
        recs += [json.dumps({"circuit_name": k, "error": v}, sort_keys=True) for k, v in errors.items()]
        Path(args.report).write_text("".join(r + "\n" for r in recs), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spidernest", description="T-count reduction with spider-nest identities")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("reduce", help="optimize one .qc circuit")
    r.add_argument("input")
    r.add_argument("-o", "--output")
    r.add_argument("--reps", type=int, default=DEFAULT_REPS)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--stats")
    r.add_argument("--verify", action="store_true")
    r.add_argument("--extended-qc", action="store_true")
    r.add_argument("--dump-phi", action="store_true")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="check two .qc circuits for equivalence")
    v.add_argument("a")
    v.add_argument("b")
    v.add_argument("--diag", action="store_true", help="compare phase polynomials of diagonal circuits")
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="reduce every .qc file in a directory")
    b.add_argument("dir", nargs="?", help="defaults to the bundled corpus")
    b.add_argument("--reps", type=int, default=DEFAULT_REPS)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--report", help="newline-delimited JSON, one record per circuit")
    b.add_argument("--out-dir", help="also write each reduced circuit here")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
