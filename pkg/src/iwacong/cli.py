"""Command line driver.

One self-describing workspace file feeds every command; flags only select
what to run and how to print it.  Reports are deterministic for a fixed
input: the body depends only on the workspace and the arguments, and the
single timing line at the end is the only part that varies between runs.

Exit codes: 0 when every verdict passes, 1 when some check fails, 2 for
any input or validation error (in which case nothing is computed).

The only environment variable read is IWACONG_THREADS, the worker count
for independent checks; results are assembled in sorted key order either
way.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .cmfields import ImagQuadField, is_p_split, verify_5322
from .eiscoeff import check_transfer_congruence
from .iwalg import TraceIdealBasis
from .k1patch import check_MS1, check_MS2, check_MS3
from .qexpand import diagonal_restrict
from .workspace import (
    Workspace,
    WorkspaceError,
    fixture_path,
    load_workspace,
)

logger = logging.getLogger("iwacong.cli")

REPORT_FORMAT = "iwacong-report"
REPORT_VERSION = 1


class UsageError(ValueError):
    """Bad arguments or violated command preconditions; exit code 2."""


def _thread_count() -> int:
    raw = os.environ.get("IWACONG_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"IWACONG_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"IWACONG_THREADS must be at least 1, got {n}")
    return n


def _run_checks(jobs: list, worker) -> list:
    """Apply the worker to every job, possibly on a thread pool; the
    caller sorts results, so completion order never matters."""
    threads = _thread_count()
    if threads == 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, jobs))


# ----------------------------------------------------------------- report


@dataclass(frozen=True)
class CheckResult:
    key: str
    verdict: str  # "pass" | "fail"
    detail: str
    witness: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.verdict not in ("pass", "fail"):
            raise ValueError(f"verdict must be pass or fail, got {self.verdict!r}")


@dataclass
class Report:
    command: str
    prime: int | None = None
    precision: int | None = None
    seed: int | None = None
    workspace: str | None = None
    checks: list[CheckResult] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    def finish(self, started: float) -> "Report":
        self.checks.sort(key=lambda c: c.key)
        self.elapsed = time.monotonic() - started
        return self

    @property
    def ok(self) -> bool:
        return all(c.verdict == "pass" for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def body_lines(self) -> list[str]:
        out = [f"{REPORT_FORMAT} {REPORT_VERSION}", f"command {self.command}"]
        if self.workspace is not None:
            out.append(f"workspace {self.workspace}")
        for name in ("prime", "precision", "seed"):
            value = getattr(self, name)
            if value is not None:
                out.append(f"{name} {value}")
        for c in self.checks:
            out.append(f"check {c.key} {c.verdict} {c.detail}")
            out.extend(f"witness {c.key} {w}" for w in c.witness)
        out.extend(f"notice {n}" for n in self.notices)
        passed = sum(c.verdict == "pass" for c in self.checks)
        out.append(f"summary checks={len(self.checks)} passed={passed} "
                   f"failed={len(self.checks) - passed}")
        out.append(f"result {'pass' if self.ok else 'fail'}")
        return out

    def text(self) -> str:
        return "\n".join(self.body_lines() + [f"timing {self.elapsed:.3f}s"]) + "\n"

    def jsonl(self) -> str:
        def dump(obj) -> str:
            return json.dumps(obj, sort_keys=True, separators=(",", ":"))

        head = {"record": "header", "format": REPORT_FORMAT,
                "version": REPORT_VERSION, "command": self.command,
                "workspace": self.workspace, "prime": self.prime,
                "precision": self.precision, "seed": self.seed}
        rows = [dump(head)]
        rows += [dump({"record": "check", "key": c.key, "verdict": c.verdict,
                       "detail": c.detail, "witness": list(c.witness)})
                 for c in self.checks]
        rows += [dump({"record": "notice", "text": n}) for n in self.notices]
        passed = sum(c.verdict == "pass" for c in self.checks)
        rows.append(dump({"record": "summary", "checks": len(self.checks),
                          "passed": passed,
                          "failed": len(self.checks) - passed, "ok": self.ok}))
        rows.append(dump({"record": "timing", "seconds": round(self.elapsed, 3)}))
        return "\n".join(rows) + "\n"


def _stamp(report: Report, ws: Workspace) -> Report:
    report.prime = ws.prime
    report.precision = ws.precision
    report.seed = ws.seed
    report.workspace = ws.path
    return report


# --------------------------------------------------------------- commands


def cmd_verify_congruence(ws: Workspace, betas: list[str] | None = None,
                          congruence: str | None = None) -> Report:
    """Transfer congruence checks, one verdict per declared beta'.

    betas=None runs every declared check; an explicit empty list yields
    an empty-verdict report.
    """
    started = time.monotonic()
    names = [congruence] if congruence else sorted(ws.congruences)
    for name in names:
        if name not in ws.congruences:
            raise UsageError(f"workspace declares no congruence {name!r}")
    if congruence is None and not names:
        raise UsageError("workspace declares no congruence sections")

    jobs = []
    for name in names:
        decl = ws.congruences[name]
        for idx, (label, up_name, down_name) in enumerate(decl.checks):
            if betas is not None and label not in betas:
                continue
            jobs.append((decl, idx, label, up_name, down_name))
    if betas:
        declared = {label for name in names
                    for label, _u, _d in ws.congruences[name].checks}
        missing = sorted(set(betas) - declared)
        if missing:
            raise UsageError(f"no declared check for beta labels {missing}")

    ideals: dict = {}

    def worker(job) -> CheckResult:
        decl, idx, label, up_name, down_name = job
        up, down = ws.sides[up_name], ws.sides[down_name]
        act = up.target.action
        if act not in ideals:
            ideals[act] = TraceIdealBasis(act, ws.prime, ws.precision)
        result = check_transfer_congruence(label, up, down, ideals[act],
                                           compare_swapped=decl.compare_swapped)
        witness = [f"residual {result.residual!r}"]
        if result.free_witness is not None:
            witness.append(f"free-part {result.free_witness!r}")
        if result.swapped_verdict is not None:
            witness.append(
                f"swapped {'pass' if result.swapped_verdict else 'fail'}")
        witness += list(result.diagnostics)
        ok = result.verdict and (result.swapped_verdict is not False)
        detail = ("transfer congruence holds" if ok
                  else (result.diagnostics[0] if result.diagnostics
                        else "swapped comparison fails"))
        return CheckResult(f"congruence/{decl.name}/{idx:03d}/{label}",
                           "pass" if ok else "fail", detail, tuple(witness))

    # trace-ideal bases are shared per action; build them up front so the
    # worker never races on the cache
    for decl, _idx, _label, up_name, _down in jobs:
        act = ws.sides[up_name].target.action
        if act not in ideals:
            ideals[act] = TraceIdealBasis(act, ws.prime, ws.precision)

    report = Report(command=_echo("verify-congruence", ws, betas=betas,
                                  congruence=congruence))
    report.checks = _run_checks(jobs, worker)
    return _stamp(report, ws).finish(started)


def cmd_residue_symbols(p: int, r: int, m: int, D: int, bound: int) -> Report:
    """Norm-compatibility of power residue symbols, one line per prime
    up to the bound.  The fixed prime must split in the imaginary
    quadratic field; primes dividing p*m*disc are skipped with a notice.
    """
    started = time.monotonic()
    try:
        K = ImagQuadField(D, p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        if not is_p_split(K):
            raise UsageError(f"p={p} does not split in Q(sqrt(-{D}))")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if r < 2:
        raise UsageError("need r >= 2: the identity compares two levels")
    if m == 0:
        raise UsageError("m must be nonzero")
    if bound < 2:
        raise UsageError("bound must be at least 2")

    result = verify_5322(K, m, r, bound)
    report = Report(command=f"residue-symbols p={p} r={r} m={m} D={D} bound={bound}")
    width = len(str(bound))
    for c in result.checks:
        key = f"ell/{c.ell:0{width}d}"
        if c.error:
            report.checks.append(CheckResult(key, "fail", c.error))
            continue
        detail = (f"f_low={c.f_lower} f_up={c.f_upper} g_rel={c.rel_primes} "
                  f"exp_low={c.exponent_lower} exp_up={c.exponent_upper} "
                  f"lhs={c.lhs_exponent} rhs={c.rhs_exponent}")
        report.checks.append(
            CheckResult(key, "pass" if c.ok else "fail", detail))
    for ell in result.skipped:
        report.notices.append(
            f"skipped ell={ell}: divides p*m*disc, identity not stated there")
    return report.finish(started)


def cmd_k1_check(ws: Workspace, family: str | None = None) -> Report:
    """Patching conditions MS1-MS3 for each declared measure family."""
    started = time.monotonic()
    names = [family] if family else sorted(ws.families)
    for name in names:
        if name not in ws.families:
            raise UsageError(f"workspace declares no family {name!r}")
    if not names:
        raise UsageError("workspace declares no measure families")

    report = Report(command=_echo("k1-check", ws, family=family))
    for name in names:
        decl = ws.families[name]
        tower = ws.towers[decl.tower_name]
        for cond, check in (("MS1", check_MS1), ("MS2", check_MS2),
                            ("MS3", check_MS3)):
            verdict = check(decl.family, tower)
            witness = list(verdict.failures)
            if cond == "MS3":
                witness += [f"residual level={r} {w!r}"
                            for r, w in verdict.witnesses]
            detail = ("condition holds" if verdict.ok else verdict.failures[0])
            report.checks.append(
                CheckResult(f"k1/{name}/{cond}", "pass" if verdict.ok else "fail",
                            detail, tuple(witness)))
        flags = " ".join(
            f"level{r}={'unit' if f else 'non-unit'}"
            for r, f in enumerate(decl.family.unit_flags))
        report.notices.append(f"family {name}: {flags}")
    return _stamp(report, ws).finish(started)


def cmd_trace_test(ws: Workspace, element: str | None = None) -> Report:
    """Trace-ideal membership for declared probe elements, against their
    embedded expected verdicts."""
    started = time.monotonic()
    names = [element] if element else sorted(ws.probes)
    for name in names:
        if name not in ws.probes:
            raise UsageError(f"workspace declares no probe {name!r}")
    if not names:
        raise UsageError("workspace declares no trace probes")

    ideals: dict = {}
    report = Report(command=_echo("trace-test", ws, element=element))
    for name in names:
        probe = ws.probes[name]
        act = ws.actions[probe.action_name]
        if act not in ideals:
            ideals[act] = TraceIdealBasis(act, ws.prime, ws.precision)
        T = ideals[act]
        inside = T.contains(probe.element)
        got = "inside" if inside else "outside"
        ok = got == probe.expect
        residual = T.reduce(probe.element)
        report.checks.append(CheckResult(
            f"trace/{name}", "pass" if ok else "fail",
            f"element is {got} the trace ideal, expected {probe.expect}",
            (f"residual {residual!r}",)))
    return _stamp(report, ws).finish(started)


def cmd_qexp_restrict(ws: Workspace, expansion: str | None = None) -> Report:
    """Diagonal restriction of declared expansions; embedded expected
    coefficients, when present, become one verdict each plus a support
    comparison."""
    started = time.monotonic()
    names = [expansion] if expansion else sorted(ws.expansions)
    for name in names:
        if name not in ws.expansions:
            raise UsageError(f"workspace declares no expansion {name!r}")
    if not names:
        raise UsageError("workspace declares no expansions")

    report = Report(command=_echo("qexp-restrict", ws, expansion=expansion))
    for name in names:
        decl = ws.expansions[name]
        restricted = diagonal_restrict(decl.expansion)
        if decl.expect is None:
            lines = tuple(
                f"coefficient {beta} = {restricted.coeffs[beta]!r}"
                for beta in sorted(restricted.coeffs))
            report.checks.append(CheckResult(
                f"qexp/{name}", "pass",
                f"restriction has {len(restricted.coeffs)} coefficients",
                lines))
            continue
        expected_support = {b for b, a in decl.expect.items() if not a.is_zero()}
        got_support = set(restricted.coeffs)
        report.checks.append(CheckResult(
            f"qexp/{name}/support",
            "pass" if expected_support == got_support else "fail",
            f"support size {len(got_support)}, expected {len(expected_support)}",
            tuple(f"unexpected {b}" for b in sorted(got_support - expected_support))
            + tuple(f"missing {b}" for b in sorted(expected_support - got_support))))
        for beta in sorted(decl.expect):
            want = decl.expect[beta]
            got = restricted.coeffs.get(beta)
            if got is None:
                ok = want.is_zero()
                detail = "coefficient is zero" + ("" if ok else ", expected nonzero")
                witness = (f"expected {want!r}",)
            else:
                ok = got == want
                detail = ("coefficient matches" if ok else
                          "coefficient differs from the expected value")
                witness = (f"computed {got!r}", f"expected {want!r}")
            report.checks.append(CheckResult(
                f"qexp/{name}/{_beta_key(beta)}", "pass" if ok else "fail",
                detail, witness))
    return _stamp(report, ws).finish(started)


def _beta_key(beta: tuple[int, ...]) -> str:
    return "(" + ",".join(str(x) for x in beta) + ")"


def _echo(command: str, ws: Workspace, **kw) -> str:
    parts = [command, ws.path or "<string>"]
    for key in sorted(kw):
        value = kw[key]
        if value is None:
            continue
        if isinstance(value, list):
            value = ",".join(value) if value else "(none)"
        parts.append(f"{key}={value}")
    return " ".join(parts)


# ------------------------------------------------------------- entry point


def _resolve_path(arg: str) -> str:
    if arg.startswith("bundled:"):
        return str(fixture_path(arg.split(":", 1)[1]))
    return arg


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("text", "jsonl"), default="text",
                     help="report rendering (default text)")
    sub.add_argument("--out", default=None,
                     help="write the report to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iwacong",
        description="Finite-level congruence checks driven by workspace files.")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("verify-congruence",
                        help="transfer congruence checks from a workspace")
    s.add_argument("workspace", help="workspace path, or bundled:<name>")
    s.add_argument("--betas", default=None,
                   help="comma-separated beta' labels; empty string selects none")
    s.add_argument("--congruence", default=None,
                   help="run one named congruence section only")
    _add_common(s)

    s = subs.add_parser("residue-symbols",
                        help="norm compatibility of power residue symbols")
    s.add_argument("-p", type=int, required=True, help="split odd prime")
    s.add_argument("-r", type=int, required=True, help="upper tower level")
    s.add_argument("-m", type=int, required=True, help="symbol argument")
    s.add_argument("-D", type=int, required=True,
                   help="squarefree positive D for Q(sqrt(-D))")
    s.add_argument("--bound", type=int, required=True,
                   help="check rational primes up to this bound")
    _add_common(s)

    s = subs.add_parser("k1-check", help="patching conditions for families")
    s.add_argument("workspace")
    s.add_argument("--family", default=None)
    _add_common(s)

    s = subs.add_parser("trace-test", help="trace-ideal membership probes")
    s.add_argument("workspace")
    s.add_argument("--element", default=None, help="run one named probe only")
    _add_common(s)

    s = subs.add_parser("qexp-restrict", help="diagonal restriction checks")
    s.add_argument("workspace")
    s.add_argument("--expansion", default=None)
    _add_common(s)
    return parser


def _dispatch(args: argparse.Namespace) -> Report:
    if args.command == "residue-symbols":
        return cmd_residue_symbols(args.p, args.r, args.m, args.D, args.bound)
    ws = load_workspace(_resolve_path(args.workspace))
    if args.command == "verify-congruence":
        betas = None if args.betas is None else \
            [b for b in args.betas.split(",") if b]
        return cmd_verify_congruence(ws, betas, args.congruence)
    if args.command == "k1-check":
        return cmd_k1_check(ws, args.family)
    if args.command == "trace-test":
        return cmd_trace_test(ws, args.element)
    if args.command == "qexp-restrict":
        return cmd_qexp_restrict(ws, args.expansion)
    raise UsageError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = _dispatch(args)
    except (WorkspaceError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rendered = report.text() if args.format == "text" else report.jsonl()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
