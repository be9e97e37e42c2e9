"""Regenerate the bundled workspace fixtures.

Every file under src/iwacong/fixtures is produced here, deterministically,
and every embedded expectation is recomputed and asserted before writing.
Run from the repository root:

    python3 tools/make_fixtures.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from iwacong.abgroups import CyclicAction, FiniteAbelianGroup, GroupHom
from iwacong.eiscoeff import check_transfer_congruence
from iwacong.iwalg import CoeffRing, GroupRingElt, TraceIdealBasis, trace_map
from iwacong.qexpand import QExpansion, cos_field_data, enumerate_trace_fiber
from iwacong.synth import (
    all_pass_family,
    perturb_workspace,
    random_congruence_workspace,
    random_unit_measure,
    synthetic_tower,
)
from iwacong.workspace import (
    _NameAllocator,
    congruence_workspace_text,
    document,
    family_sections,
    parse_workspace,
    probe_sections,
    tower_sections,
)

OUT = Path(__file__).resolve().parent.parent / "src" / "iwacong" / "fixtures"


def write(name: str, text: str) -> None:
    path = OUT / f"{name}.ws"
    parse_workspace(text)  # every fixture must load cleanly
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path} ({len(text)} bytes)")


def congruence_small() -> None:
    pairs = []
    for seed in (11, 12):
        up, down, _ideal, up_pairs, down_pairs = random_congruence_workspace(
            random.Random(seed), return_pairs=True)
        pairs.append(("b0", up, down, up_pairs, down_pairs))
    write("congruence_small",
          congruence_workspace_text(pairs, 3, 2, seed=11))


def congruence_broken() -> None:
    up, down, ideal, kind, diag, up_pairs, down_pairs = perturb_workspace(
        random.Random(9), kind="generic_val", tries=60, return_pairs=True)
    report = check_transfer_congruence("b0", up, down, ideal)
    assert not report.verdict and any(diag in d for d in report.diagnostics)
    write("congruence_broken",
          congruence_workspace_text(
              [("b0", up, down, up_pairs, down_pairs)], 3, 2, seed=9))


def k1_tower() -> None:
    tower = synthetic_tower(3, 2, 2)
    names = _NameAllocator()
    body = tower_sections("T", tower, names)
    ring = CoeffRing(3, 2)
    const = [GroupRingElt.one(tower.group(r), ring) for r in range(3)]
    from iwacong.k1patch import MeasureFamily, check_MS1, check_MS2, check_MS3
    trivial = MeasureFamily(tuple(const))
    bumped = all_pass_family(tower, random.Random(6))
    for fam in (trivial, bumped):
        for check in (check_MS1, check_MS2, check_MS3):
            assert check(fam, tower).ok
    body += family_sections("trivial", "T", trivial)
    body += family_sections("bumped", "T", bumped)
    write("k1_tower", document(3, 2, 5, names.prelude() + body))


def trace_probes() -> None:
    group = FiniteAbelianGroup((9,))
    sigma = GroupHom(group, group, ((4,),))
    act = CyclicAction(group, sigma, 3)
    ring = CoeffRing(3, 2)
    T = TraceIdealBasis(act, 3, 2)
    names = _NameAllocator()
    act_name = names.action(act)

    rng = random.Random(7)
    probes = {
        "traced-unit": (trace_map(random_unit_measure(group, ring, rng), act),
                        "inside"),
        "p-multiple": (GroupRingElt.one(group, ring) * 3, "inside"),
        "orbit-sum": (GroupRingElt.delta(group, ring, (1,))
                      + GroupRingElt.delta(group, ring, (4,))
                      + GroupRingElt.delta(group, ring, (7,)), "inside"),
        "free-delta": (GroupRingElt.delta(group, ring, (1,)), "outside"),
        "bare-identity": (GroupRingElt.one(group, ring), "outside"),
    }
    body = []
    for name, (elt, expect) in probes.items():
        assert T.contains(elt) == (expect == "inside"), name
        body += probe_sections(name, act_name, elt, expect)
    write("trace_probes", document(3, 2, 7, names.prelude() + body))


def qexp_cos9() -> None:
    F = cos_field_data()
    group = FiniteAbelianGroup((3,))
    ring = CoeffRing(3, 2)
    names = _NameAllocator()
    g_name = names.group(group)

    rng = random.Random(13)
    bound = 12
    support = []
    for target in ((1,), (2,), (3,)):
        support += enumerate_trace_fiber(F, target, 3)
    coeffs = {}
    for beta in support:
        coeffs[beta] = (GroupRingElt.delta(group, ring, (rng.randrange(3),),
                                           1 + rng.randrange(8)))
    f = QExpansion(F, coeffs, bound)

    # independent expectation: fiber sums through the box-search oracle
    expect: dict = {}
    for target in ((1,), (2,), (3,)):
        total = GroupRingElt.zero(group, ring)
        for beta in enumerate_trace_fiber(F, target, 3):
            if beta in coeffs:
                total = total + coeffs[beta]
        expect[target] = total

    from iwacong.qexpand import diagonal_restrict
    restricted = diagonal_restrict(f)
    assert set(restricted.coeffs) == {b for b, a in expect.items()
                                      if not a.is_zero()}
    for b, a in expect.items():
        got = restricted.coeffs.get(b)
        assert (got is None and a.is_zero()) or got == a

    body = ["begin expansion cos9-demo",
            "  field cos9",
            f"  group {g_name}",
            f"  trace_bound {bound}"]
    from iwacong.workspace import _fmt_coeffs, _fmt_val
    for beta in sorted(coeffs):
        body.append(f"  coeff {_fmt_val(beta)} = {_fmt_coeffs(coeffs[beta])}")
    for beta in sorted(expect):
        body.append(f"  expect {_fmt_val(beta)} = {_fmt_coeffs(expect[beta])}")
    body += ["end", ""]
    write("qexp_cos9", document(3, 2, 13, names.prelude() + body))


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    congruence_small()
    congruence_broken()
    k1_tower()
    trace_probes()
    qexp_cos9()


if __name__ == "__main__":
    main()
