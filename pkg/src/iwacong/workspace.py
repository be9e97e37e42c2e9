"""Versioned textual workspace files.

A workspace is one UTF-8, line-oriented document that declares everything
a command run needs: the prime, the working precision, groups, homs,
actions, congruence sides with their local place tables, towers, measure
families, trace probes, and q-expansions.  The loader validates the whole
document (syntax, cross-references, table relations) before handing
anything to a computation, and every error carries the offending line
number.

Grammar sketch (the full grammar lives in docs/workspace-format.md):

    document   = header { line }
    header     = "iwacong-workspace" SP version
    line       = blank | comment | toplevel | section
    section    = "begin" SP kind SP name { entry } "end"

Scalars are integers, names are identifiers, group elements are
parenthesized integer tuples like (1,3), and table keys are either bare
labels or parenthesized tuples, possibly nested.  Repeated-key entries
(rec, psi, level, ...) accumulate; everything else may appear once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .abgroups import CyclicAction, FiniteAbelianGroup, GroupHom
from .eiscoeff import (
    BetaData,
    ClassRep,
    ClassRepData,
    CongruenceSide,
    GroupTargetData,
    LocalPlaceSpec,
    TorsionUnitIndex,
    modification_factor,
    validate_place_spec,
)
from .iwalg import CoeffRing, GroupRingElt
from .k1patch import MeasureFamily, TowerData, TowerLevel
from .qexpand import QExpansion, TotallyRealFieldData, cos_field_data

logger = logging.getLogger("iwacong.workspace")

FORMAT_NAME = "iwacong-workspace"
FORMAT_VERSION = 1

_SECTION_KINDS = ("group", "hom", "action", "side", "beta", "rep", "unit",
                  "place", "congruence", "tower", "family", "probe",
                  "expansion")


class WorkspaceError(ValueError):
    """Any defect in a workspace document; rendered with its line number."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line else message)


# ----------------------------------------------------------- value syntax


def _parse_scalar(tok: str, line: int):
    try:
        return int(tok)
    except ValueError:
        pass
    if tok and all(c.isalnum() or c in "_-." for c in tok):
        return tok
    raise WorkspaceError(f"bad token {tok!r}", line)


def _parse_value(text: str, line: int):
    """One value: an integer, a bare label, or a (possibly nested) tuple."""
    val, rest = _parse_prefix(text.strip(), line)
    if rest:
        raise WorkspaceError(f"trailing text {rest!r} after value", line)
    return val


def _parse_prefix(text: str, line: int):
    if not text:
        raise WorkspaceError("empty value", line)
    if text[0] != "(":
        # atom: ends at comma/paren/whitespace or end of string
        for i, c in enumerate(text):
            if c in ",()" or c.isspace():
                return _parse_scalar(text[:i], line), text[i:]
        return _parse_scalar(text, line), ""
    items = []
    rest = text[1:]
    if rest.startswith(")"):
        return (), rest[1:]
    while True:
        val, rest = _parse_prefix(rest, line)
        items.append(val)
        if rest.startswith(","):
            rest = rest[1:]
            continue
        if rest.startswith(")"):
            return tuple(items), rest[1:]
        raise WorkspaceError(f"expected ',' or ')' in tuple near {rest!r}", line)


def _parse_elt(text: str, line: int) -> tuple[int, ...]:
    val = _parse_value(text, line)
    if isinstance(val, int):
        raise WorkspaceError(f"group element must be a tuple, got {val!r}", line)
    if not all(isinstance(x, int) for x in val):
        raise WorkspaceError(f"group element {text!r} must hold integers", line)
    return val


def _parse_int(text: str, line: int, minimum: int | None = None) -> int:
    try:
        n = int(text.strip())
    except ValueError:
        raise WorkspaceError(f"expected an integer, got {text.strip()!r}", line) from None
    if minimum is not None and n < minimum:
        raise WorkspaceError(f"expected an integer >= {minimum}, got {n}", line)
    return n


def _parse_coeffs(text: str, line: int) -> dict[tuple[int, ...], int]:
    """Coefficient list: whitespace-separated (g)=c tokens."""
    out: dict[tuple[int, ...], int] = {}
    for tok in text.split():
        if "=" not in tok:
            raise WorkspaceError(f"coefficient token {tok!r} needs (g)=c form", line)
        g_text, c_text = tok.rsplit("=", 1)
        g = _parse_elt(g_text, line)
        if g in out:
            raise WorkspaceError(f"duplicate support point {g_text}", line)
        out[g] = _parse_int(c_text, line)
    return out


def _parse_pairs(text: str, line: int) -> list[tuple[str, str]]:
    """Label map: whitespace-separated from:to tokens."""
    out = []
    for tok in text.split():
        if tok.count(":") != 1:
            raise WorkspaceError(f"map token {tok!r} needs from:to form", line)
        out.append(tuple(tok.split(":")))
    return out


def _split_keyed(rest: str, line: int) -> tuple[str, str]:
    if " = " not in rest:
        raise WorkspaceError("expected 'KEY = VALUE'", line)
    key, value = rest.split(" = ", 1)
    return key.strip(), value.strip()


# --------------------------------------------------------------- scanning


@dataclass
class _Section:
    kind: str
    name: str
    line: int
    entries: list[tuple[int, str, str]] = field(default_factory=list)

    def take(self, key: str, required: bool = True, default: str | None = None
             ) -> tuple[int, str] | None:
        """The unique entry for a key, or the default."""
        hits = [(ln, rest) for ln, k, rest in self.entries if k == key]
        if len(hits) > 1:
            raise WorkspaceError(f"key {key!r} given twice in this section", hits[1][0])
        if hits:
            return hits[0]
        if default is not None:
            return (self.line, default)
        if required:
            raise WorkspaceError(
                f"section '{self.kind} {self.name}' is missing key {key!r}", self.line)
        return None

    def take_all(self, key: str) -> list[tuple[int, str]]:
        return [(ln, rest) for ln, k, rest in self.entries if k == key]

    def forbid_unknown(self, allowed: set[str]) -> None:
        for ln, k, _rest in self.entries:
            if k not in allowed:
                raise WorkspaceError(
                    f"unknown key {k!r} in section '{self.kind} {self.name}'", ln)


def _scan(text: str) -> tuple[dict[str, tuple[int, str]], list[_Section]]:
    lines = text.splitlines()
    if not lines:
        raise WorkspaceError("empty document", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != FORMAT_NAME:
        raise WorkspaceError(f"first line must be '{FORMAT_NAME} <version>'", 1)
    version = _parse_int(head[1], 1, minimum=1)
    if version != FORMAT_VERSION:
        raise WorkspaceError(f"unsupported format version {version}", 1)

    toplevel: dict[str, tuple[int, str]] = {}
    sections: list[_Section] = []
    current: _Section | None = None
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split(None, 1)
        key, rest = parts[0], parts[1] if len(parts) > 1 else ""
        if key == "begin":
            if current is not None:
                raise WorkspaceError("sections do not nest", lineno)
            fields = rest.split()
            if len(fields) != 2:
                raise WorkspaceError("expected 'begin <kind> <name>'", lineno)
            kind, name = fields
            if kind not in _SECTION_KINDS:
                raise WorkspaceError(f"unknown section kind {kind!r}", lineno)
            current = _Section(kind, name, lineno)
            continue
        if key == "end":
            if current is None:
                raise WorkspaceError("'end' outside any section", lineno)
            sections.append(current)
            current = None
            continue
        if current is None:
            if key in toplevel:
                raise WorkspaceError(f"top-level key {key!r} given twice", lineno)
            toplevel[key] = (lineno, rest)
        else:
            current.entries.append((lineno, key, rest))
    if current is not None:
        raise WorkspaceError(
            f"section '{current.kind} {current.name}' is never closed", current.line)

    seen: set[tuple[str, str]] = set()
    for sec in sections:
        if (sec.kind, sec.name) in seen:
            raise WorkspaceError(f"duplicate section '{sec.kind} {sec.name}'", sec.line)
        seen.add((sec.kind, sec.name))
    return toplevel, sections


# ------------------------------------------------------- workspace object


@dataclass(frozen=True)
class CongruenceDecl:
    """One verify-congruence unit: named (beta', upstairs, primed) checks."""

    name: str
    checks: tuple[tuple[str, str, str], ...]
    compare_swapped: bool


@dataclass(frozen=True)
class TraceProbe:
    name: str
    action_name: str
    element: GroupRingElt
    expect: str  # "inside" | "outside"


@dataclass(frozen=True)
class FamilyDecl:
    name: str
    tower_name: str
    family: MeasureFamily


@dataclass(frozen=True)
class ExpansionDecl:
    name: str
    expansion: QExpansion
    expect: dict[tuple[int, ...], GroupRingElt] | None


@dataclass
class Workspace:
    """Everything one document declares, already resolved and validated."""

    prime: int
    precision: int
    seed: int
    path: str | None
    groups: dict[str, FiniteAbelianGroup]
    homs: dict[str, GroupHom]
    actions: dict[str, CyclicAction]
    sides: dict[str, CongruenceSide]
    congruences: dict[str, CongruenceDecl]
    towers: dict[str, TowerData]
    families: dict[str, FamilyDecl]
    probes: dict[str, TraceProbe]
    expansions: dict[str, ExpansionDecl]


# --------------------------------------------------------------- building


class _Builder:
    def __init__(self, toplevel: dict, sections: list[_Section], path: str | None):
        self.toplevel = toplevel
        self.sections = sections
        self.path = path
        self.groups: dict[str, FiniteAbelianGroup] = {}
        self.homs: dict[str, GroupHom] = {}
        self.actions: dict[str, CyclicAction] = {}
        self.rings: dict[str, CoeffRing] = {}

    def _top_int(self, key: str, minimum: int) -> int:
        if key not in self.toplevel:
            raise WorkspaceError(f"missing top-level key {key!r}", 1)
        ln, rest = self.toplevel[key]
        return _parse_int(rest, ln, minimum=minimum)

    def _ref(self, table: dict, name: str, what: str, line: int):
        if name not in table:
            raise WorkspaceError(f"unknown {what} {name!r}", line)
        return table[name]

    def build(self) -> Workspace:
        prime = self._top_int("prime", 2)
        precision = self._top_int("precision", 1)
        seed = self._top_int("seed", 0)
        for key, (ln, _rest) in self.toplevel.items():
            if key not in ("prime", "precision", "seed"):
                raise WorkspaceError(f"unknown top-level key {key!r}", ln)
        self.prime, self.precision = prime, precision

        by_kind: dict[str, list[_Section]] = {k: [] for k in _SECTION_KINDS}
        for sec in self.sections:
            by_kind[sec.kind].append(sec)

        for sec in by_kind["group"]:
            self.groups[sec.name] = self._build_group(sec)
        for sec in by_kind["hom"]:
            self.homs[sec.name] = self._build_hom(sec)
        for sec in by_kind["action"]:
            self.actions[sec.name] = self._build_action(sec)

        betas = [self._build_beta(sec) for sec in by_kind["beta"]]
        reps = [self._build_rep(sec) for sec in by_kind["rep"]]
        units = [self._build_unit(sec) for sec in by_kind["unit"]]
        places = [self._build_place(sec) for sec in by_kind["place"]]

        sides = {}
        for sec in by_kind["side"]:
            sides[sec.name] = self._build_side(sec, betas, reps, units, places)
        for owner, sec in [(b[0], b[3]) for b in betas] + \
                          [(r[0], r[3]) for r in reps] + [(u[0], u[3]) for u in units]:
            if owner not in sides:
                raise WorkspaceError(f"unknown side {owner!r}", sec.line)
        for rep_name, _spec, sec in places:
            if not any(r[1] == rep_name for r in reps):
                raise WorkspaceError(f"unknown rep section {rep_name!r}", sec.line)

        congruences = {}
        for sec in by_kind["congruence"]:
            congruences[sec.name] = self._build_congruence(sec, sides)
        towers = {}
        for sec in by_kind["tower"]:
            towers[sec.name] = self._build_tower(sec)
        families = {}
        for sec in by_kind["family"]:
            families[sec.name] = self._build_family(sec, towers)
        probes = {}
        for sec in by_kind["probe"]:
            probes[sec.name] = self._build_probe(sec)
        expansions = {}
        for sec in by_kind["expansion"]:
            expansions[sec.name] = self._build_expansion(sec)

        return Workspace(prime=prime, precision=precision, seed=seed,
                         path=self.path, groups=self.groups, homs=self.homs,
                         actions=self.actions, sides=sides,
                         congruences=congruences, towers=towers,
                         families=families, probes=probes,
                         expansions=expansions)

    # ---------------------------------------------------------- sections

    def _build_group(self, sec: _Section) -> FiniteAbelianGroup:
        sec.forbid_unknown({"invariants"})
        ln, rest = sec.take("invariants")
        invs = tuple(_parse_int(tok, ln, minimum=2) for tok in rest.split())
        if not invs:
            raise WorkspaceError("a group needs at least one invariant", ln)
        try:
            return FiniteAbelianGroup(invs)
        except ValueError as exc:
            raise WorkspaceError(str(exc), ln) from None

    def _build_hom(self, sec: _Section) -> GroupHom:
        sec.forbid_unknown({"source", "target", "rows"})
        ln_s, src_name = sec.take("source")
        ln_t, tgt_name = sec.take("target")
        src = self._ref(self.groups, src_name.strip(), "group", ln_s)
        tgt = self._ref(self.groups, tgt_name.strip(), "group", ln_t)
        ln_r, rest = sec.take("rows")
        rows = []
        text = rest.strip()
        while text:
            row, text = _parse_prefix(text, ln_r)
            if not isinstance(row, tuple) or not all(isinstance(x, int) for x in row):
                raise WorkspaceError("hom rows must be integer tuples", ln_r)
            rows.append(row)
            text = text.lstrip()
        try:
            return GroupHom(src, tgt, tuple(rows))
        except ValueError as exc:
            raise WorkspaceError(str(exc), ln_r) from None

    def _build_action(self, sec: _Section) -> CyclicAction:
        sec.forbid_unknown({"group", "hom", "order"})
        ln_g, g_name = sec.take("group")
        ln_h, h_name = sec.take("hom")
        ln_o, o_text = sec.take("order")
        group = self._ref(self.groups, g_name.strip(), "group", ln_g)
        hom = self._ref(self.homs, h_name.strip(), "hom", ln_h)
        order = _parse_int(o_text, ln_o, minimum=1)
        try:
            return CyclicAction(group, hom, order)
        except ValueError as exc:
            raise WorkspaceError(str(exc), ln_o) from None

    def _label(self, sec: _Section) -> str:
        got = sec.take("label", required=False)
        return got[1].strip() if got else sec.name

    def _build_beta(self, sec: _Section):
        sec.forbid_unknown({"side", "label", "rec_inf", "rec_sigma_p",
                            "norm_inverse", "unit_class"})
        ln_s, side_name = sec.take("side")
        ln_i, inf_text = sec.take("rec_inf")
        ln_g, sg_text = sec.take("rec_sigma_p")
        ln_n, ni_text = sec.take("norm_inverse")
        _ln_c, cls_text = sec.take("unit_class")
        data = BetaData(label=self._label(sec),
                        rec_inf=_parse_elt(inf_text, ln_i),
                        rec_sigma_p=_parse_elt(sg_text, ln_g),
                        norm_inverse=_parse_int(ni_text, ln_n),
                        p_unit_class=cls_text.strip())
        return side_name.strip(), data, (ln_i, ln_g), sec

    def _build_rep(self, sec: _Section):
        sec.forbid_unknown({"side", "label", "rec"})
        ln_s, side_name = sec.take("side")
        ln_r, rec_text = sec.take("rec")
        return (side_name.strip(), sec.name, self._label(sec),
                sec, _parse_elt(rec_text, ln_r), ln_r)

    def _build_unit(self, sec: _Section):
        sec.forbid_unknown({"side", "label", "unit_class"})
        ln_s, side_name = sec.take("side")
        _ln_c, cls_text = sec.take("unit_class")
        return (side_name.strip(),
                TorsionUnitIndex(self._label(sec), cls_text.strip()), None, sec)

    def _build_place(self, sec: _Section):
        sec.forbid_unknown({"rep", "label", "splitting", "q", "over", "divides",
                            "val", "rec", "swapped", "rec_product", "psi",
                            "psi_sum", "level", "default_level"})
        _ln, rep_name = sec.take("rep")
        ln_sp, splitting = sec.take("splitting")
        ln_q, q_text = sec.take("q")
        over = sec.take("over", required=False)
        divides = sec.take("divides", required=False, default="")

        val: dict[str, int] = {}
        for ln, rest in sec.take_all("val"):
            for lab, v in _parse_pairs(rest, ln):
                val[lab] = _parse_int(v, ln, minimum=0)

        def read_table(key: str, parse_value):
            table: dict = {}
            for ln, rest in sec.take_all(key):
                k_text, v_text = _split_keyed(rest, ln)
                k = _parse_value(k_text, ln)
                if k in table:
                    raise WorkspaceError(f"duplicate {key} key {k_text}", ln)
                table[k] = parse_value(v_text, ln)
            return table

        rec_table = read_table("rec", _parse_elt)
        swapped = read_table("swapped", _parse_elt) or None

        def parse_psi(v_text: str, ln: int):
            if ":" not in v_text:
                raise WorkspaceError("psi values use conductor:numerator form", ln)
            c_text, n_text = v_text.split(":", 1)
            c = _parse_int(c_text, ln, minimum=1)
            return (c, _parse_int(n_text, ln) % c)

        psi_table = read_table("psi", parse_psi)

        def read_relations(key: str):
            rels = []
            for ln, rest in sec.take_all(key):
                k_text, v_text = _split_keyed(rest, ln)
                lhs = []
                text = k_text
                while text:
                    k, text = _parse_prefix(text, ln)
                    lhs.append(k)
                    text = text.lstrip()
                if len(lhs) != 2:
                    raise WorkspaceError(
                        f"{key} takes two keys left of '=', got {len(lhs)}", ln)
                rels.append((lhs[0], lhs[1], _parse_value(v_text, ln)))
            return tuple(rels)

        rec_products = read_relations("rec_product")
        psi_sums = read_relations("psi_sum")

        levels: dict[tuple[int, int], tuple] = {}
        for ln, rest in sec.take_all("level"):
            k_text, v_text = _split_keyed(rest, ln)
            lvl = _parse_value(k_text, ln)
            if not (isinstance(lvl, tuple) and len(lvl) == 2
                    and all(isinstance(x, int) for x in lvl)):
                raise WorkspaceError("level keys are integer pairs (j0,j1)", ln)
            labs = []
            text = v_text
            while text:
                lab, text = _parse_prefix(text, ln)
                labs.append(lab)
                text = text.lstrip()
            # repeated lines for one level concatenate
            levels[lvl] = levels.get(lvl, ()) + tuple(labs)

        default_level = (0, 0)
        got = sec.take("default_level", required=False)
        if got:
            lvl = _parse_value(got[1], got[0])
            if not (isinstance(lvl, tuple) and len(lvl) == 2):
                raise WorkspaceError("default_level is an integer pair", got[0])
            default_level = lvl

        try:
            spec = LocalPlaceSpec(
                label=self._label(sec), splitting=splitting.strip(),
                q=_parse_int(q_text, ln_q, minimum=2),
                divides=frozenset(divides[1].split()),
                over=over[1].strip() if over else None,
                val=val, rec_table=rec_table, rec_products=rec_products,
                psi_table=psi_table, psi_sums=psi_sums, levels=levels,
                default_level=default_level, swapped_rec_table=swapped)
        except ValueError as exc:
            raise WorkspaceError(str(exc), sec.line) from None
        return rep_name.strip(), spec, sec

    def _side_ring(self, sec: _Section) -> CoeffRing:
        got = sec.take("conductor", required=False, default="1")
        return CoeffRing(self.prime, self.precision,
                         _parse_int(got[1], got[0], minimum=1))

    def _read_action_map(self, sec: _Section, key: str, labels: list[str],
                         order: int) -> dict[str, str]:
        got = sec.take(key)
        ln, rest = got
        pairs = _parse_pairs(rest, ln)
        mapping = dict(pairs)
        if len(mapping) != len(pairs):
            raise WorkspaceError(f"{key} lists a label twice", ln)
        if set(mapping) != set(labels) or set(mapping.values()) != set(labels):
            raise WorkspaceError(
                f"{key} must be a permutation of the declared labels", ln)
        for lab in labels:
            cur = lab
            for _ in range(order):
                cur = mapping[cur]
            if cur != lab:
                raise WorkspaceError(
                    f"{key}: orbit of {lab!r} does not close after {order} steps", ln)
        return mapping

    def _build_side(self, sec: _Section, betas, reps, units, places) -> CongruenceSide:
        sec.forbid_unknown({"group", "action", "ver", "conductor", "rep_order",
                            "betas", "beta_map", "reps", "rep_map", "units",
                            "unit_map", "modification"})
        ln_g, g_name = sec.take("group")
        ln_a, a_name = sec.take("action")
        ln_v, v_name = sec.take("ver")
        group = self._ref(self.groups, g_name.strip(), "group", ln_g)
        action = self._ref(self.actions, a_name.strip(), "action", ln_a)
        ver = self._ref(self.homs, v_name.strip(), "hom", ln_v)
        ring = self._side_ring(sec)
        try:
            target = GroupTargetData(group, action, ver, ring)
        except ValueError as exc:
            raise WorkspaceError(str(exc), sec.line) from None

        ln_o, o_text = sec.take("rep_order")
        order = _parse_int(o_text, ln_o, minimum=1)

        beta_pool = [(owner, data) for owner, data, _l, _s in betas]
        ln_b, beta_names = sec.take("betas")
        chosen_betas = []
        for name in beta_names.split():
            hits = [d for owner, d in beta_pool if owner == sec.name and d.label == name]
            if not hits:
                raise WorkspaceError(
                    f"no beta section labeled {name!r} on side {sec.name!r}", ln_b)
            chosen_betas.append(hits[0])
        if not chosen_betas:
            raise WorkspaceError("a side needs at least one beta", ln_b)
        beta_map = self._read_action_map(
            sec, "beta_map", [b.label for b in chosen_betas], order)

        ln_r, rep_names = sec.take("reps")
        chosen_reps = []
        for name in rep_names.split():
            hits = [r for r in reps if r[0] == sec.name and r[2] == name]
            if not hits:
                raise WorkspaceError(
                    f"no rep section labeled {name!r} on side {sec.name!r}", ln_r)
            _owner, rep_sec_name, label, rep_sec, rec, ln_rec = hits[0]
            if len(rec) != group.rank:
                raise WorkspaceError(
                    f"rep rec value has rank {len(rec)}, group has rank {group.rank}",
                    ln_rec)
            specs = tuple(spec for rep_name, spec, _s in places
                          if rep_name == rep_sec_name)
            for rep_name, spec, place_sec in places:
                if rep_name != rep_sec_name:
                    continue
                try:
                    validate_place_spec(spec, group, self.prime)
                except ValueError as exc:
                    raise WorkspaceError(str(exc), place_sec.line) from None
            chosen_reps.append(ClassRep(label=label, rec=group.reduce(rec),
                                        specs=specs))
        if not chosen_reps:
            raise WorkspaceError("a side needs at least one class rep", ln_r)
        rep_map = self._read_action_map(
            sec, "rep_map", [r.label for r in chosen_reps], order)

        ln_u, unit_names = sec.take("units")
        chosen_units = []
        for name in unit_names.split():
            hits = [u for owner, u, _x, _s in units
                    if owner == sec.name and u.label == name]
            if not hits:
                raise WorkspaceError(
                    f"no unit section labeled {name!r} on side {sec.name!r}", ln_u)
            chosen_units.append(hits[0])
        if not chosen_units:
            raise WorkspaceError("a side needs at least one torsion unit", ln_u)
        unit_map = self._read_action_map(
            sec, "unit_map", [u.label for u in chosen_units], order)

        pairs: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
        for ln, rest in sec.take_all("modification"):
            text = rest
            while text:
                lhs, text = _parse_prefix(text, ln)
                text = text.lstrip()
                if not text.startswith(":"):
                    raise WorkspaceError(
                        "modification pairs use (z):(zbar) form", ln)
                rhs, text = _parse_prefix(text[1:], ln)
                text = text.lstrip()
                for half in (lhs, rhs):
                    if not (isinstance(half, tuple)
                            and all(isinstance(x, int) for x in half)
                            and len(half) == group.rank):
                        raise WorkspaceError(
                            f"modification entries must be rank-{group.rank} "
                            "integer tuples", ln)
                pairs.append((lhs, rhs))

        try:
            side = CongruenceSide(
                target=target, betas=tuple(chosen_betas), beta_action=beta_map,
                reps=ClassRepData(tuple(chosen_reps), rep_map, order),
                units=tuple(chosen_units), unit_action=unit_map,
                modification=modification_factor(target, pairs))
        except ValueError as exc:
            raise WorkspaceError(str(exc), sec.line) from None
        return side

    def _build_congruence(self, sec: _Section, sides) -> CongruenceDecl:
        sec.forbid_unknown({"check", "compare_swapped"})
        checks = []
        for ln, rest in sec.take_all("check"):
            k_text, v_text = _split_keyed(rest, ln)
            names = v_text.split()
            if len(names) != 2:
                raise WorkspaceError(
                    "check lines read 'check BETA = UPSTAIRS PRIMED'", ln)
            up_name, down_name = names
            up = self._ref(sides, up_name, "side", ln)
            down = self._ref(sides, down_name, "side", ln)
            if len(down.betas) != 1 or down.betas[0].label != k_text:
                raise WorkspaceError(
                    f"primed side {down_name!r} must declare exactly the beta "
                    f"{k_text!r}", ln)
            fixed_up = {r.label for r in up.reps.reps
                        if up.reps.action[r.label] == r.label}
            if fixed_up != {r.label for r in down.reps.reps}:
                raise WorkspaceError(
                    f"fixed rep labels of {up_name!r} must match the rep "
                    f"labels of {down_name!r}", ln)
            checks.append((k_text, up_name, down_name))
        if not checks:
            raise WorkspaceError(
                f"congruence section {sec.name!r} declares no checks", sec.line)
        swapped = False
        got = sec.take("compare_swapped", required=False)
        if got:
            if got[1].strip() not in ("yes", "no"):
                raise WorkspaceError("compare_swapped is 'yes' or 'no'", got[0])
            swapped = got[1].strip() == "yes"
        return CongruenceDecl(sec.name, tuple(checks), swapped)

    def _build_tower(self, sec: _Section) -> TowerData:
        sec.forbid_unknown({"levels", "actions", "vers", "gammas"})
        ln_l, g_text = sec.take("levels")
        ln_a, a_text = sec.take("actions")
        ln_v, v_text = sec.take("vers")
        ln_g, gam_text = sec.take("gammas", required=False, default="")

        g_names, a_names = g_text.split(), a_text.split()
        v_names = v_text.split()
        gam_names = gam_text.split() if gam_text else ["-"] * len(g_names)
        n = len(g_names)
        if not (len(a_names) == len(v_names) == len(gam_names) == n):
            raise WorkspaceError(
                "levels, actions, vers, gammas must list one entry per level",
                ln_l)
        if v_names[0] != "-":
            raise WorkspaceError("level 0 takes no transfer: write '-'", ln_v)
        levels = []
        for r in range(n):
            group = self._ref(self.groups, g_names[r], "group", ln_l)
            action = self._ref(self.actions, a_names[r], "action", ln_a)
            ver = None if v_names[r] == "-" else \
                self._ref(self.homs, v_names[r], "hom", ln_v)
            gammas = () if gam_names[r] == "-" else tuple(
                self._ref(self.homs, nm, "hom", ln_g)
                for nm in gam_names[r].split(","))
            levels.append(TowerLevel(group, action, gammas, ver))
        try:
            return TowerData(tuple(levels), self.prime, self.precision)
        except ValueError as exc:
            raise WorkspaceError(str(exc), sec.line) from None

    def _measure(self, group: FiniteAbelianGroup, ring: CoeffRing,
                 coeffs: dict[tuple[int, ...], int], line: int) -> GroupRingElt:
        out = GroupRingElt.zero(group, ring)
        for g, c in coeffs.items():
            if len(g) != group.rank:
                raise WorkspaceError(
                    f"support point {g} has rank {len(g)}, group has rank "
                    f"{group.rank}", line)
            out = out + GroupRingElt.delta(group, ring, g, c)
        return out

    def _build_family(self, sec: _Section, towers) -> FamilyDecl:
        sec.forbid_unknown({"tower", "conductor", "element"})
        ln_t, t_name = sec.take("tower")
        tower = self._ref(towers, t_name.strip(), "tower", ln_t)
        ring = self._side_ring(sec)
        elements: dict[int, GroupRingElt] = {}
        for ln, rest in sec.take_all("element"):
            k_text, v_text = _split_keyed(rest, ln)
            r = _parse_int(k_text, ln, minimum=0)
            if r in elements:
                raise WorkspaceError(f"level {r} element given twice", ln)
            if r > tower.top:
                raise WorkspaceError(
                    f"level {r} exceeds the tower top {tower.top}", ln)
            elements[r] = self._measure(tower.group(r), ring,
                                        _parse_coeffs(v_text, ln), ln)
        missing = [r for r in range(tower.top + 1) if r not in elements]
        if missing:
            raise WorkspaceError(
                f"family {sec.name!r} is missing elements for levels {missing}",
                sec.line)
        fam = MeasureFamily(tuple(elements[r] for r in range(tower.top + 1)))
        return FamilyDecl(sec.name, t_name.strip(), fam)

    def _build_probe(self, sec: _Section) -> TraceProbe:
        sec.forbid_unknown({"action", "conductor", "element", "expect"})
        ln_a, a_name = sec.take("action")
        action = self._ref(self.actions, a_name.strip(), "action", ln_a)
        ring = self._side_ring(sec)
        ln_e, e_text = sec.take("element")
        elt = self._measure(action.group, ring, _parse_coeffs(e_text, ln_e), ln_e)
        ln_x, x_text = sec.take("expect")
        expect = x_text.strip()
        if expect not in ("inside", "outside"):
            raise WorkspaceError("expect is 'inside' or 'outside'", ln_x)
        return TraceProbe(sec.name, a_name.strip(), elt, expect)

    def _build_expansion(self, sec: _Section) -> ExpansionDecl:
        sec.forbid_unknown({"field", "minpoly", "group", "conductor",
                            "trace_bound", "coeff", "expect"})
        field_got = sec.take("field", required=False)
        minpoly_got = sec.take("minpoly", required=False)
        if (field_got is None) == (minpoly_got is None):
            raise WorkspaceError(
                f"expansion {sec.name!r} needs exactly one of 'field' or "
                "'minpoly'", sec.line)
        if field_got is not None:
            ln_f, f_name = field_got
            if f_name.strip() != "cos9":
                raise WorkspaceError(
                    f"unknown built-in field {f_name.strip()!r} (only cos9)", ln_f)
            fld = cos_field_data()
        else:
            ln_f, rest = minpoly_got
            coeffs = [_parse_int(tok, ln_f) for tok in rest.split()]
            try:
                fld = TotallyRealFieldData(coeffs)
            except ValueError as exc:
                raise WorkspaceError(str(exc), ln_f) from None

        ln_g, g_name = sec.take("group")
        group = self._ref(self.groups, g_name.strip(), "group", ln_g)
        ring = self._side_ring(sec)
        ln_b, b_text = sec.take("trace_bound")
        bound = _parse_int(b_text, ln_b, minimum=0)

        coeffs: dict = {}
        for ln, rest in sec.take_all("coeff"):
            k_text, v_text = _split_keyed(rest, ln)
            beta = _parse_elt(k_text, ln)
            if beta in coeffs:
                raise WorkspaceError(f"coefficient at {k_text} given twice", ln)
            coeffs[beta] = self._measure(group, ring, _parse_coeffs(v_text, ln), ln)
        try:
            expansion = QExpansion(fld, coeffs, bound)
        except ValueError as exc:
            raise WorkspaceError(str(exc), sec.line) from None

        expect: dict | None = None
        for ln, rest in sec.take_all("expect"):
            k_text, v_text = _split_keyed(rest, ln)
            beta = _parse_elt(k_text, ln)
            expect = expect or {}
            if beta in expect:
                raise WorkspaceError(f"expected value at {k_text} given twice", ln)
            expect[beta] = self._measure(group, ring, _parse_coeffs(v_text, ln), ln)
        return ExpansionDecl(sec.name, expansion, expect)


def parse_workspace(text: str, path: str | None = None) -> Workspace:
    """Parse and fully validate one document.  Nothing is computed unless
    the whole document is well-formed."""
    toplevel, sections = _scan(text)
    ws = _Builder(toplevel, sections, path).build()
    logger.info("workspace %s: %d sides, %d congruences, %d towers, "
                "%d families, %d probes, %d expansions",
                path or "<string>", len(ws.sides), len(ws.congruences),
                len(ws.towers), len(ws.families), len(ws.probes),
                len(ws.expansions))
    return ws


def load_workspace(path: str | Path) -> Workspace:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise WorkspaceError(f"cannot read {p}: {exc.strerror or exc}") from None
    return parse_workspace(text, str(p))


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled workspace, by bare name."""
    base = resources.files("iwacong") / "fixtures" / f"{name}.ws"
    if not base.is_file():
        raise WorkspaceError(f"no bundled workspace named {name!r}")
    return Path(str(base))


# ------------------------------------------------------------- serializing
#
# Emitters used to build fixtures and to round-trip generated data through
# the textual format.  Output is deterministic for a fixed input object.


def _fmt_val(v) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(_fmt_val(x) for x in v) + ")"
    return str(v)


def _fmt_coeffs(elt: GroupRingElt) -> str:
    toks = []
    for g in elt.group.elements():
        c = elt.coefficient(g)
        if c.is_zero():
            continue
        if not c.is_rational():
            raise WorkspaceError(
                "only integer coefficients are serializable in format v1")
        toks.append(f"{_fmt_val(tuple(g))}={c.rational_value()}")
    return " ".join(toks)


def _group_sections(named: dict) -> list[str]:
    out = []
    for name, group in named.items():
        out += [f"begin group {name}",
                "  invariants " + " ".join(map(str, group.invariant_factors)),
                "end", ""]
    return out


def _hom_lines(name: str, hom: GroupHom, group_names: dict) -> list[str]:
    return [f"begin hom {name}",
            f"  source {group_names[hom.source]}",
            f"  target {group_names[hom.target]}",
            "  rows " + " ".join(_fmt_val(r) for r in hom.matrix),
            "end", ""]


class _NameAllocator:
    """Stable names for shared groups/homs/actions across emitted sections."""

    def __init__(self) -> None:
        self.groups: dict[FiniteAbelianGroup, str] = {}
        self.homs: list[tuple[GroupHom, str]] = []
        self.actions: list[tuple[CyclicAction, str]] = []

    def group(self, g: FiniteAbelianGroup) -> str:
        if g not in self.groups:
            self.groups[g] = f"G{len(self.groups)}"
        return self.groups[g]

    def hom(self, h: GroupHom) -> str:
        for known, name in self.homs:
            if known == h:
                return name
        name = f"h{len(self.homs)}"
        self.homs.append((h, name))
        return name

    def action(self, a: CyclicAction) -> str:
        for known, name in self.actions:
            if known == a:
                return name
        self.group(a.group)
        self.hom(a.sigma)  # dependencies must precede the action section
        name = f"act{len(self.actions)}"
        self.actions.append((a, name))
        return name

    def prelude(self) -> list[str]:
        out = _group_sections({name: g for g, name in self.groups.items()})
        for hom, name in self.homs:
            out += _hom_lines(name, hom, self.groups)
        for act, name in self.actions:
            out += [f"begin action {name}",
                    f"  group {self.groups[act.group]}",
                    f"  hom {self.hom(act.sigma)}",
                    f"  order {act.order}",
                    "end", ""]
        return out


def _fmt_map(mapping: dict) -> str:
    return " ".join(f"{k}:{v}" for k, v in sorted(mapping.items()))


def _place_lines(prefix: str, rep_section: str, spec: LocalPlaceSpec) -> list[str]:
    out = [f"begin place {prefix}{spec.label}",
           f"  rep {rep_section}",
           f"  label {spec.label}",
           f"  splitting {spec.splitting}",
           f"  q {spec.q}"]
    if spec.over is not None:
        out.append(f"  over {spec.over}")
    if spec.divides:
        out.append("  divides " + " ".join(sorted(spec.divides)))
    if spec.val:
        out.append("  val " + " ".join(
            f"{k}:{v}" for k, v in sorted(spec.val.items())))
    for k, v in spec.rec_table.items():
        out.append(f"  rec {_fmt_val(k)} = {_fmt_val(v)}")
    if spec.swapped_rec_table is not None:
        for k, v in spec.swapped_rec_table.items():
            out.append(f"  swapped {_fmt_val(k)} = {_fmt_val(v)}")
    for k1, k2, k12 in spec.rec_products:
        out.append(f"  rec_product {_fmt_val(k1)} {_fmt_val(k2)} = {_fmt_val(k12)}")
    for k, (c, n) in spec.psi_table.items():
        out.append(f"  psi {_fmt_val(k)} = {c}:{n}")
    for k1, k2, k12 in spec.psi_sums:
        out.append(f"  psi_sum {_fmt_val(k1)} {_fmt_val(k2)} = {_fmt_val(k12)}")
    for lvl in sorted(spec.levels):
        labs = spec.levels[lvl]
        for start in range(0, len(labs), 16):
            chunk = labs[start:start + 16]
            out.append(f"  level {_fmt_val(lvl)} = "
                       + " ".join(_fmt_val(x) for x in chunk))
    if spec.levels:
        out.append(f"  default_level {_fmt_val(spec.default_level)}")
    out += ["end", ""]
    return out


def side_sections(name: str, side: CongruenceSide, names: _NameAllocator,
                  mod_pairs: list[tuple] | None = None) -> list[str]:
    """Emit one side with all its betas, reps, units, and places.

    The modification element is declared through its generating pairs;
    pass the pairs that built it (empty means the trivial factor).
    """
    t = side.target
    g_name = names.group(t.group)
    a_name = names.action(t.action)
    v_name = names.hom(t.ver)
    out = [f"begin side {name}",
           f"  group {g_name}",
           f"  action {a_name}",
           f"  ver {v_name}"]
    if t.ring.conductor != 1:
        out.append(f"  conductor {t.ring.conductor}")
    out.append(f"  rep_order {side.reps.order}")
    out.append("  betas " + " ".join(b.label for b in side.betas))
    out.append("  beta_map " + _fmt_map(side.beta_action))
    out.append("  reps " + " ".join(r.label for r in side.reps.reps))
    out.append("  rep_map " + _fmt_map(side.reps.action))
    out.append("  units " + " ".join(u.label for u in side.units))
    out.append("  unit_map " + _fmt_map(side.unit_action))
    for z, zbar in (mod_pairs or []):
        out.append(f"  modification {_fmt_val(tuple(z))}:{_fmt_val(tuple(zbar))}")
    expected = GroupRingElt.one(t.group, t.ring)
    if mod_pairs:
        expected = modification_factor(t, mod_pairs)
    if expected != side.modification:
        raise WorkspaceError(
            "the supplied modification pairs do not rebuild the side's "
            "modification element")
    out += ["end", ""]

    for b in side.betas:
        out += [f"begin beta {name}_{b.label}",
                f"  side {name}",
                f"  label {b.label}",
                f"  rec_inf {_fmt_val(tuple(b.rec_inf))}",
                f"  rec_sigma_p {_fmt_val(tuple(b.rec_sigma_p))}",
                f"  norm_inverse {b.norm_inverse}",
                f"  unit_class {b.p_unit_class}",
                "end", ""]
    for r in side.reps.reps:
        rep_section = f"{name}_{r.label}"
        out += [f"begin rep {rep_section}",
                f"  side {name}",
                f"  label {r.label}",
                f"  rec {_fmt_val(tuple(r.rec))}",
                "end", ""]
        for spec in r.specs:
            out += _place_lines(f"{rep_section}_", rep_section, spec)
    for u in side.units:
        out += [f"begin unit {name}_{u.label}",
                f"  side {name}",
                f"  label {u.label}",
                f"  unit_class {u.p_unit_class}",
                "end", ""]
    return out


def congruence_workspace_text(
        pairs: list[tuple[str, CongruenceSide, CongruenceSide, list, list]],
        prime: int, precision: int, seed: int,
        compare_swapped: bool = False) -> str:
    """A full document for verify-congruence runs.

    Each entry reads (beta_prime_label, upstairs, primed, upstairs
    modification pairs, primed modification pairs); checks are named
    c0, c1, ... in order.
    """
    names = _NameAllocator()
    body: list[str] = []
    checks: list[str] = []
    for i, (label, up, down, up_pairs, down_pairs) in enumerate(pairs):
        body += side_sections(f"up{i}", up, names, up_pairs)
        body += side_sections(f"down{i}", down, names, down_pairs)
        checks.append(f"  check {label} = up{i} down{i}")
    head = [f"{FORMAT_NAME} {FORMAT_VERSION}", "",
            f"prime {prime}", f"precision {precision}", f"seed {seed}", ""]
    tail = ["begin congruence main"] + checks
    if compare_swapped:
        tail.append("  compare_swapped yes")
    tail += ["end", ""]
    return "\n".join(head + names.prelude() + body + tail)


def tower_sections(name: str, tower: TowerData, names: _NameAllocator) -> list[str]:
    g_names, a_names, v_names, gam_names = [], [], [], []
    for r, level in enumerate(tower.levels):
        g_names.append(names.group(level.group))
        a_names.append(names.action(level.action))
        v_names.append("-" if level.ver is None else names.hom(level.ver))
        gam_names.append(",".join(names.hom(g) for g in level.gamma) or "-")
    return [f"begin tower {name}",
            "  levels " + " ".join(g_names),
            "  actions " + " ".join(a_names),
            "  vers " + " ".join(v_names),
            "  gammas " + " ".join(gam_names),
            "end", ""]


def family_sections(name: str, tower_name: str, fam: MeasureFamily) -> list[str]:
    out = [f"begin family {name}", f"  tower {tower_name}"]
    ring = fam.x[0].ring
    if ring.conductor != 1:
        out.append(f"  conductor {ring.conductor}")
    for r, elt in enumerate(fam.x):
        out.append(f"  element {r} = {_fmt_coeffs(elt)}")
    out += ["end", ""]
    return out


def probe_sections(name: str, action_name: str, elt: GroupRingElt,
                   expect: str) -> list[str]:
    out = [f"begin probe {name}", f"  action {action_name}"]
    if elt.ring.conductor != 1:
        out.append(f"  conductor {elt.ring.conductor}")
    out += [f"  element {_fmt_coeffs(elt)}",
            f"  expect {expect}",
            "end", ""]
    return out


def document(prime: int, precision: int, seed: int, body: list[str]) -> str:
    head = [f"{FORMAT_NAME} {FORMAT_VERSION}", "",
            f"prime {prime}", f"precision {precision}", f"seed {seed}", ""]
    return "\n".join(head + body)
