"""Seeded generators for coherent synthetic data.

Two families of fixtures live here.  The tower side builds finite
false-Tate-shaped towers (a Kummer line times a growing cyclotomic
line) together with measure families that provably satisfy the three
patching conditions, plus single-entry perturbations that break exactly
one chosen condition.  The congruence side builds matched pairs of
transfer-congruence workspaces whose tables are random but forced
equivariant, so the congruence holds by the same telescoping that makes
the genuine objects work: orbit products of equivariant chains collapse
to transfers of the base-side tables up to Fermat-type p-divisible
corrections, all of which land in the trace ideal.  Perturbations then
edit one fixed-fiber entry and are resampled until the verdict genuinely
fails with the intended witness.

Every generator takes an explicit random.Random so fixtures are
reproducible from a seed.
"""

import random
from itertools import product
from math import gcd

from .abgroups import (CyclicAction, FiniteAbelianGroup, GroupHom,
                       identity_hom)
from .eiscoeff import (BetaData, ClassRep, ClassRepData, CongruenceSide,
                       GroupTargetData, LocalPlaceSpec, TorsionUnitIndex,
                       check_transfer_congruence, modification_factor)
from .iwalg import CoeffRing, GroupRingElt, TraceIdealBasis, norm_map
from .k1patch import (MeasureFamily, TowerData, TowerLevel, check_MS1,
                      check_MS2, check_MS3)

__all__ = [
    "teichmuller", "synthetic_tower", "random_unit_measure",
    "norm_chain_family", "all_pass_family", "perturbed_family",
    "frac_pair", "ram_place", "random_congruence_workspace",
    "perturb_workspace", "FIXED_POINT_DIAGNOSTIC",
]


def teichmuller(a: int, prime: int, precision: int) -> int:
    """The unit congruent to a mod p whose p-th power is itself."""
    if a % prime == 0:
        raise ValueError("not a unit")
    m = prime ** precision
    return pow(a, prime ** (precision - 1), m)


# ------------------------------------------------------ towers and families


def synthetic_tower(prime: int, precision: int, levels: int) -> TowerData:
    """Tower with level-r group (Z/p) x (Z/p^r): the second line grows,
    the transfer multiplies it by p, and each level acts on the one below
    through multiplication by 1 + p^{r-1} on the grown line (a shear onto
    the first line at the first step, where multiplication cannot have
    order p)."""
    if levels < 0:
        raise ValueError("levels is the top index, at least 0")
    out = []
    g_prev = FiniteAbelianGroup((prime,))
    out.append(TowerLevel(g_prev, CyclicAction(g_prev, identity_hom(g_prev), 1)))
    for r in range(1, levels + 1):
        g = FiniteAbelianGroup((prime, prime ** r))
        if r == 1:
            sigma = GroupHom(g, g, ((1, 0), (1, 1)))
            ver = GroupHom(g_prev, g, ((1, 0),))
        else:
            sigma = GroupHom(g, g, ((1, 0), (0, 1 + prime ** (r - 1))))
            ver = GroupHom(g_prev, g, ((1, 0), (0, prime)))
        out.append(TowerLevel(g, CyclicAction(g, sigma, prime), (sigma,), ver))
        g_prev = g
    return TowerData(tuple(out), prime, precision)


def random_unit_measure(group: FiniteAbelianGroup, ring: CoeffRing,
                        rng: random.Random, support: int = 4) -> GroupRingElt:
    elements = group.elements()
    while True:
        picks = rng.sample(elements, min(support, len(elements)))
        lam = GroupRingElt.zero(group, ring)
        for g in picks:
            lam = lam + GroupRingElt.delta(group, ring, g,
                                           rng.randrange(1, ring.modulus))
        if lam.is_unit():
            return lam


def norm_chain_family(tower: TowerData, rng: random.Random) -> MeasureFamily:
    """Random unit at the top, everything below its iterated norm: passes
    the norm-compatibility condition by construction."""
    ring = CoeffRing(tower.prime, tower.precision)
    xs: list = [None] * len(tower.levels)
    xs[-1] = random_unit_measure(tower.group(tower.top), ring, rng)
    for r in range(tower.top, 0, -1):
        xs[r - 1] = norm_map(xs[r], (tower.group(r - 1), tower.ver(r)))
    return MeasureFamily(tuple(xs))


def _fixed_elements(tower: TowerData, r: int) -> list:
    act = tower.levels[r].action
    return [g for g in tower.group(r).elements()
            if act.sigma(g) == g]


def all_pass_family(tower: TowerData, rng: random.Random,
                    bumps: int = 2) -> MeasureFamily:
    """Teichmuller scalar everywhere, with a p^{N-1} multiple of a fixed
    element added at the top.  Norms strip the bump (its trace picks up
    an extra factor of p), the Galois generators fix it, and the transfer
    difference it leaves is p times a fixed element, inside the trace
    ideal: all three conditions hold."""
    prime, precision = tower.prime, tower.precision
    ring = CoeffRing(prime, precision)
    omega = teichmuller(rng.randrange(1, prime), prime, precision)
    xs = [GroupRingElt.one(tower.group(r), ring) * omega
          for r in range(len(tower.levels))]
    top = tower.top
    if top >= 1:
        bump = GroupRingElt.zero(tower.group(top), ring)
        fixed = _fixed_elements(tower, top)
        for g in rng.sample(fixed, min(bumps, len(fixed))):
            bump = bump + GroupRingElt.delta(
                tower.group(top), ring, g,
                rng.randrange(1, prime) * prime ** (precision - 1))
        xs[top] = xs[top] + bump * omega
    return MeasureFamily(tuple(xs))


def perturbed_family(tower: TowerData, rng: random.Random, which: str,
                     tries: int = 25) -> MeasureFamily:
    """All-pass family with one edit that fails exactly the condition
    named by which ("MS1" | "MS2" | "MS3"), resampled until the other
    two checks still pass."""
    if which not in ("MS1", "MS2", "MS3"):
        raise ValueError("which must name one of the three conditions")
    if tower.top < 1:
        raise ValueError("perturbations need at least two levels")
    prime, precision = tower.prime, tower.precision
    pN1 = prime ** (precision - 1)
    for _ in range(tries):
        fam = all_pass_family(tower, rng)
        xs = list(fam.x)
        top = tower.top
        g_top = tower.group(top)
        ring = xs[0].ring
        if which == "MS1":
            # bottom-level additive bump: norms upstairs no longer match it,
            # while its transfer image differs by p times a fixed element
            g = rng.choice(tower.group(0).elements())
            xs[0] = xs[0] + GroupRingElt.delta(
                tower.group(0), ring, g, pN1 * rng.randrange(1, prime))
        elif which == "MS2":
            # p^{N-1} delta at a moved point: p times anything is in the
            # trace ideal (the identity is fixed), and a point outside the
            # transfer image contributes nothing to the norm trace term
            act = tower.levels[top].action
            free = [g for g in g_top.elements() if act.sigma(g) != g]
            if not free:
                raise RuntimeError("action has no free part to move")
            g = rng.choice(free)
            xs[top] = xs[top] + GroupRingElt.delta(
                g_top, ring, g, pN1 * rng.randrange(1, prime))
        else:
            # multiply by a fixed p-torsion transfer image: the norm gains
            # delta of p times the preimage, which dies, and fixedness is
            # kept, but the transfer difference moves by x(delta_h - 1)
            lower = tower.group(top - 1)
            torsion = [h for h in lower.elements()
                       if any(c for c in h)
                       and all(c * prime % d == 0
                               for c, d in zip(h, lower.invariant_factors))]
            if not torsion:
                raise RuntimeError("no p-torsion below the top level")
            h = tower.ver(top)(rng.choice(torsion))
            xs[top] = xs[top] * GroupRingElt.delta(g_top, ring, h)
        cand = MeasureFamily(tuple(xs))
        verdicts = {"MS1": check_MS1(cand, tower).ok,
                    "MS2": check_MS2(cand, tower).ok,
                    "MS3": check_MS3(cand, tower).ok}
        if not verdicts[which] and all(v for k, v in verdicts.items()
                                       if k != which):
            return cand
    raise RuntimeError(f"could not isolate a {which} failure in {tries} tries")


# ------------------------------------------------- ramified-part place model


def frac_pair(num: int, den: int) -> tuple[int, int]:
    """exp(2 pi i num/den) as a reduced (conductor, numerator) pair."""
    num %= den
    if num == 0:
        return (1, 0)
    g = gcd(num, den)
    return (den // g, num // g)


def _val_of(m: tuple, ell: int, cap: int) -> int:
    v = 0
    while v < cap and all(mi % ell ** (v + 1) == 0 for mi in m):
        v += 1
    return v


def ram_place(label: str, over: str | None, a: int, betas_b: dict,
              group_mod: int, j0: int = 1, j1: int = 0, ell: int = 2,
              deg: int = 3) -> LocalPlaceSpec:
    """Ramified-part place over the degree-deg unramified extension of
    the ell-adic field: representatives are residue tuples of the rank-deg
    Galois ring, the additive character comes from the trace form of
    X^3 - X - 1 (the identity in degree one), and the reciprocity value
    is graded by the valuation in a ramified quadratic extension, which
    makes the character sum stable across the ingested levels."""
    levels: dict = {}
    rec: dict = {}
    psi: dict = {"t_over_2d": (1, 0)}
    for (J0, J1) in ((j0, j1), (j0 + 1, j1 + 1)):
        mod = ell ** (J0 + J1)
        labs = []
        for m in product(range(mod), repeat=deg):
            lab = ("x", J0, J1) + m
            labs.append(lab)
            vF = _val_of(m, ell, J0 + J1) - J0
            val_M = 2 * vF if vF < 0 else -1
            rec[lab] = ((a * val_M) % group_mod,)
            trf = (3 * m[0] + 2 * m[2]) if deg == 3 else m[0]
            for blab, b in betas_b.items():
                psi[("beta_x", blab, lab)] = frac_pair(-b * trf, ell ** J0)
        levels[(J0, J1)] = tuple(labs)
    return LocalPlaceSpec(label=label, splitting="ramified", q=ell ** deg,
                          divides=frozenset({"T"}), over=over,
                          val={b: 0 for b in betas_b},
                          rec_table=rec, psi_table=psi, levels=levels,
                          default_level=(j0, j1))


# ------------------------------------------------- congruence workspaces

FIXED_POINT_DIAGNOSTIC = "fixed-point congruence fails at (beta=b0, a=a0, u=u0)"

_SMALL_PRIMES = (7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43)


def _draw_raw(rng: random.Random, prime: int, split_orbits: int,
              generic_orbits: int, inert_places: int, with_ramified: bool,
              free_reps: int, extra_unit: bool) -> dict:
    p2 = prime * prime
    betas = ["b0"] + [f"b{i}" for i in range(1, prime + 1)]
    rot = {"b0": "b0"}
    for i in range(1, prime + 1):
        rot[f"b{i}"] = f"b{i % prime + 1}"

    def rand_elt():
        return (rng.randrange(p2),)

    def rand_prime_elt():
        return (rng.randrange(prime),)

    def qs():
        return rng.choice([q for q in _SMALL_PRIMES if q % prime])

    raw = {
        "prime": prime, "betas": tuple(betas), "beta_rot": rot,
        "split": [], "generic": [], "inert": [], "ramified": None,
        "free_reps": [],
    }
    for _ in range(split_orbits):
        base = {b: rand_elt() for b in betas}
        swap = {b: rand_elt() for b in betas}
        raw["split"].append({
            "q": qs(), "base": base, "swap": swap,
            "prime_rec": (base["b0"][0] % prime,),
            "prime_swap": (swap["b0"][0] % prime,),
        })
    for _ in range(generic_orbits):
        vals = {b: rng.randrange(3) for b in betas}
        depth = max(vals.values())
        table = {("pi_c", j): rand_elt() for j in range(depth + 1)}
        raw["generic"].append({"q": qs(), "vals": vals, "table": table})
    for _ in range(inert_places):
        v0 = rng.randrange(3)
        vfree = rng.randrange(3)
        depth = max(v0, vfree)
        table_p = {("pi_c", j): rand_prime_elt() for j in range(depth + 1)}
        raw["inert"].append({"qp": qs(), "val0": v0, "valfree": vfree,
                             "prime_table": table_p})
    if with_ramified:
        if prime != 3:
            raise ValueError(
                "the ramified-part model is only built for p = 3")
        raw["ramified"] = {
            "a_prime": rng.randrange(1, prime),
            "betas_b": {b: rng.choice((1, 3, 5, 7)) for b in betas},
        }
    raw["beta_prime"] = {
        "rec_inf": rand_prime_elt(), "rec_sigma_p": rand_prime_elt(),
        "norm_inverse": rng.choice([n for n in range(1, p2) if n % prime]),
    }
    root_inf, root_sig = rand_elt(), rand_elt()
    raw["free_beta"] = {
        "rec_inf": root_inf, "rec_sigma_p": root_sig,
        "norm_inverse": rng.choice([n for n in range(1, p2) if n % prime]),
    }
    raw["rec_a_prime"] = rand_prime_elt()
    for _ in range(free_reps):
        raw["free_reps"].append({
            "q": qs(),
            "base": {b: rand_elt() for b in betas},
            "rec_root": rand_elt(),
        })
    # a pair with equal entries would zero the modification factor and
    # every coefficient with it, so keep the two entries distinct
    pairs = []
    for _ in range(rng.randrange(3)):
        z = rand_prime_elt()
        zbar = rand_prime_elt()
        while zbar == z:
            zbar = rand_prime_elt()
        pairs.append((z, zbar))
    raw["mod_pairs_prime"] = pairs
    raw["extra_unit"] = extra_unit
    # perturbation hooks, all off by default
    raw["edits"] = {}
    return raw


def _assemble(raw: dict, precision: int):
    prime = raw["prime"]
    p2 = prime * prime
    group = FiniteAbelianGroup((p2,))
    group_p = FiniteAbelianGroup((prime,))
    sigma = GroupHom(group, group, ((1 + prime,),))
    act = CyclicAction(group, sigma, prime)
    act_p = CyclicAction(group_p, identity_hom(group_p), 1)
    ver = GroupHom(group_p, group, ((prime,),))
    conductor = 4 if raw["ramified"] else 1
    ring = CoeffRing(prime, precision, conductor)
    ring_p = CoeffRing(prime, precision, conductor)
    target = GroupTargetData(group, act, ver, ring)
    target_p = GroupTargetData(group_p, act_p, identity_hom(group_p), ring_p)
    betas = raw["betas"]
    rot = raw["beta_rot"]

    def sig(v):
        return ((1 + prime) * v[0] % p2,)

    def chain(base, key_rot, twist=True):
        out = [dict(base)]
        for _ in range(prime - 1):
            cur = out[-1]
            if twist:
                out.append({key_rot.get(k, k): sig(v) for k, v in cur.items()})
            else:
                out.append({key_rot.get(k, k): v for k, v in cur.items()})
        return out

    edits = raw["edits"]
    val0 = {b: 0 for b in betas}
    specs: list = []
    specs_p: list = []
    for o, data in enumerate(raw["split"]):
        tables = chain(data["base"], rot)
        swaps = chain(data["swap"], rot)
        for (i, b, d) in edits.get("split", ()):
            if o == 0:
                tables[i][b] = ((tables[i][b][0] + d) % p2,)
        for i in range(prime):
            specs.append(LocalPlaceSpec(
                label=f"w{o}_{i}", splitting="split-w", q=data["q"],
                divides=frozenset({"FFc"}), over=f"wp{o}", val=dict(val0),
                rec_table=tables[i], swapped_rec_table=swaps[i]))
        prec = data["prime_rec"]
        if o == 0 and "prime_split" in edits:
            prec = ((prec[0] + edits["prime_split"]) % prime,)
        specs_p.append(LocalPlaceSpec(
            label=f"wp{o}", splitting="split-w", q=data["q"],
            divides=frozenset({"FFc"}), val={"b0": 0},
            rec_table={"b0": prec},
            swapped_rec_table={"b0": data["prime_swap"]}))
    for o, data in enumerate(raw["generic"]):
        vals = dict(data["vals"])
        if o == 0 and "generic_val" in edits:
            vals["b0"] = edits["generic_val"]
        val_chain = chain(vals, rot, twist=False)
        # depth covers the edited and the original fiber valuation so
        # neither side runs off the end of the table
        depth = max(list(vals.values()) + [data["vals"]["b0"]])
        table0 = {("pi_c", j): data["table"].get(("pi_c", j),
                                                 ((j * prime + 1) % p2,))
                  for j in range(depth + 1)}
        tables = chain(table0, {})
        for i in range(prime):
            specs.append(LocalPlaceSpec(
                label=f"v{o}_{i}", splitting="split-generic", q=data["q"],
                over=f"vp{o}", val=val_chain[i], rec_table=tables[i]))
        specs_p.append(LocalPlaceSpec(
            label=f"vp{o}", splitting="split-generic", q=data["q"],
            val={"b0": data["vals"]["b0"]},
            rec_table={k: (v[0] % prime,) for k, v in table0.items()}))
    for o, data in enumerate(raw["inert"]):
        v0 = data["val0"]
        if o == 0 and "inert_val" in edits:
            v0 = edits["inert_val"]
        depth = max(v0, data["val0"], data["valfree"])
        table_p = {("pi_c", j): data["prime_table"].get(
            ("pi_c", j), ((j + 1) % prime,)) for j in range(depth + 1)}
        table = {k: ver(v) for k, v in table_p.items()}
        vals = {b: data["valfree"] for b in betas}
        vals["b0"] = v0
        specs.append(LocalPlaceSpec(
            label=f"u{o}", splitting="inert", q=data["qp"] ** prime,
            over=f"up{o}", val=vals, rec_table=table))
        specs_p.append(LocalPlaceSpec(
            label=f"up{o}", splitting="inert", q=data["qp"],
            val={"b0": data["val0"]}, rec_table=table_p))
    if raw["ramified"]:
        ap = raw["ramified"]["a_prime"]
        specs.append(ram_place("t8", "tp", prime * ap,
                               raw["ramified"]["betas_b"], p2))
        specs_p.append(ram_place("tp", None, ap,
                                 {"b0": raw["ramified"]["betas_b"]["b0"]},
                                 prime, deg=1))

    bp = raw["beta_prime"]
    ninv = pow(bp["norm_inverse"], prime, p2)
    if "norm" in edits:
        ninv = ninv * edits["norm"] % p2
    rec_inf0 = ver(bp["rec_inf"])
    if "head" in edits:
        rec_inf0 = group.add(rec_inf0, edits["head"])
    beta_list = [BetaData(label="b0", rec_inf=rec_inf0,
                          rec_sigma_p=ver(bp["rec_sigma_p"]),
                          norm_inverse=ninv, p_unit_class="c1")]
    fb = raw["free_beta"]
    inf, sg = fb["rec_inf"], fb["rec_sigma_p"]
    for i in range(1, prime + 1):
        beta_list.append(BetaData(label=f"b{i}", rec_inf=inf,
                                  rec_sigma_p=sg,
                                  norm_inverse=fb["norm_inverse"],
                                  p_unit_class="c1"))
        inf, sg = sig(inf), sig(sg)
    pnorm = bp["norm_inverse"]
    if "prime_norm" in edits:
        pnorm = pnorm * edits["prime_norm"] % p2
    beta_p = (BetaData(label="b0", rec_inf=bp["rec_inf"],
                       rec_sigma_p=bp["rec_sigma_p"],
                       norm_inverse=pnorm, p_unit_class="c1"),)

    rap = raw["rec_a_prime"]
    if "prime_rec_a" in edits:
        rap = ((rap[0] + edits["prime_rec_a"]) % prime,)
    reps = [ClassRep(label="a0", rec=ver(raw["rec_a_prime"]),
                     specs=tuple(specs))]
    rep_rot = {"a0": "a0"}
    for j, data in enumerate(raw["free_reps"], start=1):
        tables = chain(data["base"], rot)
        rec_val = data["rec_root"]
        for step in range(prime):
            idx = (j - 1) * prime + step + 1
            label = f"a{idx}"
            nxt = (j - 1) * prime + (step + 1) % prime + 1
            rep_rot[label] = f"a{nxt}"
            sp = tuple(LocalPlaceSpec(
                label=f"ra{idx}_{i}", splitting="split-w", q=data["q"],
                divides=frozenset({"FFc"}), val=dict(val0),
                rec_table=tables[i]) for i in range(prime))
            reps.append(ClassRep(label=label, rec=rec_val, specs=sp))
            tables = [{rot[b]: sig(v) for b, v in tables[(i - 1) % prime].items()}
                      for i in range(prime)]
            rec_val = sig(rec_val)
    reps_p = (ClassRep(label="a0", rec=rap, specs=tuple(specs_p)),)

    units = [TorsionUnitIndex("u0", "c1")]
    unit_rot = {"u0": "u0"}
    if raw["extra_unit"]:
        units.append(TorsionUnitIndex("ux", "zz"))
        unit_rot["ux"] = "ux"

    mod_pairs = [(ver(z), ver(zb)) for z, zb in raw["mod_pairs_prime"]]
    side = CongruenceSide(
        target=target, betas=tuple(beta_list), beta_action=dict(rot),
        reps=ClassRepData(tuple(reps), rep_rot, prime),
        units=tuple(units), unit_action=unit_rot,
        modification=modification_factor(target, mod_pairs))
    side_p = CongruenceSide(
        target=target_p, betas=beta_p, beta_action={"b0": "b0"},
        reps=ClassRepData(reps_p, {"a0": "a0"}, prime),
        units=(TorsionUnitIndex("u0", "c1"),), unit_action={"u0": "u0"},
        modification=modification_factor(target_p, raw["mod_pairs_prime"]))
    ideal = TraceIdealBasis(act, prime, precision)
    return side, side_p, ideal, mod_pairs, list(raw["mod_pairs_prime"])


def random_congruence_workspace(rng: random.Random, prime: int = 3,
                                precision: int = 2, split_orbits: int = 1,
                                generic_orbits: int = 1,
                                inert_places: int = 1,
                                with_ramified: bool = False,
                                free_reps: int = 0,
                                extra_unit: bool = False, check: bool = True,
                                return_pairs: bool = False):
    """Coherent two-sided workspace with random equivariant tables.
    Returns (side, prime side, trace ideal basis); with check on, the
    congruence is verified to hold before returning.  With return_pairs
    the modification-factor generating pairs of both sides are appended,
    for serializers that declare the factor through its pairs."""
    raw = _draw_raw(rng, prime, split_orbits, generic_orbits, inert_places,
                    with_ramified, free_reps, extra_unit)
    side, side_p, ideal, up_pairs, down_pairs = _assemble(raw, precision)
    if check:
        report = check_transfer_congruence("b0", side, side_p, ideal)
        if not report.verdict or report.diagnostics:
            raise RuntimeError("generated workspace fails its own check: "
                               + "; ".join(report.diagnostics))
    if return_pairs:
        return side, side_p, ideal, up_pairs, down_pairs
    return side, side_p, ideal


_PERTURBATION_KINDS = ("split_w", "head", "norm", "prime_norm",
                       "generic_val", "inert_val", "prime_rec_a",
                       "prime_split")


def perturb_workspace(rng: random.Random, prime: int = 3,
                      precision: int = 2, kind: str | None = None,
                      tries: int = 30, return_pairs: bool = False,
                      **build_kw):
    """Workspace with one fixed-fiber entry edited so the congruence
    fails and the report names the (b0, a0, u0) witness.  Edits that the
    trace ideal happens to absorb are resampled.  Returns (side, prime
    side, trace ideal basis, kind, expected diagnostic); with
    return_pairs the two modification pair lists are appended."""
    kinds = (kind,) if kind else _PERTURBATION_KINDS
    p2 = prime * prime
    for _ in range(tries):
        chosen = rng.choice(kinds)
        raw = _draw_raw(rng, prime,
                        build_kw.get("split_orbits", 1),
                        build_kw.get("generic_orbits", 1),
                        build_kw.get("inert_places", 1),
                        build_kw.get("with_ramified", False),
                        build_kw.get("free_reps", 0),
                        build_kw.get("extra_unit", False))
        edits = raw["edits"]
        if chosen == "split_w":
            if not raw["split"]:
                continue
            edits["split"] = ((rng.randrange(prime), "b0",
                               rng.randrange(1, p2)),)
        elif chosen == "head":
            edits["head"] = (prime * rng.randrange(1, prime),)
        elif chosen == "norm":
            # multiplier off the residue class of 1 so the change is not a
            # p-divisible scaling the ideal absorbs
            edits["norm"] = rng.randrange(2, prime)
        elif chosen == "prime_norm":
            edits["prime_norm"] = rng.randrange(2, prime)
        elif chosen == "generic_val":
            if not raw["generic"]:
                continue
            cur = raw["generic"][0]["vals"]["b0"]
            edits["generic_val"] = (cur + 1 + rng.randrange(2)) % 3
        elif chosen == "inert_val":
            if not raw["inert"]:
                continue
            cur = raw["inert"][0]["val0"]
            edits["inert_val"] = (cur + 1 + rng.randrange(2)) % 3
        elif chosen == "prime_rec_a":
            edits["prime_rec_a"] = rng.randrange(1, prime)
        else:
            if not raw["split"]:
                continue
            edits["prime_split"] = rng.randrange(1, prime)
        if chosen in ("head", "prime_rec_a", "prime_split"):
            # these edits shift a delta by a transfer-image offset; with a
            # nontrivial modification factor that difference is provably
            # inside the trace ideal (two augmentation factors on the
            # fixed line), so only modification-free workspaces can
            # witness them
            raw["mod_pairs_prime"] = []
        side, side_p, ideal, up_pairs, down_pairs = _assemble(raw, precision)
        report = check_transfer_congruence("b0", side, side_p, ideal)
        if report.verdict:
            continue
        if not any(FIXED_POINT_DIAGNOSTIC in d for d in report.diagnostics):
            continue
        if return_pairs:
            return (side, side_p, ideal, chosen, FIXED_POINT_DIAGNOSTIC,
                    up_pairs, down_pairs)
        return side, side_p, ideal, chosen, FIXED_POINT_DIAGNOSTIC
    raise RuntimeError(f"no failing perturbation found in {tries} tries")
