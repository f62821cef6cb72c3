"""Batch command-line front end.

Four subcommands cover the pipeline: `roots` reports the root datum and the
Hermitian structure at the marked node, `module` builds simple highest-weight
modules and their invariant-form data, `series` builds a principal series
representation and runs its verification batteries, and `selftest` runs a
fixed cross-fixture smoke battery.

Every run emits one JSON report (stdout or --out) carrying a `schema` field.
Exit status 0 means every requested check passed, 1 means at least one
failed, 2 means the request itself was invalid.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import itertools
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .flag import SphericalAlgebra
from .linalg import ONE, det, matvec
from .modules import (isotypic_decomposition, load_module, module_cache_name,
                      save_module, simple_module)
from .principal import (build_degenerate_series, build_nondegenerate_series,
                        integer_specialization, spherical_vector_check,
                        verify_dj_relations)
from .rootdata import (CartanMatrix, NotHermitian, build_root_datum,
                       check_hermitian, strongly_orthogonal_roots)
from .scalars import QScalar, ScalarField, pole_free_on_unit_interval


class ConfigError(ValueError):
    """Invalid job description; maps to exit status 2."""


@dataclasses.dataclass
class JobConfig:
    """One batch job.  The marked node and the series direction are 1-based
    on the interface and converted at the point of use."""

    command: str
    kind: str = None
    rank: int = 0
    cartan: tuple = None
    l0: int = 0
    hw: tuple = ()
    k: int = 0
    u: tuple = None
    level: int = 2
    seed: int = 0
    jobs: int = 1
    cache_dir: str = None
    out: str = None
    q0: Fraction = None

    def cartan_matrix(self) -> CartanMatrix:
        if self.cartan is not None:
            if self.kind or self.rank:
                raise ConfigError("--cartan excludes --type/--rank")
            return CartanMatrix.from_matrix(self.cartan)
        if not self.kind or self.rank < 1:
            raise ConfigError("need --type with --rank, or --cartan")
        return CartanMatrix.builtin(self.kind, self.rank)

    def pair(self):
        cm = self.cartan_matrix()
        if not 1 <= self.l0 <= cm.rank:
            raise ConfigError(f"--l0 must be in 1..{cm.rank}")
        return check_hermitian(build_root_datum(cm), self.l0 - 1)

    def label(self) -> str:
        if self.cartan is None:
            return f"{self.kind}{self.rank}"
        digest = hashlib.sha256(repr(self.cartan).encode()).hexdigest()[:10]
        return f"custom{digest}"

    def payload(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None or v == () or v == 0 and f.name in ("k", "rank"):
                continue
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = [list(x) if isinstance(x, tuple) else x for x in v]
            out[f.name] = v
        return out


def _base_report(cfg: JobConfig, body: dict) -> dict:
    report = {"schema": 1, "command": cfg.command, "config": cfg.payload()}
    report.update(body)
    return report


# ---------------------------------------------------------------------------
# roots


def cmd_roots(cfg: JobConfig):
    cm = cfg.cartan_matrix()
    if not 1 <= cfg.l0 <= cm.rank:
        raise ConfigError(f"--l0 must be in 1..{cm.rank}")
    datum = build_root_datum(cm)
    body = {
        "rank": cm.rank,
        "cartan": [list(r) for r in cm.a],
        "symmetrizer": list(cm.d),
        "positive_roots": len(datum.positive_roots),
        "highest_root": list(datum.delta),
        "marked_node": cfg.l0,
    }
    try:
        pair = check_hermitian(datum, cfg.l0 - 1)
    except NotHermitian as exc:
        reason = (f"marked node {cfg.l0} has highest-root coefficient "
                  f"{exc.coeff}, so the pair is not Hermitian")
        body.update({"hermitian": False, "reason": reason, "ok": False})
        return _base_report(cfg, body), 1
    sph = strongly_orthogonal_roots(pair)
    acc = (0,) * cm.rank
    gens = []
    for g in sph.gammas:
        acc = tuple(a + b for a, b in zip(acc, g))
        gens.append(datum.root_to_weight(acc))
    body.update({
        "hermitian": True,
        "compact_roots": len(pair.compact_positive_roots()),
        "noncompact_roots": len(pair.noncompact_positive_roots()),
        "real_rank": sph.rank,
        "orthogonal_roots": [list(g) for g in sph.gammas],
        "invariant_generator_weights": [list(w) for w in gens],
        "ok": True,
    })
    return _base_report(cfg, body), 0


# ---------------------------------------------------------------------------
# module


def _module_report(pair, hw, cache_dir, label) -> dict:
    field = ScalarField(pair.datum.root_order())
    module = None
    cached = False
    path = None
    if cache_dir:
        path = os.path.join(cache_dir,
                            module_cache_name(label, pair, hw, field.D))
        if os.path.exists(path):
            module = load_module(path, pair)
            cached = True
    if module is None:
        module = simple_module(pair, hw, field)
        if path is not None:
            os.makedirs(cache_dir, exist_ok=True)
            save_module(module, path)
    wd = pair.datum.weyl_dim(hw)
    iso = isotypic_decomposition(module)
    blocks = []
    regular = True
    for wt in sorted(module.gram):
        g = module.gram[wt]
        d = det(g)
        free, _ = pole_free_on_unit_interval(d)
        good = bool(d) and free
        regular = regular and good
        blocks.append({"weight": list(wt), "size": len(g),
                       "determinant": field.serialize(d),
                       "nonzero": bool(d), "pole_free": free})
    ok = module.dim == wd and regular
    return {
        "hw": list(hw),
        "dim": module.dim,
        "weyl_dim": wd,
        "dim_matches_weyl": module.dim == wd,
        "from_cache": cached,
        "isotypic": [{"type": list(c.mu), "multiplicity": c.multiplicity,
                      "dim": c.dim} for c in iso.components],
        "gram_blocks": blocks,
        "ok": ok,
    }


def _module_worker(args):
    rows, d, l0, hw, cache_dir, label = args
    cm = CartanMatrix.from_matrix(rows, d)
    pair = check_hermitian(build_root_datum(cm), l0)
    return _module_report(pair, hw, cache_dir, label)


def cmd_module(cfg: JobConfig):
    pair = cfg.pair()
    if not cfg.hw:
        raise ConfigError("module command needs at least one --hw weight")
    for hw in cfg.hw:
        if len(hw) != pair.rank:
            raise ConfigError(f"weight {hw} has wrong length for rank "
                              f"{pair.rank}")
        if not pair.datum.is_dominant(hw):
            raise ConfigError(f"weight {hw} is not dominant")
    label = cfg.label()
    if cfg.jobs > 1 and len(cfg.hw) > 1:
        cm = pair.datum.cartan
        args = [(cm.a, cm.d, pair.l0, hw, cfg.cache_dir, label)
                for hw in cfg.hw]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            reports = list(pool.map(_module_worker, args))
    else:
        reports = [_module_report(pair, hw, cfg.cache_dir, label)
                   for hw in cfg.hw]
    ok = all(r["ok"] for r in reports)
    return _base_report(cfg, {"modules": reports, "ok": ok}), 0 if ok else 1


# ---------------------------------------------------------------------------
# series


def _standard_words(pair):
    words = []
    for i in range(pair.datum.rank):
        words.append((("E", i),))
        words.append((("F", i),))
    words.append((("E", pair.l0), ("F", pair.l0)))
    words.append((("F", pair.l0), ("E", pair.l0)))
    return words


def _sweep_points(nparams):
    if nparams == 1:
        return [(n,) for n in range(-2, 3)]
    return list(itertools.product(range(-1, 2), repeat=nparams))


def _relation_section(rep):
    try:
        report = verify_dj_relations(rep)
    except ArithmeticError as exc:
        return {"ok": False, "error": str(exc)}, False
    levels = {}
    for entry in report.entries:
        got = levels.setdefault(entry.start, [0, 0])
        got[0 if entry.checked else 1] += entry.states
    return {
        "ok": True,
        "checked": report.checked,
        "skipped": report.skipped,
        "by_level": [{"level": list(lv), "checked": c, "skipped": s}
                     for lv, (c, s) in sorted(levels.items())],
    }, True


def _specialization_section(rep, points, words):
    rows = []
    ok = True
    for u0 in points:
        try:
            outcomes = integer_specialization(rep, u0, words)
        except ArithmeticError as exc:
            rows.append({"u": list(u0), "ok": False, "error": str(exc)})
            ok = False
            continue
        rows.append({"u": list(u0),
                     "checked": sum(1 for o in outcomes if o.checked),
                     "skipped": sum(1 for o in outcomes if not o.checked),
                     "ok": True})
    return {"ok": ok, "points": rows}, ok


def _spherical_section(rep) -> bool:
    try:
        return spherical_vector_check(rep)
    except ArithmeticError:
        return False


def _numeric_section(rep, q0, u0):
    state = rep.apply_letter("E", rep.pair.l0, rep.spherical_state())
    vals = rep.evaluate_state(state, u0)
    entries = {}
    exact = True
    for (gid, w), c in sorted(vals.items()):
        nv = rep.field.evaluate(c, q0)
        exact = exact and nv.exact
        entries[f"{gid}:{w}"] = float(nv)
    return {"q0": str(q0), "u": list(u0),
            "state": "raising letter at the marked node on the invariant",
            "exact": exact, "entries": entries}


def cmd_series(cfg: JobConfig):
    pair = cfg.pair()
    field = ScalarField(pair.datum.root_order())
    alg = SphericalAlgebra(pair, field, bound=2, jobs=cfg.jobs)
    if cfg.k:
        if not 1 <= cfg.k <= alg.rank:
            raise ConfigError(f"--k must be in 1..{alg.rank}")
        rep = build_degenerate_series(alg, cfg.k - 1, cfg.level)
        family = {"parameters": 1, "direction": cfg.k,
                  "twist_weight": list(alg.generator_weights[cfg.k - 1])}
    else:
        rep = build_nondegenerate_series(alg, bound=cfg.level)
        family = {"parameters": alg.rank,
                  "twist_weights": [list(w) for w in alg.generator_weights]}
    if cfg.u is not None and len(cfg.u) != rep.nparams:
        raise ConfigError(f"--u needs {rep.nparams} components")

    points = [cfg.u] if cfg.u is not None else _sweep_points(rep.nparams)
    words = _standard_words(pair)
    spherical_ok = _spherical_section(rep)
    relations, rel_ok = _relation_section(rep)
    special, spec_ok = _specialization_section(rep, points, words)
    body = {
        "family": family,
        "level": cfg.level,
        "lattice_size": len(rep.tower.lattice),
        "spherical_fixed": spherical_ok,
        "relations": relations,
        "specializations": special,
    }
    if cfg.q0 is not None:
        u0 = cfg.u if cfg.u is not None else (1,) * rep.nparams
        body["numeric"] = _numeric_section(rep, cfg.q0, u0)
    ok = spherical_ok and rel_ok and spec_ok
    body["ok"] = ok
    return _base_report(cfg, body), 0 if ok else 1


# ---------------------------------------------------------------------------
# selftest


FIXTURES = (("A", 1, 1), ("A", 2, 1), ("C", 2, 2), ("A", 3, 2))


def _random_product_nonzero(alg, rng) -> bool:
    # integral-domain sampling: products of nonzero graded elements stay
    # nonzero
    a = rng.choice(alg.generator_weights)
    b = rng.choice(alg.generator_weights)
    mult = alg.ensure_mult(a, b)
    ma, mb = alg.module(a), alg.module(b)
    x = [QScalar(rng.randint(-3, 3)) for _ in range(ma.dim)]
    y = [QScalar(rng.randint(-3, 3)) for _ in range(mb.dim)]
    if not any(x):
        x[0] = ONE
    if not any(y):
        y[-1] = ONE
    return any(matvec(mult.right_mult_matrix(y), x))


def _series_smoke(alg, k, level, points):
    rep = (build_degenerate_series(alg, k, level) if k is not None
           else build_nondegenerate_series(alg, bound=level))
    out = {"spherical_fixed": _spherical_section(rep)}
    relations, rel_ok = _relation_section(rep)
    out["relations"] = relations
    special, spec_ok = _specialization_section(rep, points,
                                               _standard_words(alg.pair))
    out["specializations"] = special
    return out, out["spherical_fixed"] and rel_ok and spec_ok


def cmd_selftest(cfg: JobConfig):
    rng = random.Random(cfg.seed)
    checks = []

    def record(name, ok, **extra):
        checks.append(dict({"name": name, "ok": bool(ok)}, **extra))

    algebras = {}
    for kind, rank, l0 in FIXTURES:
        tag = f"{kind}{rank}"
        cm = CartanMatrix.builtin(kind, rank)
        pair = check_hermitian(build_root_datum(cm), l0 - 1)
        sph = strongly_orthogonal_roots(pair)
        alg = SphericalAlgebra(pair, bound=2, jobs=cfg.jobs)
        algebras[tag] = alg
        record(f"{tag} invariant generators match the orthogonal cascade",
               alg.rank == sph.rank, count=alg.rank)
        dims_ok = all(alg.ensure_module(mu).dim == pair.datum.weyl_dim(mu)
                      for mu in alg.generator_weights)
        record(f"{tag} generator module dimensions match the Weyl formula",
               dims_ok)
        products_ok = all(_random_product_nonzero(alg, rng)
                          for _ in range(5))
        record(f"{tag} seeded graded products are nonzero", products_ok)

    batteries = [
        ("A1", 0, 3, [(n,) for n in range(-2, 3)]),
        ("A2", 0, 1, [(n,) for n in range(-1, 2)]),
        ("C2", 1, 1, [(n,) for n in range(-1, 2)]),
        ("A3", None, 1, [(0, 0), (-1, 0), (0, -1), (-1, -1)]),
    ]
    for tag, k, level, points in batteries:
        label = (f"{tag} series along generator {k + 1}" if k is not None
                 else f"{tag} series in all directions")
        section, ok = _series_smoke(algebras[tag], k, level, points)
        record(f"{label} at level {level}", ok, **section)

    ok = all(c["ok"] for c in checks)
    return _base_report(cfg, {"checks": checks, "ok": ok}), 0 if ok else 1


# ---------------------------------------------------------------------------
# argument handling


def _parse_int_vector(text, flag):
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(","))
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated integers, "
                          f"got {text!r}") from None


def _parse_cartan(text):
    try:
        rows = json.loads(text)
        return tuple(tuple(int(x) for x in row) for row in rows)
    except (ValueError, TypeError):
        pass
    try:
        return tuple(tuple(int(x) for x in row.split(","))
                     for row in text.split(";") if row.strip())
    except ValueError:
        raise ConfigError(f"--cartan expects JSON rows or "
                          f"'2,-1;-1,2' syntax, got {text!r}") from None


def _parse_q0(text):
    try:
        q0 = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"--q0 expects a rational in (0,1), "
                          f"got {text!r}") from None
    if not 0 < q0 < 1:
        raise ConfigError("--q0 must lie strictly between 0 and 1")
    return q0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhc",
        description="exact spherical principal series calculator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--type", dest="kind", choices="ABCD", default=None,
                        help="Cartan type letter")
    common.add_argument("--rank", type=int, default=0)
    common.add_argument("--cartan", default=None,
                        help="explicit Cartan matrix, JSON or '2,-1;-1,2'")
    common.add_argument("--l0", type=int, default=0,
                        help="marked node, 1-based")
    common.add_argument("--hw", action="append", default=[],
                        help="highest weight, comma-separated; repeatable")
    common.add_argument("--k", type=int, default=0,
                        help="series direction, 1-based; omit for all")
    common.add_argument("--u", default=None,
                        help="integer exponent vector for specialization")
    common.add_argument("--level", type=int, default=2,
                        help="exponent bound prepared in the tower")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel module construction workers")
    common.add_argument("--cache-dir", default=None)
    common.add_argument("--out", default=None,
                        help="write the JSON report here instead of stdout")
    common.add_argument("--q0", default=None,
                        help="rational sample point in (0,1) for numeric "
                             "evaluation")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("roots", parents=[common],
                   help="root datum and Hermitian structure")
    sub.add_parser("module", parents=[common],
                   help="simple module dimensions, types, Gram blocks")
    sub.add_parser("series", parents=[common],
                   help="principal series construction and verification")
    sub.add_parser("selftest", parents=[common],
                   help="fixed cross-fixture smoke battery")
    return parser


def config_from_args(ns) -> JobConfig:
    if ns.level < 0:
        raise ConfigError("--level must be nonnegative")
    if ns.jobs < 1:
        raise ConfigError("--jobs must be positive")
    return JobConfig(
        command=ns.command,
        kind=ns.kind,
        rank=ns.rank,
        cartan=_parse_cartan(ns.cartan) if ns.cartan else None,
        l0=ns.l0,
        hw=tuple(_parse_int_vector(t, "--hw") for t in ns.hw),
        k=ns.k,
        u=_parse_int_vector(ns.u, "--u") if ns.u is not None else None,
        level=ns.level,
        seed=ns.seed,
        jobs=ns.jobs,
        cache_dir=ns.cache_dir,
        out=ns.out,
        q0=_parse_q0(ns.q0) if ns.q0 is not None else None,
    )


COMMANDS = {
    "roots": cmd_roots,
    "module": cmd_module,
    "series": cmd_series,
    "selftest": cmd_selftest,
}


def emit(report: dict, out):
    text = json.dumps(report, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        report, code = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # rootdata validation failures (non-finite type, bad matrix, bad
        # node) are configuration errors everywhere except inside reports
        print(f"error: {exc}", file=sys.stderr)
        return 2
    emit(report, cfg.out)
    return code
