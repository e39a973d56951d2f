"""Command-line interface.

Configuration is a TOML document with sections [geometry], [bundle],
[class], [run], and optional [[resolution]] terms; results are emitted as a
single JSON document (or a CSV table of the invariants) with every number
serialized as an exact fraction string.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .euler import (BundleSpec, CheckReport, EngineError, assemble_B,
                    euler_data_check, euler_series_check, o_series,
                    omega_form, one_series, residue_closed_form,
                    residue_direct)
from .geometry import (Geometry, GeometryError, GeometrySpec, ProductGeometry,
                       build_geometry)
from .mirror import (MirrorData, MirrorError, asymptotics,
                     asymptotics_equivariant, extract_invariants_pipeline,
                     mirror_fg, transform_apply, transform_apply_restricted)
from .reconstruct import (SolveError, extract_from_solution, graph_sum_degree,
                          linking_values_from_resolution,
                          linking_values_from_splitting, oracle_line_count,
                          solve_linear_model)
from .series import XPoly, iter_box

ZERO = Fraction(0)


class ConfigError(ValueError):
    pass


MODES = ("compute", "verify", "solve")

_SECTION_KEYS = {
    "geometry": {"kind", "dims", "rays", "cones"},
    "bundle": {"convex", "concave"},
    "class": {"kind"},
    "run": {"d_max", "zeta_order", "weight_seed", "mode"},
}
_RESOLUTION_KEYS = {"sign", "convex", "concave"}


@dataclass
class RunConfig:
    geometry: GeometrySpec
    convex: Tuple[Tuple[int, ...], ...]
    concave: Tuple[Tuple[int, ...], ...]
    multclass: str
    d_max: int
    zeta_order: int
    weight_seed: int
    mode: str
    resolution: Optional[Tuple[Tuple[int, BundleSpec], ...]] = None

    def bundle(self) -> BundleSpec:
        return BundleSpec(self.convex, self.concave)

    def echo(self) -> dict:
        out = {
            "geometry": {"kind": self.geometry.kind},
            "bundle": {"convex": [list(c) for c in self.convex],
                       "concave": [list(c) for c in self.concave]},
            "class": self.multclass,
            "run": {"d_max": self.d_max, "zeta_order": self.zeta_order,
                    "weight_seed": self.weight_seed, "mode": self.mode},
        }
        if self.geometry.kind == "projective_product":
            out["geometry"]["dims"] = list(self.geometry.dims)
        else:
            out["geometry"]["rays"] = [list(r) for r in self.geometry.rays]
            out["geometry"]["cones"] = [list(c) for c in self.geometry.cones]
        if self.resolution is not None:
            out["resolution"] = [
                {"sign": sign, "convex": [list(c) for c in term.convex],
                 "concave": [list(c) for c in term.concave]}
                for sign, term in self.resolution]
        return out


def _int_vectors(value, what: str) -> Tuple[Tuple[int, ...], ...]:
    if not isinstance(value, list) or any(not isinstance(v, list) for v in value):
        raise ConfigError(f"{what} must be a list of integer vectors")
    out = []
    for vec in value:
        if any(not isinstance(x, int) or isinstance(x, bool) for x in vec):
            raise ConfigError(f"{what} must contain integers only")
        out.append(tuple(vec))
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document; unknown keys are
    rejected and every vector length is checked against the number of
    curve-class basis elements."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}")

    for section in doc:
        if section not in set(_SECTION_KEYS) | {"resolution"}:
            raise ConfigError(f"unknown section [{section}]")
    for section, allowed in _SECTION_KEYS.items():
        for key in doc.get(section, {}):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    gsec = doc.get("geometry", {})
    kind = gsec.get("kind")
    if kind == "projective_product":
        dims = gsec.get("dims")
        if not isinstance(dims, list) or not dims or \
                any(not isinstance(n, int) or n < 1 for n in dims):
            raise ConfigError("geometry.dims must be a nonempty list of "
                              "positive integers")
        spec = GeometrySpec(kind="projective_product", dims=tuple(dims))
        m = len(dims)
    elif kind == "toric":
        rays = _int_vectors(gsec.get("rays", []), "geometry.rays")
        cones = _int_vectors(gsec.get("cones", []), "geometry.cones")
        if not rays or not cones:
            raise ConfigError("toric geometry needs rays and cones")
        spec = GeometrySpec(kind="toric", rays=rays, cones=cones)
        m = len(rays) - len(rays[0])
        if m < 1:
            raise ConfigError("toric ray data leaves no curve classes")
    else:
        raise ConfigError("geometry.kind must be 'projective_product' or "
                          "'toric'")
    try:
        spec.validate()
    except GeometryError as exc:
        raise ConfigError(str(exc))

    bsec = doc.get("bundle", {})
    convex = _int_vectors(bsec.get("convex", []), "bundle.convex")
    concave = _int_vectors(bsec.get("concave", []), "bundle.concave")
    for vec in convex + concave:
        if len(vec) != m:
            raise ConfigError(f"bundle vector {list(vec)} has length "
                              f"{len(vec)}, expected {m}")

    csec = doc.get("class", {})
    multclass = csec.get("kind", "euler")
    if multclass not in ("one", "euler", "chern_poly"):
        raise ConfigError("class.kind must be one | euler | chern_poly")

    rsec = doc.get("run", {})
    d_max = rsec.get("d_max", 1)
    zeta_order = rsec.get("zeta_order", 3)
    weight_seed = rsec.get("weight_seed", 1)
    mode = rsec.get("mode", "compute")
    if not isinstance(d_max, int) or d_max < 1:
        raise ConfigError("run.d_max must be an integer >= 1")
    if not isinstance(zeta_order, int) or zeta_order < 1:
        raise ConfigError("run.zeta_order must be an integer >= 1")
    if not isinstance(weight_seed, int):
        raise ConfigError("run.weight_seed must be an integer")
    if mode not in MODES:
        raise ConfigError(f"run.mode must be one of {', '.join(MODES)}")

    resolution = None
    if "resolution" in doc:
        terms = doc["resolution"]
        if not isinstance(terms, list):
            raise ConfigError("[[resolution]] must be an array of tables")
        parsed = []
        for term in terms:
            for key in term:
                if key not in _RESOLUTION_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [[resolution]]")
            sign = term.get("sign", 1)
            if sign not in (1, -1):
                raise ConfigError("resolution sign must be 1 or -1")
            tconv = _int_vectors(term.get("convex", []), "resolution.convex")
            tconc = _int_vectors(term.get("concave", []), "resolution.concave")
            for vec in tconv + tconc:
                if len(vec) != m:
                    raise ConfigError(f"resolution vector {list(vec)} has "
                                      f"length {len(vec)}, expected {m}")
            parsed.append((sign, BundleSpec(tconv, tconc)))
        resolution = tuple(parsed)

    return RunConfig(spec, convex, concave, multclass, d_max, zeta_order,
                     weight_seed, mode, resolution)


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def frac_str(v) -> str:
    if isinstance(v, XPoly):
        if v.is_constant():
            return frac_str(v.constant())
        return " + ".join(f"({frac_str(c)})*x^{j}" for j, c in enumerate(v.c) if c)
    f = Fraction(v)
    return str(f)


def series_table(ser) -> dict:
    out = {}
    for d in ser.degrees():
        out[",".join(map(str, d))] = frac_str(ser.coeff(d))
    return out


def mirror_tables(md: MirrorData) -> dict:
    out = {"C": series_table(md.C)}
    if md.f_alpha is not None:
        out["f_alpha_part"] = series_table(md.f_alpha)
        out["f_scalar_part"] = series_table(md.f_scalar)
        out["g"] = [series_table(gj) for gj in md.g]
    return out


def k_records(table) -> list:
    recs = []
    for d in sorted(table.K, key=lambda t: (sum(t), t)):
        recs.append({"d": list(d), "K": frac_str(table.K[d]),
                     "residual": frac_str(table.residuals[d])})
    return recs


class VirtualRank:
    """Rank bookkeeping of a virtual bundle given by a signed resolution."""

    def __init__(self, terms):
        self.terms = terms

    def rank_induced(self, d) -> int:
        return sum(sign * term.rank_induced(d) for sign, term in self.terms)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _build(cfg: RunConfig) -> Geometry:
    horizon = max(cfg.d_max, 2)
    return build_geometry(cfg.geometry, cfg.weight_seed, horizon=horizon)


def _box(cfg: RunConfig, geom: Geometry):
    return tuple([cfg.d_max] * geom.m)


def _document(cfg: RunConfig, started: float) -> dict:
    return {"config": cfg.echo(), "mode": cfg.mode,
            "timing": {"seconds": round(time.time() - started, 3)}}


def cmd_compute(cfg: RunConfig, long_tests: bool = False) -> dict:
    """Assemble the hypergeometric series, normalize it, and extract the
    invariants."""
    started = time.time()
    geom = _build(cfg)
    box = _box(cfg, geom)
    v = cfg.bundle()
    b = cfg.multclass
    B = assemble_B(geom, v, b, box, equivariant=False)
    md = mirror_fg(asymptotics(B))
    A = transform_apply(B, md)
    table = extract_invariants_pipeline(geom, v, b, A, box)

    doc = _document(cfg, started)
    doc["K"] = k_records(table)
    if table.skipped:
        doc["K_note"] = table.skipped
    if table.shift is not None:
        doc["chern_shift"] = table.shift
    doc["mirror"] = mirror_tables(md)
    checks = []
    if long_tests and isinstance(geom, ProductGeometry) and geom.m == 1 \
            and b == "euler" and cfg.d_max >= 2 and table.K:
        ells = [c[0] for c in v.convex] + [c[0] for c in v.concave]
        oracle = graph_sum_degree(geom.dims[0], ells, 2, cfg.weight_seed)
        got = table.K.get((2,), ZERO)
        checks.append(CheckReport(
            "degree-2-graph-oracle", oracle == got,
            None if oracle == got else
            f"graph sum {oracle} != extracted {got}").as_dict())
    doc["checks"] = checks
    doc["timing"]["seconds"] = round(time.time() - started, 3)
    return doc


def cmd_verify(cfg: RunConfig) -> dict:
    """Run every verification: the gluing identity, the quadratic pairing
    condition, the alpha-degree bound, and the dual residue computations."""
    started = time.time()
    geom = _build(cfg)
    box = _box(cfg, geom)
    v = cfg.bundle()
    b = cfg.multclass
    checks: List[CheckReport] = []

    checks.append(euler_data_check(v, b, box, geom))

    base = one_series(geom, box) if isinstance(geom, ProductGeometry) \
        else o_series(geom, box)
    rep = euler_series_check(base, box, cfg.zeta_order)
    checks.append(CheckReport("base-series-pairing", rep.passed,
                              rep.counterexample))
    Beq = assemble_B(geom, v, b, box, equivariant=True)
    rep = euler_series_check(Beq, box, cfg.zeta_order)
    checks.append(CheckReport("assembled-series-pairing", rep.passed,
                              rep.counterexample, rep.details))

    # alpha-degree bound of the weight-free closed form (products only)
    if isinstance(geom, ProductGeometry):
        ok = True
        ce = None
        c1 = geom.c1_vector()
        for d in iter_box(box):
            if not any(d):
                continue
            av = one_series(geom, box, equivariant=False).expand_coeff(d)
            bound = min(-2, -int(geom.pairing_of_vector(c1, d)))
            deg = av.alpha_degree()
            if deg is not None and deg > bound:
                ok = False
                ce = f"d={tuple(d)}: alpha-degree {deg} > {bound}"
                break
        checks.append(CheckReport("alpha-degree-bound", ok, ce))

    # dual residue computation at every balloon and multiplicity
    ok = True
    ce = None
    pairs = 0
    from .reconstruct import oriented_balloons, _balloon_deltas
    for bal in oriented_balloons(geom):
        p = geom.fixed_points[bal.p]
        for delta in _balloon_deltas(bal, box):
            d = tuple(delta * e for e in bal.degree)
            a0 = bal.weight / delta
            direct = residue_direct(Beq, d, p, a0)
            closed = residue_closed_form(geom, bal, delta, v, b, box)
            pairs += 1
            if direct != closed:
                ok = False
                ce = f"balloon {p.label}->" \
                     f"{geom.fixed_points[bal.q].label}, delta={delta}"
                break
        if not ok:
            break
    checks.append(CheckReport("linking-residues", ok, ce,
                              [f"{pairs} (balloon, delta) pairs compared"]))

    doc = _document(cfg, started)
    doc["checks"] = [c.as_dict() for c in checks]
    doc["all_passed"] = all(c.passed for c in checks)
    doc["timing"]["seconds"] = round(time.time() - started, 3)
    return doc


def cmd_solve(cfg: RunConfig) -> dict:
    """Reconstruct the series coefficients from linking data and extract the
    invariants; cross-checks the result against the closed-form pipeline at
    every fixed point whenever the bundle splits."""
    started = time.time()
    geom = _build(cfg)
    box = _box(cfg, geom)
    b = cfg.multclass
    v = cfg.bundle()
    if cfg.resolution is not None:
        lv = linking_values_from_resolution(cfg.resolution, b, geom, box)
        ranker = VirtualRank(cfg.resolution)
        omega = _virtual_omega(cfg.resolution, b, geom)
    else:
        lv = linking_values_from_splitting(v, b, geom, box)
        ranker = v
        omega = omega_form(v, b, geom)

    xmax_fn = None
    if b == "chern_poly":
        xmax_fn = lambda d: max(ranker.rank_induced(d), 0)
    result = solve_linear_model(geom, lv, box, omega, xmax_fn=xmax_fn)
    table = extract_from_solution(result, ranker, b)

    doc = _document(cfg, started)
    doc["K"] = k_records(table)
    if table.skipped:
        doc["K_note"] = table.skipped
    if table.shift is not None:
        doc["chern_shift"] = table.shift
    doc["solution_spaces"] = [
        {"d": list(d), "dimension": sol.solution_dim,
         "rows": sol.nrows, "unknowns": sol.nunknowns,
         "rank_by_zeta_order": [list(t) for t in sol.rank_by_zeta]}
        for d, sol in sorted(result.degrees.items(),
                             key=lambda t: (sum(t[0]), t[0]))]

    checks = []
    if cfg.resolution is None:
        agree = True
        ce = None
        Beq = assemble_B(geom, v, b, box, equivariant=True)
        md = mirror_fg(asymptotics_equivariant(Beq))
        Arest = transform_apply_restricted(Beq, md)
        from .mirror import RatVal
        for d, sol in result.degrees.items():
            for p in geom.fixed_points:
                rest = sol.restrictions[p.index]
                mine = RatVal(list(rest.num), rest.den_poly())
                other = Arest[p.index][d]
                if result.xclear:
                    other = other * (XPoly.variable() ** result.xclear)
                if mine != other:
                    agree = False
                    ce = f"d={d}, point {p.label}"
                    break
            if not agree:
                break
        checks.append(CheckReport("solve-transform-agreement", agree,
                                  ce).as_dict())
    doc["checks"] = checks
    doc["timing"]["seconds"] = round(time.time() - started, 3)
    return doc


def _virtual_omega(terms, b: str, geom: Geometry):
    from .euler import FactoredForm
    out = FactoredForm.one()
    for sign, term in terms:
        ff = omega_form(term, b, geom)
        out = out * (ff if sign == 1 else ff.inverse())
    return out


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _emit(doc: dict, fmt: str, out_path: Optional[str]):
    if fmt == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["d,K"]
        for rec in doc.get("K", []):
            lines.append("\"%s\",%s" % (",".join(map(str, rec["d"])),
                                        rec["K"]))
        text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="concavex",
        description="Exact genus-0 intersection numbers for concavex bundle "
                    "data via hypergeometric series and the mirror "
                    "transformation.")
    parser.add_argument("--config", required=True, help="TOML configuration")
    parser.add_argument("--dmax", type=int, help="override run.d_max")
    parser.add_argument("--seed", type=int, help="override run.weight_seed")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", help="write the document to a file")
    parser.add_argument("--long-tests", action="store_true",
                        help="enable the degree-2 graph-sum oracle")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text)
        if args.dmax is not None:
            if args.dmax < 1:
                raise ConfigError("--dmax must be >= 1")
            cfg.d_max = args.dmax
        if args.seed is not None:
            cfg.weight_seed = args.seed
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if cfg.mode == "compute":
            doc = cmd_compute(cfg, long_tests=args.long_tests)
        elif cfg.mode == "verify":
            doc = cmd_verify(cfg)
        else:
            doc = cmd_solve(cfg)
    except (MirrorError, SolveError) as exc:
        doc = {"error": {"condition": exc.condition, "message": str(exc)}}
        _emit(doc, "json", args.out)
        return 2
    except (EngineError, GeometryError) as exc:
        doc = {"error": {"condition": "engine", "message": str(exc)}}
        _emit(doc, "json", args.out)
        return 2

    _emit(doc, args.format, args.out)
    failed = [c for c in doc.get("checks", []) if c.get("status") == "fail"]
    if doc.get("all_passed") is False or failed:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
