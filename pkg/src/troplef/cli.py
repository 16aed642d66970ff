"""Command line interface: ``troplef <command> INPUT [options]``.

INPUT is a JSON complex file, inline JSON or ``fixture:<name>``.  Reports go to
stdout as aligned text, or as canonical JSON with ``--json``.  Exit codes: 0 on
success, 1 on validation or hypothesis failure, 2 on usage errors.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from .complex import Complex, barycentric_subdivision, dihomologic_subdivision
from .cosheaf import Cosheaf, constant_cosheaf, dihom_subdivide
from .errors import TroplefError
from .fixtures import ParseError, UnknownFixture, canonical_json, emit_complex, parse_complex
from .homology import chain_complex, homology, pl_verify
from .lattice import CoeffRing, imat
from .tropical import (
    TropicalSetup, delta_invariant, f0_cosheaf, f1_cosheaf, h_number_formula, hodge_diamond,
    lefschetz_analysis, regular_subdivision, sedentarity, theta_cell, theta_complex, validate_simple,
)


class Failure(Exception):
    """A command finished but its check failed; the report is still printed."""

    def __init__(self, report, text):
        super().__init__(text)
        self.report = report
        self.text = text


class CoeffType(click.ParamType):
    name = "coeff"

    def convert(self, value, param, ctx):
        if isinstance(value, CoeffRing):
            return value
        try:
            return CoeffRing.parse(value)
        except ValueError as exc:
            self.fail(str(exc), param, ctx)


COEFF = CoeffType()


def _common(fn):
    fn = click.option("--threads", type=click.IntRange(1), default=1, show_default=True,
                      help="Worker threads for independent per-degree jobs.")(fn)
    fn = click.option("--strict", is_flag=True, help="Also check pairwise cell intersections.")(fn)
    fn = click.option("--json", "as_json", is_flag=True, help="Emit canonical JSON.")(fn)
    return fn


def _load(source, strict):
    try:
        return parse_complex(source, strict=strict)
    except UnknownFixture as exc:
        raise click.BadParameter(str(exc), param_hint="INPUT") from exc


def _need_setup(obj) -> TropicalSetup:
    if not isinstance(obj, TropicalSetup):
        raise click.UsageError("this command needs an input with a 'polytope' section")
    return obj


def _base(obj) -> Complex:
    return obj.K if isinstance(obj, TropicalSetup) else obj


def _emit(report, text, as_json):
    click.echo(canonical_json(report) if as_json else text, nl=not as_json)


def _run(fn, as_json):
    """Call fn() -> (report, text); map library errors onto exit codes."""
    try:
        report, text = fn()
    except Failure as exc:
        _emit(exc.report, exc.text, as_json)
        sys.exit(1)
    except (ParseError, TroplefError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        if as_json:
            click.echo(canonical_json(report), nl=False)
        else:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    _emit(report, text, as_json)


def _groups_text(title, groups):
    lines = [title]
    for k, g in groups:
        lines.append(f"  H_{k} = {g}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# cosheaf selection


def _parse_cosheaf_file(path, K: Complex, ring: CoeffRing) -> Cosheaf:
    """``{"ranks": [...], "extensions": [{"cell": e, "face": f, "matrix": [[...]]}]}``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "ranks" not in doc:
        raise ParseError("cosheaf file: missing field 'ranks'")
    ranks = doc["ranks"]
    ext = {}
    for i, item in enumerate(doc.get("extensions", [])):
        try:
            e, f, m = item["cell"], item["face"], item["matrix"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"extensions[{i}] needs 'cell', 'face' and 'matrix'") from exc
        ext[(int(e), int(f))] = imat(m, (ranks[e], ranks[f]))
    return Cosheaf(K, ranks, ext, ring)


def _select(obj, spec: str, ring: CoeffRing, dihom: bool):
    """The cosheaf named by --cosheaf, on K (cellular) or on its dihomologic cells."""
    K = _base(obj)
    if spec == "constant":
        F = constant_cosheaf(K, 1, ring)
        return dihom_subdivide(F) if dihom else F
    if spec[:3] in ("f0:", "f1:"):
        setup = _need_setup(obj)
        try:
            p = int(spec[3:])
        except ValueError:
            raise click.BadParameter(f"bad degree in {spec!r}", param_hint="--cosheaf") from None
        if spec[:2] == "f0":
            return f0_cosheaf(setup, p, ring)
        return f1_cosheaf(setup, p, ring)[0]
    F = _parse_cosheaf_file(spec, K, ring)
    return dihom_subdivide(F) if dihom else F


COSHEAF_HELP = "constant, f0:<p>, f1:<p> (tropical inputs) or a cosheaf JSON file."


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Cellular cosheaf homology and tropical Lefschetz maps."""


@main.command()
@click.argument("source", metavar="INPUT")
@_common
def validate(source, as_json, strict, threads):
    """Parse and validate a complex (and its polytope, if present)."""
    def job():
        obj = _load(source, strict)
        K = _base(obj)
        K.validate()
        report = {"mode": K.mode, "dim": K.dim, "f_vector": K.f_vector(), "valid": True}
        text = f"valid {K.mode} complex, dim {K.dim}, f-vector {K.f_vector()}"
        if isinstance(obj, TropicalSetup):
            report["polytope"] = {"f_vector": obj.P.f_vector(), "simple": validate_simple(obj.P)}
            text += f"\npolytope f-vector {obj.P.f_vector()}, simple: {validate_simple(obj.P)}"
        return report, text
    _run(job, as_json)


@main.command()
@click.argument("source", metavar="INPUT")
@click.option("--mode", type=click.Choice(["barycentric", "dihomologic"]), default="dihomologic",
              show_default=True)
@_common
def subdivide(source, mode, as_json, strict, threads):
    """Emit the barycentric or dihomologic subdivision as a CW complex."""
    def job():
        K = _base(_load(source, strict))
        S = barycentric_subdivision(K) if mode == "barycentric" else dihomologic_subdivision(K)
        doc = emit_complex(S)
        return doc, f"{mode} subdivision, f-vector {S.f_vector()}\n" + canonical_json(doc).rstrip()
    _run(job, as_json)


@main.command("homology")
@click.argument("source", metavar="INPUT")
@click.option("--cosheaf", "spec", default="constant", show_default=True, help=COSHEAF_HELP)
@click.option("--coeff", type=COEFF, default="Z", show_default=True, help="Z, Q or F<p>.")
@_common
def homology_cmd(source, spec, coeff, as_json, strict, threads):
    """Cellular homology with cosheaf coefficients."""
    def job():
        obj = _load(source, strict)
        F = _select(obj, spec, coeff, dihom=spec[:3] in ("f0:", "f1:"))
        h = homology(chain_complex(F.base, F))
        report = {"cosheaf": spec, **h.to_json()}
        return report, _groups_text(f"homology with {spec} coefficients over {coeff}",
                                    [(k, _fmt(g.to_json(), str(coeff))) for k, g in sorted(h.groups.items())])
    _run(job, as_json)


@main.group()
def tropical():
    """Tropical invariants, Hodge diamonds and regular subdivisions."""


@tropical.command("hodge")
@click.argument("source", metavar="INPUT")
@click.option("--coeff", type=COEFF, default="Z", show_default=True)
@click.option("--which", type=click.Choice(["X", "Y", "both"]), default="both", show_default=True)
@_common
def tropical_hodge(source, coeff, which, as_json, strict, threads):
    """Hodge diamonds of the hypersurface X and the toric variety Y."""
    def job():
        setup = _need_setup(_load(source, strict))
        names = ["X", "Y"] if which == "both" else [which]
        diamonds = [hodge_diamond(setup, w, coeff, threads) for w in names]
        report = {"ring": str(coeff), "diamonds": {d.which: d.to_json()["groups"] for d in diamonds}}
        return report, "\n\n".join(d.render() for d in diamonds)
    _run(job, as_json)


@tropical.command("invariants")
@click.argument("source", metavar="INPUT")
@_common
def tropical_invariants(source, as_json, strict, threads):
    """delta(P), theta(K), simplicity and h-numbers."""
    def job():
        setup = _need_setup(_load(source, strict))
        P, K = setup.P, setup.K
        simple = validate_simple(P)
        report = {"n": setup.n, "simple": simple, "theta": theta_complex(K),
                  "theta_cells": {str(c.id): theta_cell(K.vertex_coords(c.id))
                                  for c in K.cells if c.dim >= 2}}
        if simple:
            data = sedentarity(P)
            report["delta"] = delta_invariant(P)
            report["delta_vertices"] = {str(v): data.delta[v].to_json() for v in P.cells_of_dim(0)}
            report["h_numbers"] = [h_number_formula(P, p) for p in range(setup.n + 1)]
        lines = [f"n = {setup.n}", f"simple: {simple}"]
        if simple:
            lines.append(f"delta(P) = {report['delta']}")
        lines.append(f"theta(K) = {report['theta']}")
        if simple:
            lines.append(f"h-numbers: {report['h_numbers']}")
        return report, "\n".join(lines)
    _run(job, as_json)


def _parse_lift(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.lower() in ("-inf", "inf", "none", "x"):
            out.append(None)
            continue
        try:
            out.append(Fraction(tok))
        except ValueError:
            raise click.BadParameter(f"bad lift value {tok!r}", param_hint="--lift") from None
    return out


@tropical.command("dual")
@click.argument("source", metavar="INPUT")
@click.option("--lift", required=True, help="Comma separated coefficients, one per vertex of INPUT; "
                                            "-inf omits a point.")
@click.option("--min-convention", is_flag=True, help="Use lower faces (min-plus) instead of upper faces.")
@_common
def tropical_dual(source, lift, min_convention, as_json, strict, threads):
    """Regular subdivision of the vertices of INPUT induced by a lift."""
    def job():
        K = _base(_load(source, strict))
        if K.mode != "polyhedral":
            raise click.UsageError("tropical dual needs a polyhedral input")
        lifts = _parse_lift(lift)
        if len(lifts) != len(K.coords):
            raise click.BadParameter(f"{len(lifts)} lift values for {len(K.coords)} points",
                                     param_hint="--lift")
        S = regular_subdivision(K.coords, lifts, min_convention=min_convention)
        doc = emit_complex(S)
        return doc, f"regular subdivision, f-vector {S.f_vector()}\n" + canonical_json(doc).rstrip()
    _run(job, as_json)


@main.group()
def verify():
    """Constructive checks of duality statements."""


@verify.command("pl")
@click.argument("source", metavar="INPUT")
@click.option("--cosheaf", "spec", default="constant", show_default=True, help=COSHEAF_HELP)
@click.option("--coeff", type=COEFF, default="Z", show_default=True)
@_common
def verify_pl(source, spec, coeff, as_json, strict, threads):
    """Compare dihomologic homology with the dual complex in every degree."""
    def job():
        G = _select(_load(source, strict), spec, coeff, dihom=True)
        report = pl_verify(G)
        sym = report["ring"]
        lines = [f"n = {report['n']}, ring {report['ring']}, concentrated: {report['concentrated']}"]
        for row in report["degrees"]:
            lines.append(f"  k={row['k']}: H={_fmt(row['homology'], sym)} dual={_fmt(row['dual'], sym)} "
                         f"iso={row['iso']}")
        if "error" in report:
            lines.append(f"error: {report['error']}")
        lines.append("ok" if report["ok"] else "FAILED")
        text = "\n".join(lines)
        if not report["ok"]:
            raise Failure(report, text)
        return report, text
    _run(job, as_json)


def _fmt(g, sym="Z"):
    parts = []
    if g["rank"]:
        parts.append(sym if g["rank"] == 1 else f"{sym}^{g['rank']}")
    parts += [f"Z/{d}" for d in g["torsion"]]
    return " + ".join(parts) or "0"


@main.command()
@click.argument("source", metavar="INPUT")
@click.option("--coeff", type=COEFF, default="Z", show_default=True)
@click.option("--assert-theorem", is_flag=True, help="Exit 1 unless every map meets the theorem's ranges.")
@_common
def lefschetz(source, coeff, assert_theorem, as_json, strict, threads):
    """Classify the inclusion-induced maps i_pq: H_pq(X) -> H_pq(Y)."""
    def job():
        setup = _need_setup(_load(source, strict))
        report = lefschetz_analysis(setup, coeff, threads)
        sym = str(coeff)
        lines = [f"n = {report['n']}, ring {report['ring']}, delta = {report['delta']}, "
                 f"theta = {report['theta']}, hypotheses hold: {report['hypotheses']}"]
        for e in report["maps"]:
            need = f" (required: {e['required']})" if e["required"] else ""
            flag = "" if e["ok"] else "  <-- violates"
            lines.append(f"  i_{e['p']},{e['q']}: {_fmt(e['source'], sym)} -> {_fmt(e['target'], sym)}  "
                         f"{e['class']}, coker {_fmt(e['cokernel'], sym)}{need}{flag}")
        lines.append("compliant" if report["compliant"] else "not compliant")
        text = "\n".join(lines)
        if assert_theorem and not report["compliant"]:
            raise Failure(report, text)
        return report, text
    _run(job, as_json)


if __name__ == "__main__":
    main()
