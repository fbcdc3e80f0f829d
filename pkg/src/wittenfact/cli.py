"""Command-line driver: ``wittenfact run <manifest>`` and ``wittenfact validate <manifest>``.

Exit codes: 0 success, 2 invalid manifest (schema or algebra axioms),
3 computation refused (size budget, unmet precondition), 4 a requested
check failed.  Reports are JSON with sorted keys; rationals are "p/q"
strings and q-series are lists of such strings.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from typing import Any, Mapping

import jsonschema

from . import __version__
from . import bd, char_ring, factalg, homalg
from .exact_core import QSeries, eisenstein_lattice_numeric, eisenstein_q, q_from_tau, to_fraction

EXIT_OK, EXIT_SCHEMA, EXIT_COMPUTE, EXIT_CHECK = 0, 2, 3, 4


class ManifestError(Exception):
    """Invalid manifest; ``path`` points at the offending field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(message)
        self.path = path


class CheckFailed(Exception):
    def __init__(self, report: dict):
        super().__init__("check failed")
        self.report = report


def load_schema() -> dict:
    return json.loads(resources.files("wittenfact").joinpath("manifest.schema.json").read_text())


def _json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate_manifest(data: Any) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        # deepest error is usually the informative one
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise ManifestError(err.message, _json_path(err.absolute_path))
    # semantic checks that need the objects themselves
    payload = data["payload"]
    if "algebra" in payload:
        build_algebra(payload["algebra"], "$.payload.algebra")
    if "manifold" in payload:
        build_manifold(payload["manifold"], "$.payload.manifold")
    if "presentation" in payload:
        try:
            bd.BDPresentation.from_json(payload["presentation"])
        except bd.BDError as exc:
            raise ManifestError(str(exc), "$.payload.presentation") from None
    if "witten_twist" in payload:
        build_manifold(payload["witten_twist"]["manifold"], "$.payload.witten_twist.manifold")


# builders -------------------------------------------------------------------

def build_algebra(data: Mapping, path: str) -> homalg.FinDimAlgebra:
    try:
        if "standard" in data:
            return homalg.STANDARD_ALGEBRAS[data["standard"]]()
        if "truncated_polynomial" in data:
            t = data["truncated_polynomial"]
            return homalg.truncated_polynomial(t["n_vars"], t["bound"])
        return homalg.FinDimAlgebra.from_json(data)
    except homalg.AlgebraError as exc:
        raise ManifestError(str(exc), path) from None


def build_manifold(data: Mapping, path: str) -> char_ring.ManifoldSpec:
    try:
        if "projective_space" in data:
            return char_ring.projective_space(data["projective_space"])
        if "trivial" in data:
            return char_ring.trivial_bundle_spec(data["trivial"])
        if "product" in data:
            parts = [build_manifold(m, f"{path}.product[{i}]") for i, m in enumerate(data["product"])]
            out = parts[0]
            for m in parts[1:]:
                out = out.product(m)
            return out
        gens = [(g["name"], g["degree"]) for g in data["generators"]]
        return char_ring.formal_spec(gens, data["complex_dimension"], data["total_chern"],
                                     data["integration"], data.get("relations", ()),
                                     data.get("ch2_trivialized", False), data.get("name", ""))
    except (char_ring.SpecError, ValueError) as exc:
        raise ManifestError(str(exc), path) from None


# serialization -----------------------------------------------------------------

def _q(series: QSeries) -> dict:
    return {"order": series.order, "coefficients": [str(c) for c in series.coefficients]}


def _scalar(c) -> Any:
    return _q(c) if isinstance(c, QSeries) else str(c)


def _class_json(cls: char_ring.MixedClass) -> dict:
    return {cls.ring.format_monomial(m): _scalar(c) for m, c in cls.terms()}


def _float(x: float) -> str:
    return f"{x:.14e}"


def _complex(z: complex) -> dict:
    return {"re": _float(z.real), "im": _float(z.imag)}


# tasks ----------------------------------------------------------------------------

def task_eisenstein(payload, options, ctx) -> dict:
    k = payload["k"]
    order = options.get("q_order", payload.get("order", 6))
    out = {"k": k, "series": _q(eisenstein_q(k, order))}
    lat = payload.get("lattice")
    if lat:
        tau = complex(float(to_fraction(lat["tau"]["re"])), float(to_fraction(lat["tau"]["im"])))
        if tau.imag <= 0:
            raise ManifestError("tau must lie in the upper half plane", "$.payload.lattice.tau.im")
        if k < 2:
            raise ManifestError("the lattice sum needs k >= 2", "$.payload.k")
        est = eisenstein_lattice_numeric(k, tau, lat["cutoff"], lat.get("tail_correction", False))
        ref = eisenstein_q(k, max(order, 40)).evaluate(q_from_tau(tau))
        out["lattice"] = {"cutoff": est.cutoff, "tail_correction": est.tail_corrected,
                          "value": _complex(est.value), "q_expansion_value": _complex(ref),
                          "relative_error": _float(est.relative_error(ref))}
    return out


def task_classes(payload, options, ctx) -> dict:
    spec = build_manifold(payload["manifold"], "$.payload.manifold")
    q_order = options.get("q_order", 3)
    out: dict[str, Any] = {"manifold": spec.name, "complex_dimension": spec.complex_dimension}
    failed = False
    for name in payload["classes"]:
        if name == "chern_character":
            ch = char_ring.chern_character(spec, max(spec.complex_dimension, 1))
            out[name] = {str(k): _class_json(c) for k, c in enumerate(ch)}
        elif name == "todd":
            out[name] = _class_json(char_ring.todd_class(spec))
        elif name == "a_hat":
            out[name] = _class_json(char_ring.a_hat_class(spec))
        elif name == "witten":
            out[name] = _class_json(char_ring.witten_class(spec, q_order))
        elif name == "witten_limit":
            ok = char_ring.witten_limit_check(spec)
            out[name] = {"holds": ok}
            failed |= not ok
    if failed:
        raise CheckFailed(out)
    return out


def task_genus(payload, options, ctx) -> dict:
    spec = build_manifold(payload["manifold"], "$.payload.manifold")
    q_order = options.get("q_order", 3)
    out: dict[str, Any] = {"manifold": spec.name}
    for name in payload.get("genera", ["todd", "a_hat", "witten"]):
        if name == "todd":
            out[name] = str(char_ring.todd_genus(spec))
        elif name == "a_hat":
            out[name] = str(char_ring.a_hat_genus(spec))
        else:
            out[name] = _q(char_ring.witten_genus(spec, q_order))
    return out


def task_hochschild(payload, options, ctx) -> dict:
    A = build_algebra(payload["algebra"], "$.payload.algebra")
    budget = options.get("budget", homalg.DEFAULT_BUDGET)
    normalized = payload.get("normalized", False)
    out = {"algebra": A.name, "dimension": A.dim, "normalized": normalized,
           "hh_dims": homalg.hh_dims(A, payload["max_degree"], normalized=normalized, budget=budget),
           "commutator_quotient_dim": A.commutator_quotient_dim()}
    hkr = payload.get("hkr")
    if hkr:
        checks = homalg.hkr_check(hkr["n_vars"], hkr["bound"], window=hkr.get("window"))
        out["hkr"] = [{"degree": c.degree, "chain_map": c.chain_map, "hochschild_dim": c.hochschild_dim,
                       "forms_dim": c.forms_dim, "isomorphism": c.isomorphism} for c in checks]
        if not all(c.isomorphism for c in checks):
            raise CheckFailed(out)
    return out


def _cover(data: Mapping | None, lam: Fraction):
    if data is None:
        return None
    if "standard" in data:
        make = factalg.standard_circle_cover if data["standard"] == "consecutive-overlap" else factalg.long_arc_cover
        return f"{data['standard']}, {data['arcs']} arcs", make(data["arcs"], lam)
    arcs = [(to_fraction(a["start"]), to_fraction(a["length"])) for a in data["arcs"]]
    try:
        return f"explicit, {len(arcs)} arcs", factalg.CoverSpec.circle(lam, arcs)
    except (factalg.CoverError, ValueError) as exc:
        raise ManifestError(str(exc), "$.payload.cover") from None


def task_fh_circle(payload, options, ctx) -> dict:
    A = build_algebra(payload["algebra"], "$.payload.algebra")
    lam = to_fraction(payload.get("lambda", 1))
    if lam <= 0:
        raise ManifestError("lambda must be positive", "$.payload.lambda")
    max_degree = payload.get("max_degree", 1)
    budget = options.get("budget", factalg.DEFAULT_BUDGET)
    convention = factalg.parse_convention(options.get("convention", "distinct"))
    ctx["convention"] = str(convention)
    chosen = _cover(payload.get("cover"), lam)
    out: dict[str, Any] = {"algebra": A.name, "lambda": str(lam), "max_degree": max_degree}
    compare = payload.get("compare_hh", True)
    if chosen is None and isinstance(convention, factalg.Distinct) and compare:
        cmp = factalg.compare_fh_hh(A, lam, max_degree, budget=budget)
        out.update({"hh_dims": cmp.hh, "refinement_log": cmp.refinement_log, "cover": cmp.final_cover,
                    "dims": cmp.attempts[-1][1],
                    "verdict": "matches HH" if cmp.matches else "differs from HH"})
        if not cmp.matches:
            raise CheckFailed(out)
        return out
    label, cover = chosen or ("long-arc, 4 arcs", factalg.long_arc_cover(4, lam))
    fh = factalg.factorization_homology_circle(A, lam, cover, max_degree, convention, budget)
    out.update({"cover": label, "dims": fh.dims, "factorizing": fh.factorizing,
                "factorizing_degree": fh.factorizing_degree,
                "witness": [str(x) for x in fh.witness] if fh.witness else None})
    if compare:
        hh = homalg.hh_dims(A, max_degree)
        out["hh_dims"] = hh
        out["verdict"] = "matches HH" if fh.dims == hh else "differs from HH"
        if fh.dims != hh:
            raise CheckFailed(out)
    return out


def _model_poly(P: bd.BDPresentation, terms: Mapping, path: str) -> dict:
    try:
        return P.to_poly(P.element(terms))
    except KeyError as exc:
        raise ManifestError(f"unknown basis element {exc.args[0]!r}", path) from None


def task_bd_check(payload, options, ctx) -> dict:
    if "model" in payload:
        m = payload["model"]
        P = bd.odd_cotangent_model(m["n"], m["bound"])
        source = f"odd cotangent model, n={m['n']}, bound={m['bound']}"
    else:
        P = bd.BDPresentation.from_json(payload["presentation"])
        source = "explicit presentation"
    out: dict[str, Any] = {"source": source, "dimension": P.dim}
    identities = payload.get("identities")
    unknown = set(identities or ()) - set(bd.IDENTITIES)
    if unknown:
        raise ManifestError(f"unknown identities {sorted(unknown)}", "$.payload.identities")
    if "mutate" in payload:
        try:
            P = bd.mutate_bracket(P, tuple(payload["mutate"]))
        except (bd.BDError, KeyError) as exc:
            raise ManifestError(str(exc), "$.payload.mutate") from None
        out["mutated"] = list(payload["mutate"])
    if "twist" in payload:
        try:
            alpha = P.element(payload["twist"])
            P = bd.twist_differential(P, alpha)
        except (bd.BDError, KeyError) as exc:
            raise ManifestError(str(exc), "$.payload.twist") from None
        out["twist"] = P.format(alpha)
    if "conjugate" in payload:
        if P.model is None:
            raise ManifestError("conjugation needs the model presentation", "$.payload.conjugate")
        T = _model_poly(P, payload["conjugate"], "$.payload.conjugate")
        conj = bd.conjugate(P, T)
        M = P.model
        residual_free = all(not bd.conjugation_residual(M, T, {mono: Fraction(1)})
                            for mono in P.monomials)
        out["conjugation"] = {"T": M.ring.format(T), "identity_holds_on_basis": residual_free}
        P = conj.presentation
        if not residual_free:
            raise CheckFailed(out)
    if "witten_twist" in payload:
        wt = payload["witten_twist"]
        if P.model is None:
            raise ManifestError("the Witten twist needs the model presentation", "$.payload.witten_twist")
        spec = build_manifold(wt["manifold"], "$.payload.witten_twist.manifold")
        q_order = options.get("q_order", 3)
        images = {g: _model_poly(P, v, f"$.payload.witten_twist.images.{g}") for g, v in wt["images"].items()}
        try:
            log_wit = char_ring.log_witten_class(spec, q_order)
            alpha_poly = bd.realize_class(log_wit, P.model, images)
            alpha = bd.presentation_vector(P, alpha_poly)
            c1_half = spec.chern_class(1) * Fraction(1, 2)
            todd_alpha = bd.presentation_vector(
                P, bd.realize_class(char_ring.log_todd(spec) - c1_half, P.model, images))
        except bd.BDError as exc:
            raise ManifestError(str(exc), "$.payload.witten_twist.images") from None
        untwisted = P
        P = bd.twist_differential(P, alpha)
        q0 = bd.q_coefficient_presentation(P, 0)
        todd = bd.twist_differential(untwisted, todd_alpha)
        mismatch = bd.differentials_equal(q0, todd)
        out["witten_twist"] = {"alpha": P.format(alpha), "q_order": q_order,
                               "q0_equals_todd_twist": not mismatch, "mismatch": mismatch}
        if identities is None:
            identities = ["d_squared", "bd_leibniz"]
    if "specialize" in payload:
        P = bd.specialize_hbar(P, payload["specialize"])
        out["hbar"] = payload["specialize"]
    report = bd.check_bd(P, identities)
    out["window_violations"] = len(P.window_violations)
    out["identities"] = report.summary()
    out["passed"] = report.passed and not out.get("witten_twist", {}).get("mismatch")
    if not out["passed"]:
        raise CheckFailed(out)
    return out


def task_rees(payload, options, ctx) -> dict:
    R = homalg.rees_weyl(tuple(payload["bounds"]))
    x, p, h = R.x(), R.p(), R.hbar()
    comm = R.commutator(p, x)
    second = R.commutator(p * p, x) - h * p * 2
    out: dict[str, Any] = {"bounds": list(R.bounds)}
    out["commutator_p_x_equals_hbar"] = None if comm.overflow else comm == h
    out["p2x_relation"] = None if second.overflow else not second.terms
    # ring-map property of the specializations on in-bounds monomial pairs
    checked = failures = 0
    monos = R.in_bounds_monomials()
    for value in (0, 1):
        for a in monos:
            for b in monos:
                u, v = R.monomial(*a), R.monomial(*b)
                uv = u * v
                if uv.overflow:
                    continue
                checked += 1
                if uv.specialize(value) != homalg.specialized_product(u.specialize(value), v.specialize(value), value):
                    failures += 1
    out["specialization"] = {"pairs_checked": checked, "failures": failures}
    ok = out["commutator_p_x_equals_hbar"] is not False and out["p2x_relation"] is not False and not failures
    out["passed"] = ok
    if not ok:
        raise CheckFailed(out)
    return out


TASKS = {"eisenstein": task_eisenstein, "classes": task_classes, "genus": task_genus,
         "hochschild": task_hochschild, "fh-circle": task_fh_circle, "bd-check": task_bd_check,
         "rees": task_rees}


def run_manifest(data: Mapping, q_order: int | None = None, convention: str | None = None) -> tuple[int, dict]:
    """Validate and run one manifest; returns (exit code, report)."""
    data = json.loads(json.dumps(data))
    options = data.setdefault("options", {})
    if q_order is not None:
        options["q_order"] = q_order
    if convention is not None:
        options["convention"] = convention
    try:
        validate_manifest(data)
    except ManifestError as exc:
        return EXIT_SCHEMA, {"error": {"kind": "schema", "message": str(exc), "path": exc.path}}
    ctx: dict[str, Any] = {}
    status = EXIT_OK
    try:
        result = TASKS[data["task"]](data["payload"], options, ctx)
    except ManifestError as exc:
        return EXIT_SCHEMA, {"error": {"kind": "schema", "message": str(exc), "path": exc.path}}
    except (homalg.SizeBudgetExceeded, factalg.CoverError) as exc:
        return EXIT_COMPUTE, {"error": {"kind": type(exc).__name__, "message": str(exc)}}
    except char_ring.PreconditionError as exc:
        witness = exc.witness
        if isinstance(witness, char_ring.MixedClass):
            witness = _class_json(witness)
        return EXIT_COMPUTE, {"error": {"kind": "PreconditionError", "message": str(exc), "witness": witness}}
    except CheckFailed as exc:
        result, status = exc.report, EXIT_CHECK
    report = {"task": data["task"], "result": result,
              "provenance": {"library": "wittenfact", "version": __version__,
                             "options": {k: options[k] for k in sorted(options)},
                             **({"convention": ctx["convention"]} if "convention" in ctx else {})}}
    return status, report


def dumps(report: Mapping) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _read(path: str) -> Any:
    with open(path) as fh:
        return json.load(fh)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wittenfact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a manifest and write a JSON report")
    run.add_argument("manifest")
    run.add_argument("--out", help="report path (default: stdout)")
    run.add_argument("--q-order", type=int, help="override options.q_order")
    run.add_argument("--convention", help="Cech convention: distinct or full:L")
    val = sub.add_parser("validate", help="check a manifest against the schema")
    val.add_argument("manifest")
    args = parser.parse_args(argv)

    try:
        data = _read(args.manifest)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    if args.command == "validate":
        try:
            validate_manifest(data)
        except ManifestError as exc:
            print(f"invalid at {exc.path}: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
        print("ok")
        return EXIT_OK

    status, report = run_manifest(data, args.q_order, args.convention)
    if "error" in report:
        err = report["error"]
        where = f" at {err['path']}" if "path" in err else ""
        print(f"error{where}: {err['message']}", file=sys.stderr)
        if "witness" in err:
            print("witness: " + json.dumps(err["witness"], sort_keys=True), file=sys.stderr)
        return status
    text = dumps(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_CHECK:
        print("check failed", file=sys.stderr)
    return status
