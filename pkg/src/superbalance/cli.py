"""Command line front end: JSON in, JSON out.

Exit status 0 on success, 1 on a domain error (printed as
``{"error": code, "detail": message}``), 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .balance import (
    PointEmbedding,
    SectionScaling,
    balance_residual_points,
    mv_blocks_cy,
    solve_cy_balance,
    solve_point_balance,
)
from .grassmann import GrassmannError, MultivectorArray
from .integrate import (
    CY_BEREZIN_ORDER,
    CY_CONTEXT,
    CY_CONTRACTION_FACTOR,
    EPSILON_12,
    QuadratureSpec,
    berezin_point_integrate,
    cy_integrate_p12,
)
from .jsonio import (
    InvalidInput,
    chart_point_to_json,
    complex_from_json,
    complex_to_json,
    embedding_from_json,
    embedding_to_json,
    multivector_from_json,
    multivector_to_json,
    point_from_json,
    point_to_json,
    scaling_from_json,
    spec_from_json,
    supermatrix_from_json,
)
from .projective import change_chart, normalize, super_norm, veronese_map
from .supermatrix import berezinian, is_unitary, u11_element

CONVENTIONS = {
    "conjugation": "antilinear homomorphism, no reversal; generator i <-> i+N",
    "odd_norm": "i * sum theta conj(theta)",
    "point_berezin_order": "eta_1, etabar_1, ..., eta_n, etabar_n (leftmost applied last)",
    "cy_berezin_order": list(CY_BEREZIN_ORDER),
    "epsilon_12": EPSILON_12,
    "cy_contraction_factor": CY_CONTRACTION_FACTOR,
    "plane_measure": "Lebesgue dA",
    "berezinian": "det(A - B D^-1 C) / det(D)",
}

COMMANDS = ("mul", "berezinian", "unitary-check", "chart", "norm", "veronese", "integrate",
            "balance-point", "balance-point-solve", "balance-cy", "selftest")


def _read_input(path):
    if path is None:
        raise InvalidInput("this command needs -i/--input")
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"input is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc


def _spec(args, data=None):
    base = spec_from_json((data or {}).get("spec") if isinstance(data, dict) else None)
    return QuadratureSpec(args.radial if args.radial is not None else base.radial,
                          args.angular if args.angular is not None else base.angular,
                          args.tol if args.tol is not None else base.tol)


# --------------------------------------------------------------------------
# subcommands; each returns the "result" object


def cmd_mul(args):
    d = _read_input(args.input)
    a = multivector_from_json(d["a"])
    b = multivector_from_json(d["b"], a.context)
    return {"product": multivector_to_json(a * b)}


def cmd_berezinian(args):
    g = supermatrix_from_json(_read_input(args.input))
    ber = berezinian(g)
    body = ber.body()
    return {"berezinian": multivector_to_json(ber), "body_re": body.real, "body_im": body.imag}


def cmd_unitary_check(args):
    d = _read_input(args.input)
    if "u11" in d:
        gamma = multivector_from_json(d["u11"]["gamma"])
        g = u11_element(float(d["u11"]["psi"]), gamma)
    else:
        g = supermatrix_from_json(d)
    rep = is_unitary(g, float(d.get("tolerance", 1e-12)))
    return {"residual": rep.residual, "unitary": rep.unitary}


def cmd_chart(args):
    d = _read_input(args.input)
    pt = point_from_json(d["point"])
    ap = normalize(pt, int(d.get("chart", 0)))
    if "to" in d:
        ap = change_chart(ap, int(d["to"]))
    return chart_point_to_json(ap)


def cmd_norm(args):
    d = _read_input(args.input)
    pt = point_from_json(d.get("point", d))
    n = super_norm(pt)
    out = {"norm": multivector_to_json(n), "body": n.body().real}
    if "r" in d:
        r = multivector_from_json(d["r"], pt.context)
        out["constraint"] = multivector_to_json(n - r)
    return out


def cmd_veronese(args):
    d = _read_input(args.input)
    pt = point_from_json(d.get("point", d))
    m = args.m if args.m is not None else int(d.get("m", 2))
    return {"m": m, "image": point_to_json(veronese_map(m, pt))}


def _plane_terms(terms):
    """``sum coeff * theta^mask * z^a zbar^b / (1 + |z|^2)^k`` over ``CY_CONTEXT``."""
    parsed = []
    for t in terms:
        mask = int(t.get("mask", 0))
        if mask < 0 or mask >= 16:
            raise InvalidInput("theta mask must address the four generators theta1, theta2, thetabar1, thetabar2")
        parsed.append((mask, complex_from_json(t.get("coeff", 1.0)), int(t.get("z_power", 0)),
                       int(t.get("zbar_power", 0)), float(t.get("denominator_power", 0))))

    def F(z):
        coeffs = np.zeros((16, *z.shape), dtype=complex)
        for mask, c, a, b, k in parsed:
            coeffs[mask] += c * z ** a * np.conj(z) ** b / (1 + np.abs(z) ** 2) ** k
        return MultivectorArray(CY_CONTEXT, coeffs)

    return F


def cmd_integrate(args):
    d = _read_input(args.input)
    if "plane_terms" in d:
        spec = _spec(args, d)
        density = d.get("density", "invariant")
        value = cy_integrate_p12(_plane_terms(d["plane_terms"]), spec, density)
        return {"measure": "cy_p12", "density": density, "spec": spec.to_dict(), "value": complex_to_json(value)}
    if "F" in d:
        F = multivector_from_json(d["F"])
        theta = [multivector_from_json(t, F.context) for t in d.get("theta", [])]
        value = berezin_point_integrate(F, args.weight, theta or None)
        return {"measure": "point", "weight": args.weight, "value": complex_to_json(value)}
    raise InvalidInput("integrate expects 'plane_terms' or 'F'")


def cmd_balance_point(args):
    d = _read_input(args.input)
    items = d["points"] if "points" in d else [d]
    rep = balance_residual_points([embedding_from_json(e) for e in items], args.weight)
    return rep.to_dict()


def _parse_sigma(text):
    if text is None or text == "identity":
        return np.eye(2)
    if text == "zero":
        return np.zeros((2, 2))
    try:
        raw = json.loads(text)
        return np.array([[complex_from_json(x) for x in row] for row in raw], dtype=complex)
    except (json.JSONDecodeError, TypeError) as exc:
        raise InvalidInput("--sigma expects 'identity', 'zero' or a JSON 2x2 array") from exc


def cmd_balance_point_solve(args):
    if args.input is not None:
        e0 = embedding_from_json(_read_input(args.input))
    else:
        e0 = PointEmbedding.from_parameters([1.0, 0.0], [0.0, 0.0], _parse_sigma(args.sigma))
    sol = solve_point_balance(e0)
    rep = sol.report
    return {
        "alpha_tilde_0": float(sol.alpha_tilde[0]),
        "alpha_tilde_1": float(sol.alpha_tilde[1]),
        "det_sigma_sq": sol.det_sigma_sq,
        "lambda": rep.lam.real,
        "eta": rep.eta.real,
        "residual": rep.even_residual,
        "su_residual": rep.odd_residual,
        "verified": bool(rep.converged),
        "embedding": embedding_to_json(sol.embedding),
        "report": rep.to_dict(),
    }


def cmd_balance_cy(args):
    d = _read_input(args.input) if args.input is not None else {}
    m = args.m if args.m is not None else int(d.get("m", 2))
    spec = _spec(args, d)
    density = d.get("density", "invariant")
    scaling = scaling_from_json(d["scaling"]) if "scaling" in d else None
    if d.get("solve", True):
        s, rep = solve_cy_balance(m, spec, scaling, max_iter=int(d.get("max_iter", 500)),
                                  tol=float(d.get("residual_tol", 1e-6)), density=density)
    else:
        s = scaling or SectionScaling.unit(m)
        rep = mv_blocks_cy(m, s, spec, density)
    out = rep.to_dict()
    out.update({"m": m, "scaling": s.to_dict(), "spec": spec.to_dict(), "density": density,
                "p": 2 * m - 1, "q": 2 * m})
    return out


def cmd_selftest(args):
    from .selftest import run_checks

    checks = run_checks()
    return {"checks": checks, "passed": all(c["passed"] for c in checks)}


HANDLERS = {
    "mul": cmd_mul,
    "berezinian": cmd_berezinian,
    "unitary-check": cmd_unitary_check,
    "chart": cmd_chart,
    "norm": cmd_norm,
    "veronese": cmd_veronese,
    "integrate": cmd_integrate,
    "balance-point": cmd_balance_point,
    "balance-point-solve": cmd_balance_point_solve,
    "balance-cy": cmd_balance_cy,
    "selftest": cmd_selftest,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-i", "--input", help="input JSON path ('-' for stdin)")
    common.add_argument("-o", "--output", help="write JSON here instead of stdout")
    common.add_argument("--weight", choices=("none", "exp"), default="none")
    common.add_argument("--m", type=int)
    common.add_argument("--radial", type=int)
    common.add_argument("--angular", type=int)
    common.add_argument("--tol", type=float)
    parser = argparse.ArgumentParser(prog="superbalance", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "balance-point-solve":
            sp.add_argument("--sigma", help="'identity', 'zero' or JSON 2x2 matrix")
    return parser


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in sorted(vars(args).items()) if k != "output"}
    try:
        result = HANDLERS[args.command](args)
        status = 0
        if args.command == "selftest" and not result["passed"]:
            status = 1
        payload = {"command": args.command, "config": config, "conventions": CONVENTIONS, "result": result}
    except (GrassmannError, ValueError, KeyError, ZeroDivisionError, ArithmeticError) as exc:
        code = getattr(exc, "code", None) or ("invalid_input" if isinstance(exc, KeyError) else "domain_error")
        detail = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        payload = {"error": code, "detail": detail}
        status = 1
    text = _dump(payload)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
