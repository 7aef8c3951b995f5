"""JSON encodings for multivectors, supermatrices, points, embeddings and specs.

Floats go through ``json``'s shortest-repr encoding, so decoding an encoded
value gives back the same bits.
"""
from __future__ import annotations

import numpy as np

from .balance import PointEmbedding, SectionScaling
from .grassmann import AlgebraContext, GrassmannError, Multivector
from .integrate import QuadratureSpec
from .projective import AffineChartPoint, ProjectivePoint
from .supermatrix import SuperMatrix


class InvalidInput(GrassmannError, ValueError):
    code = "invalid_input"


def complex_to_json(c) -> dict:
    c = complex(c)
    return {"re": c.real, "im": c.imag}


def complex_from_json(d) -> complex:
    if isinstance(d, (int, float)):
        return complex(d)
    if isinstance(d, dict):
        return complex(float(d.get("re", 0.0)), float(d.get("im", 0.0)))
    raise InvalidInput(f"cannot read a complex number from {d!r}")


def array_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def multivector_to_json(a: Multivector) -> dict:
    return {
        "n_pairs": a.context.n_pairs,
        "terms": [{"mask": m, "re": c.real, "im": c.imag} for m, c in a.items()],
    }


def multivector_from_json(d, context: AlgebraContext | None = None) -> Multivector:
    try:
        n = int(d["n_pairs"])
        terms = {int(t["mask"]): complex(float(t.get("re", 0.0)), float(t.get("im", 0.0))) for t in d["terms"]}
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed multivector: {exc}") from exc
    ctx = context or AlgebraContext(n)
    if ctx.n_pairs != n:
        raise InvalidInput(f"multivector has n_pairs={n}, expected {ctx.n_pairs}")
    if any(m < 0 or m >> ctx.n_generators for m in terms):
        raise InvalidInput("mask out of range for n_pairs")
    return Multivector(ctx, terms)


def _context_of(items) -> AlgebraContext:
    ns = {int(d["n_pairs"]) for d in items}
    if len(ns) != 1:
        raise InvalidInput("all multivectors in one object must share n_pairs")
    return AlgebraContext(ns.pop())


def supermatrix_to_json(g: SuperMatrix) -> dict:
    return {"p": g.p, "q": g.q, "entries": [[multivector_to_json(e) for e in row] for row in g.entries]}


def supermatrix_from_json(d) -> SuperMatrix:
    try:
        rows = d["entries"]
        ctx = _context_of([e for r in rows for e in r])
        return SuperMatrix(ctx, int(d["p"]), int(d["q"]),
                           [[multivector_from_json(e, ctx) for e in r] for r in rows])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed supermatrix: {exc}") from exc


def point_to_json(pt: ProjectivePoint) -> dict:
    return {"p": pt.p, "q": pt.q,
            "even": [multivector_to_json(z) for z in pt.even],
            "odd": [multivector_to_json(t) for t in pt.odd]}


def point_from_json(d) -> ProjectivePoint:
    try:
        ctx = _context_of(list(d["even"]) + list(d["odd"]))
        pt = ProjectivePoint(ctx, [multivector_from_json(z, ctx) for z in d["even"]],
                             [multivector_from_json(t, ctx) for t in d["odd"]])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed point: {exc}") from exc
    if ("p" in d and int(d["p"]) != pt.p) or ("q" in d and int(d["q"]) != pt.q):
        raise InvalidInput("declared p, q disagree with coordinate counts")
    return pt


def chart_point_to_json(ap: AffineChartPoint) -> dict:
    return {"chart": ap.chart,
            "xi": [multivector_to_json(x) for x in ap.xi],
            "theta": [multivector_to_json(t) for t in ap.theta]}


def embedding_to_json(e: PointEmbedding) -> dict:
    return {"n": e.n, "X": [multivector_to_json(x) for x in e.X],
            "Theta": [multivector_to_json(t) for t in e.Theta]}


def embedding_from_json(d) -> PointEmbedding:
    try:
        ctx = _context_of(list(d["X"]) + list(d["Theta"]))
        return PointEmbedding(int(d["n"]), [multivector_from_json(x, ctx) for x in d["X"]],
                              [multivector_from_json(t, ctx) for t in d["Theta"]])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed embedding: {exc}") from exc


def spec_to_json(spec: QuadratureSpec) -> dict:
    return spec.to_dict()


def spec_from_json(d, base: QuadratureSpec | None = None) -> QuadratureSpec:
    base = base or QuadratureSpec()
    d = d or {}
    return QuadratureSpec(int(d.get("radial", base.radial)), int(d.get("angular", base.angular)),
                          float(d.get("tol", base.tol)))


def scaling_from_json(d) -> SectionScaling:
    try:
        return SectionScaling(int(d["m"]), d["even"], d["odd"])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed scaling: {exc}") from exc
