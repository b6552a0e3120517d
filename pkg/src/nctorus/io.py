"""JSON and CSV (de)serialization for elements, forms, connections, spinors and reports."""

from __future__ import annotations

import csv
import io
import json
from typing import Any

import numpy as np

from .bundle import BundleModel, ConnectionSpec, ModelTag
from .core import DeformationMatrix, TorusElement
from .dirac import Spinor
from .forms import TorusForm


def _num(x: float) -> float:
    x = float(x)
    return 0.0 if x == 0.0 else x


def xi_from_json(n: int, xi: Any) -> DeformationMatrix:
    if xi is None:
        return DeformationMatrix.zeros(n)
    arr = np.asarray(xi, dtype=float)
    if arr.shape != (n, n):
        raise ValueError(f"xi must be a {n}x{n} matrix, got shape {arr.shape}")
    return DeformationMatrix.from_array(arr)


def xi_to_json(xi: DeformationMatrix) -> list[list[float]]:
    return [[_num(v) for v in row] for row in xi.entries]


def terms_to_json(x: TorusElement) -> list[dict]:
    return [{"m": list(m), "re": _num(c.real), "im": _num(c.imag)} for m, c in sorted(x.terms.items())]


def terms_from_json(xi: DeformationMatrix, terms: list) -> TorusElement:
    out = {}
    for t in terms:
        m = tuple(int(v) for v in t["m"])
        if len(m) != xi.n:
            raise ValueError(f"exponent {list(m)} has wrong length for n={xi.n}")
        out[m] = out.get(m, 0j) + complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
    return TorusElement(xi, out)


def element_to_json(x: TorusElement) -> dict:
    return {"n": x.n, "xi": xi_to_json(x.xi), "terms": terms_to_json(x)}


def element_from_json(data: dict) -> TorusElement:
    n = int(data["n"])
    return terms_from_json(xi_from_json(n, data.get("xi")), data.get("terms", []))


def form_to_json(f: TorusForm) -> dict:
    comps = [
        {"axes": list(axes), "element": terms_to_json(x)}
        for axes, x in sorted(f.components.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]
    return {"n": f.n, "xi": xi_to_json(f.xi), "components": comps}


def form_from_json(data: dict, xi: DeformationMatrix | None = None) -> TorusForm:
    n = int(data["n"])
    own = xi_from_json(n, data["xi"]) if data.get("xi") is not None else None
    if xi is None:
        xi = own or DeformationMatrix.zeros(n)
    elif own is not None and own != xi:
        raise ValueError("form deformation matrix differs from the configured one")
    if xi.n != n:
        raise ValueError(f"form dimension {n} differs from configured n={xi.n}")
    comps = {}
    for c in data.get("components", []):
        elem = c["element"]
        terms = elem["terms"] if isinstance(elem, dict) else elem
        axes = tuple(int(a) for a in c["axes"])
        comps[axes] = terms_from_json(xi, terms)
    return TorusForm(xi, comps)


def connection_to_json(omega: ConnectionSpec) -> dict:
    model = omega.model
    out = {
        "model": model.tag.value,
        "n": model.n,
        "xi": xi_to_json(model.xi),
        "mu": form_to_json(omega.mu),
    }
    if model.fiber_row is not None:
        out["xi_fiber_row"] = [_num(v) for v in model.fiber_row]
    return out


def connection_from_json(data: dict) -> ConnectionSpec:
    n = int(data["n"])
    xi = xi_from_json(n, data.get("xi"))
    model = BundleModel.create(ModelTag.parse(data["model"]), xi, fiber_row=data.get("xi_fiber_row"))
    mu = form_from_json(data["mu"], xi) if data.get("mu") else TorusForm.zero(xi)
    return ConnectionSpec(model, mu)


def spinor_to_json(psi: Spinor) -> dict:
    return {
        "n": psi.n,
        "spin_dim": psi.spin_dim,
        "terms": [
            {"m": list(m), "vec": [[_num(z.real), _num(z.imag)] for z in v]}
            for m, v in sorted(psi.terms.items())
        ],
    }


def spinor_from_json(data: dict, xi: DeformationMatrix) -> Spinor:
    n = int(data["n"])
    if n != xi.n:
        raise ValueError(f"spinor dimension {n} differs from configured n={xi.n}")
    dim = int(data["spin_dim"])
    terms = {}
    for t in data.get("terms", []):
        vec = np.array([complex(float(re), float(im)) for re, im in t["vec"]])
        terms[tuple(int(v) for v in t["m"])] = vec
    return Spinor(xi, dim, terms)


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def spectrum_to_csv(rows: list[tuple[float, float, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["re", "im", "multiplicity"])
    for re, im, mult in rows:
        writer.writerow([repr(_num(re)), repr(_num(im)), mult])
    return buf.getvalue()
