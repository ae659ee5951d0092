"""JSON persistence of solutions.

Layout::

    {
      "format_version": 1,
      "model": {"name": ..., "params": {...}},
      "discretization": {"ntheta": N, "order": L, "delta": d},
      "W": [{"winding": 1, "coeffs": [[[re, im], ...], ...]}, {"winding": 0, ...}],
      "a": {"periodic_coeffs": [[re, im], ...]},
      "lambda": {"coeffs": [[re, im], ...]},
      "report": {...}
    }

``coeffs[j][k]`` is the ``k``-th Fourier coefficient (``k = 0..N``) of the
``s^j`` coefficient.  Floats are written with ``repr`` precision, so reading
back reproduces the arrays bit for bit.
"""
import json

import numpy as np

from .fourier import CircleMap, PeriodicFunction
from .jets import FourierTaylor, FTPair
from .newton import ConjugacyTriple

FORMAT_VERSION = 1


def spectrum_to_list(spec):
    spec = np.asarray(spec, dtype=complex)
    return [[float(c.real), float(c.imag)] for c in spec]


def spectrum_from_list(items):
    arr = np.asarray(items, dtype=float)
    if arr.ndim == 1:
        return arr.astype(complex)
    return arr[..., 0] + 1j * arr[..., 1]


def triple_to_dict(u):
    return {
        "discretization": {"ntheta": u.n_modes, "order": u.order, "delta": u.delta},
        "W": [
            {"winding": c.winding, "coeffs": [spectrum_to_list(row) for row in c.spectra]}
            for c in u.W
        ],
        "a": {"periodic_coeffs": spectrum_to_list(u.a.periodic_part.spectrum)},
        "lambda": {"coeffs": spectrum_to_list(u.lam.spectrum)},
    }


def triple_from_dict(d):
    comps = []
    for c in d["W"]:
        spectra = np.array([spectrum_from_list(row) for row in c["coeffs"]])
        comps.append(FourierTaylor(spectra, c["winding"]))
    a = CircleMap(PeriodicFunction(spectrum_from_list(d["a"]["periodic_coeffs"])))
    lam = PeriodicFunction(spectrum_from_list(d["lambda"]["coeffs"]))
    return ConjugacyTriple(FTPair(*comps), a, lam, float(d["discretization"]["delta"]))


def save_solution(path, model, u, report=None, history=None):
    doc = {"format_version": FORMAT_VERSION, "model": {"name": model.name, "params": dict(model.params)}}
    doc.update(triple_to_dict(u))
    if report is not None:
        doc["report"] = report.to_dict() if hasattr(report, "to_dict") else report
    if history is not None:
        doc["history"] = [h.as_dict() if hasattr(h, "as_dict") else h for h in history]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, default=_default)
    return doc


def _default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")


def load_solution(path):
    """Returns ``(doc, triple)``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    return doc, triple_from_dict(doc)


def load_periodic(path, n_modes=None):
    """Read a PeriodicFunction from a coefficient file.

    Accepts ``{"coeffs": [[re, im], ...]}``, ``{"periodic_coeffs": ...}`` or a
    bare list of ``[re, im]`` pairs / reals.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("coeffs", doc.get("periodic_coeffs"))
    pf = PeriodicFunction(spectrum_from_list(doc))
    return pf if n_modes is None else pf.resize(n_modes)
