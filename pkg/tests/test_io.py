import json

import numpy as np
import pytest

from circlefol.aposteriori import condition_report
from circlefol.fourier import PeriodicFunction
from circlefol.io import load_periodic, load_solution, save_solution, spectrum_from_list, spectrum_to_list
from circlefol.models import make_model
from circlefol.newton import residual_norm

from helpers import linear_exact, perturb_normal, skew_exact_triple


def test_spectrum_lists(rng):
    spec = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    assert np.array_equal(spectrum_from_list(spectrum_to_list(spec)), spec)
    assert np.array_equal(spectrum_from_list([1.0, 2.0]), np.array([1.0, 2.0], dtype=complex))


def test_roundtrip_is_lossless(tmp_path):
    f = make_model("skew")
    u = perturb_normal(skew_exact_triple(f), 1e-4)
    save_solution(tmp_path / "s.json", f, u, condition_report(f, u))
    doc, v = load_solution(tmp_path / "s.json")
    assert doc["model"] == {"name": "skew", "params": dict(f.params)}
    for a, b in zip(u.W, v.W):
        assert np.array_equal(a.spectra, b.spectra) and a.winding == b.winding
    assert np.array_equal(u.a.periodic_part.spectrum, v.a.periodic_part.spectrum)
    assert np.array_equal(u.lam.spectrum, v.lam.spectrum)
    assert v.delta == u.delta
    assert abs(residual_norm(f, v) - residual_norm(f, u)) < 1e-12


def test_bad_version(tmp_path):
    f = make_model("linear")
    save_solution(tmp_path / "s.json", f, linear_exact())
    doc = json.loads((tmp_path / "s.json").read_text())
    doc["format_version"] = 99
    (tmp_path / "s.json").write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_solution(tmp_path / "s.json")


@pytest.mark.parametrize("wrap", [lambda c: {"coeffs": c}, lambda c: {"periodic_coeffs": c}, lambda c: c])
def test_load_periodic_formats(tmp_path, wrap):
    p = PeriodicFunction.from_cos_sin(8, mean=0.5, cos={1: 0.1}, sin={3: 0.2})
    (tmp_path / "p.json").write_text(json.dumps(wrap(spectrum_to_list(p.spectrum))))
    q = load_periodic(tmp_path / "p.json")
    assert np.array_equal(q.spectrum, p.spectrum)
    assert load_periodic(tmp_path / "p.json", n_modes=16).n_modes == 16
