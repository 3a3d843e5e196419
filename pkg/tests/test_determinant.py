import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockband import DeterminantEvaluator, DomainError, preset
from fockband.model import make_problem
from fockband.oracle import assemble_fiber, eig_sym


def test_delta3_in_band_raises(sym8):
    det = DeterminantEvaluator(sym8)
    lo, hi = det.m3[0, 0], det.M3[0, 0]
    with pytest.raises(DomainError):
        det.delta3(0, 0, 0.5 * (lo + hi))


def test_delta3_without_coupling():
    P = make_problem(6, w2=0.5, w3=2.0, v3=0.0)
    det = DeterminantEvaluator(P)
    assert det.delta3(1, 2, -1.0) == pytest.approx(1.5)


def test_delta3_matches_fiber_determinant(sym8):
    # Fredholm determinant identity: det(h3 - z) = delta3 * prod(w3 - z)
    det = DeterminantEvaluator(sym8)
    z = det.m3[2, 3] - 0.7
    h = assemble_fiber("h3", sym8, 2, 3).entries
    lhs = np.linalg.det(h - z * np.eye(h.shape[0]))
    rhs = det.delta3(2, 3, z) * np.prod(sym8.w3[2, 3] - z)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_delta1_trivial_when_v21_zero():
    P = make_problem(6, w1=0.0, w2=1.0, w3=3.0, v1=1.0, v2=1.0, v3=1.0, v21=0.0, v22=1.0)
    det = DeterminantEvaluator(P)
    assert det.delta1(0, -5.0) == 1.0


def test_delta2_reduces_to_w1():
    P = make_problem(6, w1=0.25, w2=1.0, w3=3.0, v3=1.0, v21=1.0)
    det = DeterminantEvaluator(P)
    assert det.delta2(2, -3.0) == pytest.approx(3.25)


def test_delta1_in_fiber_set_raises(sym8):
    det = DeterminantEvaluator(sym8)
    band = det.channel.ess_fiber12(0).intervals[0]
    with pytest.raises(DomainError):
        det.delta1(0, 0.5 * sum(band))


def test_delta2_is_fiber_determinant(sym8):
    # roots of delta2 are eigenvalues of h2(p) below its essential part
    det = DeterminantEvaluator(sym8)
    ch = det.channel
    for p in (0, 3):
        ev = eig_sym(assemble_fiber("h2", sym8, p))
        _, roots2 = ch.disc12(p)
        for r in roots2:
            assert np.min(np.abs(ev - r)) <= 1e-8


@given(st.integers(0, 7), st.floats(-30, 30), st.floats(-30, 30))
def test_coeff_inverse(p, z1, z2):
    P = preset("symmetric", n=8)
    det = _cached(P)
    ess = det.channel.essential_spectrum()[0]
    for z in (z1, z2):
        if ess.distance(z) < 1e-3:
            continue
        prod = det.coeff_matrix(p, z) @ det.coeff_inverse(p, z)
        assert np.max(np.abs(prod - np.eye(4))) <= 1e-12


_CACHE = {}


def _cached(P):
    if "det" not in _CACHE:
        _CACHE["det"] = DeterminantEvaluator(P)
    return _CACHE["det"]


def test_coeff_matrix_pattern(sym8):
    det = DeterminantEvaluator(sym8)
    a = det.coeff_matrix(1, -10.0).a
    mask = np.array([[1, 0, 0, 0], [0, 1, 0, 1], [0, 0, 1, 0], [0, 1, 0, 1]], dtype=bool)
    assert np.all(a[~mask] == 0)
    assert a[1, 3] == a[3, 1]


def test_delta3_closed_form():
    from fockband.verify import closed_form_problem

    det = DeterminantEvaluator(closed_form_problem(64))
    assert det.delta3(0, 0, -1.0) == pytest.approx(1 - 2 * np.pi / np.sqrt(3), abs=1e-8)


def test_delta3_decoupled_value():
    from fockband.model import FunctionSpec

    w2 = FunctionSpec("dispersion-sum", {"terms": [{"coeff": 1, "combo": [1, 0]}, {"coeff": 1, "combo": [0, 1]}]})
    P = make_problem(8, w2=w2, w3=5.0, v3=0.0)
    j = P.grid.index_of([0.0])
    assert det_value(P, j) == pytest.approx(1.0)


def det_value(P, j):
    return DeterminantEvaluator(P).delta3(j, j, -1.0)


def test_delta1_root_is_fiber_eigenvalue(sym8):
    det = DeterminantEvaluator(sym8)
    roots1, _ = det.channel.disc12(0)
    below = [r for r in roots1 if r < det.channel.ess_fiber12(0).min]
    assert len(below) == 1
    ev = eig_sym(assemble_fiber("h1", sym8, 0))
    assert np.min(np.abs(ev - below[0])) <= 1e-8
    zs = np.array([-60.0, -40.0, -20.0])
    d1 = det.delta1_many(0, zs)
    assert np.all(d1 < 1) and np.all(np.diff(d1) < 0)


def test_determinant_identities(sym8, rng):
    det = DeterminantEvaluator(sym8)
    ess = det.channel.essential_spectrum()[0]
    n = 0
    while n < 50:
        p, z = int(rng.integers(0, 8)), float(rng.uniform(-30, 30))
        if ess.distance(z) < 1e-3:
            continue
        n += 1
        a11, a13, a22, a33 = det._entries_at(p, z)
        assert det.delta2(p, z) == pytest.approx(a11 * a33 - a13 * a13, abs=1e-13 * max(1, abs(a11 * a33)))
        assert a22 == pytest.approx(det.delta1(p, z), abs=1e-13)
        cm = det.coeff_matrix(p, z)
        assert cm.det == pytest.approx(a22 * (a11 * a33 - a13**2), rel=1e-12, abs=1e-12)
        assert det.coeff_inverse(p, z).a[2, 2] * det.delta1(p, z) == pytest.approx(1.0, abs=1e-12)


def test_decoupled_coeff_matrix():
    P = preset("decoupled", n=6)
    det = DeterminantEvaluator(P)
    z = -3.0
    np.testing.assert_allclose(det.coeff_matrix(2, z).a, np.diag([1, P.w1[2] - z, 1, 1]))
    np.testing.assert_allclose(det.coeff_inverse(2, z).a, np.diag([1, 1 / (P.w1[2] - z), 1, 1]))
