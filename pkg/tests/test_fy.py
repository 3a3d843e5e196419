import numpy as np
import pytest

from fockband import DomainError, preset
from fockband.fy import A_BLOCKS, K_BLOCKS, FYSolver
from fockband.oracle import assemble_full, classify_spectrum, eig_sym


@pytest.fixture(scope="module")
def decoupled():
    return FYSolver(preset("decoupled", n=6))


def test_decoupled_reduced_system(decoupled):
    P = decoupled.problem
    z = P.w0
    rs = decoupled.reduced_system(z)
    assert rs.K[0, 0] == pytest.approx(P.w0 - z + 1)
    assert np.count_nonzero(rs.K) == 1
    assert decoupled.eig_distance(z) == pytest.approx(0.0, abs=1e-14)
    f0, f1, f2, f3 = decoupled.reconstruct(np.eye(rs.dim)[0], z)
    assert f0.tolist() == [1.0]
    assert not (f1.any() or f2.any() or f3.any())


def test_decoupled_find(decoupled):
    found = decoupled.find_eigenvalues()
    assert [b.z for b in found] == pytest.approx([decoupled.problem.w0], abs=1e-10)


def test_excluded_z_raises(fy8):
    with pytest.raises(DomainError):
        fy8.reduced_system(0.0)
    with pytest.raises(ValueError):
        fy8.reduced_system(-20.0, mode="other")


def test_literal_derived_agree(fy8, rng):
    for z in (-20.0, -9.0, -3.0, 10.0):
        lit, der = fy8.reduced_system(z, "literal"), fy8.reduced_system(z, "derived")
        assert np.max(np.abs(lit.A - der.A)) <= 1e-12
        assert np.max(np.abs(lit.K - der.K)) <= 1e-12


def test_zero_pattern(fy8):
    rs = fy8.reduced_system(-9.0, "literal")
    for name, allowed in (("A", A_BLOCKS), ("K", K_BLOCKS)):
        for i in range(4):
            for j in range(4):
                if (i, j) not in allowed:
                    assert not np.any(rs.block(name, i, j)), (name, i, j)


def test_literal_inverse(fy8):
    rs = fy8.reduced_system(-9.0, "literal")
    assert np.max(np.abs(rs.A @ rs.Ainv - np.eye(rs.dim))) <= 1e-12


def test_kernel_entries_bounded(fy8):
    ess = fy8.excluded
    zs = [z for z in np.linspace(-30, 30, 61) if ess.distance(z) > 0.5]
    assert all(np.all(np.isfinite(fy8.reduced_system(z).K)) for z in zs)


def test_find_matches_oracle(sym8, fy8):
    eigs = eig_sym(assemble_full(sym8))
    iso, _, rep = classify_spectrum(eigs, fy8.excluded)
    found = fy8.find_eigenvalues(fy8.search_intervals(rep["tol"]))
    assert np.allclose(sorted(b.z for b in found), iso, atol=1e-8)
    for b in found:
        assert b.residual <= 1e-8
        assert fy8.eig_distance(b.z) <= 1e-8


def test_reconstruct_roundtrip(fy8):
    b = fy8.find_eigenvalues()[0]
    c1, c2 = fy8.recompute_c(b.full[2])
    N = fy8.N
    np.testing.assert_allclose(c1, b.psi[1 + N : 1 + 2 * N], atol=1e-10)
    np.testing.assert_allclose(c2, b.psi[1 + 2 * N :], atol=1e-10)


def test_gap_without_eigenvalue(fy8):
    ivs = fy8.search_intervals()
    a, b = ivs[1]
    assert fy8.eig_distance(0.5 * (a + b)) > 1e-4


def test_literal_derived_agree_without_symmetry():
    fy = FYSolver(preset("remark", n=6))
    for z in (-15.0, -9.0, 12.0):
        lit, der = fy.reduced_system(z, "literal"), fy.reduced_system(z, "derived")
        assert np.max(np.abs(lit.A - der.A)) <= 1e-12
        assert np.max(np.abs(lit.K - der.K)) <= 1e-12


def test_a22_differs_from_delta1_without_symmetry():
    # a22 integrates delta3 over its first slot, delta1 over its second
    fy = FYSolver(preset("remark", n=6))
    a22 = fy.det.entries(-9.0)["a22"]
    d1 = np.array([fy.det.delta1_many(p, np.array([-9.0]))[0] for p in range(6)])
    assert np.max(np.abs(a22 - d1)) > 1e-4
    fy_sym = FYSolver(preset("symmetric", n=6))
    a22 = fy_sym.det.entries(-9.0)["a22"]
    d1 = np.array([fy_sym.det.delta1_many(p, np.array([-9.0]))[0] for p in range(6)])
    np.testing.assert_allclose(a22, d1, atol=1e-14)
