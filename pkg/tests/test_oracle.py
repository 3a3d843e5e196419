import numpy as np
import pytest

from fockband import preset
from fockband.bandset import BandSet
from fockband.oracle import (
    SectorLayout,
    SizeError,
    assemble_channel,
    assemble_fiber,
    assemble_full,
    classify_spectrum,
    eig_sym,
)


def test_layout():
    lay = SectorLayout((0, 1, 2, 3), (1, 4, 16, 64))
    assert lay.offsets == (0, 1, 5, 21)
    assert lay.dim == 85
    assert lay.multi_index(3, 21 + 1 * 4 + 2, 4) == (0, 1, 2)


def test_full_symmetric_and_pattern(sym6):
    H = assemble_full(sym6)
    assert H.dim == 1 + 6 + 36 + 216
    assert np.array_equal(H.entries, H.entries.T)
    for i, j in ((0, 2), (0, 3), (1, 3)):
        assert not np.any(H.block(i, j))


def test_decoupled_is_diagonal():
    P = preset("decoupled", n=6)
    H = assemble_full(P).entries
    assert np.count_nonzero(H - np.diag(np.diag(H))) == 0
    assert H[0, 0] == P.w0


def test_size_cap():
    with pytest.raises(SizeError):
        assemble_full(preset("symmetric", n=28))


def test_direct_integral(sym6):
    ev = eig_sym(assemble_channel(3, sym6))
    fib = np.sort(
        np.concatenate([eig_sym(assemble_fiber("h3", sym6, p, q)) for p in range(6) for q in range(6)])
    )
    np.testing.assert_allclose(ev, fib, atol=1e-12)


def test_channel_one_direct_integral_over_second_argument(sym6):
    # for symmetric w2, w3 the channel H1 is the direct sum of the h1 fibers
    ev = eig_sym(assemble_channel(1, sym6))
    fib = np.sort(np.concatenate([eig_sym(assemble_fiber("h1", sym6, p)) for p in range(6)]))
    np.testing.assert_allclose(ev, fib, atol=1e-12)


def test_channel_two_direct_integral(sym6):
    ev = eig_sym(assemble_channel(2, sym6))
    fib = np.sort(np.concatenate([eig_sym(assemble_fiber("h2", sym6, p)) for p in range(6)]))
    np.testing.assert_allclose(ev, fib, atol=1e-12)


def test_eig_sym_vectors(sym6):
    H = assemble_fiber("h2", sym6, 1)
    w, V = eig_sym(H, vectors=True)
    np.testing.assert_allclose(H.entries @ V, V * w, atol=1e-12)


def test_classify():
    pred = BandSet.interval(0.0, 1.0)
    iso, cl, rep = classify_spectrum([-3.0, 0.0, 0.5, 1.0, 1.001], pred, tol=0.01)
    assert iso.tolist() == [-3.0]
    assert rep["n_clustered"] == 4
    assert rep["hausdorff"] == pytest.approx(0.25)


def test_fiber_kind_errors(sym6):
    with pytest.raises(ValueError):
        assemble_fiber("h4", sym6, 0)
    with pytest.raises(ValueError):
        assemble_fiber("h3", sym6, 0)
