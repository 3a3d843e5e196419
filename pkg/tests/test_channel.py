import numpy as np
import pytest

from fockband import ChannelAnalysis, preset
from fockband.model import FunctionSpec, make_problem
from fockband.oracle import assemble_channel, assemble_fiber, eig_sym
from fockband.verify import closed_form_problem, closed_form_root


def test_remark_degenerate_band():
    P = preset("remark", n=8)
    ch = ChannelAnalysis(P)
    i = P.grid.index_of([np.pi])
    assert ch.band3(i, i) == pytest.approx((4.0, 4.0), abs=1e-12)
    j = P.grid.index_of([0.0])
    assert ch.band3(j, j) == pytest.approx((0.0, 4.0), abs=1e-12)
    assert ch.ess_fiber12(i).distance(4.0) <= 1e-12
    assert (i, i, pytest.approx(4.0)) in ch.degenerate_fibers()


def test_constant_w3_band():
    ch = ChannelAnalysis(make_problem(6, w3=2.5))
    assert ch.band3(0, 1) == (2.5, 2.5)


def test_disc3_without_coupling():
    P = make_problem(6, w2=FunctionSpec("trigpoly", {"const": -1.0, "cos": [[0.5]]}), w3=1.0, v3=0.0)
    ch = ChannelAnalysis(P)
    for p in range(P.N):
        assert ch.disc3(p, 0) == pytest.approx([P.w2[p, 0]], abs=1e-10)


def test_closed_form_root():
    ch = ChannelAnalysis(closed_form_problem(64))
    roots = ch.disc3(3, 5)
    assert min(roots) == pytest.approx(closed_form_root(), abs=1e-6)
    assert min(roots) == pytest.approx(-2.1235, abs=1e-4)


def test_disc3_outside_band_one_per_side(ch8):
    left, right = ch8.disc3_table
    assert np.all(np.isnan(left) | (left < ch8.det.m3))
    assert np.all(np.isnan(right) | (right > ch8.det.M3))


def test_disc3_are_fiber_eigenvalues(sym8, ch8, rng):
    for _ in range(5):
        p, q = rng.integers(0, sym8.N, size=2)
        ev = eig_sym(assemble_fiber("h3", sym8, p, q))
        for r in ch8.disc3(p, q):
            assert np.min(np.abs(ev - r)) <= 1e-8


def test_disc12_without_delta1_roots():
    P = make_problem(6, w1=FunctionSpec("trigpoly", {"cos": [[-1.0]]}), w2=1.0, w3=3.0, v1=1.0, v2=1.0, v3=1.0, v21=0.0, v22=1.0)
    ch = ChannelAnalysis(P)
    assert ch.disc12(0)[0] == ()


def test_disc12_delta2_reduces_to_w1():
    w1 = FunctionSpec("trigpoly", {"const": -2.0, "cos": [[0.5]]})
    P = make_problem(6, w1=w1, w2=1.0, w3=3.0, v3=1.0, v21=1.0)
    ch = ChannelAnalysis(P)
    for p in range(P.N):
        assert ch.disc12(p)[1] == pytest.approx((P.w1[p],), abs=1e-10)


def test_decoupled_channels():
    P = preset("decoupled", n=6)
    ch = ChannelAnalysis(P)
    h3 = ch.channel_spectrum(3)
    assert h3.min == pytest.approx(min(P.w2.min(), P.w3.min()))
    assert h3.max == pytest.approx(max(P.w2.max(), P.w3.max()))
    assert ch.hwz_min() == pytest.approx(min(P.w1.min(), P.w2.min(), P.w3.min()))


@pytest.mark.parametrize("name", ["decoupled", "remark", "symmetric"])
def test_inclusion_and_hwz_identity(name):
    ch = ChannelAnalysis(preset(name, n=6))
    union = ch.channel_spectrum(1) | ch.channel_spectrum(2)
    h3 = ch.channel_spectrum(3)
    for lo, hi in h3.intervals:
        assert union.distance(lo) <= 1e-9 and union.distance(hi) <= 1e-9
    ess, _ = ch.essential_spectrum()
    assert ch.hwz_min() == ess.min


@pytest.mark.parametrize("which", [1, 2, 3])
def test_channel_oracle_within_prediction(sym6, which):
    ch = ChannelAnalysis(sym6)
    ev = eig_sym(assemble_channel(which, sym6))
    assert np.max(ch.channel_spectrum(which).distance(ev)) <= 1e-10


def test_branch_json(ch8):
    doc = ch8.branches.to_json()
    assert set(doc) == {"four", "three", "two1", "two2"}
