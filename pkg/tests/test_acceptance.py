"""End-to-end acceptance checks at their stated tolerances."""
import filecmp
import json
import math
import warnings

import numpy as np
import pytest

from wignerflow.cli import main
from wignerflow.current import current_integral, current_moyal
from wignerflow.errors import EdgeDecayWarning
from wignerflow.flow import divergence_sup, divergence_w, liouville_residual
from wignerflow.grid import make_grid
from wignerflow.model import (
    Morse,
    PiecewiseLinear,
    Polynomial,
    QuantumState,
    density_matrix,
    fd_basis,
    fd_eigensolve,
    morse_bound_count,
)
from wignerflow.verify import (
    check_continuity,
    check_ehrenfest,
    check_projections,
    continuity_scaling,
    harmonic_grid,
    standard_set,
)
from wignerflow.wigner import overlap, project_momentum, project_position, wigner, wigner_from_rho

from conftest import fields

MORSE = Morse(3.0, 1 / math.sqrt(6))
QUARTIC = Polynomial((0.0, 0.0, 0.0, 0.0, 1.0))
R = 1 / math.sqrt(2)
N_AMP = 40


@pytest.fixture(scope="module")
def cases():
    return standard_set()


@pytest.fixture(scope="module")
def quartic_super():
    return QuantumState.superposition(fd_basis(harmonic_grid(), QUARTIC, 2), {0: R, 1: R})


def number_amplitudes(label):
    """Exact amplitudes on the eigenbasis of each family, padded to ``N_AMP``."""
    c = np.zeros(N_AMP, complex)
    if label.startswith("coherent"):
        n = np.arange(N_AMP)
        log_fact = np.array([math.lgamma(k + 1) for k in n])
        c[:] = np.exp(-0.5 - 0.5 * log_fact)
    elif "(0+1)" in label:
        c[:2] = R
    else:
        c[int(label.split("n=")[1])] = 1.0
    return c


@pytest.mark.criterion(1, "Wigner identities and overlap matrix")
def test_c1_wigner_identities(cases):
    Ws = []
    for state, _ in cases:
        label = state.label or "coherent"
        for t in (0.0, 0.9):
            W = wigner(state, t)
            inv = W.invariants()
            assert inv["realness"] <= 1e-10, label
            assert inv["normalization"] <= 1e-6, label
            assert W.max_abs() <= 1 / (math.pi * W.grid.hbar) + 1e-8, label
            assert project_position(W, state).max_deviation <= 1e-6, label
            assert project_momentum(W, state).max_deviation <= 1e-6, label
        Ws.append((label, wigner(state, 0.0)))
    for family in ("harmonic", "morse"):
        members = [(lab, W) for lab, W in Ws if lab.startswith(family) or (family == "harmonic" and
                                                                           lab.startswith("coherent"))]
        assert len(members) >= 3
        for la, Wa in members:
            for lb, Wb in members:
                exact = abs(np.vdot(number_amplitudes(la), number_amplitudes(lb))) ** 2
                assert abs(overlap(Wa, Wb) - exact) <= 1e-5, (la, lb)


@pytest.mark.criterion(2, "position and momentum routes agree")
def test_c2_route_equivalence(cases):
    for state, _ in cases:
        for t in (0.0, 0.9):
            a = wigner(state, t, route="position")
            b = wigner(state, t, route="momentum")
            assert np.max(np.abs(a.values - b.values)) <= 1e-6, state.label


@pytest.mark.criterion(3, "integral and Moyal currents agree for the quartic well")
def test_c3_quartic_cross_method(cases):
    state = cases[0][0]
    rho = density_matrix(state, 0.0)
    W = wigner_from_rho(rho)
    Ji = current_integral(rho, QUARTIC, W)
    Jm = current_moyal(W, QUARTIC)
    scale = Ji.jp.max_abs()
    assert np.max(np.abs(Ji.jp.values - Jm.jp.values)) <= 1e-6 * scale
    g = W.grid
    i, j = int(np.argmin(np.abs(g.x - 1.0))), g.n_y // 2
    exact = -6 * math.exp(-1) / math.pi
    assert Ji.jp.values[i, j] == pytest.approx(exact, abs=1e-10)
    assert Ji.jp.values[i, j] == pytest.approx(-0.70258, abs=1e-4)


@pytest.mark.criterion(4, "divergence of w vanishes only for the harmonic well")
def test_c4_central_result(cases, quartic_super):
    for state, V in cases[:5]:
        for t in (0.0, 0.7, 1.9):
            _, W, J = fields(state, V, t)
            assert divergence_w(J, W).sup_unmasked() <= 1e-6, (state.label, t)
            L = liouville_residual(J, W, V)
            assert np.max(np.abs(L.dV_prime)) <= 1e-8
    eps = (1e-2, 1e-3, 1e-4)
    morse1 = next(s for s, _ in cases if s.label == "morse n=1")
    for state, V, t in ((morse1, MORSE, 0.0), (quartic_super, QUARTIC, 0.5)):
        _, W, J = fields(state, V, t)
        sups = divergence_sup(J, W, eps)
        assert sups[1] >= 1e2, sups
        assert sups[0] < sups[1] < sups[2], sups
    anharmonic = [(morse1, MORSE, 0.0), (cases[7][0], MORSE, 0.4), (quartic_super, QUARTIC, 0.5)]
    Vk = PiecewiseLinear((0.0,), (-1.0, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EdgeDecayWarning)
        kink = QuantumState.pure(fd_basis(make_grid(-10, 10, 256, 512), Vk, 1), 0)
        anharmonic.append((kink, Vk, 0.0))
        for state, V, t in anharmonic:
            _, W, J = fields(state, V, t)
            assert liouville_residual(J, W, V).post_fit_relative > 1e-3


@pytest.fixture(scope="module")
def figure1_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("figure1")
    assert main(["figure1", "--out", str(out), "--no-meta"]) == 0
    return out


@pytest.mark.criterion(5, "figure1 qualitative features")
def test_c5_figure1(figure1_dir):
    m = json.loads((figure1_dir / "summary.json").read_text())["figure1"]
    # (a) one negative patch, centred on the momentum axis and holding the minimum
    assert m["negative_patches"] == 1
    assert m["negative_patch"]["contains_min"]
    assert abs(m["negative_patch"]["p_mean"]) < 1e-9
    # (b) both signs of the index
    assert {-1, 1} <= set(m["stagnation_indices"])
    # (c) interior singular cells on the zero contour
    assert m["interior_mask_components"] >= 1
    assert m["interior_mask_on_zero_contour"]
    # (d) a fieldline through the negative region
    assert len(m["crossing_fieldlines"]) >= 1


@pytest.mark.criterion(6, "continuity, Ehrenfest and force projection")
def test_c6_conservation(cases, quartic_super):
    h_super, m_super = cases[4][0], cases[7][0]
    V_h = cases[4][1]
    assert check_continuity(h_super, V_h, 0.3, dt=1e-4).residual <= 1e-6
    assert check_continuity(m_super, MORSE, 0.3, dt=1e-4).residual <= 1e-5
    for state, V in ((h_super, V_h), (m_super, MORSE)):
        (_, r1), (_, r2) = continuity_scaling(state, V, 0.3, (1e-3, 1e-4))
        assert math.log10(r1 / r2) == pytest.approx(2.0, abs=0.1)
    for state, V in cases:
        reps = check_ehrenfest(state, V, 0.5, dt=1e-4, tol=1e-5)
        assert len(reps) == 6 and all(r.passed for r in reps), state.label
    for state, V, t in ((h_super, V_h, 0.6), (m_super, MORSE, 0.5), (quartic_super, QUARTIC, 0.5)):
        force = {r.name: r for r in check_projections(state, V, t)}["projection_jp_dp"]
        assert force.residual <= 1e-6, state.label


@pytest.mark.criterion(7, "finite-difference Morse spectrum")
def test_c7_eigensolver_oracle():
    errs = []
    for n_x in (512, 1024, 2048):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EdgeDecayWarning)
            pairs = fd_eigensolve(MORSE, make_grid(-5.0, 80.0, n_x, 16), 8)
        errs.append(abs(pairs[1].energy - 1.3125))
        bound = sum(p.energy < MORSE.depth for p in pairs)
    assert errs[-1] <= 1e-3
    assert bound == 6 == morse_bound_count(MORSE, 1.0)
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 2.0) <= 0.1), rates


COMMAND_RUNS = [
    ["wigner", "--state", "0,1", "--time", "0.4"],
    ["current", "--potential", "poly:0,0,0,0,1", "--method", "moyal"],
    ["divergence", "--potential", "morse:3,0.408248290463863", "--state", "1"],
    ["stagnation", "--state", "1"],
    ["fieldlines", "--state", "0,1", "--seeds", "1:0;0:1"],
    ["verify", "--state", "0,1"],
    ["figure1"],
]


@pytest.mark.criterion(8, "repeated CLI runs are byte-identical")
@pytest.mark.parametrize("args", COMMAND_RUNS, ids=[a[0] for a in COMMAND_RUNS])
def test_c8_determinism(tmp_path, args):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main([*args, "--out", str(out), "--no-meta"]) == 0
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files and files == sorted(p.name for p in outs[1].iterdir())
    match, mismatch, errors = filecmp.cmpfiles(outs[0], outs[1], files, shallow=False)
    assert not mismatch and not errors
