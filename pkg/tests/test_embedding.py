import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlab.deformations import modulate
from dlab.embedding import (EmbeddingConfig, build_approx_solution,
                            embedding_constants, embedding_experiment,
                            fourier_sin_coeff, residual_field, sharp_cutoff)
from dlab.evolutions import SolveConfig, airy_propagate, nls_solve
from dlab.grid import FOURIER, PHYSICAL, Grid, GridFunction, SpaceTimeField


def gaussian(grid: Grid) -> GridFunction:
    x = grid.nodes()
    return GridFunction(grid, np.exp(-x ** 2).astype(complex))


# ---------------------------------------------------------------------------
# coupling constants
# ---------------------------------------------------------------------------

def test_constants_alpha_one():
    c0, c1 = embedding_constants(1.0)
    assert c0 == pytest.approx(0.25, abs=1e-12)
    assert c1 == pytest.approx(0.25, abs=1e-12)


def test_constants_alpha_three_halves():
    # Gamma(3) = 2, Gamma(7/2) = 15 sqrt(pi) / 8
    c0, c1 = embedding_constants(1.5)
    assert c0 == pytest.approx(32.0 / (45.0 * math.pi), rel=1e-10)
    assert c1 == pytest.approx(8.0 / (15.0 * math.pi), rel=1e-10)


def test_sin_coeff_alpha_one_spectrum():
    # |cos t|^2 sin t = (sin t + sin 3t) / 4
    got = [fourier_sin_coeff(1.0, k) for k in range(1, 7)]
    expected = [0.25, 0.0, 0.25, 0.0, 0.0, 0.0]
    assert np.max(np.abs(np.array(got) - expected)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.8, max_value=2.2, allow_nan=False),
       st.integers(min_value=1, max_value=5))
def test_sin_coeff_even_harmonics_vanish(alpha, half_k):
    # the integrand is pi-antiperiodic, so even harmonics drop out
    assert abs(fourier_sin_coeff(alpha, 2 * half_k)) < 1e-12


def test_constants_validation():
    with pytest.raises(ValueError):
        embedding_constants(0.0)
    with pytest.raises(ValueError):
        fourier_sin_coeff(1.5, 0)


# ---------------------------------------------------------------------------
# cutoff and the approximate solution
# ---------------------------------------------------------------------------

def test_sharp_cutoff():
    g = Grid(256, 2 * np.pi * 8, -np.pi * 8)
    f = gaussian(g)
    fh = f.to_fourier()
    cut = sharp_cutoff(fh, 2.0)
    xi = g.frequencies()
    assert np.all(cut.values[np.abs(xi) > 2.0] == 0)
    inside = np.abs(xi) <= 2.0
    assert np.array_equal(cut.values[inside], fh.values[inside])
    again = sharp_cutoff(cut, 2.0)
    assert np.array_equal(again.values, cut.values)
    assert sharp_cutoff(f, 2.0).side == PHYSICAL
    assert cut.side == FOURIER


def schrodinger_run(grid, v0, T, dt=2e-3):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg_f = SolveConfig(alpha=1.9, coupling=0.0, t_end=T, dt=dt, store_every=5)
        cfg_b = SolveConfig(alpha=1.9, coupling=0.0, t_end=-T, dt=dt, store_every=5)
        fwd = nls_solve(v0, cfg_f)
        bwd = nls_solve(v0, cfg_b)
    times = np.concatenate([bwd.times[:-1], fwd.times])
    return SpaceTimeField(grid, times, bwd.frames[:-1] + fwd.frames)


def test_build_approx_solution_at_time_zero():
    g = Grid(512, 8 * np.pi, -4 * np.pi)
    v0 = gaussian(g)
    v = schrodinger_run(g, v0, T=0.5)
    xi_n = 8.0
    u0 = build_approx_solution(v, xi_n, 0.5, 0.0)
    expected = modulate(v0, xi_n).to_physical().values.real
    assert np.max(np.abs(u0.values - expected)) < 1e-10
    assert np.max(np.abs(u0.values.imag)) == 0.0


def test_build_approx_solution_seam_continuity():
    g = Grid(512, 8 * np.pi, -4 * np.pi)
    v = schrodinger_run(g, gaussian(g), T=0.5)
    xi_n = 8.0
    seam = 0.5 / (3.0 * xi_n)
    eps = 1e-7
    inner = build_approx_solution(v, xi_n, 0.5, seam - eps)
    outer = build_approx_solution(v, xi_n, 0.5, seam + eps)
    assert (inner - outer).l2_norm() < 1e-3


def test_build_approx_solution_beyond_seam_is_free():
    g = Grid(512, 8 * np.pi, -4 * np.pi)
    v = schrodinger_run(g, gaussian(g), T=0.5)
    xi_n = 8.0
    seam = 0.5 / (3.0 * xi_n)
    at_seam = build_approx_solution(v, xi_n, 0.5, seam)
    later = build_approx_solution(v, xi_n, 0.5, seam + 0.2)
    assert (later - airy_propagate(at_seam, 0.2)).l2_norm() < 1e-10


def test_build_approx_solution_validation():
    g = Grid(512, 8 * np.pi, -4 * np.pi)
    v = schrodinger_run(g, gaussian(g), T=0.5)
    with pytest.raises(ValueError, match="lattice"):
        build_approx_solution(v, 8.1, 0.5, 0.0)
    with pytest.raises(ValueError):
        build_approx_solution(v, 8.0, -1.0, 0.0)


# ---------------------------------------------------------------------------
# residual
# ---------------------------------------------------------------------------

def test_residual_vanishes_on_free_solutions():
    g = Grid(256, 16 * np.pi, -8 * np.pi)
    xi = g.frequencies()
    u0 = GridFunction(g, np.exp(-xi ** 2 / 2.0) * (np.abs(xi) <= 2.0), FOURIER)
    u0 = GridFunction(g, u0.to_physical().values.real, PHYSICAL)
    times = np.linspace(-0.2, 0.2, 201)
    frames = [airy_propagate(u0, float(t)) for t in times]
    field = SpaceTimeField(g, times, frames)
    res = residual_field(field, alpha=1.9, mu=-1, coupling=0.0)
    sup_res = max(float(np.max(np.abs(fr.values))) for fr in res.frames)
    uxxx_scale = float(np.max(np.abs(
        GridFunction(g, (1j * xi) ** 3 * u0.to_fourier().values,
                     FOURIER).to_physical().values)))
    assert sup_res / uxxx_scale < 1e-3
    assert len(res) == len(field) - 2


def test_residual_needs_three_frames():
    g = Grid(64, 8.0, -4.0)
    f = gaussian(g)
    field = SpaceTimeField(g, np.array([0.0, 1.0]), [f, f])
    with pytest.raises(ValueError, match="at least 3 frames"):
        residual_field(field, 1.9, -1)


# ---------------------------------------------------------------------------
# experiment configuration and a miniature sweep
# ---------------------------------------------------------------------------

def test_embedding_config_validation():
    g = Grid(256, 8 * np.pi, -4 * np.pi)
    phi = gaussian(g)
    with pytest.raises(ValueError, match="ascending"):
        EmbeddingConfig(alpha=1.9, phi=phi, xi_list=(16.0, 8.0))
    with pytest.raises(ValueError, match="positive"):
        EmbeddingConfig(alpha=1.9, phi=phi, xi_list=(4.0,), T=0.0)
    with pytest.raises(ValueError, match="t_n"):
        EmbeddingConfig(alpha=1.9, phi=phi, xi_list=(4.0,), t_n=0.5)
    with pytest.raises(ValueError, match="lattice"):
        EmbeddingConfig(alpha=1.9, phi=phi, xi_list=(4.3,))


def test_embedding_experiment_small_sweep():
    g = Grid(256, 8 * np.pi, -4 * np.pi)
    cfg = EmbeddingConfig(alpha=1.9, phi=gaussian(g), xi_list=(4.0,),
                          T=0.25, nls_dt=5e-3)
    rows = embedding_experiment(cfg)
    assert len(rows) == 1
    row = rows[0]
    assert set(row) == {"xi", "seam_time", "err_lhat_alpha", "norm_S",
                        "norm_L", "residual_Y"}
    assert row["xi"] == 4.0
    assert row["seam_time"] == pytest.approx(0.25 / 12.0)
    for key in ("err_lhat_alpha", "norm_S", "norm_L", "residual_Y"):
        assert math.isfinite(row[key]) and row[key] > 0
