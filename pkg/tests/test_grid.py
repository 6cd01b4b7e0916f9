import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlab.grid import (FOURIER, PHYSICAL, Grid, GridFunction, SpaceTimeField,
                       forward_transform, fractional_derivative,
                       inverse_transform, match_sides)


def gaussian(grid: Grid, width: float = 1.0) -> GridFunction:
    x = grid.nodes()
    return GridFunction(grid, np.exp(-(x / width) ** 2 / 2.0).astype(complex))


def test_gaussian_transform_oracle():
    # e^{-x^2/2} is a fixed point of the unitary transform
    g = Grid(512, 16 * np.pi, -8 * np.pi)
    fh = forward_transform(gaussian(g))
    expected = np.exp(-g.frequencies() ** 2 / 2.0)
    assert np.max(np.abs(fh.values - expected)) < 5e-14


def test_round_trip_identity():
    g = Grid(256, 20.0, -10.0)
    rng = np.random.default_rng(3)
    f = GridFunction(g, rng.normal(size=256) + 1j * rng.normal(size=256))
    back = inverse_transform(forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12


def test_transform_respects_x0_phase():
    # shifting the window start multiplies the transform by e^{-i x0 xi}
    n, L = 256, 16 * np.pi
    rng = np.random.default_rng(5)
    vals = rng.normal(size=n) + 1j * rng.normal(size=n)
    a = forward_transform(GridFunction(Grid(n, L, 0.0), vals))
    b = forward_transform(GridFunction(Grid(n, L, 2.5 * L / n), vals))
    phase = np.exp(-1j * (2.5 * L / n) * a.grid.frequencies())
    assert np.max(np.abs(b.values - a.values * phase)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_plancherel(seed):
    g = Grid(128, 12.0, -6.0)
    rng = np.random.default_rng(seed)
    f = GridFunction(g, rng.normal(size=128) + 1j * rng.normal(size=128))
    assert forward_transform(f).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)


def test_fractional_derivative_even_order():
    # |xi|^2 agrees with -d^2/dx^2 on a Gaussian
    g = Grid(512, 16 * np.pi, -8 * np.pi)
    x = g.nodes()
    got = fractional_derivative(gaussian(g), 2.0).values.real
    expected = -(x ** 2 - 1.0) * np.exp(-x ** 2 / 2.0)
    assert np.max(np.abs(got - expected)) < 1e-10


def test_fractional_derivative_zero_mode_removed():
    g = Grid(64, 8.0, -4.0)
    f = GridFunction(g, np.ones(64, dtype=complex))
    out = fractional_derivative(f, 0.5).to_fourier()
    assert np.max(np.abs(out.values)) < 1e-12


def test_fractional_derivative_order_validation():
    g = Grid(64, 8.0, -4.0)
    f = gaussian(g)
    with pytest.raises(ValueError):
        fractional_derivative(f, -1.0)
    same = fractional_derivative(f, 0.0)
    assert np.array_equal(same.values, f.values)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(100, 10.0)
    with pytest.raises(ValueError):
        Grid(128, -1.0)


def test_lattice_index():
    g = Grid(128, 2 * np.pi * 16)  # dxi = 1/16
    assert g.lattice_index(2.0) == 32
    with pytest.raises(ValueError):
        g.lattice_index(2.01)
    with pytest.raises(ValueError):
        g.lattice_index(5.0)  # beyond the resolvable band


def test_grid_function_validation():
    g = Grid(64, 8.0)
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros(32))
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros(64), side="spectral")


def test_side_conversions_cache():
    g = Grid(64, 8.0, -4.0)
    f = gaussian(g)
    assert f.to_physical() is f
    fh = f.to_fourier()
    assert fh.to_fourier() is fh
    assert fh.side == FOURIER and f.side == PHYSICAL


def test_arithmetic_matches_sides():
    g = Grid(128, 16.0, -8.0)
    f = gaussian(g)
    total = f + f.to_fourier()
    assert total.side == PHYSICAL
    assert np.max(np.abs(total.values - 2 * f.values)) < 1e-12
    diff = f.to_fourier() - f
    assert diff.side == FOURIER
    assert np.max(np.abs(diff.values)) < 1e-12
    assert (2.0 * f).l2_norm() == pytest.approx(2.0 * f.l2_norm())


def test_match_sides_grid_mismatch():
    a = gaussian(Grid(64, 8.0))
    b = gaussian(Grid(64, 9.0))
    with pytest.raises(ValueError, match="grid mismatch"):
        match_sides(a, b)


def test_space_time_field_validation():
    g = Grid(64, 8.0)
    f = gaussian(g)
    with pytest.raises(ValueError):
        SpaceTimeField(g, np.array([0.0, 1.0]), [f])
    with pytest.raises(ValueError):
        SpaceTimeField(g, np.array([0.0, 0.0]), [f, f])
    field = SpaceTimeField(g, np.array([0.0, 0.5]), [f, f.to_fourier()])
    assert len(field) == 2
    arr = field.physical_array()
    assert arr.shape == (2, 64)
    assert np.max(np.abs(arr[1] - f.values)) < 1e-12
