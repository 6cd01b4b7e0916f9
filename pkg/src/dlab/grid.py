"""Uniform periodic grids and unitary Fourier transforms.

The spatial domain is a torus of length L sampled at n equispaced nodes
x_j = x0 + j*L/n.  Fourier data lives on the symmetric frequency lattice
xi_k = 2*pi*k/L for k in {-n/2, ..., n/2 - 1} (ascending order in storage).

The transform convention is unitary with a 1/sqrt(2*pi) prefactor:

    fhat(xi) = (1/sqrt(2*pi)) * integral e^{-i x xi} f(x) dx

approximated by the scaled DFT (L/(n*sqrt(2*pi))) * sum_j e^{-i x_j xi_k} f_j,
so Fourier-side values are samples of a spectral *density* with quadrature
weight dxi = 2*pi/L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT_2PI = np.sqrt(2.0 * np.pi)

PHYSICAL = "physical"
FOURIER = "fourier"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with n nodes on [x0, x0 + length)."""

    n: int
    length: float
    x0: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not _is_power_of_two(int(self.n)):
            raise ValueError(f"grid size must be a power of two, got {self.n}")
        if not (self.length > 0):
            raise ValueError(f"grid length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.length

    def nodes(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def frequencies(self) -> np.ndarray:
        """Frequency lattice in ascending order, k = -n/2 .. n/2 - 1."""
        return self.dxi * np.arange(-self.n // 2, self.n // 2)

    def lattice_index(self, xi: float, tol: float = 1e-9) -> int:
        """Index k with xi_k == xi, or raise if xi is off the lattice."""
        k = xi / self.dxi
        k_round = round(k)
        if abs(k - k_round) > tol:
            raise ValueError(f"frequency {xi} is not on the lattice (spacing {self.dxi})")
        if not (-self.n // 2 <= k_round < self.n // 2):
            raise ValueError(f"frequency {xi} outside the resolvable band")
        return int(k_round)

    def close_to(self, other: "Grid", tol: float = 1e-12) -> bool:
        return (
            self.n == other.n
            and abs(self.length - other.length) <= tol * max(1.0, abs(self.length))
            and abs(self.x0 - other.x0) <= tol * max(1.0, abs(self.x0))
        )


class GridFunction:
    """Complex samples on a Grid, tagged as physical- or Fourier-side."""

    def __init__(self, grid: Grid, values: np.ndarray, side: str = PHYSICAL):
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got shape {values.shape}")
        if side not in (PHYSICAL, FOURIER):
            raise ValueError(f"unknown side {side!r}")
        self.grid = grid
        self.values = values
        self.side = side

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy(), self.side)

    def to_fourier(self) -> "GridFunction":
        if self.side == FOURIER:
            return self
        return forward_transform(self)

    def to_physical(self) -> "GridFunction":
        if self.side == PHYSICAL:
            return self
        return inverse_transform(self)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        a, b = match_sides(self, other)
        return GridFunction(a.grid, a.values + b.values, a.side)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        a, b = match_sides(self, other)
        return GridFunction(a.grid, a.values - b.values, a.side)

    def __mul__(self, c) -> "GridFunction":
        return GridFunction(self.grid, self.values * c, self.side)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        """Quadrature L2 norm (same on either side, by Plancherel)."""
        w = self.grid.dx if self.side == PHYSICAL else self.grid.dxi
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * w))


def match_sides(a: GridFunction, b: GridFunction) -> tuple[GridFunction, GridFunction]:
    if not a.grid.close_to(b.grid):
        raise ValueError("grid mismatch")
    if a.side == b.side:
        return a, b
    return a, (b.to_physical() if a.side == PHYSICAL else b.to_fourier())


def forward_transform(f: GridFunction) -> GridFunction:
    """Physical samples -> Fourier density samples (unitary convention)."""
    if f.side != PHYSICAL:
        raise ValueError("forward_transform expects a physical-side function")
    g = f.grid
    xi = g.frequencies()
    # DFT with k reordered to ascending frequency, then the x0 phase and
    # the density normalization L/(n*sqrt(2*pi)).
    coeff = np.fft.fftshift(np.fft.fft(f.values))
    coeff *= (g.length / (g.n * SQRT_2PI)) * np.exp(-1j * g.x0 * xi)
    return GridFunction(g, coeff, FOURIER)


def inverse_transform(f: GridFunction) -> GridFunction:
    """Exact inverse of forward_transform."""
    if f.side != FOURIER:
        raise ValueError("inverse_transform expects a fourier-side function")
    g = f.grid
    xi = g.frequencies()
    coeff = f.values * np.exp(1j * g.x0 * xi) * (g.n * SQRT_2PI / g.length)
    values = np.fft.ifft(np.fft.ifftshift(coeff))
    return GridFunction(g, values, PHYSICAL)


def fractional_derivative(f: GridFunction, s: float) -> GridFunction:
    """Fourier multiplier |xi|^s; the zero mode is set to 0 whenever s != 0."""
    if s <= -1:
        raise ValueError(f"order must satisfy s > -1 (symbol non-integrable at 0), got {s}")
    if s == 0:
        return f.copy()
    fh = f.to_fourier()
    xi = fh.grid.frequencies()
    mult = np.zeros_like(xi)
    nz = xi != 0
    mult[nz] = np.abs(xi[nz]) ** s
    out = GridFunction(fh.grid, fh.values * mult, FOURIER)
    return out.to_physical() if f.side == PHYSICAL else out


class SpaceTimeField:
    """Time-stamped sequence of GridFunctions on a common grid."""

    def __init__(self, grid: Grid, times: np.ndarray, frames: list[GridFunction]):
        times = np.asarray(times, dtype=np.float64)
        if times.ndim != 1 or len(frames) != times.size:
            raise ValueError("times and frames must have equal length")
        if times.size >= 2 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        for fr in frames:
            if not fr.grid.close_to(grid):
                raise ValueError("all frames must share the field grid")
        self.grid = grid
        self.times = times
        self.frames = list(frames)

    def __len__(self) -> int:
        return len(self.frames)

    def physical_array(self) -> np.ndarray:
        """(n_frames, n) array of physical-side values."""
        return np.stack([fr.to_physical().values for fr in self.frames])
