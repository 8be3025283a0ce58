"""Wigner functions, their Radon transforms and tomograms.

Conventions::

    W(x, p) = (1/2pi) \\int du exp(i p u) psi*(x + u/2) psi(x - u/2)
    psi~(p) = (2pi)^(-1/2) \\int dx exp(-i p x) psi(x)

so that ``\\int W dp = |psi(x)|^2`` and ``\\int W dx = |psi~(p)|^2``.

For a ray matrix ``M`` the position-type tomogram is the distribution of the
quadrature ``D X - B P`` and the momentum-type tomogram that of ``A P - C X``.
They are obtained either from the Fresnel-transformed wavefunction
``F(M)^dagger psi`` or as line integrals of the Wigner function.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage
from scipy.signal import CZT

from .errors import AngleCoverageWarning, GridExtentWarning
from .fockspace import fock_to_grid, grid_to_fock
from .gridtransform import (
    Grid,
    GridWavefunction,
    apply_fresnel_adjoint,
    momentum_wavefunction,
)
from .symplectic import RayMatrix, rotation

WIGNER_EDGE_TOL = 1e-8
MAX_IMAG = 1e-8
# momentum-type tomograms Fourier-transform the truncated F^dagger psi; their
# error is a fraction of the amplitude cut off at the grid edge
MOMENTUM_EDGE_TOL = 1e-4
POSITION = "position"
MOMENTUM = "momentum"


@dataclass(frozen=True)
class WignerGrid:
    """Real Wigner values ``W[j, k] = W(x_j, p_k)`` on a square grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"expected a {self.grid.n}x{self.grid.n} array, got {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def p(self) -> np.ndarray:
        return self.grid.x

    def normalization(self) -> float:
        w = self.grid.weights
        return float(w @ self.values @ w)

    def position_marginal(self) -> np.ndarray:
        return self.values @ self.grid.weights

    def momentum_marginal(self) -> np.ndarray:
        return self.grid.weights @ self.values

    def edge_magnitude(self) -> float:
        v = self.values
        return float(
            max(np.abs(v[0]).max(), np.abs(v[-1]).max(), np.abs(v[:, 0]).max(), np.abs(v[:, -1]).max())
        )

    @cached_property
    def spline_coefficients(self) -> np.ndarray:
        return ndimage.spline_filter(self.values, order=3, mode="constant")

    def value_at(self, x, p) -> np.ndarray:
        """Cubic-spline interpolation of ``W`` at arbitrary points (0 off the grid)."""
        x, p = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(p, dtype=float))
        coords = [(x.ravel() + self.grid.L) / self.grid.dx, (p.ravel() + self.grid.L) / self.grid.dx]
        vals = ndimage.map_coordinates(
            self.spline_coefficients, coords, order=3, mode="constant", prefilter=False
        )
        return vals.reshape(x.shape)

    def to_csv(self, path) -> None:
        x = self.grid.x
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "p", "W"])
            for j, xj in enumerate(x):
                for k, pk in enumerate(x):
                    writer.writerow([repr(float(xj)), repr(float(pk)), repr(float(self.values[j, k]))])

    def save_binary(self, path) -> None:
        """Row-major float64 dump plus a ``.json`` sidecar with ``{L, n}``."""
        path = Path(path)
        self.values.astype("<f8").tofile(path)
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(self.grid.to_dict()))

    @classmethod
    def load_binary(cls, path) -> WignerGrid:
        path = Path(path)
        grid = Grid(**json.loads(path.with_suffix(path.suffix + ".json").read_text()))
        values = np.fromfile(path, dtype="<f8").reshape(grid.n, grid.n)
        return cls(grid, values)

    @classmethod
    def from_csv(cls, path) -> WignerGrid:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        n = int(round(math.sqrt(len(data))))
        grid = Grid(L=float(-data[0, 0]), n=n)
        return cls(grid, data[:, 2].reshape(n, n))

    def save(self, path) -> None:
        if Path(path).suffix == ".csv":
            self.to_csv(path)
        else:
            self.save_binary(path)


@dataclass(frozen=True)
class TomogramCurve:
    """Quadrature distribution sampled at ``abscissas``.

    ``mode`` says which quadrature of ``matrix`` was measured: ``position`` for
    ``D X - B P`` and ``momentum`` for ``A P - C X``.
    """

    abscissas: np.ndarray
    values: np.ndarray
    matrix: RayMatrix
    mode: str = POSITION

    def __post_init__(self):
        if self.mode not in (POSITION, MOMENTUM):
            raise ValueError(f"mode must be {POSITION!r} or {MOMENTUM!r}, got {self.mode!r}")
        object.__setattr__(self, "abscissas", np.asarray(self.abscissas, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.abscissas.shape != self.values.shape:
            raise ValueError("abscissas and values must have the same shape")

    @property
    def parameters(self) -> tuple[float, float]:
        """``(D, B)`` for position-type curves, ``(A, C)`` for momentum-type."""
        m = self.matrix
        return (m.D, m.B) if self.mode == POSITION else (m.A, m.C)

    def normalization(self) -> float:
        return float(np.trapezoid(self.values, self.abscissas))

    def mean(self) -> float:
        return float(np.trapezoid(self.abscissas * self.values, self.abscissas) / self.normalization())

    def variance(self) -> float:
        mu = self.mean()
        return float(
            np.trapezoid((self.abscissas - mu) ** 2 * self.values, self.abscissas)
            / self.normalization()
        )

    def write_csv(self, fh) -> None:
        """Write to an open text stream: a ``# mode=... A=... B=... C=... D=...`` line, then columns."""
        m = self.matrix
        fh.write(f"# mode={self.mode} A={m.A!r} B={m.B!r} C={m.C!r} D={m.D!r}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x" if self.mode == POSITION else "p", "t"])
        for a, t in zip(self.abscissas, self.values):
            writer.writerow([repr(float(a)), repr(float(t))])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    @classmethod
    def from_csv(cls, path) -> TomogramCurve:
        with open(path) as fh:
            header = fh.readline().lstrip("#").split()
        fields = dict(item.split("=", 1) for item in header)
        matrix = RayMatrix(*(float(fields[k]) for k in "ABCD"))
        data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
        return cls(data[:, 0], data[:, 1], matrix, fields["mode"])


def wigner(psi: GridWavefunction) -> WignerGrid:
    """Wigner function of a pure state on the ``(x, p)`` grid ``grid x grid``.

    For each row ``x_j`` the integral over ``u`` uses the samples
    ``psi(x_j +- k dx)`` (``u = 2 k dx``) and is evaluated at all ``p`` on the
    grid at once with a chirp-z transform.

    Raises
    ------
    ValueError
        If the imaginary residue exceeds ``MAX_IMAG``.
    """
    grid = psi.grid
    n, dx, L = grid.n, grid.dx, grid.L
    if psi.edge_amplitude() > WIGNER_EDGE_TOL:
        warnings.warn(
            f"wavefunction amplitude {psi.edge_amplitude():.2e} at the grid edge",
            GridExtentWarning,
            stacklevel=2,
        )
    p_edge = float(np.max(np.abs(momentum_wavefunction(psi, [-L, L]))))
    if p_edge > WIGNER_EDGE_TOL:
        warnings.warn(
            f"momentum wavefunction amplitude {p_edge:.2e} at p = +-{L:g}; "
            "the Wigner grid truncates the state in momentum",
            GridExtentWarning,
            stacklevel=2,
        )
    f = psi.values
    j = np.arange(n)[:, None]
    k = np.arange(-(n - 1), n)[None, :]
    plus, minus = j + k, j - k
    valid = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n)
    corr = np.where(
        valid, np.conj(f[np.clip(plus, 0, n - 1)]) * f[np.clip(minus, 0, n - 1)], 0.0
    )
    # sum_k' corr[k'] exp(2i p_m (k' - (n-1)) dx) with p_m = -L + m dx
    transform = CZT(2 * n - 1, n, w=np.exp(2j * dx * dx), a=np.exp(2j * L * dx))
    spectrum = transform(corr, axis=-1)
    p = grid.x
    spectrum *= np.exp(-2j * p * (n - 1) * dx)[None, :]
    W = spectrum * dx / np.pi
    residue = float(np.max(np.abs(W.imag)))
    if residue > MAX_IMAG:
        raise ValueError(f"Wigner function has imaginary residue {residue:.2e}")
    return WignerGrid(grid, W.real)


def _line_integrals(W: WignerGrid, a: float, b: float, us: np.ndarray, order: int) -> np.ndarray:
    # R(u) = \int\int delta(u - a x' - b p') W(x', p') dx' dp'
    if a == 0 and b == 0:
        raise ValueError("the linear form must not vanish")
    if W.edge_magnitude() > WIGNER_EDGE_TOL:
        warnings.warn(
            f"|W| = {W.edge_magnitude():.2e} on the grid boundary; line integrals are truncated",
            GridExtentWarning,
            stacklevel=3,
        )
    grid = W.grid
    J = a * a + b * b
    norm = math.sqrt(J)
    # t is arc length along the line
    half = math.sqrt(2) * grid.L
    t = np.arange(-half, half + grid.dx / 2, grid.dx)
    us = np.asarray(us, dtype=float)
    U, T = us[:, None], t[None, :]
    xs = (a * U - b * T * norm) / J
    ps = (b * U + a * T * norm) / J
    coords = [(xs + grid.L) / grid.dx, (ps + grid.L) / grid.dx]
    if order == 3:
        vals = ndimage.map_coordinates(
            W.spline_coefficients, coords, order=3, mode="constant", prefilter=False
        )
    else:
        vals = ndimage.map_coordinates(W.values, coords, order=order, mode="constant")
    return vals.sum(axis=1) * grid.dx / norm


def radon_position(
    W: WignerGrid, m: RayMatrix, xs: Sequence[float] | None = None, order: int = 3
) -> TomogramCurve:
    """Line integrals of ``W`` over ``D x' - B p' = x``.

    ``order`` is the spline order used to interpolate ``W`` along each line
    (1 for bilinear).
    """
    xs = W.x if xs is None else np.asarray(xs, dtype=float)
    return TomogramCurve(xs, _line_integrals(W, m.D, -m.B, xs, order), m, POSITION)


def radon_momentum(
    W: WignerGrid, m: RayMatrix, ps: Sequence[float] | None = None, order: int = 3
) -> TomogramCurve:
    """Line integrals of ``W`` over ``A p' - C x' = p``."""
    ps = W.p if ps is None else np.asarray(ps, dtype=float)
    return TomogramCurve(ps, _line_integrals(W, -m.C, m.A, ps, order), m, MOMENTUM)


def radon(W: WignerGrid, m: RayMatrix, mode: str = POSITION, samples=None) -> TomogramCurve:
    if mode == POSITION:
        return radon_position(W, m, samples)
    if mode == MOMENTUM:
        return radon_momentum(W, m, samples)
    raise ValueError(f"unknown mode {mode!r}")


def tomogram_via_fresnel(
    psi: GridWavefunction, m: RayMatrix, mode: str = POSITION
) -> TomogramCurve:
    """Tomogram as the density of the transformed state ``F(M)^dagger psi``.

    Position mode returns ``|(F^dagger psi)(x)|^2``, momentum mode the squared
    momentum-space wavefunction of ``F^dagger psi``.
    """
    transformed = apply_fresnel_adjoint(m, psi)
    if mode == POSITION:
        values = transformed.density()
    elif mode == MOMENTUM:
        if transformed.edge_amplitude() > MOMENTUM_EDGE_TOL:
            warnings.warn(
                f"transformed state has amplitude {transformed.edge_amplitude():.2e} at the "
                "grid edge; its momentum distribution is inaccurate",
                GridExtentWarning,
                stacklevel=2,
            )
        values = np.abs(momentum_wavefunction(transformed)) ** 2
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return TomogramCurve(psi.x, values, m, mode)


def central_identity_check(
    psi: GridWavefunction,
    m: RayMatrix,
    mode: str = POSITION,
    W: WignerGrid | None = None,
    stride: int = 4,
) -> float:
    """Max abs difference between the Fresnel-route tomogram and the Radon route.

    ``W`` may be passed to reuse a Wigner function computed for ``psi``.  The
    two curves are compared at every ``stride``-th grid abscissa; the line
    integrals dominate the cost, and the curves are smooth on that scale.
    """
    W = wigner(psi) if W is None else W
    fresnel = tomogram_via_fresnel(psi, m, mode)
    us = fresnel.abscissas[::stride]
    line = radon(W, m, mode, us)
    return float(np.max(np.abs(fresnel.values[::stride] - line.values)))


def weyl_expectation(W: WignerGrid, h: np.ndarray | Callable) -> float:
    """``\\int\\int h(x, p) W(x, p) dx dp`` with ``h`` an array or ``h(X, P)``."""
    if callable(h):
        X, P = np.meshgrid(W.x, W.p, indexing="ij")
        h = h(X, P)
    h = np.broadcast_to(np.asarray(h, dtype=float), W.values.shape)
    w = W.grid.weights
    return float(w @ (h * W.values) @ w)


def homodyne_distribution(psi: GridWavefunction, phi: float, N: int = 96) -> np.ndarray:
    """Distribution of ``X_phi = X cos(phi) + P sin(phi)`` via the fractional Fourier transform.

    The transform ``exp(-i phi a^dagger a)`` is applied spectrally in the
    Hermite-function basis, independently of any Fresnel kernel or Radon
    line integral.  Note that ``rotation(theta)`` in the position-type
    tomogram measures ``X_{-theta}`` in this convention.
    """
    c = grid_to_fock(psi, N)
    c = c * np.exp(-1j * phi * np.arange(N))
    return fock_to_grid(c, psi.grid).density()


def rotation_angle(m: RayMatrix, tol: float = 1e-9) -> float:
    if abs(m.A - m.D) > tol or abs(m.B + m.C) > tol:
        raise ValueError(f"{m} is not a rotation")
    return math.atan2(m.B, m.A)


def ramp_filter(n: int, dx: float, window: str = "hann") -> np.ndarray:
    """Frequency response of the band-limited ramp on a zero-padded FFT grid.

    Built from the spatial Ram-Lak kernel so that the zero-frequency term is
    handled correctly, then apodized by a Hann window reaching zero at the
    Nyquist frequency.
    """
    size = 1 << int(math.ceil(math.log2(2 * n)))
    k = np.arange(size)
    k = np.where(k < size // 2, k, k - size)
    h = np.zeros(size)
    h[0] = 1 / (4 * dx * dx)
    odd = k % 2 == 1
    h[odd] = -1 / (np.pi * k[odd] * dx) ** 2
    response = np.real(np.fft.fft(h)) * dx
    if window == "hann":
        nu = np.abs(np.fft.fftfreq(size))  # cycles per sample, Nyquist at 0.5
        response *= 0.5 * (1 + np.cos(2 * np.pi * nu))
    elif window not in (None, "none"):
        raise ValueError(f"unknown window {window!r}")
    return response


def inverse_radon_fbp(
    curves: Sequence[TomogramCurve], grid: Grid | None = None, window: str = "hann"
) -> WignerGrid:
    """Filtered back-projection of rotation-family position tomograms.

    Each curve must come from ``rotation(theta)`` in position mode and all
    curves must share uniformly spaced abscissas.  The angle sum is scaled by
    ``pi / m`` for ``m`` curves.
    """
    if not curves:
        raise ValueError("need at least one tomogram")
    xs = curves[0].abscissas
    n = len(xs)
    dx = float(xs[1] - xs[0])
    if not np.allclose(np.diff(xs), dx):
        raise ValueError("tomogram abscissas must be uniformly spaced")
    thetas = []
    for c in curves:
        if c.mode != POSITION:
            raise ValueError("filtered back-projection needs position-type tomograms")
        if not np.array_equal(c.abscissas, xs):
            raise ValueError("all tomograms must share the same abscissas")
        thetas.append(rotation_angle(c.matrix))
    thetas = np.asarray(thetas)
    _check_angle_coverage(thetas)
    if grid is None:
        grid = Grid(L=float(-xs[0]), n=n)
    response = ramp_filter(n, dx, window)
    size = len(response)
    X, P = np.meshgrid(grid.x, grid.x, indexing="ij")
    out = np.zeros((grid.n, grid.n))
    for theta, curve in zip(thetas, curves):
        padded = np.zeros(size)
        padded[:n] = curve.values
        filtered = np.real(np.fft.ifft(np.fft.fft(padded) * response))[:n]
        u = X * math.cos(theta) - P * math.sin(theta)
        out += np.interp(u, xs, filtered, left=0.0, right=0.0)
    return WignerGrid(grid, out * np.pi / len(curves))


def _check_angle_coverage(thetas: np.ndarray) -> None:
    m = len(thetas)
    folded = np.sort(np.mod(thetas, np.pi))
    gaps = np.diff(np.concatenate([folded, [folded[0] + np.pi]]))
    if m < 2 or np.max(np.abs(gaps - np.pi / m)) > 1e-6:
        warnings.warn(
            "tomogram angles do not cover [0, pi) uniformly; the reconstruction is biased",
            AngleCoverageWarning,
            stacklevel=3,
        )


def rotation_sinogram(
    psi: GridWavefunction, m: int, route: str = "fresnel", W: WignerGrid | None = None
) -> list[TomogramCurve]:
    """Position tomograms for ``rotation(pi k / m)``, ``k = 0..m-1``."""
    thetas = np.pi * np.arange(m) / m
    if route == "fresnel":
        return [tomogram_via_fresnel(psi, rotation(t)) for t in thetas]
    if route == "radon":
        W = wigner(psi) if W is None else W
        return [radon_position(W, rotation(t)) for t in thetas]
    raise ValueError(f"unknown route {route!r}")


def save_sinogram(curves: Sequence[TomogramCurve], directory) -> Path:
    """Write one CSV per curve plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, curve in enumerate(curves):
        name = f"tomogram_{i:04d}.csv"
        curve.to_csv(directory / name)
        entries.append({"file": name, "matrix": curve.matrix.to_list(), "mode": curve.mode})
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps({"count": len(entries), "curves": entries}, indent=2))
    return manifest


def load_sinogram(manifest) -> list[TomogramCurve]:
    manifest = Path(manifest)
    obj = json.loads(manifest.read_text())
    return [TomogramCurve.from_csv(manifest.parent / e["file"]) for e in obj["curves"]]


__all__ = [
    "WignerGrid",
    "TomogramCurve",
    "wigner",
    "radon",
    "radon_position",
    "radon_momentum",
    "tomogram_via_fresnel",
    "central_identity_check",
    "weyl_expectation",
    "homodyne_distribution",
    "inverse_radon_fbp",
    "rotation_sinogram",
    "save_sinogram",
    "load_sinogram",
]
