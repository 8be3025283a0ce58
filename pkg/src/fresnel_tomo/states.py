"""Test states with closed forms: vacuum, Fock, coherent, squeezed vacuum, even cat."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre

from .errors import GridExtentWarning, TruncationWarning
from .fockspace import coherent_vector, hermite_functions
from .gridtransform import EDGE_TOL, Grid, GridWavefunction
from .phasespace import WignerGrid

KINDS = ("vacuum", "fock", "coherent", "squeezed", "cat")
MAX_ALPHA = 4.0
MAX_SQUEEZE = 1.5
FOCK_HEADROOM = 8
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class StateSpec:
    """Which test state to build.

    ``n`` is used by ``fock``, ``alpha`` by ``coherent`` and ``cat``, ``lam``
    by ``squeezed`` (``S(lam) = exp(lam (a^2 - a^dagger^2) / 2)``, so positive
    ``lam`` narrows the position distribution).
    """

    kind: str
    n: int = 0
    alpha: complex = 0j
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError(f"Fock index must be a nonnegative integer, got {self.n}")
        if abs(self.alpha) > MAX_ALPHA:
            raise ValueError(f"|alpha| must be at most {MAX_ALPHA}, got {abs(self.alpha)}")
        if abs(self.lam) > MAX_SQUEEZE:
            raise ValueError(f"|lam| must be at most {MAX_SQUEEZE}, got {self.lam}")

    @classmethod
    def parse(cls, text: str) -> StateSpec:
        """Parse ``vacuum``, ``fock:3``, ``coherent:1,0.5``, ``squeezed:0.5`` or ``cat:2``."""
        kind, _, args = text.strip().partition(":")
        values = [float(v) for v in args.split(",") if v.strip()] if args else []
        if kind == "vacuum":
            return cls("vacuum")
        if kind == "fock":
            if len(values) != 1:
                raise ValueError("fock needs one integer, e.g. fock:2")
            return cls("fock", n=int(values[0]))
        if kind in ("coherent", "cat"):
            if len(values) not in (1, 2):
                raise ValueError(f"{kind} needs re[,im], e.g. {kind}:1,0")
            alpha = complex(values[0], values[1] if len(values) == 2 else 0.0)
            return cls(kind, alpha=alpha)
        if kind == "squeezed":
            if len(values) != 1:
                raise ValueError("squeezed needs one real parameter, e.g. squeezed:0.5")
            return cls("squeezed", lam=values[0])
        raise ValueError(f"unknown state kind {kind!r}; choose from {KINDS}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "fock":
            out["n"] = self.n
        elif self.kind in ("coherent", "cat"):
            out["alpha"] = [self.alpha.real, self.alpha.imag]
        elif self.kind == "squeezed":
            out["lambda"] = self.lam
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> StateSpec:
        alpha = obj.get("alpha", [0.0, 0.0])
        if isinstance(alpha, (int, float)):
            alpha = [alpha, 0.0]
        return cls(
            obj["kind"],
            n=int(obj.get("n", 0)),
            alpha=complex(*alpha),
            lam=float(obj.get("lambda", obj.get("lam", 0.0))),
        )

    @classmethod
    def from_json(cls, text: str) -> StateSpec:
        return cls.from_dict(json.loads(text))


def vacuum() -> StateSpec:
    return StateSpec("vacuum")


def fock(n: int) -> StateSpec:
    return StateSpec("fock", n=n)


def coherent(alpha: complex) -> StateSpec:
    return StateSpec("coherent", alpha=alpha)


def squeezed(lam: float) -> StateSpec:
    return StateSpec("squeezed", lam=lam)


def cat(alpha: complex) -> StateSpec:
    return StateSpec("cat", alpha=alpha)


def _coherent_wavefunction(z: complex, x: np.ndarray) -> np.ndarray:
    return np.pi**-0.25 * np.exp(-(x**2) / 2 + math.sqrt(2) * x * z - z**2 / 2 - abs(z) ** 2 / 2)


def _cat_norm(alpha: complex) -> float:
    return math.sqrt(2 * (1 + math.exp(-2 * abs(alpha) ** 2)))


def _grid_state(spec: StateSpec, grid: Grid) -> GridWavefunction:
    x = grid.x
    if spec.kind == "vacuum":
        psi = np.pi**-0.25 * np.exp(-(x**2) / 2)
    elif spec.kind == "fock":
        psi = hermite_functions(spec.n + 1, x)[spec.n]
    elif spec.kind == "coherent":
        psi = _coherent_wavefunction(spec.alpha, x)
    elif spec.kind == "squeezed":
        lam = spec.lam
        psi = np.pi**-0.25 * math.exp(lam / 2) * np.exp(-math.exp(2 * lam) * x**2 / 2)
    else:
        a = spec.alpha
        psi = (_coherent_wavefunction(a, x) + _coherent_wavefunction(-a, x)) / _cat_norm(a)
    out = GridWavefunction(grid, psi)
    if out.edge_amplitude() > EDGE_TOL:
        warnings.warn(
            f"{spec.kind} state has amplitude {out.edge_amplitude():.2e} at the edge of "
            f"the grid x = +-{grid.L:g}; it is not normalized on this grid",
            GridExtentWarning,
            stacklevel=3,
        )
    return out


def _fock_state(spec: StateSpec, N: int) -> np.ndarray:
    if spec.kind == "fock" and spec.n > N - FOCK_HEADROOM:
        raise ValueError(
            f"Fock index {spec.n} leaves less than {FOCK_HEADROOM} levels of headroom in dimension {N}"
        )
    v = np.zeros(N, dtype=complex)
    if spec.kind == "vacuum":
        v[0] = 1.0
    elif spec.kind == "fock":
        v[spec.n] = 1.0
    elif spec.kind == "coherent":
        v = coherent_vector(spec.alpha, N)
    elif spec.kind == "squeezed":
        t = math.tanh(spec.lam)
        v[0] = 1 / math.sqrt(math.cosh(spec.lam))
        for j in range(1, (N + 1) // 2):
            v[2 * j] = v[2 * j - 2] * (-t) * math.sqrt((2 * j - 1) * 2 * j) / (2 * j)
    else:
        a = spec.alpha
        v = (coherent_vector(a, N) + coherent_vector(-a, N)) / _cat_norm(a)
    # the untruncated states are normalized, so the missing norm is the tail
    tail = 1.0 - float(np.vdot(v, v).real)
    if tail > TAIL_TOL:
        warnings.warn(
            f"{spec.kind} state loses tail mass {tail:.2e} when truncated to {N} levels",
            TruncationWarning,
            stacklevel=3,
        )
    return v


def make_state(spec: StateSpec | str, representation: Grid | int | None = None):
    """Build a normalized state.

    Parameters
    ----------
    spec : StateSpec or str
        Strings are parsed with :meth:`StateSpec.parse`.
    representation : Grid or int, optional
        A :class:`Grid` gives a :class:`GridWavefunction`; an integer ``N``
        gives Fock coefficients of length ``N``.  Defaults to the standard grid.
    """
    if isinstance(spec, str):
        spec = StateSpec.parse(spec)
    if representation is None:
        representation = Grid()
    if isinstance(representation, Grid):
        return _grid_state(spec, representation)
    return _fock_state(spec, int(representation))


def analytic_wigner(spec: StateSpec | str, grid: Grid | None = None) -> WignerGrid:
    """Closed-form Wigner function of any supported test state."""
    if isinstance(spec, str):
        spec = StateSpec.parse(spec)
    grid = Grid() if grid is None else grid
    X, P = np.meshgrid(grid.x, grid.x, indexing="ij")
    if spec.kind == "vacuum":
        W = np.exp(-(X**2) - P**2) / np.pi
    elif spec.kind == "coherent":
        x0 = math.sqrt(2) * spec.alpha.real
        p0 = math.sqrt(2) * spec.alpha.imag
        W = np.exp(-((X - x0) ** 2) - (P - p0) ** 2) / np.pi
    elif spec.kind == "fock":
        rho2 = X**2 + P**2
        W = (-1) ** spec.n * eval_laguerre(spec.n, 2 * rho2) * np.exp(-rho2) / np.pi
    elif spec.kind == "squeezed":
        lam = spec.lam
        W = np.exp(-math.exp(2 * lam) * X**2 - math.exp(-2 * lam) * P**2) / np.pi
    else:
        # two displaced Gaussians plus the fringe term of |alpha><-alpha|
        a = spec.alpha
        x0, p0 = math.sqrt(2) * a.real, math.sqrt(2) * a.imag
        W = (
            np.exp(-((X - x0) ** 2) - (P - p0) ** 2)
            + np.exp(-((X + x0) ** 2) - (P + p0) ** 2)
            + 2 * np.exp(-(X**2) - P**2) * np.cos(2 * (x0 * P - p0 * X))
        ) / (np.pi * _cat_norm(a) ** 2)
    return WignerGrid(grid, W)


def acceptance_states() -> list[StateSpec]:
    """The state suite used by the central-identity checks."""
    return [vacuum(), coherent(1.0), fock(1), fock(3), squeezed(0.5), cat(2.0)]
