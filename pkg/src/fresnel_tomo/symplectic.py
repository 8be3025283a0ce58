"""Ray-transfer (ABCD) matrices and their complex (s, r) chart.

A real unimodular matrix ``[[A, B], [C, D]]`` and a complex pair ``(s, r)``
with ``|s|^2 - |r|^2 = 1`` describe the same element of the symplectic group:

    s = ((A + D) - i (B - C)) / 2
    r = -((A - D) + i (B + C)) / 2

Everything here is exact parameter algebra; nothing is renormalized, inputs
are only validated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

SYMPLECTIC_TOL = 1e-12


class NotSymplecticError(ValueError):
    """Raised when a matrix or (s, r) pair violates its group invariant."""


@dataclass(frozen=True)
class RayMatrix:
    """Real 2x2 ray-transfer matrix with ``A*D - B*C == 1``."""

    A: float
    B: float
    C: float
    D: float

    def __post_init__(self):
        for name in ("A", "B", "C", "D"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise NotSymplecticError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        det = self.A * self.D - self.B * self.C
        if abs(det - 1.0) > SYMPLECTIC_TOL:
            raise NotSymplecticError(
                f"ray matrix must be unimodular, got AD - BC = {det!r}"
            )

    @classmethod
    def from_array(cls, m) -> RayMatrix:
        m = np.asarray(m, dtype=float)
        if m.shape == (4,):
            return cls(*m)
        if m.shape == (2, 2):
            return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        raise ValueError(f"expected 4 entries or a 2x2 array, got shape {m.shape}")

    def as_array(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.C, self.D]])

    def to_list(self) -> list[float]:
        return [self.A, self.B, self.C, self.D]

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> RayMatrix:
        return cls(*json.loads(text))

    def __matmul__(self, other: RayMatrix) -> RayMatrix:
        return compose(self, other)


@dataclass(frozen=True)
class SRPair:
    """Complex parameters ``(s, r)`` with ``|s|^2 - |r|^2 == 1``."""

    s: complex
    r: complex

    def __post_init__(self):
        s, r = complex(self.s), complex(self.r)
        if not (np.isfinite(s) and np.isfinite(r)):
            raise NotSymplecticError("s and r must be finite")
        defect = abs(s) ** 2 - abs(r) ** 2 - 1.0
        if abs(defect) > SYMPLECTIC_TOL:
            raise NotSymplecticError(
                f"(s, r) must satisfy |s|^2 - |r|^2 = 1, off by {defect!r}"
            )
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "r", r)

    def as_matrix(self) -> np.ndarray:
        """Action on ``(z, z*)``: the SU(1,1) matrix ``[[s, -r], [-r*, s*]]``."""
        return np.array([[self.s, -self.r], [-self.r.conjugate(), self.s.conjugate()]])

    def to_list(self) -> list[list[float]]:
        return [[self.s.real, self.s.imag], [self.r.real, self.r.imag]]

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> SRPair:
        (sr, si), (rr, ri) = json.loads(text)
        return cls(complex(sr, si), complex(rr, ri))


def abcd_to_sr(m: RayMatrix) -> SRPair:
    """Map a ray matrix to its (s, r) pair."""
    s = complex(m.A + m.D, -(m.B - m.C)) / 2
    r = -complex(m.A - m.D, m.B + m.C) / 2
    return SRPair(s, r)


def sr_to_abcd(p: SRPair) -> RayMatrix:
    """Inverse of :func:`abcd_to_sr`."""
    diff = p.s - p.r
    total = p.s + p.r
    return RayMatrix(diff.real, -total.imag, diff.imag, total.real)


def compose(m1: RayMatrix, m2: RayMatrix) -> RayMatrix:
    """Matrix product ``m1 @ m2`` (``m2`` acts first)."""
    A, B, C, D = m1.A, m1.B, m1.C, m1.D
    a, b, c, d = m2.A, m2.B, m2.C, m2.D
    return RayMatrix(A * a + B * c, A * b + B * d, a * C + c * D, b * C + D * d)


def sr_compose(p1: SRPair, p2: SRPair) -> SRPair:
    """Group product in the (s, r) chart, consistent with :func:`compose`.

    Multiplies the ``[[s, -r], [-r*, s*]]`` representatives, so
    ``abcd_to_sr(compose(m1, m2)) == sr_compose(abcd_to_sr(m1), abcd_to_sr(m2))``.
    """
    s = p1.s * p2.s + p1.r * p2.r.conjugate()
    r = p1.s * p2.r + p1.r * p2.s.conjugate()
    return SRPair(s, r)


def inverse(m: RayMatrix) -> RayMatrix:
    return RayMatrix(m.D, -m.B, -m.C, m.A)


def identity() -> RayMatrix:
    return RayMatrix(1.0, 0.0, 0.0, 1.0)


def rotation(theta: float) -> RayMatrix:
    """Phase-space rotation; its (s, r) pair is ``(exp(-i theta), 0)``."""
    c, s = math.cos(theta), math.sin(theta)
    return RayMatrix(c, s, -s, c)


def free(length: float) -> RayMatrix:
    """Free propagation over ``length``."""
    return RayMatrix(1.0, length, 0.0, 1.0)


def lens(kappa: float) -> RayMatrix:
    """Thin lens with power ``kappa`` (a pure quadratic phase)."""
    return RayMatrix(1.0, 0.0, kappa, 1.0)


def scale(mu: float) -> RayMatrix:
    if mu == 0:
        raise ValueError("scale factor must be nonzero")
    return RayMatrix(mu, 0.0, 0.0, 1.0 / mu)


_ELEMENTARY = {
    "identity": lambda *_: identity(),
    "rotation": rotation,
    "free": free,
    "lens": lens,
    "scale": scale,
}


def elementary(kind: str, param: float | None = None) -> RayMatrix:
    """Build an elementary matrix by name.

    Parameters
    ----------
    kind : str
        One of ``identity``, ``rotation``, ``free``, ``lens``, ``scale``.
    param : float, optional
        Angle, length, lens power or scale factor. Ignored for ``identity``.
    """
    try:
        factory = _ELEMENTARY[kind]
    except KeyError:
        raise ValueError(
            f"unknown elementary matrix {kind!r}; choose from {sorted(_ELEMENTARY)}"
        ) from None
    if kind != "identity" and param is None:
        raise ValueError(f"{kind} needs a parameter")
    return factory(param)


def random_ray_matrix(
    rng: np.random.Generator,
    mu_range: tuple[float, float] = (0.7, 1.4),
    kappa_range: tuple[float, float] = (-0.5, 0.5),
    min_abs_b: float = 0.0,
    max_entry: float = 3.0,
) -> RayMatrix:
    """Draw ``rotation(theta) @ scale(mu) @ lens(kappa)`` with rejection.

    The product of exactly unimodular factors stays unimodular up to rounding.
    Draws are rejected until ``|B| >= min_abs_b`` and all entries are within
    ``max_entry``.
    """
    for _ in range(10_000):
        theta = rng.uniform(0.0, 2 * math.pi)
        mu = rng.uniform(*mu_range)
        kappa = rng.uniform(*kappa_range)
        m = compose(rotation(theta), compose(scale(mu), lens(kappa)))
        if abs(m.B) >= min_abs_b and max(map(abs, m.to_list())) <= max_entry:
            return m
    raise RuntimeError("rejection sampling did not find an admissible matrix")


def random_sr_pair(rng: np.random.Generator, r_max: float = 0.8) -> SRPair:
    """Random pair with ``|r| <= r_max`` and uniformly distributed phases."""
    rmod = r_max * math.sqrt(rng.uniform())
    r = rmod * np.exp(2j * math.pi * rng.uniform())
    s = math.sqrt(1.0 + rmod**2) * np.exp(2j * math.pi * rng.uniform())
    return SRPair(complex(s), complex(r))
