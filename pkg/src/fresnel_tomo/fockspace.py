"""Truncated Fock-space representation of Fresnel operators and eigenstates.

States are plain complex numpy vectors of length ``N`` and operators are
``N x N`` complex arrays; ``v[n] = <n|psi>``.  Conventions:
``X = (a + a^dagger)/sqrt(2)``, ``P = i (a^dagger - a)/sqrt(2)``.

The Fresnel operator in normal-ordered form is

    F(s, r) = s*^(-1/2) exp(-r/(2 s*) a^dagger^2) (1/s*)^(a^dagger a) exp(r*/(2 s*) a^2)

Its matrix elements are computed as ``<m|F|n> = \int dx <m|F|x> <x|n>``: both
factors are Gaussians times polynomials generated by stable Hermite-type
recursions, and the trapezoid rule on this entire, Gaussian-decaying integrand
converges to rounding error once the step resolves the highest oscillation.
Literal products of the three factors, and the two-term recursion from the
coherent-state generating function, both lose accuracy at large ``N``
(cancellation and parasitic growth); the factored form is kept only as a
small-``N`` cross-check (:func:`fresnel_operator_factored`).
"""

from __future__ import annotations

import json
import math
import warnings

import numpy as np
from scipy.special import roots_legendre

from .errors import GridExtentWarning, QuadratureError, TruncationWarning
from .gridtransform import EDGE_TOL, Grid, GridWavefunction
from .symplectic import RayMatrix, SRPair, abcd_to_sr, sr_to_abcd

DEFAULT_N = 64
TRUST_FACTOR = 0.7
TAIL_TOL = 1e-8


def ladder(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation matrices truncated to dimension ``N``."""
    if N < 2:
        raise ValueError(f"Fock dimension must be at least 2, got {N}")
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex)
    return a, a.conj().T


def quadratures(N: int) -> tuple[np.ndarray, np.ndarray]:
    a, adag = ladder(N)
    return (a + adag) / math.sqrt(2), 1j * (adag - a) / math.sqrt(2)


def number_phase(theta: float, N: int) -> np.ndarray:
    """``exp(-i theta a^dagger a)`` as a diagonal matrix."""
    return np.diag(np.exp(-1j * theta * np.arange(N)))


def _as_sr(p) -> SRPair:
    return abcd_to_sr(p) if isinstance(p, RayMatrix) else p


def fresnel_operator(p: SRPair | RayMatrix, N: int = DEFAULT_N) -> np.ndarray:
    """Matrix of the Fresnel operator ``F(s, r)`` on the first ``N`` levels.

    The entries are those of the infinite matrix (no truncation error beyond
    rounding, about 1e-13); products of truncated blocks are of course not.
    For ``r = 0`` the operator is the diagonal ``s*^(-1/2) (1/s*)^n``.
    """
    p = _as_sr(p)
    if N < 2:
        raise ValueError(f"Fock dimension must be at least 2, got {N}")
    sc = p.s.conjugate()
    if p.r == 0:
        return np.diag(sc ** (-np.arange(N, dtype=float)) / np.sqrt(sc))
    m = sr_to_abcd(p)
    x = _operator_quadrature_nodes(m, N)
    dx = x[1] - x[0]
    # <m|F|x> rows times <x|n> = h_n(x); the integrand vanishes at both ends
    F = (tomographic_basis(m, x, N).T * dx) @ hermite_functions(N, x).T
    # the kernel's square-root branch follows the ray matrix, not the chart;
    # pin the overall sign so that <0|F|0> is the principal s*^(-1/2)
    if (F[0, 0] * np.sqrt(sc)).real < 0:
        F = -F
    return F


def _operator_quadrature_nodes(m: RayMatrix, N: int) -> np.ndarray:
    # <m|F|x> has Gaussian width |D + iB| times that of h_n, so the integrand
    # lives inside the narrower of the two turning regions.  The step resolves
    # the largest local wavenumber (Hermite oscillation plus the chirp of
    # <m|F|x>) at twice the Nyquist rate.
    width = abs(complex(m.D, m.B))
    turning = math.sqrt(2 * N + 1)
    L = (turning + 8.0) * min(1.0, width)
    chirp = abs(m.A * m.B + m.C * m.D) / width**2
    kmax = turning * (1 + 1 / min(1.0, width)) + chirp * L
    n = int(math.ceil(2 * L * kmax / (math.pi / 2))) + 1
    return np.linspace(-L, L, max(n, 64))


def _nilpotent_exp(M: np.ndarray) -> np.ndarray:
    out = np.eye(len(M), dtype=complex)
    term = out.copy()
    for k in range(1, len(M)):
        term = term @ M / k
        if not term.any():
            break
        out += term
    return out


def fresnel_operator_factored(p: SRPair | RayMatrix, N: int) -> np.ndarray:
    """Literal product of the three normal-ordered factors.

    The nilpotent exponentials are finite series, so the result is exact in
    exact arithmetic; in floating point it loses all accuracy for ``N`` beyond
    about 40.  Use :func:`fresnel_operator` for real work.
    """
    p = _as_sr(p)
    a, adag = ladder(N)
    sc = p.s.conjugate()
    left = _nilpotent_exp(-(p.r / (2 * sc)) * (adag @ adag))
    middle = np.diag((1 / sc) ** np.arange(N))
    right = _nilpotent_exp((p.r.conjugate() / (2 * sc)) * (a @ a))
    return left @ middle @ right / np.sqrt(sc)


def coherent_vector(z: complex, N: int) -> np.ndarray:
    """``<n|z> = exp(-|z|^2/2) z^n / sqrt(n!)`` for ``n < N``."""
    v = np.empty(N, dtype=complex)
    v[0] = np.exp(-abs(z) ** 2 / 2)
    for n in range(1, N):
        v[n] = v[n - 1] * z / math.sqrt(n)
    return v


def coherent_matrix_element(p: SRPair | RayMatrix, z: complex, zp: complex) -> complex:
    """``<z| F(s, r) |z'>`` in closed form."""
    p = _as_sr(p)
    sc = p.s.conjugate()
    zc = np.conj(z)
    exponent = (
        -abs(z) ** 2 / 2
        - abs(zp) ** 2 / 2
        - p.r / (2 * sc) * zc**2
        + p.r.conjugate() / (2 * sc) * zp**2
        + zc * zp / sc
    )
    return complex(np.exp(exponent) / np.sqrt(sc))


def _integral_radius(p: SRPair, N: int, tol: float) -> float:
    # Slowest decay of exp(-(|sz - r z*|^2 + |z|^2)/2) |z|^(2N-2) / (N-1)!
    c = 0.5 * (1 + (abs(p.s) - abs(p.r)) ** 2)
    log_target = math.log(tol * 1e-3) + math.lgamma(N)
    R = 6.0
    while -c * R**2 + (2 * N - 2) * math.log(R) > log_target:
        R += 0.5
    return R


def _coherent_dyad_integral(p: SRPair, N: int, R: float, n_radial: int, n_angle: int):
    rho, w_rho = roots_legendre(n_radial)
    rho = R * (rho + 1) / 2
    w_rho = R * w_rho / 2
    phi = 2 * np.pi * np.arange(n_angle) / n_angle
    z = (rho[:, None] * np.exp(1j * phi[None, :])).ravel()
    weights = (w_rho * rho)[:, None].repeat(n_angle, axis=1).ravel() * (2 * np.pi / n_angle)
    w = p.s * z - p.r * np.conj(z)
    # rows: node, columns: Fock index
    ket = np.empty((len(z), N), dtype=complex)
    bra = np.empty((len(z), N), dtype=complex)
    ket[:, 0] = np.exp(-np.abs(w) ** 2 / 2)
    bra[:, 0] = np.exp(-np.abs(z) ** 2 / 2)
    zc = np.conj(z)
    for n in range(1, N):
        ket[:, n] = ket[:, n - 1] * w / math.sqrt(n)
        bra[:, n] = bra[:, n - 1] * zc / math.sqrt(n)
    return np.sqrt(p.s) * (ket.T * weights) @ bra / np.pi


def fresnel_operator_integral(
    p: SRPair | RayMatrix,
    N: int,
    n_radial: int = 200,
    n_angle: int = 200,
    radius: float | None = None,
    tol: float = 1e-6,
    return_error: bool = False,
):
    """Fresnel operator from the coherent-state integral ``sqrt(s) \\int d^2z/pi |sz - rz*><z|``.

    An independent oracle for :func:`fresnel_operator`.  The plane is covered
    by Gauss-Legendre nodes in radius and a periodic trapezoid rule in angle.

    Parameters
    ----------
    p : SRPair or RayMatrix
    N : int
        Fock dimension, at most 16.
    n_radial, n_angle : int
        Node counts.
    radius : float, optional
        Integration radius. By default the smallest radius >= 6 at which the
        Gaussian envelope times the largest monomial drops below ``tol * 1e-3``.
    tol : float
        Maximum tolerated quadrature error estimate.
    return_error : bool
        Also return the error estimate.

    Raises
    ------
    QuadratureError
        If the error estimate (difference to a rule with 3/4 the nodes)
        exceeds ``tol``.
    """
    p = _as_sr(p)
    if N > 16:
        raise ValueError("the integral oracle is meant for N <= 16")
    R = _integral_radius(p, N, tol) if radius is None else radius
    F = _coherent_dyad_integral(p, N, R, n_radial, n_angle)
    coarse = _coherent_dyad_integral(
        p, N, R, (3 * n_radial) // 4, (3 * n_angle) // 4
    )
    err = float(np.max(np.abs(F - coarse)))
    if err > tol:
        raise QuadratureError(
            f"estimated quadrature error {err:.2e} exceeds tolerance {tol:.2e}"
        )
    return (F, err) if return_error else F


_RESCALE = 1e150


def _hermite_type_rows(log_prefactor, alpha, beta: complex, N: int) -> np.ndarray:
    """Coefficients of ``exp(log_prefactor) exp(alpha a^dagger + beta a^dagger^2 / 2)|0>``.

    Vectorized over arrays ``log_prefactor`` and ``alpha`` (one row per
    entry), via ``c_{n+1} = (alpha c_n + beta sqrt(n) c_{n-1}) / sqrt(n+1)``.
    The recursion runs on rescaled values with a per-row logarithmic scale, so
    a Gaussian prefactor that underflows does not wipe out the large-``n``
    coefficients, which are what matter far out in ``x``.
    """
    log_prefactor = np.atleast_1d(np.asarray(log_prefactor, dtype=complex))
    alpha = np.broadcast_to(np.asarray(alpha, dtype=complex), log_prefactor.shape)
    out = np.zeros(log_prefactor.shape + (N,), dtype=complex)
    log_scale = log_prefactor.real.copy()
    phase = np.exp(1j * log_prefactor.imag)
    prev = np.zeros_like(alpha)
    cur = phase.copy()
    out[:, 0] = cur * np.exp(log_scale)
    for n in range(N - 1):
        nxt = (alpha * cur + beta * math.sqrt(n) * prev) / math.sqrt(n + 1)
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            prev[big] /= _RESCALE
            cur[big] /= _RESCALE
            log_scale[big] += math.log(_RESCALE)
        out[:, n + 1] = cur * np.exp(log_scale)
    return out


def _gaussian_ket(prefactor: complex, alpha: complex, beta: complex, N: int) -> np.ndarray:
    # prefactor * exp(alpha a^dagger + beta a^dagger^2 / 2)|0>
    return _hermite_type_rows(np.log(complex(prefactor)), alpha, beta, N)[0]


def trust_radius(N: int) -> float:
    """Quadrature values with ``|x|`` beyond this are poorly represented at dimension ``N``."""
    return TRUST_FACTOR * math.sqrt(2 * N)


def _check_trust(value: float, N: int, what: str) -> None:
    if abs(value) > trust_radius(N):
        warnings.warn(
            f"{what} = {value} is outside the trust region |{what}| <= "
            f"{trust_radius(N):.3g} for Fock dimension {N}",
            TruncationWarning,
            stacklevel=3,
        )


def tomo_eigenstate(m: RayMatrix, x: float, N: int = DEFAULT_N) -> np.ndarray:
    """Fock coefficients of the tomographic eigenstate ``|x>_{s,r} = F|x>``.

    It is an eigenvector of ``D X - B P`` with eigenvalue ``x`` and, like the
    position eigenket, is delta-normalized.
    """
    _check_trust(x, N, "x")
    den = complex(m.D, m.B)
    prefactor = np.pi**-0.25 / np.sqrt(den) * np.exp(-complex(m.A, -m.C) / den * x**2 / 2)
    return _gaussian_ket(prefactor, math.sqrt(2) * x / den, -den.conjugate() / den, N)


def momentum_eigenstate(m: RayMatrix, p: float, N: int = DEFAULT_N) -> np.ndarray:
    """Fock coefficients of ``F|p>``, an eigenvector of ``A P - C X``."""
    _check_trust(p, N, "p")
    den = complex(m.A, -m.C)
    prefactor = np.pi**-0.25 / np.sqrt(den) * np.exp(-complex(m.D, m.B) / den * p**2 / 2)
    return _gaussian_ket(prefactor, 1j * math.sqrt(2) * p / den, den.conjugate() / den, N)


def eigen_residual(m: RayMatrix, value: float, N: int, kind: str = "position") -> float:
    """Residual of the eigen-relation for a tomographic eigenstate.

    Returns ``|| P_N [(D X - B P) - x] v ||`` (or ``A P - C X`` for
    ``kind="momentum"``).  The operator acts on the ket with one extra level so
    that the projection onto the first ``N`` levels has no truncation corner.
    """
    if kind == "position":
        v = tomo_eigenstate(m, value, N + 1)
        X, P = quadratures(N + 1)
        op = m.D * X - m.B * P
    elif kind == "momentum":
        v = momentum_eigenstate(m, value, N + 1)
        X, P = quadratures(N + 1)
        op = m.A * P - m.C * X
    else:
        raise ValueError(f"kind must be 'position' or 'momentum', got {kind!r}")
    return float(np.linalg.norm((op @ v - value * v)[:N]))


def tomographic_overlap(u: np.ndarray, v: np.ndarray) -> complex:
    """Tapered inner product ``<u|v>`` of two delta-normalized kets.

    Plain truncated sums of such kets converge only conditionally; weighting
    level ``n`` by ``cos^2(pi n / 2N)`` suppresses the oscillating partial
    sums while leaving low levels untouched.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    N = len(u)
    taper = np.cos(np.pi / 2 * np.arange(N) / N) ** 2
    return complex(np.sum(np.conj(u) * v * taper))


def hermite_functions(N: int, x) -> np.ndarray:
    """Orthonormal Hermite functions ``h_n(x)``, shape ``(N,) + x.shape``.

    Accurate far into the classically forbidden region; plain recursion from
    ``h_0`` underflows beyond ``|x| ~ 38``.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    rows = _hermite_type_rows(-0.25 * math.log(math.pi) - flat**2 / 2, math.sqrt(2) * flat, -1.0, N)
    return rows.real.T.reshape((N,) + x.shape)


def _check_grid_extent(psi: GridWavefunction, what: str) -> None:
    # Hermite synthesis and projection are exact up to quadrature as long as
    # the wavefunction has died out before the grid ends.
    edge = psi.edge_amplitude()
    if edge > EDGE_TOL:
        warnings.warn(
            f"{what}: amplitude {edge:.2e} at the grid edge x = +-{psi.grid.L:g}; "
            "the grid extent is too small for this state",
            GridExtentWarning,
            stacklevel=3,
        )


def fock_to_grid(v: np.ndarray, grid: Grid | None = None) -> GridWavefunction:
    """Synthesize ``psi(x_j) = sum_n v_n h_n(x_j)``."""
    grid = Grid() if grid is None else grid
    v = np.asarray(v, dtype=complex)
    psi = GridWavefunction(grid, v @ hermite_functions(len(v), grid.x))
    _check_grid_extent(psi, "fock_to_grid")
    return psi


def grid_to_fock(psi: GridWavefunction, N: int = DEFAULT_N) -> np.ndarray:
    """Project onto ``h_0 .. h_{N-1}`` with trapezoid weights."""
    _check_grid_extent(psi, "grid_to_fock")
    return hermite_functions(N, psi.x) @ (psi.grid.weights * psi.values)


def tomographic_basis(m: RayMatrix, xs, N: int) -> np.ndarray:
    """Rows ``<n|x>_{s,r}`` for each ``x`` in ``xs``; shape ``(len(xs), N)``."""
    xs = np.asarray(xs, dtype=float)
    den = complex(m.D, m.B)
    log_prefactor = -0.25 * math.log(math.pi) - 0.5 * np.log(den) - complex(m.A, -m.C) / den * xs**2 / 2
    return _hermite_type_rows(log_prefactor, math.sqrt(2) * xs / den, -den.conjugate() / den, N)


def completeness_defect(m: RayMatrix, N: int = DEFAULT_N, grid: Grid | None = None) -> float:
    """Max deviation of ``\\int dx |x>_{s,r} <x|_{s,r}`` from the identity.

    Evaluated on the leading ``(N/2) x (N/2)`` block.  The default grid is wide
    and fine enough for the block's levels after the transform: extent
    ``sqrt(D^2 + B^2) (sqrt(N + 1) + 6)`` and a step inversely proportional to
    the matrix norm.
    """
    block = N // 2
    if grid is None:
        norm = math.sqrt(m.A**2 + m.B**2 + m.C**2 + m.D**2)
        L = math.hypot(m.D, m.B) * (math.sqrt(2 * block + 1) + 6.0)
        step = 0.05 / max(1.0, norm)
        grid = Grid(L=L, n=int(2 * L / step) + 1)
    basis = tomographic_basis(m, grid.x, block)
    gram = basis.T @ (grid.weights[:, None] * basis.conj())
    return float(np.max(np.abs(gram - np.eye(block))))


def unitarity_defect(F: np.ndarray, block: int | None = None) -> float:
    """``max |F^dagger F - I|`` over the leading block (default half the size)."""
    block = len(F) // 2 if block is None else block
    G = (F.conj().T @ F)[:block, :block]
    return float(np.max(np.abs(G - np.eye(block))))


def tail_mass(v: np.ndarray, keep: int) -> float:
    return float(np.sum(np.abs(np.asarray(v)[keep:]) ** 2))


def vector_to_json(v: np.ndarray) -> str:
    v = np.asarray(v, dtype=complex)
    return json.dumps({"dim": len(v), "data": [[c.real, c.imag] for c in v]})


def vector_from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    v = np.array([complex(re, im) for re, im in obj["data"]])
    if len(v) != obj["dim"]:
        raise ValueError(f"dimension {obj['dim']} does not match {len(v)} entries")
    return v


def operator_to_json(M: np.ndarray) -> str:
    M = np.asarray(M, dtype=complex)
    rows = [[[c.real, c.imag] for c in row] for row in M]
    return json.dumps({"dim": len(M), "data": rows})


def operator_from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    M = np.array([[complex(re, im) for re, im in row] for row in obj["data"]])
    if M.shape != (obj["dim"], obj["dim"]):
        raise ValueError(f"expected a {obj['dim']}x{obj['dim']} operator, got {M.shape}")
    return M
