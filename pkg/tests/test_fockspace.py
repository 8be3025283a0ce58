import math
import warnings

import numpy as np
import pytest

from fresnel_tomo.errors import GridExtentWarning, QuadratureError, TruncationWarning
from fresnel_tomo.fockspace import (
    coherent_matrix_element,
    coherent_vector,
    completeness_defect,
    eigen_residual,
    fock_to_grid,
    fresnel_operator,
    fresnel_operator_factored,
    fresnel_operator_integral,
    grid_to_fock,
    hermite_functions,
    ladder,
    momentum_eigenstate,
    number_phase,
    operator_from_json,
    operator_to_json,
    quadratures,
    tail_mass,
    tomo_eigenstate,
    tomographic_overlap,
    trust_radius,
    unitarity_defect,
    vector_from_json,
    vector_to_json,
)
from fresnel_tomo.gridtransform import Grid, sign_aligned_error
from fresnel_tomo.symplectic import (
    SRPair,
    abcd_to_sr,
    compose,
    free,
    identity,
    lens,
    random_sr_pair,
    rotation,
    scale,
    sr_compose,
)


# -- ladder and quadratures -------------------------------------------------


def test_ladder_small():
    a, adag = ladder(2)
    assert np.array_equal(a, [[0, 1], [0, 0]])
    a, adag = ladder(3)
    assert np.allclose(adag @ a, np.diag([0, 1, 2]))


def test_commutator_truncation_corner():
    N = 10
    a, adag = ladder(N)
    comm = a @ adag - adag @ a
    expected = np.eye(N)
    expected[-1, -1] = -(N - 1)
    assert np.allclose(comm, expected)


def test_ladder_rejects_small_dimension():
    with pytest.raises(ValueError):
        ladder(1)


def test_quadratures():
    X, P = quadratures(2)
    assert np.allclose(X, [[0, 1 / math.sqrt(2)], [1 / math.sqrt(2), 0]])
    X, P = quadratures(6)
    assert np.allclose(X, X.conj().T) and np.allclose(P, P.conj().T)
    assert abs((X @ X)[0, 0] - 0.5) < 1e-15
    comm = X @ P - P @ X
    assert np.allclose(comm[:-1, :-1], 1j * np.eye(5))


# -- Fresnel operator -------------------------------------------------------


def test_fresnel_operator_identity():
    assert np.array_equal(fresnel_operator(SRPair(1, 0), 16), np.eye(16))


def test_fresnel_operator_rotation_is_exact_phase():
    theta = 0.83
    N = 40
    F = fresnel_operator(rotation(theta), N)
    expected = np.exp(-1j * theta / 2) * number_phase(theta, N)
    assert np.max(np.abs(F - expected)) < 1e-14


def test_fresnel_operator_squeeze_vacuum_element():
    lam = 0.6
    F = fresnel_operator(SRPair(math.cosh(lam), -math.sinh(lam)), 8)
    assert abs(F[0, 0] - 1 / math.sqrt(math.cosh(lam))) < 1e-13


def test_quadrature_matches_factored_form_at_moderate_n():
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = random_sr_pair(rng, 0.8)
        assert np.max(np.abs(fresnel_operator(p, 24) - fresnel_operator_factored(p, 24))) < 1e-9


def test_accepts_ray_matrix():
    m = compose(free(0.4), lens(0.3))
    assert np.array_equal(fresnel_operator(m, 12), fresnel_operator(abcd_to_sr(m), 12))


def test_unitarity_in_truncation():
    # F^dagger F = I holds on a block only while the block's columns are not
    # squeezed past level N; half the matrix is never enough (see the ledger)
    rng = np.random.default_rng(4)
    for _ in range(5):
        F = fresnel_operator(random_sr_pair(rng, 0.8), 256)
        assert unitarity_defect(F, 32) <= 1e-8
    F = fresnel_operator(SRPair(math.sqrt(2) * np.exp(0.3j), np.exp(1j)), 400)
    assert unitarity_defect(F, 32) <= 1e-8


def test_entries_are_untruncated():
    # the leading block does not depend on the matrix size
    p = SRPair(math.sqrt(2) * np.exp(-0.7j), np.exp(0.4j))
    small, large = fresnel_operator(p, 48), fresnel_operator(p, 300)
    assert np.max(np.abs(small - large[:48, :48])) < 1e-12


def test_group_law_up_to_sign():
    rng = np.random.default_rng(5)
    for _ in range(10):
        p1, p2 = random_sr_pair(rng, 0.8), random_sr_pair(rng, 0.8)
        prod = (fresnel_operator(p1, 256) @ fresnel_operator(p2, 256))[:32, :32]
        direct = fresnel_operator(sr_compose(p1, p2), 32)
        assert sign_aligned_error(prod, direct) <= 1e-8


def test_group_law_sign_can_be_negative():
    # two quarter-turn rotations give F(pi) = -i diag((-1)^n), but the
    # principal branch for rotation(pi) gives +i diag((-1)^n): the product is -F
    q = rotation(math.pi / 2)
    prod = fresnel_operator(q, 8) @ fresnel_operator(q, 8)
    direct = fresnel_operator(compose(q, q), 8)
    assert np.allclose(prod, -direct) or np.allclose(prod, direct)
    assert sign_aligned_error(prod, direct) < 1e-14


# -- integral oracle --------------------------------------------------------


def test_integral_oracle_identity():
    F = fresnel_operator_integral(SRPair(1, 0), 4)
    assert np.max(np.abs(F - np.eye(4))) <= 1e-8


@pytest.mark.parametrize(
    "p",
    [SRPair(np.exp(-1j * np.pi / 4), 0), SRPair(math.cosh(0.3), -math.sinh(0.3))],
)
def test_integral_oracle_matches_closed_form(p):
    F, err = fresnel_operator_integral(p, 8, return_error=True)
    assert err <= 1e-6
    assert np.max(np.abs(F - fresnel_operator(p, 8))) <= 1e-6


def test_integral_oracle_reports_failure():
    with pytest.raises(QuadratureError):
        fresnel_operator_integral(abcd_to_sr(free(1.0)), 8, n_radial=12, n_angle=12)


def test_integral_oracle_limited_to_small_n():
    with pytest.raises(ValueError):
        fresnel_operator_integral(SRPair(1, 0), 32)


# -- coherent matrix elements -----------------------------------------------


def test_coherent_element_trivial():
    assert coherent_matrix_element(SRPair(1, 0), 0, 0) == 1


def test_coherent_element_is_overlap_at_r_zero():
    z, zp = 0.3 - 0.7j, -0.2 + 0.4j
    overlap = np.exp(-abs(z) ** 2 / 2 - abs(zp) ** 2 / 2 + np.conj(z) * zp)
    assert abs(coherent_matrix_element(SRPair(1, 0), z, zp) - overlap) < 1e-15


def test_coherent_element_matches_fock_matrix():
    rng = np.random.default_rng(6)
    N = 64
    for _ in range(5):
        p = random_sr_pair(rng, 0.8)
        F = fresnel_operator(p, N)
        z, zp = (rng.uniform(-1.4, 1.4, 2) @ [1, 1j] for _ in range(2))
        direct = np.vdot(coherent_vector(z, N), F @ coherent_vector(zp, N))
        assert abs(direct - coherent_matrix_element(p, z, zp)) <= 1e-8


# -- tomographic eigenstates ------------------------------------------------


def test_position_eigenstate_at_origin_is_even():
    v = tomo_eigenstate(identity(), 0.0, 32)
    assert np.all(v[1::2] == 0)
    assert np.allclose(v[::2], hermite_functions(32, 0.0)[::2])


def test_position_eigenstate_matches_hermite_expansion():
    v = tomo_eigenstate(identity(), 1.0, 64)
    assert np.max(np.abs(v - hermite_functions(64, 1.0))) <= 1e-8


def test_eigen_residual_examples():
    assert eigen_residual(free(1.0), 0.5, 128) <= 1e-6
    assert eigen_residual(lens(0.5), 0.3, 128, kind="momentum") <= 1e-6


def test_eigen_residual_rejects_unknown_kind():
    with pytest.raises(ValueError):
        eigen_residual(identity(), 0.0, 16, kind="energy")


def test_momentum_eigenstate_at_origin_is_even():
    v = momentum_eigenstate(identity(), 0.0, 32)
    assert np.all(v[1::2] == 0)


def test_plane_wave_overlap_modulus():
    N = 1024
    for x in (-1.0, 0.0, 0.7):
        for p in (-0.5, 0.0, 1.2):
            amp = tomographic_overlap(tomo_eigenstate(identity(), x, N), momentum_eigenstate(identity(), p, N))
            assert abs(abs(amp) - (2 * np.pi) ** -0.5) <= 1e-6


def test_fresnel_operator_maps_position_eigenstates():
    # F|x> = |x>_{s,r}, checked on a block well inside the truncation
    for m, N, block in ((rotation(0.4), 128, 32), (free(0.5), 128, 32), (scale(1.3), 512, 64)):
        for x in (-1.0, 0.0, 1.5):
            v = fresnel_operator(m, N) @ tomo_eigenstate(identity(), x, N)
            target = tomo_eigenstate(m, x, N)
            assert sign_aligned_error(v[:block], target[:block]) <= 1e-6


def test_trust_region_warning():
    N = 32
    with pytest.warns(TruncationWarning):
        tomo_eigenstate(identity(), trust_radius(N) + 0.5, N)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tomo_eigenstate(identity(), 0.5 * trust_radius(N), N)


# -- grid conversions -------------------------------------------------------


def test_fock_to_grid_vacuum():
    grid = Grid()
    psi = fock_to_grid(np.eye(8)[0], grid)
    assert np.max(np.abs(psi.values - np.pi**-0.25 * np.exp(-grid.x**2 / 2))) < 1e-15


def test_round_trip_coherent():
    v = coherent_vector(1.0, 64)
    assert np.max(np.abs(grid_to_fock(fock_to_grid(v), 64) - v)) <= 1e-8


def test_round_trip_random_vector():
    rng = np.random.default_rng(8)
    v = rng.normal(size=32) + 1j * rng.normal(size=32)
    v /= np.linalg.norm(v)
    grid = Grid(L=14.0, n=2801)
    assert np.max(np.abs(grid_to_fock(fock_to_grid(v, grid), 32) - v)) <= 1e-8


def test_grid_extent_warning():
    with pytest.warns(GridExtentWarning):
        fock_to_grid(np.eye(64)[60], Grid(L=6.0, n=256))


def test_hermite_functions_orthonormal():
    grid = Grid(L=14.0, n=2801)
    h = hermite_functions(40, grid.x)
    gram = (h * grid.weights) @ h.T
    assert np.max(np.abs(gram - np.eye(40))) < 1e-12


# -- completeness -----------------------------------------------------------


@pytest.mark.parametrize("m", [identity(), rotation(np.pi / 3), free(1.0)])
def test_completeness(m):
    assert completeness_defect(m, 64) <= 1e-5


def test_completeness_detects_narrow_grid():
    assert completeness_defect(free(1.0), 64, Grid(L=3.0, n=301)) > 1e-3


# -- helpers and IO ---------------------------------------------------------


def test_tail_mass():
    v = coherent_vector(2.0, 64)
    assert tail_mass(v, 0) == pytest.approx(np.vdot(v, v).real)
    assert tail_mass(v, 40) < 1e-10


def test_vector_json_round_trip():
    v = coherent_vector(0.4 + 0.3j, 10)
    assert np.array_equal(vector_from_json(vector_to_json(v)), v)


def test_operator_json_round_trip():
    F = fresnel_operator(abcd_to_sr(free(0.3)), 6)
    assert np.array_equal(operator_from_json(operator_to_json(F)), F)


def test_vector_json_dimension_checked():
    with pytest.raises(ValueError):
        vector_from_json('{"dim": 3, "data": [[1, 0]]}')
