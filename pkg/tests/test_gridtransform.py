import cmath
import math

import numpy as np
import pytest

from fresnel_tomo.errors import GridExtentWarning
from fresnel_tomo.gridtransform import (
    EPS_B,
    Grid,
    GridWavefunction,
    _bilinear_sum,
    apply_fresnel_adjoint,
    fresnel_kernel,
    fresnel_transform,
    momentum_wavefunction,
    sign_aligned_error,
)
from fresnel_tomo.symplectic import RayMatrix, compose, free, identity, inverse, lens, random_ray_matrix, rotation, scale
from fresnel_tomo.states import acceptance_states, coherent, fock, make_state, vacuum

FOURIER = RayMatrix(0, 1, -1, 0)


def wave_packet(grid, x0, p0, width):
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (2 * width**2) + 1j * p0 * x)
    psi /= np.sqrt(np.sum(grid.weights * np.abs(psi) ** 2))
    return GridWavefunction(grid, psi)


# -- grid and container -----------------------------------------------------


def test_grid_defaults():
    g = Grid()
    assert (g.L, g.n) == (10.0, 1024)
    assert g.dx == pytest.approx(20 / 1023)
    assert g.x[0] == -10 and g.x[-1] == 10
    assert np.sum(g.weights) == pytest.approx(20.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(n=4)
    with pytest.raises(ValueError):
        Grid(L=0.0)


def test_wavefunction_shape_checked():
    with pytest.raises(ValueError):
        GridWavefunction(Grid(n=16), np.zeros(8))


def test_standard_states_are_normalized():
    for spec in acceptance_states():
        assert abs(make_state(spec).norm() ** 2 - 1) <= 1e-8


# -- kernel -----------------------------------------------------------------


def test_kernel_fourier_example():
    xo, xi = 0.7, -1.3
    expected = (2j * np.pi) ** -0.5 * cmath.exp(-1j * xo * xi)
    assert abs(fresnel_kernel(FOURIER, xo, xi) - expected) < 1e-15


def test_kernel_modulus():
    rng = np.random.default_rng(0)
    for _ in range(10):
        m = random_ray_matrix(rng, min_abs_b=0.05)
        xo, xi = rng.uniform(-5, 5, (2, 20))
        assert np.allclose(np.abs(fresnel_kernel(m, xo, xi)), (2 * np.pi * abs(m.B)) ** -0.5, rtol=1e-13)


def test_kernel_free_is_chirp():
    lam = 0.6
    xo, xi = np.meshgrid(np.linspace(-3, 3, 7), np.linspace(-2, 2, 5))
    expected = (2j * np.pi * lam) ** -0.5 * np.exp(1j * (xi - xo) ** 2 / (2 * lam))
    assert np.allclose(fresnel_kernel(free(lam), xo, xi), expected, atol=1e-14)


def test_kernel_rejects_degenerate_matrix():
    with pytest.raises(ValueError):
        fresnel_kernel(identity(), 0.0, 0.0)
    with pytest.raises(ValueError):
        fresnel_kernel(free(EPS_B / 2), 0.0, 0.0)


# -- transform examples -----------------------------------------------------


def test_identity_uses_degenerate_route():
    psi = make_state(coherent(0.5 + 0.5j))
    assert np.array_equal(fresnel_transform(identity(), psi).values, psi.values)


def test_degenerate_route_scales_and_chirps():
    # lens(c) @ scale(a) has A = a, B = 0, C = c a
    a, c = 1.5, 0.4
    psi = make_state(vacuum())
    g = fresnel_transform(compose(lens(c), scale(a)), psi).values
    x = psi.x
    expected = a**-0.5 * np.exp(1j * c * x**2 / 2) * np.pi**-0.25 * np.exp(-((x / a) ** 2) / 2)
    assert np.max(np.abs(g - expected)) <= 1e-6


def test_vacuum_is_fourier_invariant():
    psi = make_state(vacuum())
    g = fresnel_transform(FOURIER, psi).values
    phase = g[512] / psi.values[512]
    assert abs(abs(phase) - 1) < 1e-10
    assert np.max(np.abs(g - phase * psi.values)) <= 1e-10


def test_inverse_round_trip():
    psi = make_state(coherent(1.0))
    m = free(0.5)
    back = fresnel_transform(inverse(m), fresnel_transform(m, psi))
    assert sign_aligned_error(back.values, psi.values) <= 1e-6


def test_adjoint_examples():
    psi = make_state(fock(2))
    assert np.array_equal(apply_fresnel_adjoint(identity(), psi).values, psi.values)
    m = rotation(0.7)
    back = apply_fresnel_adjoint(m, fresnel_transform(m, psi))
    assert np.max(np.abs(back.values - psi.values)) <= 1e-6


def test_adjoint_consistency():
    grid = Grid()
    rng = np.random.default_rng(1)
    for _ in range(5):
        m = random_ray_matrix(rng, min_abs_b=0.05)
        phi = wave_packet(grid, *rng.uniform(-1.5, 1.5, 2), rng.uniform(0.7, 1.4))
        psi = wave_packet(grid, *rng.uniform(-1.5, 1.5, 2), rng.uniform(0.7, 1.4))
        lhs = fresnel_transform(m, phi).inner(psi)
        rhs = phi.inner(apply_fresnel_adjoint(m, psi))
        assert abs(lhs - rhs) <= 1e-6


def test_composition_up_to_sign():
    rng = np.random.default_rng(2)
    psi = make_state(coherent(0.5 - 0.3j))
    for _ in range(10):
        m1, m2 = random_ray_matrix(rng, min_abs_b=0.05), random_ray_matrix(rng, min_abs_b=0.05)
        two_step = fresnel_transform(m1, fresnel_transform(m2, psi)).values
        direct = fresnel_transform(compose(m1, m2), psi).values
        assert sign_aligned_error(two_step, direct) <= 1e-5


def test_rotation_composition_sign():
    # two quarter turns give the parity operator times -i; the direct half
    # turn is on the other sheet of the double cover
    psi = make_state(fock(1))
    q = rotation(np.pi / 2)
    two_step = fresnel_transform(q, fresnel_transform(q, psi)).values
    assert np.max(np.abs(two_step - (-1j) * psi.values[::-1])) <= 1e-10


@pytest.mark.parametrize("b", [1e-3, 1e-2, 0.1, 1.0, 3.0, 10.0])
def test_unitarity_over_b_range(b):
    # the output spreads to a standard deviation of about |B| / sqrt(2), so
    # beyond |B| ~ 1 the default grid cannot hold it and a wider one is used
    grid = Grid() if b <= 1 else Grid(L=10.0 * b, n=int(200 * b) + 1)
    for spec in (vacuum(), coherent(1.0), fock(3)):
        psi = make_state(spec, grid)
        for m in (free(b), compose(free(b), lens(-0.3)), compose(scale(0.8), free(b))):
            assert abs(fresnel_transform(m, psi).norm() - 1) <= 1e-6


def test_default_grid_cannot_hold_wide_outputs():
    psi = make_state(vacuum())
    assert abs(fresnel_transform(free(10.0), psi).norm() - 1) > 1e-2


def test_split_and_direct_routes_agree():
    psi = make_state(coherent(0.7))
    for m in (compose(rotation(0.3), free(0.8)), free(1.5), RayMatrix(1.2, 1.4, 2 / 7, 7 / 6)):
        d = fresnel_transform(m, psi, route="direct").values
        s = fresnel_transform(m, psi, route="split").values
        assert np.max(np.abs(d - s)) <= 1e-8


def test_unknown_route():
    with pytest.raises(ValueError):
        fresnel_transform(free(1.0), make_state(vacuum()), route="fft")


def test_grid_doubling_converges():
    m = RayMatrix(1.2, 1.4, 2 / 7, 7 / 6)
    coarse, fine = Grid(n=1024), Grid(n=2047)
    for spec in acceptance_states():
        g1 = fresnel_transform(m, make_state(spec, coarse)).values
        g2 = fresnel_transform(m, make_state(spec, fine)).values[::2]
        assert sign_aligned_error(g1, g2) <= 1e-7


def test_chirp_z_sum_matches_dense_product():
    grid = Grid(L=6.0, n=301)
    rng = np.random.default_rng(3)
    v = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
    for c in (1.0, -0.4, 2.5):
        dense = np.exp(-1j * c * np.outer(grid.x, grid.x)) @ v
        assert np.max(np.abs(_bilinear_sum(grid, v, c) - dense)) <= 1e-10 * np.max(np.abs(dense))


def test_edge_warning():
    grid = Grid(L=3.0, n=128)
    with pytest.warns(GridExtentWarning):
        fresnel_transform(free(1.0), make_state(coherent(1.5), grid))


# -- momentum wavefunction --------------------------------------------------


def test_momentum_wavefunction_of_vacuum():
    psi = make_state(vacuum())
    expected = np.pi**-0.25 * np.exp(-psi.x**2 / 2)
    assert np.max(np.abs(momentum_wavefunction(psi) - expected)) <= 1e-10
    p = np.array([-0.3, 0.0, 2.0])
    assert np.max(np.abs(momentum_wavefunction(psi, p) - np.pi**-0.25 * np.exp(-p**2 / 2))) <= 1e-10


def test_momentum_wavefunction_of_coherent_state_is_shifted():
    psi = make_state(coherent(1j))
    dens = np.abs(momentum_wavefunction(psi)) ** 2
    mean = np.sum(psi.grid.weights * psi.x * dens)
    assert abs(mean - math.sqrt(2)) <= 1e-10


def test_sign_aligned_error():
    a = np.array([1.0, -2.0, 0.5])
    assert sign_aligned_error(-a, a) == 0
    assert sign_aligned_error(a + 1e-3, a) == pytest.approx(1e-3)


# -- serialization ----------------------------------------------------------


def test_csv_round_trip(tmp_path):
    psi = make_state(coherent(0.3 + 0.2j), Grid(L=8.0, n=64))
    path = tmp_path / "psi.csv"
    psi.save(path)
    assert path.read_text().splitlines()[0] == "x,re,im"
    back = GridWavefunction.load(path)
    assert back.grid == psi.grid
    assert np.array_equal(back.values, psi.values)


def test_json_round_trip(tmp_path):
    psi = make_state(fock(2), Grid(L=8.0, n=64))
    path = tmp_path / "psi.json"
    psi.save(path)
    back = GridWavefunction.load(path)
    assert back.grid == psi.grid and np.array_equal(back.values, psi.values)


def test_csv_rejects_nonuniform_abscissas(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,re,im\n-1,0,0\n0.2,1,0\n1,0,0\n" + "".join(f"{2+k},0,0\n" for k in range(6)))
    with pytest.raises(ValueError):
        GridWavefunction.from_csv(path)
