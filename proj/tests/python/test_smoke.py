import math

import mpmath
import numpy as np
import pytest

import oukit


def planar(s):
    return np.array([[0.0, s], [-s, 0.0]])


def test_heat_kernel_matches_gaussian():
    heat = oukit.heat_system(2)
    x = np.array([0.3, -0.2])
    xi = np.array([1.0, 0.5])
    t = 0.7
    ref = math.exp(-np.sum((x - xi) ** 2) / (4 * t)) / (4 * math.pi * t)
    assert abs(oukit.heat_kernel(heat, x, xi, t)[0, 0] - ref) < 1e-15


def test_system_construction_and_errors():
    A = np.array([[1 + 0.3j, 0.5], [0, 1.5 - 0.2j]])
    B = 0.2 * np.eye(2) + 0.3 * A
    sys = oukit.make_system(A, B, planar(1.0))
    assert (sys.N, sys.d) == (2, 2)
    assert np.allclose(sys.A, A)
    again = oukit.system_from_json(sys.to_json())
    assert np.array_equal(again.B, sys.B)
    with pytest.raises(oukit.Error, match="NonEllipticA"):
        oukit.scalar_system(-1.0, 0.0, planar(0.0))


def test_special_functions_against_mpmath():
    for a, b, z in [(0.5, 1.5, 3.2), (2.0, 0.5, -12.0), (1.5, 2.5, 45.0)]:
        ref = complex(mpmath.hyp1f1(a, b, z))
        assert abs(oukit.kummer_1f1(a, b, z) - ref) <= 1e-11 * abs(ref)
    ref = complex(mpmath.hyp2f1(0.5, 1.5, 2.0, -3.0))
    assert abs(oukit.gauss_2f1(0.5, 1.5, 2.0, -3.0) - ref) <= 1e-11 * abs(ref)
    assert abs(oukit.gamma(4.5) - math.gamma(4.5)) < 1e-13 * math.gamma(4.5)


def test_riccati_and_chapman():
    sys = oukit.scalar_system(1 + 0.5j, 2.0, planar(1.0))
    res_n, res_phi = oukit.riccati_residual(sys, 0.7)
    assert res_n <= 1e-7 and res_phi <= 1e-7
    r = oukit.chapman_kolmogorov_residual(sys, np.array([0.2, -0.4]), np.array([0.5, 0.1]), 0.3, 0.4)
    assert r <= 1e-5


def test_bounds_dominate_kernel_integrals():
    sys = oukit.scalar_system(1 + 0.2j, 0.3, planar(0.5))
    sq = oukit.spectral_quantities(sys, 0.2, 1.0)
    for t in (0.1, 1.0, 5.0):
        value, _ = oukit.weighted_kernel_l1(sys, 1, 0.2, t, 0)
        assert value <= oukit.bound_C(2, sq, t) * (1 + 1e-12)


def test_semigroup_constant_input():
    sys = oukit.scalar_system(1 + 0.2j, 0.4, planar(0.5))
    grid = oukit.cube_grid(2, -8.0, 8.0, 41)
    values = np.full(grid.nodes, 1.5 - 0.5j)
    out = oukit.apply_semigroup(sys, grid, values, 0.2)
    assert out.shape == (grid.nodes, 1)
    coords = grid.coordinates()
    mid = np.argmin(np.sum(coords**2, axis=1))
    assert abs(out[mid, 0] - (1.5 - 0.5j) * np.exp(-0.4 * 0.2)) < 1e-10


def test_grid_layout_and_norm():
    grid = oukit.GridSpec([-1.0, 0.0], [1.0, 2.0], [3, 5])
    coords = grid.coordinates()
    assert coords.shape == (15, 2)
    assert np.allclose(coords[:3, 0], [-1.0, 0.0, 1.0])
    assert np.allclose(coords[:3, 1], 0.0)
    ones = np.ones(grid.nodes, dtype=complex)
    assert oukit.weighted_norm(grid, ones, p=math.inf) == pytest.approx(1.0)
    assert oukit.weighted_norm(grid, ones, p=2.0) == pytest.approx(2.0)
    with pytest.raises(oukit.Error):
        oukit.apply_semigroup(oukit.heat_system(2), grid, np.ones(4), 0.1)


def test_resolvent_of_constant():
    sys = oukit.scalar_system(1.0, 0.8, planar(0.6))
    for lam in (0.5, 1 + 2j):
        v = oukit.resolvent_of_constant(sys, np.array([2.0 + 0j]), lam, np.array([0.3, 0.1]))
        assert abs(v[0] - 2.0 / (lam + 0.8)) < 1e-8 * abs(2.0 / (lam + 0.8))


def test_verify_selected_suite():
    records = oukit.verify(suites=["chapman"])
    assert records
    assert all(r["suite"] == "chapman" and r["pass"] for r in records)
    assert oukit.suite_names() == sorted(oukit.suite_names())
