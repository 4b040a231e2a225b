import numpy as np
import pytest
from fractions import Fraction

from torsionlab import linalg_exact as lx


def random_int_matrix(rng, r, c, lo=-5, hi=5):
    return [[int(rng.integers(lo, hi + 1)) for _ in range(c)] for _ in range(r)]


def test_det_and_inverse_roundtrip():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        m = lx.fmat(random_int_matrix(rng, n, n))
        d = lx.det(m)
        if d == 0:
            with pytest.raises(lx.SingularMatrixError):
                lx.inverse(m)
            continue
        inv = lx.inverse(m)
        assert lx.meq(lx.matmul(m, inv), lx.identity(n))
        assert lx.det(inv) == 1 / d


def test_rank_and_kernel():
    rng = np.random.default_rng(2)
    for _ in range(20):
        r, c = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        m = lx.fmat(random_int_matrix(rng, r, c))
        rk = lx.rank(m)
        kern = lx.right_kernel(m)
        assert rk + len(kern) == c
        for v in kern:
            out = [sum(m[i][j] * v[j] for j in range(c)) for i in range(r)]
            assert all(x == 0 for x in out)


def test_det_prime_psd_matches_eigenvalues():
    rng = np.random.default_rng(3)
    for _ in range(15):
        r, c = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        m = lx.fmat(random_int_matrix(rng, r, c, -3, 3))
        g = lx.matmul(lx.transpose(m), m)  # PSD
        exact = lx.det_prime_psd(g)
        w = np.linalg.eigvalsh(lx.to_float(g))
        nz = w[w > 1e-9 * max(w.max(), 1.0)]
        approx = float(np.prod(nz)) if len(nz) else 1.0
        assert abs(float(exact) - approx) <= 1e-8 * max(approx, 1.0)


def test_det_prime_zero_matrix_is_one():
    assert lx.det_prime_psd(lx.zeros(3, 3)) == 1


def test_vol_sq_matches_singular_values():
    rng = np.random.default_rng(4)
    for _ in range(15):
        r, c = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        m = lx.fmat(random_int_matrix(rng, r, c, -3, 3))
        exact = float(lx.vol_sq(m))
        s = np.linalg.svd(lx.to_float(m), compute_uv=False)
        nz = s[s > 1e-9 * max(s.max(initial=0.0), 1.0)]
        approx = float(np.prod(nz * nz)) if len(nz) else 1.0
        assert abs(exact - approx) <= 1e-8 * max(approx, 1.0)
        assert abs(lx.vol_float(lx.to_float(m)) - np.sqrt(approx)) <= 1e-8 * max(approx, 1.0)


def test_smith_normal_form_properties():
    rng = np.random.default_rng(5)
    for _ in range(25):
        r, c = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        a = random_int_matrix(rng, r, c)
        u, d, v = lx.smith_normal_form(a)
        uav = lx.matmul(lx.matmul(lx.fmat(u), lx.fmat(a)), lx.fmat(v))
        assert lx.meq(uav, lx.fmat(d))
        assert abs(lx.det(lx.fmat(u))) == 1
        assert abs(lx.det(lx.fmat(v))) == 1
        diag = [d[i][i] for i in range(min(r, c))]
        for i in range(len(diag) - 1):
            if diag[i + 1] != 0:
                assert diag[i] != 0 and diag[i + 1] % diag[i] == 0
        for i in range(r):
            for j in range(c):
                if i != j:
                    assert d[i][j] == 0


def test_smith_normal_form_known():
    # diag(2) boundary of the projective-plane 2-cell
    u, d, v = lx.smith_normal_form([[2]])
    assert d == [[2]]
    # torus-like zero map
    u, d, v = lx.smith_normal_form([[0, 0]])
    assert d == [[0, 0]]


def test_int_kernel_and_solve():
    a = [[1, -1, 0], [0, 1, -1]]
    kern = lx.int_kernel_basis(a)
    assert len(kern) == 1
    k = kern[0]
    assert k[0] == k[1] == k[2] != 0
    coords = lx.int_solve_in_basis(kern, [2 * k[0], 2 * k[1], 2 * k[2]])
    assert coords == [2]
    with pytest.raises(lx.SingularMatrixError):
        lx.int_solve_in_basis(kern, [1, 0, 0])


def test_frac_rejects_floats():
    with pytest.raises(TypeError):
        lx.frac(0.5)
    assert lx.frac("3/7") == Fraction(3, 7)


def test_rank_kernel_float_scale_guard():
    noise = np.full((3, 3), 1e-16)
    rk, kern = lx.rank_kernel_float(noise, scale=1.0)
    assert rk == 0 and kern.shape == (3, 3)
    assert lx.vol_float(noise, scale=1.0) == 1.0
