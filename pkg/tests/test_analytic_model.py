import math

import numpy as np
import pytest

from torsionlab import linalg_exact as lx
from torsionlab.analytic_model import (
    CircleModel,
    analytic_torsion_circle,
    eigenvalue_factor_closed,
    eigenvalue_factor_hurwitz,
    eigenvalue_factor_raw,
    eigenvalue_factor_truncated,
    zeta_det_laplacian,
)
from torsionlab.corpus import corpus_get, random_invertible, rotation_matrix
from torsionlab.errors import ZeroModeError
from torsionlab.euler_struct import canonical_spray
from torsionlab.flat_bundle import FlatBundle
from torsionlab.torsion_engine import assemble, t_comb


class TestZetaDet:
    def test_minus_one_gives_four(self):
        # oracle first: the Hurwitz-zeta derivative route at theta = pi
        hur = eigenvalue_factor_hurwitz(-1.0)
        assert abs(hur - 4.0) <= 1e-10
        res = zeta_det_laplacian(CircleModel([[-1.0]]))
        assert abs(res.value - 4.0) <= 1e-12
        assert abs(res.value - 4.0 * math.sin(math.pi / 2) ** 2) <= 1e-12

    def test_identity_needs_zero_mode_flag(self):
        model = CircleModel([[1.0]])
        with pytest.raises(ZeroModeError):
            zeta_det_laplacian(model)
        res = zeta_det_laplacian(model, allow_zero_modes=True)
        assert res.zero_modes == 1
        assert abs(res.value - 1.0) <= 1e-12  # L^2 with L = 1

    def test_identity_circumference_scales(self):
        res = zeta_det_laplacian(CircleModel([[1.0]], circumference=2.0), allow_zero_modes=True)
        assert abs(res.value - 4.0) <= 1e-12

    def test_rotation_by_two_pi_thirds(self):
        model = CircleModel(rotation_matrix(2 * math.pi / 3))
        res = zeta_det_laplacian(model, truncation=20000)
        per_line = 4 * math.sin(math.pi / 3) ** 2
        assert abs(res.value - per_line**2) <= 1e-9
        assert res.discrepancy <= 1e-9

    def test_hurwitz_oracle_matches_raw_factor(self):
        rng = np.random.default_rng(51)
        for _ in range(10):
            nu = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            if abs(nu) < 0.2 or abs(nu - 1) < 0.1:
                continue
            raw = eigenvalue_factor_raw(nu)
            hur = eigenvalue_factor_hurwitz(nu)
            assert abs(raw - hur) <= 1e-8 * max(abs(raw), 1.0)

    def test_truncated_route_converges_to_raw(self):
        for nu in (-1.0, 0.5, complex(0.3, 1.1), 2.5):
            raw = eigenvalue_factor_raw(nu)
            tr = eigenvalue_factor_truncated(nu, 100000)
            assert abs(tr - raw) <= 1e-8 * max(abs(raw), 1.0)

    def test_modulus_correction(self):
        # |lambda|-corrected factor equals |1 - nu|^2 for off-unit eigenvalues
        nu = 2.5
        assert abs(
            eigenvalue_factor_closed(nu) - abs(eigenvalue_factor_raw(nu)) * abs(nu)
        ) <= 1e-12


class TestAnalyticTorsion:
    def test_holonomy_three_matches_combinatorial(self):
        model = CircleModel([[3.0]])
        res = analytic_torsion_circle(model)
        cx = corpus_get("circle-1cell").complex
        tc = t_comb(assemble(cx, FlatBundle(1, {"e": [[3]]}), canonical_spray(cx)), "eig")
        assert abs(res.value - tc) <= 1e-6 * tc
        assert abs(res.value - 2.0) <= 1e-9

    def test_orthogonal_no_eigenvalue_one(self):
        h = rotation_matrix(2 * math.pi / 5)
        res = analytic_torsion_circle(CircleModel(h))
        want = abs(np.linalg.det(h - np.eye(2)))
        assert abs(res.value - want) <= 1e-6 * want

    def test_identity_reports_harmonic_dims(self):
        res = analytic_torsion_circle(CircleModel(np.eye(2)))
        assert not res.acyclic
        assert res.harmonic_dims == {0: 2, 1: 2}

    def test_scale_invariance_acyclic(self):
        vals = [
            analytic_torsion_circle(CircleModel([[2.0]], circumference=c)).value
            for c in (1.0, 2.0, math.pi)
        ]
        assert max(vals) - min(vals) <= 1e-9 * max(vals)

    def test_cheeger_muller_random_rational(self):
        rng = np.random.default_rng(52)
        cx = corpus_get("circle-1cell").complex
        spray = canonical_spray(cx)
        checked = 0
        while checked < 12:
            k = int(rng.choice([1, 2, 3]))
            m = random_invertible(rng, k)
            if lx.det(lx.msub(m, lx.identity(k))) == 0:
                continue
            an = analytic_torsion_circle(CircleModel(lx.to_float(m))).value
            tc = t_comb(assemble(cx, FlatBundle(k, {"e": m}), spray), "eig")
            assert abs(an - tc) <= 1e-6 * max(an, tc)
            checked += 1

    def test_truncation_error_monotone_without_tail(self):
        model = CircleModel([[3.0]])
        errs = [
            zeta_det_laplacian(model, truncation=n, tail_correction=False).discrepancy
            for n in (1000, 4000, 16000)
        ]
        assert errs[0] > errs[1] > errs[2]


class TestModelValidation:
    def test_singular_holonomy_rejected(self):
        with pytest.raises(ValueError):
            CircleModel([[0.0]])

    def test_nonsquare_rejected(self):
        with pytest.raises(ValueError):
            CircleModel(np.ones((2, 3)))

    def test_negative_circumference_rejected(self):
        with pytest.raises(ValueError):
            CircleModel([[2.0]], circumference=-1.0)
