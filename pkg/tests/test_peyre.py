import math
from fractions import Fraction

import mpmath
import pytest
from scipy import integrate

from artifact import specfun as sf
from artifact.arith import BundleParams
from artifact.eisenstein import eisenstein_e, kronecker_constants, laurent_at
from artifact.errors import PoleProximity
from artifact.localint import primes_below
from artifact.peyre import (alpha_invariant, blowup_point_count, blowup_point_count_bruteforce,
                            height_zeta_main_factor, leading_constant, local_density,
                            manin_constants, manin_constants_laurent, manin_constants_mp,
                            manin_constants_rederived, predicted_count, secondary_constant,
                            tamagawa_anticanonical)

# 25-digit evaluations, frozen
C_CLOSED_FORM = -0.980129700890181059077198653606
A_LAURENT = 2.62184718928969352240983774498
C_LAURENT = 1.78993981670898605372671146616
ZETA3 = 1.2020569031595942854


class TestAlpha:
    def test_values(self):
        assert alpha_invariant(BundleParams(2, 1)) == Fraction(1, 12)
        assert alpha_invariant(BundleParams(1, 1)) == Fraction(1, 2)
        assert alpha_invariant(BundleParams(1, 0)) == 1
        assert alpha_invariant(BundleParams(4, 2)) == Fraction(1, 12)

    def test_cone_integral(self):
        val, err = integrate.dblquad(lambda y, x: math.exp(-(4 * y - x)), 0, math.inf, lambda x: x, lambda x: math.inf)
        assert val == pytest.approx(1 / 12, abs=1e-10)
        # 1-D reduction: int_0^inf e^{-3x}/4 dx
        assert integrate.quad(lambda x: math.exp(-3 * x) / 4, 0, math.inf)[0] == pytest.approx(1 / 12, abs=1e-12)


class TestDensities:
    def test_examples(self):
        assert local_density(2) == Fraction(21, 8)
        assert local_density(3) == Fraction(52, 27)
        assert local_density(5) == Fraction(186, 125)

    def test_point_counts(self):
        for p in primes_below(50):
            p = int(p)
            n = p**3 + 2 * p**2 + 2 * p + 1
            assert blowup_point_count(p) == n
            assert local_density(p) == Fraction(n, p**3)

    @pytest.mark.parametrize("p", [2, 3, 5, 7])
    def test_brute_force(self, p):
        assert blowup_point_count_bruteforce(p) == blowup_point_count(p)

    def test_telescoping(self):
        for p in primes_below(100):
            p = int(p)
            lam = (1 - Fraction(1, p)) ** 2
            assert lam * local_density(p) == (1 - Fraction(1, p**2)) * (1 - Fraction(1, p**3))

    def test_tamagawa(self):
        limit = 12 / ZETA3
        assert limit == pytest.approx(9.9829, abs=1e-4)
        assert abs(tamagawa_anticanonical(10**4) - limit) < 1e-4
        assert tamagawa_anticanonical(2) == pytest.approx(2 * math.pi**2)
        errs = [abs(tamagawa_anticanonical(P) - limit) for P in (10**2, 10**3, 10**4)]
        assert errs == sorted(errs, reverse=True)


class TestLeadingConstant:
    def test_anticanonical(self):
        r = leading_constant(BundleParams(2, 1))
        assert r.c_value == pytest.approx(1 / ZETA3, rel=1e-14)
        assert r.b_L == 2 and r.ingredients["tamagawa"] == pytest.approx(12 / ZETA3)

    def test_rigid(self):
        r = leading_constant(BundleParams(1, 1))
        assert r.c_value == pytest.approx(45 / math.pi**2, rel=1e-13)
        assert r.c_value == pytest.approx(4.5595, abs=1e-4)

    def test_non_rigid(self):
        r = leading_constant(BundleParams(1, 0))
        assert sf.lambda_value(3) == pytest.approx(ZETA3 / (2 * math.pi), rel=1e-14)
        assert r.ingredients["eisenstein_value"] == pytest.approx(2.784201545330791, abs=1e-12)
        assert r.c_value == pytest.approx(14.554, abs=2e-3)

    def test_poles(self):
        with pytest.raises(PoleProximity):
            leading_constant(BundleParams(2, Fraction(101, 100)))
        with pytest.raises(PoleProximity):
            leading_constant(BundleParams(2, Fraction(99, 100)))

    def test_growth_towards_line(self):
        vals = [leading_constant(BundleParams(2, 1 + e)).c_value for e in (0.5, 0.2, 0.1, 0.06)]
        assert vals == sorted(vals)
        assert vals[-1] > 5 * vals[0]

    def test_positive_on_grid(self):
        xs = [Fraction(1, 2), 1, Fraction(3, 2), 2, 3]
        ys = [Fraction(-1, 4), 0, Fraction(1, 3), 1, 2]
        n = 0
        for x in xs:
            for y in ys:
                L = BundleParams(x, y)
                try:
                    r = leading_constant(L)
                except PoleProximity:
                    continue
                assert r.c_value > 0
                n += 1
        assert n >= 20

    def test_rigid_residue(self):
        # residue at s = a(L) = 2 of Lambda(2s-2)/Lambda(2s) E(s-3/2, e) for (x,y) = (1,1)
        f = lambda s: sf.lambda_value(2 * s - 2) / sf.lambda_value(2 * s) * eisenstein_e(s - 1.5)
        res = laurent_at(f, 2.0, 0, 0.1)[-1]
        assert res == pytest.approx(45 / math.pi**2, abs=1e-6)

    def test_report_json(self):
        d = leading_constant(BundleParams(1, 1)).to_json()
        assert d["a_L"] == "2" and d["bundle"]["case"] == "rigid"


class TestSecondaryConstants:
    def test_closed_form_golden(self):
        C, A = manin_constants()
        assert C == pytest.approx(C_CLOSED_FORM, abs=1e-15)
        assert A - C == pytest.approx(1 / ZETA3, abs=1e-14)

    def test_closed_form_precision(self):
        C, A = manin_constants_mp()
        with mpmath.workdps(30):
            assert abs(C - mpmath.mpf("-0.980129700890181059077198653606")) < 1e-23
            assert abs((A - C) - 1 / mpmath.zeta(3)) < 1e-23

    def test_laurent_route(self):
        C, A, c2 = manin_constants_laurent()
        assert c2 == pytest.approx(1 / ZETA3, abs=1e-8)
        assert A == pytest.approx(A_LAURENT, abs=1e-9)
        assert C == pytest.approx(C_LAURENT, abs=1e-9)
        # radius independence
        C2, A2, _ = manin_constants_laurent(0.05)
        assert abs(A2 - A) < 1e-8

    def test_rederived_closed_form_matches_laurent(self):
        Cr, Ar = manin_constants_rederived()
        C, A, _ = manin_constants_laurent()
        assert abs(Ar - A) < 1e-10
        assert abs(Cr - C) < 1e-10

    def test_product_of_expansions(self):
        # A = res(f1) const(f2) + const(f1) res(f2) with f1 = Lambda(3w-2)/Lambda(3w) and
        # f2 = E(2w - 3/2, e); the constant of f2 comes from the Kronecker formula
        f1 = laurent_at(lambda w: sf.lambda_value(3 * w - 2) / sf.lambda_value(3 * w), 1.0, 0, 0.1)
        assert f1[-1] == pytest.approx(1 / (3 * sf.lambda_value(3)), abs=1e-10)
        _, c0 = kronecker_constants()
        f2_res, f2_const = 3 / math.pi / 2, c0
        A = f1[-1] * f2_const + f1[0] * f2_res
        assert A == pytest.approx(A_LAURENT, abs=1e-9)
        assert f1[-1] * f2_res == pytest.approx(1 / ZETA3, abs=1e-10)

    def test_main_factor_double_pole(self):
        h = 1e-3
        assert (h**2 * height_zeta_main_factor(1 + h)).real == pytest.approx(1 / ZETA3, rel=5e-3)

    def test_routes(self):
        assert secondary_constant("closed-form") == manin_constants()[0]
        with pytest.raises(ValueError):
            secondary_constant("other")


class TestPredictedCount:
    def test_anticanonical_at_e(self):
        C, _ = manin_constants()
        assert predicted_count(BundleParams(2, 1), math.e) == pytest.approx(math.e / ZETA3 + C * math.e, rel=1e-14)

    def test_rigid(self):
        assert predicted_count(BundleParams(1, 1), 100) == pytest.approx(45 / math.pi**2 / 2 * 1e4, rel=1e-13)
        assert predicted_count(BundleParams(1, 1), 100) == pytest.approx(22798, abs=1)

    def test_non_rigid(self):
        assert predicted_count(BundleParams(1, 0), 50) == pytest.approx(14.5531 / 3 * 125000, rel=1e-5)

    def test_scaled_anticanonical(self):
        # H_{4D+2E} = H_{-K}^2, so N_{(4,2)}(B) = N_{-K}(B^{1/2})
        assert predicted_count(BundleParams(4, 2), 10**6) == pytest.approx(predicted_count(BundleParams(2, 1), 10**3))

    def test_domain(self):
        with pytest.raises(ValueError):
            predicted_count(BundleParams(2, 1), 1)
