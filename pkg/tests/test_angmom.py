"""Recoupling coefficients against an exact rational oracle.

The oracle (tests/oracles.py) evaluates the same closed sums with
fractions.Fraction big-integer arithmetic, so agreement here checks the
log-factorial evaluation path end to end.  A sample of oracle values is
itself cross-checked against sympy.physics.wigner in
test_oracle_matches_sympy, keeping the two routes honest.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_legendre
from sympy import Rational
from sympy.physics.wigner import wigner_6j as sympy_6j

from oracles import cg_exact, racah_w_exact, six_j_exact, z_coeff_exact
from photoevap import angmom
from photoevap.angmom import (
    AngularMomentum,
    CouplingKey,
    clear_caches,
    clebsch_gordan,
    legendre_p,
    racah_w,
    triangle_ok,
    two_j_of,
    wigner_6j,
    z_coeff,
)

ORACLE_TOL = 1e-13


def spins_up_to(two_j_max):
    return [Fraction(t, 2) for t in range(two_j_max + 1)]


def projections(j):
    two_j = int(2 * j)
    return [j - k for k in range(two_j + 1)]


class TestSpinParsing:
    @pytest.mark.parametrize(
        "value,expected",
        [(0, 0), (1, 2), (0.5, 1), ("3/2", 3), (Fraction(5, 2), 5), (AngularMomentum(4), 4)],
    )
    def test_doubled_forms(self, value, expected):
        assert two_j_of(value) == expected

    @pytest.mark.parametrize("bad", [0.3, "2/3", -1, -0.5, "spin", True, 1000])
    def test_rejects_non_spins(self, bad):
        with pytest.raises(ValueError):
            two_j_of(bad)

    def test_angular_momentum_round_trip(self):
        am = AngularMomentum.from_value("7/2")
        assert am.two_j == 7
        assert am.value == Fraction(7, 2)
        assert str(am) == "7/2"
        assert AngularMomentum.from_value(am) == am

    def test_angular_momentum_validation(self):
        with pytest.raises(ValueError):
            AngularMomentum(-1)
        with pytest.raises(ValueError):
            AngularMomentum(2.0)


class TestTriangle:
    def test_basic_triads(self):
        assert triangle_ok(1, 1, 2)
        assert triangle_ok(1, 1, 0)
        assert triangle_ok(0.5, 0.5, 1)
        assert not triangle_ok(1, 1, 3)
        assert not triangle_ok(0.5, 1, 2)

    def test_integral_sum_required(self):
        # |a-b| <= c <= a+b alone is not enough: the sum must be integral
        assert not triangle_ok(0.5, 1, 1)
        assert triangle_ok(0.5, 1, 1.5)


class TestClebschGordan:
    @pytest.mark.parametrize(
        "args,expected",
        [
            ((0.5, 0.5, 0.5, -0.5, 1, 0), math.sqrt(0.5)),
            ((1, 0, 1, 0, 2, 0), math.sqrt(2.0 / 3.0)),
            ((1, 0, 1, 0, 0, 0), -math.sqrt(1.0 / 3.0)),
            ((1, -1, 1, 1, 2, 0), math.sqrt(1.0 / 6.0)),
            (("3/2", "1/2", 1, -1, "1/2", "-1/2"), math.sqrt(1.0 / 6.0)),
            ((1, 1, 1, 1, 2, 2), 1.0),
            ((0, 0, 0, 0, 0, 0), 1.0),
        ],
    )
    def test_frozen_values(self, args, expected):
        assert clebsch_gordan(*args) == pytest.approx(expected, abs=1e-14)

    def test_selection_rules_give_exact_zero(self):
        assert clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0
        assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0
        assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 1) == 0.0

    def test_invalid_projection_raises(self):
        with pytest.raises(ValueError):
            clebsch_gordan(1, 2, 1, 0, 2, 2)
        with pytest.raises(ValueError):
            clebsch_gordan(1, 0.5, 1, 0, 1, 0.5)

    def test_matches_exact_oracle_on_grid(self):
        checked = 0
        for j1 in spins_up_to(5):
            for j2 in spins_up_to(5):
                for j in spins_up_to(6):
                    if not triangle_ok(j1, j2, j):
                        continue
                    for m1 in projections(j1):
                        for m2 in projections(j2):
                            m = m1 + m2
                            if abs(m) > j:
                                continue
                            got = clebsch_gordan(j1, m1, j2, m2, j, m)
                            want = cg_exact(j1, m1, j2, m2, j, m).value()
                            assert got == pytest.approx(want, abs=ORACLE_TOL)
                            checked += 1
        assert checked >= 500

    def test_orthogonality(self):
        # sum over m1, m2 of C(J M) C(J' M') = delta_JJ' delta_MM'
        j1, j2 = Fraction(3, 2), 1
        couplings = [Fraction(1, 2), Fraction(3, 2), Fraction(5, 2)]
        for ja in couplings:
            for jb in couplings:
                for ma in projections(ja):
                    for mb in projections(jb):
                        total = 0.0
                        for m1 in projections(j1):
                            for m2 in projections(j2):
                                total += clebsch_gordan(j1, m1, j2, m2, ja, ma) * clebsch_gordan(
                                    j1, m1, j2, m2, jb, mb
                                )
                        want = 1.0 if (ja, ma) == (jb, mb) else 0.0
                        assert total == pytest.approx(want, abs=1e-12)

    @given(
        tj1=st.integers(0, 6),
        tj2=st.integers(0, 6),
        tj=st.integers(0, 8),
        data=st.data(),
    )
    def test_swap_symmetry(self, tj1, tj2, tj, data):
        if not angmom._triangle_two(tj1, tj2, tj):
            return
        tm1 = data.draw(st.integers(-tj1, tj1).filter(lambda t: (t - tj1) % 2 == 0))
        tm2 = data.draw(st.integers(-tj2, tj2).filter(lambda t: (t - tj2) % 2 == 0))
        if abs(tm1 + tm2) > tj:
            return
        j1, j2, j = Fraction(tj1, 2), Fraction(tj2, 2), Fraction(tj, 2)
        m1, m2 = Fraction(tm1, 2), Fraction(tm2, 2)
        direct = clebsch_gordan(j1, m1, j2, m2, j, m1 + m2)
        swapped = clebsch_gordan(j2, m2, j1, m1, j, m1 + m2)
        phase = (-1) ** ((tj1 + tj2 - tj) // 2)
        assert direct == pytest.approx(phase * swapped, abs=1e-14)

    @given(
        tj1=st.integers(0, 6),
        tj2=st.integers(0, 6),
        tj=st.integers(0, 8),
        data=st.data(),
    )
    def test_projection_negation_symmetry(self, tj1, tj2, tj, data):
        if not angmom._triangle_two(tj1, tj2, tj):
            return
        tm1 = data.draw(st.integers(-tj1, tj1).filter(lambda t: (t - tj1) % 2 == 0))
        tm2 = data.draw(st.integers(-tj2, tj2).filter(lambda t: (t - tj2) % 2 == 0))
        if abs(tm1 + tm2) > tj:
            return
        j1, j2, j = Fraction(tj1, 2), Fraction(tj2, 2), Fraction(tj, 2)
        m1, m2 = Fraction(tm1, 2), Fraction(tm2, 2)
        direct = clebsch_gordan(j1, m1, j2, m2, j, m1 + m2)
        negated = clebsch_gordan(j1, -m1, j2, -m2, j, -(m1 + m2))
        phase = (-1) ** ((tj1 + tj2 - tj) // 2)
        assert direct == pytest.approx(phase * negated, abs=1e-14)


class TestWigner6j:
    @pytest.mark.parametrize(
        "args,expected",
        [
            ((1, 1, 1, 1, 1, 1), 1.0 / 6.0),
            ((1, 1, 0, 1, 1, 1), -1.0 / 3.0),
            ((2, 1, 1, 1, 1, 1), 1.0 / 6.0),
            ((0.5, 0.5, 1, 0.5, 0.5, 1), 1.0 / 6.0),
        ],
    )
    def test_frozen_values(self, args, expected):
        assert wigner_6j(*args) == pytest.approx(expected, abs=1e-14)

    def test_triad_failure_gives_exact_zero(self):
        assert wigner_6j(1, 1, 3, 1, 1, 1) == 0.0
        assert wigner_6j(0.5, 0.5, 0.5, 0.5, 0.5, 0.5) == 0.0

    def test_zero_argument_reduction(self):
        # {a b c; 0 c b} = (-1)^(a+b+c) / sqrt((2b+1)(2c+1))
        for a, b, c in [(1, 1, 2), (2, Fraction(3, 2), Fraction(5, 2)), (0, 1, 1), (3, 2, 1)]:
            if not triangle_ok(a, b, c):
                continue
            got = wigner_6j(a, b, c, 0, c, b)
            phase = (-1) ** int(a + b + c)
            want = phase / math.sqrt((2 * b + 1) * (2 * c + 1))
            assert got == pytest.approx(want, abs=1e-14)

    def test_column_permutation_symmetry(self):
        cases = [
            (1, 2, 3, 2, 1, 2),
            (Fraction(3, 2), 1, Fraction(5, 2), 2, Fraction(1, 2), Fraction(3, 2)),
        ]
        for a, b, c, d, e, f in cases:
            base = wigner_6j(a, b, c, d, e, f)
            assert wigner_6j(b, a, c, e, d, f) == pytest.approx(base, abs=1e-14)
            assert wigner_6j(c, b, a, f, e, d) == pytest.approx(base, abs=1e-14)
            # swapping upper and lower entries in two columns
            assert wigner_6j(a, e, f, d, b, c) == pytest.approx(base, abs=1e-14)

    def test_matches_exact_oracle_on_grid(self):
        checked = 0
        grid = [Fraction(t, 2) for t in range(4)]
        for a in grid:
            for b in grid:
                for c in grid:
                    for d in grid:
                        for e in grid:
                            for f in grid:
                                got = wigner_6j(a, b, c, d, e, f)
                                want = six_j_exact(a, b, c, d, e, f).value()
                                assert got == pytest.approx(want, abs=ORACLE_TOL)
                                checked += 1
        assert checked == 4**6

    def test_orthogonality(self):
        # sum_x (2x+1) {a b x; c d p} {a b x; c d q} = delta_pq / (2p+1),
        # for p compatible with the fixed triads (a, d, p) and (b, c, p)
        a, b, c, d = 1, Fraction(3, 2), Fraction(3, 2), 1
        ps = [0, 1, 2]
        xs = spins_up_to(10)
        for p in ps:
            for q in ps:
                total = 0.0
                for x in xs:
                    total += (
                        (2 * x + 1)
                        * wigner_6j(a, b, x, c, d, p)
                        * wigner_6j(a, b, x, c, d, q)
                    )
                want = 1.0 / (2 * p + 1) if p == q else 0.0
                assert total == pytest.approx(want, abs=1e-12)


class TestRacahW:
    def test_matches_exact_oracle(self):
        grid = [Fraction(t, 2) for t in range(4)]
        for a in grid:
            for b in grid:
                for c in grid:
                    for d in grid:
                        if (a + b + c + d).denominator != 1:
                            continue
                        for e in grid:
                            for f in grid:
                                got = racah_w(a, b, c, d, e, f)
                                want = racah_w_exact(a, b, c, d, e, f).value()
                                assert got == pytest.approx(want, abs=ORACLE_TOL)

    def test_pair_swap_symmetry(self):
        # W(a b c d; e f) = W(b a d c; e f) = W(c d a b; e f)
        args = (1, Fraction(3, 2), 2, Fraction(3, 2), Fraction(1, 2), 2)
        a, b, c, d, e, f = args
        base = racah_w(a, b, c, d, e, f)
        assert base != 0.0
        assert racah_w(b, a, d, c, e, f) == pytest.approx(base, abs=1e-14)
        assert racah_w(c, d, a, b, e, f) == pytest.approx(base, abs=1e-14)


class TestZCoeff:
    @pytest.mark.parametrize(
        "args,expected",
        [
            ((0, 0.5, 2, 1.5, 0.5, 2), 2.0),
            ((1, 0.5, 1, 1.5, 0.5, 2), 2.0),
            ((1, 1.5, 3, 2.5, 0.5, 2), -math.sqrt(12.0 / 7.0)),
        ],
    )
    def test_frozen_values(self, args, expected):
        assert z_coeff(*args) == pytest.approx(expected, abs=1e-13)

    def test_odd_parity_gives_exact_zero(self):
        assert z_coeff(0, 0.5, 1, 0.5, 0.5, 2) == 0.0
        assert z_coeff(1, 1.5, 2, 2.5, 0.5, 2) == 0.0

    def test_non_integer_orbital_raises(self):
        with pytest.raises(ValueError):
            z_coeff(0.5, 0.5, 1, 1.5, 0.5, 1)
        with pytest.raises(ValueError):
            z_coeff(1, 0.5, 1, 1.5, 0.5, 1.5)

    def test_matches_exact_oracle(self):
        checked = 0
        s = Fraction(1, 2)
        for l1 in range(5):
            for l2 in range(5):
                for big_l in range(5):
                    for j1 in {abs(l1 - s), l1 + s}:
                        for j2 in {abs(l2 - s), l2 + s}:
                            got = z_coeff(l1, j1, l2, j2, s, big_l)
                            want = z_coeff_exact(l1, j1, l2, j2, s, big_l).value()
                            assert got == pytest.approx(want, abs=ORACLE_TOL)
                            checked += 1
        assert checked >= 250


class TestOracleSelfConsistency:
    def test_oracle_matches_sympy(self):
        # keeps the oracle honest through an unrelated implementation
        rng = np.random.default_rng(11)
        spins = [Fraction(t, 2) for t in range(6)]
        checked = 0
        while checked < 60:
            a, b, c, d, e, f = (spins[i] for i in rng.integers(0, len(spins), 6))
            try:
                want = float(
                    sympy_6j(*(Rational(x.numerator, x.denominator) for x in (a, b, c, d, e, f)))
                )
            except ValueError:
                # sympy raises on non-integral triads; the value is zero
                want = 0.0
            got = six_j_exact(a, b, c, d, e, f).value()
            assert got == pytest.approx(want, abs=1e-13)
            checked += 1


class TestCache:
    def test_cache_round_trip_is_bit_identical(self):
        clear_caches()
        args = (Fraction(3, 2), Fraction(1, 2), 1, 0, Fraction(3, 2), Fraction(1, 2))
        first = clebsch_gordan(*args)
        direct = angmom._cg_two(3, 1, 2, 0, 3, 1)
        cached = clebsch_gordan(*args)
        assert first == direct
        assert math.copysign(1.0, first) == math.copysign(1.0, direct)
        assert cached == first
        key = CouplingKey("cg", (3, 1, 2, 0, 3, 1))
        assert key in angmom._CACHE

    def test_clear_caches_empties(self):
        clebsch_gordan(1, 0, 1, 0, 2, 0)
        assert angmom._CACHE
        clear_caches()
        assert not angmom._CACHE


class TestLegendre:
    def test_endpoint_values(self):
        for order in range(8):
            assert legendre_p(order, 1.0) == pytest.approx(1.0, abs=1e-14)
            assert legendre_p(order, -1.0) == pytest.approx((-1.0) ** order, abs=1e-14)

    def test_matches_scipy(self):
        x = np.linspace(-1.0, 1.0, 101)
        for order in range(13):
            got = legendre_p(order, x)
            want = eval_legendre(order, x)
            assert np.max(np.abs(got - want)) < 1e-13

    def test_scalar_and_array_forms(self):
        scalar = legendre_p(3, 0.25)
        assert isinstance(scalar, float)
        arr = legendre_p(3, np.array([[0.25, -0.5], [0.0, 1.0]]))
        assert arr.shape == (2, 2)
        assert arr[0, 0] == pytest.approx(scalar, abs=1e-15)

    def test_domain_and_order_validation(self):
        with pytest.raises(ValueError):
            legendre_p(2, 1.5)
        with pytest.raises(ValueError):
            legendre_p(2, np.array([0.0, -1.01]))
        with pytest.raises(ValueError):
            legendre_p(-1, 0.5)
        with pytest.raises(ValueError):
            legendre_p(2.5, 0.5)

    @given(
        order=st.integers(1, 20),
        x=st.floats(min_value=-1.0, max_value=1.0, allow_nan=False),
    )
    def test_bonnet_recurrence_closes(self, order, x):
        lhs = (order + 1) * legendre_p(order + 1, x)
        rhs = (2 * order + 1) * x * legendre_p(order, x) - order * legendre_p(order - 1, x)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_bounded_by_one(self):
        x = np.linspace(-1.0, 1.0, 201)
        for order in range(10):
            assert np.max(np.abs(legendre_p(order, x))) <= 1.0 + 1e-12
