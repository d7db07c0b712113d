import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_bounds import (HomogeneousSpectrum, Lattice2, Spectrum,
                             SpectrumRangeError, TailModel, heat_trace,
                             interp_partial_sum, legendre_of_riesz,
                             rectangle_neumann_exact, riesz_mean_1,
                             shifted_spectrum, sphere_spectrum,
                             torus_spectrum, truncated_laplace_transform)

PI2 = math.pi ** 2


def brute_rectangle(lx, ly, count):
    vals = sorted(PI2 * (m * m / lx ** 2 + n * n / ly ** 2)
                  for m in range(count + 1) for n in range(count + 1))
    return vals[:count]


class TestRectangle:
    def test_unit_square_first_ten(self):
        s = rectangle_neumann_exact(1.0, 1.0, count=10)
        expected = PI2 * np.array([0, 1, 1, 2, 4, 4, 5, 5, 8, 9], dtype=float)
        assert s.values == pytest.approx(expected, rel=1e-14)
        assert s.source == "exact-rectangle"

    def test_golden_rectangle_brute_force(self):
        lx, ly = 1.0, (1 + math.sqrt(5)) / 2
        s = rectangle_neumann_exact(lx, ly, count=40)
        assert s.values == pytest.approx(brute_rectangle(lx, ly, 40), rel=1e-12)

    def test_cutoff_mode(self):
        s = rectangle_neumann_exact(1.0, 2.0, cutoff=10.0)
        brute = [v for v in brute_rectangle(1.0, 2.0, 200) if v <= 10.0]
        assert s.values == pytest.approx(brute, rel=1e-12)
        assert s.cutoff == 10.0

    def test_exactly_one_mode_required(self):
        with pytest.raises(ValueError):
            rectangle_neumann_exact(1.0, 1.0)
        with pytest.raises(ValueError):
            rectangle_neumann_exact(1.0, 1.0, count=5, cutoff=3.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            rectangle_neumann_exact(-1.0, 1.0, count=5)


def brute_torus_levels(lat: Lattice2, cutoff: float, radius: int = 40):
    dual = lat.dual()
    vals = []
    for m in range(-radius, radius + 1):
        for n in range(-radius, radius + 1):
            x = m * dual.e1[0] + n * dual.e2[0]
            y = m * dual.e1[1] + n * dual.e2[1]
            v = 4 * PI2 * (x * x + y * y)
            if v <= cutoff * (1 + 1e-12):
                vals.append(v)
    vals.sort()
    levels = []
    for v in vals:
        if levels and abs(v - levels[-1][0]) <= 1e-9 * (1 + abs(v)):
            levels[-1][1] += 1
        else:
            levels.append([v, 1])
    return [(v, m) for v, m in levels]


class TestTorus:
    def test_unit_square_lattice_multiplicities(self):
        lat = Lattice2((1.0, 0.0), (0.0, 1.0))
        s = torus_spectrum(lat, 4 * PI2 * 4 + 1.0)
        got = [(v / (4 * PI2), m) for v, m in s.levels]
        # |m|^2 takes 0, 1, 2, 4 below 4.1 with 1, 4, 4, 4 lattice points
        assert [(round(v, 9), m) for v, m in got] == \
            [(0.0, 1), (1.0, 4), (2.0, 4), (4.0, 4)]

    def test_random_lattices_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(6):
            basis = rng.uniform(-1.6, 1.6, size=(2, 2))
            while abs(np.linalg.det(basis)) < 0.4:
                basis = rng.uniform(-1.6, 1.6, size=(2, 2))
            lat = Lattice2(tuple(basis[0]), tuple(basis[1]))
            cutoff = float(rng.uniform(100.0, 900.0))
            s = torus_spectrum(lat, cutoff)
            brute = brute_torus_levels(lat, cutoff)
            assert len(s.levels) == len(brute)
            for (v1, m1), (v2, m2) in zip(s.levels, brute):
                assert v1 == pytest.approx(v2, rel=1e-11)
                assert m1 == m2

    def test_volume_is_covolume(self):
        lat = Lattice2((2.0, 0.0), (0.0, 0.5))
        s = torus_spectrum(lat, 50.0)
        assert s.manifold_volume == pytest.approx(1.0)


class TestSphere:
    def test_s2_levels(self):
        s = sphere_spectrum(2, 5)
        for l, (v, m) in enumerate(s.levels):
            assert v == pytest.approx(l * (l + 1))
            assert m == 2 * l + 1
        assert s.manifold_volume == pytest.approx(4 * math.pi)

    def test_s3_levels(self):
        s = sphere_spectrum(3, 4)
        for l, (v, m) in enumerate(s.levels):
            assert v == pytest.approx(l * (l + 2))
            assert m == (l + 1) ** 2
        assert s.manifold_volume == pytest.approx(2 * math.pi ** 2)

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            sphere_spectrum(1, 3)


class TestSpectrumType:
    def test_sorted_required(self):
        with pytest.raises(ValueError):
            Spectrum(np.array([1.0, 0.5]), cutoff=2.0)

    def test_cutoff_consistency(self):
        with pytest.raises(ValueError):
            Spectrum(np.array([0.0, 5.0]), cutoff=4.0)

    def test_partial_sum_range(self):
        s = Spectrum(np.array([0.0, 1.0, 3.0]), cutoff=3.0)
        assert s.partial_sum(2) == 1.0
        with pytest.raises(SpectrumRangeError):
            s.partial_sum(4)

    def test_counting(self):
        s = Spectrum(np.array([0.0, 1.0, 1.0, 3.0]), cutoff=3.0)
        assert s.counting(1.0) == 3
        assert s.counting(0.5) == 1
        assert s.counting(3.0) == 4

    def test_flatten_multiplicities(self):
        h = HomogeneousSpectrum(((0.0, 1), (2.0, 3)), manifold_volume=1.0,
                                cutoff=2.0, source="t")
        flat = h.flatten()
        assert list(flat.values) == [0.0, 2.0, 2.0, 2.0]
        with pytest.raises(SpectrumRangeError):
            h.flatten(cutoff=5.0)

    def test_shifted_spectrum(self):
        h = HomogeneousSpectrum(((0.0, 1), (2.0, 2)), manifold_volume=1.0,
                                cutoff=2.0, source="t")
        sh = shifted_spectrum(h, 2.0, 0.5)
        assert sh.levels == ((0.5, 1), (4.5, 2))
        assert sh.cutoff == pytest.approx(2.0 * 2.0 + 0.5)


class TestFunctionals:
    vals = np.array([0.0, 1.0, 1.0, 2.5, 4.0])

    def spectrum(self):
        return Spectrum(self.vals.copy(), cutoff=4.0, source="test")

    def test_interp_partial_sum(self):
        s = self.spectrum()
        assert interp_partial_sum(s, 3.0) == 2.0
        assert interp_partial_sum(s, 3.5) == pytest.approx(2.0 + 0.5 * 2.5)
        with pytest.raises(SpectrumRangeError):
            interp_partial_sum(s, 5.5)

    def test_riesz_mean(self):
        s = self.spectrum()
        for z in (0.0, 0.7, 1.0, 3.3):
            assert riesz_mean_1(s, z) == pytest.approx(
                np.clip(z - self.vals, 0, None).sum())
        with pytest.raises(SpectrumRangeError):
            riesz_mean_1(s, 4.5)  # beyond the completeness cutoff

    def test_legendre_recovers_partial_sums(self):
        s = self.spectrum()
        for p in np.linspace(0.2, 5.0, 25):
            assert legendre_of_riesz(s, float(p)) == pytest.approx(
                interp_partial_sum(s, float(p)), abs=1e-12)

    def test_truncated_laplace_identity(self):
        s = self.spectrum()
        for t in (0.25, 0.5, 1.0, 2.0):
            lhs = truncated_laplace_transform(s, t)
            rhs = sum(math.exp(-t * v) for v in self.vals) - \
                math.exp(-t * s.cutoff) * (t * riesz_mean_1(s, s.cutoff) +
                                           s.counting(s.cutoff))
            assert lhs == pytest.approx(rhs, rel=1e-13)


class TestTailModel:
    def test_counting(self):
        tm = TailModel(volume=2.0, nu=3, w_mean=1.5, shift=1.0)
        kappa = (4 * math.pi / 3) * 2.0 / (2 * math.pi) ** 3
        assert tm.counting(9.0) == pytest.approx(
            kappa * ((9.0 - 1.0) / 1.5) ** 1.5, rel=1e-13)
        assert tm.counting(0.5) == 0.0

    def test_tail_integral_frozen_quadrature(self):
        # references computed with scipy.integrate.quad on
        # int_Z^inf e^(-z t) dN_W(z) for the same parameters
        tm2 = TailModel(volume=1.0, nu=2, w_mean=2.0)
        assert tm2.tail(0.5, 10.0) == pytest.approx(
            5.361887855976707e-4, rel=1e-9)
        tm3 = TailModel(volume=2.0, nu=3, w_mean=1.5, shift=1.0)
        assert tm3.tail(0.4, 8.0) == pytest.approx(
            8.598007607016595e-3, rel=1e-9)

    def test_tail_below_shift(self):
        tm = TailModel(volume=1.0, nu=2, shift=4.0)
        # cutting below the spectrum start integrates the whole Weyl trace:
        # t^(-nu/2) prefactor times the shift decay
        full = tm.tail(1.0, 0.0)
        kappa = math.pi / (4 * math.pi ** 2)
        assert full == pytest.approx(kappa * math.exp(-4.0), rel=1e-12)

    def test_heat_trace_combines(self):
        s = Spectrum(np.array([0.0, 1.0]), cutoff=2.0)
        tm = TailModel(volume=1.0, nu=2)
        r = heat_trace(s, 0.7, tail_model=tm)
        assert r.truncated == pytest.approx(1 + math.exp(-0.7))
        assert r.tail == pytest.approx(tm.tail(0.7, 2.0))
        assert r.total == pytest.approx(r.truncated + r.tail)
        bare = heat_trace(s, 0.7)
        assert bare.tail == 0.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-5.0, max_value=50.0, allow_nan=False),
                min_size=1, max_size=12))
def test_legendre_duality_property(raw):
    vals = np.sort(np.array(raw, dtype=float))
    s = Spectrum(vals, cutoff=float(vals[-1]))
    for p in (0.5, 1.0, len(vals) / 2, float(len(vals))):
        assert legendre_of_riesz(s, p) == pytest.approx(
            interp_partial_sum(s, p), abs=1e-9 * (1 + abs(vals).max()))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=30.0, allow_nan=False),
                min_size=1, max_size=10),
       st.floats(min_value=0.1, max_value=3.0))
def test_laplace_identity_property(raw, t):
    vals = np.sort(np.array(raw, dtype=float))
    s = Spectrum(vals, cutoff=float(vals[-1]))
    z = s.cutoff
    lhs = truncated_laplace_transform(s, t)
    rhs = float(np.exp(-t * vals).sum()) - math.exp(-t * z) * (
        t * riesz_mean_1(s, z) + s.counting(z))
    assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(rhs)))
