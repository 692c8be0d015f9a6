"""Cycle-amplitude theory for two queues.

The harmonic coefficients were cross-derived once with a truncated series
algebra over complex Fourier harmonics (a compact float version of it is
embedded below and re-run here); the resulting values are frozen into
FROZEN.  The cos-tau correction a2 follows the tuned truncation convention
used for all published comparisons and is pinned by double transcription
plus the simulation-agreement checks in the acceptance suite.
"""

import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

from delayq import (DegenerateRegimeError, HopfSide, SystemParams,
                    UnsupportedRegimeError, critical_delay, critical_frequency,
                    first_order_amplitude, hopf_side, second_order_amplitude,
                    slow_flow)

FIG = SystemParams(10.0, 1.0, 1.0, 2, 0.0, 0.0)

FROZEN = [
    dict(lam=10, mu=1, th=1, w=0.0, excess=0.2,
         base=2.765275169717339, w1=-2.4388838235291295,
         a1=-0.13488369758060773, a2=0.0494343500371687,
         a3=0.04496123252686924, a4=0.10554324131839495),
    dict(lam=10, mu=1, th=1, w=0.1, excess=0.2,
         base=2.231186258810517, w1=-3.1945029170027275,
         a1=-0.026239237327179574, a2=0.4221063534280636,
         a3=0.00874641244239319, a4=0.07266960870157979),
    dict(lam=10, mu=1, th=1, w=0.19, excess=0.2,
         base=0.43190952957312684, w1=-18.62311817555942,
         a1=0.021017446147968733, a2=0.5991606722984644,
         a3=-0.007005815382656244, a4=0.004566220206750953),
    dict(lam=10, mu=1, th=2, w=0.05, excess=0.1,
         base=1.18440018906278, w1=-7.199328618471199,
         a1=0.004862978917866762, a2=0.2836855479185736,
         a3=-0.0016209929726222541, a4=0.0416918965709729),
    dict(lam=8, mu=0.7, th=1.3, w=0.1, excess=0.15,
         base=1.542147729833744, w1=-2.870876388626107,
         a1=0.0011286747968972065, a2=0.28877448047015,
         a3=-0.0003762249322990688, a4=0.04057950261700153),
]


def at(lam, mu, th, w, delay):
    return SystemParams(lam, mu, th, 2, w, delay)


# ---------------------------------------------------------------------------
# compact derivation oracle: truncated eps-series over Fourier harmonics
# ---------------------------------------------------------------------------

def _series_orders(lam, mu, th, d, d1, base, a1, a2, a3, a4, w1):
    """First-harmonic residual coefficients of the strained-time expansion,
    orders eps^0, eps^1 (plus the third-harmonic eps^1 coefficient)."""
    w0 = math.sqrt((lam * th) ** 2 - 4 * mu ** 2) / math.sqrt(4 - (d * lam * th) ** 2)
    x = -(d * (lam * th) ** 2 + 4 * mu) / (2 * lam * th * (1 + d * mu))
    d0 = math.acos(x) / w0
    NORD = 2

    def zero():
        return [dict() for _ in range(NORD)]

    def add(p, q):
        r = zero()
        for j in range(NORD):
            for k, c in p[j].items():
                r[j][k] = r[j].get(k, 0j) + c
            for k, c in q[j].items():
                r[j][k] = r[j].get(k, 0j) + c
        return r

    def smul(p, s):
        return [{k: c * s for k, c in p[j].items()} for j in range(NORD)]

    def mul(p, q):
        r = zero()
        for j1 in range(NORD):
            for j2 in range(NORD - j1):
                for k1, c1 in p[j1].items():
                    for k2, c2 in q[j2].items():
                        r[j1 + j2][k1 + k2] = r[j1 + j2].get(k1 + k2, 0j) + c1 * c2
        return r

    def series_mul(p, scalars):
        r = zero()
        for j1 in range(NORD):
            for j2 in range(NORD - j1):
                for k, c in p[j1].items():
                    r[j1 + j2][k] = r[j1 + j2].get(k, 0j) + c * scalars[j2]
        return r

    def dtau(p):
        return [{k: c * 1j * k for k, c in p[j].items()} for j in range(NORD)]

    def delayed(p, phi0, phi1):
        r = zero()
        for j in range(NORD):
            for k, c in p[j].items():
                base_f = cmath.exp(-1j * k * phi0)
                for dj, f in ((0, 1.0), (1, -1j * k * phi1)):
                    if j + dj < NORD:
                        r[j + dj][k] = r[j + dj].get(k, 0j) + c * base_f * f
        return r

    x_series = zero()
    x_series[0][1] = base / 2
    x_series[0][-1] = base / 2
    x_series[1][1] = (a2 - 1j * a1) / 2
    x_series[1][-1] = (a2 + 1j * a1) / 2
    x_series[1][3] = (a4 - 1j * a3) / 2
    x_series[1][-3] = (a4 + 1j * a3) / 2
    omega = [w0, w1]
    phi0 = w0 * d0
    phi1 = w0 * d1 + w1 * d0
    xp = dtau(x_series)
    xd = delayed(x_series, phi0, phi1)
    xdp = delayed(xp, phi0, phi1)
    u = add(xd, smul(series_mul(xdp, omega), d))
    res = add(series_mul(xp, omega), smul(x_series, mu))
    res = add(res, smul(u, lam * th / 2))
    u3 = mul(mul(u, u), u)
    u3e = zero()
    u3e[1] = dict(u3[0])
    res = add(res, smul(u3e, -lam * th ** 3 / 24))
    return (res[0].get(1, 0j), res[1].get(1, 0j), res[1].get(3, 0j))


class TestDerivationOracle:
    @pytest.mark.parametrize("frozen", FROZEN, ids=lambda f: f"w={f['w']}")
    def test_expansion_residual_vanishes(self, frozen):
        """The frozen coefficients kill the resonant and third-harmonic
        forcing of the strained-time expansion (a2 excluded: it only enters
        one order higher)."""
        p = at(frozen["lam"], frozen["mu"], frozen["th"], frozen["w"], 0.0)
        e0, e1, e3 = _series_orders(
            frozen["lam"], frozen["mu"], frozen["th"], frozen["w"],
            frozen["excess"], frozen["base"], frozen["a1"], frozen["a2"],
            frozen["a3"], frozen["a4"], frozen["w1"])
        scale = frozen["lam"]
        assert abs(e0) < 1e-12 * scale
        assert abs(e1) < 1e-10 * scale   # fixes base and w1
        assert abs(e3) < 1e-10 * scale   # fixes a3 and a4


class TestFrozenCoefficients:
    @pytest.mark.parametrize("frozen", FROZEN, ids=lambda f: f"w={f['w']}")
    def test_package_matches_fixture(self, frozen):
        p = at(frozen["lam"], frozen["mu"], frozen["th"], frozen["w"], 0.0)
        delay = critical_delay(p, 0) + frozen["excess"]
        est = second_order_amplitude(replace(p, delay=delay), delay)
        c = est.coefficients
        assert c.base_amplitude == pytest.approx(frozen["base"], rel=1e-12)
        assert c.frequency_shift == pytest.approx(frozen["w1"], rel=1e-12)
        assert c.a1 == pytest.approx(frozen["a1"], rel=1e-11)
        assert c.a2 == pytest.approx(frozen["a2"], rel=1e-11)
        assert c.a3 == pytest.approx(frozen["a3"], rel=1e-11)
        assert c.a4 == pytest.approx(frozen["a4"], rel=1e-11)
        assert est.second_order == pytest.approx(
            (frozen["base"] + frozen["a2"] + frozen["a4"]) / 2, rel=1e-11)


class TestSlowFlow:
    def test_zero_detuning_zero_growth(self):
        p = FIG
        dcr = critical_delay(p, 0)
        c = slow_flow(p, dcr)
        assert c.alpha == 0.0 and c.c2 == 0.0
        assert c.c1 > 0 and c.c3 > 0

    def test_cycle_exists_past_critical(self):
        p = FIG
        dcr = critical_delay(p, 0)
        c = slow_flow(p, dcr + 0.1)
        assert c.c2 > 0   # nonzero cycle radius exists

    def test_positivity_over_random_parameters(self):
        rng = np.random.default_rng(19)
        for _ in range(100):
            mu = float(rng.uniform(0.2, 2.0))
            lam = float(rng.uniform(2 * mu + 0.5, 20.0))
            w = float(rng.uniform(0.0, 0.95)) * min(2 / lam, 1 / mu)
            p = SystemParams(lam, mu, 1.0, 2, w, 0.0)
            dcr = critical_delay(p, 0)
            c = slow_flow(p, dcr + 0.05)
            assert c.c1 > 0 and c.c3 > 0

    def test_radius_matches_first_order(self):
        # equilibrium radius of the radial equation equals the closed form
        rng = np.random.default_rng(23)
        for _ in range(30):
            mu = float(rng.uniform(0.3, 1.5))
            lam = float(rng.uniform(2 * mu + 1, 15.0))
            th = float(rng.uniform(0.5, 2.0))
            w = float(rng.uniform(0.0, 0.9)) * min(2 / (lam * th), 1 / mu)
            p = SystemParams(lam, mu, th, 2, w, 0.0)
            dcr = critical_delay(p, 0)
            delay = dcr + 0.07
            c = slow_flow(p, delay)
            radius = math.sqrt(c.c2 / c.c1)
            assert first_order_amplitude(p, delay) == pytest.approx(radius / 2, rel=1e-9)


class TestFirstOrder:
    def test_zero_at_critical_delay(self):
        dcr = critical_delay(FIG, 0)
        assert first_order_amplitude(FIG, dcr) == 0.0
        assert first_order_amplitude(FIG, 0.9 * dcr) == 0.0

    def test_figure_value(self):
        dcr = critical_delay(FIG, 0)
        assert first_order_amplitude(FIG, dcr + 0.2) == pytest.approx(1.383, abs=1e-3)

    def test_square_root_scaling(self):
        dcr = critical_delay(FIG, 0)
        a1 = first_order_amplitude(FIG, dcr + 0.01)
        a4 = first_order_amplitude(FIG, dcr + 0.04)
        assert a4 == pytest.approx(2 * a1, rel=1e-12)

    def test_regime_guards(self):
        with pytest.raises(UnsupportedRegimeError):
            first_order_amplitude(SystemParams(10, 1, 1, 3, 0.0, 0.5), 0.5)
        with pytest.raises(UnsupportedRegimeError):
            # weight*service_rate >= 1
            first_order_amplitude(SystemParams(3, 2.2, 1, 2, 0.5, 0.5), 0.5)


class TestSecondOrder:
    def test_zero_at_critical_delay(self):
        dcr = critical_delay(FIG, 0)
        est = second_order_amplitude(FIG, dcr)
        assert est.second_order == 0.0 and est.first_order == 0.0

    def test_crest_constraint(self):
        # a1 = -3 a3 pins the crest of the expansion at strained time zero
        rng = np.random.default_rng(31)
        for _ in range(30):
            mu = float(rng.uniform(0.3, 1.5))
            lam = float(rng.uniform(2 * mu + 1, 15.0))
            w = float(rng.uniform(0.0, 0.9)) * min(2 / lam, 1 / mu)
            p = SystemParams(lam, mu, 1.0, 2, w, 0.0)
            delay = critical_delay(p, 0) + 0.1
            c = second_order_amplitude(p, delay).coefficients
            assert c.a1 + 3 * c.a3 == pytest.approx(0.0, abs=1e-14)

    def test_correction_is_next_order(self):
        # second minus first order shrinks like excess^1.5
        dcr = critical_delay(FIG, 0)

        def diff(excess):
            est = second_order_amplitude(FIG, dcr + excess)
            return est.second_order - est.first_order

        ratio = diff(0.04) / diff(0.01)
        assert ratio == pytest.approx(8.0, rel=0.25)

    def test_frequency_shift_sign(self):
        dcr = critical_delay(FIG, 0)
        est = second_order_amplitude(FIG, dcr + 0.1)
        assert est.omega_corrected < critical_frequency(FIG)

    def test_corrected_frequency_closer_to_measurement(self):
        from delayq import (EquilibriumPerturbed, integrate, make_history,
                            measure, measured_frequency)
        p = at(10, 1, 1, 0.15, 0.0)
        delay = critical_delay(p, 0) + 0.1
        run = replace(p, delay=delay)
        traj = integrate(run, make_history(EquilibriumPerturbed(0.1), run), 200.0)
        freq = measured_frequency(measure(traj))
        est = second_order_amplitude(p, delay)
        w0 = critical_frequency(p)
        assert abs(freq - est.omega_corrected) < abs(freq - w0)


class TestHopfSide:
    def test_light_weight_cycle_for_larger_delay(self):
        assert hopf_side(FIG) is HopfSide.CYCLE_FOR_LARGER_DELAY

    def test_heavy_weight_cycle_for_smaller_delay(self):
        # crossing exists with weight*service_rate > 1 only in the low-gain
        # heavy-weight regime
        p = SystemParams(1.0, 1.0, 1.0, 2, 3.0, 0.0)
        assert hopf_side(p) is HopfSide.CYCLE_FOR_SMALLER_DELAY

    def test_degenerate_when_product_is_one(self):
        # no crossing can coexist with weight*service_rate == 1, so the
        # degeneracy is reported before the missing-crossing guard
        p = SystemParams(1.0, 0.4, 1.0, 2, 2.5, 0.0)
        with pytest.raises(DegenerateRegimeError):
            hopf_side(p)
