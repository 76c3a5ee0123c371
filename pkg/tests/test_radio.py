import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mleachsim.radio import EnergyLedger, RadioModel, in_range

RADIO = RadioModel()


def rel_err(got, want):
    return abs(got - want) / abs(want)


def test_tx_energy_reference_values():
    assert rel_err(RADIO.tx_energy(4096, 100.0), 5.120e-3) <= 1e-12
    assert rel_err(RADIO.tx_energy(4096, 0.0), 2.048e-4) <= 1e-12
    assert RADIO.tx_energy(0, 500.0) == 0.0


def test_rx_energy_reference_values():
    assert RADIO.rx_energy(0) == 0.0
    assert rel_err(RADIO.rx_energy(4096), 2.048e-4) <= 1e-12
    assert RADIO.rx_energy(1) == 5.0e-8


def test_negative_arguments_rejected():
    with pytest.raises(ValueError):
        RADIO.tx_energy(-1, 10.0)
    with pytest.raises(ValueError):
        RADIO.tx_energy(10, -1.0)
    with pytest.raises(ValueError):
        RADIO.rx_energy(-1)


@given(k=st.integers(0, 10**6), d=st.floats(0, 1e5, allow_nan=False))
def test_tx_dominates_rx(k, d):
    tx, rx = RADIO.tx_energy(k, d), RADIO.rx_energy(k)
    assert tx >= rx
    if k * d == 0:
        assert tx == rx


@given(k=st.integers(1, 10**6), d=st.floats(1e-3, 1e5))
def test_tx_linear_in_k(k, d):
    one = RADIO.tx_energy(1, d)
    assert math.isclose(RADIO.tx_energy(k, d), k * one, rel_tol=1e-9)


@given(k=st.integers(1, 10**5), d=st.floats(1.0, 1e4))
def test_tx_quadratic_in_d(k, d):
    lhs = RADIO.tx_energy(k, 2 * d) - RADIO.tx_energy(k, 0.0)
    rhs = 4.0 * (RADIO.tx_energy(k, d) - RADIO.tx_energy(k, 0.0))
    assert math.isclose(lhs, rhs, rel_tol=1e-12)


def test_two_short_hops_beat_one_long_hop():
    # amplifier term is quadratic in distance, so relaying at the midpoint wins
    k, d = 4096, 2000.0
    assert 2 * RADIO.tx_energy(k, d / 2) < RADIO.tx_energy(k, d)


def test_in_range_boundary_inclusive():
    assert in_range((0.0, 0.0), (0.0, 1500.0), 1500.0)
    assert not in_range((0.0, 0.0), (0.0, 1501.0), 1500.0)
    assert in_range((0.0, 0.0), (0.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        in_range((0.0, 0.0), (1.0, 1.0), 0.0)


# -- ledger ----------------------------------------------------------------


def test_consume_basic_subtraction():
    led = EnergyLedger(1, 1.0)
    assert led.consume(0, 0.3, now_us=0)
    assert math.isclose(led.energy[0], 0.7)
    assert led.alive[0]


def test_consume_shortfall_clamps_and_kills():
    led = EnergyLedger(1, 0.2)
    assert not led.consume(0, 0.3, now_us=5)
    assert led.energy[0] == 0.0
    assert not led.alive[0]
    assert led.death_time_us[0] == 5
    assert math.isclose(led.consumed[0], 0.2)


def test_consume_exact_residual_succeeds_then_dies():
    led = EnergyLedger(1, 0.25)
    assert led.consume(0, 0.25, now_us=9)
    assert led.energy[0] == 0.0
    assert not led.alive[0]


def test_consume_full_battery_example():
    led = EnergyLedger(1, 172800.0)
    led.consume(0, 0.836, now_us=0)
    assert math.isclose(led.energy[0], 172799.164)


def test_death_callback_fires_once_in_order():
    led = EnergyLedger(3, 1.0)
    seen = []
    led.on_death = seen.append
    led.charge_many(np.array([0, 1, 2]), 1.0, now_us=1)  # exact residual: all die
    assert seen == [0, 1, 2]
    led.consume(1, 0.0, now_us=2)
    assert seen == [0, 1, 2]


def test_charge_many_matches_consume_loop():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(1, 40))
        init = rng.uniform(0.0, 2.0)
        amounts = rng.uniform(0.0, 0.5)
        a = EnergyLedger(n, init)
        b = EnergyLedger(n, init)
        ids = np.nonzero(rng.random(n) < 0.7)[0]
        ok_a = a.charge_many(ids, amounts, now_us=3)
        ok_b = np.array([b.consume(int(i), amounts, now_us=3) for i in ids], dtype=bool)
        assert np.array_equal(ok_a, ok_b)
        assert np.array_equal(a.energy, b.energy)
        assert np.array_equal(a.consumed, b.consumed)
        assert np.array_equal(a.alive, b.alive)
        assert math.isclose(a.total_consumed(), b.total_consumed(), rel_tol=0, abs_tol=1e-12)


def test_ledger_conservation_after_a_million_charges():
    led = EnergyLedger(64, 5000.0)
    rng = np.random.default_rng(17)
    ids = np.arange(64)
    for _ in range(15000):
        led.charge_many(ids, float(rng.uniform(1e-6, 1e-3)), now_us=0)
    for _ in range(40000):
        led.consume(int(rng.integers(64)), float(rng.uniform(1e-6, 1e-3)), now_us=0)
    # 15000 * 64 + 40000 = 1,000,000 individual charges
    assert led.conservation_drift() <= 1e-9


def test_dead_nodes_keep_zero_energy_under_more_charges():
    led = EnergyLedger(2, 0.5)
    led.charge_many(np.array([0, 1]), 0.4, now_us=0)
    ok = led.charge_many(np.array([0, 1]), 0.4, now_us=1)
    assert not ok.any()
    assert (led.energy == 0.0).all()
    assert math.isclose(led.total_consumed(), 1.0)
