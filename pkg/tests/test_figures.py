"""Tests de la reproducción de figuras."""

import math

import numpy as np
import pytest

from alphabx.channel import normalized_variate
from alphabx.figures import FigureError, parse_override, reproduce_figure
from alphabx.resources.utils import db_to_linear
from alphabx.sweep import params_from_point


def test_fig2_bounds_and_columns():
    table = reproduce_figure("fig2", mc_samples=0, workers=1)
    assert list(table.columns) == ["alpha", "gamma_bar_db", "pout_lower", "pout_upper", "pout_exact"]
    assert table.n_rows == 3 * 31
    assert not table.missing
    assert table.meta["seed"] is None
    lower, upper, exact = (table.column(n) for n in ("pout_lower", "pout_upper", "pout_exact"))
    assert np.all(lower <= exact)
    for i in (0, 40, 92):
        p = params_from_point({"m_x": 1.5, "m_y": 2.5, "omega_x": 5.0, "omega_y": -5.0,
                               "alpha": table.columns["alpha"][i], "gamma_bar": table.columns["gamma_bar_db"][i]})
        u = float(normalized_variate(p, db_to_linear(3.0)))
        assert lower[i] / upper[i] == pytest.approx(math.exp(-u), rel=1e-12)


def _assert_mc_within_binomial_band(table, n):
    mc, exact = table.column("pout_mc"), table.column("pout_exact")
    band = 3 * np.sqrt(exact * (1 - exact) / n)
    assert np.all(np.abs(mc - exact) <= band)


def test_fig2_monte_carlo_columns():
    table = reproduce_figure("fig2", overrides={"alpha": [2.0]}, mc_samples=20_000, seed=3, workers=1)
    assert table.n_rows == 31
    assert table.meta["seed"] == 3
    assert table.meta["mc_samples"] == 20_000
    _assert_mc_within_binomial_band(table, 20_000)
    # γ̄ creciente: la outage Monte-Carlo no puede crecer
    assert np.all(np.diff(table.column("pout_mc")) <= 0)


@pytest.mark.slow
def test_fig2_monte_carlo_gate():
    n = 1_000_000
    table = reproduce_figure("fig2", mc_samples=n, seed=1, workers=1)
    assert table.n_rows == 3 * 31
    _assert_mc_within_binomial_band(table, n)


def test_fig3_requires_m_x():
    with pytest.raises(FigureError):
        reproduce_figure("fig3", workers=1)


def test_fig3_layout():
    table = reproduce_figure("fig3", overrides={"m_x": [1.0, 3.0]}, workers=1)
    assert list(table.columns) == ["m_x", "m_y", "alpha", "pout"]
    assert table.n_rows == 2 * 2 * 21
    assert table.columns["m_y"][0] == 2.5
    assert table.columns["m_y"][-1] == 0.5


def test_fig4_trends():
    table = reproduce_figure("fig4", workers=1)
    assert list(table.columns) == ["m_x", "m_y", "omega_x_db", "pout"]
    m_x = table.column("m_x")
    pout = table.column("pout")
    assert np.all(np.diff(pout[m_x == 0.2]) > 0)
    assert np.all(np.diff(pout[m_x == 2.2]) < 0)


def test_fig5_cqei_inverse_in_gamma_bar():
    table = reproduce_figure("fig5", overrides={"alpha": [2.0]}, workers=1)
    assert list(table.columns) == ["m_x", "m_y", "omega_x_db", "omega_y_db", "alpha", "gamma_bar_db", "cqei", "pout"]
    assert table.n_rows == 2 * 41
    scaled = table.column("cqei") * 10 ** (table.column("gamma_bar_db") / 10)
    for m in (0.5, 3.0):
        group = scaled[table.column("m_x") == m]
        np.testing.assert_allclose(group, group[0], rtol=1e-10)


def test_fig6_flags():
    table = reproduce_figure("fig6", workers=1)
    assert list(table.columns) == ["m_x", "m_y", "aof", "hyper_rayleigh", "rayleigh_contour"]
    assert table.n_rows == 25 * 25
    m_x = table.column("m_x")
    aof = table.column("aof")
    hyper = table.column("hyper_rayleigh")
    assert np.all(aof[m_x < 0.25] > 1.0)
    np.testing.assert_array_equal(hyper, (aof > 1.0).astype(float))
    assert np.any(table.column("rayleigh_contour") == 1.0)
    assert np.any(hyper == 0.0)


def test_fig7_columns():
    table = reproduce_figure("fig7", overrides={"alpha": [2.0], "gamma_th": [10.0]}, workers=1)
    assert list(table.columns) == ["alpha", "gamma_th_db", "gamma_bar_db", "qr_pout", "qr_ber"]
    assert table.n_rows == 21
    assert np.all(np.diff(table.column("qr_pout")) <= 0)
    assert np.all(table.column("qr_ber") <= 0.5)


def test_fig7_low_threshold_favors_outage():
    table = reproduce_figure("fig7", overrides={"alpha": [2.0], "gamma_th": [-10.0]}, workers=1)
    assert table.columns["gamma_bar_db"][0] == 0.0
    assert table.columns["qr_pout"][0] < table.columns["qr_ber"][0]


@pytest.mark.parametrize("fig_id,overrides", [
    ("fig9", None),
    ("fig4", {"omega_x": [1.0]}),
    ("fig4", {"alpha": [2.0, 3.0]}),
])
def test_invalid_requests(fig_id, overrides):
    with pytest.raises(FigureError):
        reproduce_figure(fig_id, overrides=overrides, workers=1)


def test_negative_mc_samples():
    with pytest.raises(FigureError):
        reproduce_figure("fig2", mc_samples=-1, workers=1)


def test_parse_override():
    assert parse_override("m_x=0.2,2.2") == ("m_x", [0.2, 2.2])
    with pytest.raises(FigureError):
        parse_override("m_x=a,b")
    with pytest.raises(FigureError):
        parse_override("m_x=")
