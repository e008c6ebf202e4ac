"""
Fixtures y oráculos compartidos.

Los oráculos usan mpmath con 30 dígitos; la librería no lo importa.
"""

import itertools
import os

# Se leen al importar alphabx.resources.config
os.environ.setdefault("ALPHABX_DEBUG_CHECKS", "true")
os.environ.setdefault("ALPHABX_WORKERS", "1")

import mpmath
import pytest

from alphabx.channel import ChannelParams


mpmath.mp.dps = 30


# ============================================================================
# ORÁCULOS
# ============================================================================

def phi2_bruteforce(b1, b2, c, x, y, terms=400) -> float:
    """Suma doble de Φ₂ en precisión extendida, por recurrencia de términos."""
    b1, b2, c, x, y = (mpmath.mpf(v) for v in (b1, b2, c, x, y))
    total = mpmath.mpf(0)
    row = mpmath.mpf(1)
    for m in range(terms):
        t = row
        for n in range(terms):
            total += t
            if y == 0 or (n > y and abs(t) < total * mpmath.mpf("1e-35")):
                break
            t = t * (b2 + n) * y / ((c + m + n) * (n + 1))
        if x == 0 or (m > x and abs(row) < total * mpmath.mpf("1e-35")):
            break
        row = row * (b1 + m) * x / ((c + m) * (m + 1))
    return float(total)


def c_alpha_oracle(p: ChannelParams) -> float:
    s = mpmath.mpf(2) / p.alpha
    z = -mpmath.mpf(p.m_x) * p.omega_y / (mpmath.mpf(p.m_y) * p.omega_x)
    hyper = mpmath.hyp2f1(p.m_y, -s, p.m_x, z)
    return float((mpmath.gamma(p.m_x) / (mpmath.gamma(p.m_x + s) * hyper)) ** (mpmath.mpf(p.alpha) / 2))


# ============================================================================
# GRILLAS DE PARÁMETROS
# ============================================================================

GRID_M = (0.3, 1.0, 2.7)
GRID_ALPHA = (1.0, 2.0, 4.0)
GRID_RATIO = (0.1, 1.0, 10.0)
GRID_GAMMA_BAR = (1.0, 10.0)


def grid_params():
    """Grilla completa: Ω_X = 1 y Ω_Y = razón."""
    return [
        ChannelParams(m_x=m_x, m_y=m_y, omega_x=1.0, omega_y=ratio, alpha=alpha, gamma_bar=gamma_bar)
        for m_x, m_y, alpha, ratio, gamma_bar in itertools.product(
            GRID_M, GRID_M, GRID_ALPHA, GRID_RATIO, GRID_GAMMA_BAR
        )
    ]


FAST_PARAMS = [
    ChannelParams(m_x=2.2, m_y=0.5, omega_x=10 ** 0.5, omega_y=10 ** -0.5, alpha=3.5, gamma_bar=10.0),
    ChannelParams(m_x=0.3, m_y=1.0, omega_x=1.0, omega_y=10.0, alpha=1.0, gamma_bar=1.0),
    ChannelParams(m_x=1.0, m_y=2.7, omega_x=1.0, omega_y=0.1, alpha=4.0, gamma_bar=10.0),
    ChannelParams(m_x=0.5, m_y=0.5, omega_x=1.0, omega_y=1.0, alpha=4.0, gamma_bar=10.0),
    ChannelParams(m_x=1.5, m_y=2.5, omega_x=10 ** 0.5, omega_y=10 ** -0.5, alpha=2.0, gamma_bar=1.0),
]


def _param_id(p: ChannelParams) -> str:
    return f"mx{p.m_x:g}-my{p.m_y:g}-oy{p.omega_y:.3g}-a{p.alpha:g}-g{p.gamma_bar:g}"


@pytest.fixture(params=FAST_PARAMS, ids=_param_id)
def fast_params(request) -> ChannelParams:
    return request.param


# Configuración de la figura de outage con cotas (potencias lineales)
FIG2_PARAMS = ChannelParams.from_db(m_x=1.5, m_y=2.5, omega_x_db=5.0, omega_y_db=-5.0,
                                    alpha=2.0, gamma_bar_db=10.0)
FIG2_GAMMA_TH = 10 ** 0.3

# Configuraciones de la batería Monte-Carlo (incluye la de la figura de cotas)
MC_GATE_PARAMS = [
    FIG2_PARAMS,
    FIG2_PARAMS.with_(alpha=4.0),
    ChannelParams.from_db(m_x=2.2, m_y=0.5, omega_x_db=5.0, omega_y_db=-5.0, alpha=3.5, gamma_bar_db=10.0),
    ChannelParams.from_db(m_x=0.5, m_y=0.5, omega_x_db=0.0, omega_y_db=0.0, alpha=4.0, gamma_bar_db=10.0),
    ChannelParams.from_db(m_x=3.0, m_y=3.0, omega_x_db=5.0, omega_y_db=5.0, alpha=3.0, gamma_bar_db=10.0),
    ChannelParams(m_x=1.0, m_y=1.0, omega_x=1.0, omega_y=0.0, alpha=2.0, gamma_bar=10.0),
]

# Abscisas de la figura de cotas: γ̄ = 0..30 dB
FIG2_GAMMA_BAR_DB = [float(g) for g in range(31)]
