"""
Reproducción de los datos de las figuras de referencia (fig2 a fig7).

Cada figura fija los parámetros de su leyenda y expone --override para
los que la leyenda no da. Los valores de potencia van en dB. El resultado
es una CurveTable en formato largo (una fila por punto de cada curva).
"""

from typing import Dict, List, Optional, Sequence

import numpy as np

from alphabx.channel import DEFAULT_EVAL_POLICY, EvalPolicy
from alphabx.mcsim import SamplerConfig, draw_snr_batch, estimate_outage
from alphabx.resources import config
from alphabx.resources.logging_method import log_function
from alphabx.resources.utils import db_to_linear
from alphabx.resources.version import get_app_info
from alphabx.sweep import (
    CurveTable,
    MissingValue,
    SweepAxis,
    SweepSpec,
    column_name,
    params_from_point,
    parse_assignment,
    policy_to_dict,
    run_sweep,
)


class FigureError(ValueError):
    """Figura desconocida u override inválido/faltante."""
    pass


FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

# Claves que acepta --override en cada figura
ALLOWED_OVERRIDES = {
    "fig2": ("m_x", "m_y", "omega_x", "omega_y", "gamma_th", "alpha"),
    "fig3": ("m_x", "m_y", "omega_x", "omega_y", "gamma_th", "gamma_bar"),
    "fig4": ("m_x", "m_y", "omega_y", "gamma_th", "gamma_bar", "alpha"),
    "fig5": ("gamma_th", "alpha"),
    "fig6": ("alpha", "omega_x", "omega_y", "gamma_bar"),
    "fig7": ("m_x", "m_y", "omega_x", "omega_y", "gamma_th", "alpha", "qam_order"),
}

# Configuración de la figura de outage con cotas (no figura en la leyenda)
FIG2_DEFAULTS = {"m_x": 1.5, "m_y": 2.5, "omega_x": 5.0, "omega_y": -5.0, "gamma_th": 3.0}
FIG2_ALPHAS = (2.0, 3.0, 4.0)

# Configuraciones de la figura P_out vs CQEI
FIG5_CONFIGS = (
    {"m_x": 0.5, "m_y": 0.5, "omega_x": 0.0, "omega_y": 0.0},
    {"m_x": 3.0, "m_y": 3.0, "omega_x": 5.0, "omega_y": 5.0},
)


# ============================================================================
# OVERRIDES
# ============================================================================

def parse_override(text: str) -> tuple:
    """'m_x=0.2,2.2' -> ('m_x', [0.2, 2.2])."""
    name, value = parse_assignment(text)
    try:
        values = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise FigureError(f"Override no numérico: '{text}'")
    if not values:
        raise FigureError(f"Override vacío: '{text}'")
    return name, values


def _check_overrides(fig_id: str, overrides: Dict[str, List[float]]) -> None:
    for name in overrides:
        if name not in ALLOWED_OVERRIDES[fig_id]:
            raise FigureError(
                f"{fig_id} no acepta override de '{name}' (acepta: {', '.join(ALLOWED_OVERRIDES[fig_id])})"
            )


def _listed(overrides: Dict[str, List[float]], name: str, default: Sequence[float]) -> List[float]:
    return [float(v) for v in overrides.get(name, default)]


def _scalar(overrides: Dict[str, List[float]], name: str, default: float) -> float:
    values = overrides.get(name, [default])
    if len(values) != 1:
        raise FigureError(f"El override '{name}' admite un solo valor")
    return float(values[0])


def _labelled(table: CurveTable, labels: Dict[str, float]) -> CurveTable:
    return table.with_leading_columns({column_name(k): v for k, v in labels.items()})


# ============================================================================
# FIGURAS
# ============================================================================

def _fig2(overrides, mc_samples, seed, policy, workers) -> List[CurveTable]:
    """Outage exacta, cotas y Monte-Carlo vs γ̄ para varios α."""
    base = {name: _scalar(overrides, name, default) for name, default in FIG2_DEFAULTS.items()}
    axis = SweepAxis("gamma_bar", 0.0, 30.0, 31, "dB")
    tables = []
    for stream_id, alpha in enumerate(_listed(overrides, "alpha", FIG2_ALPHAS)):
        fixed = dict(base, alpha=alpha)
        table = run_sweep(SweepSpec(fixed, (axis,), ("pout_bounds",)), policy, workers)
        if mc_samples > 0:
            # Una sola batería con γ̄ = 1: γ escala linealmente con γ̄
            unit = params_from_point(dict(fixed, gamma_bar=0.0))
            batch = draw_snr_batch(SamplerConfig(unit, mc_samples, seed, stream_id=stream_id), policy=policy)
            gamma_th = db_to_linear(base["gamma_th"])
            estimates = [estimate_outage(batch, gamma_th / db_to_linear(gb)) for gb in table.columns["gamma_bar_db"]]
            table.columns["pout_mc"] = [e[0] for e in estimates]
            table.columns["pout_mc_stderr"] = [e[1] for e in estimates]
        tables.append(_labelled(table, {"alpha": alpha}))
    return tables


def _fig3(overrides, policy, workers) -> List[CurveTable]:
    """P_out vs α para varios m_X (obligatorio por override) y m_Y ∈ {2.5, 0.5}."""
    if "m_x" not in overrides:
        raise FigureError("fig3 requiere --override m_x=... (la leyenda no indica los valores de m_X)")
    fixed = {
        "omega_x": _scalar(overrides, "omega_x", 5.0),
        "omega_y": _scalar(overrides, "omega_y", -5.0),
        "gamma_th": _scalar(overrides, "gamma_th", 3.0),
        "gamma_bar": _scalar(overrides, "gamma_bar", 10.0),
    }
    axis = SweepAxis("alpha", 1.0, 6.0, 21)
    tables = []
    for m_y in _listed(overrides, "m_y", (2.5, 0.5)):
        for m_x in _listed(overrides, "m_x", ()):
            table = run_sweep(SweepSpec(dict(fixed, m_x=m_x, m_y=m_y), (axis,), ("pout",)), policy, workers)
            tables.append(_labelled(table, {"m_x": m_x, "m_y": m_y}))
    return tables


def _fig4(overrides, policy, workers) -> List[CurveTable]:
    """P_out vs Ω_X para m_X pequeño y grande."""
    fixed = {
        "m_y": _scalar(overrides, "m_y", 0.5),
        "omega_y": _scalar(overrides, "omega_y", -5.0),
        "gamma_th": _scalar(overrides, "gamma_th", 3.0),
        "gamma_bar": _scalar(overrides, "gamma_bar", 10.0),
        "alpha": _scalar(overrides, "alpha", 3.5),
    }
    axis = SweepAxis("omega_x", -5.0, 10.0, 16, "dB")
    tables = []
    for m_x in _listed(overrides, "m_x", (0.2, 2.2)):
        table = run_sweep(SweepSpec(dict(fixed, m_x=m_x), (axis,), ("pout",)), policy, workers)
        tables.append(_labelled(table, {"m_x": m_x, "m_y": fixed["m_y"]}))
    return tables


def _fig5(overrides, policy, workers) -> List[CurveTable]:
    """P_out vs CQEI a medida que crece γ̄."""
    gamma_th = _scalar(overrides, "gamma_th", 10.0)
    axis = SweepAxis("gamma_bar", 0.0, 40.0, 41, "dB")
    tables = []
    for base in FIG5_CONFIGS:
        for alpha in _listed(overrides, "alpha", (1.5, 2.0, 2.5, 3.0)):
            fixed = dict(base, alpha=alpha, gamma_th=gamma_th)
            table = run_sweep(SweepSpec(fixed, (axis,), ("cqei", "pout")), policy, workers)
            tables.append(_labelled(table, dict(base, alpha=alpha)))
    return tables


def _fig6(overrides, policy, workers) -> List[CurveTable]:
    """Mapa de AoF sobre (m_X, m_Y) con la curva AoF = 1 marcada."""
    fixed = {
        "alpha": _scalar(overrides, "alpha", 4.0),
        "omega_x": _scalar(overrides, "omega_x", 5.0),
        "omega_y": _scalar(overrides, "omega_y", 5.0),
        "gamma_bar": _scalar(overrides, "gamma_bar", 10.0),
    }
    m_x_axis = SweepAxis("m_x", 0.05, 10.0, 25, "log")
    m_y_axis = SweepAxis("m_y", 0.1, 10.0, 25, "log")
    table = run_sweep(SweepSpec(fixed, (m_x_axis, m_y_axis), ("aof",)), policy, workers)

    aof = table.column("aof").reshape(m_x_axis.count, m_y_axis.count)
    hyper = np.where(np.isnan(aof), np.nan, (aof > 1.0).astype(float))
    contour = np.zeros_like(hyper)
    # Una celda está sobre la curva de Rayleigh si algún vecino cae del otro lado
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        neighbour = np.full_like(hyper, np.nan)
        src = hyper[max(di, 0):hyper.shape[0] + min(di, 0), max(dj, 0):hyper.shape[1] + min(dj, 0)]
        neighbour[max(-di, 0):hyper.shape[0] + min(-di, 0), max(-dj, 0):hyper.shape[1] + min(-dj, 0)] = src
        contour = np.where((neighbour != hyper) & ~np.isnan(neighbour) & ~np.isnan(hyper), 1.0, contour)
    contour = np.where(np.isnan(hyper), np.nan, contour)

    def as_column(values: np.ndarray) -> list:
        return [None if np.isnan(v) else float(v) for v in values.ravel()]

    table.columns["hyper_rayleigh"] = as_column(hyper)
    table.columns["rayleigh_contour"] = as_column(contour)
    for m in list(table.missing):
        if m.column == "aof":
            table.missing.append(MissingValue(m.row, "hyper_rayleigh", m.reason))
            table.missing.append(MissingValue(m.row, "rayleigh_contour", m.reason))
    return [table]


def _fig7(overrides, policy, workers) -> List[CurveTable]:
    """Curvas calidad-fiabilidad (P_out, BER QAM) vs γ̄."""
    fixed = {
        "m_x": _scalar(overrides, "m_x", 1.0),
        "m_y": _scalar(overrides, "m_y", 1.0),
        "omega_x": _scalar(overrides, "omega_x", -5.0),
        "omega_y": _scalar(overrides, "omega_y", -5.0),
        "qam_order": _scalar(overrides, "qam_order", 16.0),
    }
    axis = SweepAxis("gamma_bar", 0.0, 40.0, 21, "dB")
    tables = []
    for alpha in _listed(overrides, "alpha", (2.0, 3.0)):
        for gamma_th in _listed(overrides, "gamma_th", (-10.0, 10.0)):
            spec = SweepSpec(dict(fixed, alpha=alpha, gamma_th=gamma_th), (axis,), ("qr_curve",))
            tables.append(_labelled(run_sweep(spec, policy, workers), {"alpha": alpha, "gamma_th": gamma_th}))
    return tables


@log_function
def reproduce_figure(fig_id: str, overrides: Optional[Dict[str, List[float]]] = None,
                     mc_samples: int = config.MC_DEFAULT_SAMPLES, seed: int = config.DEFAULT_SEED,
                     policy: EvalPolicy = DEFAULT_EVAL_POLICY,
                     workers: int = config.DEFAULT_WORKERS) -> CurveTable:
    """
    Genera la tabla de datos de una figura.

    Args:
        fig_id: fig2 ... fig7
        overrides: Campo -> lista de valores (dB para potencias)
        mc_samples: Muestras Monte-Carlo por curva (solo fig2; 0 desactiva)
        seed: Semilla de la simulación
        policy: Tolerancias de evaluación
        workers: Procesos para los barridos

    Returns:
        CurveTable con meta suficiente para replay

    Raises:
        FigureError: Figura desconocida u override inválido o faltante
    """
    if fig_id not in FIGURE_IDS:
        raise FigureError(f"Figura desconocida: {fig_id} (opciones: {', '.join(FIGURE_IDS)})")
    overrides = {k: [float(v) for v in values] for k, values in (overrides or {}).items()}
    _check_overrides(fig_id, overrides)
    if mc_samples < 0:
        raise FigureError(f"mc_samples no puede ser negativo: {mc_samples}")

    if fig_id == "fig2":
        tables = _fig2(overrides, mc_samples, seed, policy, workers)
    else:
        builder = {"fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6, "fig7": _fig7}[fig_id]
        tables = builder(overrides, policy, workers)

    meta = {
        "command": "figure",
        "figure": fig_id,
        "overrides": overrides,
        "mc_samples": mc_samples if fig_id == "fig2" else 0,
        "seed": seed if fig_id == "fig2" and mc_samples > 0 else None,
        "policy": policy_to_dict(policy),
        "app": get_app_info(),
    }
    return CurveTable.concat(tables, meta)
