"""
Barridos de parámetros y tablas de resultados.

Un SweepSpec fija algunos campos, barre hasta dos y pide una lista de
métricas. run_sweep evalúa cada punto de la grilla (en un pool de procesos
acotado) y devuelve una CurveTable con las columnas en orden determinista.
Los fallos de un punto quedan registrados como valores faltantes con su
motivo; nunca se reemplazan por 0.

Convención de unidades: las potencias (omega_x, omega_y, gamma_bar,
gamma_th, gamma) se ingresan y se reportan en dB.
"""

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from alphabx.channel import (
    DEFAULT_EVAL_POLICY,
    ChannelParams,
    ChannelParamsError,
    EvalPolicy,
    EvaluationError,
    amount_of_fading,
    average_error_rate,
    cqei,
    outage_bounds,
    outage_probability,
    snr_cdf,
    snr_moment,
    snr_pdf,
    square_qam_ber,
)
from alphabx.resources import config
from alphabx.resources.logging_method import log_function
from alphabx.resources.utils import db_to_linear, linear_to_db, write_text_atomic
from alphabx.resources.version import get_app_info
from alphabx.specfun import SeriesPolicy, SpecialFunctionError


# ============================================================================
# EXCEPCIONES
# ============================================================================

class SweepSpecError(ValueError):
    """Especificación de barrido inválida. field nombra el campo culpable."""

    def __init__(self, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.field_name = field_name


# ============================================================================
# CAMPOS Y MÉTRICAS
# ============================================================================

LINEAR_FIELDS = ("m_x", "m_y", "alpha", "k")
POWER_FIELDS = ("omega_x", "omega_y", "gamma_bar", "gamma_th", "gamma")
FIXED_ONLY_FIELDS = ("qam_order",)
ALL_FIELDS = LINEAR_FIELDS + POWER_FIELDS + FIXED_ONLY_FIELDS

SCALES = ("linear", "log", "dB")

REQUIRED_PARAMS = ("m_x", "m_y", "omega_x", "alpha", "gamma_bar")

SIMPLE_METRICS = ("pdf", "cdf", "pout", "pout_bounds", "aof", "cqei", "ber", "qr_curve")

# Campos adicionales que exige cada métrica
METRIC_REQUIREMENTS = {
    "pdf": ("gamma",),
    "cdf": ("gamma",),
    "pout": ("gamma_th",),
    "pout_bounds": ("gamma_th",),
    "qr_curve": ("gamma_th",),
}

# Errores que se registran como faltantes en vez de abortar el barrido
POINT_FAILURES = (SpecialFunctionError, EvaluationError, ChannelParamsError, OverflowError, ZeroDivisionError)


def column_name(field_name: str) -> str:
    """Nombre de columna de un campo: las potencias llevan sufijo _db."""
    return f"{field_name}_db" if field_name in POWER_FIELDS else field_name


def metric_columns(metric: str) -> Tuple[str, ...]:
    """Columnas que produce una métrica."""
    if metric == "pout_bounds":
        return ("pout_lower", "pout_upper", "pout_exact")
    if metric == "qr_curve":
        return ("qr_pout", "qr_ber")
    if metric.startswith("moment:"):
        return ("moment_" + metric.split(":", 1)[1],)
    return (metric,)


def _validate_metric(metric: str) -> None:
    if metric in SIMPLE_METRICS:
        return
    if metric.startswith("moment:"):
        order = metric.split(":", 1)[1]
        if order == "k":
            return
        try:
            value = float(order)
        except ValueError:
            raise SweepSpecError(f"Orden de momento inválido: {metric}", "metrics")
        if not (math.isfinite(value) and value > 0):
            raise SweepSpecError(f"El orden de momento debe ser positivo: {metric}", "metrics")
        return
    raise SweepSpecError(f"Métrica desconocida: {metric}", "metrics")


# ============================================================================
# TIPOS
# ============================================================================

@dataclass(frozen=True)
class SweepAxis:
    """Eje barrido: start/stop en dB para potencias, lineales para el resto."""
    field: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.field not in LINEAR_FIELDS + POWER_FIELDS:
            raise SweepSpecError(f"Campo no barrible: {self.field}", self.field)
        if self.scale not in SCALES:
            raise SweepSpecError(f"Escala desconocida '{self.scale}' (opciones: {SCALES})", self.field)
        if int(self.count) != self.count or self.count < 2:
            raise SweepSpecError(f"count debe ser un entero >= 2: {self.count}", self.field)
        if self.scale == "dB" and self.field not in POWER_FIELDS:
            raise SweepSpecError(f"La escala dB solo aplica a potencias: {self.field}", self.field)
        if self.scale == "log" and self.field in LINEAR_FIELDS and not (self.start > 0 and self.stop > 0):
            raise SweepSpecError(f"La escala log requiere extremos positivos: {self.field}", self.field)

    def values(self) -> np.ndarray:
        """Valores de la grilla en unidades de entrada (dB para potencias)."""
        if self.field in POWER_FIELDS:
            if self.scale == "dB":
                return np.linspace(self.start, self.stop, self.count)
            low, high = db_to_linear(self.start), db_to_linear(self.stop)
            grid = np.linspace(low, high, self.count) if self.scale == "linear" else np.geomspace(low, high, self.count)
            return np.array([linear_to_db(float(v)) for v in grid])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """
    Especificación de un barrido.

    Attributes:
        fixed: Campo -> valor (dB para potencias)
        swept: 0 a 2 ejes
        metrics: Métricas pedidas
    """
    fixed: Dict[str, float]
    swept: Tuple[SweepAxis, ...]
    metrics: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "swept", tuple(self.swept))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            SweepSpecError: Con el campo culpable en field_name
        """
        for name in self.fixed:
            if name not in ALL_FIELDS:
                raise SweepSpecError(f"Campo desconocido: {name}", name)
        if len(self.swept) > 2:
            raise SweepSpecError(f"Se pueden barrer como máximo 2 campos, hay {len(self.swept)}", "swept")
        swept_names = [axis.field for axis in self.swept]
        for name in swept_names:
            if name in self.fixed:
                raise SweepSpecError(f"El campo {name} está fijo y barrido a la vez", name)
        if len(set(swept_names)) != len(swept_names):
            raise SweepSpecError("Un campo aparece barrido dos veces", swept_names[0])
        if not self.metrics:
            raise SweepSpecError("Hay que pedir al menos una métrica", "metrics")

        produced = [name for metric in self.metrics for name in metric_columns(metric)]
        if len(set(produced)) != len(produced):
            raise SweepSpecError("Hay métricas repetidas", "metrics")

        present = set(self.fixed) | set(swept_names)
        for name in REQUIRED_PARAMS:
            if name not in present:
                raise SweepSpecError(f"Falta el parámetro {name}", name)
        for metric in self.metrics:
            _validate_metric(metric)
            needed = METRIC_REQUIREMENTS.get(metric, ())
            if metric == "moment:k":
                needed = ("k",)
            for name in needed:
                if name not in present:
                    raise SweepSpecError(f"La métrica {metric} requiere el campo {name}", name)
        if "qam_order" in self.fixed:
            order = self.fixed["qam_order"]
            try:
                square_qam_ber(0.0, int(order))
            except ChannelParamsError as e:
                raise SweepSpecError(str(e), "qam_order")

    def points(self) -> List[Dict[str, float]]:
        """Puntos de la grilla en orden determinista (primer eje exterior)."""
        axes = [[(axis.field, float(v)) for v in axis.values()] for axis in self.swept]
        points = []
        for combo in itertools.product(*axes):
            point = dict(self.fixed)
            point.update(combo)
            points.append(point)
        return points

    def to_dict(self) -> dict:
        """Dict JSON estricto: omega_y = -inf dB (sin LoS) se guarda como null."""
        return {
            "fixed": {k: v if math.isfinite(v) else None for k, v in self.fixed.items()},
            "swept": [asdict(axis) for axis in self.swept],
            "metrics": list(self.metrics),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        return cls(
            fixed={k: -math.inf if v is None else float(v) for k, v in data.get("fixed", {}).items()},
            swept=tuple(SweepAxis(**axis) for axis in data.get("swept", [])),
            metrics=tuple(data["metrics"]),
        )


@dataclass(frozen=True)
class MissingValue:
    """Celda faltante de una CurveTable."""
    row: int
    column: str
    reason: str


@dataclass
class CurveTable:
    """
    Tabla de resultados: columnas nombradas de igual largo.

    None marca un valor faltante; su motivo está en missing.
    """
    columns: Dict[str, List[Optional[float]]]
    meta: dict = field(default_factory=dict)
    missing: List[MissingValue] = field(default_factory=list)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"Columnas de distinto largo: {lengths}")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, name: str) -> np.ndarray:
        """Columna como array float (NaN en los faltantes)."""
        return np.array([math.nan if v is None else v for v in self.columns[name]], dtype=float)

    def with_leading_columns(self, leading: Dict[str, float]) -> "CurveTable":
        """Copia con columnas constantes agregadas al principio."""
        columns = {name: [float(value)] * self.n_rows for name, value in leading.items()}
        columns.update(self.columns)
        return CurveTable(columns=columns, meta=dict(self.meta), missing=list(self.missing))

    @classmethod
    def concat(cls, tables: Sequence["CurveTable"], meta: dict) -> "CurveTable":
        """Apila tablas con las mismas columnas, reubicando los faltantes."""
        if not tables:
            raise ValueError("No hay tablas para concatenar")
        names = list(tables[0].columns)
        columns = {name: [] for name in names}
        missing = []
        offset = 0
        for table in tables:
            if list(table.columns) != names:
                raise ValueError("Las tablas a concatenar tienen columnas distintas")
            for name in names:
                columns[name].extend(table.columns[name])
            missing.extend(MissingValue(m.row + offset, m.column, m.reason) for m in table.missing)
            offset += table.n_rows
        return cls(columns=columns, meta=meta, missing=missing)

    # ------------------------------------------------------------------------
    # Serialización
    # ------------------------------------------------------------------------

    def to_csv(self) -> str:
        """CSV con cabecera; reales en forma decimal más corta (repr) y faltantes vacíos."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(names)
        for i in range(self.n_rows):
            writer.writerow(["" if self.columns[n][i] is None else repr(float(self.columns[n][i])) for n in names])
        return buffer.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "columns": self.columns,
                "meta": self.meta,
                "missing": [asdict(m) for m in self.missing],
            },
            indent=2,
        )

    def missing_json(self) -> str:
        return json.dumps([asdict(m) for m in self.missing], indent=2)

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"Formato desconocido: {fmt}")

    def write(self, path: Path, fmt: str = "csv") -> None:
        """
        Escribe la tabla y sus sidecars.

        - <path>.meta.json con el bloque meta (permite replay)
        - <path>.missing.json con los faltantes (solo CSV; JSON los lleva adentro)
        """
        path = Path(path)
        write_text_atomic(path, self.render(fmt))
        meta = dict(self.meta)
        meta["output"] = {"path": path.name, "format": fmt}
        write_text_atomic(path.with_name(path.name + ".meta.json"), json.dumps(meta, indent=2))
        if fmt == "csv":
            write_text_atomic(path.with_name(path.name + ".missing.json"), self.missing_json())


# ============================================================================
# POLÍTICA (serialización para el bloque meta)
# ============================================================================

def policy_to_dict(policy: EvalPolicy) -> dict:
    return asdict(policy)


def policy_from_dict(data: dict) -> EvalPolicy:
    data = dict(data)
    series = SeriesPolicy(**data.pop("series"))
    return EvalPolicy(series=series, **data)


# ============================================================================
# EVALUACIÓN DE UN PUNTO
# ============================================================================

def params_from_point(point: Dict[str, float]) -> ChannelParams:
    """Construye ChannelParams desde un punto (potencias en dB)."""
    return ChannelParams.from_db(
        m_x=point["m_x"],
        m_y=point["m_y"],
        omega_x_db=point["omega_x"],
        omega_y_db=point.get("omega_y"),
        alpha=point["alpha"],
        gamma_bar_db=point["gamma_bar"],
    )


def _metric_values(metric: str, point: Dict[str, float], policy: EvalPolicy) -> Tuple[float, ...]:
    p = params_from_point(point)
    if metric == "pdf":
        return (snr_pdf(p, db_to_linear(point["gamma"]), policy),)
    if metric == "cdf":
        return (snr_cdf(p, db_to_linear(point["gamma"]), policy),)
    if metric == "pout":
        return (outage_probability(p, db_to_linear(point["gamma_th"]), policy),)
    if metric == "pout_bounds":
        bounds = outage_bounds(p, db_to_linear(point["gamma_th"]), policy)
        return (bounds.lower, bounds.upper, bounds.exact)
    if metric == "aof":
        return (amount_of_fading(p, policy),)
    if metric == "cqei":
        return (cqei(p, policy),)
    ber = lambda gamma: square_qam_ber(gamma, int(point.get("qam_order", 16)))
    if metric == "ber":
        return (average_error_rate(p, ber, policy),)
    if metric == "qr_curve":
        return (outage_probability(p, db_to_linear(point["gamma_th"]), policy), average_error_rate(p, ber, policy))
    order = metric.split(":", 1)[1]
    k = point["k"] if order == "k" else float(order)
    return (snr_moment(p, k, policy),)


def evaluate_point(point: Dict[str, float], metrics: Sequence[str],
                   policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> Tuple[Dict[str, Optional[float]], Dict[str, str]]:
    """
    Evalúa todas las métricas en un punto.

    Returns:
        (valores por columna, motivos de falla por columna)
    """
    values: Dict[str, Optional[float]] = {}
    failures: Dict[str, str] = {}
    for metric in metrics:
        names = metric_columns(metric)
        try:
            result = _metric_values(metric, point, policy)
        except POINT_FAILURES as e:
            for name in names:
                values[name] = None
                failures[name] = f"{type(e).__name__}: {e}"
            continue
        for name, value in zip(names, result):
            if math.isfinite(value):
                values[name] = float(value)
            else:
                values[name] = None
                failures[name] = f"Valor no finito: {value!r}"
    return values, failures


def _evaluate_task(task):
    point, metrics, policy = task
    return evaluate_point(point, metrics, policy)


# ============================================================================
# BARRIDO
# ============================================================================

@log_function
def run_sweep(spec: SweepSpec, policy: EvalPolicy = DEFAULT_EVAL_POLICY,
              workers: int = config.DEFAULT_WORKERS, meta: Optional[dict] = None) -> CurveTable:
    """
    Evalúa las métricas del barrido en cada punto de la grilla.

    Args:
        spec: Especificación validada
        policy: Tolerancias de evaluación
        workers: Procesos del pool (1 = en serie)
        meta: Bloque meta a usar (por defecto el del barrido)

    Returns:
        CurveTable con una columna por campo barrido y por métrica
    """
    points = spec.points()
    tasks = [(point, spec.metrics, policy) for point in points]
    if workers <= 1 or len(tasks) <= 1:
        results = [_evaluate_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunksize = max(1, len(tasks) // (4 * workers))
            results = list(pool.map(_evaluate_task, tasks, chunksize=chunksize))

    columns: Dict[str, List[Optional[float]]] = {column_name(axis.field): [] for axis in spec.swept}
    for metric in spec.metrics:
        for name in metric_columns(metric):
            columns[name] = []
    missing = []
    for row, (point, (values, failures)) in enumerate(zip(points, results)):
        for axis in spec.swept:
            columns[column_name(axis.field)].append(point[axis.field])
        for name, value in values.items():
            columns[name].append(value)
        for name, reason in failures.items():
            missing.append(MissingValue(row, name, reason))

    if meta is None:
        meta = {
            "command": "sweep",
            "spec": spec.to_dict(),
            "policy": policy_to_dict(policy),
            "seed": None,
            "app": get_app_info(),
        }
    return CurveTable(columns=columns, meta=meta, missing=missing)


# ============================================================================
# PARSEO DE TEXTO (CLI / archivo de config)
# ============================================================================

def parse_assignment(text: str) -> Tuple[str, str]:
    """Separa 'campo=valor'."""
    if "=" not in text:
        raise SweepSpecError(f"Se esperaba campo=valor: '{text}'")
    name, value = text.split("=", 1)
    return name.strip(), value.strip()


def parse_fixed(text: str) -> Tuple[str, float]:
    """'m_x=1.5' -> ('m_x', 1.5). Para omega_y se acepta 'none' (Ω_Y = 0)."""
    name, value = parse_assignment(text)
    if name not in ALL_FIELDS:
        raise SweepSpecError(f"Campo desconocido: {name}", name)
    if name == "omega_y" and value.lower() == "none":
        return name, -math.inf
    try:
        number = float(value)
    except ValueError:
        raise SweepSpecError(f"Valor no numérico para {name}: '{value}'", name)
    if not math.isfinite(number):
        raise SweepSpecError(f"Valor no finito para {name}: '{value}'", name)
    return name, number


def parse_axis(text: str) -> SweepAxis:
    """'alpha=1:6:21' o 'gamma_bar=0:30:31:dB' -> SweepAxis."""
    name, value = parse_assignment(text)
    parts = value.split(":")
    if len(parts) not in (3, 4):
        raise SweepSpecError(f"Se esperaba campo=inicio:fin:cantidad[:escala]: '{text}'", name)
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise SweepSpecError(f"Eje con valores no numéricos: '{text}'", name)
    scale = parts[3] if len(parts) == 4 else "linear"
    return SweepAxis(field=name, start=start, stop=stop, count=count, scale=scale)
