"""
Simulación Monte-Carlo del canal α-BX-shadowed.

Cadena de generación:
    1. Potencia LoS con sombra: s ~ Gamma(m_Y, Ω_Y/m_Y)
    2. Envolvente BX condicionada a s (chi-cuadrado no central, 2m_X grados de libertad)
    3. Transformación α: γ = γ̄·(C_α m_X R²/Ω_X)^{2/α}

Cada sub-stream usa un generador Philox sembrado con
SeedSequence(seed, spawn_key=(stream_id, j)), así la misma configuración
reproduce la misma batería bit a bit aunque se genere en paralelo.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from alphabx.channel import (
    DEFAULT_EVAL_POLICY,
    ChannelParams,
    ChannelParamsError,
    EvalPolicy,
    amount_of_fading,
    c_alpha,
    snr_cdf_vector,
    snr_from_normalized,
    snr_moment,
)
from alphabx.resources import config
from alphabx.resources.logging_method import log_function
from alphabx.resources.utils import calculate_sha256, ensure_dir, write_text_atomic
from alphabx.resources.version import get_app_info


# ============================================================================
# EXCEPCIONES
# ============================================================================

class SamplingError(Exception):
    """Configuración de muestreo inválida o generación fallida."""
    pass


class InsufficientSamplesError(SamplingError):
    """La batería es demasiado chica para validar contra la forma cerrada."""
    pass


# ============================================================================
# TIPOS
# ============================================================================

STAGES = ("los_shadowing", "bx_envelope", "alpha_transform")


@dataclass(frozen=True)
class SamplerConfig:
    """
    Identidad de una batería de muestras.

    La misma configuración (incluido n_streams) reproduce la misma secuencia.
    """
    params: ChannelParams
    n_samples: int
    seed: int
    stream_id: int = 0
    n_streams: int = 1

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise SamplingError(f"n_samples debe ser un entero positivo: {self.n_samples}")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2 ** 64):
            raise SamplingError(f"seed debe ser un entero de 64 bits sin signo: {self.seed}")
        if int(self.stream_id) != self.stream_id or self.stream_id < 0:
            raise SamplingError(f"stream_id debe ser un entero no negativo: {self.stream_id}")
        if int(self.n_streams) != self.n_streams or self.n_streams < 1:
            raise SamplingError(f"n_streams debe ser un entero positivo: {self.n_streams}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SamplerConfig":
        return cls(
            params=ChannelParams(**data["params"]),
            n_samples=int(data["n_samples"]),
            seed=int(data["seed"]),
            stream_id=int(data.get("stream_id", 0)),
            n_streams=int(data.get("n_streams", 1)),
        )

    def stream_sizes(self) -> list:
        """Tamaño de cada sub-stream; los primeros absorben el resto."""
        base, extra = divmod(self.n_samples, self.n_streams)
        return [base + (1 if j < extra else 0) for j in range(self.n_streams)]

    def generator(self, j: int) -> np.random.Generator:
        """Generador Philox del sub-stream j."""
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, j))
        return np.random.Generator(np.random.Philox(seq))


@dataclass
class SnrSampleBatch:
    """
    Muestras de SNR instantáneo (lineal) con su procedencia.

    Attributes:
        samples: Array de SNR > 0
        config: Configuración que generó la batería (None si vino de afuera)
        redraws: Número de muestras nulas redibujadas
        stages: Etapas aplicadas en orden
    """
    samples: np.ndarray
    config: Optional[SamplerConfig]
    redraws: int = 0
    stages: Tuple[str, ...] = STAGES

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass
class FitReport:
    """Resultado de la validación de una batería contra las formas cerradas."""
    ks_distance: float
    ks_threshold: float
    empirical_moments: Dict[float, float]
    analytic_moments: Dict[float, float]
    moment_stderr: Dict[float, float]
    moment_within_band: Dict[float, bool]
    aof_empirical: float
    aof_analytic: float
    aof_stderr: float
    n_samples: int
    significance: float
    passed: bool = field(default=False)

    @property
    def moment_gaps(self) -> Dict[float, float]:
        return {k: self.empirical_moments[k] - self.analytic_moments[k] for k in self.empirical_moments}

    def to_dict(self) -> dict:
        """Representación JSON (las claves de orden van como string)."""
        def keyed(mapping):
            return {repr(float(k)): v for k, v in mapping.items()}

        return {
            "pass": self.passed,
            "ks_distance": self.ks_distance,
            "ks_threshold": self.ks_threshold,
            "n_samples": self.n_samples,
            "significance": self.significance,
            "empirical_moments": keyed(self.empirical_moments),
            "analytic_moments": keyed(self.analytic_moments),
            "moment_gaps": keyed(self.moment_gaps),
            "moment_stderr": keyed(self.moment_stderr),
            "moment_within_band": keyed(self.moment_within_band),
            "aof_empirical": self.aof_empirical,
            "aof_analytic": self.aof_analytic,
            "aof_stderr": self.aof_stderr,
        }


# ============================================================================
# GENERACIÓN
# ============================================================================

def _draw_normalized(rng: np.random.Generator, p: ChannelParams, size: int) -> np.ndarray:
    """u = m_X R²/Ω_X para size envolventes (sin rechazo)."""
    if p.omega_y > 0:
        los_power = rng.gamma(shape=p.m_y, scale=p.omega_y / p.m_y, size=size)
    else:
        los_power = np.zeros(size)
    noncentrality = 2.0 * p.m_x * los_power / p.omega_x
    # R² = (Ω_X/(2m_X))·χ'²(2m_X, 2m_X s/Ω_X)  =>  u = χ'²/2
    return 0.5 * rng.noncentral_chisquare(df=2.0 * p.m_x, nonc=noncentrality, size=size)


def _draw_stream(cfg: SamplerConfig, j: int, size: int, ca_value: float) -> Tuple[np.ndarray, int]:
    """Envolventes de un sub-stream, redibujando las que dan SNR nulo."""
    p = cfg.params
    rng = cfg.generator(j)
    u = _draw_normalized(rng, p, size)
    redraws = 0
    for _ in range(config.MAX_REDRAW_ROUNDS):
        # La transformación α puede llevar a 0 valores de u diminutos
        bad = np.flatnonzero((u <= 0) | ((ca_value * u) ** (2.0 / p.alpha) <= 0))
        if not bad.size:
            return np.sqrt(u * p.omega_x / p.m_x), redraws
        redraws += int(bad.size)
        u[bad] = _draw_normalized(rng, p, bad.size)
    raise SamplingError(f"Demasiadas muestras nulas tras {config.MAX_REDRAW_ROUNDS} rondas (m_x={p.m_x})")


def _draw_envelopes(cfg: SamplerConfig, workers: int, policy: EvalPolicy) -> Tuple[np.ndarray, int]:
    ca_value = c_alpha(cfg.params, policy).value
    sizes = cfg.stream_sizes()
    jobs = [(j, size) for j, size in enumerate(sizes) if size > 0]
    if workers <= 1 or len(jobs) == 1:
        parts = [_draw_stream(cfg, j, size, ca_value) for j, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _draw_stream(cfg, job[0], job[1], ca_value), jobs))
    # Concatenación en orden de stream: el resultado no depende de workers
    envelope = np.concatenate([part[0] for part in parts])
    return envelope, sum(part[1] for part in parts)


def sample_bx_shadowed_envelope(cfg: SamplerConfig, workers: int = 1,
                                policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> np.ndarray:
    """
    Genera envolventes R del modelo BX con sombra.

    Condicionada a la potencia LoS s ~ Gamma(m_Y, Ω_Y/m_Y), R² sigue la ley BX
    de forma m_X, potencia difusa Ω_X y no centralidad s. El marginal
    corresponde a la densidad bx_envelope_pdf.

    Returns:
        Array de n_samples envolventes positivas
    """
    envelope, _ = _draw_envelopes(cfg, workers, policy)
    return envelope


def alpha_transform(envelope, p: ChannelParams, cfg: Optional[SamplerConfig] = None,
                    redraws: int = 0, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> SnrSampleBatch:
    """
    Aplica la transformación α: γ = γ̄·(C_α m_X R²/Ω_X)^{2/α}.

    La transformación es monótona creciente en R, así que preserva el orden
    de las muestras.

    Raises:
        SamplingError: Si alguna envolvente no es positiva
    """
    envelope = np.asarray(envelope, dtype=float)
    if envelope.size and not np.all(envelope > 0):
        raise SamplingError("Las envolventes deben ser positivas")
    u = p.m_x * np.square(envelope) / p.omega_x
    samples = snr_from_normalized(p, u, c_alpha(p, policy))
    return SnrSampleBatch(samples=samples, config=cfg, redraws=redraws)


@log_function
def draw_snr_batch(cfg: SamplerConfig, workers: int = 1,
                   policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> SnrSampleBatch:
    """
    Ejecuta la cadena completa envolvente -> transformación α.

    Los sub-streams se generan en un pool de hilos y se concatenan en orden.
    """
    envelope, redraws = _draw_envelopes(cfg, workers, policy)
    return alpha_transform(envelope, cfg.params, cfg=cfg, redraws=redraws, policy=policy)


# ============================================================================
# VALIDACIÓN
# ============================================================================

def jackknife_aof(samples) -> Tuple[float, float]:
    """
    AoF empírico (varianza/media²) y su error estándar jackknife.

    Los estimadores leave-one-out se obtienen de las sumas totales en O(n).

    Returns:
        (aof, stderr)
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 3:
        raise InsufficientSamplesError(f"Se necesitan al menos 3 muestras para el jackknife: {n}")
    s1 = x.sum()
    s2 = np.square(x).sum()
    aof = (s2 / n) / (s1 / n) ** 2 - 1.0

    loo_mean = (s1 - x) / (n - 1)
    loo_second = (s2 - np.square(x)) / (n - 1)
    loo_aof = loo_second / np.square(loo_mean) - 1.0
    stderr = math.sqrt((n - 1) / n * np.square(loo_aof - loo_aof.mean()).sum())
    return float(aof), stderr


@log_function
def validate_against_closed_form(batch: SnrSampleBatch,
                                 orders: Sequence[float] = config.DEFAULT_MOMENT_ORDERS,
                                 significance: float = config.DEFAULT_SIGNIFICANCE,
                                 params: Optional[ChannelParams] = None,
                                 policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> FitReport:
    """
    Valida una batería contra la cdf y los momentos en forma cerrada.

    - Test KS bilateral con valor crítico asintótico kstwobign.isf(sig)/√n
    - Momentos crudos empíricos contra snr_moment, con banda de
      MOMENT_SE_BAND errores estándar jackknife

    Args:
        batch: Batería a validar
        orders: Órdenes de momento a comparar
        significance: Nivel del test KS
        params: Parámetros analíticos de referencia (por defecto los de la batería)
        policy: Tolerancias de evaluación

    Returns:
        FitReport con passed = KS dentro del umbral y todos los momentos en banda

    Raises:
        InsufficientSamplesError: Si la batería tiene menos de 10⁴ muestras
        SamplingError: Si no hay parámetros de referencia
    """
    n = len(batch)
    if n < config.MC_MIN_VALIDATION_SAMPLES:
        raise InsufficientSamplesError(
            f"Se necesitan al menos {config.MC_MIN_VALIDATION_SAMPLES} muestras, hay {n}"
        )
    if not 0 < significance < 1:
        raise SamplingError(f"significance debe estar en (0,1): {significance}")
    if params is None:
        if batch.config is None:
            raise SamplingError("La batería no tiene configuración; indicar params")
        params = batch.config.params

    samples = batch.samples
    ks = stats.kstest(samples, lambda x: snr_cdf_vector(params, x, policy))
    threshold = float(stats.kstwobign.isf(significance)) / math.sqrt(n)

    empirical, analytic, stderr, within = {}, {}, {}, {}
    for order in orders:
        order = float(order)
        powered = samples ** order
        empirical[order] = float(powered.mean())
        # El jackknife de una media coincide con std(ddof=1)/√n
        stderr[order] = float(powered.std(ddof=1) / math.sqrt(n))
        analytic[order] = snr_moment(params, order, policy)
        within[order] = abs(empirical[order] - analytic[order]) <= config.MOMENT_SE_BAND * stderr[order]

    aof_empirical, aof_stderr = jackknife_aof(samples)
    ks_distance = float(ks.statistic)
    return FitReport(
        ks_distance=ks_distance,
        ks_threshold=threshold,
        empirical_moments=empirical,
        analytic_moments=analytic,
        moment_stderr=stderr,
        moment_within_band=within,
        aof_empirical=aof_empirical,
        aof_analytic=amount_of_fading(params, policy),
        aof_stderr=aof_stderr,
        n_samples=n,
        significance=significance,
        passed=bool(ks_distance <= threshold and all(within.values())),
    )


def estimate_outage(batch: SnrSampleBatch, gamma_th: float) -> Tuple[float, float]:
    """
    Outage empírica: fracción de muestras <= gamma_th.

    Returns:
        (estimación, error estándar binomial)
    """
    if not gamma_th > 0:
        raise ChannelParamsError(f"gamma_th debe ser positivo: {gamma_th}")
    n = len(batch)
    estimate = float(np.count_nonzero(batch.samples <= gamma_th)) / n
    return estimate, math.sqrt(estimate * (1.0 - estimate) / n)


# ============================================================================
# EXPORTACIÓN
# ============================================================================

def export_batch(batch: SnrSampleBatch, path: Path, fmt: str = "npy") -> Path:
    """
    Guarda las muestras (.npy o .csv) con un sidecar JSON <path>.json.

    El sidecar lleva la SamplerConfig, las redibujadas, las etapas y el
    SHA256 del archivo de muestras.

    Returns:
        Ruta del sidecar

    Raises:
        SamplingError: Si el formato no es npy ni csv
    """
    path = Path(path)
    ensure_dir(path.parent)
    if fmt == "npy":
        with open(path, "wb") as f:
            np.save(f, batch.samples)
    elif fmt == "csv":
        np.savetxt(path, batch.samples, fmt="%.17g", header="snr", comments="")
    else:
        raise SamplingError(f"Formato de exportación desconocido: {fmt}")

    sidecar = path.with_name(path.name + ".json")
    meta = {
        "format": fmt,
        "n_samples": len(batch),
        "config": batch.config.to_dict() if batch.config else None,
        "redraws": batch.redraws,
        "stages": list(batch.stages),
        "sha256": calculate_sha256(path),
        "app": get_app_info(),
    }
    write_text_atomic(sidecar, json.dumps(meta, indent=2))
    return sidecar
