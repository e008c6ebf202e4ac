"""
Estadística cerrada del canal α-Beaulieu-Xie con sombra (α-BX-shadowed).

Este módulo implementa:
- La constante de normalización C_α
- pdf, cdf y momentos del SNR instantáneo
- AoF (amount of fading) y CQEI
- Probabilidad de outage y sus cotas de alta SNR
- BER promedio por cuadratura (análisis conjunto calidad-fiabilidad)

Todas las fórmulas se expresan con la variable normalizada
u = (γ/γ̄)^{α/2}/C_α, cuya densidad

    f_U(u) = A^{m_Y} u^{m_X-1} e^{-u} ₁F₁(m_Y; m_X; λu) / Γ(m_X)

no depende de α ni de γ̄. A = m_YΩ_X/(m_YΩ_X + m_XΩ_Y) es el peso de la
componente LoS y λ = 1 - A.
"""

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate, special

from alphabx.resources import config
from alphabx.resources.logging_method import log_function
from alphabx.resources.utils import db_to_linear
from alphabx.specfun import (
    SeriesConvergenceError,
    SeriesPolicy,
    appell_phi2,
    exp_scaled_1f1,
    exp_scaled_phi2,
    gauss_2f1,
    ln_gamma,
)


# ============================================================================
# EXCEPCIONES
# ============================================================================

class ChannelParamsError(ValueError):
    """Parámetros o argumentos del canal fuera de dominio."""
    pass


class EvaluationError(Exception):
    """Una forma cerrada produjo un valor inconsistente (p.ej. cdf fuera de [0,1])."""
    pass


class QuadratureError(EvaluationError):
    """La cuadratura adaptativa no alcanzó la tolerancia pedida."""

    def __init__(self, message: str, estimate: float, abserr: float):
        super().__init__(message)
        self.estimate = estimate
        self.abserr = abserr


# ============================================================================
# TIPOS
# ============================================================================

@dataclass(frozen=True)
class ChannelParams:
    """
    Parámetros del modelo. Todas las potencias se guardan en escala lineal.

    Attributes:
        m_x: Severidad global del fading
        m_y: Severidad de la sombra LoS
        omega_x: Potencia NLoS
        omega_y: Potencia LoS (0 = sin componente LoS)
        alpha: Exponente de no linealidad
        gamma_bar: SNR medio
    """
    m_x: float
    m_y: float
    omega_x: float
    omega_y: float
    alpha: float
    gamma_bar: float

    def __post_init__(self):
        for name in ("m_x", "m_y", "omega_x", "alpha", "gamma_bar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ChannelParamsError(f"{name} debe ser positivo y finito: {value}")
        if not (math.isfinite(self.omega_y) and self.omega_y >= 0):
            raise ChannelParamsError(f"omega_y debe ser no negativo y finito: {self.omega_y}")

    @classmethod
    def from_db(cls, m_x: float, m_y: float, omega_x_db: float, omega_y_db: Optional[float],
                alpha: float, gamma_bar_db: float) -> "ChannelParams":
        """
        Construye los parámetros desde potencias en dB.

        omega_y_db=None significa Ω_Y = 0 (sin LoS).
        """
        omega_y = 0.0 if omega_y_db is None else db_to_linear(omega_y_db)
        return cls(
            m_x=m_x,
            m_y=m_y,
            omega_x=db_to_linear(omega_x_db),
            omega_y=omega_y,
            alpha=alpha,
            gamma_bar=db_to_linear(gamma_bar_db),
        )

    def with_(self, **changes) -> "ChannelParams":
        return replace(self, **changes)

    @property
    def los_weight(self) -> float:
        """A = m_YΩ_X/(m_YΩ_X + m_XΩ_Y)."""
        return self.m_y * self.omega_x / (self.m_y * self.omega_x + self.m_x * self.omega_y)

    @property
    def diffuse_weight(self) -> float:
        """λ = m_XΩ_Y/(m_YΩ_X + m_XΩ_Y), calculado sin cancelación."""
        return self.m_x * self.omega_y / (self.m_y * self.omega_x + self.m_x * self.omega_y)

    @property
    def power_ratio(self) -> float:
        """z = m_XΩ_Y/(m_YΩ_X); el argumento de ₂F₁ es -z."""
        return self.m_x * self.omega_y / (self.m_y * self.omega_x)

    @property
    def normalized_mean(self) -> float:
        """E[u] = m_X + m_Y λ/A."""
        return self.m_x + self.m_y * self.power_ratio


@dataclass(frozen=True)
class CAlpha:
    """Constante de normalización C_α."""
    value: float


@dataclass(frozen=True)
class OutageBounds:
    """Cotas de alta SNR de la probabilidad de outage."""
    lower: float
    upper: float
    exact: float

    @property
    def ordered(self) -> bool:
        return self.lower <= self.exact <= self.upper

    @property
    def relative_gap(self) -> float:
        """upper/exact - 1 (inf si exact es 0)."""
        if self.exact == 0:
            return math.inf
        return self.upper / self.exact - 1.0


@dataclass(frozen=True)
class EvalPolicy:
    """Tolerancias de series y cuadraturas usadas por todo el módulo."""
    series: SeriesPolicy = field(default_factory=SeriesPolicy)
    quad_abs_tol: float = config.QUAD_ABS_TOL
    quad_rel_tol: float = config.QUAD_REL_TOL
    quad_limit: int = config.QUAD_LIMIT
    tail_tol: float = config.TAIL_TOL

    def __post_init__(self):
        if not (self.quad_abs_tol > 0 and self.quad_rel_tol > 0 and self.tail_tol > 0):
            raise ChannelParamsError("Las tolerancias de cuadratura deben ser positivas")
        if self.quad_limit < 1:
            raise ChannelParamsError(f"quad_limit debe ser >= 1: {self.quad_limit}")

    @classmethod
    def from_tolerances(cls, abs_tol: float = config.SERIES_ABS_TOL,
                        rel_tol: float = config.SERIES_REL_TOL,
                        max_terms: int = config.SERIES_MAX_TERMS) -> "EvalPolicy":
        """Política con las mismas tolerancias para series y cuadraturas (flags de la CLI)."""
        return cls(
            series=SeriesPolicy(max_terms=max_terms, abs_tol=abs_tol, rel_tol=rel_tol),
            quad_abs_tol=abs_tol,
            quad_rel_tol=rel_tol,
        )


DEFAULT_EVAL_POLICY = EvalPolicy()

# Por encima de este valor de A·u el factor e^{-Au} anula la densidad en float64
NEGLIGIBLE_EXPONENT = 800.0


# ============================================================================
# C_α Y CAMBIO DE VARIABLE
# ============================================================================

@functools.lru_cache(maxsize=4096)
def _log_c_alpha(m_x: float, m_y: float, power_ratio: float, alpha: float, series: SeriesPolicy) -> float:
    s = 2.0 / alpha
    hyper = gauss_2f1(m_y, -s, m_x, -power_ratio, series).value
    return (alpha / 2.0) * (ln_gamma(m_x) - ln_gamma(m_x + s) - math.log(hyper))


def c_alpha(p: ChannelParams, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> CAlpha:
    """
    Constante C_α que fija la media del SNR en γ̄.

    C_α = [Γ(m_X) / (Γ(m_X + 2/α)·₂F₁(m_Y, -2/α; m_X; -m_XΩ_Y/(m_YΩ_X)))]^{α/2}

    Raises:
        SpecialFunctionError: Si ₂F₁ no converge
    """
    return CAlpha(math.exp(_log_c_alpha(p.m_x, p.m_y, p.power_ratio, p.alpha, policy.series)))


def normalized_variate(p: ChannelParams, gamma, ca: Optional[CAlpha] = None,
                       policy: EvalPolicy = DEFAULT_EVAL_POLICY):
    """Retorna u = (γ/γ̄)^{α/2}/C_α (escalar o array)."""
    ca = ca or c_alpha(p, policy)
    return (np.asarray(gamma, dtype=float) / p.gamma_bar) ** (p.alpha / 2.0) / ca.value


def snr_from_normalized(p: ChannelParams, u, ca: Optional[CAlpha] = None,
                        policy: EvalPolicy = DEFAULT_EVAL_POLICY):
    """Inversa de normalized_variate: γ = γ̄·(C_α u)^{2/α}."""
    ca = ca or c_alpha(p, policy)
    return p.gamma_bar * (ca.value * np.asarray(u, dtype=float)) ** (2.0 / p.alpha)


# ============================================================================
# PDF Y CDF
# ============================================================================

def _log_scaled_kummer(p: ChannelParams, u: float, policy: EvalPolicy) -> float:
    """log(e^{-λu}·₁F₁(m_Y; m_X; λu)); 0 cuando Ω_Y = 0."""
    lam = p.diffuse_weight
    if lam == 0 or u == 0:
        return 0.0
    return math.log(exp_scaled_1f1(p.m_y, p.m_x, lam * u, policy.series).value)


def snr_pdf(p: ChannelParams, gamma: float, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """
    Densidad del SNR instantáneo.

    En γ = 0 retorna el límite: 0 si αm_X/2 > 1, inf si < 1, finito si = 1.

    Raises:
        ChannelParamsError: Si gamma < 0
    """
    if not gamma >= 0:
        raise ChannelParamsError(f"gamma debe ser >= 0: {gamma}")
    ca = c_alpha(p, policy)
    A = p.los_weight
    if gamma == 0:
        order = p.alpha * p.m_x / 2.0
        if order > 1:
            return 0.0
        if order < 1:
            return math.inf
        log_limit = (math.log(p.alpha / 2.0) + p.m_y * math.log(A) - math.log(p.gamma_bar)
                     - p.m_x * math.log(ca.value) - ln_gamma(p.m_x))
        return math.exp(log_limit)
    if math.isinf(gamma):
        return 0.0

    u = float(normalized_variate(p, gamma, ca))
    if A * u > NEGLIGIBLE_EXPONENT:
        return 0.0
    # f_γ = (α/(2γ))·u·f_U(u)
    log_pdf = (math.log(p.alpha / 2.0) - math.log(gamma) + p.m_y * math.log(A)
               + p.m_x * math.log(u) - A * u + _log_scaled_kummer(p, u, policy) - ln_gamma(p.m_x))
    return math.exp(log_pdf)


def _mixture_cdf_sf(p: ChannelParams, u: np.ndarray, policy: EvalPolicy) -> Tuple[np.ndarray, np.ndarray]:
    """
    cdf y supervivencia de u como mezcla binomial negativa de gammas.

        F_U(u) = Σ_k w_k P(m_X + k, u),  w_k = (m_Y)_k/k!·A^{m_Y}·λ^k

    P(s+1, u) = P(s, u) - u^s e^{-u}/Γ(s+1) se avanza por recurrencia y cada
    elemento deja de iterar cuando el peso de cola por P_k baja de abs_tol.
    """
    u = np.asarray(u, dtype=float)
    flat = u.ravel()
    cdf = np.zeros_like(flat)
    sf = np.zeros_like(flat)

    infinite = np.isinf(flat)
    cdf[infinite] = 1.0
    active = np.flatnonzero(~infinite)

    A, lam = p.los_weight, p.diffuse_weight
    s = p.m_x
    tol = policy.series.abs_tol
    with np.errstate(divide="ignore"):
        log_u = np.log(flat)
    P = special.gammainc(s, flat)
    Q = special.gammaincc(s, flat)
    log_w = p.m_y * math.log(A)

    k = 0
    while active.size:
        w = math.exp(log_w)
        cdf[active] += w * P[active]
        sf[active] += w * Q[active]

        tail = float(special.betainc(k + 1, p.m_y, lam)) if lam > 0 else 0.0
        done = tail * P[active] <= tol
        sf[active[done]] += tail
        active = active[~done]
        if not active.size:
            break
        if k >= policy.series.max_terms:
            raise SeriesConvergenceError(
                f"La mezcla binomial negativa no convergió con {k} términos",
                terms_used=k,
                partial=float(cdf[active[0]]),
            )

        term = np.exp((s + k) * log_u[active] - flat[active] - special.gammaln(s + k + 1))
        P[active] = np.maximum(P[active] - term, 0.0)
        Q[active] += term
        log_w += math.log((p.m_y + k) / (k + 1)) + math.log(lam)
        k += 1

    return np.clip(cdf, 0.0, 1.0).reshape(u.shape), np.clip(sf, 0.0, 1.0).reshape(u.shape)


def _check_probability(value: float, est_error: float, policy: EvalPolicy, what: str) -> float:
    """Recorta a [0,1] solo si la desviación cabe en la tolerancia de evaluación."""
    tol = max(policy.series.abs_tol, est_error) + policy.series.rel_tol
    if value < -tol or value > 1 + tol:
        raise EvaluationError(f"{what} fuera de [0,1] más allá de la tolerancia: {value!r}")
    return min(max(value, 0.0), 1.0)


def snr_cdf(p: ChannelParams, gamma: float, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """
    cdf del SNR instantáneo en forma cerrada.

        F(γ) = A^{m_Y} u^{m_X} e^{-u} Φ₂(1, m_Y; m_X+1; u, λu) / Γ(m_X+1)

    Con Ω_Y = 0 Φ₂ colapsa a ₁F₁(1; m_X+1; u). Para u grande se usa la
    mezcla binomial negativa, que no sufre cancelación.

    Raises:
        ChannelParamsError: Si gamma < 0
        EvaluationError: Si el valor cae fuera de [0,1] más allá de la tolerancia
    """
    if not gamma >= 0:
        raise ChannelParamsError(f"gamma debe ser >= 0: {gamma}")
    if gamma == 0:
        return 0.0
    if math.isinf(gamma):
        return 1.0

    u = float(normalized_variate(p, gamma, policy=policy))
    if u > config.PHI2_SWITCH_ARGUMENT:
        cdf, _ = _mixture_cdf_sf(p, np.array([u]), policy)
        return float(cdf[0])

    lam = p.diffuse_weight
    if lam == 0:
        scaled = exp_scaled_1f1(1.0, p.m_x + 1.0, u, policy.series)
    else:
        scaled = exp_scaled_phi2(1.0, p.m_y, p.m_x + 1.0, u, lam * u, policy.series)
    log_prefactor = p.m_y * math.log(p.los_weight) + p.m_x * math.log(u) - ln_gamma(p.m_x + 1.0)
    prefactor = math.exp(log_prefactor)
    return _check_probability(prefactor * scaled.value, prefactor * scaled.est_error, policy, "La cdf")


def snr_cdf_vector(p: ChannelParams, gammas, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> np.ndarray:
    """cdf vectorizada (mezcla binomial negativa). Pensada para KS sobre millones de muestras."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0):
        raise ChannelParamsError("Todos los gamma deben ser >= 0")
    cdf, _ = _mixture_cdf_sf(p, normalized_variate(p, gammas, policy=policy), policy)
    return cdf


def snr_sf_vector(p: ChannelParams, gammas, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> np.ndarray:
    """Supervivencia 1 - F(γ) vectorizada, precisa en la cola."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0):
        raise ChannelParamsError("Todos los gamma deben ser >= 0")
    _, sf = _mixture_cdf_sf(p, normalized_variate(p, gammas, policy=policy), policy)
    return sf


# ============================================================================
# MOMENTOS, AoF Y CQEI
# ============================================================================

def _log_normalized_moment(p: ChannelParams, s: float, policy: EvalPolicy) -> float:
    """log E[u^s] = log[Γ(m_X+s)/Γ(m_X)·₂F₁(m_Y, -s; m_X; -z)]."""
    hyper = gauss_2f1(p.m_y, -s, p.m_x, -p.power_ratio, policy.series).value
    return ln_gamma(p.m_x + s) - ln_gamma(p.m_x) + math.log(hyper)


def snr_moment(p: ChannelParams, k: float, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """
    Momento crudo E[γ^k] para k real positivo.

        E[γ^k] = γ̄^k C_α^{2k/α} Γ(m_X + 2k/α)/Γ(m_X) · ₂F₁(m_Y, -2k/α; m_X; -z)

    Raises:
        ChannelParamsError: Si k <= 0
    """
    if not k > 0:
        raise ChannelParamsError(f"El orden del momento debe ser positivo: {k}")
    s = 2.0 * k / p.alpha
    log_c = math.log(c_alpha(p, policy).value)
    return math.exp(k * math.log(p.gamma_bar) + s * log_c + _log_normalized_moment(p, s, policy))


def amount_of_fading(p: ChannelParams, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """
    AoF = Var(γ)/γ̄².

    Se evalúa como E[u^{4/α}]/E[u^{2/α}]² - 1, que no depende de C_α ni de γ̄.
    AoF = 1 corresponde a Rayleigh y AoF > 1 a fading hiper-Rayleigh.
    """
    s = 2.0 / p.alpha
    log_ratio = _log_normalized_moment(p, 2 * s, policy) - 2 * _log_normalized_moment(p, s, policy)
    return math.expm1(log_ratio)


def cqei(p: ChannelParams, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """Índice de estimación de calidad del canal: AoF/γ̄."""
    return amount_of_fading(p, policy) / p.gamma_bar


# ============================================================================
# OUTAGE
# ============================================================================

def _outage_direct(p: ChannelParams, gamma_th: float, policy: EvalPolicy) -> float:
    """Forma directa: Φ₂ sin escalar por la exponencial explícita."""
    ca = c_alpha(p, policy)
    u = float(normalized_variate(p, gamma_th, ca))
    phi2 = appell_phi2(1.0, p.m_y, p.m_x + 1.0, u, p.diffuse_weight * u, policy.series).value
    head = (p.m_y * math.log(p.los_weight) - p.m_x * math.log(ca.value) - ln_gamma(p.m_x + 1.0)
            + (p.alpha * p.m_x / 2.0) * math.log(gamma_th / p.gamma_bar))
    return math.exp(head) * math.exp(-u) * phi2


def outage_probability(p: ChannelParams, gamma_th: float, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """
    Probabilidad de outage P{γ <= γ_th} = F(γ_th).

    Con ALPHABX_DEBUG_CHECKS activo compara además la forma directa
    (Φ₂ sin escalar por e^{-u}) con la cdf.

    Raises:
        ChannelParamsError: Si gamma_th < 0
        EvaluationError: Si las dos evaluaciones difieren más de la tolerancia dual
    """
    exact = snr_cdf(p, gamma_th, policy)
    if config.DEBUG_CHECKS and gamma_th > 0 and not math.isinf(gamma_th):
        u = float(normalized_variate(p, gamma_th, policy=policy))
        # e^{u}·Φ₂ desborda por encima de este rango
        if u <= config.PHI2_SWITCH_ARGUMENT:
            direct = _outage_direct(p, gamma_th, policy)
            if abs(direct - exact) > config.DUAL_EVALUATION_TOL:
                raise EvaluationError(
                    f"Outage inconsistente: cdf={exact!r}, forma directa={direct!r} (γ_th={gamma_th})"
                )
    return exact


def outage_bounds(p: ChannelParams, gamma_th: float, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> OutageBounds:
    """
    Cotas de alta SNR de la outage.

        upper = A^{m_Y} u^{m_X} / Γ(m_X+1)
        lower = upper·e^{-u}

    lower <= exact siempre; exact <= upper para todo umbral solo si
    upper_bound_is_strict(p).
    """
    if not gamma_th > 0:
        raise ChannelParamsError(f"gamma_th debe ser positivo: {gamma_th}")
    u = float(normalized_variate(p, gamma_th, policy=policy))
    log_upper = p.m_y * math.log(p.los_weight) + p.m_x * math.log(u) - ln_gamma(p.m_x + 1.0)
    upper = math.exp(log_upper)
    lower = math.exp(log_upper - u)
    return OutageBounds(lower=lower, upper=upper, exact=outage_probability(p, gamma_th, policy))


def upper_bound_is_strict(p: ChannelParams) -> bool:
    """True si la cota superior domina a la outage exacta para todo umbral (m_Y·λ <= m_X)."""
    return p.m_y * p.diffuse_weight <= p.m_x


# ============================================================================
# CUADRATURA
# ============================================================================

def _quad(func: Callable, lower: float, upper: float, policy: EvalPolicy, **kwargs) -> Tuple[float, float]:
    """scipy.integrate.quad con chequeo explícito de convergencia."""
    result = integrate.quad(
        func, lower, upper,
        epsabs=policy.quad_abs_tol,
        epsrel=policy.quad_rel_tol,
        limit=policy.quad_limit,
        full_output=1,
        **kwargs,
    )
    value, abserr = result[0], result[1]
    if len(result) > 3:
        # QUADPACK avisa de redondeo incluso con errores despreciables
        allowed = config.QUAD_FAILURE_FACTOR * max(policy.quad_abs_tol, policy.quad_rel_tol * abs(value))
        if not math.isfinite(value) or abserr > allowed:
            raise QuadratureError(
                f"Cuadratura no convergió en [{lower}, {upper}]: {result[3]}",
                estimate=value,
                abserr=abserr,
            )
    return value, abserr


def _tail_limit(p: ChannelParams, start: float, policy: EvalPolicy) -> float:
    """Menor u (duplicando desde start) con supervivencia por debajo de tail_tol."""
    u = start
    for _ in range(200):
        _, sf = _mixture_cdf_sf(p, np.array([u]), policy)
        if sf[0] <= policy.tail_tol:
            return u
        u *= 2.0
    raise QuadratureError(f"No se encontró límite de cola para {p}", estimate=math.nan, abserr=math.inf)


def expectation(p: ChannelParams, g: Callable[[float], float], upper: Optional[float] = None,
                bounded: bool = True, policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """
    Calcula E[g(γ)], o ∫₀^upper g(γ) f(γ) dγ si se da upper.

    Se integra en la variable u. En [0, u_split] se usa la cuadratura con
    peso algebraico u^{m_X-1} (QAWS), que absorbe la singularidad en el
    origen; más allá, cuadratura adaptativa normal hasta el límite de cola
    (o hasta inf si g no es acotada, como en los momentos).

    Args:
        p: Parámetros del canal
        g: Función de γ; debe ser finita en γ = 0
        upper: Límite superior en γ (None = infinito)
        bounded: Si g es acotada, se corta en el límite de cola
        policy: Tolerancias

    Returns:
        Valor de la integral

    Raises:
        QuadratureError: Si alguna cuadratura no converge
    """
    ca = c_alpha(p, policy)
    A = p.los_weight
    log_head = p.m_y * math.log(A) - ln_gamma(p.m_x)

    def regular_part(u: float) -> float:
        # f_U(u)/u^{m_X-1}·g(γ(u)), finita en u = 0
        if A * u > NEGLIGIBLE_EXPONENT:
            return 0.0
        kummer = math.exp(_log_scaled_kummer(p, u, policy))
        return math.exp(log_head - A * u) * kummer * g(float(snr_from_normalized(p, u, ca)))

    def full_integrand(u: float) -> float:
        return u ** (p.m_x - 1.0) * regular_part(u)

    u_end = math.inf if upper is None else float(normalized_variate(p, upper, ca))
    u_split = max(1.0, p.normalized_mean)
    if bounded:
        u_hi = min(u_end, _tail_limit(p, u_split, policy))
    else:
        u_hi = u_end

    head_end = min(u_split, u_hi)
    total, _ = _quad(regular_part, 0.0, head_end, policy, weight="alg", wvar=(p.m_x - 1.0, 0.0))
    if u_hi > head_end:
        tail, _ = _quad(full_integrand, head_end, u_hi, policy)
        total += tail
    return total


# ============================================================================
# BER Y ANÁLISIS CALIDAD-FIABILIDAD
# ============================================================================

def square_qam_ber(gamma, order: int = 16):
    """
    BER exacta de M-QAM cuadrada con codificación Gray en AWGN.

    gamma es el SNR por símbolo. Suma de erfc de Cho y Yoon; para M = 16
    equivale a (3Q(q) + 2Q(3q) - Q(5q))/4 con q = √(γ/5).

    Raises:
        ChannelParamsError: Si order no es potencia de 4 mayor o igual a 4
    """
    side = math.isqrt(order)
    bits_per_axis = side.bit_length() - 1
    if order < 4 or side * side != order or (1 << bits_per_axis) != side:
        raise ChannelParamsError(f"El orden QAM debe ser una potencia de 4: {order}")

    gamma = np.asarray(gamma, dtype=float)
    scale = np.sqrt(3.0 * gamma / (2.0 * (order - 1)))
    ber = np.zeros_like(gamma)
    for k in range(1, bits_per_axis + 1):
        step = 2 ** (k - 1)
        for i in range(int((1 - 2.0 ** -k) * side)):
            sign = -1.0 if (i * step // side) % 2 else 1.0
            weight = step - math.floor(i * step / side + 0.5)
            ber = ber + sign * weight * special.erfc((2 * i + 1) * scale)
    ber = ber / (side * bits_per_axis)
    return float(ber) if ber.ndim == 0 else ber


def qam16_ber(gamma):
    """BER condicional de QAM-16."""
    return square_qam_ber(gamma, 16)


def average_error_rate(p: ChannelParams, conditional_ber: Callable[[float], float] = qam16_ber,
                       policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> float:
    """
    BER promedio ∫₀^∞ P_b(γ) f(γ) dγ por cuadratura.

    Raises:
        QuadratureError: Si la cuadratura no converge (con la estimación parcial)
        EvaluationError: Si el resultado cae fuera de [0,1]
    """
    value = expectation(p, lambda gamma: float(conditional_ber(gamma)), bounded=True, policy=policy)
    return _check_probability(value, config.QUAD_FAILURE_FACTOR * policy.quad_abs_tol, policy,
                              "La BER promedio")


@log_function
def quality_reliability_curve(p: ChannelParams, gamma_th: float, gamma_bar_grid: List[float],
                              conditional_ber: Callable[[float], float] = qam16_ber,
                              policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> List[Tuple[float, float]]:
    """
    Curva paramétrica (P_out, BER promedio) a medida que varía γ̄.

    Returns:
        Lista de pares (outage, BER) en el orden de gamma_bar_grid
    """
    if len(gamma_bar_grid) == 0:
        raise ChannelParamsError("La grilla de γ̄ no puede estar vacía")
    curve = []
    for gamma_bar in gamma_bar_grid:
        point = p.with_(gamma_bar=float(gamma_bar))
        curve.append((outage_probability(point, gamma_th, policy),
                      average_error_rate(point, conditional_ber, policy)))
    return curve


# ============================================================================
# ENVOLVENTE BX CON SOMBRA (α = 2)
# ============================================================================

def _envelope_params(m_x: float, m_y: float, omega_x: float, omega_y: float) -> ChannelParams:
    # α y γ̄ no intervienen en la envolvente; la variable u = m_X r²/Ω_X
    return ChannelParams(m_x=m_x, m_y=m_y, omega_x=omega_x, omega_y=omega_y, alpha=2.0, gamma_bar=1.0)


def bx_envelope_pdf(r, m_x: float, m_y: float, omega_x: float, omega_y: float,
                    policy: EvalPolicy = DEFAULT_EVAL_POLICY):
    """
    Densidad clásica de la envolvente BX con sombra.

        f_R(r) = 2 m_X^{m_X} A^{m_Y} r^{2m_X-1} / (Γ(m_X) Ω_X^{m_X})
                 · e^{-m_X r²/Ω_X} ₁F₁(m_Y; m_X; λ m_X r²/Ω_X)
    """
    p = _envelope_params(m_x, m_y, omega_x, omega_y)
    A = p.los_weight

    def density(radius: float) -> float:
        if radius <= 0:
            if m_x > 0.5:
                return 0.0
            if m_x < 0.5:
                return math.inf
            return math.exp(math.log(2.0) + m_x * math.log(m_x / omega_x) + m_y * math.log(A) - ln_gamma(m_x))
        u = m_x * radius * radius / omega_x
        if A * u > NEGLIGIBLE_EXPONENT:
            return 0.0
        log_pdf = (math.log(2.0 * m_x / omega_x) + math.log(radius) + p.m_y * math.log(A)
                   + (m_x - 1.0) * math.log(u) - A * u + _log_scaled_kummer(p, u, policy) - ln_gamma(m_x))
        return math.exp(log_pdf)

    r = np.asarray(r, dtype=float)
    values = np.array([density(float(x)) for x in r.ravel()]).reshape(r.shape)
    return float(values) if values.ndim == 0 else values


def bx_envelope_cdf(r, m_x: float, m_y: float, omega_x: float, omega_y: float,
                    policy: EvalPolicy = DEFAULT_EVAL_POLICY) -> np.ndarray:
    """cdf de la envolvente BX con sombra (vectorizada): F_R(r) = F_U(m_X r²/Ω_X)."""
    p = _envelope_params(m_x, m_y, omega_x, omega_y)
    r = np.asarray(r, dtype=float)
    cdf, _ = _mixture_cdf_sf(p, m_x * np.square(np.maximum(r, 0.0)) / omega_x, policy)
    return cdf
