"""
Funciones especiales de alphabx.

Evalúa las funciones de las que dependen todas las formas cerradas del
canal: log-gamma, símbolos de Pochhammer, Kummer ₁F₁, Gauss ₂F₁ y la
función confluente de Appell Φ₂. Cada evaluación devuelve un SpecialValue
con una estimación del error de truncamiento.

Todas las series se suman en dominio logarítmico (magnitud + signo) con
scipy.special.logsumexp, así los factores que desbordan por separado
(por ejemplo e^{-x}·Φ₂) se combinan sin overflow.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np
from scipy import special

from alphabx.resources.config import (
    GAUSS_DEGENERATE_TOL,
    GAUSS_DIRECT_LIMIT,
    GAUSS_INVERSION_LIMIT,
    PHI2_INITIAL_TERMS,
    SERIES_ABS_TOL,
    SERIES_INITIAL_TERMS,
    SERIES_MAX_TERMS,
    SERIES_REL_TOL,
)


# ============================================================================
# EXCEPCIONES
# ============================================================================

class SpecialFunctionError(Exception):
    """Error base de las funciones especiales."""
    pass


class SpecialFunctionDomainError(SpecialFunctionError, ValueError):
    """Argumentos fuera del dominio soportado (polos, z ≥ 1, x < 0)."""
    pass


class SeriesConvergenceError(SpecialFunctionError):
    """La serie no alcanzó la tolerancia dentro de max_terms."""

    def __init__(self, message: str, terms_used: int, partial: float):
        super().__init__(message)
        self.terms_used = terms_used
        self.partial = partial


# ============================================================================
# TIPOS
# ============================================================================

@dataclass(frozen=True)
class SeriesPolicy:
    """Política de truncamiento de las series."""
    max_terms: int = SERIES_MAX_TERMS
    abs_tol: float = SERIES_ABS_TOL
    rel_tol: float = SERIES_REL_TOL

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise SpecialFunctionDomainError(f"max_terms debe ser un entero >= 1: {self.max_terms}")
        if not self.abs_tol > 0:
            raise SpecialFunctionDomainError(f"abs_tol debe ser positivo: {self.abs_tol}")
        if not self.rel_tol > 0:
            raise SpecialFunctionDomainError(f"rel_tol debe ser positivo: {self.rel_tol}")

    def doubled(self) -> "SeriesPolicy":
        return replace(self, max_terms=2 * self.max_terms)


@dataclass(frozen=True)
class SpecialValue:
    """Valor de una función especial con su error estimado.

    est_error acota el resto de truncamiento más el redondeo acumulado.
    """
    value: float
    est_error: float
    terms_used: int


DEFAULT_POLICY = SeriesPolicy()

_EPS = np.finfo(float).eps


# ============================================================================
# GAMMA Y POCHHAMMER
# ============================================================================

def _is_nonpositive_integer(a: float) -> bool:
    return a <= 0 and float(a).is_integer()


def ln_gamma(x: float) -> float:
    """
    Logaritmo natural de Γ(x) para x > 0.

    Raises:
        SpecialFunctionDomainError: Si x <= 0 o no es finito
    """
    if not (x > 0) or math.isinf(x):
        raise SpecialFunctionDomainError(f"ln_gamma requiere x > 0 finito: {x}")
    return float(special.gammaln(x))


def log_pochhammer(a: float, n) -> Tuple[np.ndarray, np.ndarray]:
    """
    Símbolo de Pochhammer (a)_n en forma logaritmo + signo.

    Args:
        a: Parámetro real
        n: Entero o array de enteros no negativos

    Returns:
        (log|(a)_n|, signo) con signo en {-1, 0, 1}. Si (a)_n = 0
        el logaritmo es -inf y el signo 0.
    """
    n = np.asarray(n, dtype=float)
    if _is_nonpositive_integer(a):
        # (a)_n = (-1)^n (-a)!/(-a-n)! mientras n <= -a, y 0 después
        m = -a
        alive = n <= m
        safe_n = np.where(alive, n, 0.0)
        log_abs = np.where(alive, special.gammaln(m + 1) - special.gammaln(m - safe_n + 1), -np.inf)
        sign = np.where(alive, np.where(safe_n % 2 == 0, 1.0, -1.0), 0.0)
        return log_abs, sign
    log_abs = special.gammaln(a + n) - special.gammaln(a)
    sign = special.gammasgn(a + n) * special.gammasgn(a)
    return log_abs, sign


# ============================================================================
# MOTOR DE SERIES SIMPLES
# ============================================================================

def _hyper_log_terms(numer: Tuple[float, ...], denom: Tuple[float, ...], z: float) -> Callable:
    """Construye la función n -> (log|t_n|, signo) de una serie pFq."""
    log_z = math.log(abs(z))
    z_sign = 1.0 if z > 0 else -1.0

    def terms(n: np.ndarray):
        log_abs = n * log_z - special.gammaln(n + 1)
        sign = np.where(n % 2 == 0, 1.0, z_sign)
        for a in numer:
            la, sa = log_pochhammer(a, n)
            log_abs = log_abs + la
            sign = sign * sa
        for b in denom:
            lb, sb = log_pochhammer(b, n)
            log_abs = log_abs - lb
            sign = sign * sb
        return log_abs, sign

    return terms


def _terminating_length(numer: Tuple[float, ...]) -> int | None:
    """Número de términos no nulos si algún parámetro superior es entero no positivo."""
    lengths = [int(-a) + 1 for a in numer if _is_nonpositive_integer(a)]
    return min(lengths) if lengths else None


def _signed_sum(log_abs: np.ndarray, sign: np.ndarray, shift: float) -> Tuple[float, float]:
    """Retorna (suma con signo, suma de magnitudes), ambas multiplicadas por e^{-shift}."""
    keep = sign != 0
    if not np.any(keep):
        return 0.0, 0.0
    lse, s = special.logsumexp(log_abs[keep], b=sign[keep], return_sign=True)
    value = float(s) * math.exp(lse - shift) if np.isfinite(lse) else 0.0
    magnitude = math.exp(special.logsumexp(log_abs[keep]) - shift)
    return value, magnitude


def _sum_series(terms: Callable, limit_ratio: float, policy: SeriesPolicy,
                shift: float = 0.0, terminating: int | None = None,
                name: str = "serie") -> SpecialValue:
    """
    Suma una serie con bloques que se duplican hasta cumplir la política.

    El resto se acota como la cola geométrica del último término con razón
    max(última razón observada, razón límite de la serie).

    Raises:
        SeriesConvergenceError: Si no converge dentro de policy.max_terms
    """
    if terminating is not None and terminating <= policy.max_terms:
        n = np.arange(terminating, dtype=float)
        log_abs, sign = terms(n)
        value, magnitude = _signed_sum(log_abs, sign, shift)
        return SpecialValue(value, 4 * _EPS * magnitude, terminating)

    n_terms = min(SERIES_INITIAL_TERMS, policy.max_terms)
    while True:
        n = np.arange(n_terms, dtype=float)
        log_abs, sign = terms(n)
        value, magnitude = _signed_sum(log_abs, sign, shift)
        rounding = 4 * _EPS * magnitude

        if n_terms >= 2:
            last_ratio = math.exp(log_abs[-1] - log_abs[-2])
        else:
            last_ratio = math.inf
        rho = max(last_ratio, limit_ratio)
        if rho < 1:
            tail = math.exp(log_abs[-1] - shift) * rho / (1 - rho)
        else:
            tail = math.inf
        est = tail + rounding

        if est <= max(policy.abs_tol, policy.rel_tol * abs(value)):
            return SpecialValue(value, est, n_terms)
        if n_terms >= policy.max_terms:
            raise SeriesConvergenceError(
                f"La {name} no convergió con {n_terms} términos (error estimado {est:.3g})",
                terms_used=n_terms,
                partial=value,
            )
        n_terms = min(2 * n_terms, policy.max_terms)


# ============================================================================
# KUMMER ₁F₁
# ============================================================================

def _kummer(a: float, b: float, z: float, policy: SeriesPolicy, scaled: bool) -> SpecialValue:
    if _is_nonpositive_integer(b):
        raise SpecialFunctionDomainError(f"₁F₁ no está definida para b entero no positivo: b={b}")
    if z == 0:
        return SpecialValue(1.0, 0.0, 1)

    if z > 0:
        # e^{-z} se absorbe en el exponente de cada término
        shift = z if scaled else 0.0
        terms = _hyper_log_terms((a,), (b,), z)
        return _sum_series(terms, 0.0, policy, shift=shift,
                           terminating=_terminating_length((a,)), name="serie ₁F₁")

    # Transformación de Kummer: ₁F₁(a;b;z) = e^z ₁F₁(b-a;b;-z), serie sin cancelación
    shift = 0.0 if scaled else -z
    terms = _hyper_log_terms((b - a,), (b,), -z)
    return _sum_series(terms, 0.0, policy, shift=shift,
                       terminating=_terminating_length((b - a,)), name="serie ₁F₁")


def kummer_1f1(a: float, b: float, z: float, policy: SeriesPolicy = DEFAULT_POLICY) -> SpecialValue:
    """
    Función hipergeométrica confluente de Kummer ₁F₁(a; b; z).

    Para z < 0 usa la transformación de Kummer, que convierte la serie
    alternante en una de términos positivos.

    Raises:
        SpecialFunctionDomainError: Si b es entero no positivo
        SeriesConvergenceError: Si la serie no converge bajo la política
    """
    return _kummer(a, b, z, policy, scaled=False)


def exp_scaled_1f1(a: float, b: float, z: float, policy: SeriesPolicy = DEFAULT_POLICY) -> SpecialValue:
    """Retorna e^{-z}·₁F₁(a; b; z) sin desbordar para z grande."""
    return _kummer(a, b, z, policy, scaled=True)


# ============================================================================
# GAUSS ₂F₁
# ============================================================================

def _pole_mask(x: np.ndarray) -> np.ndarray:
    return (x <= 0) & (x == np.floor(x))


def _gauss_inverse(a: float, b: float, c: float, z: float, policy: SeriesPolicy) -> SpecialValue:
    """
    ₂F₁(a, b; c; z) para z < -1 con la conexión en 1/z:

        Γ(c)Γ(b-a)/(Γ(b)Γ(c-a)) (-z)^{-a} ₂F₁(a, 1-c+a; 1-b+a; 1/z)
      + Γ(c)Γ(a-b)/(Γ(a)Γ(c-b)) (-z)^{-b} ₂F₁(b, 1-c+b; 1-a+b; 1/z)

    Si b - a es entero los dos sumandos tienen polos que se cancelan y se
    usa la forma límite con logaritmos.
    """
    diff = b - a
    m = round(diff)
    if abs(diff - m) <= GAUSS_DEGENERATE_TOL * max(1.0, abs(diff)):
        if m < 0:
            a, b, m = b, a, -m
        return _gauss_inverse_degenerate(a, int(m), c, z, policy)

    log_mz = math.log(-z)
    x = 1.0 / z
    value = error = magnitude = 0.0
    terms_used = 0
    for p, q in ((a, b), (b, a)):
        if _is_nonpositive_integer(c - p):
            continue
        log_coef = float(special.gammaln(c) + special.gammaln(q - p) - special.gammaln(q)
                         - special.gammaln(c - p) - p * log_mz)
        coef_sign = float(special.gammasgn(c) * special.gammasgn(q - p)
                          * special.gammasgn(q) * special.gammasgn(c - p))
        numer = (p, 1.0 - c + p)
        piece = _sum_series(_hyper_log_terms(numer, (1.0 - q + p,), x), abs(x), policy,
                            shift=-log_coef, terminating=_terminating_length(numer),
                            name="serie ₂F₁ (1/z)")
        value += coef_sign * piece.value
        error += piece.est_error
        magnitude += abs(piece.value)
        terms_used += piece.terms_used
    # Redondeo de la suma de los dos sumandos, que pueden cancelarse
    return SpecialValue(value, error + 4 * _EPS * magnitude, terms_used)


def _gauss_inverse_degenerate(a: float, m: int, c: float, z: float, policy: SeriesPolicy) -> SpecialValue:
    """
    ₂F₁(a, a+m; c; z) para z < -1 y m entero >= 0.

    Suma finita de m términos en 1/z más la serie con ln(-z) y digammas.
    Los factores 1/Γ(c-a-m-k) que caen en polos se reemplazan por su límite
    ψ(x)/Γ(x) -> (-1)^{n+1} n! en x = -n.
    """
    log_mz = math.log(-z)
    log_gc, sign_gc = float(special.gammaln(c)), float(special.gammasgn(c))
    value = error = magnitude = 0.0
    terms_used = 0

    if m > 0:
        def finite_terms(k: np.ndarray):
            la, sa = log_pochhammer(a, k)
            x = c - a - k
            pole = _pole_mask(x)
            safe_x = np.where(pole, 0.5, x)
            log_abs = la + special.gammaln(m - k) - special.gammaln(k + 1) - special.gammaln(safe_x) - k * log_mz
            sign = sa * np.where(k % 2 == 0, 1.0, -1.0) * np.where(pole, 0.0, special.gammasgn(safe_x))
            return log_abs, sign

        log_pref = log_gc - a * log_mz - float(special.gammaln(a + m))
        sign_pref = sign_gc * float(special.gammasgn(a + m))
        piece = _sum_series(finite_terms, 0.0, policy, shift=-log_pref, terminating=m,
                            name="serie ₂F₁ (1/z, parte finita)")
        value += sign_pref * piece.value
        error += piece.est_error
        magnitude += abs(piece.value)
        terms_used += piece.terms_used

    def log_terms(k: np.ndarray):
        lp, sp = log_pochhammer(a + m, k)
        x = c - a - m - k
        pole = _pole_mask(x)
        safe_x = np.where(pole, 0.5, x)
        ell = (log_mz + special.psi(1 + m + k) + special.psi(1 + k)
               - special.psi(a + m + k) - special.psi(safe_x))
        n = np.where(pole, -x, 0.0)
        with np.errstate(divide="ignore"):
            log_g = np.where(pole, special.gammaln(n + 1), np.log(np.abs(ell)) - special.gammaln(safe_x))
        sign_g = np.where(pole, np.where(n % 2 == 0, 1.0, -1.0), np.sign(ell) * special.gammasgn(safe_x))
        log_abs = lp - special.gammaln(k + 1) - special.gammaln(k + m + 1) - (k + m) * log_mz + log_g
        return log_abs, sp * sign_g

    log_pref = log_gc - a * log_mz - float(special.gammaln(a))
    sign_pref = sign_gc * float(special.gammasgn(a)) * (-1.0 if m % 2 else 1.0)
    piece = _sum_series(log_terms, 1.0 / abs(z), policy, shift=-log_pref,
                        name="serie ₂F₁ (1/z, logarítmica)")
    value += sign_pref * piece.value
    error += piece.est_error
    magnitude += abs(piece.value)
    terms_used += piece.terms_used
    return SpecialValue(value, error + 4 * _EPS * magnitude, terms_used)


def gauss_2f1(a: float, b: float, c: float, z: float, policy: SeriesPolicy = DEFAULT_POLICY) -> SpecialValue:
    """
    Función hipergeométrica de Gauss ₂F₁(a, b; c; z) para z real < 1.

    - Si a o b es entero no positivo la serie es un polinomio y vale para todo z.
    - Para |z| <= 0.5 y para 0 < z < 1 se suma la serie directa.
    - Para -2 <= z < -0.5 se aplica la transformación de Pfaff z -> z/(z-1) ∈ (1/3, 2/3].
    - Para z < -2 se usa la conexión en 1/z (dos series en 1/z, o la forma
      con logaritmos cuando b - a es entero).

    Raises:
        SpecialFunctionDomainError: Si c es entero no positivo, o z >= 1 sin polinomio
        SeriesConvergenceError: Si la serie no converge bajo la política
    """
    if _is_nonpositive_integer(c):
        raise SpecialFunctionDomainError(f"₂F₁ no está definida para c entero no positivo: c={c}")
    if z == 0:
        return SpecialValue(1.0, 0.0, 1)

    terminating = _terminating_length((a, b))
    if terminating is not None:
        terms = _hyper_log_terms((a, b), (c,), z)
        return _sum_series(terms, abs(z), policy, terminating=terminating, name="serie ₂F₁")

    if z >= 1:
        raise SpecialFunctionDomainError(f"₂F₁ solo se evalúa para z < 1: z={z}")

    if z >= -GAUSS_DIRECT_LIMIT:
        terms = _hyper_log_terms((a, b), (c,), z)
        return _sum_series(terms, abs(z), policy, name="serie ₂F₁")

    if z < -GAUSS_INVERSION_LIMIT:
        return _gauss_inverse(a, b, c, z, policy)

    # Pfaff: ₂F₁(a,b;c;z) = (1-z)^{-b} ₂F₁(c-a, b; c; w)  ó  (1-z)^{-a} ₂F₁(a, c-b; c; w)
    w = z / (z - 1)
    if _is_nonpositive_integer(c - b):
        first, second, power = a, c - b, a
    else:
        first, second, power = c - a, b, b
    log_prefactor = -power * math.log1p(-z)
    terms = _hyper_log_terms((first, second), (c,), w)
    return _sum_series(terms, w, policy, shift=-log_prefactor,
                       terminating=_terminating_length((first, second)), name="serie ₂F₁ (Pfaff)")


# ============================================================================
# APPELL Φ₂
# ============================================================================

def _phi2_log_terms(b1: float, b2: float, c: float, x: float, y: float,
                    n_m: int, n_n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Matriz (m, n) de log|términos| y signos de la serie doble de Φ₂."""
    m = np.arange(n_m, dtype=float)[:, None]
    n = np.arange(n_n, dtype=float)[None, :]

    lm, sm = log_pochhammer(b1, m)
    ln, sn = log_pochhammer(b2, n)
    lc, sc = log_pochhammer(c, m + n)

    log_abs = lm + ln - lc - special.gammaln(m + 1) - special.gammaln(n + 1)
    if x > 0:
        log_abs = log_abs + m * math.log(x)
    if y > 0:
        log_abs = log_abs + n * math.log(y)
    sign = sm * sn * sc
    return np.broadcast_to(log_abs, (n_m, n_n)), np.broadcast_to(sign, (n_m, n_n))


def _geometric_tail(log_sums: np.ndarray, shift: float) -> float:
    """Cola geométrica estimada a partir de las dos últimas sumas parciales (fila o columna)."""
    if log_sums.size < 2:
        return math.inf
    last, previous = float(log_sums[-1]), float(log_sums[-2])
    if last == -math.inf:
        return 0.0
    rho = math.exp(last - previous) if previous > -math.inf else 0.0
    if rho >= 1:
        return math.inf
    return math.exp(last - shift) * rho / (1 - rho)


def _phi2(b1: float, b2: float, c: float, x: float, y: float,
          policy: SeriesPolicy, scaled: bool) -> SpecialValue:
    if _is_nonpositive_integer(c):
        raise SpecialFunctionDomainError(f"Φ₂ no está definida para c entero no positivo: c={c}")
    if x < 0 or y < 0:
        raise SpecialFunctionDomainError(f"Φ₂ solo se evalúa para x, y >= 0: x={x}, y={y}")
    if x == 0 and y == 0:
        return SpecialValue(1.0, 0.0, 1)

    shift = x if scaled else 0.0

    # Cada índice crece por separado; un argumento nulo o un b entero
    # no positivo fija su dimensión.
    cap_m = _terminating_length((b1,))
    cap_n = _terminating_length((b2,))
    fixed_m = 1 if x == 0 else cap_m
    fixed_n = 1 if y == 0 else cap_n

    n_m = fixed_m if fixed_m is not None else min(PHI2_INITIAL_TERMS, policy.max_terms)
    n_n = fixed_n if fixed_n is not None else min(PHI2_INITIAL_TERMS, policy.max_terms)

    while True:
        log_abs, sign = _phi2_log_terms(b1, b2, c, x, y, n_m, n_n)
        value, magnitude = _signed_sum(log_abs.ravel(), sign.ravel(), shift)
        rounding = 4 * _EPS * magnitude
        target = max(policy.abs_tol, policy.rel_tol * abs(value))

        masked = np.where(sign != 0, log_abs, -np.inf)
        tail_m = 0.0 if fixed_m is not None else _geometric_tail(special.logsumexp(masked, axis=1), shift)
        tail_n = 0.0 if fixed_n is not None else _geometric_tail(special.logsumexp(masked, axis=0), shift)
        est = tail_m + tail_n + rounding

        if est <= target:
            return SpecialValue(value, est, n_m * n_n)

        grow_m = fixed_m is None and tail_m > target / 2
        grow_n = fixed_n is None and tail_n > target / 2
        if not grow_m and not grow_n:
            # Solo el redondeo excede la tolerancia: no hay más términos que sumar
            return SpecialValue(value, est, n_m * n_n)
        if (grow_m and n_m >= policy.max_terms) or (grow_n and n_n >= policy.max_terms):
            raise SeriesConvergenceError(
                f"La serie Φ₂ no convergió con {n_m}x{n_n} términos (error estimado {est:.3g})",
                terms_used=n_m * n_n,
                partial=value,
            )
        if grow_m:
            n_m = min(2 * n_m, policy.max_terms)
        if grow_n:
            n_n = min(2 * n_n, policy.max_terms)


def appell_phi2(b1: float, b2: float, c: float, x: float, y: float,
                policy: SeriesPolicy = DEFAULT_POLICY) -> SpecialValue:
    """
    Función confluente de Appell (Humbert) Φ₂(b1, b2; c; x, y).

    Serie doble Σ_m Σ_n (b1)_m (b2)_n / (c)_{m+n} · x^m y^n / (m! n!),
    truncada en un rectángulo que crece por índice hasta que la última fila
    y la última columna aportan menos que la tolerancia.

    Args:
        b1, b2: Parámetros superiores
        c: Parámetro inferior (no entero no positivo)
        x, y: Argumentos no negativos
        policy: Política de truncamiento

    Returns:
        SpecialValue con terms_used = número de términos del rectángulo

    Raises:
        SpecialFunctionDomainError: Si c es entero no positivo o x, y < 0
        SeriesConvergenceError: Si algún índice supera policy.max_terms
    """
    return _phi2(b1, b2, c, x, y, policy, scaled=False)


def exp_scaled_phi2(b1: float, b2: float, c: float, x: float, y: float,
                    policy: SeriesPolicy = DEFAULT_POLICY) -> SpecialValue:
    """Retorna e^{-x}·Φ₂(b1, b2; c; x, y) sin desbordar para x grande."""
    return _phi2(b1, b2, c, x, y, policy, scaled=True)
