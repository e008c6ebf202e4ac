"""
Configuración de alphabx.

Este archivo centraliza todas las constantes numéricas y las variables
de entorno que usan la librería y la CLI.
"""

import os


# ============================================================================
# CONFIGURACIÓN DE SERIES (specfun)
# ============================================================================

# Tolerancia absoluta por defecto para el truncamiento de series
SERIES_ABS_TOL = 1e-12

# Tolerancia relativa por defecto
SERIES_REL_TOL = 1e-10

# Máximo de términos por índice de la serie
SERIES_MAX_TERMS = 100_000

# Primer bloque de términos evaluado; se duplica hasta converger
SERIES_INITIAL_TERMS = 64

# Bloque inicial (por índice) para la serie doble de Φ₂
PHI2_INITIAL_TERMS = 32

# Por debajo de este valor de z se usa la serie directa de ₂F₁
GAUSS_DIRECT_LIMIT = 0.5

# Para z < -GAUSS_INVERSION_LIMIT ₂F₁ se evalúa con la conexión en 1/z
GAUSS_INVERSION_LIMIT = 2.0

# Distancia de b - a a un entero por debajo de la cual se usa la fórmula degenerada
GAUSS_DEGENERATE_TOL = 1e-12


# ============================================================================
# CONFIGURACIÓN DE CUADRATURA (channel)
# ============================================================================

QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-10
QUAD_LIMIT = 200

# QUADPACK puede reportar redondeo con un error aún aceptable; se falla
# solo si abserr supera este múltiplo de la tolerancia pedida
QUAD_FAILURE_FACTOR = 1000.0

# Probabilidad de cola por encima del límite superior de integración
TAIL_TOL = 1e-13

# A partir de este argumento de Φ₂ la cdf se evalúa con la mezcla binomial negativa
PHI2_SWITCH_ARGUMENT = 200.0

# Tolerancia de la comprobación dual cdf / forma directa de la outage
DUAL_EVALUATION_TOL = 1e-10

# Si es True, outage_probability compara la forma directa con la cdf
DEBUG_CHECKS = os.getenv("ALPHABX_DEBUG_CHECKS", "false") == "true"


# ============================================================================
# CONFIGURACIÓN DE MONTE-CARLO (mcsim)
# ============================================================================

# Tamaño por defecto de las baterías de validación (CI)
MC_DEFAULT_SAMPLES = 1_000_000

# Tamaño usado en la simulación original
MC_FULL_SAMPLES = 10_000_000

# Mínimo de muestras para validar contra la forma cerrada
MC_MIN_VALIDATION_SAMPLES = 10_000

# Número de errores estándar admitidos en los momentos empíricos
MOMENT_SE_BAND = 3.0

# Órdenes de momento validados por defecto
DEFAULT_MOMENT_ORDERS = (1.0, 2.0)

# Nivel de significancia por defecto del test KS
DEFAULT_SIGNIFICANCE = 0.01

# Máximo de rondas para redibujar envolventes nulas
MAX_REDRAW_ROUNDS = 100


# ============================================================================
# CONFIGURACIÓN DE LA CLI
# ============================================================================

# Número de workers para los barridos. ALPHABX_WORKERS lo sobreescribe.
DEFAULT_WORKERS = int(os.getenv("ALPHABX_WORKERS", "0")) or min(8, os.cpu_count() or 1)

# Brecha relativa máxima cota superior / exacta considerada "razonable"
BOUND_QUALITY_DELTA = 0.25

# Semilla por defecto de los comandos estocásticos
DEFAULT_SEED = 1

# Códigos de salida del proceso
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3


# ============================================================================
# CONFIGURACIÓN DE LOGGING
# ============================================================================

# Si es True, el MethodLogger imprime el árbol de llamadas en stderr
TRACE_ENABLED = os.getenv("ALPHABX_TRACE", "false") == "true"
