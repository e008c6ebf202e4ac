"""
Sistema de versionado de alphabx.

Este módulo centraliza la información de versión y metadata.
Es usado por:
- Las tablas de resultados (bloque meta de cada CurveTable)
- El comando replay, que avisa si la tabla se generó con otra versión

Versionado Semántico (SemVer):
    MAJOR.MINOR.PATCH
"""

from typing import Any, Dict, Tuple

import numpy as np
import scipy


# ============================================================================
# INFORMACIÓN DE LA APLICACIÓN
# ============================================================================

__version__ = "0.4.0"

APP_NAME = "alphabx"
APP_FULL_NAME = "Estadística de outage del canal α-Beaulieu-Xie con sombra"


# ============================================================================
# FUNCIONES DE VERSIÓN
# ============================================================================

def get_version() -> str:
    """
    Retorna la versión actual de la librería.

    Returns:
        String de versión (ej: "0.4.0")
    """
    return __version__


def parse_version(version_str: str) -> Tuple[int, int, int]:
    """
    Convierte string de versión a tupla.

    Acepta formatos:
        - "1.2.3"
        - "v1.2.3" (con prefijo v)

    Raises:
        ValueError: Si el formato es inválido
    """
    if version_str.startswith('v') or version_str.startswith('V'):
        version_str = version_str[1:]

    parts = version_str.split(".")
    if len(parts) != 3:
        raise ValueError(f"Formato de version invalido: {version_str}")

    return (int(parts[0]), int(parts[1]), int(parts[2]))


def compare_versions(v1: str, v2: str) -> int:
    """
    Compara dos versiones.

    Returns:
        -1 si v1 < v2
         0 si v1 == v2
         1 si v1 > v2

    Example:
        >>> compare_versions("0.3.0", "0.4.0")
        -1
    """
    t1 = parse_version(v1)
    t2 = parse_version(v2)

    if t1 < t2:
        return -1
    elif t1 > t2:
        return 1
    return 0


def get_app_info() -> Dict[str, Any]:
    """
    Retorna la información que se guarda en el bloque meta de las tablas.

    Incluye las versiones de numpy y scipy porque el flujo de números
    aleatorios y las cuadraturas dependen de ellas.
    """
    return {
        "name": APP_NAME,
        "full_name": APP_FULL_NAME,
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
