"""
Utilidades de alphabx.

Funciones auxiliares para:
- Conversión dB <-> lineal en la frontera de la CLI
- Cálculo de checksums SHA256 de las muestras exportadas
- Escritura segura de archivos de resultados
"""

import hashlib
import math
import os
import shutil
import tempfile
import time
from pathlib import Path


# ============================================================================
# CONVERSIÓN DE UNIDADES
# ============================================================================

def db_to_linear(value_db: float) -> float:
    """
    Convierte un valor en dB a escala lineal (10^(dB/10)).

    Un valor -inf se convierte en 0 (potencia nula).
    """
    if value_db == -math.inf:
        return 0.0
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """
    Convierte un valor lineal a dB.

    Raises:
        ValueError: Si el valor es negativo
    """
    if value < 0:
        raise ValueError(f"No se puede expresar en dB un valor negativo: {value}")
    if value == 0:
        return -math.inf
    return 10.0 * math.log10(value)


# ============================================================================
# CHECKSUMS
# ============================================================================

def calculate_sha256(file_path: Path, chunk_size: int = 65536) -> str:
    """
    Calcula el hash SHA256 de un archivo.

    Args:
        file_path: Ruta al archivo
        chunk_size: Tamaño del buffer de lectura

    Returns:
        Hash SHA256 en hexadecimal (lowercase)

    Raises:
        FileNotFoundError: Si el archivo no existe
    """
    sha256 = hashlib.sha256()

    with open(file_path, 'rb') as f:
        while True:
            data = f.read(chunk_size)
            if not data:
                break
            sha256.update(data)

    return sha256.hexdigest()


# ============================================================================
# MANEJO DE ARCHIVOS
# ============================================================================

def ensure_dir(directory: Path) -> bool:
    """
    Crea un directorio si no existe.

    Returns:
        True si existe o se creó, False si falló
    """
    try:
        directory.mkdir(parents=True, exist_ok=True)
        return True
    except OSError:
        return False


def safe_rename(src: Path, dst: Path, max_retries: int = 3, retry_delay: float = 0.5) -> bool:
    """
    Renombra/mueve un archivo de forma segura, con reintentos.

    Windows a veces mantiene archivos bloqueados brevemente
    (por ejemplo si la tabla está abierta en una planilla).

    Returns:
        True si se renombró, False si falló
    """
    for attempt in range(max_retries):
        try:
            if dst.exists() and dst.is_dir():
                shutil.rmtree(dst)
            os.replace(src, dst)
            return True
        except PermissionError:
            if attempt < max_retries - 1:
                time.sleep(retry_delay)
            else:
                return False
        except OSError:
            return False
    return False


def write_text_atomic(path: Path, content: str) -> None:
    """
    Escribe un archivo de texto de forma atómica (temporal + rename).

    Así un barrido interrumpido nunca deja una tabla a medio escribir.

    Raises:
        OSError: Si no se pudo mover el temporal al destino
    """
    path = Path(path)
    ensure_dir(path.parent)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    tmp_path = Path(tmp_name)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(content)
        if not safe_rename(tmp_path, path):
            raise OSError(f"No se pudo escribir {path}")
    finally:
        if tmp_path.exists():
            tmp_path.unlink()
