"""
Punto de entrada de la CLI de alphabx.

Subcomandos:
    sweep        Evalúa métricas sobre una grilla de 0 a 2 parámetros
    figure       Genera los datos de una figura (fig2 ... fig7)
    mc-validate  Simula una batería y la valida contra las formas cerradas
    eval         Evalúa métricas en un único punto
    replay       Re-ejecuta un bloque meta (*.meta.json)

Códigos de salida: 0 éxito, 1 uso, 2 falla numérica, 3 validación.

Uso:
    python -m alphabx sweep --fixed m_x=1.5 --fixed m_y=2.5 --fixed omega_x=5 \\
        --fixed omega_y=-5 --fixed alpha=2 --fixed gamma_th=3 \\
        --sweep gamma_bar=0:30:31:dB --metric pout_bounds --out fig.csv
"""

import argparse
import json
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from alphabx.channel import ChannelParamsError, EvalPolicy, EvaluationError
from alphabx.figures import FIGURE_IDS, FigureError, parse_override, reproduce_figure
from alphabx.mcsim import (
    SamplerConfig,
    SamplingError,
    draw_snr_batch,
    export_batch,
    validate_against_closed_form,
)
from alphabx.resources import config
from alphabx.resources.logging_method import log_function, method_logger
from alphabx.resources.utils import write_text_atomic
from alphabx.resources.version import APP_NAME, compare_versions, get_app_info, get_version
from alphabx.specfun import SpecialFunctionError
from alphabx.sweep import (
    CurveTable,
    REQUIRED_PARAMS,
    SweepSpec,
    SweepSpecError,
    params_from_point,
    parse_axis,
    parse_fixed,
    policy_from_dict,
    policy_to_dict,
    run_sweep,
)


# ============================================================================
# EXCEPCIONES
# ============================================================================

class UsageError(Exception):
    """Argumentos, archivo de configuración o bloque meta inválidos."""
    pass


class ReplayMismatchError(Exception):
    """La re-ejecución no reproduce la salida registrada."""
    pass


# ============================================================================
# OPCIONES
# ============================================================================

# Valores por defecto de todas las opciones. Se aplican después de leer la
# línea de comandos y el archivo --config (los flags tienen prioridad).
DEFAULTS = {
    "abs_tol": config.SERIES_ABS_TOL,
    "rel_tol": config.SERIES_REL_TOL,
    "max_terms": config.SERIES_MAX_TERMS,
    "workers": config.DEFAULT_WORKERS,
    "format": "csv",
    "out": None,
    "fixed": [],
    "sweep": [],
    "metric": [],
    "override": [],
    "mc_samples": config.MC_DEFAULT_SAMPLES,
    "seed": config.DEFAULT_SEED,
    "m_x": None,
    "m_y": None,
    "omega_x": None,
    "omega_y": None,
    "alpha": None,
    "gamma_bar": None,
    "n": config.MC_DEFAULT_SAMPLES,
    "significance": config.DEFAULT_SIGNIFICANCE,
    "orders": list(config.DEFAULT_MOMENT_ORDERS),
    "perturb": [],
    "streams": 1,
    "export": None,
    "check": False,
    "full": False,
}

FORMATS = ("csv", "json")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser que lanza UsageError en vez de terminar el proceso."""

    def error(self, message):
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--abs-tol", type=float, help="Tolerancia absoluta de series y cuadraturas")
    parser.add_argument("--rel-tol", type=float, help="Tolerancia relativa de series y cuadraturas")
    parser.add_argument("--max-terms", type=int, help="Máximo de términos por índice de serie")
    parser.add_argument("--workers", type=int, help="Procesos/hilos en paralelo (ALPHABX_WORKERS)")
    parser.add_argument("--format", help="csv o json")
    parser.add_argument("--out", help="Archivo de salida (por defecto stdout)")


def _add_channel_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m-x", type=float, help="m_X")
    parser.add_argument("--m-y", type=float, help="m_Y")
    parser.add_argument("--omega-x", type=float, help="Ω_X en dB")
    parser.add_argument("--omega-y", help="Ω_Y en dB o 'none' (sin LoS)")
    parser.add_argument("--alpha", type=float, help="α")
    parser.add_argument("--gamma-bar", type=float, help="γ̄ en dB")


def build_parser() -> argparse.ArgumentParser:
    """Parser con argument_default=SUPPRESS: solo aparecen los flags dados."""
    parser = _Parser(prog=APP_NAME, description="Estadística del canal α-BX-shadowed",
                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {get_version()}")
    parser.add_argument("--trace", nargs="*", metavar="FUNC", help="Traza de llamadas en stderr")
    parser.add_argument("--config", help="Archivo JSON con valores de los flags")
    commands = parser.add_subparsers(dest="command", required=True)

    sweep = commands.add_parser("sweep", argument_default=argparse.SUPPRESS,
                                help="Barrido de parámetros")
    sweep.add_argument("--fixed", action="append", metavar="CAMPO=VALOR")
    sweep.add_argument("--sweep", action="append", metavar="CAMPO=INICIO:FIN:N[:ESCALA]")
    sweep.add_argument("--metric", action="append", metavar="METRICA")
    _add_common(sweep)

    figure = commands.add_parser("figure", argument_default=argparse.SUPPRESS,
                                 help=f"Datos de figura ({', '.join(FIGURE_IDS)})")
    figure.add_argument("figure", metavar="ID")
    figure.add_argument("--override", action="append", metavar="CAMPO=V1,V2,...")
    figure.add_argument("--mc-samples", type=int, help="Muestras Monte-Carlo (fig2; 0 desactiva)")
    figure.add_argument("--seed", type=int)
    figure.add_argument("--full", action="store_true",
                        help=f"Usa {config.MC_FULL_SAMPLES} muestras salvo --mc-samples explícito")
    _add_common(figure)

    validate = commands.add_parser("mc-validate", argument_default=argparse.SUPPRESS,
                                   help="Validación Monte-Carlo")
    _add_channel_flags(validate)
    validate.add_argument("--n", type=int, help="Número de muestras")
    validate.add_argument("--seed", type=int)
    validate.add_argument("--full", action="store_true",
                          help=f"Usa {config.MC_FULL_SAMPLES} muestras salvo --n explícito")
    validate.add_argument("--significance", type=float)
    validate.add_argument("--orders", help="Órdenes de momento separados por coma")
    validate.add_argument("--perturb", action="append", metavar="CAMPO=VALOR",
                          help="Altera solo los parámetros de muestreo")
    validate.add_argument("--streams", type=int, help="Sub-streams del generador")
    validate.add_argument("--export", help="Guarda las muestras (.npy o .csv)")
    _add_common(validate)

    evaluate = commands.add_parser("eval", argument_default=argparse.SUPPRESS,
                                   help="Métricas en un punto")
    evaluate.add_argument("--fixed", action="append", metavar="CAMPO=VALOR")
    evaluate.add_argument("--metric", action="append", metavar="METRICA")
    _add_common(evaluate)

    replay = commands.add_parser("replay", argument_default=argparse.SUPPRESS,
                                 help="Re-ejecuta un bloque meta")
    replay.add_argument("meta", metavar="META_JSON")
    replay.add_argument("--check", action="store_true",
                        help="Compara con la salida registrada (código 3 si difiere)")
    _add_common(replay)
    return parser


def load_config_file(path: str) -> dict:
    """
    Lee el archivo --config: un objeto JSON con nombres de flags como claves.

    Raises:
        UsageError: Archivo ilegible, JSON inválido o clave desconocida
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"No se pudo leer el archivo de configuración {path}: {e}")
    except json.JSONDecodeError as e:
        raise UsageError(f"Archivo de configuración inválido {path}: {e}")
    if not isinstance(data, dict):
        raise UsageError(f"El archivo de configuración debe ser un objeto JSON: {path}")

    values = {}
    for key, value in data.items():
        name = key.lstrip("-").replace("-", "_")
        if name not in DEFAULTS:
            raise UsageError(f"Clave desconocida en {path}: {key}")
        values[name] = value
    return values


def resolve_options(args: argparse.Namespace) -> dict:
    """
    Defaults < archivo --config < flags.

    La clave "_given" guarda los nombres dados explícitamente (flag o archivo).
    """
    given = vars(args)
    from_file = load_config_file(given["config"]) if "config" in given else {}
    options = dict(DEFAULTS)
    options.update(from_file)
    options.update(given)
    options["_given"] = set(given) | set(from_file)
    return options


def _as_list(value) -> List[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    if isinstance(value, dict):
        return [f"{k}={v}" for k, v in value.items()]
    return [str(v) for v in value]


def sample_count(options: dict, key: str) -> int:
    """Tamaño Monte-Carlo: --full usa MC_FULL_SAMPLES salvo que `key` venga explícito."""
    if options["full"] and key not in options["_given"]:
        return config.MC_FULL_SAMPLES
    try:
        return int(options[key])
    except (TypeError, ValueError):
        raise UsageError(f"--{key.replace('_', '-')} debe ser entero: {options[key]}")


def _parse_orders(value) -> List[float]:
    items = value.split(",") if isinstance(value, str) else list(value)
    try:
        orders = [float(v) for v in items if str(v).strip()]
    except ValueError:
        raise UsageError(f"Órdenes de momento inválidos: {value}")
    if not orders or any(not k > 0 for k in orders):
        raise UsageError(f"Los órdenes de momento deben ser positivos: {value}")
    return orders


def build_policy(options: dict) -> EvalPolicy:
    try:
        return EvalPolicy.from_tolerances(
            abs_tol=float(options["abs_tol"]),
            rel_tol=float(options["rel_tol"]),
            max_terms=int(options["max_terms"]),
        )
    except (ValueError, TypeError) as e:
        raise UsageError(f"Tolerancias inválidas: {e}")


def _workers(options: dict) -> int:
    workers = int(options["workers"])
    if workers < 1:
        raise UsageError(f"--workers debe ser >= 1: {workers}")
    return workers


# ============================================================================
# RESULTADOS
# ============================================================================

@dataclass
class ReportDocument:
    """Reporte JSON de mc-validate con la misma interfaz de salida que CurveTable."""
    document: dict
    meta: dict
    passed: bool

    def render(self, fmt: str = "json") -> str:
        return json.dumps(self.document, indent=2) + "\n"

    def write(self, path: Path, fmt: str = "json") -> None:
        path = Path(path)
        write_text_atomic(path, self.render(fmt))
        meta = dict(self.meta)
        meta["output"] = {"path": path.name, "format": "json"}
        write_text_atomic(path.with_name(path.name + ".meta.json"), json.dumps(meta, indent=2))


def _emit(result, fmt: str, out: Optional[str]) -> None:
    if fmt not in FORMATS:
        raise UsageError(f"Formato desconocido: {fmt} (opciones: {', '.join(FORMATS)})")
    if out:
        result.write(Path(out), fmt)
        print(f"Escrito {out}", file=sys.stderr)
        return
    content = result.render(fmt)
    sys.stdout.write(content if content.endswith("\n") else content + "\n")
    if isinstance(result, CurveTable) and fmt == "csv" and result.missing:
        print(result.missing_json(), file=sys.stderr)


# ============================================================================
# EJECUCIÓN DE UN BLOQUE META
# ============================================================================

def _run_mc_validate(meta: dict, policy: EvalPolicy, workers: int,
                     export: Optional[str] = None) -> ReportDocument:
    analytic_point = dict(meta["params"])
    sampled_point = dict(analytic_point)
    sampled_point.update(meta.get("perturb", {}))
    try:
        analytic = params_from_point(analytic_point)
        cfg = SamplerConfig(
            params=params_from_point(sampled_point),
            n_samples=int(meta["n_samples"]),
            seed=int(meta["seed"]),
            n_streams=int(meta["n_streams"]),
        )
    except (ChannelParamsError, SamplingError) as e:
        raise UsageError(str(e))

    batch = draw_snr_batch(cfg, workers=min(workers, cfg.n_streams), policy=policy)
    report = validate_against_closed_form(
        batch, meta["orders"], float(meta["significance"]), params=analytic, policy=policy
    )
    if export:
        fmt = "csv" if Path(export).suffix.lower() == ".csv" else "npy"
        export_batch(batch, Path(export), fmt)

    document = report.to_dict()
    document["redraws"] = batch.redraws
    document["meta"] = meta
    return ReportDocument(document=document, meta=meta, passed=report.passed)


@log_function
def execute_meta(meta: dict, policy: EvalPolicy, workers: int, export: Optional[str] = None):
    """
    Ejecuta un bloque meta (nuevo o registrado).

    Returns:
        CurveTable (sweep, eval, figure) o ReportDocument (mc-validate)

    Raises:
        UsageError: Comando desconocido o bloque incompleto
    """
    command = meta.get("command")
    try:
        if command in ("sweep", "eval"):
            spec = SweepSpec.from_dict(meta["spec"])
            return run_sweep(spec, policy, workers if command == "sweep" else 1, meta=meta)
        if command == "figure":
            table = reproduce_figure(
                meta["figure"],
                meta.get("overrides", {}),
                mc_samples=int(meta.get("mc_samples", 0)),
                seed=int(meta["seed"]) if meta.get("seed") is not None else config.DEFAULT_SEED,
                policy=policy,
                workers=workers,
            )
            table.meta = meta
            return table
        if command == "mc-validate":
            return _run_mc_validate(meta, policy, workers, export)
    except KeyError as e:
        raise UsageError(f"Al bloque meta le falta la clave {e}")
    raise UsageError(f"Comando desconocido en el bloque meta: {command}")


# ============================================================================
# SUBCOMANDOS
# ============================================================================

def _spec_from_options(options: dict, allow_axes: bool) -> SweepSpec:
    fixed = {}
    for text in _as_list(options["fixed"]):
        name, value = parse_fixed(text)
        if name in fixed:
            raise SweepSpecError(f"Campo fijado dos veces: {name}", name)
        fixed[name] = value
    axes = tuple(parse_axis(text) for text in _as_list(options["sweep"])) if allow_axes else ()
    return SweepSpec(fixed=fixed, swept=axes, metrics=tuple(_as_list(options["metric"])))


def _table_meta(command: str, spec: SweepSpec, policy: EvalPolicy) -> dict:
    return {
        "command": command,
        "spec": spec.to_dict(),
        "policy": policy_to_dict(policy),
        "seed": None,
        "app": get_app_info(),
    }


@log_function
def command_sweep(options: dict) -> int:
    policy = build_policy(options)
    spec = _spec_from_options(options, allow_axes=True)
    table = execute_meta(_table_meta("sweep", spec, policy), policy, _workers(options))
    _emit(table, options["format"], options["out"])
    return config.EXIT_OK


@log_function
def command_eval(options: dict) -> int:
    policy = build_policy(options)
    spec = _spec_from_options(options, allow_axes=False)
    table = execute_meta(_table_meta("eval", spec, policy), policy, 1)
    _emit(table, options["format"], options["out"])
    for m in table.missing:
        print(f"(e002) {m.column}: {m.reason}", file=sys.stderr)
    return config.EXIT_NUMERICAL if table.missing else config.EXIT_OK


@log_function
def command_figure(options: dict) -> int:
    policy = build_policy(options)
    overrides = {}
    for text in _as_list(options["override"]):
        name, values = parse_override(text)
        overrides[name] = values
    table = reproduce_figure(
        options["figure"],
        overrides,
        mc_samples=sample_count(options, "mc_samples"),
        seed=int(options["seed"]),
        policy=policy,
        workers=_workers(options),
    )
    _emit(table, options["format"], options["out"])
    return config.EXIT_OK


@log_function
def command_mc_validate(options: dict) -> int:
    policy = build_policy(options)
    point = {}
    for name in REQUIRED_PARAMS + ("omega_y",):
        value = options[name]
        if name == "omega_y":
            point[name] = None if value is None or str(value).lower() == "none" else float(value)
        elif value is None:
            raise UsageError(f"Falta --{name.replace('_', '-')}")
        else:
            point[name] = float(value)

    perturb = {}
    for text in _as_list(options["perturb"]):
        name, value = parse_fixed(text)
        if name not in point:
            raise UsageError(f"--perturb solo admite parámetros del canal: {name}")
        perturb[name] = None if name == "omega_y" and value == float("-inf") else value

    n = sample_count(options, "n")
    if n < config.MC_MIN_VALIDATION_SAMPLES:
        raise UsageError(f"--n debe ser >= {config.MC_MIN_VALIDATION_SAMPLES}: {n}")
    significance = float(options["significance"])
    if not 0 < significance < 1:
        raise UsageError(f"--significance debe estar en (0,1): {significance}")

    meta = {
        "command": "mc-validate",
        "params": point,
        "perturb": perturb,
        "n_samples": n,
        "seed": int(options["seed"]),
        "n_streams": int(options["streams"]),
        "orders": _parse_orders(options["orders"]),
        "significance": significance,
        "policy": policy_to_dict(policy),
        "app": get_app_info(),
    }
    result = execute_meta(meta, policy, _workers(options), export=options["export"])
    _emit(result, "json", options["out"])
    if not result.passed:
        print("(e003) La batería no pasa la validación contra la forma cerrada", file=sys.stderr)
        return config.EXIT_VALIDATION
    return config.EXIT_OK


@log_function
def command_replay(options: dict) -> int:
    meta_path = Path(options["meta"])
    try:
        recorded = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"Bloque meta inválido {meta_path}: {e}")
    output = recorded.pop("output", None)

    version = recorded.get("app", {}).get("version")
    if version and compare_versions(version, get_version()) != 0:
        print(f"Aviso: el bloque fue generado con {APP_NAME} {version}, se ejecuta {get_version()}",
              file=sys.stderr)

    try:
        policy = policy_from_dict(recorded["policy"])
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"Política inválida en el bloque meta: {e}")
    result = execute_meta(recorded, policy, _workers(options))
    fmt = output["format"] if output and "format" not in options["_given"] else options["format"]

    if options["check"]:
        if not output:
            raise UsageError("El bloque meta no registra un archivo de salida para comparar")
        expected = (meta_path.parent / output["path"]).read_text(encoding="utf-8")
        if result.render(fmt) != expected:
            raise ReplayMismatchError(f"La re-ejecución no coincide con {output['path']}")
        print(f"Replay idéntico a {output['path']}", file=sys.stderr)

    if options["out"] or not options["check"]:
        _emit(result, fmt, options["out"])
    if isinstance(result, ReportDocument) and not result.passed:
        return config.EXIT_VALIDATION
    return config.EXIT_OK


COMMANDS = {
    "sweep": command_sweep,
    "figure": command_figure,
    "mc-validate": command_mc_validate,
    "eval": command_eval,
    "replay": command_replay,
}


# ============================================================================
# ENTRADA
# ============================================================================

def run_cli(argv: Optional[List[str]] = None) -> int:
    """Parsea, resuelve opciones y despacha el subcomando."""
    args = build_parser().parse_args(argv)
    if "trace" in vars(args):
        method_logger.enable(args.trace or None)
    options = resolve_options(args)
    return COMMANDS[options["command"]](options)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Punto de entrada principal.

    Maneja excepciones a nivel global y las traduce a códigos de salida.
    """
    try:
        return run_cli(argv)
    except KeyboardInterrupt:
        print("\nOperación cancelada por el usuario", file=sys.stderr)
        return config.EXIT_USAGE
    except (UsageError, SweepSpecError, FigureError, ChannelParamsError) as e:
        print(f"(e001) Error de uso: {e}", file=sys.stderr)
        return config.EXIT_USAGE
    except (SpecialFunctionError, EvaluationError, SamplingError, OverflowError) as e:
        print(f"(e002) Falla numérica: {type(e).__name__}: {e}", file=sys.stderr)
        return config.EXIT_NUMERICAL
    except ReplayMismatchError as e:
        print(f"(e003) {e}", file=sys.stderr)
        return config.EXIT_VALIDATION
    except OSError as e:
        print(f"(e004) Error de archivo: {e}", file=sys.stderr)
        return config.EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return config.EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
