import functools
import inspect
import sys
from dataclasses import fields, is_dataclass
from datetime import datetime

import numpy as np

from alphabx.resources.config import TRACE_ENABLED


class MethodLogger:
    """Clase singleton que traza funciones con indentación para mostrar contexto.

    Uso:
        logger = MethodLogger()

        @logger.log_function
        def run_sweep(spec):
            ...

    La indentación aumenta con cada llamada anidada, permitiendo ver:
        ┌─ INPUT: [run_sweep]
        │   ┌─ INPUT: [reproduce_figure]
        │   └─ OUTPUT: [reproduce_figure]
        └─ OUTPUT: [run_sweep]

    El trazado está apagado por defecto (ALPHABX_TRACE o --trace lo encienden)
    y escribe en stderr para no mezclarse con las tablas de stdout.
    """

    _instance = None
    _initialized = False

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if self._initialized:
            return
        self.__class__._initialized = True

        self.enabled = TRACE_ENABLED
        self.indent_level = 0
        self.stream = sys.stderr

        # Cuando una función trigger se ejecuta, se traza TODO hasta que termine
        self.trigger_functions = []
        self._has_triggers = False
        self._trigger_depth = 0
        self._should_log = True

        self.symbols = {
            'input_start': '┌─',
            'output_end': '└─',
            'continue': '│ ',
        }

    def enable(self, triggers: list | None = None) -> None:
        """Enciende el trazado, opcionalmente limitado a ciertos triggers."""
        self.enabled = True
        if triggers:
            self.set_triggers(triggers)
        else:
            self.clear_triggers()

    def disable(self) -> None:
        self.enabled = False
        self.clear_triggers()

    def _get_indent(self) -> str:
        return "│   " * self.indent_level

    def _print_log(self, message: str, is_input: bool = True):
        """Imprime un mensaje con la indentación y formato correctos."""
        symbol = self.symbols['input_start'] if is_input else self.symbols['output_end']
        prefix = f"{self._get_indent()}{symbol}"
        if is_input:
            continuation = self._get_indent() + self.symbols['continue'] + "  "
        else:
            continuation = self._get_indent() + "   "
        lines = message.split('\n')
        print(f"{prefix} {lines[0]}", file=self.stream)
        for line in lines[1:]:
            print(f"{continuation}{line}", file=self.stream)

    def set_triggers(self, functions: list | None = None):
        """Configura los triggers de trazado.

        Ejemplo:
            logger.set_triggers(functions=["run_sweep"])
            # Solo se ve el árbol que cuelga de run_sweep.
        """
        self.trigger_functions = functions or []
        self._has_triggers = bool(self.trigger_functions)
        self._trigger_depth = 0
        self._should_log = not self._has_triggers

    def clear_triggers(self):
        """Limpia todos los triggers, traza todo."""
        self.trigger_functions = []
        self._has_triggers = False
        self._trigger_depth = 0
        self._should_log = True

    def _is_trigger(self, function_name: str) -> bool:
        return self._has_triggers and function_name in self.trigger_functions

    def _format_value(self, value, indent_level: int = 0) -> str:
        """Formatea un valor para el log.

        Los arrays de numpy se resumen (forma, tipo, rango); nunca se vuelcan
        completos porque las baterías de Monte-Carlo tienen millones de muestras.
        """
        indent = "  " * indent_level
        next_indent = "  " * (indent_level + 1)

        if value is None:
            return "None"
        if isinstance(value, np.ndarray):
            if value.size == 0:
                return f"ndarray(shape={value.shape}, dtype={value.dtype})"
            if np.issubdtype(value.dtype, np.number):
                return (f"ndarray(shape={value.shape}, dtype={value.dtype}, "
                        f"min={np.nanmin(value):.6g}, max={np.nanmax(value):.6g})")
            return f"ndarray(shape={value.shape}, dtype={value.dtype})"
        if isinstance(value, (bool, int, float, np.floating, np.integer)):
            return str(value)
        if isinstance(value, str):
            return value
        if is_dataclass(value) and not isinstance(value, type):
            inner = {f.name: getattr(value, f.name) for f in fields(value)}
            return f"{type(value).__name__}" + self._format_value(inner, indent_level)
        if isinstance(value, dict):
            if not value:
                return "{}"
            lines = ["{"]
            for k, v in value.items():
                formatted = self._format_value(v, indent_level + 1)
                lines.append(f"{next_indent}{k}: {formatted}")
            lines.append(f"{indent}}}")
            return "\n".join(lines)
        if isinstance(value, (list, tuple)):
            if not value:
                return "[]" if isinstance(value, list) else "()"
            if len(value) > 8:
                return f"{type(value).__name__}(len={len(value)})"
            bracket_open, bracket_close = ("[", "]") if isinstance(value, list) else ("(", ")")
            lines = [bracket_open]
            for item in value:
                lines.append(f"{next_indent}{self._format_value(item, indent_level + 1)}")
            lines.append(f"{indent}{bracket_close}")
            return "\n".join(lines)
        return str(value)

    def simplify_logging_message(self, message) -> str:
        return self._format_value(message, indent_level=0)

    def log_function(self, func):
        """Decorador que traza una función cuando se ejecuta.

        Imprime con indentación:
        - Nombre de la función
        - Argumentos de entrada
        - Valor de retorno
        - Tiempo de ejecución
        """
        logger = self
        function_name = func.__name__
        signature = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            if not logger.enabled:
                return func(*args, **kwargs)

            is_trigger = logger._is_trigger(function_name)
            if logger._has_triggers:
                if is_trigger:
                    logger._trigger_depth += 1
                    logger._should_log = True
                elif not logger._should_log:
                    return func(*args, **kwargs)

            params = list(signature.parameters.keys())
            args_dict = dict(zip(params, args))
            args_dict.update(kwargs)
            args_lines = []
            for k, v in args_dict.items():
                formatted = logger.simplify_logging_message(v).replace("\n", "\n    ")
                args_lines.append(f"{k}: {formatted}")
            args_str = "\n    ".join(args_lines)

            input_msg = f"INPUT: [{function_name}]\n"
            input_msg += f"Args:\n    {args_str}" if args_str else "Args: (sin argumentos)"
            logger._print_log(input_msg, is_input=True)

            logger.indent_level += 1
            start_time = datetime.now()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.indent_level -= 1
                logger._print_log(f"ERROR: [{function_name}]\n{type(e).__name__}: {e}", is_input=False)
                logger._leave_trigger(is_trigger)
                raise
            logger.indent_level -= 1
            duration = datetime.now() - start_time

            formatted_result = logger.simplify_logging_message(result).replace("\n", "\n    ")
            output_msg = f"OUTPUT: [{function_name}]\n"
            output_msg += f"Return: {formatted_result}\n"
            output_msg += f"Time: {duration}"
            logger._print_log(output_msg, is_input=False)

            logger._leave_trigger(is_trigger)
            return result

        return wrapper

    def _leave_trigger(self, is_trigger: bool) -> None:
        # Solo se apaga cuando el último trigger activo termina
        if self._has_triggers and is_trigger:
            self._trigger_depth -= 1
            if self._trigger_depth == 0:
                self._should_log = False


# Instancia global para uso conveniente
method_logger = MethodLogger()

log_function = method_logger.log_function
