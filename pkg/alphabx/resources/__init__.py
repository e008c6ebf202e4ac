"""Recursos compartidos: configuración, trazado, versión y utilidades."""
