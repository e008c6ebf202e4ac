"""
Librería y CLI del canal α-Beaulieu-Xie con sombra (α-BX-shadowed).

Este paquete contiene:
- specfun: funciones especiales (ln Γ, Pochhammer, ₁F₁, ₂F₁, Φ₂) con control de truncamiento
- channel: estadística en forma cerrada del SNR (pdf, cdf, momentos, AoF, CQEI, outage, BER)
- mcsim: simulación Monte-Carlo y validación contra las formas cerradas
- sweep / figures / main: barridos de parámetros, datos de figuras y la CLI

Las potencias se guardan en escala lineal; la CLI las recibe en dB.
"""

from alphabx.resources.version import __version__
