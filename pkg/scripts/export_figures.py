import sys
from pathlib import Path

# Raíz del proyecto (donde está el paquete alphabx)
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from alphabx.figures import FIGURE_IDS, reproduce_figure
from alphabx.resources import config
from alphabx.resources.utils import ensure_dir

DEST_DIR = Path("figures")
FORMAT = "csv"
# FORMAT = "json"

# fig3 no trae m_X en la leyenda: se usan los valores del barrido de ejemplo
OVERRIDES = {
    "fig3": {"m_x": [1.0, 2.0, 3.0, 4.0, 5.0]},
}

# Muestras Monte-Carlo de fig2 (MC_FULL_SAMPLES para la corrida completa)
MC_SAMPLES = config.MC_DEFAULT_SAMPLES


def export_figure(fig_id: str) -> Path:
    """Genera una figura y la guarda con sus sidecars."""
    ensure_dir(DEST_DIR)
    output = DEST_DIR / f"{fig_id}.{FORMAT}"
    table = reproduce_figure(
        fig_id,
        OVERRIDES.get(fig_id),
        mc_samples=MC_SAMPLES,
        seed=config.DEFAULT_SEED,
    )
    table.write(output, FORMAT)
    if table.missing:
        print(f"  {len(table.missing)} valores faltantes (ver {output.name}.missing.json)")
    return output


def main(fig_ids: list):
    for fig_id in fig_ids:
        print(f"Generando {fig_id}...")
        path = export_figure(fig_id)
        print(f"Escrito: {path}")


if __name__ == "__main__":
    try:
        main(sys.argv[1:] or list(FIGURE_IDS))
    except Exception as e:
        print(f"ERROR: {e}", file=sys.stderr)
        sys.exit(1)
