import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from tiletensor.cli import main
from tiletensor.settings import SCENES_DIR

EXAMPLE_SCENES = ("example1_line.json", "example2_axes.json")


def run_all():
    worst = 0
    for name in EXAMPLE_SCENES:
        print(f"[verify] {name}")
        worst = max(worst, main(["verify", str(SCENES_DIR / name), "--oracle", "both"]))
    return worst


if __name__ == "__main__":
    sys.exit(run_all())
