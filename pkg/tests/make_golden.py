"""Regenerate the golden manifests and reduced-grid CSVs under tests/golden.

Run from the repository root: ``python3 tests/make_golden.py``.  Only needed
after a deliberate change to the numerics or the output format.
"""

from dataclasses import replace
from pathlib import Path
import shutil
import tempfile

from lambda_cqed.config import PRESETS, preset_config
from lambda_cqed.runner import run_scenario

GOLDEN = Path(__file__).parent / "golden"
ATOMS = ("li6", "rb87")
GOLDEN_STEPS = 40


def golden_config(atom, preset):
    return replace(preset_config(f"{atom}/{preset}"), steps=GOLDEN_STEPS)


def main():
    GOLDEN.mkdir(exist_ok=True)
    for atom in ATOMS:
        for preset in PRESETS:
            with tempfile.TemporaryDirectory() as tmp:
                res = run_scenario(golden_config(atom, preset), tmp)
                stem = f"{atom}_{preset}"
                shutil.copy(res.manifest_path, GOLDEN / f"{stem}_manifest.json")
                shutil.copy(res.csv_path, GOLDEN / f"{stem}.csv")


if __name__ == "__main__":
    main()
