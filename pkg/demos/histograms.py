"""Run the histogram figure preset at reduced size and list the outputs."""

import sys
import tempfile
from pathlib import Path

from amrtriad import parse_config, run_scenario
from amrtriad.presets import preset_document

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
cfg = parse_config(preset_document("figure5"), {"AMRTRIAD_ENSEMBLE__N_PATHS": "40"})
report = run_scenario(cfg, out, threads=4)
for cell in report["cells"]:
    print(f"gamma={cell['gamma']}: mean {cell['ensemble']['histogram_mean']:.0f}  -> {cell['svg_histogram']}")
print(f"report: {out / 'report.json'}")
