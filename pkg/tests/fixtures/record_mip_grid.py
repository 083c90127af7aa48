"""Regenerate mip_grid.json: solver answers for every MIP problem on the agreement grid.

Run from the tests directory:  python3 fixtures/record_mip_grid.py [backend spec]
The default backend is builtin-mip (HiGHS); any mip:cmd=... spec works too.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from _grid import FIXTURE, SIZES, grid_instances  # noqa: E402

from confdfa.encodings import build_instance  # noqa: E402
from confdfa.solve import RecordingBackend, backend_from_spec, solve_instance  # noqa: E402


def main(spec="builtin-mip"):
    rec = RecordingBackend(backend_from_spec(spec))
    for _, examples, eta in grid_instances():
        for direction in ("backward", "forward"):
            for n in SIZES:
                solve_instance(build_instance(examples, n, direction, "eta-mip", eta), rec)
    out = Path(__file__).resolve().parent.parent / FIXTURE
    rec.dump(out)
    print(f"{len(rec.answers)} answers written to {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
