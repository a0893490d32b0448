"""Fixtures: CSV inputs produced through the simulator's CLI, its external
interface.  A strongly entangled configuration (20/mm momentum spread) is
used so the patterns carry measurable minima; the fringe scale is
independent of that choice."""

import shutil
import subprocess

import pytest

GHOSTDIFF = shutil.which("ghostdiff")


def _run_ghostdiff(args, cwd):
    proc = subprocess.run([GHOSTDIFF, *args], cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    if GHOSTDIFF is None:
        pytest.skip("requires the ghostdiff CLI on PATH")
    out = tmp_path_factory.mktemp("csv")
    _run_ghostdiff(["run", "ghost", "--out", str(out),
                    "--momentum-spread", "20/mm"], cwd=out)
    _run_ghostdiff(["run", "fringe-sweep", "--out", str(out),
                    "--momentum-spread", "20/mm"], cwd=out)
    return out


@pytest.fixture(scope="session")
def ghost_csv(csv_dir):
    return csv_dir / "ghost_profile.csv"


@pytest.fixture(scope="session")
def sweep_csv(csv_dir):
    return csv_dir / "fringe_sweep.csv"
