"""Shared fixtures: single-threaded CLI runner and tiny spec helpers."""

import os
import subprocess
import sys

import pytest

# Pin BLAS/OpenMP pools so subprocess timings and results are stable and
# honestly single-threaded.
_THREAD_PINS = {
    "OMP_NUM_THREADS": "1",
    "OPENBLAS_NUM_THREADS": "1",
    "MKL_NUM_THREADS": "1",
}


@pytest.fixture(scope="session")
def cli_env():
    env = dict(os.environ)
    env.update(_THREAD_PINS)
    return env


@pytest.fixture(scope="session")
def run_cli(cli_env):
    def _run(*args, cwd=None):
        return subprocess.run(
            [sys.executable, "-m", "shocksynth.cli", *map(str, args)],
            capture_output=True,
            text=True,
            env=cli_env,
            cwd=cwd,
        )

    return _run


def write_spec_csv(path, breakpoints):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("freq_hz,peak_accel_m_s2\n")
        for f, v in breakpoints:
            fh.write(f"{f:.12g},{v:.12g}\n")
