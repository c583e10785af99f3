import time
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ostf import (attach_pressure, dissipation_report, make_ensemble,
                  make_grid, onsager_indicator, random_besov_field,
                  shear_flow, structure_functions, taylor_green)
from ostf.testfn import constant_mode

# pinned configuration for the power-law dichotomy runs (n = 256, M = 8):
# spectral band, seed and the dyadic radius ladder used by the reports
DICHOTOMY = {"n": 256, "members": 8, "seed": 7, "k_min": 2, "k_max": 85}


@pytest.fixture(scope="session")
def grid64():
    return make_grid(2, 64)


@pytest.fixture(scope="session")
def grid128():
    return make_grid(2, 128)


@pytest.fixture(scope="session")
def tg64(grid64):
    return taylor_green(grid64)


@pytest.fixture(scope="session")
def shear64(grid64):
    return shear_flow(grid64)


@pytest.fixture(scope="session")
def tg_ensemble(tg64):
    return make_ensemble([tg64])


@pytest.fixture(scope="session")
def shear_ensemble(shear64):
    return make_ensemble([shear64])


@pytest.fixture(scope="session")
def rough_ensemble_128(grid128):
    """Frozen 4-member power-law ensemble with solved pressure, alpha=0.45."""
    members = [attach_pressure(random_besov_field(grid128, 0.45, seed=11,
                                                  k_min=2, k_max=32,
                                                  member=m))
               for m in range(4)]
    return make_ensemble(members)


def _dichotomy_bundle(alpha: float) -> dict:
    """Full analysis of one pinned n=256 power-law ensemble (timed)."""
    cfg = DICHOTOMY
    g = make_grid(2, cfg["n"])
    t0 = time.monotonic()
    members = [random_besov_field(g, alpha, cfg["seed"], k_min=cfg["k_min"],
                                  k_max=cfg["k_max"], member=m)
               for m in range(cfg["members"])]
    ens = make_ensemble(members)
    ladder = [g.extent / 8 / 2**j for j in range(4)]
    report = dissipation_report(ens, ladder, constant_mode(2))
    import numpy as np
    window_ladder = np.geomspace(8 * g.h, g.extent / 8, 8)
    curves = structure_functions(ens, (2.0, 3.0), window_ladder)
    indicator = onsager_indicator(curves[3.0])
    elapsed = time.monotonic() - t0
    return {
        "alpha": alpha,
        "ensemble": ens,
        "report": report,
        "curves": curves,
        "indicator": indicator,
        "elapsed_s": elapsed,
    }


@pytest.fixture(scope="session")
def dichotomy_045():
    return _dichotomy_bundle(0.45)


@pytest.fixture(scope="session")
def dichotomy_025():
    return _dichotomy_bundle(0.25)
