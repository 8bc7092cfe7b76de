import time

import pytest

from scramblon import brownian

# snapshot times (as kappa*t) shared across the suite; one large run feeds
# the figure comparison, the kappa fit, the protocol band, and the growth
# and convergence properties
KT_LIST = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.6,
           5.5, 5.6, 5.7, 5.8, 5.9, 6.0, 7.0, 8.0, 10.0)
BIG_N = 10_000


@pytest.fixture(scope="session")
def big_run():
    """One N = 10^4 master-equation run shared by every test that needs it."""
    times = [kt / brownian.KAPPA for kt in KT_LIST]
    params = brownian.BrownianParams.for_snapshots(BIG_N, times)
    start = time.perf_counter()
    snaps = brownian.integrate_master(params)
    wall = time.perf_counter() - start
    return {
        "N": BIG_N,
        "wall_s": wall,
        "snaps": dict(zip(KT_LIST, snaps)),
    }
