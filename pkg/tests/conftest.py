import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def cascade_run():
    """Default toy cascade trained once per session, with its 50-scene evaluation and wall time."""
    import time

    from gaborfeed.experiments import run_cascade

    t0 = time.perf_counter()
    nets, report, dets, score = run_cascade(seed=0)
    return {"nets": nets, "report": report, "dets": dets, "score": score, "seconds": time.perf_counter() - t0}
