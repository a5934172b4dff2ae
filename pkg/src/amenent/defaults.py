"""Every default cap, tolerance and search parameter in one table."""

import os

DEFAULTS = {
    "pattern_cap": 2 ** 24,
    "cell_cap": 24,
    "polytope_cap": 4096,
    "markov_hull_cap": 512,
    "tol": 1e-9,
    "varp_tol": 1e-3,
    "plateau": 3,
    "restarts": 20,
    "seed": 0,
    "log_base": "e",
    "grid_resolution": 1 / 200,
    "tail_k_max": 3,
    "tail_m_max": 5,
    "tail_n_max": 6,
    "search_trials": 1000,
}


def worker_count(default: int = 1) -> int:
    """Worker threads, capped by the AMENENT_THREADS environment variable."""
    env = os.environ.get("AMENENT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return default
