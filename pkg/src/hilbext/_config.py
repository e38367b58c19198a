import os

DEFAULT_TOL = 1e-9
# stochastic-search oracles and tower-section agreement
SEARCH_TOL = 1e-3
CORONA_AGREEMENT_TOL = 1e-6


def get_tol(tol=None):
    """Resolve an algebraic tolerance; ``HILBMOD_TOL`` overrides the default."""
    if tol is not None:
        return float(tol)
    env = os.environ.get("HILBMOD_TOL")
    if env:
        value = float(env)
        if not value > 0:
            raise ValueError(f"HILBMOD_TOL must be positive, got {env!r}")
        return value
    return DEFAULT_TOL
