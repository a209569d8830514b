"""Python access to the skago secret key agreement toolkit.

Tables are row-major over (x, y, z). Report functions return dicts.
"""

import json

from . import _skago

__version__ = _skago.__version__

beta = _skago.beta


def stats(nx, ny, nz, p):
    return json.loads(_skago.stats_json(nx, ny, nz, list(p)))


def mixed(p1, p2, q):
    return json.loads(_skago.mixed_json(p1, p2, q))


def bound_point(nx, ny, nz, p, n, eps_plus_delta, width=1.0):
    return json.loads(_skago.bound_point_json(nx, ny, nz, list(p), n, eps_plus_delta, width))


def simulate(nx, ny, nz, p, n, slices, gamma, lambda_=0.0, key_bits=1, variant="p1", trials=1000, seed=0):
    return json.loads(
        _skago.simulate_json(nx, ny, nz, list(p), n, tuple(slices), gamma, lambda_, key_bits, variant, trials, seed)
    )


def exact(nx, ny, nz, p, n, slices, gamma, lambda_=0.0, key_bits=1, variant="p1", seed=0):
    return json.loads(_skago.exact_json(nx, ny, nz, list(p), n, tuple(slices), gamma, lambda_, key_bits, variant, seed))


def dsbs(alpha0, alpha1):
    """(nx, ny, nz, p) for Z a fair bit, Y = Z ⊕ Bern(α₀), X = Y ⊕ Bern(α₁)."""
    p = []
    for x in range(2):
        for y in range(2):
            for z in range(2):
                p.append(0.5 * (alpha0 if y != z else 1 - alpha0) * (alpha1 if x != y else 1 - alpha1))
    return 2, 2, 2, p
