import numpy as np

from eqspeed.dynamics import evolution_context
from eqspeed.hamiltonian import compose, decompose, random_gue
from eqspeed.qcore import BipartiteDims, haar_state


def make_context(seed, d_S=2, d_B=4, kind="gue_global", lam=1.0):
    rng = np.random.default_rng(seed)
    dims = BipartiteDims(d_S, d_B)
    if kind == "gue_global":
        h = decompose(random_gue(dims.D, rng), dims)
    else:
        h = compose(random_gue(d_S, rng), random_gue(d_B, rng), random_gue(dims.D, rng), lam, dims)
    return evolution_context(h, haar_state(dims.D, rng))
