from pathlib import Path

import numpy as np

from crindex.config import DomainSpec

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# Weak at the origin with A = [1] and |v| = 1/2 in eta_rho: gamma_df = 0.8.
TUBE_DF = "2*re(z2) + abs2(z1)^2 - 2*abs2(z1)*re(z2) + re(z1*conj(z2))"
# Opposite curvature of log g: A = [-1], gamma_s = 4/3.
TUBE_STEIN = "2*re(z2) + abs2(z1)^2 + 2*abs2(z1)*re(z2) + re(z1*conj(z2))"
# Rank-2 analogue at the origin of C^3: A = I, |v|^2 = 1/2.
TUBE_DF3 = (
    "2*re(z3) + abs2(z1)^2 - 2*abs2(z1)*re(z3) + re(z1*conj(z3))"
    " + abs2(z2)^2 - 2*abs2(z2)*re(z3) + re(z2*conj(z3))"
)


def make_spec(rho: str, n: int = 2, **tables) -> DomainSpec:
    """Build a DomainSpec from a rho string and optional config tables."""
    data = {"n": n, "rho": rho}
    data.update(tables)
    return DomainSpec.from_dict(data)


def random_unitary(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))
