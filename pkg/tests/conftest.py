import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from epsball import _countpy

try:
    from epsball import _countcore
except ImportError:  # extension not built
    _countcore = None

KERNELS = [_countpy] + ([_countcore] if _countcore is not None else [])


@pytest.fixture(params=KERNELS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def kernel(request):
    return request.param


def u_statistic_bruteforce(x, y, k, eps) -> Fraction:
    """Direct subset-enumeration U-statistic, exact rational arithmetic.

    Independent of the counting reformulation: evaluates the symmetrized
    indicator kernel on every (k1, k2)-subset pair.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float)) if y is not None else np.empty((0, x.shape[1]))
    k1, k2 = k
    n1, n2 = x.shape[0], y.shape[0]
    eps2 = eps * eps

    def close(a, b):
        if a.shape[0] == 0 or b.shape[0] == 0:
            return np.zeros((a.shape[0], b.shape[0]), dtype=bool)
        return ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2) < eps2

    cxx = close(x, x)
    cxy = close(x, y)
    cyy = close(y, y)

    total = Fraction(0)
    if k1 >= 1:
        for s in itertools.combinations(range(n1), k1):
            for t in itertools.combinations(range(n2), k2):
                hits = 0
                for i in s:
                    if all(cxx[i, j] for j in s) and all(cxy[i, l] for l in t):
                        hits += 1
                total += Fraction(hits, k1)
    else:
        for t in itertools.combinations(range(n2), k2):
            hits = 0
            for i in t:
                if all(cyy[i, j] for j in t):
                    hits += 1
            total += Fraction(hits, k2)
    return total / (math.comb(n1, k1) * math.comb(n2, k2))
