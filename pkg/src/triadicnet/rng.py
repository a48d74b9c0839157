"""Random number plumbing: reproducible streams and buffered draws.

Every stochastic routine in the package takes an integer seed (or an existing
``numpy.random.Generator``) and is bit-for-bit reproducible.  Ensembles assign
path ``k`` the stream derived from ``(seed, k)`` via ``SeedSequence`` spawn
keys, so results do not depend on how paths are distributed over workers.
"""
from __future__ import annotations

import numpy as np

_BLOCK = 8192


def as_generator(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Return ``seed`` unchanged if it is already a Generator, else seed one."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def path_stream(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream for ensemble path ``index``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


class DrawBuffer:
    """Block-buffered scalar draws for tight event loops.

    Pulling one exponential or uniform variate per SSA event through the
    numpy API dominates the step cost; drawing blocks of ``_BLOCK`` at a time
    amortizes it.  The sequence of returned values is a pure function of the
    underlying generator state and the call order, so simulations stay
    deterministic.
    """

    __slots__ = ("generator", "_exp", "_uni", "_ie", "_iu")

    def __init__(self, generator: np.random.Generator):
        self.generator = generator
        self._exp = generator.standard_exponential(_BLOCK)
        self._uni = generator.random(_BLOCK)
        self._ie = 0
        self._iu = 0

    def exp(self) -> float:
        """Standard exponential variate (mean 1)."""
        i = self._ie
        if i == _BLOCK:
            self._exp = self.generator.standard_exponential(_BLOCK)
            i = 0
        self._ie = i + 1
        return self._exp[i]

    def unif(self) -> float:
        """Uniform variate on [0, 1)."""
        i = self._iu
        if i == _BLOCK:
            self._uni = self.generator.random(_BLOCK)
            i = 0
        self._iu = i + 1
        return self._uni[i]
