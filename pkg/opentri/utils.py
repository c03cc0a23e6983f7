import enum
import math

import numpy as np


class Sign(enum.IntEnum):
    DOWN = -1
    ZERO = 0
    UP = 1


class Counter:

    def __init__(self, start: int = 0) -> None:
        self.counter = start

    def __next__(self) -> int:
        id = self.counter
        self.counter += 1
        return id

    def reset(self) -> None:
        self.counter = 0


def format_float(x: float) -> str:
    """Render with 12 significant digits, locale independent."""
    if math.isnan(x) or math.isinf(x):
        return repr(float(x))
    return repr(float(f'{x:.12g}'))


def clamped_arccos(x: float) -> float:
    return math.acos(min(1.0, max(-1.0, x)))


def sample_rng(seed: int, sample_id: int) -> np.random.Generator:
    child = np.random.SeedSequence(seed, spawn_key=(sample_id,))
    return np.random.default_rng(child)
