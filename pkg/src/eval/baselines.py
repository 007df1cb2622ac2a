import numpy as np

from src.errors import TooShort


def cvh_baseline(past, n_future: int) -> np.ndarray:
    """Constant velocity hand: future_k = last + k·(last - second_to_last)."""
    past = np.asarray(past, dtype=np.float64).reshape(-1, 3)
    if len(past) < 2:
        raise TooShort(f"CVH needs at least 2 past waypoints, got {len(past)}")
    v = past[-1] - past[-2]
    k = np.arange(1, n_future + 1, dtype=np.float64)[:, None]
    return past[-1] + k * v


def constant_position_baseline(past, n_future: int) -> np.ndarray:
    past = np.asarray(past, dtype=np.float64).reshape(-1, 3)
    if len(past) < 1:
        raise TooShort("constant-position baseline needs at least 1 past waypoint")
    return np.repeat(past[-1:], n_future, axis=0)
