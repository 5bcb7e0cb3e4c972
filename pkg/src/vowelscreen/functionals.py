"""Statistical functionals that collapse frame tracks to scalar features.

Five functionals are supported: median, population standard deviation (std),
1st percentile (1p), 99th percentile (99p) and the interpercentile range
(ir = 99p - 1p).  Percentiles use linear interpolation between closest ranks;
std uses the 1/N (population) normalization.  Both rules are fixed here for
determinism because short tracks make them rule-sensitive.
"""

import numpy as np

FUNCTIONAL_KINDS = ("median", "std", "1p", "99p", "ir")


def _one(track: np.ndarray, kind: str) -> float:
    if kind == "median":
        return float(np.median(track))
    if kind == "std":
        return float(np.std(track))
    if kind == "1p":
        return float(np.percentile(track, 1.0))
    if kind == "99p":
        return float(np.percentile(track, 99.0))
    if kind == "ir":
        return float(np.percentile(track, 99.0) - np.percentile(track, 1.0))
    raise ValueError(f"unknown functional {kind!r}")


def ordinal(i: int) -> str:
    """1 -> '1st', 2 -> '2nd', 11 -> '11th', 23 -> '23rd'."""
    if 10 <= i % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(i % 10, "th")
    return f"{i}{suffix}"


def apply_functionals(values, descriptor: str, kinds=FUNCTIONAL_KINDS) -> dict[str, float]:
    """Collapse a scalar track or a frames x coefficients matrix to named scalars.

    A 1-D track yields names "<descriptor> (<functional>)"; a matrix yields
    "<ordinal coefficient> <descriptor> (<functional>)" per column, mirroring
    the "10th CMS (std)" report convention.  Columns are coefficient-indexed
    from 1.  Empty input yields an empty dict (the feature is simply absent).
    """
    arr = np.asarray(values, dtype=np.float64)
    out: dict[str, float] = {}
    if arr.ndim == 1:
        track = arr[np.isfinite(arr)]
        if track.size == 0:
            return out
        for kind in kinds:
            out[f"{descriptor} ({kind})"] = _one(track, kind)
        return out
    if arr.ndim != 2:
        raise ValueError(f"expected 1-D track or 2-D matrix, got ndim={arr.ndim}")
    for col in range(arr.shape[1]):
        track = arr[:, col]
        track = track[np.isfinite(track)]
        if track.size == 0:
            continue
        name = f"{ordinal(col + 1)} {descriptor}"
        for kind in kinds:
            out[f"{name} ({kind})"] = _one(track, kind)
    return out
