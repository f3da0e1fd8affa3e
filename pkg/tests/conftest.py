import math


def two_sample_z(mean_a, se_a, mean_b, se_b):
    denom = math.sqrt(se_a**2 + se_b**2)
    if denom == 0.0:
        return 0.0 if mean_a == mean_b else math.inf
    return (mean_a - mean_b) / denom


def mean_and_se(values):
    import numpy as np

    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))
