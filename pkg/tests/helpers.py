import numpy as np


def maxabs(a):
    return float(np.max(np.abs(a)))
