"""Independent reference computations used as test oracles."""

import numpy as np


def random_hermitian(rng, d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


def naive_partial_transpose(M, dA, dB, side="right"):
    """Entry-by-entry partial transpose, independent of the reshape-based one."""
    out = np.zeros_like(M)
    for i in range(dA):
        for k in range(dB):
            for j in range(dA):
                for l in range(dB):
                    if side == "right":
                        out[i * dB + k, j * dB + l] = M[i * dB + l, j * dB + k]
                    else:
                        out[i * dB + k, j * dB + l] = M[j * dB + k, i * dB + l]
    return out


def fidelity_measure(e, e_mapped):
    """Direct transcription of the log-fidelity formula, no clamping."""
    e = sorted(e, reverse=True)
    t = sorted((abs(v) for v in e_mapped), reverse=True)
    num = sum(np.sqrt(max(a, 0.0) * b) for a, b in zip(e, t))
    return -np.log2(num / np.sqrt(sum(t)))
