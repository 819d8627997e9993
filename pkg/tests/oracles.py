"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code: matrices come from numpy
Kronecker products, GF(2) rank from a plain elimination, noise values from
``math.exp`` written out term by term, and routes are replayed cell by cell.
"""

from __future__ import annotations

import math
import re

import numpy as np

# (l, m, A, B, n, k, d) for the six reference codes
TABLE = {
    "18-4-4": (3, 3, "x + 1 + y2", "y + 1 + x2", 18, 4, 4),
    "72-12-6": (6, 6, "x3 + y + y2", "y3 + x + x2", 72, 12, 6),
    "90-8-10": (15, 3, "x9 + y + y2", "1 + x2 + x7", 90, 8, 10),
    "108-8-10": (9, 6, "x3 + y + y2", "y3 + x + x2", 108, 8, 10),
    "144-12-12": (12, 6, "x3 + y + y2", "y3 + x + x2", 144, 12, 12),
    "288-12-18": (12, 12, "x3 + y2 + y7", "y3 + x + x2", 288, 12, 18),
}


# --- codes ------------------------------------------------------------------------

def _shift(size: int) -> np.ndarray:
    return np.roll(np.eye(size, dtype=np.uint8), 1, axis=1)


def _term_matrix(term: str, l: int, m: int) -> np.ndarray:
    x = np.kron(_shift(l), np.eye(m, dtype=np.uint8))
    y = np.kron(np.eye(l, dtype=np.uint8), _shift(m))
    out = np.eye(l * m, dtype=np.uint8)
    for var, power in re.findall(r"([xy])(\d*)", term):
        base = x if var == "x" else y
        for _ in range(int(power or 1)):
            out = out @ base % 2
    return out


def poly_matrix(poly: str, l: int, m: int) -> np.ndarray:
    total = np.zeros((l * m, l * m), dtype=np.uint8)
    for term in poly.replace(" ", "").split("+"):
        total ^= _term_matrix(term, l, m)
    return total


def bb_matrices(l: int, m: int, a: str, b: str) -> tuple[np.ndarray, np.ndarray]:
    A, B = poly_matrix(a, l, m), poly_matrix(b, l, m)
    return np.hstack([A, B]), np.hstack([B.T, A.T])


def gf2_rank(mat: np.ndarray) -> int:
    a = np.array(mat, dtype=np.uint8) % 2
    rank = 0
    rows, cols = a.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if a[r, c]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        mask = a[:, c].astype(bool)
        mask[rank] = False
        a[mask] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


# --- noise --------------------------------------------------------------------------

TABLE_V = dict(
    T1_t=70.0, T1_cav=500.0, t_det=1.8, p_FP=0.0051, t_SWAP=0.2, t_SWS=0.5,
    Tphi_ctrl=4000.0, Tphi_trgt=4800.0, Tbit_ctrl=520000.0, Tbit_trgt=1100000.0,
)


def sws_reference(r: int, detect: bool = True, **over) -> dict[str, float]:
    p = {**TABLE_V, **over}
    t = 2 * p["t_SWAP"] * (r + 1) + p["t_SWS"] + (p["t_det"] if detect else 0.0)
    travel = t - p["t_SWS"]
    return {
        "t_dur": t,
        "p_eras_ctrl": (1 - math.exp(-(t - p["t_SWS"] / 2) / p["T1_cav"]))
        + (1 - math.exp(-(p["t_SWS"] / 2) / p["T1_t"]))
        + p["p_FP"],
        "p_eras_trgt": (1 - math.exp(-t / p["T1_cav"])) + p["p_FP"],
        "pX_ctrl": 1 - math.exp(-travel / p["Tbit_ctrl"]) + 2.8e-6,
        "pZ_ctrl": 1 - math.exp(-travel / p["Tphi_ctrl"]) + 3.9e-4,
        "pX_trgt": 1 - math.exp(-travel / p["Tbit_trgt"]) + 0.5e-6,
        "pZ_trgt": 1 - math.exp(-travel / p["Tphi_trgt"]) + 1.1e-4,
    }


def sws_total_reference(r: int, detect: bool) -> float:
    ref = sws_reference(r, detect)
    residual = ref["pX_ctrl"] + ref["pZ_ctrl"] + ref["pX_trgt"] + ref["pZ_trgt"]
    if detect:
        return residual + ref["p_eras_ctrl"] + ref["p_eras_trgt"]
    # unheralded loss: same physical loss, no false positives
    return residual + ref["p_eras_ctrl"] + ref["p_eras_trgt"] - 2 * TABLE_V["p_FP"]


def epsilon_k_reference(p_L: float, k: int) -> float:
    return 1 - (1 - p_L) ** (1 / k)


def twirled_transmon(t: float, T1: float = 70.0, Tphi: float = 327.0) -> tuple[float, float, float]:
    T2 = 1 / (1 / (2 * T1) + 1 / Tphi)
    px = (1 - math.exp(-t / T1)) / 4
    pz = (1 - math.exp(-t / T2)) / 2 - px
    return px, px, pz


def log_p2q_gradient_fd(f, point, scale, h=1e-5) -> np.ndarray:
    """Richardson-extrapolated central difference of ``log f`` in normalized units."""
    out = []
    for axis in range(2):
        def g(step):
            hi = list(point)
            lo = list(point)
            hi[axis] += step * scale[axis]
            lo[axis] -= step * scale[axis]
            return (math.log(f(hi)) - math.log(f(lo))) / (2 * step)
        out.append((4 * g(h / 2) - g(h)) / 3)
    return np.array(out)


# --- routing ------------------------------------------------------------------------

def replay_round(src, x_dir, x_len, y_dir, y_len, y_start, r, dwell, dims):
    """Cavity of one mode at every timestep of its round trip, wrapped onto the torus."""
    step = {"left": (-1, 0), "right": (1, 0), "up": (0, -1), "down": (0, 1), "none": (0, 0)}
    x, y = src
    out = [(x, y)]
    for t in range(1, r + 1):
        if t <= x_len:
            x += step[x_dir][0]
        elif y_start < t <= y_start + y_len:
            y += step[y_dir][1]
        out.append((x, y))
    out = out + [out[-1]] * dwell + out[::-1]
    w, h = dims
    return [(c % w, rr % h) for c, rr in out]


def occupancy_conflicts(paths: list[list[tuple[int, int]]]) -> int:
    """Count (timestep, cavity) pairs claimed by more than one mode.

    A mode moving u -> v during a step holds both cavities; a waiting mode holds one.
    """
    claims: dict[tuple[int, tuple[int, int]], int] = {}
    for path in paths:
        keys = {(0, path[0])}
        for t in range(1, len(path)):
            keys.add((t, path[t - 1]))
            keys.add((t, path[t]))
        for key in keys:
            claims[key] = claims.get(key, 0) + 1
    return sum(1 for v in claims.values() if v > 1)


# --- circuits -----------------------------------------------------------------------

def z_detectors_for_data_x(hz: np.ndarray, data: int, cycle: int, half: int) -> list[int]:
    """Round-difference Z detectors flipped by an X on ``data`` entering at ``cycle >= 1``.

    Detector order: ``half`` first-round detectors, then per later cycle ``half``
    Z differences followed by ``half`` X differences.
    """
    base = half + (cycle - 1) * 2 * half
    return [base + int(i) for i in np.flatnonzero(hz[:, data])]
