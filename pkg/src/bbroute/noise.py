"""Per-gate error models for long-range CZ gates on the cavity network.

Times are in microseconds throughout. Three gate implementations are modeled:

* ``sws``: dual-rail qubits with a Swap-Wait-Swap entangling gate, with or
  without mid-circuit erasure detection;
* ``iswap-cz``: transmons moved by iSWAP+CZ SWAP chains;
* ``cvdv``: a transmon-controlled conditional displacement on a routed mode.

Roles: ``ctrl`` is the dual-rail qubit whose photon travels through the network
(the check qubit) and ``trgt`` is the resident data qubit.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

IMPLEMENTATIONS = ("sws", "iswap-cz", "cvdv")


@dataclass(frozen=True)
class HardwareParams:
    # entangling coupler (transmon)
    T1_t: float = 70.0
    Tphi_t: float = 327.0
    # storage
    T1_cav: float = 500.0
    T1_dr: float = 500.0
    # erasure detection
    t_det: float = 1.8
    p_FP: float = 0.0051
    # gate durations
    t_CD: float = 1.0
    t_ZZ: float = 2.0  # listed with the hardware but not used by any model
    t_SWAP: float = 0.2
    t_SWS: float = 0.5
    # dual-rail, per role
    Tphi_dr_ctrl: float = 4000.0
    Tphi_dr_trgt: float = 4800.0
    Tbitflip_dr_ctrl: float = 520000.0
    Tbitflip_dr_trgt: float = 1100000.0
    p_meas_ctrl: float = 2.0e-4
    p_meas_trgt: float = 2.3e-4
    p_1q_ctrl: float = 9.0e-5
    p_1q_trgt: float = 1.08e-5
    # additive error of the SWS gate itself
    sws_x_ctrl: float = 2.8e-6
    sws_z_ctrl: float = 3.9e-4
    sws_x_trgt: float = 0.5e-6
    sws_z_trgt: float = 1.1e-4
    nbar: float = 1.0
    # transmon iSWAP+CZ reference gate
    t_2q_local: float = 0.08
    p_2q_local: float = 0.001
    # per-cycle measurement and reset allowance; None means t_det
    t_meas_reset: float | None = None

    _PROBS = (
        "p_FP", "p_meas_ctrl", "p_meas_trgt", "p_1q_ctrl", "p_1q_trgt",
        "sws_x_ctrl", "sws_z_ctrl", "sws_x_trgt", "sws_z_trgt", "p_2q_local",
    )

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name in self._PROBS:
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"{f.name}={value} is not a probability")
            elif f.name == "nbar":
                if value < 0:
                    raise ValueError("nbar must be non-negative")
            elif not value > 0:
                raise ValueError(f"{f.name}={value} must be positive")

    @property
    def meas_reset_time(self) -> float:
        return self.t_det if self.t_meas_reset is None else self.t_meas_reset

    @property
    def T2_t(self) -> float:
        """Transmon coherence time from ``1/T2 = 1/(2 T1) + 1/Tphi``."""
        return 1.0 / (1.0 / (2.0 * self.T1_t) + 1.0 / self.Tphi_t)

    def replace(self, **changes) -> HardwareParams:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> HardwareParams:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown hardware parameters: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> HardwareParams:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


DEFAULT_PARAMS = HardwareParams()


def _check_r(r: float) -> None:
    if r < 0:
        raise ValueError(f"r must be non-negative, got {r}")


def _decay(t: float, lifetime: float) -> float:
    return -math.expm1(-t / lifetime)


# --- dual-rail + SWS ------------------------------------------------------------

def t_dur(r: int, params: HardwareParams = DEFAULT_PARAMS, detect: bool = True) -> float:
    """Round-trip duration of a long-range SWS gate with one-way SWAP count ``r``."""
    _check_r(r)
    t = 2.0 * params.t_SWAP * (r + 1) + params.t_SWS
    return t + params.t_det if detect else t


def p_loss_cpl(t: float, params: HardwareParams = DEFAULT_PARAMS) -> float:
    return _decay(t, params.T1_t)


def p_loss_cav(t: float, params: HardwareParams = DEFAULT_PARAMS) -> float:
    return _decay(t, params.T1_cav)


def effective_ctrl_cav_time(r: int, p_route: float = 0.5, params: HardwareParams = DEFAULT_PARAMS, detect: bool = True) -> float:
    """Cavity exposure of the control excitation averaged over the routed rail."""
    if not 0.0 <= p_route <= 1.0:
        raise ValueError("p_route must lie in [0, 1]")
    return t_dur(r, params, detect) - p_route * params.t_SWS


def loss_rates(r: int, params: HardwareParams = DEFAULT_PARAMS, detect: bool = True) -> tuple[float, float, float]:
    """Photon-loss probabilities (ctrl cavity, trgt cavity, coupler)."""
    td = t_dur(r, params, detect)
    return (
        p_loss_cav(td - params.t_SWS / 2, params),
        p_loss_cav(td, params),
        p_loss_cpl(params.t_SWS / 2, params),
    )


def erasure_rates(r: int, params: HardwareParams = DEFAULT_PARAMS) -> tuple[float, float]:
    """Heralded erasure probability (ctrl, trgt): true positives plus false positives."""
    cav_c, cav_t, cpl = loss_rates(r, params, detect=True)
    return cav_c + cpl + params.p_FP, cav_t + params.p_FP


def residual_pauli(r: int, params: HardwareParams = DEFAULT_PARAMS, detect: bool = True) -> tuple[float, float, float, float]:
    """Residual (pX_ctrl, pZ_ctrl, pX_trgt, pZ_trgt) left after erasure conversion."""
    exposure = t_dur(r, params, detect) - params.t_SWS
    return (
        _decay(exposure, params.Tbitflip_dr_ctrl) + params.sws_x_ctrl,
        _decay(exposure, params.Tphi_dr_ctrl) + params.sws_z_ctrl,
        _decay(exposure, params.Tbitflip_dr_trgt) + params.sws_x_trgt,
        _decay(exposure, params.Tphi_dr_trgt) + params.sws_z_trgt,
    )


@dataclass(frozen=True)
class NoiseBreakdown:
    """Error budget of one long-range SWS gate.

    With ``detect`` the loss terms appear as heralded erasures (``p_eras_*``,
    including false positives); without it they are unheralded losses
    (``p_lost_*``) and the erasure fields are zero.
    """

    r: int
    detect: bool
    t_dur: float
    p_loss_cav_ctrl: float
    p_loss_cav_trgt: float
    p_loss_cpl: float
    p_eras_ctrl: float
    p_eras_trgt: float
    p_lost_ctrl: float
    p_lost_trgt: float
    pX_ctrl: float
    pZ_ctrl: float
    pX_trgt: float
    pZ_trgt: float

    COMPONENTS = ("pX_ctrl", "pZ_ctrl", "pX_trgt", "pZ_trgt", "p_eras_ctrl", "p_eras_trgt", "p_lost_ctrl", "p_lost_trgt")

    @property
    def total(self) -> float:
        return math.fsum(getattr(self, c) for c in self.COMPONENTS)

    @property
    def loss_ctrl(self) -> float:
        """Loss-type probability on the control, heralded or not."""
        return self.p_eras_ctrl if self.detect else self.p_lost_ctrl

    @property
    def loss_trgt(self) -> float:
        return self.p_eras_trgt if self.detect else self.p_lost_trgt

    def as_row(self) -> dict:
        row = dataclasses.asdict(self)
        row["total"] = self.total
        return row


def p2q_sws(r: int, params: HardwareParams = DEFAULT_PARAMS, detect: bool = True) -> NoiseBreakdown:
    cav_c, cav_t, cpl = loss_rates(r, params, detect)
    px_c, pz_c, px_t, pz_t = residual_pauli(r, params, detect)
    if detect:
        eras = (cav_c + cpl + params.p_FP, cav_t + params.p_FP)
        lost = (0.0, 0.0)
    else:
        eras = (0.0, 0.0)
        lost = (cav_c + cpl, cav_t)
    return NoiseBreakdown(
        r=r, detect=detect, t_dur=t_dur(r, params, detect),
        p_loss_cav_ctrl=cav_c, p_loss_cav_trgt=cav_t, p_loss_cpl=cpl,
        p_eras_ctrl=eras[0], p_eras_trgt=eras[1],
        p_lost_ctrl=lost[0], p_lost_trgt=lost[1],
        pX_ctrl=px_c, pZ_ctrl=pz_c, pX_trgt=px_t, pZ_trgt=pz_t,
    )


# --- other implementations ------------------------------------------------------

def p2q_iswap_cz(r: int, params: HardwareParams = DEFAULT_PARAMS) -> tuple[float, float]:
    """(duration, p2Q) of a SWAP chain of iSWAP+CZ pairs around one local CZ."""
    _check_r(r)
    t2q, p2q = params.t_2q_local, params.p_2q_local
    return 4 * t2q * r + 3 * t2q, 4 * p2q * r + 3 * p2q


@dataclass(frozen=True)
class CvDvBreakdown:
    t_dur: float
    pX: float
    pY: float
    pZ: float
    p_loss: float

    @property
    def total(self) -> float:
        return math.fsum((self.pX, self.pY, self.pZ, self.p_loss))


def cvdv_channel(t: float, params: HardwareParams = DEFAULT_PARAMS) -> CvDvBreakdown:
    """Twirled transmon decay plus photon loss after exposure ``t``."""
    amp = _decay(t, params.T1_t)
    return CvDvBreakdown(
        t_dur=t,
        pX=amp / 4,
        pY=amp / 4,
        pZ=_decay(t, params.T2_t) / 2 - amp / 4,
        p_loss=_decay(t * params.nbar, params.T1_cav),
    )


def p2q_cvdv(r: int, params: HardwareParams = DEFAULT_PARAMS) -> tuple[float, float]:
    _check_r(r)
    ch = cvdv_channel(4 * (params.t_CD + r * params.t_SWAP), params)
    return ch.t_dur, ch.total


def gate_time(r: int, params: HardwareParams = DEFAULT_PARAMS, impl: str = "sws", detect: bool = True) -> float:
    if impl == "sws":
        return t_dur(r, params, detect)
    if impl == "iswap-cz":
        return p2q_iswap_cz(r, params)[0]
    if impl == "cvdv":
        return p2q_cvdv(r, params)[0]
    raise ValueError(f"unknown implementation {impl!r}; expected one of {IMPLEMENTATIONS}")


def p2q(r: int, params: HardwareParams = DEFAULT_PARAMS, impl: str = "sws", detect: bool = True) -> float:
    if impl == "sws":
        return p2q_sws(r, params, detect).total
    if impl == "iswap-cz":
        return p2q_iswap_cz(r, params)[1]
    if impl == "cvdv":
        return p2q_cvdv(r, params)[1]
    raise ValueError(f"unknown implementation {impl!r}; expected one of {IMPLEMENTATIONS}")


# --- no-jump backaction ---------------------------------------------------------

@dataclass(frozen=True)
class NoJumpEstimate:
    delta_kappa_t: float
    epsilon: float
    expected_epsilon: float
    dephasing_term: float
    second_order: float
    expected_second_order: float


def nojump_estimate(
    r: int,
    params: HardwareParams = DEFAULT_PARAMS,
    kappa_coupler: float | None = None,
    kappa_cavities: Sequence[float] | None = None,
    gamma_phi: float | None = None,
    sigma: float = 0.0,
    detect: bool = True,
) -> NoJumpEstimate:
    """Dephasing plus no-jump infidelity of the routed control qubit.

    ``kappa_cavities`` lists the decay rates of the resting cavity ``a1`` followed
    by the ``r + 1`` cavities visited by the routed rail; by default every cavity
    decays at ``1/T1_cav``. ``sigma`` is the spread of cavity decay rates used in
    the ensemble average, where only the coupler offset and the variance of the
    path mean survive. The expected value keeps the dephasing term so it is
    directly comparable with ``epsilon``.
    """
    _check_r(r)
    kappa_c = 1.0 / params.T1_t if kappa_coupler is None else kappa_coupler
    if kappa_cavities is None:
        kappa_cavities = [1.0 / params.T1_cav] * (r + 2)
    if len(kappa_cavities) != r + 2:
        raise ValueError("kappa_cavities must hold a1 plus r+1 path cavities")
    if kappa_c < 0 or min(kappa_cavities) < 0 or sigma < 0:
        raise ValueError("decay rates must be non-negative")
    gamma = 1.0 / params.Tphi_dr_ctrl if gamma_phi is None else gamma_phi
    k_a1 = kappa_cavities[0]
    # mean path excess over a1; exactly zero when every cavity matches a1
    excess = math.fsum(k - k_a1 for k in kappa_cavities[1:]) / (r + 1)
    t_cav = 2.0 * params.t_SWAP * (r + 1)
    td = t_dur(r, params, detect)
    dk_t = (kappa_c - k_a1) * params.t_SWS + excess * t_cav
    deph = 0.5 * gamma * td
    second = dk_t**2 / 16
    variance = sigma**2 / (r + 1) + sigma**2
    expected_second = ((kappa_c - k_a1) ** 2 * params.t_SWS**2 + variance * t_cav**2) / 16
    return NoJumpEstimate(dk_t, deph + second, deph + expected_second, deph, second, expected_second)


# --- worst case and landscape ---------------------------------------------------

def worst_case_p2q(rs: Iterable[int], params: HardwareParams = DEFAULT_PARAMS, impl: str = "sws", detect: bool = True) -> float:
    """Largest per-gate p2Q over the one-way counts ``rs`` of a routed cycle."""
    rs = list(rs)
    if not rs:
        raise ValueError("no gates")
    return p2q(max(rs), params, impl, detect)


def landscape(
    t_swaps: Sequence[float],
    t1_cavs: Sequence[float],
    r_max: int,
    params: HardwareParams = DEFAULT_PARAMS,
    impl: str = "sws",
    detect: bool = False,
) -> np.ndarray:
    """Worst-case p2Q on the grid; entry ``[i, j]`` is at ``(t_swaps[i], t1_cavs[j])``."""
    if min(t_swaps) <= 0 or min(t1_cavs) <= 0:
        raise ValueError("landscape axes must be positive")
    out = np.empty((len(t_swaps), len(t1_cavs)))
    for i, ts in enumerate(t_swaps):
        for j, tc in enumerate(t1_cavs):
            out[i, j] = p2q(r_max, params.replace(t_SWAP=float(ts), T1_cav=float(tc)), impl, detect)
    return out


@dataclass(frozen=True)
class DescentProblem:
    """Worst-case p2Q as a function of ``(t_SWAP, T1_cav)``.

    The search runs in normalized coordinates ``u = t_SWAP / scale[0]`` and
    ``v = T1_cav / scale[1]`` on ``log p2Q``.
    """

    r_max: int
    params: HardwareParams = DEFAULT_PARAMS
    impl: str = "sws"
    detect: bool = False
    scale: tuple[float, float] = (0.2, 500.0)

    def value(self, point: tuple[float, float]) -> float:
        ts, tc = point
        if ts <= 0 or tc <= 0:
            raise ValueError(f"point {point} leaves the positive domain")
        return p2q(self.r_max, self.params.replace(t_SWAP=ts, T1_cav=tc), self.impl, self.detect)

    def gradient(self, point: tuple[float, float], h: float = 1e-6) -> np.ndarray:
        """Central-difference gradient of ``log p2Q`` in normalized coordinates."""
        ts, tc = point
        su, sv = self.scale
        out = np.empty(2)
        for k, (dp, dn) in enumerate((((ts + h * su, tc), (ts - h * su, tc)), ((ts, tc + h * sv), (ts, tc - h * sv)))):
            out[k] = (math.log(self.value(dp)) - math.log(self.value(dn))) / (2 * h)
        return out


def analytic_gradient(problem: DescentProblem, point: tuple[float, float]) -> np.ndarray:
    """Exact gradient of ``log p2Q`` for the dual-rail model, normalized coordinates."""
    if problem.impl != "sws":
        raise ValueError("analytic gradient is implemented for the sws model only")
    p = problem.params.replace(t_SWAP=point[0], T1_cav=point[1])
    r, detect = problem.r_max, problem.detect
    td = t_dur(r, p, detect)
    dtd = 2.0 * (r + 1)  # d t_dur / d t_SWAP
    tc = td - p.t_SWS / 2
    exposure = td - p.t_SWS

    def rate(t, life):
        return math.exp(-t / life) / life

    d_ts = (rate(tc, p.T1_cav) + rate(td, p.T1_cav)) * dtd
    d_ts += sum(rate(exposure, life) for life in (p.Tbitflip_dr_ctrl, p.Tphi_dr_ctrl, p.Tbitflip_dr_trgt, p.Tphi_dr_trgt)) * dtd

    def dlife(t, life):
        return -t * math.exp(-t / life) / life**2

    d_tc = dlife(tc, p.T1_cav) + dlife(td, p.T1_cav)
    total = p2q_sws(r, p, detect).total
    return np.array([d_ts * problem.scale[0], d_tc * problem.scale[1]]) / total


def steepest_descent_path(
    problem: DescentProblem,
    start: tuple[float, float] = (0.2, 500.0),
    step: float = 0.05,
    count: int = 12,
) -> list[tuple[float, float]]:
    """``count`` points spaced ``step`` apart (normalized units) along ``-grad log p2Q``."""
    if count < 1:
        raise ValueError("count must be positive")
    path = [tuple(map(float, start))]
    su, sv = problem.scale
    for _ in range(count - 1):
        g = problem.gradient(path[-1])
        norm = float(np.hypot(*g))
        if norm == 0.0:
            break
        ts = path[-1][0] - step * su * float(g[0]) / norm
        tc = path[-1][1] - step * sv * float(g[1]) / norm
        if ts <= 0 or tc <= 0:
            raise ValueError("descent step leaves the positive domain")
        path.append((ts, tc))
    return path


def epsilon_k(p_L: float, k: int) -> float:
    """Per-logical-qubit error rate from the all-qubit rate: ``1 - (1 - p_L)**(1/k)``."""
    if not 0.0 <= p_L <= 1.0:
        raise ValueError("p_L must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be at least 1")
    return -math.expm1(math.log1p(-p_L) / k) if p_L < 1 else 1.0


# --- export -----------------------------------------------------------------------

def breakdown_csv(breakdowns: Iterable[NoiseBreakdown], gate_ids: Iterable | None = None) -> str:
    rows = [b.as_row() for b in breakdowns]
    ids = list(gate_ids) if gate_ids is not None else list(range(len(rows)))
    buf = io.StringIO()
    if not rows:
        return ""
    fields = ["gate"] + list(rows[0])
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for gid, row in zip(ids, rows):
        writer.writerow({"gate": gid, **{k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()}})
    return buf.getvalue()


def p2q_curves(r_values: Iterable[int], params: HardwareParams = DEFAULT_PARAMS) -> list[dict]:
    """Per-r comparison of all implementations (p2Q and duration)."""
    out = []
    for r in r_values:
        out.append({
            "r": r,
            "sws_detect": p2q(r, params, "sws", True),
            "sws_no_detect": p2q(r, params, "sws", False),
            "iswap_cz": p2q(r, params, "iswap-cz"),
            "cvdv": p2q(r, params, "cvdv"),
            "t_sws_detect": t_dur(r, params, True),
            "t_sws_no_detect": t_dur(r, params, False),
            "t_iswap_cz": p2q_iswap_cz(r, params)[0],
            "t_cvdv": p2q_cvdv(r, params)[0],
        })
    return out
