"""Power-constrained excitation synthesis at a single focal point.

Three solvers for max |E(focus)| over complex drive weights:

  * cp_weights: per-element amplitude cap only; every element runs at
    the cap with the channel phase conjugated.
  * tr_weights: total-power cap only; amplitudes taper with channel
    strength (conjugate channel over port resistance).
  * hybrid_weights: both caps; a water-level amplitude clip(beta*v, cap)
    with beta bisected until the power budget is met.

All scalar channels are the projection of the vector channel entries on
the target polarization.  Port resistances are R0 times the channel's
per-port scale (patch area over the reference area for meshes).
An independent projected-ascent oracle certifies optimality on small
instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import ChannelVector

ZERO_CHANNEL_CUTOFF = 1e-15  # relative to max |g|; below this an element is idle


@dataclass(frozen=True)
class PowerConstraints:
    w_max: float        # A, per-element amplitude cap
    P0: float           # W, total power budget
    R0_per_port: float  # ohm, diagonal port resistance

    def __post_init__(self):
        if not (self.w_max > 0.0 and self.P0 > 0.0 and self.R0_per_port > 0.0):
            raise ValueError("constraint parameters must be strictly positive")


@dataclass(frozen=True)
class ExcitationWeights:
    w: np.ndarray       # complex amplitudes, A
    regime: str         # CP | TR | hybrid
    total_power: float  # W, sum of (R_n/2)|w_n|^2


@dataclass(frozen=True)
class FocalReport:
    E_focus: complex
    active_constraint: str  # local | global | both
    beta: float             # water level scale; 0 when no bisection ran


class OracleReport:
    def __init__(self, oracle_objective: float, weight_objective: float):
        self.oracle_objective = oracle_objective
        self.weight_objective = weight_objective
        denom = max(oracle_objective, weight_objective)
        self.relative_gap = (oracle_objective - weight_objective) / denom


def _channel_arrays(h: ChannelVector, pc: PowerConstraints):
    g = h.projected()
    absg = np.abs(g)
    gmax = float(np.max(absg)) if absg.size else 0.0
    if gmax == 0.0:
        raise ValueError("channel is zero for the requested polarization")
    live = absg >= ZERO_CHANNEL_CUTOFF * gmax
    R = pc.R0_per_port * h.resistance_scale
    return g, absg, live, R


def _total_power(R: np.ndarray, w: np.ndarray) -> float:
    return float(np.sum(0.5 * R * np.abs(w) ** 2))


def cp_weights(h: ChannelVector, pc: PowerConstraints):
    """Amplitude-capped optimum: full drive, conjugated phases.

    If the resulting total power also exceeds the budget, all weights
    get one common downscale, which preserves the optimal phases.
    """
    g, absg, live, R = _channel_arrays(h, pc)
    w = np.zeros_like(g)
    w[live] = pc.w_max * np.conj(g[live]) / absg[live]
    power = _total_power(R, w)
    active = "local"
    if power > pc.P0:
        w *= math.sqrt(pc.P0 / power)
        power = pc.P0
        active = "both"
    e_focus = complex(np.sum(w * g))
    return (ExcitationWeights(w=w, regime="CP", total_power=power),
            FocalReport(E_focus=e_focus, active_constraint=active, beta=0.0))


def tr_weights(h: ChannelVector, pc: PowerConstraints):
    """Power-capped optimum: conjugate channel over port resistance."""
    g, absg, live, R = _channel_arrays(h, pc)
    s = float(np.sum(absg[live] ** 2 / R[live]))
    d_r = math.sqrt(2.0 * pc.P0 / s)
    w = np.zeros_like(g)
    w[live] = d_r * np.conj(g[live]) / R[live]
    # pin the budget exactly against accumulated roundoff
    w *= math.sqrt(pc.P0 / _total_power(R, w))
    e_focus = complex(np.sum(w * g))
    return (ExcitationWeights(w=w, regime="TR", total_power=pc.P0),
            FocalReport(E_focus=e_focus, active_constraint="global", beta=d_r))


def hybrid_weights(h: ChannelVector, pc: PowerConstraints,
                   tol: float | None = None, max_iters: int = 200):
    """Water-level solution under both caps via bisection on the level.

    Amplitudes are min(beta*v_n, w_max) with v the power-weighted
    channel direction (conjugate channel over resistance, normalized);
    beta is raised by doubling and then bisected until the total power
    sits within tol of the budget, unless every element clips first.
    """
    if tol is None:
        tol = 1e-10 * pc.P0
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    g, absg, live, R = _channel_arrays(h, pc)
    phase = np.ones_like(g)
    phase[live] = np.conj(g[live]) / absg[live]

    cap_power = float(np.sum(0.5 * R[live] * pc.w_max ** 2))
    if cap_power <= pc.P0 * (1.0 + 1e-12):
        # every element clips before the budget binds: CP regime
        w = np.zeros_like(g)
        w[live] = pc.w_max * phase[live]
        return (ExcitationWeights(w=w, regime="CP", total_power=cap_power),
                FocalReport(E_focus=complex(np.sum(w * g)),
                            active_constraint="local", beta=0.0))

    v = np.zeros_like(absg)
    v[live] = absg[live] / R[live]
    v /= float(np.linalg.norm(v))

    def clipped_power(beta: float) -> float:
        amp = np.minimum(beta * v, pc.w_max)
        return float(np.sum(0.5 * R * amp * amp))

    # unclipped solve underestimates the level, so it seeds the bracket
    lo = math.sqrt(2.0 * pc.P0 / float(np.sum(R * v * v)))
    hi = lo
    doublings = 0
    while clipped_power(hi) < pc.P0 - tol:
        hi *= 2.0
        doublings += 1
        if doublings > 64:
            raise RuntimeError("water-level bracket did not reach the power budget")
    beta = hi
    power = clipped_power(beta)
    iters = 0
    while abs(power - pc.P0) > tol:
        iters += 1
        if iters > max_iters:
            raise RuntimeError(
                f"bisection did not reach |power - P0| <= {tol} in {max_iters} "
                f"iterations; tolerance may be below float resolution")
        mid = 0.5 * (lo + hi)
        if clipped_power(mid) < pc.P0:
            lo = mid
        else:
            hi = mid
        beta = hi
        power = clipped_power(beta)

    amp = np.minimum(beta * v, pc.w_max)
    w = amp * phase
    clipped = (beta * v >= pc.w_max) & live
    if np.all(clipped[live]):
        regime, active = "CP", "both"
    elif not np.any(clipped):
        regime, active = "TR", "global"
    else:
        regime, active = "hybrid", "both"
    return (ExcitationWeights(w=w, regime=regime, total_power=power),
            FocalReport(E_focus=complex(np.sum(w * g)),
                        active_constraint=active, beta=beta))


# --------------------------------------------------------- optimality oracle

def _project_box_ball(x: np.ndarray, cap: np.ndarray, p0: float) -> np.ndarray:
    """Exact projection of rows of x onto {0 <= u <= cap, sum u^2 <= p0}.

    The projection alternates the two constraint actions, a uniform ball
    scaling 1/(1+nu) and a box clip, with the scaling multiplier nu
    bisected until both hold simultaneously.
    """
    y = np.clip(x, 0.0, cap)
    need = np.sum(y * y, axis=1) > p0
    if not np.any(need):
        return y
    xs = x[need]
    lo = np.zeros(xs.shape[0])
    hi = np.ones(xs.shape[0])
    for _ in range(100):
        yt = np.clip(xs / (1.0 + hi)[:, None], 0.0, cap)
        bad = np.sum(yt * yt, axis=1) > p0
        if not np.any(bad):
            break
        hi[bad] *= 2.0
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        yt = np.clip(xs / (1.0 + mid)[:, None], 0.0, cap)
        over = np.sum(yt * yt, axis=1) > p0
        lo = np.where(over, mid, lo)
        hi = np.where(over, hi, mid)
    y[need] = np.clip(xs / (1.0 + hi)[:, None], 0.0, cap)
    return y


def optimality_oracle(h: ChannelVector, pc: PowerConstraints,
                      weights: ExcitationWeights, seed: int = 0,
                      starts: int = 20) -> OracleReport:
    """Certify weights by independent projected gradient ascent.

    Works on the real reduced problem max sum(|g_n| a_n) over amplitude
    vectors a in the box/power-ball intersection, in coordinates where
    the power constraint is a Euclidean ball.  The step length grows
    geometrically; with an exact projection the optimum is the fixed
    point of the iteration at any step, so the iterates converge to it
    from every start.
    """
    if len(h) > 256:
        raise ValueError("oracle is limited to 256 ports")
    g = h.projected()
    absg = np.abs(g)
    if float(np.max(absg)) == 0.0:
        raise ValueError("channel is zero for the requested polarization")
    R = pc.R0_per_port * h.resistance_scale

    s = np.sqrt(0.5 * R)      # u = s * |w| turns the power cap into a ball
    cap = s * pc.w_max
    q = absg / s
    p0 = pc.P0
    rng = np.random.default_rng(seed)
    u = _project_box_ball(rng.uniform(0.0, 1.0, size=(starts, absg.size)) * cap,
                          cap, p0)
    alpha = 0.25 * math.sqrt(p0) / float(np.linalg.norm(q))
    for _ in range(48):
        u = _project_box_ball(u + alpha * q, cap, p0)
        alpha *= 2.0
    oracle_best = float(np.max(np.sum(u * q, axis=1)))
    achieved = abs(complex(np.sum(np.asarray(weights.w) * g)))
    return OracleReport(oracle_objective=oracle_best, weight_objective=achieved)


# ----------------------------------------------------------------- exports

WEIGHTS_CSV_HEADER = ["index", "amplitude_a", "phase_rad"]


def weights_rows(weights: ExcitationWeights):
    for i, wi in enumerate(np.asarray(weights.w)):
        yield (i, abs(wi), math.atan2(wi.imag, wi.real))


def weights_sidecar(weights: ExcitationWeights, report: FocalReport) -> dict:
    return {
        "regime": weights.regime,
        "beta": report.beta,
        "total_power_w": weights.total_power,
        "active_constraint": report.active_constraint,
        "e_focus_re": report.E_focus.real,
        "e_focus_im": report.E_focus.imag,
    }
