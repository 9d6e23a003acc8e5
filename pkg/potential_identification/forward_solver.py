"""Fixed-energy phase shifts of piecewise-constant potentials.

Inside layer i the radial solution is A_i j_l(kappa_i r) + B_i n_l(kappa_i r)
with kappa_i^2 = k^2 - q_i. Continuity of the solution and its derivative at
r_i links (A_i, B_i) to (A_{i+1}, B_{i+1}) through a 2x2 transfer matrix, and
outside the support delta = -arctan(B / A).

The recursion is carried in homogeneous form so a vanishing A (a pole of
B / A) propagates as a direction instead of an overflow. All orders l are
swept together; Riccati values come in scaled form (see
:mod:`potential_identification.special_functions`) and the state pair is
rebalanced in the log domain whenever the scale changes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, PositiveFloat, model_validator
from scipy.integrate import solve_ivp
from scipy.special import spherical_jn, spherical_yn

from potential_identification.errors import DomainError, OracleError, UnsupportedRegimeError
from potential_identification.potential import PotentialConfig
from potential_identification.special_functions import riccati_table

logger = logging.getLogger(__name__)

HARD_CAP = 128
CUTOFF_RATIO = 1e-7
CUTOFF_RUN = 3
# interfaces closer to the origin than this carry no layer
INERT_RADIUS = 1e-10
_ORACLE_START = 1e-6


@dataclass(frozen=True)
class TransferMatrix:
    a11: float
    a12: float
    a21: float
    a22: float
    scale: float

    @property
    def determinant(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def apply(self, a: float, b: float) -> tuple[float, float]:
        """Map (A_i, B_i) to (A_{i+1}, B_{i+1}), prefactor included."""
        return (
            self.scale * (self.a11 * a + self.a12 * b),
            self.scale * (self.a21 * a + self.a22 * b),
        )


class PhaseShiftSet(BaseModel):
    """Phase shifts delta(k, l) for l = 0..cutoff at one wave number.

    Computed shifts lie in (-pi/2, pi/2]; pi/2 and -pi/2 are the same angle
    modulo pi and are always reported as +pi/2. Noisy tables may leave the range.
    """

    model_config = ConfigDict(frozen=True)

    k: PositiveFloat
    shifts: tuple[float, ...]
    cutoff: int

    @model_validator(mode="after")
    def _check_shifts(self) -> "PhaseShiftSet":
        if self.cutoff < 0 or len(self.shifts) != self.cutoff + 1:
            raise ValueError(
                f"cutoff {self.cutoff} does not match {len(self.shifts)} shifts (expected cutoff + 1)"
            )
        if not all(math.isfinite(s) for s in self.shifts):
            raise ValueError("phase shifts must be finite")
        return self

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.shifts, dtype=float)


def _effective_layers(
    radii: Sequence[float], values: Sequence[float]
) -> list[tuple[float, float]]:
    """(outer radius, value) per layer that can affect a shift.

    Zero-width and inert layers are dropped, equal neighbours fused and
    trailing zero layers removed.
    """
    layers: list[tuple[float, float]] = []
    inner = 0.0
    for r, q in zip(radii, values):
        if r <= inner or r <= INERT_RADIUS:
            continue
        if layers and layers[-1][1] == q:
            layers[-1] = (r, q)
        else:
            layers.append((r, q))
        inner = r
    while layers and layers[-1][1] == 0.0:
        layers.pop()
    return layers


def check_regime(values: Sequence[float], k: float) -> None:
    """Raise UnsupportedRegimeError for the first layer with q >= k^2."""
    if not k > 0:
        raise DomainError(f"wave number must be positive, got k={k!r}")
    for index, q in enumerate(values, start=1):
        if not k * k - q > 0:
            raise UnsupportedRegimeError(index, float(q), float(k))


def _principal(delta: NDArray[np.float64]) -> NDArray[np.float64]:
    """Map angles into (-pi/2, pi/2] modulo pi."""
    wrapped = np.mod(delta + 0.5 * math.pi, math.pi) - 0.5 * math.pi
    return np.where(wrapped <= -0.5 * math.pi, 0.5 * math.pi, wrapped)


def _rebalance(a, b, shift):
    """(a e^shift, b e^-shift) normalised by its larger component, in log form."""
    with np.errstate(divide="ignore"):
        log_a = np.log(np.abs(a)) + shift
        log_b = np.log(np.abs(b)) - shift
    top = np.maximum(log_a, log_b)
    return np.sign(a) * np.exp(log_a - top), np.sign(b) * np.exp(log_b - top)


def sweep_shifts(
    radii: Sequence[float], values: Sequence[float], k: float, l_max: int
) -> NDArray[np.float64]:
    """delta(k, l) for l = 0..l_max; radii must already be sorted."""
    check_regime(values, k)
    if l_max < 0:
        raise DomainError(f"l_max must be nonnegative, got {l_max}")
    layers = _effective_layers(radii, values)
    if not layers:
        return np.zeros(l_max + 1)

    kappas = [math.sqrt(k * k - q) for _, q in layers] + [k]
    args = []
    for i, (r, _) in enumerate(layers):
        args.extend((kappas[i] * r, kappas[i + 1] * r))
    table = riccati_table(l_max, args)

    a = np.ones(l_max + 1)
    b = np.zeros(l_max + 1)
    previous_scale = np.zeros(l_max + 1)
    for i in range(len(layers)):
        inner, outer = 2 * i, 2 * i + 1
        kp, kn = kappas[i], kappas[i + 1]
        a, b = _rebalance(a, b, previous_scale - table.log_scale[inner])

        j1, dj1, n1, dn1 = table.j[inner], table.dj[inner], table.n[inner], table.dn[inner]
        j2, dj2, n2, dn2 = table.j[outer], table.dj[outer], table.n[outer], table.dn[outer]
        a11 = kn * j1 * dn2 - kp * dj1 * n2
        a12 = kn * n1 * dn2 - kp * dn1 * n2
        a21 = kp * dj1 * j2 - kn * j1 * dj2
        a22 = kp * dn1 * j2 - kn * n1 * dj2
        a, b = a11 * a + a12 * b, a21 * a + a22 * b

        top = np.maximum(np.abs(a), np.abs(b))
        a, b = a / top, b / top
        previous_scale = table.log_scale[outer]

    a, b = _rebalance(a, b, previous_scale)
    return _principal(-np.arctan2(b, a))


def transfer_matrix(l: int, kappa_prev: float, kappa_next: float, r: float) -> TransferMatrix:
    """Interface matrix at radius r between wave numbers kappa_prev and kappa_next."""
    if l < 0:
        raise DomainError(f"order must be nonnegative, got l={l}")
    if not (kappa_prev > 0 and kappa_next > 0 and r > 0):
        raise DomainError(
            f"transfer matrix needs positive kappas and radius, got "
            f"kappa_prev={kappa_prev!r}, kappa_next={kappa_next!r}, r={r!r}"
        )
    table = riccati_table(l, [kappa_prev * r, kappa_next * r])
    j1, dj1, n1, dn1 = (float(arr[0, l]) for arr in (table.j, table.dj, table.n, table.dn))
    j2, dj2, n2, dn2 = (float(arr[1, l]) for arr in (table.j, table.dj, table.n, table.dn))
    s1, s2 = float(table.log_scale[0, l]), float(table.log_scale[1, l])
    kp, kn = kappa_prev, kappa_next
    return TransferMatrix(
        a11=(kn * j1 * dn2 - kp * dj1 * n2) * math.exp(s2 - s1),
        a12=(kn * n1 * dn2 - kp * dn1 * n2) * math.exp(s1 + s2),
        a21=(kp * dj1 * j2 - kn * j1 * dj2) * math.exp(-s1 - s2),
        a22=(kp * dn1 * j2 - kn * n1 * dj2) * math.exp(s1 - s2),
        scale=1.0 / kn,
    )


def phase_shift(p: PotentialConfig, k: float, l: int) -> float:
    if l < 0:
        raise DomainError(f"order must be nonnegative, got l={l}")
    return float(sweep_shifts(p.radii, p.values, k, l)[l])


def cutoff_from_shifts(shifts: NDArray[np.float64], hard_cap: int = HARD_CAP) -> int:
    """Cutoff N from a shift sweep reaching hard_cap.

    N = l* + 1 where l* starts the first run of CUTOFF_RUN shifts below
    CUTOFF_RATIO * |delta_0|.
    """
    lead = abs(float(shifts[0]))
    if lead == 0.0:
        return 0 if not np.any(shifts) else hard_cap
    below = np.abs(shifts) < CUTOFF_RATIO * lead
    for start in range(1, len(shifts) - CUTOFF_RUN + 1):
        if below[start : start + CUTOFF_RUN].all():
            return min(start + 1, hard_cap)
    return hard_cap


def shift_count(p: PotentialConfig, k: float, *, hard_cap: int = HARD_CAP) -> int:
    return cutoff_from_shifts(sweep_shifts(p.radii, p.values, k, hard_cap), hard_cap)


def phase_shifts(
    p: PotentialConfig, k: float, l_max: int | None = None, *, hard_cap: int = HARD_CAP
) -> PhaseShiftSet:
    """Shifts for l = 0..N with N from shift_count, or l = 0..l_max when given."""
    if l_max is None:
        full = sweep_shifts(p.radii, p.values, k, hard_cap)
        cutoff = cutoff_from_shifts(full, hard_cap)
        shifts = full[: cutoff + 1]
        logger.debug("cutoff N=%d at k=%s for %d layers", cutoff, k, p.layer_count)
    else:
        cutoff = l_max
        shifts = sweep_shifts(p.radii, p.values, k, l_max)
    return PhaseShiftSet(k=k, shifts=tuple(float(s) for s in shifts), cutoff=cutoff)


def oracle_phase_shifts(
    p: PotentialConfig, k: float, l_max: int, *, rtol: float = 1e-11, atol: float = 1e-13
) -> NDArray[np.float64]:
    """delta(k, 0..l_max) from the variable-phase equation.

    d delta_l / dr = -(q(r) / k) (j_l(kr) cos delta_l - n_l(kr) sin delta_l)^2
    integrated layer by layer from delta_l = 0 near the origin.
    """
    check_regime(p.values, k)
    orders = np.arange(l_max + 1)

    def rhs(r: float, delta: NDArray[np.float64], q: float) -> NDArray[np.float64]:
        x = k * r
        jh = x * spherical_jn(orders, x)
        nh = x * spherical_yn(orders, x)
        return -(q / k) * (jh * np.cos(delta) - nh * np.sin(delta)) ** 2

    delta = np.zeros(l_max + 1)
    inner = 0.0
    for r_end, q in _effective_layers(p.radii, p.values):
        start = max(inner, _ORACLE_START)
        if q != 0.0 and r_end > start:
            sol = solve_ivp(
                rhs, (start, r_end), delta, method="DOP853", rtol=rtol, atol=atol, args=(q,)
            )
            if not sol.success:
                raise OracleError(f"variable-phase integration failed on [{start}, {r_end}]: {sol.message}")
            delta = sol.y[:, -1]
        inner = r_end
    return _principal(delta)


def oracle_phase_shift(p: PotentialConfig, k: float, l: int) -> float:
    return float(oracle_phase_shifts(p, k, l)[l])
