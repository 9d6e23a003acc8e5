"""Riccati-Bessel functions j_l(x) = x j_l^{sph}(x) and n_l(x) = x y_l^{sph}(x).

The irregular function n_l comes from upward recurrence and the regular one
from Miller's downward recurrence normalised against j_0 = sin x (or against
j_1 near zeros of sin x). Both recurrences carry a running log-scale so the
barrier region l >> x neither overflows n nor underflows j.

A :class:`RiccatiTable` stores, per (argument, order), scaled values
    j_hat = j * exp(s),  n_hat = n * exp(-s)
with s >= 0 chosen only where |n| would pass ~1e100. The Wronskian
j_hat n_hat' - j_hat' n_hat = 1 is untouched by the scaling.
"""
from __future__ import annotations

import logging
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from potential_identification.errors import DomainError, RiccatiRangeWarning

logger = logging.getLogger(__name__)

_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)
_SCALE_ONSET = math.log(1e100)
_LOG_MAX = math.log(sys.float_info.max)
_LOG_TINY = math.log(sys.float_info.min)


@dataclass(frozen=True)
class RiccatiPair:
    """j_l, n_l and their first derivatives at one order and argument.

    With ``log_scale > 0`` the j-pair is stored multiplied by ``exp(log_scale)``
    and the n-pair divided by it; :meth:`regular` and :meth:`irregular` undo
    the scaling.
    """

    value_j: float
    value_n: float
    deriv_j: float
    deriv_n: float
    order: int
    argument: float
    log_scale: float = 0.0

    @property
    def wronskian(self) -> float:
        return self.value_j * self.deriv_n - self.deriv_j * self.value_n

    @property
    def clipped(self) -> bool:
        _, j_clipped = _unscale(self.value_j, -self.log_scale)
        _, n_clipped = _unscale(self.value_n, self.log_scale)
        return j_clipped or n_clipped

    def regular(self) -> tuple[float, float]:
        """Unscaled (j_l, j_l'); underflow returns zeros with a warning."""
        value, v_clip = _unscale(self.value_j, -self.log_scale)
        deriv, d_clip = _unscale(self.deriv_j, -self.log_scale)
        if v_clip or d_clip:
            warnings.warn(
                f"j_{self.order}({self.argument!r}) underflows; returning zero",
                RiccatiRangeWarning,
                stacklevel=3,
            )
        return value, deriv

    def irregular(self) -> tuple[float, float]:
        """Unscaled (n_l, n_l'); overflow returns signed infinities with a warning."""
        value, v_clip = _unscale(self.value_n, self.log_scale)
        deriv, d_clip = _unscale(self.deriv_n, self.log_scale)
        if v_clip or d_clip:
            warnings.warn(
                f"n_{self.order}({self.argument!r}) overflows; returning infinity",
                RiccatiRangeWarning,
                stacklevel=3,
            )
        return value, deriv


@dataclass(frozen=True)
class RiccatiTable:
    """Scaled Riccati-Bessel values, arrays of shape (len(arguments), l_max + 1)."""

    arguments: NDArray[np.float64]
    j: NDArray[np.float64]
    dj: NDArray[np.float64]
    n: NDArray[np.float64]
    dn: NDArray[np.float64]
    log_scale: NDArray[np.float64]

    @property
    def l_max(self) -> int:
        return self.j.shape[1] - 1

    def pair(self, index: int, order: int) -> RiccatiPair:
        return RiccatiPair(
            value_j=float(self.j[index, order]),
            value_n=float(self.n[index, order]),
            deriv_j=float(self.dj[index, order]),
            deriv_n=float(self.dn[index, order]),
            order=order,
            argument=float(self.arguments[index]),
            log_scale=float(self.log_scale[index, order]),
        )


def _unscale(value: float, log_factor: float) -> tuple[float, bool]:
    if log_factor == 0.0 or value == 0.0:
        return value, False
    magnitude = math.log(abs(value)) + log_factor
    if magnitude > _LOG_MAX:
        return math.copysign(math.inf, value), True
    if magnitude < _LOG_TINY:
        return 0.0, True
    if abs(log_factor) < _LOG_MAX:
        return value * math.exp(log_factor), False
    return math.copysign(math.exp(magnitude), value), False


def miller_start(l_max: int, x_max: float) -> int:
    """Starting order of the downward recurrence for j."""
    base = max(l_max, math.ceil(x_max))
    return base + max(20, math.ceil(4.0 * math.sqrt(base)))


def _irregular_logs(rows: int, x: NDArray[np.float64]):
    sin_x, cos_x = np.sin(x), np.cos(x)
    mant = np.empty((rows + 1, x.size))
    shift = np.zeros((rows + 1, x.size))
    mant[0] = -cos_x
    mant[1] = -cos_x / x - sin_x
    prev, cur = mant[0].copy(), mant[1].copy()
    t = np.zeros(x.size)
    for l in range(1, rows):
        nxt = (2 * l + 1) / x * cur - prev
        big = np.abs(nxt) > _RESCALE
        if big.any():
            nxt = np.where(big, nxt / _RESCALE, nxt)
            cur = np.where(big, cur / _RESCALE, cur)
            t = t + np.where(big, _LOG_RESCALE, 0.0)
        mant[l + 1] = nxt
        shift[l + 1] = t
        prev, cur = cur, nxt

    orders = np.arange(1, rows + 1)[:, None]
    dmant = np.empty_like(mant)
    dmant[1:] = mant[:-1] * np.exp(shift[:-1] - shift[1:]) - orders / x * mant[1:]
    dmant[0] = sin_x

    log_n = np.log(np.abs(mant)) + shift
    log_dn = np.log(np.abs(dmant)) + shift
    return log_n, np.sign(mant), log_dn, np.sign(dmant)


def _regular_logs(rows: int, x: NDArray[np.float64]):
    top = miller_start(rows, float(x.max()))
    mant = np.empty((rows + 1, x.size))
    shift = np.empty((rows + 1, x.size))
    upper = np.zeros(x.size)
    cur = np.ones(x.size)
    u = np.zeros(x.size)
    for l in range(top, 0, -1):
        lower = (2 * l + 1) / x * cur - upper
        big = np.abs(lower) > _RESCALE
        if big.any():
            lower = np.where(big, lower / _RESCALE, lower)
            cur = np.where(big, cur / _RESCALE, cur)
            u = u + np.where(big, _LOG_RESCALE, 0.0)
        if l - 1 <= rows:
            mant[l - 1] = lower
            shift[l - 1] = u
        upper, cur = cur, lower

    sin_x, cos_x = np.sin(x), np.cos(x)
    j1 = sin_x / x - cos_x
    use_j1 = np.abs(j1) > np.abs(sin_x)
    log_norm = np.where(
        use_j1,
        np.log(np.abs(j1)) - np.log(np.abs(mant[1])) - shift[1],
        np.log(np.abs(sin_x)) - np.log(np.abs(mant[0])) - shift[0],
    )
    sign_norm = np.where(use_j1, np.sign(j1) * np.sign(mant[1]), np.sign(sin_x) * np.sign(mant[0]))

    orders = np.arange(1, rows + 1)[:, None]
    dmant = np.empty_like(mant)
    dmant[1:] = mant[:-1] * np.exp(shift[:-1] - shift[1:]) - orders / x * mant[1:]

    log_j = np.log(np.abs(mant)) + shift + log_norm
    log_dj = np.log(np.abs(dmant)) + shift + log_norm
    sign_j = np.sign(mant) * sign_norm
    sign_dj = np.sign(dmant) * sign_norm
    log_dj[0] = np.log(np.abs(cos_x))
    sign_dj[0] = np.sign(cos_x)
    return log_j, sign_j, log_dj, sign_dj


def riccati_table(l_max: int, x: ArrayLike) -> RiccatiTable:
    """Scaled j_l, n_l and derivatives for l = 0..l_max at every argument in ``x``."""
    if l_max < 0:
        raise DomainError(f"order must be nonnegative, got l_max={l_max}")
    args = np.atleast_1d(np.asarray(x, dtype=float))
    if args.size == 0:
        raise DomainError("at least one argument is required")
    if not np.all(args > 0):
        raise DomainError(f"Riccati-Bessel functions need x > 0, got {args[~(args > 0)][0]!r}")

    rows = max(l_max, 1)
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        log_j, sign_j, log_dj, sign_dj = _regular_logs(rows, args)
        log_n, sign_n, log_dn, sign_dn = _irregular_logs(rows, args)

        big_n = np.maximum(log_n, log_dn)
        big_j = np.maximum(log_j, log_dj)
        scale = np.where(big_n > _SCALE_ONSET, 0.5 * (big_n - big_j), 0.0)

        j = sign_j * np.exp(log_j + scale)
        dj = sign_dj * np.exp(log_dj + scale)
        n = sign_n * np.exp(log_n - scale)
        dn = sign_dn * np.exp(log_dn - scale)

    sin_x, cos_x = np.sin(args), np.cos(args)
    j[0], dj[0], n[0], dn[0], scale[0] = sin_x, cos_x, -cos_x, sin_x, 0.0

    keep = slice(0, l_max + 1)
    return RiccatiTable(
        arguments=args,
        j=np.ascontiguousarray(j[keep].T),
        dj=np.ascontiguousarray(dj[keep].T),
        n=np.ascontiguousarray(n[keep].T),
        dn=np.ascontiguousarray(dn[keep].T),
        log_scale=np.ascontiguousarray(scale[keep].T),
    )


def riccati_row(l_max: int, x: float) -> list[RiccatiPair]:
    table = riccati_table(l_max, x)
    return [table.pair(0, l) for l in range(l_max + 1)]


def riccati_j(l: int, x: float) -> tuple[float, float]:
    """j_l(x) and dj_l/dx, normalised so that j_l(x) ~ sin(x - l pi / 2)."""
    return riccati_table(l, x).pair(0, l).regular()


def riccati_n(l: int, x: float) -> tuple[float, float]:
    """n_l(x) and dn_l/dx, normalised so that n_l(x) ~ -cos(x - l pi / 2)."""
    return riccati_table(l, x).pair(0, l).irregular()
