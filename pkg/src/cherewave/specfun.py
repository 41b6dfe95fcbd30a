"""Scalar special functions: complex log-Gamma, Gauss 2F1, radial band-limited profiles.

The log-Gamma here is the workhorse behind every Gamma-ratio in the spectral
density, so it is implemented directly (Stirling series with a fixed Bernoulli
coefficient set, argument shift below |z| = 12, reflection for Re z < 1/2)
rather than routed through a library.  Off the positive real axis the returned
value may differ from the analytic continuation of log Gamma by an integer
multiple of 2*pi*i; every consumer in this package exponentiates sums of
log-Gamma values, for which that ambiguity is invisible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum

import numpy as np

__all__ = [
    "SpecialFunctionError",
    "GammaPoleError",
    "HypergeometricError",
    "log_gamma",
    "gamma_quotient",
    "stirling_ratio_bound",
    "gauss_2f1",
    "PWRadialProfile",
    "pw_radial_profile",
]


class SpecialFunctionError(ValueError):
    """Base class for special-function domain errors."""


class GammaPoleError(SpecialFunctionError):
    """Raised when a Gamma argument sits on a pole 0, -1, -2, ...

    ``pole_index`` is n for the pole at z = -n.
    """

    def __init__(self, z, pole_index: int):
        self.z = z
        self.pole_index = int(pole_index)
        super().__init__(f"log_gamma pole at z = -{self.pole_index} (argument {z})")


class HypergeometricError(SpecialFunctionError):
    """Raised for 2F1 parameter poles or unreachable argument regions."""


# Stirling coefficients B_{2n} / (2n (2n-1)), n = 1..11.  With the shift
# threshold |z| >= 12 the truncation error is below 1e-20, far inside the
# 1e-12 relative-accuracy contract.
_STIRLING = np.array(
    [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
        43867.0 / 244188.0,
        -174611.0 / 125400.0,
        854513.0 / 63756.0,
    ]
)

_SHIFT_RADIUS = 12.0
_POLE_ATOL = 1e-12
_LOG_2PI = math.log(2.0 * math.pi)


def _check_poles(z: np.ndarray) -> None:
    near_int = np.round(z.real)
    on_pole = (
        (near_int <= 0.0)
        & (np.abs(z.real - near_int) <= _POLE_ATOL)
        & (np.abs(z.imag) <= _POLE_ATOL)
    )
    if np.any(on_pole):
        idx = np.argwhere(on_pole)
        first = tuple(idx[0])
        zval = z[first]
        raise GammaPoleError(complex(zval), int(-np.round(zval.real)))


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    """log(sin(pi z)), principal-ish, overflow-safe for large |Im z|.

    sin(pi z) = (e^{i pi z} - e^{-i pi z}) / (2i); factoring out the dominant
    exponential keeps everything representable.  Branches are evaluated on
    masked slices so the recessive exponential never overflows.
    """
    out = np.empty(z.shape, dtype=complex)
    up = z.imag >= 0.0
    if np.any(up):
        zu = z[up]
        out[up] = -1j * math.pi * zu + np.log(1.0 - np.exp(2j * math.pi * zu)) - np.log(-2.0j)
    if np.any(~up):
        zd = z[~up]
        out[~up] = 1j * math.pi * zd + np.log(1.0 - np.exp(-2j * math.pi * zd)) - np.log(2.0j)
    return out


def _stirling_series(z: np.ndarray) -> np.ndarray:
    w = 1.0 / (z * z)
    acc = np.zeros_like(z)
    for c in _STIRLING[::-1]:
        acc = (acc + c) * w
    return acc * z  # sum c_n z^{1-2n}


def log_gamma(z):
    """Complex log-Gamma, elementwise on arrays.

    Relative accuracy ~1e-13 or better for |z| <= 1e3 away from poles.
    Raises :class:`GammaPoleError` when any element hits 0, -1, -2, ...
    """
    scalar = np.isscalar(z) or np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    _check_poles(z)

    out = np.zeros_like(z)

    refl = z.real < 0.5
    if np.any(refl):
        # log Gamma(z) = log pi - log sin(pi z) - log Gamma(1 - z)
        out[refl] = math.log(math.pi) - _log_sin_pi(z[refl])
        z[refl] = 1.0 - z[refl]
        sign = np.where(refl, -1.0, 1.0)
    else:
        sign = np.ones(z.shape)

    shift = np.zeros_like(z)
    for _ in range(int(_SHIFT_RADIUS) + 1):
        small = np.abs(z) < _SHIFT_RADIUS
        if not np.any(small):
            break
        shift[small] -= np.log(z[small])
        z[small] = z[small] + 1.0

    core = (z - 0.5) * np.log(z) - z + 0.5 * _LOG_2PI + _stirling_series(z)
    out = out + sign * (core + shift)
    return complex(out[0]) if scalar else out


def _is_nonpositive_int(a: complex, tol: float = _POLE_ATOL) -> bool:
    return abs(a.imag) <= tol and a.real <= tol and abs(a.real - round(a.real)) <= tol


def gamma_quotient(numerators, denominators) -> complex:
    """prod Gamma(num) / prod Gamma(den) with pole-aware semantics.

    A denominator pole contributes a zero; a surviving numerator pole raises.
    Matched numerator/denominator poles reduce via the reflection identity
    Gamma(-m)/Gamma(-n) = (-1)^{m-n} n!/m!.
    """
    nums = [complex(a) for a in numerators]
    dens = [complex(a) for a in denominators]
    num_poles = [a for a in nums if _is_nonpositive_int(a)]
    den_poles = [a for a in dens if _is_nonpositive_int(a)]
    phase = 1.0
    while num_poles and den_poles:
        a = num_poles.pop()
        b = den_poles.pop()
        nums.remove(a)
        dens.remove(b)
        m = int(round(-a.real))
        n = int(round(-b.real))
        phase *= (-1.0) ** (m - n) * math.exp(math.lgamma(n + 1) - math.lgamma(m + 1))
    if num_poles:
        raise GammaPoleError(num_poles[0], int(round(-num_poles[0].real)))
    if den_poles:
        return 0.0
    acc = 0.0 + 0.0j
    for a in nums:
        acc += log_gamma(a)
    for b in dens:
        acc -= log_gamma(b)
    return phase * complex(np.exp(acc))


# ---------------------------------------------------------------------------
# certified Stirling bound for Gamma-ratio products


def stirling_ratio_bound(z: complex, shifts) -> float:
    """Certified upper bound for |prod_j Gamma(c_j z + p_j)/Gamma(c_j z + q_j)|.

    ``shifts`` is a sequence of triples (c_j, p_j, q_j).  Every shifted
    argument must satisfy |arg w| <= pi - 0.1 and |w| >= 2 (Stirling sector);
    otherwise :class:`SpecialFunctionError` is raised.  The bound combines the
    Stirling main term with Olver's remainder bound
    |mu(w)| <= 1 / (12 |w| cos^2(arg(w)/2)).
    """
    z = complex(z)
    total = 0.0
    for c, p, q in shifts:
        for arg, s in ((c * z + p, +1.0), (c * z + q, -1.0)):
            w = complex(arg)
            r, th = abs(w), math.atan2(w.imag, w.real)
            if r < 2.0 or abs(th) > math.pi - 0.1:
                raise SpecialFunctionError(
                    f"argument {w} outside the Stirling sector for the certified bound"
                )
            main = ((w - 0.5) * np.log(w) - w + 0.5 * _LOG_2PI).real
            mu_bound = 1.0 / (12.0 * r * math.cos(0.5 * th) ** 2)
            total += s * main + mu_bound
    return float(math.exp(total))


# ---------------------------------------------------------------------------
# Gauss hypergeometric function

_2F1_TOL = 1e-16
_2F1_MAX_TERMS = 1000
# A parameter combination this close to the logarithmic degenerate case is
# evaluated by averaging two evaluations with c nudged by +-_2F1_NUDGE.
_2F1_DEGENERATE_TOL = 1e-6
_2F1_NUDGE = 1e-5


def _2f1_series(a: complex, b: complex, c: complex, z: complex) -> complex:
    term = 1.0 + 0.0j
    re, im = [1.0], [0.0]
    small = 0
    for n in range(_2F1_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        re.append(term.real)
        im.append(term.imag)
        # two consecutive tiny terms, so an incidental zero crossing of one
        # term cannot truncate the sum early
        if abs(term) < _2F1_TOL * (abs(fsum(re)) + abs(fsum(im)) + 1e-300):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise HypergeometricError(f"2F1 series did not converge at z = {z}")
    return complex(fsum(re), fsum(im))


def _2f1_terminating(a: complex, b: complex, c: complex, z: complex) -> complex:
    n_stop = int(round(-(a.real if _is_nonpositive_int(a) else b.real)))
    term = 1.0 + 0.0j
    re, im = [1.0], [0.0]
    for n in range(n_stop):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        re.append(term.real)
        im.append(term.imag)
    return complex(fsum(re), fsum(im))


def _2f1_connection_1mz(a: complex, b: complex, c: complex, z: complex) -> complex:
    """Linear-transformation value via the 1-z connection (c-a-b not integer)."""
    s = c - a - b
    u = 1.0 - z
    coef1 = gamma_quotient([c, s], [c - a, c - b])
    coef2 = gamma_quotient([c, -s], [a, b])
    t1 = coef1 * _2f1_series(a, b, 1.0 - s, u) if coef1 != 0.0 else 0.0
    t2 = coef2 * u**s * _2f1_series(c - a, c - b, 1.0 + s, u) if coef2 != 0.0 else 0.0
    return t1 + t2


def _near_int(x: complex, tol: float) -> bool:
    return abs(x.imag) <= tol and abs(x.real - round(x.real)) <= tol


def gauss_2f1(a: complex, b: complex, c: complex, z: complex) -> complex:
    """Gauss hypergeometric 2F1(a, b; c; z) for complex parameters.

    Evaluation regions: direct series for |z| <= 0.8; otherwise the Pfaff map
    z -> z/(z-1) and/or the 1-z connection formula, whichever yields the
    smaller transformed argument.  Degenerate (near-integer) connection
    parameters fall back to an averaged +-1e-5 nudge of c, documented
    tolerance 1e-6.  Raises for c on a pole and for arguments near the
    uncovered region around |z| ~ |1-z| ~ 1.
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _is_nonpositive_int(c):
        raise HypergeometricError(f"2F1 parameter pole: c = {c}")
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _2f1_terminating(a, b, c, z)
    if abs(z) <= 0.8:
        return _2f1_series(a, b, c, z)

    w = z / (z - 1.0)
    candidates = [("pfaff", abs(w)), ("one_minus_z", abs(1.0 - z)), ("pfaff_conn", abs(1.0 - w))]
    kind = min(candidates, key=lambda kv: kv[1])
    if kind[1] > 0.85:
        raise HypergeometricError(
            f"no convergent transformation for z = {z} (best region size {kind[1]:.3f})"
        )

    if kind[0] == "pfaff":
        return (1.0 - z) ** (-a) * _2f1_series(a, c - b, c, w)

    if kind[0] == "one_minus_z":
        aa, bb, cc, zz = a, b, c, z
    else:  # Pfaff first, then the 1-z connection in the w variable
        aa, bb, cc, zz = a, c - b, c, w

    if _near_int(cc - aa - bb, _2F1_DEGENERATE_TOL):
        lo = _2f1_connection_1mz(aa, bb, cc - _2F1_NUDGE, zz)
        hi = _2f1_connection_1mz(aa, bb, cc + _2F1_NUDGE, zz)
        val = 0.5 * (lo + hi)
    else:
        val = _2f1_connection_1mz(aa, bb, cc, zz)

    if kind[0] == "pfaff_conn":
        val = (1.0 - z) ** (-a) * val
    return val


# ---------------------------------------------------------------------------
# radial Paley-Wiener profiles


@dataclass(frozen=True)
class PWRadialProfile:
    """Fourier transform of the radial bump (1 - ||x||^2/R^2)_+^m on R^d.

    As a function of the spectral radius it is the entire series

        h(r) = pi^{d/2} Gamma(m+1) R^d  sum_n  (-(r R / 2)^2)^n / (n! Gamma(n+nu+1)),

    nu = m + d/2, so it extends to complex r (exponential type exactly R) and
    is even and real on the real axis.  Real-axis decay is r^-(m + (d+1)/2).
    """

    R: float
    m: int
    d: int

    @property
    def decay_exponent(self) -> float:
        return self.m + 0.5 * (self.d + 1)

    @property
    def nu(self) -> float:
        return self.m + 0.5 * self.d

    @property
    def prefactor(self) -> float:
        return (
            math.pi ** (0.5 * self.d)
            * math.exp(math.lgamma(self.m + 1) - math.lgamma(self.nu + 1))
            * self.R**self.d
        )

    def radial(self, r, with_error: bool = False):
        """Evaluate on real arrays or a complex scalar radius.

        ``with_error`` additionally returns the float64 cancellation estimate
        eps * max_term / |value| (the series alternates on the real axis).
        """
        scalar = np.isscalar(r) or np.ndim(r) == 0
        rr = np.atleast_1d(np.asarray(r, dtype=complex))
        u = -((rr * self.R / 2.0) ** 2)
        term = np.ones_like(u)
        acc = np.ones_like(u)
        peak = np.ones(u.shape)
        n = 0
        while True:
            term = term * u / ((n + 1.0) * (n + 1.0 + self.nu))
            acc = acc + term
            np.maximum(peak, np.abs(term), out=peak)
            n += 1
            # terms grow until n ~ |u|^(1/2); only trust smallness past that
            if n > max(8.0, 2.0 * math.sqrt(np.max(np.abs(u)))) and np.all(
                np.abs(term) <= 1e-18 * (np.abs(acc) + 1e-300)
            ):
                break
            if n > 4000:
                raise SpecialFunctionError("profile series failed to converge")
        val = self.prefactor * acc
        if np.all(np.abs(rr.imag) == 0.0):
            val = val.real.astype(complex) if np.iscomplexobj(r) else val.real
        out = val[0] if scalar else val
        if not with_error:
            return out
        err = 2.3e-16 * peak / np.maximum(np.abs(acc), 1e-300)
        return out, (float(err[0]) if scalar else err)

    def __call__(self, r):
        return self.radial(r)


def pw_radial_profile(R: float, m: int, d: int, n0: int | None = None) -> PWRadialProfile:
    """Build the band-limited radial profile of radius ``R`` and order ``m``.

    ``n0``, when given, is the required polynomial-decay budget: the profile
    must satisfy (1+r)^n0 h(r) -> 0, i.e. m + (d+1)/2 > n0.
    """
    if m < 1:
        raise ValueError("profile order m must be >= 1")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    prof = PWRadialProfile(R=float(R), m=int(m), d=int(d))
    if n0 is not None and prof.decay_exponent <= n0:
        raise ValueError(
            f"profile order m={m} too small: decay exponent {prof.decay_exponent} "
            f"does not exceed the required budget N0={n0}"
        )
    return prof
