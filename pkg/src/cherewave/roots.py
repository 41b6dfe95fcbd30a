"""Finite crystallographic root systems, Weyl groups and the sinh weight.

Supported families (fixed normalizations, see ``build_root_system``):

* ``A1``           -- {±a} in R^1 with ||a|| = sqrt(2)
* ``A1xA1x...``    -- d orthogonal copies of A1 (``A1_product``)
* ``BC1``          -- {±a, ±2a} in R^1 with ||a|| = 1
* ``A2``           -- six roots of length sqrt(2) at 60 degree spacing in R^2
* ``B2``           -- {±e1, ±e2, ±e1±e2} in R^2

Everything is immutable after construction; arrays are set non-writeable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = [
    "RootSystemData",
    "WeightFunction",
    "build_root_system",
    "reflect",
    "eval_weight",
    "SUPPORTED_FAMILIES",
]

SUPPORTED_FAMILIES = ("A1", "A1_product", "BC1", "A2", "B2")

# Matching tolerance for floating root/matrix identification.  The supported
# systems have entries built from {0, ±1/2, ±1, sqrt(2), sqrt(3)/2}, so any
# genuine coincidence is exact to a few ulp.
_MATCH_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RootSystemData:
    """A finite crystallographic root system with multiplicities.

    Attributes
    ----------
    family : str
        One of ``SUPPORTED_FAMILIES``.
    dim : int
        Ambient Euclidean dimension d.
    roots : (n, d) array
        All roots.
    positive : (p, d) array
        The positive subsystem R+.
    indivisible_positive : (q, d) array
        R0+ = {a in R+ : a/2 not in R}.
    weyl : (|W|, d, d) array
        The Weyl group as orthogonal matrices, identity first.
    w0 : (d, d) array
        Longest element (maps R+ onto -R+).
    multiplicity_positive : (p,) array
        k_a for each row of ``positive`` (W-invariant by construction).
    orbit_multiplicities : tuple of float
        One value per root orbit, in the documented per-family order.
    rho : (d,) array
        rho = 1/2 * sum_{a in R+} k_a a.
    """

    family: str
    dim: int
    roots: np.ndarray
    positive: np.ndarray
    indivisible_positive: np.ndarray
    weyl: np.ndarray
    w0: np.ndarray
    multiplicity_positive: np.ndarray
    orbit_multiplicities: tuple
    rho: np.ndarray
    _orbit_of_positive: np.ndarray = field(repr=False, default=None)

    @property
    def weyl_order(self) -> int:
        return self.weyl.shape[0]

    @property
    def total_multiplicity(self) -> float:
        """|k| = sum over R+ of k_a."""
        return float(np.sum(self.multiplicity_positive))

    @property
    def num_indivisible(self) -> int:
        """D = |R0+|, the degree of the anti-invariant polynomial."""
        return self.indivisible_positive.shape[0]

    def coroot(self, alpha: np.ndarray) -> np.ndarray:
        """2a / ||a||^2."""
        alpha = np.asarray(alpha, dtype=float)
        return 2.0 * alpha / float(alpha @ alpha)

    def multiplicity_of(self, alpha: np.ndarray) -> float:
        """k_a for any root a (0 is returned for 2a when 2a is not a root)."""
        idx = _find_root(self.roots, alpha)
        if idx is None:
            raise ValueError(f"{alpha!r} is not a root of {self.family}")
        # k is W-invariant and k(-a) = k(a); match against the positive list.
        a = self.roots[idx]
        for sign in (1.0, -1.0):
            j = _find_root(self.positive, sign * a)
            if j is not None:
                return float(self.multiplicity_positive[j])
        raise AssertionError("root not matched to positive subsystem")

    def doubled_multiplicity(self, alpha: np.ndarray) -> float:
        """k_{2a} for an indivisible root a; zero when 2a is not a root."""
        if _find_root(self.roots, 2.0 * np.asarray(alpha, float)) is None:
            return 0.0
        return self.multiplicity_of(2.0 * np.asarray(alpha, float))


def _find_root(table: np.ndarray, v: np.ndarray) -> int | None:
    v = np.asarray(v, dtype=float)
    d = np.max(np.abs(table - v[None, :]), axis=1)
    j = int(np.argmin(d))
    return j if d[j] <= _MATCH_TOL else None


def reflect(x: np.ndarray, alpha: np.ndarray, system: RootSystemData | None = None) -> np.ndarray:
    """Reflection r_a(x) = x - 2<a,x>/||a||^2 * a.

    When ``system`` is given, ``alpha`` must be one of its roots.
    """
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if system is not None and _find_root(system.roots, alpha) is None:
        raise ValueError(f"{alpha!r} is not a root of {system.family}")
    return x - (2.0 * (x @ alpha) / (alpha @ alpha)) * alpha


def _reflection_matrix(alpha: np.ndarray, dim: int) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return np.eye(dim) - 2.0 * np.outer(alpha, alpha) / (alpha @ alpha)


def _generate_weyl(simple: np.ndarray, dim: int) -> np.ndarray:
    """Breadth-first closure of the group generated by simple reflections."""
    gens = [_reflection_matrix(a, dim) for a in simple]
    elems = [np.eye(dim)]
    frontier = [np.eye(dim)]
    while frontier:
        new = []
        for w in frontier:
            for g in gens:
                c = g @ w
                if not any(np.max(np.abs(c - e)) <= _MATCH_TOL for e in elems):
                    elems.append(c)
                    new.append(c)
        frontier = new
        if len(elems) > 4096:
            raise RuntimeError("Weyl closure did not terminate")
    return np.array(elems)


def _longest_element(weyl: np.ndarray, positive: np.ndarray) -> np.ndarray:
    """The unique w with w R+ = -R+."""
    neg = -positive
    for w in weyl:
        image = positive @ w.T
        if all(_find_root(neg, v) is not None for v in image):
            return w
    raise AssertionError("no longest element found (positive system inconsistent)")


def _family_roots(family: str, dim: int | None):
    """Positive roots, simple roots, orbit labels and ambient dimension."""
    s2 = math.sqrt(2.0)
    if family == "A1":
        pos = np.array([[s2]])
        simple = pos
        orbit = np.array([0])
        return pos, simple, orbit, 1
    if family == "A1_product":
        if dim is None or dim < 1:
            raise ValueError("A1_product requires a dimension >= 1")
        pos = s2 * np.eye(dim)
        orbit = np.arange(dim)
        return pos, pos, orbit, dim
    if family == "BC1":
        pos = np.array([[1.0], [2.0]])
        simple = np.array([[1.0]])
        orbit = np.array([0, 1])
        return pos, simple, orbit, 1
    if family == "A2":
        angles = [0.0, math.pi / 3.0, 2.0 * math.pi / 3.0]
        pos = s2 * np.array([[math.cos(t), math.sin(t)] for t in angles])
        simple = pos[[0, 2]]
        orbit = np.array([0, 0, 0])
        return pos, simple, orbit, 2
    if family == "B2":
        pos = np.array([[1.0, -1.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        simple = pos[[0, 1]]
        # orbit 0: long roots e1±e2, orbit 1: short roots e1, e2
        orbit = np.array([0, 1, 1, 0])
        return pos, simple, orbit, 2
    raise ValueError(f"unsupported family {family!r}; supported: {SUPPORTED_FAMILIES}")


def build_root_system(family: str, multiplicities, dim: int | None = None) -> RootSystemData:
    """Construct root-system data for one of the supported families.

    Parameters
    ----------
    family : str
        ``A1``, ``A1_product`` (needs ``dim``), ``BC1``, ``A2`` or ``B2``.
    multiplicities : float or sequence of float
        One value per root orbit, or a single value broadcast to all orbits.
        Orbit order: A1 -> (k,); A1_product -> one per factor; BC1 -> (k_a,
        k_2a); A2 -> (k,); B2 -> (k_long, k_short).
    dim : int, optional
        Number of factors for ``A1_product``; ignored otherwise.
    """
    pos, simple, orbit_idx, d = _family_roots(family, dim)
    n_orbits = int(orbit_idx.max()) + 1

    if np.isscalar(multiplicities):
        mults = [float(multiplicities)] * n_orbits
    else:
        mults = [float(v) for v in multiplicities]
        if len(mults) == 1:
            mults = mults * n_orbits
    if len(mults) != n_orbits:
        raise ValueError(
            f"{family} has {n_orbits} root orbit(s); got {len(mults)} multiplicity value(s)"
        )
    if any(v < 0 for v in mults):
        raise ValueError("multiplicities must be nonnegative")

    k_pos = np.array([mults[i] for i in orbit_idx], dtype=float)

    roots = np.vstack([pos, -pos])
    weyl = _generate_weyl(simple, d)
    w0 = _longest_element(weyl, pos)

    # indivisible positive roots: a/2 is not a root
    indiv = np.array(
        [a for a in pos if _find_root(roots, 0.5 * a) is None]
    ).reshape(-1, d)

    rho = 0.5 * (k_pos[:, None] * pos).sum(axis=0)

    data = RootSystemData(
        family=family,
        dim=d,
        roots=_freeze(roots),
        positive=_freeze(pos),
        indivisible_positive=_freeze(indiv),
        weyl=_freeze(weyl),
        w0=_freeze(w0),
        multiplicity_positive=_freeze(k_pos),
        orbit_multiplicities=tuple(mults),
        rho=_freeze(rho),
        _orbit_of_positive=_freeze(orbit_idx.astype(float)),
    )
    _validate(data)
    return data


def _validate(rs: RootSystemData) -> None:
    # closure of R under every root reflection
    for a in rs.roots:
        for b in rs.roots:
            if _find_root(rs.roots, reflect(b, a)) is None:
                raise AssertionError("root system not closed under its reflections")
    # w0 maps R+ onto -R+
    image = rs.positive @ rs.w0.T
    for v in image:
        if _find_root(-rs.positive, v) is None:
            raise AssertionError("w0 does not map R+ onto -R+")
    expected_order = {
        "A1": 2,
        "A1_product": 2 ** rs.dim,
        "BC1": 2,
        "A2": 6,
        "B2": 8,
    }[rs.family]
    if rs.weyl_order != expected_order:
        raise AssertionError(
            f"|W| = {rs.weyl_order}, expected {expected_order} for {rs.family}"
        )


# ---------------------------------------------------------------------------
# the weight mu


def eval_weight(rs: RootSystemData, x: np.ndarray) -> np.ndarray:
    """mu(x) = prod over R+ of |2 sinh(<a,x>/2)|^(2 k_a).

    ``x`` may be a single point of shape (d,) or a batch of shape (n, d).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    pair = pts @ rs.positive.T  # (n, p)
    vals = np.ones(pts.shape[0])
    for j in range(rs.positive.shape[0]):
        k = rs.multiplicity_positive[j]
        if k == 0.0:
            continue
        vals = vals * np.abs(2.0 * np.sinh(0.5 * pair[:, j])) ** (2.0 * k)
    return float(vals[0]) if single else vals


@dataclass(frozen=True)
class WeightFunction:
    """Callable wrapper around ``eval_weight`` for a fixed root system."""

    system: RootSystemData

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return eval_weight(self.system, x)
