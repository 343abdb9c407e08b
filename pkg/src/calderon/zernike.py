"""Orthonormal Zernike basis of L2 on the unit disk.

Indexing follows ``psi[j, k]`` with angular frequency ``j`` (any sign) and radial
order ``k >= 0``::

    psi[j, k](r e^{i theta}) = sqrt((|j| + 2k + 1) / pi) * R^{|j|}_{|j|+2k}(r) * e^{i j theta}

The radial factor is evaluated from its explicit alternating binomial sum with
integer coefficients.
"""

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, pi, sqrt
from typing import NamedTuple

import numpy as np

from calderon.quadrature import default_grid

__all__ = [
    "BasisIndex",
    "ZernikeCoeffs",
    "MonomialExpansion",
    "radial_eval",
    "radial_coefficients",
    "basis_eval",
    "radial_inner",
    "monomial_coeffs",
    "monomial_coeffs_exact",
    "l2_norm",
    "project_function",
    "sample_on_grid",
    "evaluate",
    "MAX_RADIAL_K",
    "MAX_RADIAL_J",
]

# Supported orders for the explicit alternating sum.
MAX_RADIAL_K = 12
MAX_RADIAL_J = 64

_FLOAT_EXACT_INT = 2**53


class BasisIndex(NamedTuple):
    j: int
    k: int


class ZernikeCoeffs(Mapping):
    """Sparse, immutable table of complex amplitudes ``c[j, k]``.

    ``K`` and ``J`` are the truncation bounds of the table; they default to the
    largest stored ``k`` and ``|j|``. Missing entries read as zero. Iteration is
    k-major, then j ascending.
    """

    __slots__ = ("_entries", "_K", "_J")

    def __init__(self, entries=None, K=None, J=None):
        data = {}
        for key, value in dict(entries or {}).items():
            j, k = int(key[0]), int(key[1])
            if k < 0:
                raise ValueError(f"radial order must be non-negative, got k={k}")
            data[BasisIndex(j, k)] = complex(value)
        max_k = max((key.k for key in data), default=0)
        max_j = max((abs(key.j) for key in data), default=0)
        K = max_k if K is None else int(K)
        J = max_j if J is None else int(J)
        if K < max_k or J < max_j:
            raise ValueError(
                f"stored indices exceed bounds: max k={max_k} > K={K} or max |j|={max_j} > J={J}"
            )
        order = sorted(data, key=lambda key: (key.k, key.j))
        self._entries = {key: data[key] for key in order}
        self._K = K
        self._J = J

    @property
    def K(self):
        return self._K

    @property
    def J(self):
        return self._J

    def __getitem__(self, key):
        return self._entries[BasisIndex(int(key[0]), int(key[1]))]

    def get(self, key, default=0j):
        return self._entries.get(BasisIndex(int(key[0]), int(key[1])), default)

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"ZernikeCoeffs({dict(self._entries)!r}, K={self._K}, J={self._J})"

    def __eq__(self, other):
        if not isinstance(other, ZernikeCoeffs):
            return NotImplemented
        keys = set(self) | set(other)
        return all(self.get(key) == other.get(key) for key in keys)

    __hash__ = None

    def angular_frequencies(self):
        """Sorted distinct ``j`` values carrying a stored entry."""
        return sorted({key.j for key in self._entries})

    def radial_profile(self, j):
        """Coefficients ``c[j, 0..K]`` as a complex array."""
        out = np.zeros(self._K + 1, dtype=complex)
        for key, value in self._entries.items():
            if key.j == j:
                out[key.k] = value
        return out

    def layer(self, k):
        """``{j: c[j, k]}`` for the fixed radial order ``k``."""
        return {key.j: value for key, value in self._entries.items() if key.k == k}

    def nonzero(self):
        """Copy with exact zeros dropped (bounds kept)."""
        return ZernikeCoeffs(
            {key: v for key, v in self._entries.items() if v != 0}, K=self._K, J=self._J
        )

    def _combine(self, other, a, b):
        keys = set(self) | set(other)
        return ZernikeCoeffs(
            {key: a * self.get(key) + b * other.get(key) for key in keys},
            K=max(self._K, other.K),
            J=max(self._J, other.J),
        )

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, scalar):
        return ZernikeCoeffs(
            {key: scalar * v for key, v in self._entries.items()}, K=self._K, J=self._J
        )

    __rmul__ = __mul__

    def to_array(self):
        """Dense array ``A[k, j + J]``."""
        out = np.zeros((self._K + 1, 2 * self._J + 1), dtype=complex)
        for key, value in self._entries.items():
            out[key.k, key.j + self._J] = value
        return out

    @classmethod
    def from_array(cls, array, J=None):
        """Inverse of :meth:`to_array`; zeros are not stored."""
        array = np.asarray(array, dtype=complex)
        if J is None:
            J = (array.shape[1] - 1) // 2
        entries = {
            (j - J, k): array[k, j]
            for k in range(array.shape[0])
            for j in range(array.shape[1])
            if array[k, j] != 0
        }
        return cls(entries, K=array.shape[0] - 1, J=J)


@dataclass(frozen=True)
class MonomialExpansion:
    """``r^{j_abs + 2p} = sum_s d[s] * R^{j_abs}_{j_abs+2s}(r)``."""

    j_abs: int
    p: int
    d: tuple

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        return sum(ds * radial_eval(self.j_abs, s, r) for s, ds in enumerate(self.d))


def _check_order(j, k):
    if k < 0:
        raise ValueError(f"radial order must be non-negative, got k={k}")
    if k > MAX_RADIAL_K or abs(j) > MAX_RADIAL_J:
        raise ValueError(
            f"radial order (|j|={abs(j)}, k={k}) outside supported range "
            f"|j| <= {MAX_RADIAL_J}, k <= {MAX_RADIAL_K}"
        )


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < 0.0) or np.any(r > 1.0):
        raise ValueError("radius must lie in [0, 1]")
    return r


@lru_cache(maxsize=None)
def radial_coefficients(j_abs, k):
    """Integer monomial coefficients of ``R^{j_abs}_{j_abs+2k}``.

    Returns a tuple of ``(power, coefficient)`` pairs, highest power first.
    """
    n = j_abs + 2 * k
    terms = []
    for q in range(k + 1):
        c = comb(n - q, q) * comb(n - 2 * q, k - q)
        if c >= _FLOAT_EXACT_INT:
            raise OverflowError(f"binomial product {c} not exactly representable")
        terms.append((n - 2 * q, (-1) ** q * c))
    return tuple(terms)


def radial_eval(j, k, r):
    """Radial Zernike polynomial ``R^{|j|}_{|j|+2k}(r)``; ``r`` may be an array."""
    _check_order(j, k)
    r = _check_radius(r)
    out = np.zeros_like(r)
    for power, c in radial_coefficients(abs(j), k):
        out = out + float(c) * r**power
    return out if out.ndim else float(out)


def basis_eval(idx, r, theta):
    """``psi[j, k](r e^{i theta})``."""
    j, k = idx
    radial = radial_eval(j, k, r)
    value = sqrt((abs(j) + 2 * k + 1) / pi) * radial * np.exp(1j * j * np.asarray(theta))
    return value if np.ndim(value) else complex(value)


def radial_inner(j, k, k2, grid=None):
    """Weighted inner product ``int_0^1 R_k R_k2 r dr`` by Gauss-Legendre."""
    grid = grid or default_grid()
    return float(
        np.sum(grid.radial_weights * radial_eval(j, k, grid.r) * radial_eval(j, k2, grid.r))
    )


@lru_cache(maxsize=None)
def monomial_coeffs_exact(j_abs, p):
    """Exact ``d[j_abs, s, p]`` for ``s = 0..p`` as Fractions."""
    if j_abs < 0 or p < 0:
        raise ValueError("j_abs and p must be non-negative")
    return tuple(
        Fraction(j_abs + 2 * s + 1, j_abs + p + s + 1)
        * Fraction(comb(p, s), comb(j_abs + p + s, s))
        for s in range(p + 1)
    )


@lru_cache(maxsize=None)
def monomial_coeffs(j_abs, p):
    """Expansion of ``r^{j_abs+2p}`` in the radial polynomials ``R^{j_abs}_{j_abs+2s}``."""
    return MonomialExpansion(j_abs, p, tuple(float(d) for d in monomial_coeffs_exact(j_abs, p)))


def l2_norm(coeffs):
    """L2(D) norm via Parseval."""
    return sqrt(sum(abs(c) ** 2 for c in coeffs.values()))


def _radial_table(coeffs, r):
    """``{j: sum_k c[j,k] sqrt((|j|+2k+1)/pi) R(r)}`` sampled at radii ``r``."""
    out = {}
    for (j, k), c in coeffs.items():
        if c == 0:
            continue
        term = c * sqrt((abs(j) + 2 * k + 1) / pi) * radial_eval(j, k, r)
        out[j] = out.get(j, 0.0) + term
    return out


def sample_on_grid(coeffs, grid=None):
    """Values of ``eta = sum c psi`` on the grid, shape ``(n_r, n_theta)``."""
    grid = grid or default_grid()
    values = np.zeros(grid.shape, dtype=complex)
    for j, profile in _radial_table(coeffs, grid.r).items():
        values += np.outer(profile, np.exp(1j * j * grid.theta))
    return values


def evaluate(coeffs, z):
    """Evaluate ``eta`` at complex points ``z`` with ``|z| <= 1``."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    # absorb rounding of points constructed on the unit circle
    r = np.where((r > 1.0) & (r <= 1.0 + 1e-13), 1.0, r)
    theta = np.angle(z)
    values = np.zeros(z.shape, dtype=complex)
    for j, profile in _radial_table(coeffs, r).items():
        values = values + profile * np.exp(1j * j * theta)
    return values


def project_function(f, K, J, grid=None):
    """Zernike coefficients of ``f`` for ``k <= K``, ``|j| <= J`` by quadrature.

    ``f`` takes an array of complex points ``x + iy`` in the disk and returns
    values of the same shape. The grid must resolve ``f``; this is not checked.
    """
    grid = grid or default_grid()
    samples = np.asarray(f(grid.points()), dtype=complex)
    samples = np.broadcast_to(samples, grid.shape)
    js = np.arange(-J, J + 1)
    # angular moments: F_j(r_i) = sum_l w_l f(r_i, theta_l) e^{-i j theta_l}
    phases = np.exp(-1j * np.outer(grid.theta, js)) * grid.angular_weights[:, None]
    moments = samples @ phases
    entries = {}
    for col, j in enumerate(js):
        for k in range(K + 1):
            radial = radial_eval(j, k, grid.r)
            norm = sqrt((abs(j) + 2 * k + 1) / pi)
            c = norm * np.sum(grid.radial_weights * radial * moments[:, col])
            if c != 0:
                entries[(int(j), k)] = c
    return ZernikeCoeffs(entries, K=K, J=J)
