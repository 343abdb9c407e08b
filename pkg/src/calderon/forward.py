"""Linearised forward data on the unit disk.

The data of a perturbation ``eta`` is the infinite matrix

    T[m, n] = <(F eta) f_m, f_n>,    f_m = e^{i m theta} / sqrt(2 pi),  m, n != 0,

which vanishes unless ``m n > 0``, and whose ``j``-th diagonal ``n - m = j`` only
sees the coefficients ``c[j, :]``. Entries are computed in closed form
(:func:`entry_closed_form`, :func:`assemble`) and, independently, by polar
quadrature of the defining bilinear form (:func:`entry_quadrature_oracle`).
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import pi, sqrt

import numpy as np

from calderon.quadrature import default_grid
from calderon.zernike import ZernikeCoeffs, monomial_coeffs, sample_on_grid

__all__ = [
    "BandedBoundaryOperator",
    "HsNormResult",
    "v_index",
    "pochhammer_ratio",
    "entry_closed_form",
    "single_basis_entry",
    "admissible_modes",
    "assemble",
    "entry_quadrature_oracle",
    "oracle_matrix",
    "hs_norm",
    "hs_inner",
    "adjoint_apply",
    "trigamma_bounds",
    "trigamma_partial_sum",
]


def _check_mode(m, name="m"):
    if int(m) != m or m == 0:
        raise ValueError(f"Fourier mode {name} must be a nonzero integer, got {m}")


def v_index(m, n):
    """``min(|m|, |n|) - 1`` for ``m n > 0``."""
    return min(abs(m), abs(n)) - 1


@dataclass(frozen=True)
class BandedBoundaryOperator:
    """Truncated data matrix ``T[m, n]`` for ``1 <= |m|, |n| <= M``.

    Stored per diagonal: ``diagonals[j] = (ms, values)`` holds ``T[m, m + j]``
    for the admissible ``ms`` (``m (m + j) > 0``). Anything not stored is zero.
    """

    M: int
    diagonals: dict

    def entry(self, m, n):
        _check_mode(m)
        _check_mode(n, "n")
        diag = self.diagonals.get(n - m)
        if diag is None:
            return 0j
        ms, values = diag
        idx = np.searchsorted(ms, m)
        if idx < len(ms) and ms[idx] == m:
            return complex(values[idx])
        return 0j

    def items(self):
        """Yield ``((m, n), value)`` for stored cells, diagonal by diagonal."""
        for j in sorted(self.diagonals):
            ms, values = self.diagonals[j]
            for m, value in zip(ms, values):
                yield (int(m), int(m + j)), complex(value)

    def __len__(self):
        return sum(len(ms) for ms, _ in self.diagonals.values())

    def frobenius_norm(self):
        return sqrt(sum(float(np.sum(np.abs(v) ** 2)) for _, v in self.diagonals.values()))

    def to_dense(self):
        """Dense matrix with rows ``n`` and columns ``m`` ordered ``-M..-1, 1..M``.

        So ``dense @ x`` applies the operator to a vector of ``f_m`` coefficients.
        """
        modes = _mode_axis(self.M)
        pos = {m: i for i, m in enumerate(modes)}
        out = np.zeros((len(modes), len(modes)), dtype=complex)
        for (m, n), value in self.items():
            if abs(m) <= self.M and abs(n) <= self.M:
                out[pos[n], pos[m]] = value
        return out

    @classmethod
    def from_entries(cls, M, entries):
        """Build from ``{(m, n): value}``; cells with ``m n < 0`` are kept as given."""
        per_diag = {}
        for (m, n), value in entries.items():
            m, n = int(m), int(n)
            _check_mode(m)
            _check_mode(n, "n")
            if abs(m) > M or abs(n) > M:
                raise ValueError(f"entry ({m}, {n}) outside truncation M={M}")
            per_diag.setdefault(n - m, {})[m] = complex(value)
        diagonals = {}
        for j, cells in per_diag.items():
            ms = np.array(sorted(cells), dtype=int)
            diagonals[j] = (ms, np.array([cells[m] for m in ms], dtype=complex))
        return cls(int(M), diagonals)

    def __add__(self, other):
        entries = dict(self.items())
        for key, value in other.items():
            entries[key] = entries.get(key, 0j) + value
        return BandedBoundaryOperator.from_entries(max(self.M, other.M), entries)

    def __mul__(self, scalar):
        return BandedBoundaryOperator(
            self.M, {j: (ms, scalar * v) for j, (ms, v) in self.diagonals.items()}
        )

    __rmul__ = __mul__


def _mode_axis(M):
    return [m for m in range(-M, M + 1) if m != 0]


@dataclass(frozen=True)
class HsNormResult:
    truncated_norm: float
    tail_bound: float

    @property
    def upper(self):
        return sqrt(self.truncated_norm**2 + self.tail_bound**2)

    @property
    def certified_interval(self):
        return (self.truncated_norm, self.upper)


def pochhammer_ratio(m, j, k):
    """``p[m, j, k] = (v)_k / (|j| + v + k)_k`` with ``v = v_index(m, m + j)``.

    Evaluated as the cancellation-free product over ``s = 1..k``.
    """
    if m * (m + j) <= 0:
        raise ValueError(f"pochhammer_ratio needs m(m+j) > 0, got m={m}, j={j}")
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    v = v_index(m, m + j)
    if k > v:
        return 0.0
    out = 1.0
    for s in range(1, k + 1):
        out *= (v + 1 - s) / (abs(j) + v + k + 1 - s)
    return out


def _entry_weight(m, j, k):
    """Coefficient multiplying ``c[j, k]`` in ``T[m, m + j]`` (zero when ``k > v``)."""
    v = v_index(m, m + j)
    if k > v:
        return 0.0
    return -sqrt(abs(j) + 2 * k + 1) / (sqrt(pi) * (abs(j) + v + k + 1)) * pochhammer_ratio(
        m, j, k
    )


def entry_closed_form(coeffs, m, n):
    """``<(F eta) f_m, f_n>`` from the Zernike coefficients of ``eta``."""
    _check_mode(m)
    _check_mode(n, "n")
    if m * n < 0:
        return 0j
    j = n - m
    v = v_index(m, n)
    total = 0j
    for k in range(min(coeffs.K, v) + 1):
        c = coeffs.get((j, k))
        if c != 0:
            total += c * _entry_weight(m, j, k)
    return total


def single_basis_entry(idx, m):
    """``<(F psi[j, k]) f_m, f_{m+j}>``; nonzero only for ``m`` in ``I[j, k]``."""
    j, k = idx
    _check_mode(m)
    n = m + j
    if m * n <= 0 or abs(m) <= k or abs(n) <= k:
        return 0.0
    return (
        -2.0
        / sqrt(pi)
        * sqrt(abs(j) + 2 * k + 1)
        / (abs(j) + abs(m) + abs(n) + 2 * k)
        * pochhammer_ratio(m, j, k)
    )


def admissible_modes(j, M):
    """Sorted ``m`` with ``m (m + j) > 0`` and ``|m|, |m + j| <= M``."""
    m = np.arange(-M, M + 1)
    n = m + j
    keep = (m * n > 0) & (np.abs(n) <= M)
    return m[keep]


@lru_cache(maxsize=4096)
def _diagonal_weights(j, M, K):
    ms = admissible_modes(j, M)
    weights = np.zeros((len(ms), K + 1))
    for row, m in enumerate(ms):
        for k in range(K + 1):
            weights[row, k] = _entry_weight(int(m), j, k)
    ms.setflags(write=False)
    weights.setflags(write=False)
    return ms, weights


def _default_workers():
    try:
        return max(1, int(os.environ.get("CALDERON_THREADS", "1")))
    except ValueError:
        return 1


def assemble(coeffs, M, workers=None):
    """Closed-form data matrix truncated at ``|m|, |n| <= M``.

    Each stored diagonal is independent; ``workers`` (default from
    ``CALDERON_THREADS``) spreads them over a thread pool.
    """
    if M < 1:
        raise ValueError(f"truncation M must be >= 1, got {M}")
    workers = _default_workers() if workers is None else workers

    def diagonal(j):
        ms, weights = _diagonal_weights(j, M, coeffs.K)
        return j, ms, weights @ coeffs.radial_profile(j)

    js = [j for j in coeffs.angular_frequencies() if abs(j) < M]
    if workers > 1 and len(js) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(diagonal, js))
    else:
        results = [diagonal(j) for j in js]
    return BandedBoundaryOperator(M, {j: (ms, values) for j, ms, values in results if len(ms)})


def _gradient_product(m, n, r, theta):
    """``grad u_m . conj(grad u_n)`` on a polar mesh."""
    if m * n < 0:
        return np.zeros(np.broadcast(r, theta).shape)
    return r ** (abs(m) + abs(n) - 2) * np.exp(1j * (m - n) * theta) / pi


def entry_quadrature_oracle(coeffs, m, n, grid=None):
    """``-int_D eta grad u_m . conj(grad u_n) dx`` by polar quadrature."""
    _check_mode(m)
    _check_mode(n, "n")
    if m * n < 0:
        return 0j
    grid = grid or default_grid()
    R, THETA = grid.mesh()
    eta = sample_on_grid(coeffs, grid)
    return complex(-grid.integrate(eta * _gradient_product(m, n, R, THETA)))


def oracle_matrix(coeffs, M, grid=None):
    """Quadrature data for every cell ``m n > 0``, ``|m|, |n| <= M``.

    Unlike :func:`assemble` this fills all same-sign cells, including those the
    closed form says vanish, so discrepancies off the band are visible.
    """
    grid = grid or default_grid()
    eta = sample_on_grid(coeffs, grid)
    ells = np.arange(-(2 * M - 2), 2 * M - 1)
    # angular moments: E_l(r_i) = sum_t w_t eta(r_i, t) e^{i l t}
    phases = np.exp(1j * np.outer(grid.theta, ells)) * grid.angular_weights[:, None]
    moments = eta @ phases
    diagonals = {}
    for j in range(-(M - 1), M):
        ms = admissible_modes(j, M)
        if not len(ms):
            continue
        col = (-j) - ells[0]
        powers = np.abs(ms) + np.abs(ms + j) - 2
        radial = grid.r[None, :] ** powers[:, None]
        values = -(radial * grid.radial_weights[None, :]) @ moments[:, col] / pi
        diagonals[j] = (ms, values)
    return BandedBoundaryOperator(M, diagonals)


def trigamma_bounds(x):
    """Lower and upper bounds ``((2x+1)/(2x^2), (x+1)/x^2)`` on ``sum_q 1/(q+x)^2``."""
    if x <= 0:
        raise ValueError("trigamma bounds need x > 0")
    return (2 * x + 1) / (2 * x * x), (x + 1) / (x * x)


def trigamma_partial_sum(x, n_terms=10**6 + 1):
    """``sum_{q=0}^{n_terms-1} 1/(q+x)^2``."""
    q = np.arange(n_terms, dtype=float)
    return float(np.sum(1.0 / (q + x) ** 2))


def hs_norm(op, coeffs):
    """Hilbert-Schmidt norm of the truncated data with a rigorous tail bound.

    For ``m n > 0`` with ``L = max(|m|, |n|)`` we have ``|j| + v + k + 1 = L + k``,
    so with ``p <= 1`` and Cauchy-Schwarz over the stored ``k`` of diagonal ``j``

        |T[m, m+j]|^2 <= (1/pi) S_j sum_k (|j|+2k+1) / (L+k)^2,  S_j = sum_k |c[j,k]|^2.

    Each ``L > M`` is hit by at most two cells per diagonal, and the sum over
    ``L`` is closed with the upper trigamma bound.
    """
    truncated = op.frobenius_norm()
    tail_sq = 0.0
    for j in coeffs.angular_frequencies():
        profile = coeffs.radial_profile(j)
        s_j = float(np.sum(np.abs(profile) ** 2))
        if s_j == 0.0:
            continue
        majorant = 0.0
        for k in np.nonzero(profile)[0]:
            _, upper = trigamma_bounds(op.M + 1 + k)
            majorant += (abs(j) + 2 * k + 1) * upper
        tail_sq += 2.0 / pi * s_j * majorant
    return HsNormResult(truncated, sqrt(tail_sq))


def hs_inner(a, b):
    """``<A, B>_HS = sum A[m,n] conj(B[m,n])`` over stored cells."""
    total = 0j
    for j, (ms, values) in a.diagonals.items():
        other = b.diagonals.get(j)
        if other is None:
            continue
        common, ia, ib = np.intersect1d(ms, other[0], return_indices=True)
        total += np.sum(values[ia] * np.conj(other[1][ib]))
    return complex(total)


def adjoint_apply(G, K, J):
    """Adjoint data-to-perturbation map, projected onto ``k <= K``, ``|j| <= J``.

    Uses ``conj(grad u_m) . grad u_n = (1/pi) r^{|j| + 2v} e^{i j theta}`` with
    ``j = n - m`` and expands the monomial in radial Zernike polynomials.
    """
    out = np.zeros((K + 1, 2 * J + 1), dtype=complex)
    for (m, n), value in G.items():
        if m * n <= 0 or value == 0:
            continue
        j = n - m
        if abs(j) > J:
            continue
        expansion = monomial_coeffs(abs(j), v_index(m, n))
        for s, d in enumerate(expansion.d[: K + 1]):
            out[s, j + J] -= value * d / sqrt(pi * (abs(j) + 2 * s + 1))
    return ZernikeCoeffs.from_array(out, J=J)
