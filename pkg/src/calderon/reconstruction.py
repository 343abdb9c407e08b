"""Layer-by-layer exact inversion of the disk data, and injectivity witnesses.

Layer ``k`` (the coefficients ``c[j, k]`` for all ``j``) is read off the single
cell ``T[s(k+1), s(|j|+k+1)]`` with ``s = sgn(j)`` (``sgn(0) = 1``), after
removing the contribution of the already recovered layers ``0..k-1``. Only the
Neumann modes ``+-1, ..., +-(K+1)`` are ever probed.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, pi, sqrt

import numpy as np
from numpy.polynomial import legendre
from scipy.special import eval_jacobi

from calderon.zernike import ZernikeCoeffs, radial_coefficients

__all__ = [
    "ReconstructionRequest",
    "WitnessResult",
    "InsufficientTruncationError",
    "NoWitnessError",
    "sgn",
    "required_modes",
    "probe_cell",
    "amplification_factor",
    "recover_layer",
    "reconstruct",
    "injectivity_witness",
    "radial_moment",
    "monomial_residual",
    "dense_monomial_check",
]


class InsufficientTruncationError(ValueError):
    """A required data cell lies outside ``|m|, |n| <= M``."""


class NoWitnessError(ValueError):
    """No nonzero data cell could be certified for the given perturbation."""


def sgn(j):
    """Sign with the convention ``sgn(0) = 1``."""
    return -1 if j < 0 else 1


@dataclass(frozen=True)
class ReconstructionRequest:
    data: object
    K: int
    J: int

    def __post_init__(self):
        if self.K < 0 or self.J < 0:
            raise ValueError("K and J must be non-negative")
        if self.data.M < self.J + self.K + 1:
            raise InsufficientTruncationError(
                f"data truncated at M={self.data.M}, need M >= J + K + 1 = {self.J + self.K + 1}"
            )


@dataclass(frozen=True)
class WitnessResult:
    m: int
    n: int
    value: complex
    n0: int
    j: int


def required_modes(K):
    """The ``2K + 2`` Neumann modes ``+-1, ..., +-(K+1)`` used up to layer ``K``."""
    if K < 0:
        raise ValueError("K must be non-negative")
    return [-m for m in range(K + 1, 0, -1)] + list(range(1, K + 2))


def probe_cell(j, k):
    """Data cell ``(m, n)`` that determines ``c[j, k]``."""
    s = sgn(j)
    return s * (k + 1), s * (abs(j) + k + 1)


def _exact_binom(n, k):
    value = comb(n, k)
    if value >= 2**53:
        raise OverflowError(f"binomial C({n}, {k}) not exactly representable")
    return float(value)


def amplification_factor(j, k):
    """Gain ``sqrt(pi(|j|+2k+1)) C(|j|+2k, k)`` from a data error to ``c[j, k]``."""
    return sqrt(pi * (abs(j) + 2 * k + 1)) * _exact_binom(abs(j) + 2 * k, k)


def recover_layer(data, prior, k, J):
    """Coefficients ``{j: c[j, k]}`` for ``|j| <= J`` given layers ``< k`` in ``prior``."""
    if data.M < J + k + 1:
        raise InsufficientTruncationError(
            f"layer {k} with |j| <= {J} needs M >= {J + k + 1}, data has M={data.M}"
        )
    layer = {}
    for j in range(-J, J + 1):
        a = abs(j)
        m, n = probe_cell(j, k)
        value = -amplification_factor(j, k) * data.entry(m, n)
        for q in range(k):
            c = prior.get((j, q))
            if c != 0:
                value -= (
                    c
                    * sqrt((a + 2 * k + 1) * (a + 2 * q + 1))
                    / (a + k + q + 1)
                    * _exact_binom(a + 2 * k, k - q)
                )
        layer[j] = complex(value)
    return layer


def reconstruct(req):
    """Recover all ``c[j, k]`` with ``k <= K``, ``|j| <= J``; layers run in order."""
    entries = {}
    for k in range(req.K + 1):
        prior = ZernikeCoeffs(entries, K=max(k - 1, 0), J=req.J)
        for j, c in recover_layer(req.data, prior, k, req.J).items():
            entries[(j, k)] = c
    return ZernikeCoeffs(entries, K=req.K, J=req.J)


def radial_moment(coeffs, j, n0):
    """``int_0^1 rho_j(r) r^{n0+1} dr`` in closed form.

    ``rho_j`` is the radial part of ``eta`` against ``f_j = e^{i j theta}/sqrt(2 pi)``:
    ``rho_j = sqrt(2) sum_k c[j, k] sqrt(|j|+2k+1) R^{|j|}_{|j|+2k}``.
    """
    total = 0j
    for k in range(coeffs.K + 1):
        c = coeffs.get((j, k))
        if c == 0:
            continue
        moment = sum(
            Fraction(coef, power + n0 + 2) for power, coef in radial_coefficients(abs(j), k)
        )
        total += c * sqrt(2 * (abs(j) + 2 * k + 1)) * float(moment)
    return total


def injectivity_witness(coeffs, max_n0=200, rel_tol=1e-12):
    """A data cell ``(m, n)`` with ``T[m, n] != 0``, certifying ``F eta != 0``.

    Picks the angular component ``j`` with the largest energy, then scans
    exponents ``n0 = |j|, |j| + 2, ...`` (parity of ``j``) until the radial
    moment is nonzero; the cell is ``n = s(|j|+n0+2)/2``, ``m = s(n0-|j|+2)/2``.
    """
    energies = {}
    for (j, _), c in coeffs.items():
        energies[j] = energies.get(j, 0.0) + abs(c) ** 2
    energies = {j: e for j, e in energies.items() if e > 0}
    if not energies:
        raise NoWitnessError("perturbation is zero; no witness exists")
    j = max(sorted(energies, key=lambda x: (abs(x), x)), key=lambda x: energies[x])
    a = abs(j)
    scale = sqrt(energies[j])
    tried = []
    for n0 in range(a, max_n0 + 1, 2):
        moment = radial_moment(coeffs, j, n0)
        tried.append((n0, abs(moment)))
        if abs(moment) > rel_tol * scale / (n0 + 2):
            s = sgn(j)
            n = s * ((a + n0 + 2) // 2)
            m = s * ((n0 - a + 2) // 2)
            value = -sqrt(2 / pi) * moment
            return WitnessResult(m=int(m), n=int(n), value=complex(value), n0=n0, j=j)
    raise NoWitnessError(
        f"no nonzero radial moment for j={j} with n0 <= {max_n0}; last moments {tried[-3:]}"
    )


def monomial_residual(n, f_coeffs, n_terms=41, n_nodes=None):
    """L2((0,1)) distance from ``f`` to ``span{x^{n+2m} : m < n_terms}``.

    The span is ``x^n P(x^2)``; it is spanned stably by ``x^n`` times Jacobi
    polynomials in ``2x^2 - 1`` orthogonal for the induced weight, and the
    least-squares fit runs on a Gauss-Legendre rule exact for the integrands.
    Returns ``(residual, condition_number)``.
    """
    f_coeffs = np.atleast_1d(np.asarray(f_coeffs, dtype=float))
    degree = max(n + 2 * (n_terms - 1), len(f_coeffs) - 1)
    n_nodes = n_nodes or degree + 8
    t, w = legendre.leggauss(n_nodes)
    x = 0.5 * (t + 1.0)
    sw = np.sqrt(0.5 * w)
    beta = n - 0.5
    basis = np.stack(
        [x**n * eval_jacobi(i, 0.0, beta, 2 * x * x - 1.0) for i in range(n_terms)], axis=1
    )
    A = basis * sw[:, None]
    b = np.polynomial.polynomial.polyval(x, f_coeffs) * sw
    q, rmat = np.linalg.qr(A)
    residual = b - q @ (q.T @ b)
    cond = np.linalg.cond(rmat)
    return float(np.linalg.norm(residual)), float(cond)


def dense_monomial_check(n, f_coeffs, tol, n_terms=41):
    """Whether ``f`` lies within ``tol`` (L2 norm) of ``span{x^{n+2m}, m <= 40}``."""
    residual, cond = monomial_residual(n, f_coeffs, n_terms=n_terms)
    if cond > 1e12:
        raise ArithmeticError(
            f"ill-conditioned basis (cond={cond:.3e}); residual estimate {residual:.3e}"
        )
    return residual < tol
