"""Hilbert-Schmidt upper bounds and Lipschitz lower bounds on ``W_K`` / ``A_K``."""

import csv
import io
from dataclasses import asdict, dataclass
from math import comb, pi, sqrt

import numpy as np

from calderon.forward import HsNormResult, assemble, hs_norm
from calderon.zernike import ZernikeCoeffs, l2_norm

__all__ = [
    "StabilityReport",
    "harmonic_number",
    "upper_bound_constant",
    "lipschitz_constant",
    "psi_lower_bound",
    "PsiLowerBound",
    "is_in_A_K",
    "verify",
    "random_W_K",
    "random_A_K",
    "REPORT_FIELDS",
    "reports_to_csv",
]


def harmonic_number(K):
    """``H_K = 1 + 1/2 + ... + 1/K`` with ``H_0 = 0``."""
    if K < 0:
        raise ValueError("K must be non-negative")
    return sum(1.0 / k for k in range(1, K + 1))


def upper_bound_constant(K):
    """``(2/sqrt(pi)) sqrt(2K + H_K + 4)``: bound on ``||F eta||_HS / ||eta||`` over ``W_K``."""
    if K < 0:
        raise ValueError("K must be non-negative")
    return 2.0 / sqrt(pi) * sqrt(2 * K + harmonic_number(K) + 4)


def lipschitz_constant(K):
    """``sqrt(2 pi) C(2K, K)``, improved to ``sqrt(pi)`` for ``K = 0``."""
    if K < 0:
        raise ValueError("K must be non-negative")
    if K == 0:
        return sqrt(pi)
    return sqrt(2 * pi) * comb(2 * K, K)


@dataclass(frozen=True)
class PsiLowerBound:
    """Lower bounds on ``||F psi[j, k]||_HS^2`` valid for every ``j``."""

    k: int
    general: float
    improved: float  # equals ``general`` unless k == 0

    def __float__(self):
        return self.general


def psi_lower_bound(k):
    if k < 0:
        raise ValueError("k must be non-negative")
    general = 1.0 / (2 * pi * comb(2 * k, k) ** 2)
    return PsiLowerBound(k, general, 1.0 / pi if k == 0 else general)


def is_in_A_K(coeffs, tol=None):
    """``Re(c[j,k] conj(c[j,k'])) >= -tol`` for all ``j`` and ``k, k' <= K``.

    The default ``tol`` is ``1e-12 * max|c|^2``.
    """
    if tol is None:
        peak = max((abs(c) for c in coeffs.values()), default=0.0)
        tol = 1e-12 * peak**2
    for j in coeffs.angular_frequencies():
        profile = coeffs.radial_profile(j)
        gram = np.real(np.outer(profile, np.conj(profile)))
        if np.any(gram < -tol):
            return False
    return True


@dataclass(frozen=True)
class StabilityReport:
    K: int
    M: int
    l2_norm: float
    hs: HsNormResult
    upper_constant: float
    lipschitz_constant: float
    in_A_K: bool
    upper_satisfied: bool
    lower_satisfied: bool
    lower_satisfied_upper_end: bool

    @property
    def lipschitz_ratio(self):
        """``||eta|| / ||F eta||_HS`` using the truncated (lower) HS value."""
        if self.hs.truncated_norm == 0:
            return 0.0 if self.l2_norm == 0 else float("inf")
        return self.l2_norm / self.hs.truncated_norm

    def to_dict(self):
        out = asdict(self)
        out["hs"] = {
            "truncated_norm": self.hs.truncated_norm,
            "tail_bound": self.hs.tail_bound,
            "certified_interval": list(self.hs.certified_interval),
        }
        return out

    def csv_row(self):
        return [
            self.K,
            self.M,
            self.l2_norm,
            self.hs.truncated_norm,
            self.hs.upper,
            self.upper_constant,
            self.lipschitz_constant,
            self.in_A_K,
            self.upper_satisfied,
            self.lower_satisfied,
        ]


REPORT_FIELDS = [
    "K",
    "M",
    "l2_norm",
    "hs_lower",
    "hs_upper",
    "upper_constant",
    "lipschitz_constant",
    "in_A_K",
    "upper_satisfied",
    "lower_satisfied",
]


def verify(coeffs, M=64, tol=None):
    """Assemble the data and check both stability bounds against certified HS ends.

    ``upper_satisfied`` tests the certified upper end against the ``W_K`` bound;
    ``lower_satisfied`` tests ``||eta|| <= C_K * (certified lower end)``, which
    implies the same with the upper end (reported separately). The lower bound
    is only guaranteed on ``A_K``; outside it the verdict is informational.
    """
    K = coeffs.K
    op = assemble(coeffs, M)
    hs = hs_norm(op, coeffs)
    norm = l2_norm(coeffs)
    upper_c = upper_bound_constant(K)
    lip_c = lipschitz_constant(K)
    slack = 1e-12 * max(norm, 1.0)
    return StabilityReport(
        K=K,
        M=M,
        l2_norm=norm,
        hs=hs,
        upper_constant=upper_c,
        lipschitz_constant=lip_c,
        in_A_K=is_in_A_K(coeffs, tol),
        upper_satisfied=hs.upper <= upper_c * norm + slack,
        lower_satisfied=norm <= lip_c * hs.truncated_norm + slack,
        lower_satisfied_upper_end=norm <= lip_c * hs.upper + slack,
    )


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for report in reports:
        writer.writerow(
            [format(v, ".17g") if isinstance(v, float) else v for v in report.csv_row()]
        )
    return buf.getvalue()


def random_W_K(rng, K, J):
    """Standard complex Gaussian coefficients on ``k <= K``, ``|j| <= J``."""
    shape = (K + 1, 2 * J + 1)
    array = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / sqrt(2)
    return ZernikeCoeffs.from_array(array, J=J)


def random_A_K(rng, K, J):
    """One unit phase per ``j`` times nonnegative magnitudes per ``(j, k)``."""
    phases = np.exp(2j * pi * rng.random(2 * J + 1))
    magnitudes = np.abs(rng.standard_normal((K + 1, 2 * J + 1)))
    return ZernikeCoeffs.from_array(magnitudes * phases[None, :], J=J)
