"""Transfer between the unit disk and explicitly mapped simply connected domains.

``Phi`` maps the closed disk onto the closure of the domain; ``Psi`` is its
inverse. Only map families with closed-form ``Phi``, ``Phi'`` and a parameter
condition that guarantees univalence are supported:

* ``identity``
* ``moebius``: ``Phi(w) = e^{i phi} (w - a) / (1 - conj(a) w)``, ``|a| < 1``
* ``quadratic``: ``Phi(w) = c1 w + c2 w^2``, ``c1 != 0``, ``|c2 / c1| < 1/2``

Every domain-side integral is evaluated by substituting back to the disk.
"""

import csv
import io
from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
from scipy.optimize import minimize_scalar

from calderon.forward import entry_quadrature_oracle
from calderon.quadrature import default_grid
from calderon.zernike import evaluate, project_function, sample_on_grid

__all__ = [
    "ConformalMapSpec",
    "TransferConstants",
    "BoundarySamples",
    "map_eval",
    "map_derivative",
    "boundary_constants",
    "transform_neumann",
    "pull_back",
    "push_forward",
    "invariance_check",
    "domain_data_matrix",
    "domain_l2_norm",
    "boundary_l2_norm",
    "boundary_weight_matrix",
    "domain_hs_norm",
    "boundary_table_csv",
]

KINDS = ("identity", "moebius", "quadratic")


@dataclass(frozen=True)
class ConformalMapSpec:
    kind: str = "identity"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}; expected one of {KINDS}")
        p = dict(self.params)
        if self.kind == "moebius":
            a = complex(p.get("a", 0.0))
            if not abs(a) < 1:
                raise ValueError(f"moebius parameter needs |a| < 1, got |a|={abs(a)}")
            p = {"a": a, "phi": float(p.get("phi", 0.0))}
        elif self.kind == "quadratic":
            c1 = complex(p.get("c1", 1.0))
            c2 = complex(p.get("c2", 0.0))
            if c1 == 0:
                raise ValueError("quadratic map needs c1 != 0")
            if not abs(c2 / c1) < 0.5:
                raise ValueError(f"quadratic map needs |c2/c1| < 1/2, got {abs(c2 / c1)}")
            p = {"c1": c1, "c2": c2}
        elif p:
            raise ValueError("identity map takes no parameters")
        object.__setattr__(self, "params", p)

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def moebius(cls, a, phi=0.0):
        return cls("moebius", {"a": a, "phi": phi})

    @classmethod
    def quadratic(cls, c1, c2):
        return cls("quadratic", {"c1": c1, "c2": c2})

    def phi(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "identity":
            return w.copy()
        if self.kind == "moebius":
            a, rot = self.params["a"], np.exp(1j * self.params["phi"])
            return rot * (w - a) / (1 - np.conj(a) * w)
        c1, c2 = self.params["c1"], self.params["c2"]
        return c1 * w + c2 * w * w

    def dphi(self, w):
        w = np.asarray(w, dtype=complex)
        if self.kind == "identity":
            return np.ones_like(w)
        if self.kind == "moebius":
            a, rot = self.params["a"], np.exp(1j * self.params["phi"])
            return rot * (1 - abs(a) ** 2) / (1 - np.conj(a) * w) ** 2
        c1, c2 = self.params["c1"], self.params["c2"]
        return c1 + 2 * c2 * w

    def psi(self, z):
        """Inverse map ``Psi = Phi^{-1}`` on the closed domain."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "identity":
            return z.copy()
        if self.kind == "moebius":
            a, rot = self.params["a"], np.exp(1j * self.params["phi"])
            zeta = z / rot
            return (zeta + a) / (1 + np.conj(a) * zeta)
        c1, c2 = self.params["c1"], self.params["c2"]
        if c2 == 0:
            return z / c1
        disc = np.sqrt(c1 * c1 + 4 * c2 * z)
        r1 = (-c1 + disc) / (2 * c2)
        r2 = (-c1 - disc) / (2 * c2)
        # the other root has modulus >= |c1/c2| - 1 > 1
        return np.where(np.abs(r1) <= np.abs(r2), r1, r2)

    def dpsi(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "identity":
            return np.ones_like(z)
        if self.kind == "moebius":
            a, rot = self.params["a"], np.exp(1j * self.params["phi"])
            zeta = z / rot
            return (1 - abs(a) ** 2) / (rot * (1 + np.conj(a) * zeta) ** 2)
        return 1.0 / self.dphi(self.psi(z))

    def to_dict(self):
        params = {}
        for key, value in self.params.items():
            if isinstance(value, complex):
                params[key] = {"re": value.real, "im": value.imag}
            else:
                params[key] = value
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, data):
        params = {}
        for key, value in dict(data.get("params", {})).items():
            if isinstance(value, dict):
                value = complex(value.get("re", 0.0), value.get("im", 0.0))
            elif isinstance(value, (list, tuple)):
                value = complex(value[0], value[1])
            params[key] = value
        return cls(data["kind"], params)


def map_eval(spec, w):
    _check_closed_disk(w)
    return spec.phi(w)


def map_derivative(spec, w):
    _check_closed_disk(w)
    return spec.dphi(w)


def _check_closed_disk(w, slack=1e-12):
    if np.any(np.abs(np.asarray(w)) > 1 + slack):
        raise ValueError("map evaluation needs |w| <= 1")


@dataclass(frozen=True)
class TransferConstants:
    min_boundary_deriv: float
    max_boundary_deriv: float

    @property
    def max_psi_deriv(self):
        """``max |Psi'|`` on the domain boundary."""
        return 1.0 / self.min_boundary_deriv

    @property
    def min_psi_deriv(self):
        return 1.0 / self.max_boundary_deriv

    @property
    def corollary_constant(self):
        """Bound ``sqrt(pi) max|Psi'| / min|Psi'|`` on the harmonic Lipschitz constant."""
        return sqrt(pi) * self.max_psi_deriv / self.min_psi_deriv

    def to_dict(self):
        return {
            "min_boundary_deriv": self.min_boundary_deriv,
            "max_boundary_deriv": self.max_boundary_deriv,
            "corollary_constant": self.corollary_constant,
        }


def boundary_constants(spec, n_samples=256):
    """Extremes of ``|Phi'|`` on the unit circle, refined by bounded Brent search."""
    if n_samples < 64:
        raise ValueError("boundary_constants needs n_samples >= 64")
    theta = 2 * pi * np.arange(n_samples) / n_samples
    mod = np.abs(spec.dphi(np.exp(1j * theta)))
    step = 2 * pi / n_samples

    def refine(index, sign):
        def objective(t):
            return sign * abs(complex(spec.dphi(np.exp(1j * t))))

        t0 = theta[index]
        res = minimize_scalar(
            objective, bounds=(t0 - step, t0 + step), method="bounded", options={"xatol": 1e-13}
        )
        return sign * min(objective(t0), res.fun)

    lo = refine(int(np.argmin(mod)), 1.0)
    hi = refine(int(np.argmax(mod)), -1.0)
    return TransferConstants(float(lo), float(hi))


@dataclass(frozen=True)
class BoundarySamples:
    theta: np.ndarray
    points: np.ndarray
    values: np.ndarray
    arc_weights: np.ndarray  # |Phi'(e^{i theta})| * d theta


def transform_neumann(m, spec, boundary_samples=512):
    """Samples of ``f_hat_m = |Psi'| (f_m o Psi)`` at ``Phi(e^{i theta_l})``."""
    if m == 0:
        raise ValueError("Fourier mode must be nonzero")
    theta = 2 * pi * np.arange(boundary_samples) / boundary_samples
    w = np.exp(1j * theta)
    dmod = np.abs(spec.dphi(w))
    values = np.exp(1j * m * theta) / sqrt(2 * pi) / dmod
    return BoundarySamples(theta, spec.phi(w), values, dmod * (2 * pi / boundary_samples))


def boundary_l2_norm(samples):
    """``||f||_{L2(boundary)}`` from :class:`BoundarySamples` (arc-length rule)."""
    return float(np.sqrt(np.sum(np.abs(samples.values) ** 2 * samples.arc_weights)))


def pull_back(coeffs_on_disk, spec, slack=1e-10):
    """``eta = eta_tilde o Psi`` as a callable on domain points."""

    def eta(z):
        w = spec.psi(z)
        r = np.abs(w)
        if np.any(r > 1 + slack):
            raise ValueError("point outside the mapped domain")
        w = np.where(r > 1, w / np.maximum(r, 1.0), w)
        return evaluate(coeffs_on_disk, w)

    return eta


def push_forward(f, spec, K, J, grid=None):
    """Zernike coefficients of ``f o Phi`` and the L2(D) norm of what was cut off."""
    grid = grid or default_grid()

    def on_disk(w):
        return f(spec.phi(w))

    coeffs = project_function(on_disk, K, J, grid)
    residual = on_disk(grid.points()) - sample_on_grid(coeffs, grid)
    return coeffs, float(np.sqrt(abs(grid.integrate(np.abs(residual) ** 2))))


def _domain_gradient(m, spec, z):
    """Cartesian gradient ``(d_x, d_y)`` of ``u_m o Psi`` at domain points ``z``."""
    w = spec.psi(z)
    dpsi = spec.dpsi(z)
    a = abs(m)
    h = w ** (a - 1) * dpsi / sqrt(2 * pi)
    if m > 0:
        return h, 1j * h
    hc = np.conj(h)
    return hc, -1j * hc


def domain_data_matrix(coeffs_on_disk, spec, N, grid=None):
    """``<(F eta) f_hat_m, f_hat_n>`` on the domain for ``1 <= |m|, |n| <= N``.

    The domain integral ``-int eta grad U_m . conj(grad U_n)`` is pulled back to
    the disk with the area Jacobian ``|Phi'|^2``; ``eta`` is evaluated through
    :func:`pull_back` and the gradients by the chain rule through ``Psi``.
    Returns a dense array indexed ``[m, n]`` over modes ``-N..-1, 1..N``.
    """
    grid = grid or default_grid()
    w = grid.points()
    z = spec.phi(w)
    jac = np.abs(spec.dphi(w)) ** 2
    eta = pull_back(coeffs_on_disk, spec)(z)
    weight = grid.weights() * jac * eta
    modes = [m for m in range(-N, N + 1) if m != 0]
    gx = np.stack([_domain_gradient(m, spec, z)[0].ravel() for m in modes])
    gy = np.stack([_domain_gradient(m, spec, z)[1].ravel() for m in modes])
    wf = weight.ravel()
    data = -((gx * wf) @ np.conj(gx).T + (gy * wf) @ np.conj(gy).T)
    signs = np.sign(modes)
    data[np.outer(signs, signs) < 0] = 0
    return data, modes


def invariance_check(coeffs, spec, m, n, grid=None):
    """Same data cell computed on the disk and on the domain.

    Returns ``(disk_value, domain_value)``; conformal invariance says they agree.
    """
    if m * n == 0:
        raise ValueError("modes must be nonzero")
    grid = grid or default_grid()
    disk = entry_quadrature_oracle(coeffs, m, n, grid)
    if m * n < 0:
        # holomorphic against antiholomorphic gradient: the integrand vanishes identically
        return disk, 0j
    w = grid.points()
    z = spec.phi(w)
    eta = pull_back(coeffs, spec)(z)
    gxm, gym = _domain_gradient(m, spec, z)
    gxn, gyn = _domain_gradient(n, spec, z)
    integrand = eta * (gxm * np.conj(gxn) + gym * np.conj(gyn)) * np.abs(spec.dphi(w)) ** 2
    return disk, complex(-grid.integrate(integrand))


def domain_l2_norm(f, spec, grid=None):
    """``||f||_{L2(domain)}`` for a callable ``f`` on domain points."""
    grid = grid or default_grid()
    w = grid.points()
    values = np.abs(f(spec.phi(w))) ** 2 * np.abs(spec.dphi(w)) ** 2
    return float(np.sqrt(grid.integrate(values).real))


def boundary_weight_matrix(spec, N, n_samples=2048):
    """Matrix of ``S S*`` in the ``f_m`` basis, ``|m| <= N``.

    ``S e = |Phi'| (e o Phi)`` carries zero-mean boundary data from the domain to
    the circle; ``S S* g = |Phi'| (g - mean_arc(g))``. With the Fourier
    coefficients ``a_l`` of ``|Phi'|``, entry ``[n, m] = a_{n-m} - a_{-m} a_n / a_0``.
    """
    theta = 2 * pi * np.arange(n_samples) / n_samples
    dmod = np.abs(spec.dphi(np.exp(1j * theta)))
    a = np.fft.fft(dmod) / n_samples  # a[l] = mean(|Phi'| e^{-i l theta})
    modes = [m for m in range(-N, N + 1) if m != 0]
    Q = np.empty((len(modes), len(modes)), dtype=complex)
    for row, nn in enumerate(modes):
        for col, mm in enumerate(modes):
            Q[row, col] = a[(nn - mm) % n_samples] - a[(-mm) % n_samples] * a[nn % n_samples] / a[0]
    return Q, modes


def domain_hs_norm(data, spec, N, n_samples=2048):
    """HS norm on the domain boundary of data given in the ``f_hat_m`` basis.

    ``data[m, n] = <(F eta) f_hat_m, f_hat_n>`` for ``|m|, |n| <= N`` (as from
    :func:`domain_data_matrix`). The ``f_hat_m`` are not orthonormal in plain
    L2 of the boundary; with ``Q = S S*`` an orthonormal basis is
    ``S* Q^{-1/2} f_i``, in which the data matrix is ``Q^{1/2} T Q^{1/2}``.
    """
    Q, _ = boundary_weight_matrix(spec, N, n_samples)
    evals, evecs = np.linalg.eigh(Q)
    root = (evecs * np.sqrt(np.clip(evals, 0, None))) @ evecs.conj().T
    operator = np.asarray(data).T  # operator[n, m] = T[m, n]
    return float(np.linalg.norm(root @ operator @ root))


def boundary_table_csv(spec, n_samples=256):
    """CSV rows ``theta, Re Phi, Im Phi, |Phi'|`` on the unit circle."""
    theta = 2 * pi * np.arange(n_samples) / n_samples
    w = np.exp(1j * theta)
    z = spec.phi(w)
    d = np.abs(spec.dphi(w))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "re_phi", "im_phi", "abs_dphi"])
    for row in zip(theta, z.real, z.imag, d):
        writer.writerow([format(float(v), ".17g") for v in row])
    return buf.getvalue()
