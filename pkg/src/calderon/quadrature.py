"""Tensor-product polar quadrature on the closed unit disk."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class QuadratureGrid:
    """Gauss-Legendre in ``r`` on [0, 1] times the periodic trapezoid rule in ``theta``.

    ``radial_weights`` already include the Jacobian factor ``r``, so that

        integral over D of f  ~=  sum_ij radial_weights[i] * angular_weights[j] * f(r_i, theta_j)

    The angular rule integrates ``exp(i l theta)`` exactly for ``|l| < n_theta``.
    """

    n_r: int = 128
    n_theta: int = 256
    r: np.ndarray = field(init=False, repr=False)
    theta: np.ndarray = field(init=False, repr=False)
    radial_weights: np.ndarray = field(init=False, repr=False)
    plain_radial_weights: np.ndarray = field(init=False, repr=False)
    angular_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_r < 2 or self.n_theta < 4:
            raise ValueError(
                f"grid needs n_r >= 2 and n_theta >= 4, got {self.n_r}x{self.n_theta}"
            )
        x, w = np.polynomial.legendre.leggauss(self.n_r)
        r = 0.5 * (x + 1.0)
        w = 0.5 * w
        theta = 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "plain_radial_weights", w)
        object.__setattr__(self, "radial_weights", w * r)
        object.__setattr__(
            self, "angular_weights", np.full(self.n_theta, 2.0 * np.pi / self.n_theta)
        )

    @property
    def shape(self):
        return (self.n_r, self.n_theta)

    def mesh(self):
        """Return ``(R, THETA)`` arrays of shape ``(n_r, n_theta)``."""
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def points(self):
        """Complex nodes ``r exp(i theta)`` with shape ``(n_r, n_theta)``."""
        R, T = self.mesh()
        return R * np.exp(1j * T)

    def weights(self):
        """Full 2-D weight array matching :meth:`mesh`."""
        return np.outer(self.radial_weights, self.angular_weights)

    def integrate(self, values):
        """Integrate samples of shape ``(n_r, n_theta)`` over the disk."""
        return np.einsum("i,j,ij->", self.radial_weights, self.angular_weights, values)


DEFAULT_GRID_SHAPE = (128, 256)


_default = None


def default_grid():
    """The shared 128 x 256 grid (immutable, safe to share)."""
    global _default
    if _default is None:
        _default = QuadratureGrid(*DEFAULT_GRID_SHAPE)
    return _default
