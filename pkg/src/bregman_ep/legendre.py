"""Built-in Legendre functions on R^d.

Each kind exposes the value, gradient and Hessian of ``f`` together with
the Fenchel conjugate ``f*`` and its gradient, so that the primal/dual
maps ``grad`` and ``grad_conj`` are mutually inverse on ``int dom f``.
All built-ins except :class:`QuadraticForm` are separable.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import xlogy

from .errors import ArgumentError, DomainError

#: Smallest coordinate accepted in the interior of the positive orthant.
POSITIVE_FLOOR = 1e-300


def as_point(x, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ArgumentError(f"{name} must be a non-empty 1-d vector, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise DomainError(f"{name} has non-finite entries")
    return x


class LegendreFunction:
    """Common interface. Subclasses implement the ``_``-free numeric methods.

    The numeric methods assume their argument is already valid; the
    checked entry points live in :mod:`bregman_ep.geometry`.
    """

    kind = None
    separable = True
    #: True when ``grad(0) == 0`` and 0 is interior, i.e. the zero anchor is usable.
    zero_interior = True

    def in_interior(self, x):
        return True

    def in_domain(self, x):
        return True

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def hessian_diag(self, x):
        """Diagonal of the Hessian (separable kinds only)."""
        raise NotImplementedError

    def hessian(self, x):
        return np.diag(self.hessian_diag(x))

    def conj(self, xs):
        raise NotImplementedError

    def grad_conj(self, xs):
        raise NotImplementedError

    def conj_hessian_diag(self, xs):
        raise NotImplementedError

    def conj_hessian(self, xs):
        return np.diag(self.conj_hessian_diag(xs))

    def to_dict(self):
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}()"


class SquaredNorm(LegendreFunction):
    """``f(x) = ||x||^2 / 2``; self-conjugate, gradient is the identity."""

    kind = "squared_norm"

    def value(self, x):
        return 0.5 * float(x @ x)

    def grad(self, x):
        return np.array(x, dtype=float)

    def hessian_diag(self, x):
        return np.ones_like(x)

    def conj(self, xs):
        return 0.5 * float(xs @ xs)

    def grad_conj(self, xs):
        return np.array(xs, dtype=float)

    def conj_hessian_diag(self, xs):
        return np.ones_like(xs)


class QuadraticForm(LegendreFunction):
    """``f(x) = x^T Q x / 2`` for symmetric positive-definite ``Q``."""

    kind = "quadratic_form"
    separable = False

    def __init__(self, Q):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ArgumentError("Q must be a square matrix")
        if not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(Q).max())):
            raise ArgumentError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        try:
            self._cho = cho_factor(Q)
        except np.linalg.LinAlgError:
            raise ArgumentError("Q must be positive definite") from None
        self.Q = Q
        self.Qinv = np.linalg.inv(Q)
        self.Qinv = 0.5 * (self.Qinv + self.Qinv.T)

    def value(self, x):
        return 0.5 * float(x @ self.Q @ x)

    def grad(self, x):
        return self.Q @ x

    def hessian(self, x):
        return self.Q

    def conj(self, xs):
        return 0.5 * float(xs @ self.grad_conj(xs))

    def grad_conj(self, xs):
        return cho_solve(self._cho, xs)

    def conj_hessian(self, xs):
        return self.Qinv

    def to_dict(self):
        return {"kind": self.kind, "Q": self.Q.tolist()}

    def __repr__(self):
        return f"QuadraticForm(Q={self.Q.tolist()})"


class PNorm(LegendreFunction):
    """Separable ``f(x) = sum |x_i|^p / p`` with ``p > 1``.

    This is the coordinatewise variant of ``||x||_p^p / p``: the gradient is
    ``sign(x) |x|^(p-1)`` and the conjugate is the same family with the
    Hölder exponent ``q = p / (p - 1)``.
    """

    kind = "p_norm"

    def __init__(self, p):
        p = float(p)
        if not p > 1.0 or not np.isfinite(p):
            raise ArgumentError(f"p must be a finite real > 1, got {p}")
        self.p = p
        self.q = p / (p - 1.0)

    def value(self, x):
        return float((np.abs(x) ** self.p).sum()) / self.p

    def grad(self, x):
        return np.sign(x) * np.abs(x) ** (self.p - 1.0)

    def hessian_diag(self, x):
        with np.errstate(divide="ignore"):
            return (self.p - 1.0) * np.abs(x) ** (self.p - 2.0)

    def conj(self, xs):
        return float((np.abs(xs) ** self.q).sum()) / self.q

    def grad_conj(self, xs):
        return np.sign(xs) * np.abs(xs) ** (self.q - 1.0)

    def conj_hessian_diag(self, xs):
        with np.errstate(divide="ignore"):
            return (self.q - 1.0) * np.abs(xs) ** (self.q - 2.0)

    def to_dict(self):
        return {"kind": self.kind, "p": self.p}

    def __repr__(self):
        return f"PNorm(p={self.p})"


class NegativeEntropy(LegendreFunction):
    """Boltzmann-Shannon entropy ``f(x) = sum x_i log x_i`` on the positive orthant.

    ``dom f`` is the closed orthant (with ``0 log 0 = 0``) while the
    gradient ``1 + log x`` exists only on the open orthant. The conjugate
    is ``f*(y) = sum exp(y_i - 1)``.
    """

    kind = "negative_entropy"
    zero_interior = False

    def in_interior(self, x):
        return bool((x > POSITIVE_FLOOR).all())

    def in_domain(self, x):
        return bool((x >= 0.0).all())

    def value(self, x):
        return float(xlogy(x, x).sum())

    def grad(self, x):
        return 1.0 + np.log(x)

    def hessian_diag(self, x):
        return 1.0 / x

    def conj(self, xs):
        return float(np.sum(np.exp(xs - 1.0)))

    def grad_conj(self, xs):
        return np.exp(xs - 1.0)

    def conj_hessian_diag(self, xs):
        return np.exp(xs - 1.0)


def from_dict(spec):
    """Build a Legendre function from its ``to_dict`` form."""
    kind = spec.get("kind")
    if kind == "squared_norm":
        return SquaredNorm()
    if kind == "quadratic_form":
        return QuadraticForm(spec["Q"])
    if kind == "p_norm":
        return PNorm(spec["p"])
    if kind == "negative_entropy":
        return NegativeEntropy()
    raise ArgumentError(f"unknown Legendre kind {kind!r}")
