"""Finite von Neumann algebras with a faithful normal trace.

Two concrete realisations are supported:

* ``commutative``: functions on ``n`` points, stored as complex vectors of
  shape ``(n,)``, with trace ``sum(weights * x)``.
* ``matrix``: complex ``n x n`` matrices with the normalised trace
  ``Tr(x) / n``.

Elements are plain numpy arrays. Most helpers accept a leading batch axis
so that many elements (one per time node, say) can be handled at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class PositivityWitness:
    """Smallest entry (commutative) or eigenvalue (matrix) of an element."""

    value: float
    tolerance: float
    kind: str

    @property
    def positive(self) -> bool:
        return self.value >= -self.tolerance


@dataclass(frozen=True, eq=False)
class AlgebraContext:
    kind: str
    size: int
    weights: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def commutative(cls, weights) -> "AlgebraContext":
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or np.any(w <= 0):
            raise ValueError("weights must be a positive vector")
        return cls("commutative", w.size, w)

    @classmethod
    def matrix(cls, n: int) -> "AlgebraContext":
        return cls("matrix", int(n), None)

    @property
    def is_commutative(self) -> bool:
        return self.kind == "commutative"

    @property
    def element_shape(self) -> tuple:
        return (self.size,) if self.is_commutative else (self.size, self.size)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum()) if self.is_commutative else 1.0

    def check(self, x) -> np.ndarray:
        x = np.asarray(x)
        k = len(self.element_shape)
        if x.shape[x.ndim - k:] != self.element_shape:
            raise ShapeMismatch(f"expected trailing shape {self.element_shape}, got {x.shape}")
        return x

    def identity(self) -> np.ndarray:
        if self.is_commutative:
            return np.ones(self.size, dtype=complex)
        return np.eye(self.size, dtype=complex)

    def trace(self, x):
        x = self.check(x)
        if self.is_commutative:
            return x @ self.weights
        return np.trace(x, axis1=-2, axis2=-1) / self.size

    def adjoint(self, x):
        x = self.check(x)
        if self.is_commutative:
            return np.conj(x)
        return np.conj(np.swapaxes(x, -1, -2))

    def mul(self, x, y):
        x, y = self.check(x), self.check(y)
        return x * y if self.is_commutative else x @ y

    def abs2(self, x):
        """|x|^2 = x* x, returned as a self-adjoint element."""
        x = self.check(x)
        if self.is_commutative:
            return (np.abs(x) ** 2).astype(complex)
        return self.hermitian_part(self.adjoint(x) @ x)

    def hermitian_part(self, x):
        x = self.check(x)
        if self.is_commutative:
            return np.real(x).astype(complex)
        return 0.5 * (x + np.conj(np.swapaxes(x, -1, -2)))

    def asymmetry(self, x) -> float:
        x = self.check(x)
        if self.is_commutative:
            return float(np.max(np.abs(np.imag(x)), initial=0.0))
        return float(np.max(np.abs(x - np.conj(np.swapaxes(x, -1, -2))), initial=0.0))

    def functional_calculus(self, x, fn):
        """Apply ``fn`` to the spectrum of a self-adjoint element."""
        x = self.check(x)
        if self.is_commutative:
            return fn(np.real(x)).astype(complex)
        w, v = np.linalg.eigh(self.hermitian_part(x))
        return (v * fn(w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))

    def sqrt_pos(self, x):
        """Positive square root, clipping the spectrum at zero."""
        return self.functional_calculus(x, lambda w: np.sqrt(np.clip(w, 0.0, None)))

    def power_pos(self, x, p: float):
        return self.functional_calculus(x, lambda w: np.clip(w, 0.0, None) ** p)

    def modulus(self, x):
        return self.sqrt_pos(self.abs2(x))

    def spectrum(self, x) -> np.ndarray:
        """Eigenvalues of the self-adjoint part (entries when commutative)."""
        x = self.check(x)
        if self.is_commutative:
            return np.real(x)
        return np.linalg.eigvalsh(self.hermitian_part(x))

    def min_witness(self, x) -> float:
        return float(np.min(self.spectrum(x)))

    def is_positive(self, x, tol: float = 1e-10, sym_tol: float = 1e-8) -> PositivityWitness:
        asym = self.asymmetry(x)
        if asym > sym_tol:
            raise ValueError(f"element is not self-adjoint (asymmetry {asym:.3e})")
        kind = "minEntry" if self.is_commutative else "minEigenvalue"
        return PositivityWitness(self.min_witness(x), tol, kind)

    def sup_norm(self, x):
        """Operator norm, batched over leading axes."""
        x = self.check(x)
        if self.is_commutative:
            return np.max(np.abs(x), axis=-1)
        return np.linalg.norm(x, ord=2, axis=(-2, -1))

    def lp_norm(self, x, p: float) -> float:
        """(tau |x|^p)^(1/p); a quasi-norm for p < 1."""
        if p <= 0:
            raise ValueError("p must be positive")
        if np.isinf(p):
            return float(self.sup_norm(x))
        x = self.check(x)
        if self.is_commutative:
            total = float(np.sum(self.weights * np.abs(x) ** p))
        else:
            total = float(np.sum(np.linalg.svd(x, compute_uv=False) ** p)) / self.size
        return total ** (1.0 / p)

    def inner(self, x, y):
        """tau(x y*)."""
        return self.trace(self.mul(x, self.adjoint(y)))

    # random elements -------------------------------------------------
    def random_element(self, rng: np.random.Generator, scale: float = 1.0):
        shape = self.element_shape
        z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return scale * z / np.sqrt(2.0)

    def random_self_adjoint(self, rng: np.random.Generator):
        return self.hermitian_part(self.random_element(rng))

    def random_positive(self, rng: np.random.Generator):
        return self.abs2(self.random_element(rng))

    def point_masses(self) -> list:
        """Positive elements with trace one concentrated at a single atom.

        For matrices these are the basis projectors, rescaled.
        """
        out = []
        for i in range(self.size):
            if self.is_commutative:
                e = np.zeros(self.size, dtype=complex)
                e[i] = 1.0 / self.weights[i]
            else:
                e = np.zeros((self.size, self.size), dtype=complex)
                e[i, i] = self.size
            out.append(e)
        return out

    def projector(self, vec) -> np.ndarray:
        """Trace-one density built from a vector (matrix case only)."""
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return self.size * np.outer(v, np.conj(v))
