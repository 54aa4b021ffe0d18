"""Symmetric Markov semigroups on finite algebras.

Every generator is held in spectral form: a set of non-negative
frequencies together with a rule for moving an element into and out of
spectral coordinates. A function ``g`` of the frequencies then acts on
elements by ``x -> g(L) x``.

* Markov generators on functions over ``n`` points are diagonalised through
  the symmetrisation ``D^(1/2) L D^(-1/2)``.
* Schur multipliers ``x -> (-psi_ij x_ij)`` on matrices are already
  diagonal: the frequency at entry ``(i, j)`` is ``psi_ij``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraContext, PositivityWitness
from .report import CheckReport, order_report, residual_report, value_report


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Operator:
    """A linear map on the algebra.

    ``form == "kernel"``: ``(Tx)_i = sum_j data[i, j] x_j`` (commutative case).
    ``form == "schur"``: ``Tx = data * x`` entrywise (matrix case).
    """

    context: AlgebraContext
    form: str
    data: np.ndarray

    def apply(self, x):
        x = self.context.check(x)
        if self.form == "kernel":
            return x @ self.data.T
        return self.data * x

    def _same(self, other):
        if not isinstance(other, Operator) or other.form != self.form:
            raise TypeError("operators of different forms")
        return other

    def __add__(self, other):
        return Operator(self.context, self.form, self.data + self._same(other).data)

    def __sub__(self, other):
        return Operator(self.context, self.form, self.data - self._same(other).data)

    def __mul__(self, c):
        return Operator(self.context, self.form, c * self.data)

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = self._same(other)
        if self.form == "kernel":
            return Operator(self.context, self.form, self.data @ other.data)
        return Operator(self.context, self.form, self.data * other.data)

    def positivity(self, tol: float = 1e-10) -> PositivityWitness:
        """Positive (resp. completely positive) iff this witness is >= 0."""
        if self.form == "kernel":
            return PositivityWitness(float(np.min(self.data)), tol, "minKernelEntry")
        sym = 0.5 * (self.data + self.data.conj().T)
        return PositivityWitness(float(np.min(np.linalg.eigvalsh(sym))), tol, "minSymbolEigenvalue")


def kernel_order_witness(diff) -> np.ndarray:
    return np.min(np.real(diff), axis=(-2, -1))


def symbol_order_witness(diff) -> np.ndarray:
    d = np.asarray(diff)
    return np.linalg.eigvalsh(0.5 * (d + np.conj(np.swapaxes(d, -1, -2))))[..., 0]


def order_constant(upper: Operator, lower: Operator, rel_floor: float = 1e-12) -> float:
    """Smallest ``c`` with ``c * upper - lower >= 0`` (in the positive / CP order)."""
    if upper.form == "kernel":
        u, l = np.real(upper.data), np.real(lower.data)
        floor = rel_floor * max(np.max(np.abs(u)), np.max(np.abs(l)), 1e-300)
        mask = u > floor
        c = np.max(l[mask] / u[mask]) if np.any(mask) else 0.0
        if np.any(~mask & (l > floor)):
            return float("inf")
        return float(c)
    u = 0.5 * (upper.data + upper.data.conj().T)
    l = 0.5 * (lower.data + lower.data.conj().T)
    w, v = np.linalg.eigh(u)
    keep = w > rel_floor * max(w.max(), 1e-300)
    if not np.any(keep):
        return float("inf")
    vk = v[:, keep] / np.sqrt(w[keep])
    red = vk.conj().T @ l @ vk
    c = float(np.max(np.linalg.eigvalsh(0.5 * (red + red.conj().T))))
    return c


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------
class Generator:
    """Generator of a symmetric Markov semigroup, in spectral form."""

    def __init__(self, context: AlgebraContext, form: str, freqs, fwd=None, inv=None,
                 matrix=None, name: str = ""):
        self.context = context
        self.form = form
        self.freqs = np.asarray(freqs, dtype=float)
        self._fwd = fwd
        self._inv = inv
        self.matrix = matrix
        self.name = name

    # construction ---------------------------------------------------------
    @classmethod
    def markov(cls, L, weights, name: str = "", tol: float = 1e-10) -> "Generator":
        L = np.asarray(L, dtype=float)
        mu = np.asarray(weights, dtype=float)
        n = mu.size
        if L.shape != (n, n):
            raise ValueError("generator and weights disagree in size")
        scale = max(1.0, np.max(np.abs(L)))
        if np.max(np.abs(L.sum(axis=1))) > tol * scale:
            raise ValueError("rows of a Markov generator must sum to zero")
        off = L - np.diag(np.diag(L))
        if np.min(off) < -tol * scale:
            raise ValueError("off-diagonal rates must be non-negative")
        if np.max(np.abs(mu[:, None] * L - (mu[:, None] * L).T)) > tol * scale:
            raise ValueError("generator is not symmetric for the given weights")
        d = np.sqrt(mu)
        sym = d[:, None] * L / d[None, :]
        sym = 0.5 * (sym + sym.T)
        ev, vec = np.linalg.eigh(sym)
        freqs = np.clip(-ev, 0.0, None)
        freqs[freqs < 1e-12 * max(1.0, freqs.max())] = 0.0
        fwd = vec.T * d[None, :]
        inv = vec / d[:, None]
        ctx = AlgebraContext.commutative(mu)
        return cls(ctx, "markov", freqs, fwd, inv, matrix=L, name=name)

    @classmethod
    def schur(cls, psi, name: str = "", tol: float = 1e-10) -> "Generator":
        psi = np.asarray(psi, dtype=float)
        n = psi.shape[0]
        if psi.shape != (n, n) or np.max(np.abs(psi - psi.T)) > tol:
            raise ValueError("Schur symbol must be a real symmetric matrix")
        if np.max(np.abs(np.diag(psi))) > tol or np.min(psi) < -tol:
            raise ValueError("Schur symbol must be non-negative with zero diagonal")
        # conditionally negative definite: -psi is PSD on vectors summing to zero
        q = np.eye(n) - 1.0 / n
        if np.min(np.linalg.eigvalsh(-q @ psi @ q)) < -1e-9 * max(1.0, np.abs(psi).max()):
            raise ValueError("Schur symbol is not conditionally negative definite")
        ctx = AlgebraContext.matrix(n)
        return cls(ctx, "schur", np.clip(psi, 0.0, None), matrix=psi, name=name)

    def subordinate(self) -> "Generator":
        """Generator of the subordinated Poisson semigroup, frequencies sqrt(lambda)."""
        return Generator(self.context, self.form, np.sqrt(self.freqs), self._fwd, self._inv,
                         matrix=None, name=f"{self.name}:poisson")

    poisson_generator = subordinate

    # spectral calculus ----------------------------------------------------
    @property
    def is_markov(self) -> bool:
        return self.form == "markov"

    def to_spectral(self, x):
        x = self.context.check(x)
        return x @ self._fwd.T if self.is_markov else x

    def from_spectral(self, c):
        return c @ self._inv.T if self.is_markov else c

    def spectral_apply(self, gvals, x):
        """Apply ``g(L)`` where ``gvals`` holds ``g`` on the spectrum.

        ``gvals`` may carry leading batch axes (one per time, say) which are
        broadcast against those of ``x``.
        """
        return self.from_spectral(np.asarray(gvals) * self.to_spectral(x))

    def operator(self, gvals) -> Operator:
        if self.is_markov:
            k = (self._inv * np.asarray(gvals)[..., None, :]) @ self._fwd
            return Operator(self.context, "kernel", np.real_if_close(k))
        return Operator(self.context, "schur", np.asarray(gvals))

    def kernels(self, gvals) -> np.ndarray:
        """Batched kernels (Markov) or symbols (Schur) of ``g(L)``."""
        g = np.asarray(gvals)
        if self.is_markov:
            return (self._inv * g[..., None, :]) @ self._fwd
        return g

    def heat_values(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-t.reshape(t.shape + (1,) * self.freqs.ndim) * self.freqs)

    def evaluate(self, t: float) -> Operator:
        if t < 0:
            raise ValueError("time must be non-negative")
        return self.operator(self.heat_values(t))

    def apply(self, t, x):
        """T_t x; ``t`` may be an array of times broadcast against batched ``x``."""
        return self.spectral_apply(self.heat_values(t), x)

    def derivative_values(self, t, order: int = 1):
        return (-self.freqs) ** order * self.heat_values(t)

    def time_derivative(self, t, x, order: int = 1):
        """d^k/dt^k T_t x, computed spectrally."""
        return self.spectral_apply(self.derivative_values(t, order), x)

    def generator_apply(self, x):
        return self.spectral_apply(-self.freqs, x)

    def ergodic_values(self):
        return (self.freqs == 0).astype(float)

    def ergodic_projection(self, x):
        """Limit of T_t x as t grows."""
        return self.spectral_apply(self.ergodic_values(), x)

    @property
    def spectral_gap(self) -> float:
        nz = self.freqs[self.freqs > 0]
        return float(nz.min()) if nz.size else 0.0

    def gamma(self, x, y):
        """Carre du champ: 2 Gamma(x, y) = L(x* y) - L(x*) y - x* L(y)."""
        ctx = self.context
        xs = ctx.adjoint(x)
        return 0.5 * (self.generator_apply(ctx.mul(xs, y)) - ctx.mul(self.generator_apply(xs), y)
                      - ctx.mul(xs, self.generator_apply(y)))


# --------------------------------------------------------------------------
# fixtures
# --------------------------------------------------------------------------
def two_point() -> Generator:
    return Generator.markov([[-1.0, 1.0], [1.0, -1.0]], [0.5, 0.5], name="TP")


def cycle(n: int) -> Generator:
    a = np.zeros((n, n))
    for i in range(n):
        a[i, (i + 1) % n] += 1.0
        a[i, (i - 1) % n] += 1.0
    return Generator.markov(a / 2 - np.eye(n), np.full(n, 1.0 / n), name=f"CYC_{n}")


def torus_gaussian(n: int, reach: int = 3) -> Generator:
    L = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            d = min(abs(i - j), n - abs(i - j))
            if 1 <= d <= reach:
                L[i, j] = np.exp(-d * d / 2.0)
    L -= np.diag(L.sum(axis=1))
    return Generator.markov(L, np.full(n, 1.0 / n), name=f"TORUS_{n}")


def schur_distance(n: int) -> Generator:
    """Schur multiplier with psi_ij = |i - j| (conditionally negative definite)."""
    idx = np.arange(n)
    return Generator.schur(np.abs(idx[:, None] - idx[None, :]).astype(float), name=f"SM_{n}")


def identity_semigroup(n: int) -> Generator:
    return Generator.markov(np.zeros((n, n)), np.full(n, 1.0 / n), name=f"ID_{n}")


_FIXTURES = {
    "TP": lambda n: two_point(),
    "CYC": cycle,
    "TORUS": torus_gaussian,
    "SM": schur_distance,
    "ID": identity_semigroup,
}


def fixture_names() -> list[str]:
    return ["TP", "CYC_<n>", "TORUS_<n>", "SM_<n>", "ID_<n>"]


def fixture(name: str) -> Generator:
    m = re.fullmatch(r"([A-Z]+)(?:_(\d+))?", name.strip().upper())
    if not m or m.group(1) not in _FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    base, n = m.group(1), m.group(2)
    if base == "TP":
        if n is not None:
            raise KeyError("TP takes no size")
        return two_point()
    if n is None:
        raise KeyError(f"fixture {base} needs a size, e.g. {base}_8")
    gen = _FIXTURES[base](int(n))
    gen.name = name.strip().upper()
    return gen


# --------------------------------------------------------------------------
# axiom and inequality checks
# --------------------------------------------------------------------------
def _order_witness_batch(gen: Generator, diff) -> np.ndarray:
    return kernel_order_witness(diff) if gen.is_markov else symbol_order_witness(diff)


def check_semigroup_axioms(gen: Generator, rng: np.random.Generator, n_samples: int = 20) -> list:
    """Semigroup law, symmetry, unitality, positivity and continuity."""
    ctx = gen.context
    fx = gen.name
    out = []
    times = np.geomspace(1e-3, 10.0, 10)
    ks = gen.kernels(gen.heat_values(times))
    err = 0.0
    for i, s in enumerate(times):
        prod = gen.kernels(gen.heat_values(s + times))
        comp = ks[i] @ ks if gen.is_markov else ks[i] * ks
        if gen.is_markov:
            err = max(err, float(np.max(np.sum(np.abs(comp - prod), axis=-1))))
        else:
            err = max(err, float(np.max(np.abs(comp - prod))))
    out.append(residual_report("semigroup-law", err, 1e-12, fixture=fx))

    sym = 0.0
    for _ in range(n_samples):
        f, g = ctx.random_element(rng), ctx.random_element(rng)
        t = float(rng.uniform(0.01, 5.0))
        a = ctx.trace(ctx.mul(gen.apply(t, f), ctx.adjoint(g)))
        b = ctx.trace(ctx.mul(f, ctx.adjoint(gen.apply(t, g))))
        nf = ctx.lp_norm(f, 2) * ctx.lp_norm(g, 2)
        sym = max(sym, abs(a - b) / nf)
    out.append(residual_report("symmetry", sym, 1e-12, fixture=fx))

    one = ctx.identity()
    unit = max(float(ctx.sup_norm(gen.apply(t, one) - one)) for t in times)
    out.append(residual_report("unital", unit, 1e-13, fixture=fx))

    pos = float(np.min(_order_witness_batch(gen, ks)))
    out.append(order_report("positivity", pos, 1e-12, fixture=fx))

    f = ctx.random_element(rng)
    dist = [ctx.lp_norm(gen.apply(t, f) - f, 2) for t in 10.0 ** -np.arange(1, 7)]
    mono = all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(dist, dist[1:]))
    out.append(CheckReport("continuity", fixture=fx, lhs=dist[-1], rhs=dist[0],
                           ratio=dist[-1] / dist[0] if dist[0] else 0.0, budget=1.0,
                           passed=bool(mono and dist[-1] <= 1e-4 * max(dist[0], 1e-300) + 1e-12)))

    ks_w = check_kadison_schwarz(gen, rng, n_samples=200)
    out.append(ks_w)
    return out


def check_kadison_schwarz(gen: Generator, rng: np.random.Generator, n_samples: int = 200,
                          tol: float = 1e-10) -> CheckReport:
    """min over samples of the witness of T_t(x* x) - (T_t x)* (T_t x)."""
    ctx = gen.context
    xs = np.stack([ctx.random_element(rng) for _ in range(n_samples)])
    ts = np.exp(rng.uniform(np.log(1e-3), np.log(10.0), n_samples))
    g = gen.heat_values(ts)
    diff = gen.spectral_apply(g, ctx.abs2(xs)) - ctx.abs2(gen.spectral_apply(g, xs))
    scale = np.max(np.abs(ctx.abs2(xs)).reshape(n_samples, -1), axis=1)
    wit = ctx.spectrum(diff).reshape(n_samples, -1).min(axis=1) / scale
    return order_report("kadison-schwarz", float(np.min(wit)), tol, fixture=gen.name,
                        notes=f"{n_samples} samples")


def check_derivative_consistency(gen: Generator, rng: np.random.Generator, n_samples: int = 20,
                                 tol: float = 1e-6) -> CheckReport:
    """Spectral time derivative against a central finite difference."""
    ctx = gen.context
    worst_rel = 0.0
    for _ in range(n_samples):
        x = ctx.random_element(rng)
        t = float(np.exp(rng.uniform(np.log(0.05), np.log(5.0))))
        h = 1e-4 * t
        fd = (gen.apply(t + h, x) - gen.apply(t - h, x)) / (2 * h)
        sp = gen.time_derivative(t, x)
        den = ctx.lp_norm(sp, 2) + 1e-12 * ctx.lp_norm(x, 2)
        worst_rel = max(worst_rel, ctx.lp_norm(fd - sp, 2) / den)
    return residual_report("time-derivative", worst_rel, tol, fixture=gen.name)


# --------------------------------------------------------------------------
# quasi-monotonicity
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class MonotonicityReport:
    direction: str
    minimal_alpha: float | None
    worst_pair: tuple
    residual: float
    window: tuple
    density: int

    @property
    def holds(self) -> bool:
        return self.minimal_alpha is not None


DIRECTIONS = ("decreasing", "increasing")


class _AlphaProblem:
    """Positivity witnesses of the quasi-monotonicity condition at a set of times."""

    def __init__(self, gen: Generator, direction: str, times):
        self.gen = gen
        self.direction = direction
        self.set_times(times)

    def set_times(self, times):
        gen = self.gen
        t = np.unique(np.asarray(times, dtype=float))
        self.times = t
        lo, hi = t[0], t[-1]
        pairs = [(a, b) for a, b in zip(t[:-1], t[1:])]
        for r in (1.01, 1.1):
            pairs += [(a, a * r) for a in t if a * r <= hi * (1 + 1e-12)]
        pairs = np.array(pairs)
        self.pairs = pairs
        self.k_lo = gen.kernels(gen.heat_values(pairs[:, 0]))
        self.k_hi = gen.kernels(gen.heat_values(pairs[:, 1]))
        self.ratio = pairs[:, 1] / pairs[:, 0]
        self.k_t = gen.kernels(gen.heat_values(t))
        self.tdk = t.reshape(-1, *(1,) * (self.k_t.ndim - 1)) * gen.kernels(gen.derivative_values(t))
        self.window = (lo, hi)

    def _w(self, diff):
        return _order_witness_batch(self.gen, diff)

    def witnesses(self, alpha: float):
        sh = (-1,) + (1,) * (self.k_lo.ndim - 1)
        fac = (self.ratio ** alpha).reshape(sh)
        if self.direction == "decreasing":
            pair_w = self._w(fac * self.k_lo - self.k_hi)
            inf_w = self._w(alpha * self.k_t - self.tdk)
        else:
            pair_w = self._w(fac * self.k_hi - self.k_lo)
            inf_w = self._w(alpha * self.k_t + self.tdk)
        return pair_w, inf_w

    def worst(self, alpha: float):
        pw, iw = self.witnesses(alpha)
        i, j = int(np.argmin(pw)), int(np.argmin(iw))
        if pw[i] <= iw[j]:
            return float(pw[i]), (float(self.pairs[i, 0]), float(self.pairs[i, 1]))
        t = float(self.times[j])
        return float(iw[j]), (t, t)

    def ok(self, alpha: float, tol: float) -> bool:
        return self.worst(alpha)[0] >= -tol

    def search(self, hi: float, tol: float, wtol: float) -> float:
        lo = 0.0
        if self.ok(0.0, wtol):
            return 0.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.ok(mid, wtol):
                hi = mid
            else:
                lo = mid
        return hi


def find_min_alpha(gen: Generator, direction: str, window=(1e-4, 1e2), density: int = 320,
                   alpha_max: float = 64.0, tol: float = 1e-4, refine: int = 64,
                   witness_tol: float = 1e-12, extra_times=None) -> MonotonicityReport:
    """Smallest alpha for which the semigroup is alpha-quasi-monotone on ``window``.

    decreasing: T_t <= (t/s)^alpha T_s for s <= t
    increasing: T_t <= (s/t)^alpha T_s for t <= s

    Finite ratios are scanned on a geometric grid together with the
    infinitesimal form of each condition at every node. After a bisection,
    the grid is refined around the binding time and the search is rerun.
    ``extra_times`` inside the window are added to the scan (for instance
    the nodes where a derived bound is later evaluated).
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    lo, hi = window
    if not (0 < lo < hi):
        raise ValueError("bad window")
    times = np.geomspace(lo, hi, density)
    if extra_times is not None:
        ex = np.asarray(extra_times, dtype=float)
        times = np.unique(np.concatenate([times, ex[(ex >= lo) & (ex <= hi)]]))
    prob = _AlphaProblem(gen, direction, times)
    if not prob.ok(alpha_max, witness_tol):
        res, pair = prob.worst(alpha_max)
        return MonotonicityReport(direction, None, pair, res, (lo, hi), density)
    alpha = prob.search(alpha_max, tol, witness_tol)
    if alpha > 0 and refine:
        probe = max(alpha - 10 * tol, 0.0)
        _, pair = prob.worst(probe)
        idx = np.searchsorted(times, pair[0])
        a = times[max(idx - 2, 0)]
        b = times[min(idx + 2, times.size - 1)]
        extra = np.geomspace(a, b, refine)
        prob.set_times(np.concatenate([times, extra]))
        alpha = prob.search(alpha_max, tol, witness_tol)
    res, pair = prob.worst(max(alpha - 1e-3, 0.0))
    return MonotonicityReport(direction, float(alpha), pair, res, (lo, hi), density)


def check_min_alpha(gen: Generator, direction: str, expected: float | None = None,
                    tol: float = 1e-3, **kw) -> CheckReport:
    rep = find_min_alpha(gen, direction, **kw)
    key = direction
    if not rep.holds:
        return CheckReport("min-alpha", fixture=gen.name, sweep_key=key, passed=expected is None,
                           notes=f"Neither (worst residual {rep.residual:.3e})")
    if expected is None:
        return CheckReport("min-alpha", fixture=gen.name, sweep_key=key, lhs=rep.minimal_alpha,
                           rhs=float("nan"), ratio=float("nan"), passed=True,
                           notes=f"binding pair {rep.worst_pair}")
    return value_report("min-alpha", rep.minimal_alpha, expected, tol, fixture=gen.name,
                        sweep_key=key)


def operator_order(a: Operator, b: Operator, tol: float = 1e-10) -> PositivityWitness:
    """Witness of ``a <= b`` as positive (commutative) or CP (Schur) maps."""
    return (b - a).positivity(tol)
