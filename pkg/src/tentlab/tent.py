"""Tent elements on a logarithmic time grid and their norms.

A tent element is a family (f_y) sampled at the nodes of a TimeGrid. Every
integral over y is replaced by a weighted sum over the nodes, so all
inequalities are checked for a discrete measure with positive weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .algebra import AlgebraContext
from .report import CheckReport, bound_report, order_report, worst
from .semigroup import Generator


# --------------------------------------------------------------------------
# grid
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Cells [e_i, e_(i+1)] with nodes at the geometric midpoints.

    Weights use the midpoint rule in log y:
        int h dy/y ~ sum h(y_i) d_i,   int h y dy ~ sum h(y_i) y_i^2 d_i,
        int h dy ~ sum h(y_i) y_i d_i,  with d_i = log(e_(i+1)/e_i).
    """

    edges: np.ndarray

    @classmethod
    def geometric(cls, lo: float = 1e-3, hi: float = 1e3, nodes: int = 96) -> "TimeGrid":
        if not (0 < lo < hi) or nodes < 2:
            raise ValueError("need 0 < lo < hi and at least two nodes")
        return cls(np.geomspace(lo, hi, nodes + 1))

    @classmethod
    def binary(cls, per_octave: int = 5, lo_exp: int = -10, hi_exp: int = 10) -> "TimeGrid":
        """Grid whose edges are 2^(j/per_octave); every power of two is an edge."""
        j = np.arange(lo_exp * per_octave, hi_exp * per_octave + 1)
        return cls(2.0 ** (j / per_octave))

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 3 or e[0] <= 0 or np.any(np.diff(e) <= 0):
            raise ValueError("edges must be positive and strictly increasing")
        object.__setattr__(self, "edges", e)

    @property
    def size(self) -> int:
        return self.edges.size - 1

    @property
    def nodes(self) -> np.ndarray:
        return np.sqrt(self.edges[1:] * self.edges[:-1])

    @property
    def weights_mult(self) -> np.ndarray:
        return np.log(self.edges[1:] / self.edges[:-1])

    @property
    def weights_lin(self) -> np.ndarray:
        return self.nodes ** 2 * self.weights_mult

    @property
    def weights_flat(self) -> np.ndarray:
        return self.nodes * self.weights_mult

    @property
    def ratio(self) -> float:
        r = self.edges[1:] / self.edges[:-1]
        return float(r.mean())

    def doubled(self) -> "TimeGrid":
        e = self.edges
        mid = np.sqrt(e[1:] * e[:-1])
        out = np.empty(2 * e.size - 1)
        out[0::2], out[1::2] = e, mid
        return TimeGrid(out)

    def extended(self) -> "TimeGrid":
        """Double density and add one decade at each end."""
        lo, hi = self.edges[0] / 10, self.edges[-1] * 10
        n = int(round(2 * self.size * math.log(hi / lo) / math.log(self.edges[-1] / self.edges[0])))
        return TimeGrid.geometric(lo, hi, n)

    def moment(self, p: int) -> float:
        """Quadrature of int y^p dy/y over the covered range."""
        return float(np.sum(self.nodes ** p * self.weights_mult))

    def cells_within(self, a: float, b: float) -> np.ndarray:
        """Mask of cells lying inside [a, b]."""
        tol = 1e-12
        return (self.edges[:-1] >= a * (1 - tol)) & (self.edges[1:] <= b * (1 + tol))


# --------------------------------------------------------------------------
# tent elements
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class TentElement:
    grid: TimeGrid
    context: AlgebraContext
    samples: np.ndarray

    def __post_init__(self):
        s = self.context.check(np.asarray(self.samples, dtype=complex))
        if s.shape[0] != self.grid.size or s.shape[1:] != self.context.element_shape:
            raise ValueError("one sample per grid node is required")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, grid, context, fn) -> "TentElement":
        return cls(grid, context, np.stack([fn(y) for y in grid.nodes]))

    @classmethod
    def indicator(cls, grid, context, element, a, b) -> "TentElement":
        mask = grid.cells_within(a, b).astype(float)
        el = np.asarray(element, dtype=complex)
        return cls(grid, context, mask.reshape((-1,) + (1,) * el.ndim) * el)

    @classmethod
    def zeros(cls, grid, context) -> "TentElement":
        return cls(grid, context, np.zeros((grid.size,) + context.element_shape, dtype=complex))

    def scaled(self, c) -> "TentElement":
        return TentElement(self.grid, self.context, c * self.samples)

    def __add__(self, other):
        _same_grid(self, other)
        return TentElement(self.grid, self.context, self.samples + other.samples)

    def squares(self) -> np.ndarray:
        return self.context.abs2(self.samples)


def _same_grid(f: TentElement, g: TentElement):
    if f.grid is not g.grid and not np.array_equal(f.grid.edges, g.grid.edges):
        raise ValueError("tent elements live on different grids")


def _bshape(w, ndim):
    return np.asarray(w).reshape((-1,) + (1,) * ndim)


def averaged_sum(gen: Generator, elements, times, weights):
    """sum_i weights_i T_(times_i)(elements_i), evaluated in spectral coordinates."""
    c = gen.to_spectral(elements)
    g = gen.heat_values(np.asarray(times, dtype=float))
    return gen.from_spectral(np.sum(_bshape(weights, gen.freqs.ndim) * g * c, axis=0))


def _time_map(time_map, y):
    return y if time_map is None else time_map(y)


def t1_square(gen: Generator, f: TentElement, time_map=None, weights=None):
    w = f.grid.weights_mult if weights is None else weights
    return averaged_sum(gen, f.squares(), _time_map(time_map, f.grid.nodes), w)


def t1_norm(gen: Generator, f: TentElement, time_map=None, weights=None) -> float:
    """tau (sum_i w_i T_(y_i)|f_i|^2)^(1/2); ``time_map`` replaces T_y by T_(time_map(y))."""
    ctx = f.context
    return float(np.real(ctx.trace(ctx.sqrt_pos(t1_square(gen, f, time_map, weights)))))


def tinf_profile(gen: Generator, f: TentElement, time_map=None, weights=None) -> np.ndarray:
    """||T_(t_j) sum_(i<=j) w_i |f_i|^2||_inf for every node t_j."""
    ctx = f.context
    w = f.grid.weights_mult if weights is None else weights
    partial = np.cumsum(_bshape(w, len(ctx.element_shape)) * f.squares(), axis=0)
    times = _time_map(time_map, f.grid.nodes)
    vals = gen.spectral_apply(gen.heat_values(times), partial)
    return np.max(ctx.spectrum(vals).reshape(f.grid.size, -1), axis=1)


def tinf_norm(gen: Generator, f: TentElement, time_map=None, weights=None) -> float:
    """sup over nodes of ||T_t sum_(y_i<=t) w_i |f_i|^2||^(1/2).

    For a discrete measure the partial sum only changes at nodes and T is an
    L^inf contraction, so the supremum over nodes is the supremum over all t.
    """
    return float(math.sqrt(max(0.0, float(np.max(tinf_profile(gen, f, time_map, weights))))))


def l2_norm(f: TentElement) -> float:
    return float(math.sqrt(max(0.0, float(np.real(pairing(f, f))))))


def pairing(f: TentElement, g: TentElement, weights=None) -> complex:
    """tau sum_i w_i f_i g_i*."""
    _same_grid(f, g)
    ctx = f.context
    w = f.grid.weights_mult if weights is None else weights
    vals = ctx.trace(ctx.mul(f.samples, ctx.adjoint(g.samples)))
    return complex(np.sum(w * vals))


# --------------------------------------------------------------------------
# truncated square functions
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class TruncatedSquareFunction:
    source: TentElement
    direction: str
    alpha: float
    points: np.ndarray
    values: np.ndarray       # S_s
    plain: np.ndarray        # S~_s, the untruncated-weight version


def truncated_square(gen: Generator, f: TentElement, direction: str, alpha: float, points=None,
                     ) -> TruncatedSquareFunction:
    """S_s and S~_s at the truncation points (grid nodes by default).

    decreasing: S_s^2 = sum_(y_i >= s) w_i T_(y_i)|A_i|^2 (y_i/(y_i+s))^alpha
    increasing: S_s^2 = sum_(y_i >= s) w_i T_(2y_i-s)|A_i|^2 ((2y_i-s)/y_i)^alpha
    S~_s^2 = sum_(y_i >= s) w_i T_(y_i)|A_i|^2 in both cases.
    """
    ctx = f.context
    y = f.grid.nodes
    w = f.grid.weights_mult
    s = y.copy() if points is None else np.asarray(points, dtype=float)
    active = y[None, :] >= s[:, None] * (1 - 1e-12)
    c0 = gen.to_spectral(f.squares())
    lam = gen.freqs
    nd = lam.ndim
    plain_coef = np.where(active, w[None, :], 0.0)
    heat = gen.heat_values(y) * c0
    plain = np.tensordot(plain_coef, heat, axes=(1, 0))
    if direction == "decreasing":
        coef = np.where(active, w[None, :] * (y[None, :] / (y[None, :] + s[:, None])) ** alpha, 0.0)
        val = np.tensordot(coef, heat, axes=(1, 0))
    elif direction == "increasing":
        tt = np.clip(2 * y[None, :] - s[:, None], 0.0, None)
        coef = np.where(active, w[None, :] * (tt / y[None, :]) ** alpha, 0.0)
        e = np.exp(-tt.reshape(tt.shape + (1,) * nd) * lam)
        val = np.sum(coef.reshape(coef.shape + (1,) * nd) * e * c0[None], axis=1)
    else:
        raise ValueError("direction must be 'decreasing' or 'increasing'")
    S = ctx.sqrt_pos(gen.from_spectral(val))
    St = ctx.sqrt_pos(gen.from_spectral(plain))
    return TruncatedSquareFunction(f, direction, alpha, s, S, St)


def check_truncation_lemma(gen: Generator, f: TentElement, direction: str, alpha: float,
                           check_id: str | None = None) -> list:
    """Order relation between S~ and S, and the two discrete derivative signs."""
    ctx = f.context
    cid = check_id or ("lemma-2.2" if direction == "decreasing" else "lemma-2.4")
    y = f.grid.nodes
    sf = truncated_square(gen, f, direction, alpha)
    const = 2 ** (alpha / 2) if direction == "decreasing" else 1.0
    scale = max(float(np.max(ctx.sup_norm(sf.values))), 1e-300)
    w_order = float(np.min(ctx.spectrum(const * sf.values - sf.plain))) / scale
    out = [order_report(cid, w_order, 1e-9, sweep_key=f"{direction}:order", budget=const)]

    s_next = y[1:]
    s_dbl = 2 * y[1:] - y[:-1]
    extra = truncated_square(gen, f, direction, alpha, points=s_dbl).values
    S = sf.values

    def half(times, x):
        return gen.spectral_apply(gen.heat_values(times), x)

    a_now = half(y[:-1] / 2, S[:-1])
    a_next = half(s_next / 2, S[1:])
    # T_(s/2) S_s is non-increasing
    mono = -(a_next - a_now)
    w_mono = float(np.min(ctx.spectrum(mono))) / scale
    out.append(order_report(cid, w_mono, 1e-8, sweep_key=f"{direction}:half-monotone"))
    # T_(s')S_(s') - T_s S_s >= T_(s/2)[T_(s''/2) S_(s'') - T_(s/2) S_s], s'' = 2s' - s
    full_now = half(y[:-1], S[:-1])
    full_next = half(s_next, S[1:])
    rhs = half(y[:-1] / 2, half(s_dbl / 2, extra) - a_now)
    w_cmp = float(np.min(ctx.spectrum(full_next - full_now - rhs))) / scale
    out.append(order_report(cid, w_cmp, 1e-8, sweep_key=f"{direction}:derivative-compare"))
    return out


def weighted_cauchy_schwarz(gen: Generator, a: TentElement, b: TentElement, S: np.ndarray,
                            eps_rel: float = 1e-8) -> CheckReport:
    """|tau sum w a_s* b_s| <= [tau sum w T_s(S_s^-1)|a_s|^2]^(1/2) [tau sum w T_s(S_s)|b_s|^2]^(1/2).

    ``S`` holds one positive element per node; it is regularised by
    eps = eps_rel * ||S_0|| before inversion.
    """
    _same_grid(a, b)
    ctx = a.context
    y = a.grid.nodes
    w = a.grid.weights_mult
    s0 = float(np.max(ctx.sup_norm(S)))
    if s0 == 0:
        raise ValueError("singular weight without regularisation")
    eps = eps_rel * s0
    Sr = ctx.hermitian_part(S) + eps * ctx.identity()
    inv = ctx.functional_calculus(Sr, lambda v: 1.0 / np.clip(v, eps, None))
    tinv = gen.spectral_apply(gen.heat_values(y), inv)
    ts = gen.spectral_apply(gen.heat_values(y), Sr)
    lhs = abs(np.sum(w * ctx.trace(ctx.mul(ctx.adjoint(a.samples), b.samples))))
    ra = float(np.real(np.sum(w * ctx.trace(ctx.mul(tinv, ctx.abs2(a.samples))))))
    rb = float(np.real(np.sum(w * ctx.trace(ctx.mul(ts, ctx.abs2(b.samples))))))
    rhs = math.sqrt(max(ra, 0.0) * max(rb, 0.0))
    rep = bound_report("weighted-cauchy-schwarz", lhs, rhs, 1.0, rtol=1e-8)
    return rep.with_(notes=f"eps={eps:.3e}")


# --------------------------------------------------------------------------
# random tents
# --------------------------------------------------------------------------
def random_tent(ctx: AlgebraContext, grid: TimeGrid, rng: np.random.Generator) -> TentElement:
    """Gaussian samples on a random window of nodes with a random log-amplitude profile."""
    m = grid.size
    i0 = int(rng.integers(0, m))
    i1 = int(rng.integers(i0 + 1, min(m, i0 + 1 + max(2, m // 2)) + 1))
    samples = np.zeros((m,) + ctx.element_shape, dtype=complex)
    width = i1 - i0
    amp = np.exp(np.cumsum(rng.normal(0, 0.3, width)))
    for k, i in enumerate(range(i0, i1)):
        samples[i] = amp[k] * ctx.random_element(rng)
    samples /= max(np.max(np.abs(samples)), 1e-300)
    return TentElement(grid, ctx, samples)


def random_tent_pair(ctx, grid, rng):
    a = random_tent(ctx, grid, rng)
    mode = int(rng.integers(0, 3))
    if mode == 0:
        b = random_tent(ctx, grid, rng)
    elif mode == 1:
        b = a
    else:
        noise = random_tent(ctx, grid, rng)
        b = TentElement(grid, ctx, a.samples + 0.3 * noise.samples)
    return a, b


# --------------------------------------------------------------------------
# section two inequalities
# --------------------------------------------------------------------------
def duality_constant(alpha: float) -> float:
    """Constant of the duality bound |<A,B>|^2 <= c ||B||_inf^2 ||A||_1^2."""
    return 4.0 * 2.0 ** (1.5 * alpha)


def check_duality_bound(gen: Generator, grid: TimeGrid, alpha: float, rng, n_pairs: int = 200,
                        sweep_key: str = "") -> CheckReport:
    ctx = gen.context
    budget = duality_constant(alpha)
    reps = []
    for _ in range(n_pairs):
        a, b = random_tent_pair(ctx, grid, rng)
        lhs = abs(pairing(a, b)) ** 2
        rhs = (tinf_norm(gen, b) * t1_norm(gen, a)) ** 2
        reps.append(bound_report("thm-2.1-bound", lhs, rhs, budget, sweep_key=sweep_key))
    return worst(reps)


def necessity_ratio(gen: Generator, grid: TimeGrid, f, g: TentElement) -> tuple[float, float]:
    """Both sides of the necessity display, maximised over the grid times t.

    lhs(t) = tau (sum_(y_i<=t) w_i T_(y_i)[(T_t f)^(1/2)|g_i|^2 (T_t f)^(1/2)])^(1/2)
    rhs(t) = ||sum_(y_i<=t) w_i |g_i|^2||_1^(1/2) ||f||_1^(1/2)
    Returns (lhs, rhs) at the t with the largest ratio.
    """
    ctx = g.context
    y = grid.nodes
    w = grid.weights_mult
    sq = g.squares()
    fn = float(np.real(ctx.trace(f)))
    best = (0.0, 1.0)
    tf_all = gen.apply(y, np.broadcast_to(f, (y.size,) + ctx.element_shape))
    for j, t in enumerate(y):
        if not np.any(np.abs(sq[: j + 1]) > 0):
            continue
        r = ctx.sqrt_pos(tf_all[j])
        sand = ctx.mul(ctx.mul(r, sq[: j + 1]), r)
        inner = averaged_sum(gen, sand, y[: j + 1], w[: j + 1])
        lhs = float(np.real(ctx.trace(ctx.sqrt_pos(inner))))
        mass = float(np.real(ctx.trace(np.sum(_bshape(w[: j + 1], len(ctx.element_shape)) * sq[: j + 1], axis=0))))
        rhs = math.sqrt(max(mass, 0.0) * fn)
        if rhs > 0 and lhs / rhs > best[0] / best[1]:
            best = (lhs, rhs)
    return best


def _point_mass_tent(ctx, grid, j, atom_element):
    samples = np.zeros((grid.size,) + ctx.element_shape, dtype=complex)
    samples[j] = ctx.sqrt_pos(atom_element) / math.sqrt(grid.weights_mult[j])
    return TentElement(grid, ctx, samples)


def check_necessity_display(gen: Generator, grid: TimeGrid, rng, n_samples: int = 50,
                            extremal: bool = True) -> CheckReport:
    """The final display of the necessity argument, with constant exactly 1.

    Random positive f and random tents g are tried; with ``extremal`` the
    sweep also includes point masses for f and for |g|^2 concentrated on a
    single node, which reduce the display to the L^(1/2) quantity.
    """
    ctx = gen.context
    reps = []
    for _ in range(n_samples):
        f = ctx.random_positive(rng)
        g = random_tent(ctx, grid, rng)
        lhs, rhs = necessity_ratio(gen, grid, f, g)
        reps.append(bound_report("thm-2.3-necessity", lhs, rhs, 1.0, sweep_key="random"))
    if extremal:
        masses = ctx.point_masses()
        n = len(masses)
        pairs = [(i, i) for i in range(min(n, 4))] + [(0, j) for j in range(1, min(n, 4))]
        for j in range(0, grid.size, max(1, grid.size // 24)):
            for ia, ib in pairs:
                g = _point_mass_tent(ctx, grid, j, masses[ib])
                lhs, rhs = necessity_ratio(gen, grid, masses[ia], g)
                reps.append(bound_report("thm-2.3-necessity", lhs, rhs, 1.0, sweep_key="point-mass"))
    return worst(reps)


def check_tinf_by_duality(gen: Generator, rng, n_samples: int = 50, budget: float = 16.0) -> CheckReport:
    """||T_t|h|^2||^(1/2) <= c sup{|tau f h*| : tau (T_t|f|^2)^(1/2) <= 1}, c recorded.

    The supremum is bounded below by a probe family, so the recorded c is an
    upper estimate of the best constant.
    """
    ctx = gen.context
    reps = []
    for _ in range(n_samples):
        h = ctx.random_element(rng)
        t = float(np.exp(rng.uniform(np.log(1e-2), np.log(10.0))))
        lhs = math.sqrt(max(0.0, float(np.max(ctx.spectrum(gen.apply(t, ctx.abs2(h)))))))
        best = 0.0
        for f in _remark_probes(ctx, h, rng):
            nf = float(np.real(ctx.trace(ctx.sqrt_pos(gen.apply(t, ctx.abs2(f))))))
            if nf > 0:
                best = max(best, abs(complex(ctx.inner(f, h))) / nf)
        reps.append(bound_report("remark-2.5", lhs, best, budget))
    return worst(reps)


def _remark_probes(ctx, h, rng):
    yield h
    if ctx.is_commutative:
        ph = np.exp(1j * np.angle(h))
        for i in range(ctx.size):
            e = np.zeros(ctx.size, dtype=complex)
            e[i] = ph[i]
            yield e
    else:
        u, _, vh = np.linalg.svd(h)
        for k in range(ctx.size):
            yield np.outer(u[:, k], vh[k])
        for i in range(ctx.size):
            for j in range(ctx.size):
                e = np.zeros((ctx.size, ctx.size), dtype=complex)
                e[i, j] = 1.0
                yield e
    for _ in range(4):
        yield ctx.random_element(rng)


def check_smoothed_t1(gen: Generator, grid: TimeGrid, rng, n_samples: int = 100, budget: float = 64.0):
    """||(T_2s A_s)||_T1^2 <= c ||A||_T1 tau(sum w |T_s A_s|^2)^(1/2), c recorded."""
    ctx = gen.context
    y = grid.nodes
    w = grid.weights_mult
    reps = []
    for _ in range(n_samples):
        a = random_tent(ctx, grid, rng)
        t2a = TentElement(grid, ctx, gen.apply(2 * y, a.samples))
        lhs = t1_norm(gen, t2a) ** 2
        ta = gen.apply(y, a.samples)
        sq = np.sum(_bshape(w, len(ctx.element_shape)) * ctx.abs2(ta), axis=0)
        rhs = t1_norm(gen, a) * float(np.real(ctx.trace(ctx.sqrt_pos(sq))))
        reps.append(bound_report("lemma-2.7", lhs, rhs, budget))
    return worst(reps)


def t1_comparison_constant(gen: Generator, grid: TimeGrid, rng, upper_map, lower_map,
                           n_samples: int = 100) -> float:
    """Largest observed ratio of T1 norms taken with two time maps."""
    ctx = gen.context
    best = 0.0
    for _ in range(n_samples):
        a = random_tent(ctx, grid, rng)
        lo = t1_norm(gen, a, lower_map)
        if lo > 0:
            best = max(best, t1_norm(gen, a, upper_map) / lo)
    return best


def check_t1_time_change(gen: Generator, grid: TimeGrid, alpha: float, rng, n_samples: int = 100) -> list:
    """T1 norms under T_s and T_2s are comparable, both ways."""
    ctx = gen.context
    up = dn = 0.0
    for _ in range(n_samples):
        a = random_tent(ctx, grid, rng)
        n1 = t1_norm(gen, a)
        n2 = t1_norm(gen, a, lambda y: 2 * y)
        up = max(up, n1 / n2)
        dn = max(dn, n2 / n1)
    budget = 2 ** (alpha / 2) * math.sqrt(duality_constant(alpha))
    return [
        CheckReport("prop-2.8", sweep_key="T_s/T_2s", lhs=up, rhs=1.0, ratio=up, budget=budget,
                    passed=bool(up <= budget), notes=f"{n_samples} tents"),
        CheckReport("prop-2.8", sweep_key="T_2s/T_s", lhs=dn, rhs=1.0, ratio=dn, budget=budget,
                    passed=bool(dn <= budget), notes=f"{n_samples} tents"),
    ]


# --------------------------------------------------------------------------
# L^(1/2) condition
# --------------------------------------------------------------------------
@dataclass
class KernelAccess:
    """Access to a positive kernel operator at one time.

    ``apply(x)`` computes (Kx)_i = sum_j K_ij x_j and ``apply_t`` the transpose.
    """

    weights: np.ndarray
    apply: object
    apply_t: object
    dense: np.ndarray | None = None
    circulant: bool = False


def generator_kernel_access(gen: Generator, y: float) -> KernelAccess:
    k = np.real(gen.kernels(gen.heat_values(y)))
    return KernelAccess(gen.context.weights, lambda x: k @ x, lambda x: k.T @ x, dense=k)


def point_mass_value(acc: KernelAccess) -> tuple[float, tuple]:
    """max over atoms a, b of ||T(delta_a T delta_b)||_(1/2) for unit-mass point masses."""
    mu = acc.weights
    if acc.circulant:
        col = np.clip(acc.apply(np.eye(1, mu.size, 0).ravel()), 0.0, None)
        q = float(np.sum(mu * np.sqrt(col))) ** 2
        b = int(np.argmax(col))
        return q * col[b] / (mu[0] * mu[0]), (0, b)
    k = np.clip(acc.dense, 0.0, None)
    q = (mu @ np.sqrt(k)) ** 2
    # vals[a, b] = Q_a K_ab / (mu_a mu_b)
    vals = (q / mu)[:, None] * k / mu[None, :]
    idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
    return float(vals[idx]), (int(idx[0]), int(idx[1]))


def _half_value(acc: KernelAccess, p, q):
    mu = acc.weights
    h = acc.apply(q / mu)
    u = np.clip(acc.apply(p / mu * h), 0.0, None)
    return float(np.sum(mu * np.sqrt(u))) ** 2


def _ascent(acc: KernelAccess, p, q, which: str, iters: int, eta: float = 0.5):
    """Exponentiated-gradient ascent on the concave half of the objective."""
    mu = acc.weights
    for _ in range(iters):
        if which == "f":
            h = acc.apply(q / mu)
            u = np.clip(acc.apply(p / mu * h), 1e-300, None)
            grad = h / mu * acc.apply_t(mu / (2 * np.sqrt(u)))
            x = p
        else:
            fh = p / mu
            u = np.clip(acc.apply(fh * acc.apply(q / mu)), 1e-300, None)
            grad = acc.apply_t(fh * acc.apply_t(mu / (2 * np.sqrt(u)))) / mu
            x = q
        g = grad / max(np.max(np.abs(grad)), 1e-300)
        x = x * np.exp(eta * g)
        x = x / x.sum()
        if which == "f":
            p = x
        else:
            q = x
    return p, q


def lhalf_commutative(acc: KernelAccess, rng, restarts: int = 8, iters: int = 60, rounds: int = 4):
    """Lower bound for sup over probability densities f, g of ||T(f Tg)||_(1/2)."""
    mu = acc.weights
    n = mu.size
    best, arg = point_mass_value(acc)
    label = f"point-mass{arg}"
    # densities carry unit mass, so the ratio is the value itself
    uni = _half_value(acc, mu / mu.sum(), mu / mu.sum())
    if uni > best:
        best, label = uni, "uniform"
    for r in range(restarts):
        if r == 0:
            p = np.full(n, 1e-3 / n)
            p[arg[0]] += 1
            q = np.full(n, 1e-3 / n)
            q[arg[1]] += 1
            p, q = p / p.sum(), q / q.sum()
        else:
            p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        for _ in range(rounds):
            p, q = _ascent(acc, p, q, "f", iters)
            p, q = _ascent(acc, p, q, "g", iters)
        v = _half_value(acc, p, q)
        if v > best:
            best, label = v, f"ascent{r}"
    return best, label


def _sqrt_psd(x):
    w, v = np.linalg.eigh(0.5 * (x + x.conj().T))
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def _schur_half_value(sym, f, g, n):
    b = _sqrt_psd(sym * g)
    x = sym * (b @ f @ b)
    w = np.linalg.eigvalsh(0.5 * (x + x.conj().T))
    return float(np.sum(np.sqrt(np.clip(w, 0, None))) / n) ** 2


def lhalf_schur(gen: Generator, y: float, rng, restarts: int = 8, iters: int = 40):
    """Probe search for the sandwich form ||T[(Tg)^(1/2) f (Tg)^(1/2)]||_(1/2)."""
    ctx = gen.context
    n = ctx.size
    sym = gen.heat_values(y)
    probes = [ctx.projector(np.eye(n)[i]) for i in range(n)]
    fourier = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
    probes += [ctx.projector(fourier[k]) for k in range(n)]
    probes += [ctx.projector(rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(n)]
    probes.append(ctx.identity())
    best, label = 0.0, ""
    for i, f in enumerate(probes):
        for j, g in enumerate(probes):
            v = _schur_half_value(sym, f, g, n)
            if v > best:
                best, label, bf, bg = v, f"probe{i},{j}", f, g
    # ascent in f (concave for fixed g) from the best probes and random starts
    starts = [(bf, bg)] + [(ctx.random_positive(rng), bg) for _ in range(restarts - 1)]
    for r, (f, g) in enumerate(starts):
        f = f / np.real(np.trace(f)) * n
        for _ in range(iters):
            b = _sqrt_psd(sym * g)
            x = sym * (b @ f @ b)
            w, v = np.linalg.eigh(0.5 * (x + x.conj().T))
            xi = (v * (0.5 / np.sqrt(np.clip(w, 1e-12, None)))) @ v.conj().T
            grad = b @ (sym * xi) @ b
            grad = 0.5 * (grad + grad.conj().T)
            gw, gv = np.linalg.eigh(grad)
            step = (gv * np.exp(0.5 * gw / max(np.max(np.abs(gw)), 1e-300))) @ gv.conj().T
            f = step @ f @ step.conj().T
            f = 0.5 * (f + f.conj().T)
            f = f / np.real(np.trace(f)) * n
        v = _schur_half_value(sym, f, g, n)
        if v > best:
            best, label = v, f"ascent{r}"
    return best, label


def lhalf_constant(gen: Generator, y: float, rng, restarts: int = 8) -> tuple[float, str]:
    if gen.is_markov:
        return lhalf_commutative(generator_kernel_access(gen, y), rng, restarts)
    return lhalf_schur(gen, y, rng, restarts)


def lhalf_test(gen: Generator, ys, rng, restarts: int = 8, budget: float = float("inf"),
               refine: bool = True) -> CheckReport:
    """Empirical L^(1/2) constant: sup over y and probes, with a local refinement in y."""
    ys = np.asarray(ys, dtype=float)
    vals = []
    labels = []
    for y in ys:
        v, lab = lhalf_constant(gen, float(y), rng, restarts)
        vals.append(v)
        labels.append(lab)
    vals = np.array(vals)
    j = int(np.argmax(vals))
    best, yb = float(vals[j]), float(ys[j])
    if refine and gen.is_markov and ys.size > 2:
        lo = ys[max(j - 1, 0)]
        hi = ys[min(j + 1, ys.size - 1)]
        if hi > lo:
            res = minimize_scalar(lambda ly: -point_mass_value(generator_kernel_access(gen, math.exp(ly)))[0],
                                  bounds=(math.log(lo), math.log(hi)), method="bounded",
                                  options={"xatol": 1e-10})
            if -res.fun > best:
                best, yb = float(-res.fun), math.exp(res.x)
    return CheckReport("lhalf", fixture=gen.name, lhs=best, rhs=1.0, ratio=best, budget=budget,
                       passed=bool(best <= budget), notes=f"argmax y={yb:.6g} via {labels[j]}",
                       extra={"y": yb, "profile": vals})
