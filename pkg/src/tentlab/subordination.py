"""Subordinated Poisson semigroup P_y = exp(-y sqrt(-L)).

Two routes are provided. The spectral route evaluates exp(-y sqrt(lambda))
on the spectrum. The quadrature route integrates the subordination formula

    P_y = 1/(2 sqrt(pi)) int_0^inf y exp(-y^2/(4u)) u^(-3/2) T_u du

with composite Gauss-Legendre rules in the variable v = log u. The same
quadrature realises truncated pieces of that integral, which have no
spectral shortcut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc, erfcinv

from .report import CheckReport, order_report, residual_report
from .semigroup import Generator, Operator, order_constant

SQRT_PI = math.sqrt(math.pi)
_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
# erfc(_Z_CUT) ~ 1e-13: mass of the kernel left of the lower cut
_Z_CUT = 5.3
_DECAY = 40.0


class QuadratureNonconvergence(RuntimeError):
    def __init__(self, achieved: float):
        super().__init__(f"subordination quadrature did not converge (achieved {achieved:.3e})")
        self.achieved = achieved


def _panel_rule(a: float, b: float, width: float):
    m = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, m + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _integrate_log(freqs, y, lo, hi, shift, width):
    """int_lo^hi y exp(-y^2/4u) u^(-3/2) exp(-(u - shift) lam) du over [lo, hi] (finite)."""
    v, w = _panel_rule(math.log(lo), math.log(hi), width)
    u = np.exp(v)
    scal = y * np.exp(-y * y / (4.0 * u) - 0.5 * v)
    lam = np.asarray(freqs, dtype=float)[..., None]
    vals = np.exp(-(u - shift) * lam)
    return vals @ (w * scal)


def subordination_values(freqs, y: float, lo: float = 0.0, hi: float = math.inf,
                         shift: float = 0.0, tol: float = 1e-12) -> np.ndarray:
    """Unnormalised truncated subordination integral evaluated on the spectrum.

    Returns, for every frequency lam,
        int_lo^hi y exp(-y^2/(4u)) u^(-3/2) exp(-(u - shift) lam) du.
    The full range gives 2 sqrt(pi) exp(-y sqrt(lam)).
    """
    if y <= 0:
        raise ValueError("quadrature route needs y > 0")
    freqs = np.asarray(freqs, dtype=float)
    a_cut = y * y / (4.0 * _Z_CUT ** 2)
    a = max(lo, a_cut)
    pos = freqs[freqs > 0]
    lam_min = float(pos.min()) if pos.size else 1.0
    if math.isinf(hi):
        b = max(4.0 * a, shift + _DECAY / lam_min, 16.0 * y * y)
    else:
        b = hi
    out = np.zeros(freqs.shape)
    if b > a:
        width = 1.0
        prev = _integrate_log(freqs, y, a, b, shift, width)
        err = math.inf
        for _ in range(8):
            width /= 2
            cur = _integrate_log(freqs, y, a, b, shift, width)
            err = float(np.max(np.abs(cur - prev), initial=0.0))
            prev = cur
            if err <= tol:
                break
        else:
            raise QuadratureNonconvergence(err)
        out = prev
    if math.isinf(hi):
        # analytic mass beyond the upper cut for the zero frequency
        tail = 2.0 * SQRT_PI * float(erf(y / (2.0 * math.sqrt(max(b, a)))))
        out = out + np.where(freqs == 0, tail, 0.0)
    return out


def poisson_values(gen: Generator, y: float, route: str = "spectral") -> np.ndarray:
    if y < 0:
        raise ValueError("y must be non-negative")
    route = route.lower()
    if route == "spectral":
        return np.exp(-y * np.sqrt(gen.freqs))
    if route == "quadrature":
        return subordination_values(gen.freqs, y) / (2.0 * SQRT_PI)
    raise ValueError(f"unknown route {route!r}")


@dataclass(frozen=True)
class PoissonOperator:
    generator: Generator
    y: float
    route: str
    operator: Operator

    def apply(self, x):
        return self.operator.apply(x)


def poisson(gen: Generator, y: float, route: str = "spectral") -> PoissonOperator:
    return PoissonOperator(gen, float(y), route, gen.operator(poisson_values(gen, y, route)))


# --------------------------------------------------------------------------
# kernel splits
# --------------------------------------------------------------------------
PIECES = ("Pa", "Pb", "Pc", "Pd", "Pe")


@dataclass(frozen=True)
class KernelSplit:
    piece: str
    s: float
    threshold: float
    k: float | None
    values: np.ndarray
    operator: Operator


def kernel_split(gen: Generator, s: float, t: float | None, piece: str, k: float | None = None) -> KernelSplit:
    """Truncated subordination pieces, without the 1/(2 sqrt(pi)) factor.

    Pa: u in [0, t^2]        Pb: u in [t^2, inf)
    Pc: u in [0, k s^2]      Pd: u in [k s^2, inf)
    Pe: u in [k s^2, inf) with T_u replaced by T_(u - k s^2 / 2)
    """
    if piece not in PIECES:
        raise ValueError(f"piece must be one of {PIECES}")
    if piece in ("Pc", "Pd", "Pe") and (k is None or k <= 0):
        raise ValueError(f"{piece} needs a positive k")
    if piece in ("Pa", "Pb") and (t is None or t <= 0):
        raise ValueError(f"{piece} needs a positive threshold time")
    if piece == "Pa":
        vals = subordination_values(gen.freqs, s, 0.0, t * t)
        cut = t * t
    elif piece == "Pb":
        vals = subordination_values(gen.freqs, s, t * t, math.inf)
        cut = t * t
    elif piece == "Pc":
        cut = k * s * s
        vals = subordination_values(gen.freqs, s, 0.0, cut)
    elif piece == "Pd":
        cut = k * s * s
        vals = subordination_values(gen.freqs, s, cut, math.inf)
    else:
        cut = k * s * s
        vals = subordination_values(gen.freqs, s, cut, math.inf, shift=cut / 2)
    return KernelSplit(piece, s, cut, k, vals, gen.operator(vals))


def lower_mass(k: float) -> float:
    """int_0^{k s^2} s exp(-s^2/4u) u^(-3/2) du, which does not depend on s."""
    return 2.0 * SQRT_PI * float(erfc(1.0 / (2.0 * math.sqrt(k))))


def admissible_k(c_alpha: float, alpha: float, k_max: float = 4.0) -> float:
    """Largest k <= k_max with c_alpha^2 2^alpha lower_mass(k) <= 1/16."""
    target = 1.0 / (16.0 * c_alpha ** 2 * 2.0 ** alpha * 2.0 * SQRT_PI)
    if target >= 1.0:
        return k_max
    z = float(erfcinv(target))
    return min(k_max, 1.0 / (4.0 * z * z))


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------
def check_scalar_identity(lams=(0.5, 1.0, 2.0, 5.0), ys=(0.1, 1.0, 5.0), tol: float = 1e-8) -> CheckReport:
    lams = np.asarray(lams, dtype=float)
    err = 0.0
    for y in ys:
        q = subordination_values(lams, y) / (2 * SQRT_PI)
        err = max(err, float(np.max(np.abs(q - np.exp(-y * np.sqrt(lams))))))
    return residual_report("poisson-routes", err, tol, sweep_key="scalar-identity")


def route_agreement(gen: Generator, ys) -> float:
    worst = 0.0
    for y in ys:
        a = poisson_values(gen, y, "spectral")
        b = poisson_values(gen, y, "quadrature")
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(a))))
    return worst


def check_route_agreement(gen: Generator, ys=None, tol: float = 1e-6) -> CheckReport:
    ys = np.geomspace(0.01, 20.0, 32) if ys is None else ys
    return residual_report("poisson-routes", route_agreement(gen, ys), tol, fixture=gen.name,
                           sweep_key="routes", notes=f"{len(ys)} y values")


def check_poisson_semigroup_law(gen: Generator, tol: float = 1e-10) -> CheckReport:
    ys = np.geomspace(0.01, 10.0, 8)
    err = 0.0
    for s in ys:
        for t in ys:
            a = gen.kernels(poisson_values(gen, s)) @ gen.kernels(poisson_values(gen, t)) if gen.is_markov \
                else poisson_values(gen, s) * poisson_values(gen, t)
            b = gen.kernels(poisson_values(gen, s + t))
            err = max(err, float(np.max(np.abs(a - b))))
    return residual_report("poisson-routes", err, tol, fixture=gen.name, sweep_key="semigroup-law")


def poisson_pde_residual(gen: Generator, y: float, x) -> tuple[float, float]:
    """Spectral and finite-difference residuals of (d^2/dy^2 + L) P_y x.

    Both are relative to |L P_y x| + 1e-12 |x|.
    """
    ctx = gen.context
    pg = gen.subordinate()
    py = pg.apply(y, x)
    lpx = gen.generator_apply(py)
    scale = ctx.lp_norm(lpx, 2) + 1e-12 * ctx.lp_norm(x, 2)
    spec = pg.time_derivative(y, x, order=2) + lpx
    h = 2e-4 * y
    fd = (pg.apply(y + h, x) - 2 * py + pg.apply(y - h, x)) / (h * h)
    return ctx.lp_norm(spec, 2) / scale, ctx.lp_norm(fd + lpx, 2) / scale


def check_poisson_pde(gen: Generator, y: float, x, tol: float = 1e-5) -> CheckReport:
    if y <= 0:
        raise ValueError("y must be positive")
    spec, fd = poisson_pde_residual(gen, y, x)
    return residual_report("poisson-pde", max(spec, fd), tol, fixture=gen.name, sweep_key=f"y={y:g}")


def check_py_over_y_decreasing(gen: Generator, ys, f, tol: float = 1e-10) -> CheckReport:
    """P_{y2} f / y2 <= P_{y1} f / y1 for consecutive y1 < y2 and positive f."""
    ctx = gen.context
    ys = np.sort(np.asarray(ys, dtype=float))
    pg = gen.subordinate()
    vals = pg.apply(ys, np.broadcast_to(f, (ys.size,) + ctx.element_shape)) \
        / ys.reshape((-1,) + (1,) * len(ctx.element_shape))
    diff = vals[:-1] - vals[1:]
    wit = float(np.min(ctx.spectrum(diff))) if diff.size else 0.0
    return order_report("py-over-y", wit, tol, fixture=gen.name, notes=f"{ys.size - 1} comparisons")


def heat_domination_constant(gen: Generator, ys) -> float:
    """Largest c with P_y >= c T_{y^2} for every y in ``ys``."""
    c = math.inf
    for y in ys:
        p = gen.operator(poisson_values(gen, y))
        t = gen.evaluate(y * y)
        c = min(c, 1.0 / order_constant(p, t))
    return c


def gradient_bound_constant(gen: Generator, ys, samples) -> float:
    """Smallest c with y^2 |dP_y x/dy|^2 <= c P_{y/2} |x|^2 over the samples."""
    ctx = gen.context
    pg = gen.subordinate()
    worst = 0.0
    for x in samples:
        for y in ys:
            lhs = y * y * ctx.abs2(pg.time_derivative(y, x))
            rhs = pg.apply(y / 2, ctx.abs2(x))
            if ctx.is_commutative:
                r = np.real(rhs)
                mask = r > 1e-14 * np.max(r)
                worst = max(worst, float(np.max(np.real(lhs)[mask] / r[mask])))
            else:
                w, v = np.linalg.eigh(rhs)
                keep = w > 1e-12 * w.max()
                vk = v[:, keep] / np.sqrt(w[keep])
                red = vk.conj().T @ lhs @ vk
                worst = max(worst, float(np.max(np.linalg.eigvalsh(0.5 * (red + red.conj().T)))))
    return worst


def split_checks(gen: Generator, alpha: float, direction: str, pairs=((0.5, 1.0), (1.0, 1.0), (0.2, 0.7),
                                                                       (2.0, 1.5), (0.05, 0.3))) -> list:
    """Reconstruction and comparison bounds for the kernel splits at threshold t^2."""
    out = []
    rec = 0.0
    worst_b = 0.0
    wit_a = math.inf
    for s, t in pairs:
        pa = kernel_split(gen, s, t, "Pa")
        pb = kernel_split(gen, s, t, "Pb")
        ref = 2 * SQRT_PI * np.exp(-s * np.sqrt(gen.freqs))
        rec = max(rec, float(np.max(np.abs(pa.values + pb.values - ref)) / (2 * SQRT_PI)))
        pbt = kernel_split(gen, t, t, "Pb")
        worst_b = max(worst_b, order_constant((s / t) * pbt.operator, pb.operator))
        # normalised Pa against T_{t^2} (decreasing) or T_{2t^2} (increasing)
        lhs = gen.evaluate(t * t) @ ((1 / (2 * SQRT_PI)) * pa.operator)
        ref_t = gen.evaluate(t * t if direction == "decreasing" else 2 * t * t)
        wit_a = min(wit_a, ((2.0 ** alpha) * ref_t - lhs).positivity().value)
    out.append(residual_report("prop-3.8-splits", rec, 1e-6, fixture=gen.name, sweep_key="reconstruct"))
    out.append(CheckReport("prop-3.8-splits", fixture=gen.name, sweep_key="tail-ratio", lhs=worst_b,
                           rhs=1.0, ratio=worst_b, budget=3.0, passed=bool(worst_b <= 3.0),
                           notes="best c in P^b_s <= c (s/t) P^b_t"))
    out.append(order_report("prop-3.8-splits", wit_a, 1e-10, fixture=gen.name, sweep_key=f"head-{direction}",
                            budget=2.0 ** alpha, notes="normalised head piece"))
    return out
