"""The check families and the per-fixture context they run in."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import dyadic, general, hardy_bmo, semigroup, subordination, tent
from ..report import CheckReport, worst
from ..tent import TimeGrid

SCOPES = ("fixture", "line")


def rng_for(seed: int, family: str, fixture: str) -> np.random.Generator:
    """Independent stream per (seed, family, fixture), stable across runs and orderings."""
    return np.random.default_rng([seed, zlib.crc32(family.encode()), zlib.crc32(fixture.encode())])


@dataclass
class FixtureRun:
    """Everything a check needs for one fixture, with lazily cached shared quantities."""

    name: str
    gen: semigroup.Generator | None
    grid: TimeGrid
    seed: int
    cache: dict = field(default_factory=dict)

    def rng(self, family: str) -> np.random.Generator:
        return rng_for(self.seed, family, self.name)

    @property
    def poisson(self) -> semigroup.Generator:
        if "poisson" not in self.cache:
            self.cache["poisson"] = self.gen.subordinate()
        return self.cache["poisson"]

    def derivative_ys(self) -> np.ndarray:
        y = self.grid.nodes
        return y[(y >= 1e-2) & (y <= 1e2)]

    def alpha(self, direction: str, which: str = "heat") -> float | None:
        key = ("alpha", which, direction)
        if key not in self.cache:
            g = self.gen if which == "heat" else self.poisson
            rep = semigroup.find_min_alpha(g, direction, extra_times=self.derivative_ys())
            self.cache[key] = rep.minimal_alpha
        return self.cache[key]

    def directions(self, which: str = "heat"):
        """(direction, alpha) for every direction in which the semigroup is quasi-monotone."""
        return [(d, self.alpha(d, which)) for d in semigroup.DIRECTIONS if self.alpha(d, which) is not None]

    def best_direction(self, which: str = "heat"):
        ds = self.directions(which)
        return min(ds, key=lambda p: p[1]) if ds else None

    def lhalf(self, restarts: int = 4) -> CheckReport:
        if "lhalf" not in self.cache:
            ys = np.geomspace(1e-2, 1e2, 16)
            self.cache["lhalf"] = tent.lhalf_test(self.gen, ys, self.rng("lhalf"), restarts=restarts)
        return self.cache["lhalf"]

    def c_alpha_k(self):
        if "k" not in self.cache:
            best = self.best_direction()
            alpha = best[1] if best else 0.0
            c = hardy_bmo.empirical_c_alpha(self.gen, self.rng("c-alpha"), self.grid)
            self.cache["k"] = (c, subordination.admissible_k(max(c, 1.0), alpha))
        return self.cache["k"]


@dataclass
class Family:
    name: str
    runner: Callable
    policy: str
    description: str
    scope: str = "fixture"
    exact: bool = False


FAMILIES: dict = {}


def family(name: str, policy: str, description: str, scope: str = "fixture", exact: bool = False):
    def deco(fn):
        FAMILIES[name] = Family(name, fn, policy, description, scope, exact)
        return fn
    return deco


def _key(rep: CheckReport, key: str) -> CheckReport:
    return rep.with_(sweep_key=key) if key else rep


# --------------------------------------------------------------------------
# semigroup engine
# --------------------------------------------------------------------------
@family("semigroup-axioms", "tolerance", "semigroup law, symmetry, unitality, positivity, continuity, Kadison-Schwarz")
def _axioms(run: FixtureRun, n_samples: int = 20):
    return semigroup.check_semigroup_axioms(run.gen, run.rng("semigroup-axioms"), n_samples)


@family("kadison-schwarz", "tolerance 1e-10", "|T f|^2 <= T|f|^2 on seeded elements")
def _ks(run: FixtureRun, n_samples: int = 200):
    return [semigroup.check_kadison_schwarz(run.gen, run.rng("kadison-schwarz"), n_samples)]


@family("time-derivative", "tolerance 1e-6", "spectral time derivatives against central differences")
def _tderiv(run: FixtureRun, n_samples: int = 20):
    return [semigroup.check_derivative_consistency(run.gen, run.rng("time-derivative"), n_samples)]


@family("min-alpha", "record; TP oracles 0.27846 and 1", "minimal quasi-monotonicity exponent, heat and Poisson")
def _min_alpha(run: FixtureRun, tol: float = 1e-3):
    out = []
    expected = {("heat", "increasing"): 0.2784645428, ("poisson", "decreasing"): 1.0} if run.name == "TP" else {}
    for which in ("heat", "poisson"):
        for d in semigroup.DIRECTIONS:
            a = run.alpha(d, which)
            exp = expected.get((which, d))
            key = f"{which}:{d}"
            if a is None:
                out.append(CheckReport("min-alpha", sweep_key=key, passed=exp is None, notes="not quasi-monotone"))
            elif exp is None:
                out.append(CheckReport("min-alpha", sweep_key=key, lhs=a, passed=True, notes="recorded"))
            else:
                out.append(CheckReport("min-alpha", sweep_key=key, lhs=a, rhs=exp, ratio=a / exp, budget=tol,
                                       passed=bool(abs(a - exp) <= tol)))
    return out


@family("doubling", "record", "smallest c with T_2s <= c T_s or T_s <= c T_2s on the grid")
def _doubling(run: FixtureRun):
    return [general.check_doubling(run.gen)]


# --------------------------------------------------------------------------
# subordination
# --------------------------------------------------------------------------
@family("poisson-routes", "tolerance 1e-6 / 1e-8", "spectral and quadrature Poisson semigroups agree; scalar identity")
def _routes(run: FixtureRun):
    return [
        _key(subordination.check_scalar_identity(), "scalar-identity"),
        _key(subordination.check_route_agreement(run.gen), "routes"),
        _key(subordination.check_poisson_semigroup_law(run.gen), "semigroup-law"),
    ]


@family("poisson-pde", "tolerance 1e-5", "d^2/dy^2 P_y x + L P_y x = 0")
def _pde(run: FixtureRun, ys=(0.1, 1.0, 3.0)):
    rng = run.rng("poisson-pde")
    ctx = run.gen.context
    return [subordination.check_poisson_pde(run.gen, float(y), ctx.random_element(rng)) for y in np.atleast_1d(ys)]


@family("py-over-y", "tolerance 1e-10", "P_y f / y is non-increasing for positive f")
def _pyy(run: FixtureRun, n_samples: int = 5):
    rng = run.rng("py-over-y")
    ctx = run.gen.context
    reps = [subordination.check_py_over_y_decreasing(run.gen, run.grid.nodes, ctx.random_positive(rng))
            for _ in range(n_samples)]
    return [worst(reps)]


@family("prop-3.8-splits", "tolerance 1e-6; tail budget 3", "kernel splits of the Poisson semigroup")
def _splits(run: FixtureRun):
    out = []
    for d, a in run.directions():
        out += [_key(r, f"{d}:{r.sweep_key}" if r.sweep_key else d) for r in subordination.split_checks(run.gen, a, d)]
    return out


@family("heat-domination", "floor 0.1", "largest c with P_y >= c T_(y^2) on the grid")
def _hdom(run: FixtureRun, floor: float = 0.1):
    c = subordination.heat_domination_constant(run.gen, run.derivative_ys())
    return [CheckReport("heat-domination", lhs=c, rhs=floor, ratio=c / floor, budget=floor,
                        passed=bool(c >= floor))]


@family("poisson-gradient-bound", "record, finite and grid-stable", "smallest c with y^2|dP_y x/dy|^2 <= c P_(y/2)|x|^2")
def _pgrad(run: FixtureRun, n_samples: int = 10, drift: float = 0.05):
    rng = run.rng("poisson-gradient-bound")
    ctx = run.gen.context
    xs = [ctx.random_element(rng) for _ in range(n_samples)]
    ys = run.derivative_ys()
    c1 = subordination.gradient_bound_constant(run.gen, ys, xs)
    fine = run.grid.doubled().nodes
    c2 = subordination.gradient_bound_constant(run.gen, fine[(fine >= ys[0]) & (fine <= ys[-1])], xs)
    rel = abs(c2 - c1) / c1 if c1 > 0 else 0.0
    return [CheckReport("poisson-gradient-bound", lhs=c1, rhs=c2, ratio=rel, budget=drift,
                        passed=bool(math.isfinite(c1) and rel <= drift),
                        notes=f"c {c1:.6g}, doubled grid {c2:.6g}")]


# --------------------------------------------------------------------------
# tent spaces
# --------------------------------------------------------------------------
@family("weighted-cauchy-schwarz", "constant 1", "Cauchy-Schwarz with a positive operator weight")
def _wcs(run: FixtureRun, n_samples: int = 30):
    rng = run.rng("weighted-cauchy-schwarz")
    ctx = run.gen.context
    reps = []
    for _ in range(n_samples):
        a, b = tent.random_tent_pair(ctx, run.grid, rng)
        S = np.stack([ctx.random_positive(rng) + 1e-3 * ctx.identity() for _ in range(run.grid.size)])
        reps.append(tent.weighted_cauchy_schwarz(run.gen, a, b, S))
    return [worst(reps)]


def _truncation(run: FixtureRun, direction: str, cid: str, n_tents: int):
    a = run.alpha(direction)
    if a is None:
        return [CheckReport(cid, sweep_key=direction, passed=True, notes="skipped: not quasi-monotone")]
    rng = run.rng(cid)
    by_key: dict = {}
    for _ in range(n_tents):
        f = tent.random_tent(run.gen.context, run.grid, rng)
        for r in tent.check_truncation_lemma(run.gen, f, direction, a, cid):
            by_key.setdefault(r.sweep_key, []).append(r)
    return [worst(v) for v in by_key.values()]


@family("lemma-2.2", "exact 2^(alpha/2)", "truncated square functions, quasi-decreasing case", exact=True)
def _truncation_decreasing(run: FixtureRun, n_tents: int = 4):
    return _truncation(run, "decreasing", "lemma-2.2", n_tents)


@family("lemma-2.4", "order, constant 1", "truncated square functions, quasi-increasing case")
def _truncation_increasing(run: FixtureRun, n_tents: int = 4):
    return _truncation(run, "increasing", "lemma-2.4", n_tents)


@family("thm-2.1-bound", "exact 4*2^(3 alpha/2)", "|<A,B>|^2 <= c ||B||_Tinf^2 ||A||_T1^2", exact=True)
def _duality_bound(run: FixtureRun, n_pairs: int = 200):
    out = []
    for which in ("heat", "poisson"):
        g = run.gen if which == "heat" else run.poisson
        for d, a in run.directions(which):
            rep = tent.check_duality_bound(g, run.grid, a, run.rng(f"thm-2.1-bound:{which}:{d}"), n_pairs)
            out.append(_key(rep, f"{which}:{d}"))
    return out


@family("lhalf", "record", "empirical L^(1/2) constant sup_y ||T_y(f T_y g)||_(1/2)")
def _lhalf(run: FixtureRun, restarts: int = 4):
    return [run.lhalf(restarts)]


@family("thm-2.3-necessity", "exact 1", "the necessity display with constant 1", exact=True)
def _nec(run: FixtureRun, n_samples: int = 50):
    return [tent.check_necessity_display(run.gen, run.grid, run.rng("thm-2.3-necessity"), n_samples)]


@family("remark-2.5", "record <= 16", "Tinf norm of a single element by duality")
def _tinf_duality(run: FixtureRun, n_samples: int = 50, budget: float = 16.0):
    return [tent.check_tinf_by_duality(run.gen, run.rng("remark-2.5"), n_samples, budget)]


@family("lemma-2.7", "record <= 64", "T1 norm of (T_2s A_s) against T1 and square-function norms")
def _smoothed_t1(run: FixtureRun, n_samples: int = 60, budget: float = 64.0):
    return [tent.check_smoothed_t1(run.gen, run.grid, run.rng("lemma-2.7"), n_samples, budget)]


@family("prop-2.8", "record <= 2^(alpha/2) sqrt(4*2^(3 alpha/2))", "T1 norms under T_s and T_2s are comparable")
def _t1_time_change(run: FixtureRun, n_samples: int = 60):
    best = run.best_direction()
    if best is None:
        return [CheckReport("prop-2.8", passed=True, notes="skipped: not quasi-monotone")]
    return tent.check_t1_time_change(run.gen, run.grid, best[1], run.rng("prop-2.8"), n_samples)


# --------------------------------------------------------------------------
# Hardy and BMO spaces of the Poisson semigroup
# --------------------------------------------------------------------------
@family("gamma-positive", "tolerance 1e-10", "Gamma(x, x) >= 0")
def _gp(run: FixtureRun, n_samples: int = 200):
    return [hardy_bmo.check_gamma_positive(run.gen, run.rng("gamma-positive"), n_samples)]


@family("gamma-tilde-identity", "tolerance 1e-8", "2 Gamma~(P_s x, P_s y) = L~((P_s x)* P_s y)")
def _gti(run: FixtureRun, n_samples: int = 20):
    return [hardy_bmo.check_gamma_tilde_identity(run.gen, run.rng("gamma-tilde-identity"), n_samples)]


@family("lemma-3.2", "tolerance 1e-10", "Poisson-averaged Gamma~ integral is dominated by P_y|phi|^2")
def _gamma_tilde_domination(run: FixtureRun, n_samples: int = 50):
    return [hardy_bmo.check_gamma_tilde_domination(run.gen, run.rng("lemma-3.2"), run.grid, n_samples)]


@family("thm-3.1-carleson", "record <= 16", "Carleson embedding of BMO into the Poisson Tinf space")
def _carl(run: FixtureRun, n_samples: int = 30, budget: float = 16.0):
    return [hardy_bmo.check_carleson(run.gen, run.rng("thm-3.1-carleson"), run.grid, n_samples, budget)]


def _duality(run: FixtureRun, n_pairs: int, budget: float):
    key = ("duality", n_pairs, budget)
    if key not in run.cache:
        run.cache[key] = hardy_bmo.check_duality(run.gen, run.rng("duality"), run.grid, n_pairs, budget)
    return run.cache[key]


@family("thm-3.5-duality", "record <= 32", "|tau f phi*| <= c ||f||_H1 ||phi||_BMO")
def _h1_bmo(run: FixtureRun, n_pairs: int = 200, budget: float = 32.0):
    return [_duality(run, n_pairs, budget)[0]]


@family("cor-3.3", "record <= 32", "duality with the Poisson-majorised square function")
def _h1_bmo_majorant(run: FixtureRun, n_pairs: int = 200, budget: float = 32.0):
    return [_duality(run, n_pairs, budget)[1]]


@family("prop-3.6", "record <= 8", "BMO norm against its heat-majorised variant")
def _bmo_heat(run: FixtureRun, n_samples: int = 30, budget: float = 8.0):
    return [hardy_bmo.check_bmo_heat_variant(run.gen, run.rng("prop-3.6"), run.grid, n_samples, budget)]


@family("prop-3.7", "record within [1/4, 4]", "BMO norm against the atom supremum")
def _bmo_atoms(run: FixtureRun, n_samples: int = 4, budget: float = 4.0):
    return [hardy_bmo.check_bmo_atoms(run.gen, run.rng("prop-3.7"), run.grid, n_samples, budget)]


@family("prop-3.10-derivative", "exact 3(3^alpha alpha + 2^alpha)", "two-sided bounds on dT_y/dy", exact=True)
def _derivative_bounds(run: FixtureRun):
    out = []
    ys = run.derivative_ys()
    for which in ("heat", "poisson"):
        g = run.gen if which == "heat" else run.poisson
        for d, a in run.directions(which):
            out.append(hardy_bmo.check_derivative_bounds(g, d, a, ys, sweep_key=f"{which}:{d}"))
    return out


def _atoms(run: FixtureRun, budget: float):
    key = ("atoms", budget)
    if key not in run.cache:
        _, k = run.c_alpha_k()
        run.cache[key] = hardy_bmo.check_atom_h1(run.gen, run.rng("atoms"), k, run.grid, budget=budget)
    return run.cache[key]


@family("lemma-3.9", "uniform <= 4", "inner truncated square function of atoms")
def _atom_inner(run: FixtureRun, budget: float = 4.0):
    return [_atoms(run, budget)[0]]


@family("lemma-3.11", "uniform <= 4", "outer truncated square function of atoms")
def _atom_outer(run: FixtureRun, budget: float = 4.0):
    return [_atoms(run, budget)[1]]


@family("thm-3.13-atom-h1", "uniform <= 4", "H1 norm of f - P_t f for atoms")
def _atom_h1(run: FixtureRun, budget: float = 4.0):
    return [_atoms(run, budget)[2]]


@family("lemma-3.12", "record <= 16", "square function against its T_(k s^2/8)-smoothed version")
def _smoothed_square(run: FixtureRun, n_samples: int = 20, budget: float = 16.0):
    c, k = run.c_alpha_k()
    rep = hardy_bmo.check_smoothed_square(run.gen, run.rng("lemma-3.12"), k, run.grid, n_samples, budget)
    return [rep.with_(notes=f"{rep.notes}; empirical c_alpha {c:.6g}")]


# --------------------------------------------------------------------------
# general semigroups
# --------------------------------------------------------------------------
@family("eq-4.1", "exact 2", "||f||_HG <= 2 ||f||_HS", exact=True)
def _hg_le_2hs(run: FixtureRun, n_samples: int = 50):
    return [general.check_hg_le_2hs(run.gen, run.rng("eq-4.1"), run.grid, n_samples)]


@family("thm-4.1", "record <= 64", "|tau f phi*| <= c ||f||_HS ||phi||_BMOC")
def _hs_bmoc(run: FixtureRun, n_pairs: int = 200, budget: float = 64.0):
    return [general.check_hs_bmoc_duality(run.gen, run.rng("thm-4.1"), run.grid, n_pairs, budget)]


@family("lemma-4.2", "order, tolerance 1e-8 scale", "G_s <= S_s and the derivative inequalities")
def _truncated_order(run: FixtureRun, n_samples: int = 6):
    return [general.check_truncated_order(run.gen, run.rng("lemma-4.2"), n_samples)]


@family("lemma-4.3", "exact 3", "pairing of dT_3s f with a tent against G and S norms", exact=True)
def _derivative_pairing(run: FixtureRun, n_samples: int = 40):
    return [general.check_derivative_pairing(run.gen, run.rng("lemma-4.3"), run.grid, n_samples)]


@family("thm-4.3-equivalence", "record <= 16", "||f||_HS against ||f||_HG under doubling and L^(1/2)")
def _hs_hg(run: FixtureRun, n_samples: int = 100, budget: float = 16.0):
    lh = run.cache.get("lhalf")
    return [general.check_hs_hg_equivalence(run.gen, run.rng("thm-4.3-equivalence"), run.grid, n_samples, budget,
                                 lhalf_value=None if lh is None else lh.lhs)]


# --------------------------------------------------------------------------
# uniformity of the duality constants
# --------------------------------------------------------------------------
def _duality_constants(gen, grid, seed, name):
    d = hardy_bmo.check_duality(gen, rng_for(seed, "duality", name), grid, 60, math.inf)
    t = general.check_hs_bmoc_duality(gen, rng_for(seed, "thm-4.1", name), grid, 60, math.inf)
    return {"thm-3.5": d[0].ratio, "cor-3.3": d[1].ratio, "thm-4.1": t.ratio}


@family("duality-uniformity", "drift <= 10%", "duality constants under grid doubling and fixture doubling")
def _uniform(run: FixtureRun, drift: float = 0.10):
    base = _duality_constants(run.gen, run.grid, run.seed, run.name)
    variants = {"grid-doubled": _duality_constants(run.gen, run.grid.doubled(), run.seed, run.name)}
    m = run.name.split("_")
    if len(m) == 2 and m[0] in ("CYC", "TORUS"):
        big = semigroup.fixture(f"{m[0]}_{2 * int(m[1])}")
        variants[f"size-doubled:{big.name}"] = _duality_constants(big, run.grid, run.seed, run.name)
    out = []
    for vk, vals in variants.items():
        for ck, c0 in base.items():
            c1 = vals[ck]
            if not (np.isfinite(c0) and np.isfinite(c1)) or c0 == 0:
                out.append(CheckReport("duality-uniformity", sweep_key=f"{ck}:{vk}", lhs=c1, rhs=c0,
                                       passed=True, notes="skipped: degenerate"))
                continue
            rel = abs(c1 - c0) / c0
            out.append(CheckReport("duality-uniformity", sweep_key=f"{ck}:{vk}", lhs=c1, rhs=c0, ratio=rel,
                                   budget=drift, passed=bool(rel <= drift)))
    return out


# --------------------------------------------------------------------------
# dyadic appendix (line fixtures)
# --------------------------------------------------------------------------
LINE_TS = tuple(np.geomspace(1e-2, 1e2, 16))


@family("appendix-kernel-bound", "bound c = 1", "heat kernel dominated by c phi^r/(phi^(1+r) + |x|^(1+r))",
        scope="line")
def _kb(run: FixtureRun, n: int = 1024, length: float = 48.0, c: float = 1.0):
    fix = dyadic.LineFixture(n, length)
    out = []
    for r in (1.5, 2.0, 3.0):
        reps = [dyadic.check_kernel_bound(fix, float(t), r, c) for t in LINE_TS]
        out.append(worst(reps).with_(sweep_key=f"r={r:g}"))
    return out


def _dyadic_fixture(n, length):
    fix = dyadic.LineFixture(n, length)
    return fix, dyadic.DyadicSystem(fix, fix.phi(1.0))


@family("appendix-A2", "exact 4", "E_k f <= 4 E_(k-1) f", scope="line", exact=True)
def _parent_domination(run: FixtureRun, n: int = 768, length: float = 32.0):
    fix, sysd = _dyadic_fixture(n, length)
    return [dyadic.check_parent_domination(fix, sysd, run.rng("appendix-A2"))]


@family("appendix-A3", "exact 3", "E_k f <= 3 E'_k E_k f", scope="line", exact=True)
def _shifted_domination(run: FixtureRun, n: int = 768, length: float = 32.0):
    fix, sysd = _dyadic_fixture(n, length)
    return [dyadic.check_shifted_domination(fix, sysd, run.rng("appendix-A3"))]


@family("appendix-A4", "record <= 1e4; drift <= 5% under N doubling", "kernel domination by dyadic averages",
        scope="line")
def _kernel_domination(run: FixtureRun, n: int = 768, length: float = 32.0, budget: float = 1e4):
    fix = dyadic.LineFixture(n, length)
    fine = dyadic.LineFixture(2 * n, length)
    reps = [dyadic.check_kernel_domination(fix, 1.0, r, budget, fix_fine=fine) for r in (1.5, 2.0, 3.0)]
    cs = [r.lhs for r in reps]
    mono = all(a <= b for a, b in zip(cs, cs[1:]))
    return [r.with_(notes=f"{r.notes}; nondecreasing in r: {mono}", passed=r.passed and mono) for r in reps]


@family("cor-A2-uniformity", "max/min <= 2; drift <= 10%", "L^(1/2) constant of the heat kernel on a line",
        scope="line")
def _lhalf_line(run: FixtureRun, n: int = 1024, length: float = 48.0, restarts: int = 3):
    rng = run.rng("cor-A2-uniformity")
    heat = dyadic.check_lhalf_uniformity(dyadic.LineFixture(n, length), dyadic.LineFixture(2 * n, length),
                                         LINE_TS, rng, restarts=restarts)
    cau = dyadic.check_lhalf_uniformity(dyadic.LineFixture(n, length, "cauchy"),
                                        dyadic.LineFixture(2 * n, length, "cauchy"),
                                        LINE_TS, rng, restarts=1)
    return [heat.with_(sweep_key="heat"), cau.with_(sweep_key="cauchy-control")]


REQUIRED = (
    "semigroup-axioms", "kadison-schwarz", "weighted-cauchy-schwarz", "min-alpha", "poisson-routes",
    "poisson-pde", "py-over-y", "lemma-2.2", "lemma-2.4", "thm-2.1-bound", "lhalf", "thm-2.3-necessity",
    "remark-2.5", "lemma-2.7", "prop-2.8", "gamma-positive", "gamma-tilde-identity", "lemma-3.2",
    "thm-3.1-carleson", "cor-3.3", "thm-3.5-duality", "prop-3.6", "prop-3.7", "prop-3.8-splits",
    "prop-3.10-derivative", "lemma-3.9", "lemma-3.11", "lemma-3.12", "thm-3.13-atom-h1", "eq-4.1", "thm-4.1",
    "lemma-4.2", "lemma-4.3", "thm-4.3-equivalence", "appendix-kernel-bound", "appendix-A2", "appendix-A3",
    "appendix-A4", "cor-A2-uniformity",
)

