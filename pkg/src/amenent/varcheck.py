"""Numerical checks of the conditional variational principle and tail entropy.

On a finite effective group G the topological side h_G(P|Q) equals
log N(P^G, Q^G) / |G| exactly, and the measure side is the maximum of
(H_mu(P^G) - H_mu(Q^G)) / |G| over shift-invariant mu. Invariant measures
are parametrized by the mass of each shift orbit, so invariance holds by
construction and the feasible set is a simplex.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .counting import CELL_CAP, counting_N, topo_cond_sequence
from .defaults import worker_count
from .measures import ConfigurationSpace, dyn_entropy_table
from .symbolic import PATTERN_CAP, cover_power, folner_partition, refines

POLYTOPE_CAP = 4096
EPS_FLOOR = 1e-12


class VarCheckError(ValueError):
    pass


@dataclass
class InvariantPolytope:
    space: ConfigurationSpace
    orbits: list[list[int]]
    generators: list
    constraints: list[str]

    @property
    def n_variables(self) -> int:
        return self.space.n_configs

    @property
    def dimension(self) -> int:
        return len(self.orbits) - 1

    def orbit_sizes(self) -> np.ndarray:
        return np.array([len(o) for o in self.orbits], dtype=float)

    def to_measure(self, q: np.ndarray) -> np.ndarray:
        """Configuration probabilities for orbit masses q (uniform within orbits)."""
        p = np.zeros(self.n_variables)
        for mass, orbit in zip(q, self.orbits):
            p[orbit] = mass / len(orbit)
        return p

    def residuals(self, p: np.ndarray) -> dict:
        inv = max(float(np.max(np.abs(p[self._shift_rows(g)] - p))) for g in self.space.elements)
        return {"invariance": inv,
                "simplex": max(abs(float(p.sum()) - 1.0), float(max(0.0, -p.min())))}

    def _shift_rows(self, g) -> np.ndarray:
        shifted = self.space.shifted(g)
        n = len(self.space.elements)
        codes = shifted @ (self.space.k ** np.arange(n - 1, -1, -1, dtype=np.int64))
        return np.array([self.space.code_to_row[int(c)] for c in codes])

    def describe(self) -> dict:
        return {"variables": self.n_variables, "orbits": len(self.orbits),
                "dimension": self.dimension, "constraints": self.constraints}


def build_polytope(system, cap: int = POLYTOPE_CAP) -> InvariantPolytope:
    eff = system.effective_group
    if not eff.is_finite:
        raise VarCheckError("the invariant polytope needs a finite effective group")
    space = ConfigurationSpace(system, cap)
    rank = eff.rank
    gens = [tuple(1 if i == j else 0 for i in range(rank)) for j in range(rank)]
    constraints = [f"p(shift_{list(g)} x) = p(x)" for g in gens] + ["sum p = 1", "p >= 0"]
    return InvariantPolytope(space, space.orbits(), gens, constraints)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(v) + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


class EntropyDifference:
    """q -> (H(P^G) - H(Q^G)) / |G| in orbit coordinates, with its gradient."""

    def __init__(self, poly: InvariantPolytope, P, Q):
        space = poly.space
        everything = space.elements
        ids_P = space.cell_ids([space.labels(P)], everything)
        ids_Q = space.cell_ids([space.labels(Q)], everything)
        self.A_P = self._cell_matrix(ids_P, poly.orbits)
        self.A_Q = self._cell_matrix(ids_Q, poly.orbits)
        self.size = len(everything)

    @staticmethod
    def _cell_matrix(ids, orbits) -> np.ndarray:
        A = np.zeros((int(ids.max()) + 1, len(orbits)))
        for o, orbit in enumerate(orbits):
            for row in orbit:
                A[ids[row], o] += 1.0 / len(orbit)
        return A

    @staticmethod
    def _H(m: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(m > 0, m * np.log(np.where(m > 0, m, 1.0)), 0.0)
        return -t.sum(axis=-1)

    def value(self, q: np.ndarray) -> float:
        return float((self._H(self.A_P @ q) - self._H(self.A_Q @ q)) / self.size)

    def batch(self, Qs: np.ndarray) -> np.ndarray:
        return (self._H(Qs @ self.A_P.T) - self._H(Qs @ self.A_Q.T)) / self.size

    def gradient(self, q: np.ndarray) -> np.ndarray:
        mp = np.maximum(self.A_P @ q, EPS_FLOOR)
        mq = np.maximum(self.A_Q @ q, EPS_FLOOR)
        return (-(self.A_P.T @ (np.log(mp) + 1.0)) + self.A_Q.T @ (np.log(mq) + 1.0)) / self.size


def gradient_residual(obj: EntropyDifference, rng, points: int = 10, h: float = 1e-5) -> float:
    """Worst relative gap between analytic and central-difference gradients."""
    n = obj.A_P.shape[1]
    worst = 0.0
    for _ in range(points):
        q = 0.8 * rng.dirichlet(np.ones(n)) + 0.2 / n
        g = obj.gradient(q)
        fd = np.empty(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd[i] = (obj.value(q + e) - obj.value(q - e)) / (2 * h)
        worst = max(worst, float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1.0)))
    return worst


def _ascend(obj: EntropyDifference, q: np.ndarray, max_iter: int = 3000, sigma: float = 1e-4):
    f = obj.value(q)
    for _ in range(max_iter):
        g = obj.gradient(q)
        t = 1.0
        while True:
            cand = project_simplex(q + t * g)
            fc = obj.value(cand)
            if fc >= f + sigma * float(g @ (cand - q)) or t < 1e-14:
                break
            t *= 0.5
        step = float(np.linalg.norm(cand - q))
        if fc < f:
            break
        q, f = cand, fc
        if step < 1e-13:
            break
    return q, f


@dataclass
class OptimizerConfig:
    restarts: int = 20
    seed: int = 0
    max_iter: int = 3000
    tol: float = 1e-3
    gradient_points: int = 10


def maximize_entropy_difference(system, P, Q, config: OptimizerConfig | None = None,
                                poly: InvariantPolytope | None = None, threads: int | None = None):
    """Multi-restart projected gradient ascent; returns (value, maximizer, details)."""
    cfg = config or OptimizerConfig()
    if not refines(P, Q):
        raise VarCheckError("P must refine Q")
    poly = poly or build_polytope(system)
    obj = EntropyDifference(poly, P, Q)
    n = len(poly.orbits)

    def start(r: int) -> np.ndarray:
        if r == 0:
            return poly.orbit_sizes() / poly.orbit_sizes().sum()
        return np.random.default_rng([cfg.seed, r]).dirichlet(np.ones(n))

    def run(r: int):
        return _ascend(obj, start(r), cfg.max_iter)

    threads = threads or worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(r) for r in range(cfg.restarts)]
    best = max(range(len(results)), key=lambda r: (results[r][1], -r))
    q, value = results[best]
    residual = gradient_residual(obj, np.random.default_rng([cfg.seed, 10**6]), cfg.gradient_points)
    p = poly.to_measure(q)
    return value, p, {"restart": best, "restarts": cfg.restarts, "orbit_masses": q.tolist(),
                      "gradient_residual": residual, "feasibility": poly.residuals(p)}


def _compositions(total: int, parts: int):
    """Integer vectors of length ``parts`` summing to ``total``, yielded in chunks."""
    if parts == 1:
        yield np.array([[total]], dtype=np.int64)
        return
    if parts == 2:
        a = np.arange(total + 1, dtype=np.int64)
        yield np.stack([a, total - a], axis=1)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield np.concatenate([np.full((len(rest), 1), first, dtype=np.int64), rest], axis=1)


def grid_oracle(system, P, Q, resolution: float = 1 / 200, max_dimension: int = 4,
                poly: InvariantPolytope | None = None) -> float:
    """Brute-force maximum of the entropy difference over a grid of orbit masses."""
    poly = poly or build_polytope(system)
    if poly.dimension > max_dimension:
        raise VarCheckError(f"reduced polytope dimension {poly.dimension} exceeds {max_dimension}")
    obj = EntropyDifference(poly, P, Q)
    R = int(round(1 / resolution))
    n = len(poly.orbits)
    best = -math.inf
    for chunk in _compositions(R, n):
        best = max(best, float(obj.batch(chunk / R).max()))
    return best


@dataclass
class VarPrincipleReport:
    counting_N: int
    counting_value: float
    optimizer_value: float
    gap: float
    maximizer: list
    restarts: int
    gradient_residual: float
    feasibility: dict
    passed: bool
    grid_value: float | None = None
    polytope: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def varprinciple_report(system, P, Q, config: OptimizerConfig | None = None,
                        grid_resolution: float | None = None, cell_cap: int = CELL_CAP,
                        cap: int = PATTERN_CAP) -> VarPrincipleReport:
    cfg = config or OptimizerConfig()
    poly = build_polytope(system)
    G = poly.space.elements
    res = counting_N(cover_power(P, G, cap), cover_power(Q, G, cap), cell_cap=cell_cap, cap=cap)
    counting_value = res.log_value / len(G)
    value, p, info = maximize_entropy_difference(system, P, Q, cfg, poly)
    grid = grid_oracle(system, P, Q, grid_resolution, poly=poly) if grid_resolution else None
    gap = abs(counting_value - value)
    passed = gap <= cfg.tol and value <= counting_value + 1e-6
    return VarPrincipleReport(res.n_value, counting_value, value, gap, p.tolist(), cfg.restarts,
                              info["gradient_residual"], info["feasibility"], passed, grid,
                              poly.describe())


@dataclass
class TailTable:
    entries: dict  # (k, m) -> value or None when missing
    k_max: int
    m_max: int
    n_max: int
    sups: dict = field(default_factory=dict)
    estimate: float | None = None
    exact: bool = False

    def to_dict(self) -> dict:
        return {"k_max": self.k_max, "m_max": self.m_max, "n_max": self.n_max,
                "entries": [{"k": k, "m": m, "value": v} for (k, m), v in sorted(self.entries.items())],
                "sup_over_m": {str(k): v for k, v in sorted(self.sups.items())},
                "h_star_estimate": self.estimate, "exact": self.exact,
                "note": "finite truncation of inf_k sup_m h(P_m | P_k)"}


def tail_table(system, k_max: int = 3, m_max: int = 5, n_max: int = 6,
               cell_cap: int = CELL_CAP, cap: int = PATTERN_CAP) -> TailTable:
    """T[k][m] = final row of the conditional sequence of P_m given P_k."""
    parts = {}
    for j in range(1, max(k_max, m_max) + 1):
        try:
            parts[j] = folner_partition(system, j, cap)
        except RuntimeError:
            parts[j] = None
    entries: dict = {}
    for k in range(1, k_max + 1):
        for m in range(k, m_max + 1):
            if parts[k] is None or parts[m] is None:
                entries[(k, m)] = None
                continue
            table = topo_cond_sequence(system, parts[m], parts[k], n_max, cell_cap=cell_cap, cap=cap)
            entries[(k, m)] = None if table.truncated or not table.rows else table.final
    sups = {}
    for k in range(1, k_max + 1):
        vals = [v for (kk, m), v in entries.items() if kk == k and v is not None]
        sups[k] = max(vals) if vals else None
    finite = [v for v in sups.values() if v is not None]
    return TailTable(entries, k_max, m_max, n_max, sups, min(finite) if finite else None,
                     exact=system.group.is_finite)


def theta_k(mu, system, k: int, n_max: int, k_fine: int | None = None, cap: int = PATTERN_CAP) -> dict:
    """theta_k(mu) = h(mu) - h_k(mu), with h(mu) estimated on the partition P_{k_fine}."""
    k_fine = max(k, 4) if k_fine is None else k_fine
    if k_fine < k:
        raise ValueError("k_fine must be >= k")
    h_fine = dyn_entropy_table(mu, folner_partition(system, k_fine, cap), n_max, cap=cap)
    h_k = dyn_entropy_table(mu, folner_partition(system, k, cap), n_max, cap=cap)
    exact = system.group.is_finite
    return {"k": k, "k_fine": k_fine, "h_estimate": h_fine.running_inf,
            "h_k_estimate": h_k.running_inf, "theta": h_fine.running_inf - h_k.running_inf,
            "exact": exact, "label": "exact" if exact else "estimate"}
