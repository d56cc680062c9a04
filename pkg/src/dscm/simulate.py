"""Euler-Maruyama simulation of SDE systems and statistical checks on paths."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from .sde import expr as E
from .sde.system import Diagnostic, SdeSystem, UnsolvableError, check_unique_solvability

# paths per RNG block: block b of driver j uses the stream (seed, j, b)
BLOCK = 256


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    n_paths: int = 1000
    seed: int = 0
    horizon: Optional[float] = None  # defaults to the model horizon
    scheme: str = "euler_maruyama"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.scheme != "euler_maruyama":
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def steps(self, horizon: float) -> int:
        k = int(round(horizon / self.dt))
        if k < 1 or abs(k * self.dt - horizon) > 1e-9 * max(1.0, horizon):
            raise ValueError(f"horizon {horizon} is not a multiple of dt={self.dt}")
        return k


@dataclass
class PathEnsemble:
    grid: np.ndarray                    # (K+1,)
    values: Dict[str, np.ndarray]       # process -> (n_paths, K+1)
    drivers: Dict[str, np.ndarray]      # driver -> increments (n_paths, K)
    driver_init: Dict[str, float]
    seed: int
    dt: float

    @property
    def n_paths(self) -> int:
        return next(iter(self.values.values())).shape[0]

    def index(self, t: float) -> int:
        k = int(round(t / self.dt))
        if not 0 <= k < len(self.grid) or abs(self.grid[k] - t) > 1e-9 + 1e-6 * self.dt:
            raise ValueError(f"time {t} is not on the grid")
        return k

    def path(self, name: str) -> np.ndarray:
        """Paths of a process or of a driver (cumulated increments)."""
        if name in self.values:
            return self.values[name]
        if name in self.drivers:
            inc = self.drivers[name]
            out = np.empty((inc.shape[0], inc.shape[1] + 1))
            out[:, 0] = self.driver_init[name]
            np.cumsum(inc, axis=1, out=out[:, 1:])
            out[:, 1:] += self.driver_init[name]
            return out
        raise KeyError(name)

    def value(self, name: str, t: float) -> np.ndarray:
        return self.path(name)[:, self.index(t)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "process", "path", "value"])
        for name in sorted(self.values):
            arr = self.values[name]
            for i in range(arr.shape[0]):
                for k, t in enumerate(self.grid):
                    w.writerow([repr(float(t)), name, i, repr(float(arr[i, k]))])
        return buf.getvalue()

    def save_npz(self, path) -> None:
        arrays = {"grid": self.grid, "seed": np.array(self.seed), "dt": np.array(self.dt)}
        arrays.update({f"value:{k}": v for k, v in self.values.items()})
        arrays.update({f"driver:{k}": v for k, v in self.drivers.items()})
        arrays.update({f"driver_init:{k}": np.array(v) for k, v in self.driver_init.items()})
        np.savez(path, **arrays)

    @classmethod
    def load_npz(cls, path) -> "PathEnsemble":
        with np.load(path) as z:
            values = {k.split(":", 1)[1]: z[k] for k in z.files if k.startswith("value:")}
            drivers = {k.split(":", 1)[1]: z[k] for k in z.files if k.startswith("driver:")}
            init = {k.split(":", 1)[1]: float(z[k]) for k in z.files
                    if k.startswith("driver_init:")}
            return cls(z["grid"], values, drivers, init, int(z["seed"]), float(z["dt"]))


def _rng(seed: int, stream: int, index: int, block: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream, index, block])


def driver_increments(sys: SdeSystem, cfg: SimConfig, seed: Optional[int] = None
                      ) -> Dict[str, np.ndarray]:
    seed = cfg.seed if seed is None else seed
    T = cfg.horizon if cfg.horizon is not None else sys.horizon
    K = cfg.steps(T)
    n = cfg.n_paths
    out = {}
    for j, d in enumerate(sys.drivers):
        if d.kind == "time":
            out[d.name] = np.full((n, K), cfg.dt)
            continue
        if d.kind == "constant":
            out[d.name] = np.zeros((n, K))
            continue
        arr = np.empty((n, K))
        for b, lo in enumerate(range(0, n, BLOCK)):
            hi = min(n, lo + BLOCK)
            rng = _rng(seed, 0, j, b)
            if d.kind == "brownian":
                arr[lo:hi] = np.sqrt(cfg.dt) * rng.standard_normal((hi - lo, K))
            else:
                arr[lo:hi] = rng.poisson(d.param * cfg.dt, (hi - lo, K))
        out[d.name] = arr
    return out


def initial_values(sys: SdeSystem, cfg: SimConfig) -> Dict[str, np.ndarray]:
    n = cfg.n_paths
    out = {}
    for j, p in enumerate(sys.processes):
        if p.init.kind == "constant":
            out[p.name] = np.full(n, float(p.init.mean))
            continue
        arr = np.empty(n)
        for b, lo in enumerate(range(0, n, BLOCK)):
            hi = min(n, lo + BLOCK)
            arr[lo:hi] = _rng(cfg.seed, 1, j, b).standard_normal(hi - lo)
        out[p.name] = p.init.mean + np.sqrt(p.init.var) * arr
    return out


def simulate(sys: SdeSystem, cfg: SimConfig,
             increments: Optional[Mapping[str, np.ndarray]] = None,
             lookahead: bool = False) -> PathEnsemble:
    """Euler-Maruyama with integrands evaluated at the left grid point.

    ``increments`` overrides the driver increments. ``lookahead`` uses the
    next step's increment instead of the current one; it breaks
    adaptedness and exists only to test :func:`check_adaptedness`.
    """
    report = check_unique_solvability(sys)
    if not report:
        v, bad = report.witness
        raise UnsolvableError([Diagnostic(
            f"{v} has integrator(s) {', '.join(sorted(bad))} in its own cycle")])
    T = cfg.horizon if cfg.horizon is not None else sys.horizon
    K = cfg.steps(T)
    n = cfg.n_paths
    grid = np.arange(K + 1) * cfg.dt
    inc = dict(driver_increments(sys, cfg)) if increments is None else dict(increments)
    x0 = initial_values(sys, cfg)
    # time-major working copies: row k holds every path at grid point k
    vt: Dict[str, np.ndarray] = {}
    inc_t = {u: np.ascontiguousarray(h.T) for u, h in inc.items()}
    procs = {p.name: p for p in sys.processes}

    def dH(u: str) -> np.ndarray:
        if u in inc_t:
            return inc_t[u]
        return np.diff(vt[u], axis=0)

    zero = np.zeros(n)
    for comp in report.order:
        members = [v for v in sys.names if v in comp]
        if not members:
            continue
        for v in members:
            vt[v] = np.empty((K + 1, n))
            vt[v][0] = x0[v]
        incs = {v: [dH(u) for u in procs[v].beta] for v in members}
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(K):
                env = {v: vt[v][k] for v in vt}
                env[E.TIME] = grid[k]
                for v in members:
                    p = procs[v]
                    step = np.zeros(n)
                    for g, h in zip(p.g, incs[v]):
                        if lookahead:
                            dh = h[k + 1] if k + 1 < K else zero
                        else:
                            dh = h[k]
                        step += E.evaluate(g, env) * dh
                    vt[v][k + 1] = vt[v][k] + step
                    if not np.all(np.isfinite(vt[v][k + 1])):
                        raise SimulationError(f"{v} overflowed at t={grid[k + 1]:g}")
    values = {v: np.ascontiguousarray(vt[v].T) for v in sys.names}
    init = {d.name: (d.param if d.kind == "constant" else 0.0) for d in sys.drivers}
    return PathEnsemble(grid, values, inc, init, cfg.seed, cfg.dt)


def check_adaptedness(sys: SdeSystem, cfg: SimConfig, t_cut: float,
                      lookahead: bool = False) -> bool:
    """Replace every driver increment after ``t_cut`` and check that the
    paths up to ``t_cut`` are bit-identical."""
    T = cfg.horizon if cfg.horizon is not None else sys.horizon
    K = cfg.steps(T)
    k_cut = int(round(t_cut / cfg.dt))
    if not 0 <= k_cut <= K or abs(k_cut * cfg.dt - t_cut) > 1e-9:
        raise ValueError(f"t_cut={t_cut} is not on the grid")
    base = driver_increments(sys, cfg)
    other = driver_increments(sys, cfg, seed=cfg.seed + 1)
    for d in sys.drivers:
        if d.kind in ("time", "constant"):
            other[d.name] = other[d.name] + 1.0  # still perturb deterministic drivers
    swapped = {k: np.concatenate([v[:, :k_cut], other[k][:, k_cut:]], axis=1)
               for k, v in base.items()}
    a = simulate(sys, cfg, base, lookahead)
    b = simulate(sys, cfg, swapped, lookahead)
    return all(np.array_equal(a.values[v][:, :k_cut + 1], b.values[v][:, :k_cut + 1])
               for v in sys.names)


# ---------------------------------------------------------------------------
# tests
# ---------------------------------------------------------------------------

Var = Tuple[str, float]


@dataclass(frozen=True)
class CIResult:
    statistic: float
    p_value: float
    independent: bool


def _columns(ens: PathEnsemble, vs: Sequence[Var]) -> np.ndarray:
    if not vs:
        return np.empty((ens.n_paths, 0))
    return np.column_stack([ens.value(name, t) for name, t in vs])


def _cov(x: np.ndarray) -> np.ndarray:
    x = x - x.mean(0)
    return (x.T @ x) / (x.shape[0] - 1)


def partial_corr_from_cov(cov: np.ndarray, n: int, ia: Sequence[int], ib: Sequence[int],
                          ic: Sequence[int] = (), alpha: float = 0.01) -> CIResult:
    """Test ``a _||_ b | c`` from a sample covariance matrix over ``n`` rows.

    Single variables use Fisher's z on the partial correlation; sets use
    Bartlett's chi-square on the partial canonical correlations.
    """
    ia, ib, ic = list(ia), list(ib), list(ic)
    idx = ic + ia + ib
    sub = cov[np.ix_(idx, idx)]
    d = np.sqrt(np.diag(sub))
    if np.any(d <= 0) or np.linalg.eigvalsh(sub / np.outer(d, d))[0] < 1e-10:
        raise SimulationError("singular covariance among tested variables")
    k, p, q = len(ic), len(ia), len(ib)
    ab = slice(k, k + p + q)
    part = sub[ab, ab]
    if k:
        scc = sub[:k, :k]
        part = part - sub[ab, :k] @ np.linalg.solve(scc, sub[:k, ab])
    saa, sbb, sab = part[:p, :p], part[p:, p:], part[:p, p:]
    if p == 1 and q == 1:
        r = float(sab[0, 0] / np.sqrt(saa[0, 0] * sbb[0, 0]))
        r = min(max(r, -1 + 1e-15), 1 - 1e-15)
        z = np.arctanh(r) * np.sqrt(n - k - 3)
        pv = 2 * stats.norm.sf(abs(z))
        return CIResult(float(z), float(pv), bool(pv > alpha))
    la = np.linalg.cholesky(saa)
    lb = np.linalg.cholesky(sbb)
    m = np.linalg.solve(la, sab) @ np.linalg.inv(lb).T
    rho = np.clip(np.linalg.svd(m, compute_uv=False), 0, 1 - 1e-15)
    stat = -(n - k - 1 - (p + q + 1) / 2) * np.sum(np.log1p(-rho ** 2))
    pv = stats.chi2.sf(stat, p * q)
    return CIResult(float(stat), float(pv), bool(pv > alpha))


def partial_corr_test(xa: np.ndarray, xb: np.ndarray, xc: np.ndarray,
                      alpha: float = 0.01) -> CIResult:
    k, p, q = xc.shape[1], xa.shape[1], xb.shape[1]
    cov = _cov(np.column_stack([xa, xb, xc]))
    return partial_corr_from_cov(cov, xa.shape[0], range(p), range(p, p + q),
                                 range(p + q, p + q + k), alpha)


def _reduce(a, b, c):
    a, b, c = [tuple(map(tuple, s)) for s in (a, b, c)]
    if set(a) & set(b):
        return None
    sc = set(c)
    return [v for v in a if v not in sc], [v for v in b if v not in sc], list(c)


def ci_test(ens: PathEnsemble, a: Sequence[Var], b: Sequence[Var], c: Sequence[Var] = (),
            alpha: float = 0.01) -> CIResult:
    """Fisher-z test of zero partial correlation of the evaluations ``a``
    and ``b`` given ``c`` across paths (Bartlett's test for sets)."""
    red = _reduce(a, b, c)
    if red is None:
        return CIResult(float("inf"), 0.0, False)
    a, b, c = red
    if not a or not b:
        return CIResult(0.0, 1.0, True)
    return partial_corr_test(_columns(ens, a), _columns(ens, b), _columns(ens, c), alpha)


class CachedCI:
    """ci_test over a fixed set of evaluations, sharing one covariance matrix."""

    def __init__(self, ens: PathEnsemble, variables: Sequence[Var]):
        self.variables = [tuple(v) for v in variables]
        self.pos = {v: i for i, v in enumerate(self.variables)}
        self.n = ens.n_paths
        self.cov = _cov(_columns(ens, self.variables))

    def test(self, a: Sequence[Var], b: Sequence[Var], c: Sequence[Var] = (),
             alpha: float = 0.01) -> CIResult:
        red = _reduce(a, b, c)
        if red is None:
            return CIResult(float("inf"), 0.0, False)
        a, b, c = red
        if not a or not b:
            return CIResult(0.0, 1.0, True)
        ix = [[self.pos[v] for v in s] for s in (a, b, c)]
        return partial_corr_from_cov(self.cov, self.n, *ix, alpha=alpha)


@dataclass(frozen=True)
class LocalIndependenceResult:
    holds: bool
    score: float  # smallest Bonferroni-adjusted p-value
    p_values: Tuple[float, ...] = field(default=())


def local_independence_test(ens: PathEnsemble, a: Iterable[str], b: Iterable[str],
                            c: Iterable[str] = (), horizon_lags: int = 2,
                            alpha: float = 0.01, n_times: int = 5,
                            lag_step: Optional[int] = None) -> LocalIndependenceResult:
    """Granger-style test of ``X_a -/-> X_b | X_c``.

    For each target in ``b`` and each of ``n_times`` fixed grid times, the
    next increment of the target is regressed on ``horizon_lags`` lagged
    values of ``b`` and ``c`` with and without those of ``a``; the F-tests
    are Bonferroni-combined.
    """
    a, b, c = sorted(set(a)), sorted(set(b)), sorted(set(c))
    if not b:
        raise ValueError("target set must be nonempty")
    known = set(b) | set(c)
    extra = [x for x in a if x not in known]
    if not extra:
        return LocalIndependenceResult(True, 1.0, ())
    K = len(ens.grid) - 1
    step = lag_step or max(1, K // 50)
    first = step * (horizon_lags - 1)
    if first >= K:
        raise ValueError("not enough grid points for the requested lags")
    times = np.unique(np.linspace(first, K - 1, n_times).round().astype(int))
    paths = {x: ens.path(x) for x in set(a) | set(b) | set(c)}
    pv = []
    for target in b:
        for k in times:
            y = paths[target][:, k + 1] - paths[target][:, k]
            lags = [k - j * step for j in range(horizon_lags)]
            reduced = [paths[x][:, i] for x in sorted(known) for i in lags]
            added = [paths[x][:, i] for x in extra for i in lags]
            pv.append(_nested_f(y, reduced, added))
    m = len(pv)
    adj = min(1.0, min(pv) * m)
    return LocalIndependenceResult(bool(adj > alpha), float(adj), tuple(pv))


def _nested_f(y: np.ndarray, reduced: List[np.ndarray], added: List[np.ndarray]) -> float:
    """p-value of the F-test for adding ``added`` to an intercept plus
    ``reduced``, both fitted by one QR decomposition."""
    n = len(y)
    x = np.column_stack([np.ones(n)] + reduced + added)
    # drop constant columns (e.g. a process pinned by intervention)
    keep = np.ptp(x, axis=0) > 0
    keep[0] = True
    k0 = int(keep[:1 + len(reduced)].sum())
    x = x[:, keep]
    q = x.shape[1] - k0
    if q == 0:
        return 1.0
    qm, r = np.linalg.qr(x)
    scale = np.linalg.norm(x, axis=0)
    if np.any(np.abs(np.diag(r)) <= 1e-10 * scale):
        raise SimulationError("collinear regressors in local independence test")
    qy = qm.T @ y
    rss1 = float(np.sum((y - qm @ qy) ** 2))
    rss0 = rss1 + float(np.sum(qy[k0:] ** 2))
    df2 = n - x.shape[1]
    if rss1 <= 0:
        return 0.0 if rss0 > 0 else 1.0
    f = ((rss0 - rss1) / q) / (rss1 / df2)
    return float(special.fdtrc(q, df2, f))
