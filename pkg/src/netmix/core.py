"""Model mathematics for populations of binary undirected networks.

A network on ``V`` labeled nodes is stored as the vector of its
``L = V(V-1)/2`` lower-triangular adjacency entries, ordered column-wise:
``(2,1), (3,1), ..., (V,1), (3,2), ..., (V,2), ..., (V,V-1)``.

Each mixture component ``h`` defines per-edge log-odds
``S(h) = Z + D(h)`` where ``Z`` is shared across components and
``D(h)_l = sum_r lambda(h)_r X(h)_vr X(h)_ur`` is a low-rank symmetric
deviation. Edge probabilities are ``pi(h) = logistic(S(h))`` and a network
in group ``y`` is generated by picking component ``h`` with probability
``nu_hy`` and drawing independent Bernoulli edges.

Everything here is pure: randomness enters only through an explicit
``numpy.random.Generator``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EdgeIndexMap",
    "edge_index_map",
    "edge_count",
    "node_count",
    "NetworkObservation",
    "ComponentFactors",
    "MixtureParameters",
    "vectorize",
    "matricize",
    "component_similarity",
    "logistic_map",
    "bernoulli_log_pmf",
    "component_log_pmf",
    "conditional_log_pmf",
    "marginal_log_pmf",
    "joint_log_pmf",
    "sample_network",
    "sample_cohort",
    "sample_joint_cohort",
]

# float64 logistic saturates to exactly 0/1 for |s| > ~37; keep pi in the
# open interval so log terms stay finite.
_PI_LO = np.nextafter(0.0, 1.0)
_PI_HI = np.nextafter(1.0, 0.0)


def edge_count(V: int) -> int:
    """Number of unordered node pairs, L = V(V-1)/2."""
    if V < 2:
        raise ValueError(f"need at least 2 nodes, got V={V}")
    return V * (V - 1) // 2


def node_count(L: int) -> int:
    """Inverse of edge_count; errors if L is not triangular."""
    V = int(round((1 + np.sqrt(1 + 8 * L)) / 2))
    if L < 1 or edge_count(max(V, 2)) != L:
        raise ValueError(f"L={L} is not V(V-1)/2 for any integer V")
    return V


class EdgeIndexMap:
    """Bijection between node pairs (v, u), v > u, and linear edge indices.

    Nodes are labeled 1..V; linear indices run 1..L, column-wise down the
    lower triangle. Zero-based companion arrays ``rows0``/``cols0`` (node
    positions of edge slot ``l-1``) are exposed for vectorized work.
    """

    def __init__(self, V: int):
        self.V = int(V)
        self.L = edge_count(self.V)
        cols = np.concatenate([np.full(self.V - 1 - u, u, dtype=np.int64)
                               for u in range(self.V - 1)])
        rows = np.concatenate([np.arange(u + 1, self.V, dtype=np.int64)
                               for u in range(self.V - 1)])
        rows.setflags(write=False)
        cols.setflags(write=False)
        self.rows0 = rows
        self.cols0 = cols

    def edge_index(self, v: int, u: int) -> int:
        """Linear index in 1..L of the edge between nodes v and u (1-based)."""
        if not (1 <= u < v <= self.V):
            raise ValueError(f"need 1 <= u < v <= V={self.V}, got (v={v}, u={u})")
        offset = (u - 1) * self.V - u * (u - 1) // 2
        return offset + (v - u)

    def edge_pair(self, l: int) -> tuple[int, int]:
        """Node pair (v, u), v > u, of linear edge index l in 1..L."""
        if not (1 <= l <= self.L):
            raise ValueError(f"edge index {l} outside 1..L={self.L}")
        return int(self.rows0[l - 1]) + 1, int(self.cols0[l - 1]) + 1

    def __repr__(self) -> str:  # pragma: no cover
        return f"EdgeIndexMap(V={self.V}, L={self.L})"


@functools.lru_cache(maxsize=64)
def edge_index_map(V: int) -> EdgeIndexMap:
    """Cached EdgeIndexMap for a node count."""
    return EdgeIndexMap(V)


def vectorize(adjacency: np.ndarray) -> np.ndarray:
    """Lower-triangular column-wise vector of a symmetric binary adjacency.

    The diagonal is ignored. Raises on non-square, asymmetric, or
    non-binary off-diagonal input.
    """
    A = np.asarray(adjacency)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    V = A.shape[0]
    emap = edge_index_map(V)
    lower = A[emap.rows0, emap.cols0]
    upper = A[emap.cols0, emap.rows0]
    if not np.array_equal(lower, upper):
        bad = int(np.flatnonzero(lower != upper)[0])
        v, u = emap.edge_pair(bad + 1)
        raise ValueError(f"adjacency not symmetric at nodes ({v}, {u})")
    edges = np.asarray(lower)
    if not np.isin(edges, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1 off the diagonal")
    return edges.astype(np.int8)


def matricize(edges: np.ndarray, V: int | None = None) -> np.ndarray:
    """Symmetric adjacency with zero diagonal from an edge vector."""
    e = np.asarray(edges)
    if e.ndim != 1:
        raise ValueError("edge vector must be one-dimensional")
    if V is None:
        V = node_count(e.shape[0])
    emap = edge_index_map(V)
    if e.shape[0] != emap.L:
        raise ValueError(f"edge vector length {e.shape[0]} != L={emap.L} for V={V}")
    A = np.zeros((V, V), dtype=e.dtype)
    A[emap.rows0, emap.cols0] = e
    A[emap.cols0, emap.rows0] = e
    return A


@dataclass(frozen=True)
class NetworkObservation:
    """One subject: binary edge vector, group label, identifier."""

    edges: np.ndarray
    label: int
    subject_id: str

    def __post_init__(self):
        e = np.asarray(self.edges)
        if e.ndim != 1:
            raise ValueError("edges must be a 1-d vector")
        if not np.isin(e, (0, 1)).all():
            raise ValueError(f"non-binary edge values for subject {self.subject_id!r}")
        node_count(e.shape[0])  # validates triangular length
        object.__setattr__(self, "edges", e.astype(np.int8))
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")

    @property
    def V(self) -> int:
        return node_count(self.edges.shape[0])


@dataclass(frozen=True)
class ComponentFactors:
    """Low-rank deviation of one component: node factors X (V, R) and
    nonnegative column weights lam (R,)."""

    X: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        lam = np.asarray(self.lam, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be (V, R)")
        if lam.ndim != 1 or lam.shape[0] != X.shape[1]:
            raise ValueError(f"lam must have length R={X.shape[1]}")
        if not np.isfinite(X).all() or not np.isfinite(lam).all():
            raise ValueError("factors must be finite")
        if (lam < 0).any():
            raise ValueError("lam entries must be nonnegative")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "lam", lam)

    @property
    def V(self) -> int:
        return self.X.shape[0]

    @property
    def R(self) -> int:
        return self.X.shape[1]

    def deviation(self, emap: EdgeIndexMap) -> np.ndarray:
        """Edge-wise bilinear form D_l = sum_r lam_r X_vr X_ur."""
        if emap.V != self.V:
            raise ValueError(f"factor V={self.V} != map V={emap.V}")
        XW = self.X * self.lam
        return np.einsum("lr,lr->l", XW[emap.rows0], self.X[emap.cols0])


_SIMPLEX_TOL = 1e-10


def _check_simplex(w: np.ndarray, name: str) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if (w < 0).any() or not np.isfinite(w).all():
        raise ValueError(f"{name} entries must be finite and nonnegative")
    if abs(w.sum() - 1.0) > _SIMPLEX_TOL:
        raise ValueError(f"{name} must sum to 1 within {_SIMPLEX_TOL}, got {w.sum()!r}")
    return w


@dataclass(frozen=True)
class MixtureParameters:
    """Full generative state: shared log-odds Z, per-component factors,
    group-specific mixing weights, group prevalence, and the dependence
    indicator T (T=0 forces nu0 == nu1 entrywise)."""

    Z: np.ndarray
    components: tuple[ComponentFactors, ...]
    nu0: np.ndarray
    nu1: np.ndarray
    pY1: float
    T: int

    def __post_init__(self):
        Z = np.asarray(self.Z, dtype=np.float64)
        if Z.ndim != 1 or not np.isfinite(Z).all():
            raise ValueError("Z must be a finite 1-d vector")
        V = node_count(Z.shape[0])
        comps = tuple(self.components)
        if not comps:
            raise ValueError("need at least one component")
        for h, c in enumerate(comps):
            if not isinstance(c, ComponentFactors):
                raise TypeError(f"component {h} is not ComponentFactors")
            if c.V != V:
                raise ValueError(f"component {h} has V={c.V}, expected {V}")
            if c.R != comps[0].R:
                raise ValueError("components must share a common rank R")
        nu0 = _check_simplex(self.nu0, "nu0")
        nu1 = _check_simplex(self.nu1, "nu1")
        H = len(comps)
        if nu0.shape[0] != H or nu1.shape[0] != H:
            raise ValueError(f"mixing weights must have length H={H}")
        if self.T not in (0, 1):
            raise ValueError(f"T must be 0 or 1, got {self.T!r}")
        if self.T == 0 and not np.array_equal(nu0, nu1):
            raise ValueError("T=0 requires nu0 == nu1 entrywise")
        if not (0.0 < self.pY1 < 1.0):
            raise ValueError(f"pY1 must lie strictly in (0, 1), got {self.pY1!r}")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "nu0", nu0)
        object.__setattr__(self, "nu1", nu1)

    @property
    def V(self) -> int:
        return node_count(self.Z.shape[0])

    @property
    def L(self) -> int:
        return self.Z.shape[0]

    @property
    def H(self) -> int:
        return len(self.components)

    @property
    def R(self) -> int:
        return self.components[0].R

    def nu(self, y: int) -> np.ndarray:
        if y not in (0, 1):
            raise ValueError(f"group label must be 0 or 1, got {y!r}")
        return self.nu1 if y == 1 else self.nu0

    def similarities(self) -> np.ndarray:
        """(H, L) matrix of per-component edge log-odds S(h) = Z + D(h)."""
        emap = edge_index_map(self.V)
        return np.stack([self.Z + c.deviation(emap) for c in self.components])

    def edge_probabilities(self) -> np.ndarray:
        """(H, L) matrix of per-component edge probabilities."""
        return logistic_map(self.similarities())

    def group_edge_probability(self, y: int) -> np.ndarray:
        """Marginal edge probabilities within group y: sum_h nu_hy pi(h)."""
        return self.nu(y) @ self.edge_probabilities()


def component_similarity(Z: np.ndarray, factors: ComponentFactors,
                         emap: EdgeIndexMap) -> np.ndarray:
    """Edge log-odds S = Z + D for one component."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.shape != (emap.L,):
        raise ValueError(f"Z must have length L={emap.L}, got {Z.shape}")
    return Z + factors.deviation(emap)


def logistic_map(S: np.ndarray) -> np.ndarray:
    """Elementwise logistic 1/(1+exp(-S)), clipped to the open unit interval.

    Raises on non-finite input. The clip keeps log pi and log(1-pi) finite;
    it changes values only where float64 would round to exactly 0 or 1.
    """
    S = np.asarray(S, dtype=np.float64)
    if not np.isfinite(S).all():
        raise ValueError("log-odds must be finite")
    with np.errstate(over="ignore"):
        p = 1.0 / (1.0 + np.exp(-S))
    return np.clip(p, _PI_LO, _PI_HI)


def _check_edges(a: np.ndarray, L: int | None = None) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 1:
        raise ValueError("edge vector must be 1-d")
    if not np.isin(a, (0, 1)).all():
        raise ValueError("edge vector entries must be 0 or 1")
    if L is not None and a.shape[0] != L:
        raise ValueError(f"edge vector length {a.shape[0]} != {L}")
    return a.astype(np.float64)


def _check_probs(pi: np.ndarray) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.float64)
    if pi.ndim != 1:
        raise ValueError("probability vector must be 1-d")
    if not ((pi > 0.0) & (pi < 1.0)).all():
        raise ValueError("edge probabilities must lie strictly in (0, 1)")
    return pi


def bernoulli_log_pmf(y: int, p: float) -> float:
    """log Bernoulli(y; p) with the log(0) = -inf convention at p in {0,1}."""
    if y not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {y!r}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    q = p if y == 1 else 1.0 - p
    return float(np.log(q)) if q > 0.0 else float("-inf")


def component_log_pmf(a: np.ndarray, pi: np.ndarray) -> float:
    """Log pmf of independent Bernoulli edges: sum a log pi + (1-a) log(1-pi)."""
    pi = _check_probs(pi)
    a = _check_edges(a, pi.shape[0])
    return float(a @ np.log(pi) + (1.0 - a) @ np.log1p(-pi))


def _mixture_log_pmf(a: np.ndarray, params: MixtureParameters,
                     weights: np.ndarray) -> float:
    a = _check_edges(a, params.L)
    S = params.similarities()
    # softplus(s) = log(1+e^s) evaluated stably; per-component log pmf is
    # sum_l a_l S_l - softplus(S_l)
    sp = np.logaddexp(0.0, S)
    comp_lp = S @ a - sp.sum(axis=1)
    mask = weights > 0.0
    if not mask.any():
        return float("-inf")
    m = comp_lp[mask].max()
    return float(m + np.log(np.sum(weights[mask] * np.exp(comp_lp[mask] - m))))


def conditional_log_pmf(a: np.ndarray, params: MixtureParameters, y: int) -> float:
    """log p(a | y) = log sum_h nu_hy prod_l Bern(a_l; pi(h)_l)."""
    return _mixture_log_pmf(a, params, params.nu(y))


def marginal_log_pmf(a: np.ndarray, params: MixtureParameters) -> float:
    """log p(a) with component weights averaged over the group prevalence."""
    w = (1.0 - params.pY1) * params.nu0 + params.pY1 * params.nu1
    return _mixture_log_pmf(a, params, w)


def joint_log_pmf(y: int, a: np.ndarray, params: MixtureParameters) -> float:
    """log p(y, a) = log Bern(y; pY1) + log p(a | y)."""
    return bernoulli_log_pmf(y, params.pY1) + conditional_log_pmf(a, params, y)


def _categorical(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-cdf categorical draws from uniforms; deterministic given u."""
    cum = np.cumsum(p)
    idx = np.searchsorted(cum, u * cum[-1], side="right")
    return np.minimum(idx, p.shape[0] - 1)


def sample_network(pi: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli edge vector with probabilities pi."""
    pi = _check_probs(pi)
    return (rng.random(pi.shape[0]) < pi).astype(np.int8)


def _draw_group(params: MixtureParameters, y: int, n: int, start: int,
                rng: np.random.Generator, pi_all: np.ndarray):
    G = _categorical(params.nu(y), rng.random(n))
    obs = []
    for k in range(n):
        edges = sample_network(pi_all[G[k]], rng)
        obs.append(NetworkObservation(edges=edges, label=y,
                                      subject_id=f"s{start + k:04d}"))
    return obs, G


def sample_cohort(params: MixtureParameters, n0: int, n1: int,
                  rng: np.random.Generator) -> list[NetworkObservation]:
    """Simulate a labeled cohort: n0 group-0 subjects then n1 group-1."""
    if n0 < 0 or n1 < 0 or n0 + n1 == 0:
        raise ValueError(f"need n0, n1 >= 0 with n0+n1 > 0, got ({n0}, {n1})")
    pi_all = params.edge_probabilities()
    obs0, _ = _draw_group(params, 0, n0, 0, rng, pi_all)
    obs1, _ = _draw_group(params, 1, n1, n0, rng, pi_all)
    return obs0 + obs1


def sample_joint_cohort(params: MixtureParameters, n: int,
                        rng: np.random.Generator):
    """Simulate n subjects with labels drawn from the prevalence pY1.

    Returns (observations, component assignments). Used by procedures that
    need the full joint draw, e.g. prior-predictive checks.
    """
    if n <= 0:
        raise ValueError(f"need n > 0, got {n}")
    y = (rng.random(n) < params.pY1).astype(np.int64)
    pi_all = params.edge_probabilities()
    nu_by_y = np.stack([params.nu0, params.nu1])
    G = np.empty(n, dtype=np.int64)
    obs = []
    for i in range(n):
        G[i] = _categorical(nu_by_y[y[i]], rng.random(1))[0]
        edges = sample_network(pi_all[G[i]], rng)
        obs.append(NetworkObservation(edges=edges, label=int(y[i]),
                                      subject_id=f"s{i:04d}"))
    return obs, G
