"""Gibbs sampler for the mixture-of-low-rank-factorizations model.

Conjugacy comes from Polya-Gamma augmentation: given omega_il ~ PG(1, S_l)
tilted at the subject's component similarity, every Bernoulli edge factor
becomes Gaussian in (Z, factors). One sweep updates, in order:

    assignments -> omega -> Z -> factors -> mixing weights and T -> pY1

Assignments are drawn with omega collapsed out (plain Bernoulli
likelihoods) and omega is refreshed immediately afterwards, which together
amount to a joint draw of (assignments, omega) from their conditional; the
remaining blocks are standard conjugate conditionals. Factor updates run
in scaled coordinates Xbar = X sqrt(lambda) so the shrinkage auxiliaries
theta stay conjugate without changing the similarities.

All randomness flows through one Generator in a fixed order, so a seeded
run is reproducible bit for bit.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import expit, gammaln, logsumexp

from .core import (ComponentFactors, MixtureParameters, NetworkObservation,
                   edge_index_map)
from .pg import polya_gamma
from .priors import HyperParameters, log_prior_density, sample_prior

__all__ = [
    "SamplerConfig",
    "CohortData",
    "AugmentedState",
    "PosteriorDraws",
    "update_assignments",
    "update_omega",
    "update_Z",
    "update_factors",
    "update_weights_and_T",
    "update_pY",
    "gibbs_sweep",
    "log_joint",
    "run_chain",
]


@dataclass(frozen=True)
class SamplerConfig:
    """Chain length controls. kept draws = floor((n_iter - burn_in)/thin)."""

    n_iter: int = 5000
    burn_in: int = 1000
    thin: int = 4
    seed: int = 0
    record_pi: bool = False

    def __post_init__(self):
        if self.burn_in < 0 or self.n_iter <= self.burn_in:
            raise ValueError(f"need 0 <= burn_in < n_iter, got "
                             f"burn_in={self.burn_in}, n_iter={self.n_iter}")
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")
        if self.n_draws < 1:
            raise ValueError("configuration keeps zero draws")

    @property
    def n_draws(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin


class CohortData:
    """Stacked cohort: edge matrix A (n, L), labels y (n,), subject ids.

    The checksum is a sha256 over a canonical byte serialization of
    (V, ids, labels, edges); archives store it so downstream commands can
    confirm they are looking at the cohort the chain was fit to.
    """

    def __init__(self, A: np.ndarray, y: np.ndarray, subject_ids: tuple[str, ...],
                 V: int):
        self.A = np.ascontiguousarray(A, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.int64)
        self.subject_ids = tuple(subject_ids)
        self.V = int(V)
        self.L = edge_index_map(self.V).L
        if self.A.ndim != 2 or self.A.shape != (self.y.shape[0], self.L):
            raise ValueError("edge matrix shape does not match labels and V")
        if len(self.subject_ids) != self.y.shape[0]:
            raise ValueError("subject id count does not match labels")
        self.checksum = self._checksum()

    @classmethod
    def from_observations(cls, observations) -> "CohortData":
        obs = list(observations)
        if not obs:
            raise ValueError("empty cohort")
        V = obs[0].V
        for o in obs:
            if not isinstance(o, NetworkObservation):
                raise TypeError("cohort entries must be NetworkObservation")
            if o.V != V:
                raise ValueError(f"subject {o.subject_id!r} has {o.V} nodes, "
                                 f"expected {V}")
        ids = tuple(o.subject_id for o in obs)
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate subject ids in cohort")
        A = np.stack([o.edges for o in obs]).astype(np.float64)
        y = np.array([o.label for o in obs], dtype=np.int64)
        return cls(A, y, ids, V)

    def _checksum(self) -> str:
        hasher = hashlib.sha256()
        hasher.update(b"netmix-cohort-v1")
        hasher.update(np.uint32(self.V).tobytes())
        hasher.update(np.uint32(self.n).tobytes())
        for i, sid in enumerate(self.subject_ids):
            hasher.update(sid.encode("utf-8") + b"\x00")
            hasher.update(bytes([int(self.y[i])]))
            hasher.update(self.A[i].astype(np.uint8).tobytes())
        return hasher.hexdigest()

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def n0(self) -> int:
        return int(np.sum(self.y == 0))

    @property
    def n1(self) -> int:
        return int(np.sum(self.y == 1))

    @property
    def single_group(self) -> bool:
        return self.n0 == 0 or self.n1 == 0


def as_cohort(data) -> CohortData:
    """Coerce a list of observations (or pass through a CohortData)."""
    if isinstance(data, CohortData):
        return data
    return CohortData.from_observations(data)


@dataclass
class AugmentedState:
    """Everything the sweep conditions on: model parameters, shrinkage
    auxiliaries theta (H, R), component assignments (n,) in 0..H-1, and
    Polya-Gamma weights omega (n, L)."""

    params: MixtureParameters
    theta: np.ndarray
    assignments: np.ndarray
    omega: np.ndarray


def _component_log_liks(state: AugmentedState, cohort: CohortData) -> np.ndarray:
    """(n, H) matrix of log p(a_i | component h), omega marginalized out."""
    S = state.params.similarities()
    softplus = np.logaddexp(0.0, S).sum(axis=1)
    return cohort.A @ S.T - softplus


def update_assignments(state: AugmentedState, data,
                       rng: np.random.Generator) -> np.ndarray:
    """Draw assignments from Pr(G_i = h) proportional to nu_{h,y_i} times
    the component's Bernoulli likelihood of subject i."""
    cohort = as_cohort(data)
    loglik = _component_log_liks(state, cohort)
    lognu = np.full((2, state.params.H), -np.inf)
    with np.errstate(divide="ignore"):
        lognu[0] = np.log(state.params.nu0)
        lognu[1] = np.log(state.params.nu1)
    logpost = loglik + lognu[cohort.y]
    logpost -= logsumexp(logpost, axis=1, keepdims=True)
    probs = np.exp(logpost)
    cum = np.cumsum(probs, axis=1)
    u = rng.random(cohort.n)
    G = np.sum(cum < u[:, None] * cum[:, -1:], axis=1)
    return np.minimum(G, state.params.H - 1).astype(np.int64)


def update_omega(state: AugmentedState, data,
                 rng: np.random.Generator) -> np.ndarray:
    """Draw omega_il ~ PG(1, S_l of subject i's current component)."""
    cohort = as_cohort(data)
    S = state.params.similarities()
    return polya_gamma(S[state.assignments], rng)


def update_Z(state: AugmentedState, data, hyper: HyperParameters,
             rng: np.random.Generator) -> np.ndarray:
    """Conjugate normal update of the shared log-odds, edgewise.

    Posterior precision 1/z_var + sum_i omega_il; posterior mean is
    variance * (sum_i (a_il - 1/2 - omega_il D_l^{(G_i)}) + z_mean/z_var).
    """
    cohort = as_cohort(data)
    emap = edge_index_map(hyper.V)
    dev = np.stack([c.deviation(emap) for c in state.params.components])
    prec = 1.0 / hyper.z_var + state.omega.sum(axis=0)
    resid = ((cohort.A - 0.5).sum(axis=0)
             - (state.omega * dev[state.assignments]).sum(axis=0))
    mean = (resid + hyper.z_mean / hyper.z_var) / prec
    return mean + rng.standard_normal(hyper.L) / np.sqrt(prec)


def update_factors(state: AugmentedState, data, hyper: HyperParameters,
                   rng: np.random.Generator) -> tuple[tuple[ComponentFactors, ...],
                                                      np.ndarray]:
    """Per-component update of node factors and shrinkage weights.

    Works on Xbar = X sqrt(lambda) whose rows are conjugate normal given
    omega, then refreshes the multiplicative gamma auxiliaries theta
    (which changes lambda but not Xbar, hence not the similarities), and
    converts back to X = Xbar / sqrt(lambda).
    """
    cohort = as_cohort(data)
    emap = edge_index_map(hyper.V)
    V, R, H = hyper.V, hyper.R, hyper.H
    Z = state.params.Z
    shapes = np.full(R, hyper.mig_a2)
    shapes[0] = hyper.mig_a1

    new_components = []
    new_theta = np.empty((H, R))
    for h in range(H):
        comp = state.params.components[h]
        theta_h = state.theta[h].copy()
        lam = np.cumprod(1.0 / theta_h)
        Xbar = comp.X * np.sqrt(comp.lam)

        members = np.flatnonzero(state.assignments == h)
        W = state.omega[members].sum(axis=0)
        kappa = (cohort.A[members] - 0.5).sum(axis=0) - Z * W
        Wm = np.zeros((V, V))
        Km = np.zeros((V, V))
        Wm[emap.rows0, emap.cols0] = W
        Wm[emap.cols0, emap.rows0] = W
        Km[emap.rows0, emap.cols0] = kappa
        Km[emap.cols0, emap.rows0] = kappa

        # node-by-node Gaussian scan; empty components fall back to the
        # N(0, lambda) prior automatically (W = kappa = 0)
        for v in range(V):
            P = np.diag(1.0 / lam) + Xbar.T @ (Wm[v][:, None] * Xbar)
            b = Xbar.T @ Km[v]
            chol = np.linalg.cholesky(P)
            mean = np.linalg.solve(P, b)
            Xbar[v] = mean + solve_triangular(chol.T, rng.standard_normal(R),
                                              lower=False)

        # Metropolis column swaps: the likelihood only sees the column sum
        # sum_r Xbar_r Xbar_r^T, so swapping adjacent columns is accepted on
        # the Gaussian prior ratio alone. Without this the active column can
        # get stuck in a low-lambda slot and the ordering never mixes.
        col_ss = (Xbar * Xbar).sum(axis=0)
        for j in range(R - 1):
            log_acc = 0.5 * (1.0 / lam[j] - 1.0 / lam[j + 1]) * (col_ss[j] - col_ss[j + 1])
            if np.log(rng.random()) < log_acc:
                Xbar[:, [j, j + 1]] = Xbar[:, [j + 1, j]]
                col_ss[[j, j + 1]] = col_ss[[j + 1, j]]

        # shrinkage scan: theta_m | rest with the other thetas current
        for m in range(R):
            masked = theta_h.copy()
            masked[m] = 1.0
            tau = np.cumprod(masked)
            shape = shapes[m] + 0.5 * V * (R - m)
            rate = 1.0 + 0.5 * np.sum(tau[m:] * col_ss[m:])
            theta_h[m] = rng.gamma(shape, 1.0 / rate)

        lam_new = np.cumprod(1.0 / theta_h)
        new_components.append(ComponentFactors(X=Xbar / np.sqrt(lam_new),
                                               lam=lam_new))
        new_theta[h] = theta_h
    return tuple(new_components), new_theta


def _log_dirichlet_multinomial(counts: np.ndarray, conc: float) -> float:
    H = counts.shape[0]
    N = counts.sum()
    return float(gammaln(H * conc) - gammaln(H * conc + N)
                 + np.sum(gammaln(conc + counts) - gammaln(conc)))


def update_weights_and_T(state: AugmentedState, data, hyper: HyperParameters,
                         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, int]:
    """Joint draw of (T, nu0, nu1) given assignments, with nu collapsed out
    of the T step (Dirichlet-multinomial marginals)."""
    cohort = as_cohort(data)
    H = hyper.H
    counts0 = np.bincount(state.assignments[cohort.y == 0], minlength=H).astype(float)
    counts1 = np.bincount(state.assignments[cohort.y == 1], minlength=H).astype(float)
    conc = hyper.dirichlet_conc
    with np.errstate(divide="ignore"):
        prior_t1 = float(np.log(hyper.prior_T1))
        prior_t0 = float(np.log1p(-hyper.prior_T1))
    log_t1 = (prior_t1
              + _log_dirichlet_multinomial(counts0, conc)
              + _log_dirichlet_multinomial(counts1, conc))
    log_t0 = prior_t0 + _log_dirichlet_multinomial(counts0 + counts1, conc)
    prob_t1 = float(expit(log_t1 - log_t0))
    T = int(rng.random() < prob_t1)
    alpha = np.full(H, conc)
    if T == 1:
        nu0 = rng.dirichlet(alpha + counts0)
        nu1 = rng.dirichlet(alpha + counts1)
    else:
        nu0 = rng.dirichlet(alpha + counts0 + counts1)
        nu1 = nu0.copy()
    return nu0, nu1, T


def update_pY(state: AugmentedState, data, hyper: HyperParameters,
              rng: np.random.Generator) -> float:
    """Beta(a1 + n1, a0 + n0) draw for the group-1 prevalence."""
    cohort = as_cohort(data)
    return float(rng.beta(hyper.a1 + cohort.n1, hyper.a0 + cohort.n0))


def gibbs_sweep(state: AugmentedState, data, hyper: HyperParameters,
                rng: np.random.Generator) -> AugmentedState:
    """One full systematic scan; returns a new state."""
    cohort = as_cohort(data)
    G = update_assignments(state, cohort, rng)
    state = replace(state, assignments=G)
    omega = update_omega(state, cohort, rng)
    state = replace(state, omega=omega)
    Z = update_Z(state, cohort, hyper, rng)
    state = replace(state, params=replace(state.params, Z=Z))
    components, theta = update_factors(state, cohort, hyper, rng)
    state = replace(state,
                    params=replace(state.params, components=components),
                    theta=theta)
    nu0, nu1, T = update_weights_and_T(state, cohort, hyper, rng)
    pY1 = update_pY(state, cohort, hyper, rng)
    params = MixtureParameters(Z=state.params.Z, components=components,
                               nu0=nu0, nu1=nu1, pY1=pY1, T=T)
    return AugmentedState(params=params, theta=theta, assignments=G, omega=omega)


def log_joint(state: AugmentedState, data, hyper: HyperParameters) -> float:
    """Complete-data log joint of (params, assignments, labels, networks),
    with omega marginalized out. Used for the convergence trace."""
    cohort = as_cohort(data)
    lp = log_prior_density(state.params, state.theta, hyper)
    loglik = _component_log_liks(state, cohort)
    lp += float(loglik[np.arange(cohort.n), state.assignments].sum())
    nu_by_y = np.stack([state.params.nu0, state.params.nu1])
    picked = nu_by_y[cohort.y, state.assignments]
    with np.errstate(divide="ignore"):
        lp += float(np.log(picked).sum())
    lp += float(cohort.n1 * np.log(state.params.pY1)
                + cohort.n0 * np.log1p(-state.params.pY1))
    return lp


@dataclass
class PosteriorDraws:
    """Thinned post-burn-in draws, stacked along axis 0.

    nu has shape (K, 2, H) with group index first; assignments are stored
    0-based. pi is populated only when the chain ran with record_pi=True
    (it is recomputable from Z, X, lam). meta carries the dimensions,
    hyperparameters, sampler configuration, and the cohort checksum.
    """

    Z: np.ndarray
    X: np.ndarray
    lam: np.ndarray
    theta: np.ndarray
    nu: np.ndarray
    pY1: np.ndarray
    T: np.ndarray
    assignments: np.ndarray
    log_joint_trace: np.ndarray
    meta: dict
    pi: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        return self.Z.shape[0]

    def params_at(self, k: int) -> MixtureParameters:
        """Rebuild the validated parameter object for draw k."""
        comps = tuple(ComponentFactors(X=self.X[k, h], lam=self.lam[k, h])
                      for h in range(self.X.shape[1]))
        return MixtureParameters(Z=self.Z[k], components=comps,
                                 nu0=self.nu[k, 0], nu1=self.nu[k, 1],
                                 pY1=float(self.pY1[k]), T=int(self.T[k]))

    def component_probs(self, k: int) -> np.ndarray:
        """(H, L) edge probabilities of draw k."""
        if self.pi is not None:
            return self.pi[k]
        return self.params_at(k).edge_probabilities()


def _initial_state(cohort: CohortData, hyper: HyperParameters,
                   rng: np.random.Generator) -> AugmentedState:
    params, theta = sample_prior(hyper, rng)
    nu_by_y = np.stack([params.nu0, params.nu1])
    probs = nu_by_y[cohort.y]
    cum = np.cumsum(probs, axis=1)
    u = rng.random(cohort.n)
    G = np.minimum(np.sum(cum < u[:, None] * cum[:, -1:], axis=1),
                   hyper.H - 1).astype(np.int64)
    S = params.similarities()
    omega = polya_gamma(S[G], rng)
    return AugmentedState(params=params, theta=theta, assignments=G, omega=omega)


def run_chain(data, hyper: HyperParameters, config: SamplerConfig) -> PosteriorDraws:
    """Run the Gibbs sampler and collect thinned post-burn-in draws.

    Initialization is a fresh prior draw. Single-group cohorts are fit
    normally but flagged in meta (the group-difference test needs both
    groups). Identical data, hyper, and config give identical results.
    """
    cohort = as_cohort(data)
    if cohort.V != hyper.V:
        raise ValueError(f"cohort has V={cohort.V} nodes but "
                         f"hyperparameters say V={hyper.V}")
    rng = np.random.default_rng(config.seed)
    state = _initial_state(cohort, hyper, rng)

    K = config.n_draws
    V, R, H, L, n = hyper.V, hyper.R, hyper.H, hyper.L, cohort.n
    out = PosteriorDraws(
        Z=np.empty((K, L)),
        X=np.empty((K, H, V, R)),
        lam=np.empty((K, H, R)),
        theta=np.empty((K, H, R)),
        nu=np.empty((K, 2, H)),
        pY1=np.empty(K),
        T=np.empty(K, dtype=np.int8),
        assignments=np.empty((K, n), dtype=np.int32),
        log_joint_trace=np.empty(config.n_iter),
        meta={
            "V": V, "R": R, "H": H, "L": L,
            "n": n, "n0": cohort.n0, "n1": cohort.n1,
            "single_group": cohort.single_group,
            "subject_ids": list(cohort.subject_ids),
            "data_checksum": cohort.checksum,
            "hyper": {
                "V": hyper.V, "H": hyper.H, "R": hyper.R,
                "a0": hyper.a0, "a1": hyper.a1,
                "z_mean": hyper.z_mean, "z_var": hyper.z_var,
                "mig_a1": hyper.mig_a1, "mig_a2": hyper.mig_a2,
                "dirichlet_conc": hyper.dirichlet_conc,
                "prior_T1": hyper.prior_T1,
            },
            "sampler": {
                "n_iter": config.n_iter, "burn_in": config.burn_in,
                "thin": config.thin, "seed": config.seed,
                "record_pi": config.record_pi,
            },
        },
        pi=np.empty((K, H, L)) if config.record_pi else None,
    )

    k = 0
    for it in range(1, config.n_iter + 1):
        state = gibbs_sweep(state, cohort, hyper, rng)
        out.log_joint_trace[it - 1] = log_joint(state, cohort, hyper)
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            p = state.params
            out.Z[k] = p.Z
            for h in range(H):
                out.X[k, h] = p.components[h].X
                out.lam[k, h] = p.components[h].lam
            out.theta[k] = state.theta
            out.nu[k, 0] = p.nu0
            out.nu[k, 1] = p.nu1
            out.pY1[k] = p.pY1
            out.T[k] = p.T
            out.assignments[k] = state.assignments
            if out.pi is not None:
                out.pi[k] = p.edge_probabilities()
            k += 1
    assert k == K
    return out
