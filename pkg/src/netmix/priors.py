"""Prior distributions: sampling and log-density evaluation.

Shared log-odds Z gets an iid normal prior, node factors are iid standard
normal, and the column weights lambda_r follow a multiplicative inverse
gamma chain: lambda_r = prod_{m<=r} 1/theta_m with theta_1 ~ Gamma(mig_a1, 1)
and theta_m ~ Gamma(mig_a2, 1) for m >= 2 (rate parameterization), which
stochastically shrinks higher columns toward zero. Mixing weights are
Dirichlet, either shared across groups (T=0) or group-specific (T=1), and
the group prevalence pY1 is Beta(a1, a0).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import ComponentFactors, MixtureParameters, edge_count

__all__ = [
    "HyperParameters",
    "sample_prior",
    "log_prior_density",
    "mixing_weights_log_prior",
]


@dataclass(frozen=True)
class HyperParameters:
    """Hyperparameters of the full model for a fixed node count V.

    dirichlet_conc defaults to 1/H so the total concentration is 1
    regardless of the truncation level.
    """

    V: int
    H: int = 15
    R: int = 10
    a0: float = 1.0
    a1: float = 1.0
    z_mean: float = 0.0
    z_var: float = 10.0
    mig_a1: float = 2.5
    mig_a2: float = 3.5
    dirichlet_conc: float | None = None
    prior_T1: float = 0.5

    def __post_init__(self):
        edge_count(self.V)  # validates V >= 2
        if self.H < 1 or self.R < 1:
            raise ValueError(f"need H >= 1 and R >= 1, got H={self.H}, R={self.R}")
        for name in ("a0", "a1", "z_var", "mig_a1", "mig_a2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.dirichlet_conc is None:
            object.__setattr__(self, "dirichlet_conc", 1.0 / self.H)
        if self.dirichlet_conc <= 0:
            raise ValueError("dirichlet_conc must be positive")
        if not (0.0 <= self.prior_T1 <= 1.0):
            raise ValueError("prior_T1 must lie in [0, 1]")
        if not np.isfinite(self.z_mean):
            raise ValueError("z_mean must be finite")

    @property
    def L(self) -> int:
        return edge_count(self.V)


def _theta_shapes(hyper: HyperParameters) -> np.ndarray:
    shapes = np.full(hyper.R, hyper.mig_a2)
    shapes[0] = hyper.mig_a1
    return shapes


def sample_prior(hyper: HyperParameters,
                 rng: np.random.Generator) -> tuple[MixtureParameters, np.ndarray]:
    """Draw (parameters, theta) from the prior.

    theta is the (H, R) array of multiplicative inverse gamma auxiliaries;
    lambda(h) = cumprod(1/theta(h)) row-wise. Draw order is fixed
    (pY1, Z, theta, X per component, T, weights) so a seeded generator
    reproduces byte-identical results.
    """
    pY1 = float(rng.beta(hyper.a1, hyper.a0))
    Z = rng.normal(hyper.z_mean, np.sqrt(hyper.z_var), hyper.L)
    shapes = _theta_shapes(hyper)
    theta = rng.gamma(shape=shapes, scale=1.0, size=(hyper.H, hyper.R))
    lam = np.cumprod(1.0 / theta, axis=1)
    comps = tuple(ComponentFactors(X=rng.standard_normal((hyper.V, hyper.R)),
                                   lam=lam[h])
                  for h in range(hyper.H))
    T = int(rng.random() < hyper.prior_T1)
    alpha = np.full(hyper.H, hyper.dirichlet_conc)
    if T == 1:
        nu0 = rng.dirichlet(alpha)
        nu1 = rng.dirichlet(alpha)
    else:
        nu0 = rng.dirichlet(alpha)
        nu1 = nu0.copy()
    params = MixtureParameters(Z=Z, components=comps, nu0=nu0, nu1=nu1,
                               pY1=pY1, T=T)
    return params, theta


def _dirichlet_log_pdf(w: np.ndarray, alpha: np.ndarray) -> float:
    # -inf on the simplex boundary by the usual density convention
    if (w <= 0.0).any():
        return float("-inf")
    return float(gammaln(alpha.sum()) - gammaln(alpha).sum()
                 + ((alpha - 1.0) * np.log(w)).sum())


def mixing_weights_log_prior(nu0: np.ndarray, nu1: np.ndarray, T: int,
                             hyper: HyperParameters) -> float:
    """Log prior of (nu0, nu1, T) including the Bernoulli(prior_T1) mass.

    A T=0 state with nu0 != nu1 is outside the support and scores -inf.
    """
    nu0 = np.asarray(nu0, dtype=np.float64)
    nu1 = np.asarray(nu1, dtype=np.float64)
    alpha = np.full(hyper.H, hyper.dirichlet_conc)
    with np.errstate(divide="ignore"):
        log_t1 = float(np.log(hyper.prior_T1))
        log_t0 = float(np.log1p(-hyper.prior_T1))
    if T == 1:
        return (log_t1
                + _dirichlet_log_pdf(nu0, alpha)
                + _dirichlet_log_pdf(nu1, alpha))
    if T == 0:
        if not np.array_equal(nu0, nu1):
            return float("-inf")
        return log_t0 + _dirichlet_log_pdf(nu0, alpha)
    raise ValueError(f"T must be 0 or 1, got {T!r}")


def log_prior_density(params: MixtureParameters, theta: np.ndarray,
                      hyper: HyperParameters) -> float:
    """Joint log prior density of a full parameter state.

    theta must be consistent with the stored lambda values
    (lambda(h) = cumprod(1/theta(h)) within 1e-8 relative tolerance);
    inconsistent pairs raise because they do not identify a single state.
    """
    if params.V != hyper.V or params.H != hyper.H or params.R != hyper.R:
        raise ValueError("parameter dimensions do not match hyperparameters")
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (hyper.H, hyper.R):
        raise ValueError(f"theta must be (H, R)={hyper.H, hyper.R}")
    if (theta <= 0.0).any():
        raise ValueError("theta entries must be positive")
    lam = np.cumprod(1.0 / theta, axis=1)
    stored = np.stack([c.lam for c in params.components])
    if not np.allclose(stored, lam, rtol=1e-8, atol=1e-12):
        raise ValueError("lambda inconsistent with cumprod(1/theta)")

    lp = 0.0
    # pY1 ~ Beta(a1, a0); Beta(x; a, b) on pY1 with a = a1 pairing group 1
    a, b = hyper.a1, hyper.a0
    lp += float(gammaln(a + b) - gammaln(a) - gammaln(b)
                + (a - 1.0) * np.log(params.pY1)
                + (b - 1.0) * np.log1p(-params.pY1))
    # Z iid normal
    resid = params.Z - hyper.z_mean
    lp += float(-0.5 * hyper.L * np.log(2.0 * np.pi * hyper.z_var)
                - 0.5 * (resid @ resid) / hyper.z_var)
    # factors iid standard normal
    for c in params.components:
        lp += float(-0.5 * c.X.size * np.log(2.0 * np.pi)
                    - 0.5 * np.sum(c.X * c.X))
    # theta: independent gammas, rate 1
    shapes = _theta_shapes(hyper)
    lp += float(np.sum((shapes - 1.0) * np.log(theta) - theta
                       - gammaln(shapes)))
    # mixing weights and dependence indicator
    lp += mixing_weights_log_prior(params.nu0, params.nu1, params.T, hyper)
    return lp
