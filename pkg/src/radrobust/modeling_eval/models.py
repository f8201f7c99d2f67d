"""Ridge-penalized logistic regression and shrunken-covariance LDA.

Both consume standardized feature matrices and produce real-valued scores
that increase with class-1 evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ModelError(ValueError):
    pass


class SingularityError(ModelError):
    """Pooled covariance singular at shrinkage 0; advise gamma > 0."""


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "lr"               # "lr" or "lda"
    lr_ridge: float = 1e-4
    lr_max_iter: int = 200
    lr_tol: float = 1e-8
    lda_shrinkage: float = 0.1

    def __post_init__(self):
        if self.kind not in ("lr", "lda"):
            raise ModelError(f"unknown model kind {self.kind!r}")
        if self.lr_ridge < 0:
            raise ModelError("lr_ridge must be >= 0")
        if not 0 <= self.lda_shrinkage <= 1:
            raise ModelError("lda_shrinkage must lie in [0, 1]")


@dataclass
class FittedModel:
    kind: str
    weights: np.ndarray
    intercept: float

    def scores(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights + self.intercept


@dataclass
class Standardizer:
    mean: np.ndarray
    sd: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "Standardizer":
        mean = x.mean(axis=0)
        sd = x.std(axis=0, ddof=0)
        sd = np.where(sd == 0, 1.0, sd)
        return cls(mean=mean, sd=sd)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.sd


def _check_two_classes(y: np.ndarray) -> None:
    counts = np.bincount(y.astype(int), minlength=2)
    if counts[0] < 2 or counts[1] < 2:
        raise ModelError(f"need >= 2 samples per class, got counts {counts.tolist()}")


def _lr_objective(x, y, w, b, ridge):
    z = x @ w + b
    # log(1 + exp(z)) - y*z, numerically stable
    nll = np.sum(np.logaddexp(0.0, z) - y * z)
    return nll + 0.5 * ridge * float(w @ w)


def fit_lr(x: np.ndarray, y: np.ndarray, spec: ModelSpec) -> FittedModel:
    """Damped Newton on the ridge-penalized negative log-likelihood.

    Iterates until the gradient L2 norm drops below spec.lr_tol (or the
    iteration cap); the intercept is not penalized.
    """
    _check_two_classes(y)
    n, p = x.shape
    w = np.zeros(p)
    b = 0.0
    ridge = spec.lr_ridge
    for _ in range(spec.lr_max_iter):
        z = x @ w + b
        prob = 1.0 / (1.0 + np.exp(-z))
        grad_w = x.T @ (prob - y) + ridge * w
        grad_b = float(np.sum(prob - y))
        gnorm = np.sqrt(grad_w @ grad_w + grad_b * grad_b)
        if gnorm < spec.lr_tol:
            break
        wt = np.clip(prob * (1.0 - prob), 1e-12, None)
        xw = x * wt[:, None]
        h = np.empty((p + 1, p + 1))
        h[:p, :p] = x.T @ xw + ridge * np.eye(p)
        h[:p, p] = xw.sum(axis=0)
        h[p, :p] = h[:p, p]
        h[p, p] = wt.sum()
        g = np.concatenate([grad_w, [grad_b]])
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(h, g, rcond=None)[0]
        # damping: halve until the objective decreases
        f0 = _lr_objective(x, y, w, b, ridge)
        t = 1.0
        for _ in range(30):
            w_new = w - t * step[:p]
            b_new = b - t * step[p]
            if _lr_objective(x, y, w_new, b_new, ridge) <= f0:
                break
            t *= 0.5
        w, b = w_new, b_new
    return FittedModel(kind="lr", weights=w, intercept=float(b))


def pooled_covariance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = len(y)
    cov = np.zeros((x.shape[1], x.shape[1]))
    for cls in (0, 1):
        xc = x[y == cls]
        d = xc - xc.mean(axis=0)
        cov += d.T @ d
    return cov / (n - 2)


def fit_lda(x: np.ndarray, y: np.ndarray, spec: ModelSpec) -> FittedModel:
    """Linear discriminant with shrunken pooled covariance
    (1 - gamma) * S + gamma * diag(S)."""
    _check_two_classes(y)
    mu0 = x[y == 0].mean(axis=0)
    mu1 = x[y == 1].mean(axis=0)
    s = pooled_covariance(x, y)
    gamma = spec.lda_shrinkage
    s_shrunk = (1.0 - gamma) * s + gamma * np.diag(np.diag(s))
    if gamma == 0.0:
        # unshrunk covariance may be numerically semi-definite yet pass a
        # Cholesky, so check conditioning explicitly
        eig = np.linalg.eigvalsh(s_shrunk)
        if eig[0] <= 1e-10 * max(eig[-1], 1e-300):
            raise SingularityError(
                "pooled covariance is singular; use lda_shrinkage > 0")
    try:
        chol = np.linalg.cholesky(s_shrunk)
    except np.linalg.LinAlgError:
        raise SingularityError(
            "pooled covariance is singular; use lda_shrinkage > 0") from None
    w = np.linalg.solve(chol.T, np.linalg.solve(chol, mu1 - mu0))
    n0 = int(np.sum(y == 0))
    n1 = int(np.sum(y == 1))
    b = -0.5 * float(w @ (mu0 + mu1)) + np.log(n1 / n0)
    return FittedModel(kind="lda", weights=w, intercept=float(b))


def fit(spec: ModelSpec, x: np.ndarray, y: np.ndarray) -> FittedModel:
    y = np.asarray(y, dtype=np.float64)
    if spec.kind == "lr":
        return fit_lr(x, y, spec)
    return fit_lda(x, y, spec)


def predict_score(model: FittedModel, x: np.ndarray) -> np.ndarray:
    return model.scores(x)
