"""Soft-margin linear SVM trained from scratch.

The dual

    min_a  1/2 a^T Q a - e^T a,   Q_ij = y_i y_j <x_i, x_j>
    s.t.   sum_i a_i y_i = 0,  0 <= a_i <= C

is solved by pairwise coordinate ascent (SMO) with second-order working set
selection. For the linear kernel the primal weight vector w = sum a_i y_i x_i
is kept up to date, so nothing of size n x n is ever stored.

Features are z-scored before training; the scaler is part of the model.
"""
from __future__ import annotations

import configparser
import io
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .features import ClipFeature

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_C = 0.4
DEFAULT_TOL = 1e-4
DEFAULT_MAX_SWEEPS = 10_000

REAL = 1
FAKE = -1


class ConvergenceError(RuntimeError):
    """The solver hit its iteration cap before reaching the KKT tolerance."""


class ModelFormatError(ValueError):
    """A model document failed validation on load."""


def _as_matrix(features) -> np.ndarray:
    rows = [f.values if isinstance(f, ClipFeature) else np.asarray(f, dtype=np.float64)
            for f in features]
    if not rows:
        raise ValueError("no feature vectors")
    X = np.atleast_2d(np.stack(rows).astype(np.float64))
    return X


@dataclass
class TrainingSet:
    features: Sequence
    labels: Sequence[int]
    X: np.ndarray = field(init=False, repr=False)
    y: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise ValueError(
                f"{len(self.features)} feature vectors but {len(self.labels)} labels"
            )
        self.X = _as_matrix(self.features)
        y = np.asarray(self.labels, dtype=np.float64)
        if not np.all(np.isin(y, (REAL, FAKE))):
            raise ValueError("labels must be +1 (real) or -1 (fake)")
        if not (np.any(y == REAL) and np.any(y == FAKE)):
            raise ValueError("training set needs both classes")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("training features contain non-finite values")
        self.y = y


def fit_scaler(ts) -> tuple[np.ndarray, np.ndarray]:
    """Per-component mean and population std; near-zero std becomes 1."""
    X = ts.X if isinstance(ts, TrainingSet) else _as_matrix(ts)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a scaler on an empty set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std < 1e-12] = 1.0
    return mean, std


@dataclass
class DualSolution:
    alpha: np.ndarray
    w: np.ndarray
    b: float
    n_iter: int
    gap: float


def solve_dual(X, y, C: float, tol: float = DEFAULT_TOL,
               max_iter: Optional[int] = None) -> DualSolution:
    """SMO on the linear-kernel dual. X is (n, d), y in {+1, -1}."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if not C > 0:
        raise ValueError(f"C must be positive, got {C!r}")
    if max_iter is None:
        max_iter = DEFAULT_MAX_SWEEPS * max(n, 1)

    diag = np.einsum("ij,ij->i", X, X)
    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    G = -np.ones(n)  # gradient Q a - e
    pos = y > 0
    tau = 1e-12
    snap = 1e-12 * C

    it = 0
    gap = np.inf
    while True:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        score = -y * G
        s_up = np.where(up, score, -np.inf)
        i = int(np.argmax(s_up))
        m = s_up[i]
        M = np.min(np.where(low, score, np.inf))
        gap = m - M
        if gap <= tol:
            break
        if it >= max_iter:
            raise ConvergenceError(
                f"SMO did not converge in {max_iter} iterations (KKT gap {gap:.3g} > {tol:g})"
            )

        Ki = X @ X[i]
        b_t = m - score
        cand = low & (b_t > 0)
        a_t = diag[i] + diag - 2.0 * Ki
        a_t = np.where(a_t > 0, a_t, tau)
        obj = np.where(cand, -(b_t * b_t) / a_t, np.inf)
        j = int(np.argmin(obj))

        # move a_i by +y_i*lam and a_j by -y_j*lam; keeps sum a*y fixed
        lam = b_t[j] / a_t[j]
        lam = min(lam, C - alpha[i] if pos[i] else alpha[i])
        lam = min(lam, alpha[j] if pos[j] else C - alpha[j])

        alpha[i] += y[i] * lam
        alpha[j] -= y[j] * lam
        for k in (i, j):
            if alpha[k] < snap:
                alpha[k] = 0.0
            elif alpha[k] > C - snap:
                alpha[k] = C

        G += lam * y * (Ki - X @ X[j])
        w += lam * (X[i] - X[j])
        it += 1

    score = -y * G
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        b = float(np.mean(score[free]))
    else:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        hi = np.max(score[up]) if np.any(up) else np.inf
        lo = np.min(score[low]) if np.any(low) else -np.inf
        b = float(0.5 * (hi + lo)) if np.isfinite(hi) and np.isfinite(lo) else float(
            hi if np.isfinite(hi) else lo)
    # recompute w from alpha to shed accumulated drift
    w = (alpha * y) @ X
    return DualSolution(alpha=alpha, w=w, b=b, n_iter=it, gap=float(gap))


@dataclass(frozen=True, eq=False)
class SvmModel:
    weights: np.ndarray
    bias: float
    scaler_mean: np.ndarray
    scaler_std: np.ndarray
    penalty: float = DEFAULT_C
    faked_side: str = ""
    corpus_id: str = ""

    def __post_init__(self):
        for name in ("weights", "scaler_mean", "scaler_std"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        d = self.weights.size
        if self.scaler_mean.size != d or self.scaler_std.size != d:
            raise ValueError("weights and scaler vectors must share one dimension")
        if np.any(self.scaler_std <= 0):
            raise ValueError("scaler std entries must be strictly positive")
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "penalty", float(self.penalty))

    @property
    def dimension(self) -> int:
        return self.weights.size

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.scaler_mean) / self.scaler_std

    def scores(self, X) -> np.ndarray:
        """Decision values for a batch (n, d) of raw feature vectors."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dimension:
            raise ValueError(f"feature dimension {X.shape[1]} != model dimension {self.dimension}")
        return self.standardize(X) @ self.weights + self.bias


def sign_label(score) -> np.ndarray:
    # a score of exactly zero counts as real
    return np.where(np.asarray(score) >= 0, REAL, FAKE)


def train(ts: TrainingSet, C: float = DEFAULT_C, tol: float = DEFAULT_TOL,
          max_sweeps: int = DEFAULT_MAX_SWEEPS, faked_side: str = "",
          corpus_id: str = "") -> SvmModel:
    mean, std = fit_scaler(ts)
    Z = (ts.X - mean) / std
    sol = solve_dual(Z, ts.y, C, tol=tol, max_iter=max_sweeps * ts.X.shape[0])
    log.debug("SMO converged after %d iterations, gap %.3g, %d support vectors",
              sol.n_iter, sol.gap, int(np.count_nonzero(sol.alpha)))
    return SvmModel(sol.w, sol.b, mean, std, penalty=C, faked_side=faked_side,
                    corpus_id=corpus_id)


def decide(model: SvmModel, x) -> tuple[float, int]:
    values = x.values if isinstance(x, ClipFeature) else np.asarray(x, dtype=np.float64)
    if values.ndim != 1 or values.size != model.dimension:
        raise ValueError(f"feature dimension {values.size} != model dimension {model.dimension}")
    score = float(model.standardize(values) @ model.weights + model.bias)
    return score, int(sign_label(score))


# -- persistence -------------------------------------------------------------

def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def fmt_vector(v) -> str:
    return " ".join(fmt_float(x) for x in v)


def parse_vector(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split()], dtype=np.float64)


def new_parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep key case, e.g. "C"
    return cp


def model_to_section(model: SvmModel) -> dict[str, str]:
    return {
        "dimension": str(model.dimension),
        "C": fmt_float(model.penalty),
        "faked_side": model.faked_side,
        "corpus_id": model.corpus_id,
        "bias": fmt_float(model.bias),
        "weights": fmt_vector(model.weights),
        "scaler_mean": fmt_vector(model.scaler_mean),
        "scaler_std": fmt_vector(model.scaler_std),
    }


def model_from_section(sec) -> SvmModel:
    try:
        dim = int(sec["dimension"])
        vectors = {k: parse_vector(sec[k]) for k in ("weights", "scaler_mean", "scaler_std")}
        bad = {k: v.size for k, v in vectors.items() if v.size != dim}
        if bad:
            raise ModelFormatError(f"declared dimension {dim} but got sizes {bad}")
        return SvmModel(
            vectors["weights"], float(sec["bias"]), vectors["scaler_mean"],
            vectors["scaler_std"], penalty=float(sec["C"]),
            faked_side=sec.get("faked_side", ""), corpus_id=sec.get("corpus_id", ""),
        )
    except KeyError as exc:
        raise ModelFormatError(f"missing field {exc.args[0]!r}") from exc
    except ValueError as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(str(exc)) from exc


def check_version(cp: configparser.ConfigParser, kind: str) -> None:
    if not cp.has_section("meta"):
        raise ModelFormatError("missing [meta] section")
    meta = cp["meta"]
    if meta.get("kind") != kind:
        raise ModelFormatError(f"expected a {kind!r} document, found {meta.get('kind')!r}")
    version = meta.get("schema_version")
    if version != str(SCHEMA_VERSION):
        raise ModelFormatError(f"unsupported schema_version {version!r} (want {SCHEMA_VERSION})")


def dumps_config(cp: configparser.ConfigParser) -> str:
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def save_model(model: SvmModel, path) -> None:
    cp = new_parser()
    cp["meta"] = {"kind": "svm", "schema_version": str(SCHEMA_VERSION)}
    cp["svm"] = model_to_section(model)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_config(cp))


def load_model(path) -> SvmModel:
    cp = new_parser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    check_version(cp, "svm")
    if not cp.has_section("svm"):
        raise ModelFormatError("missing [svm] section")
    return model_from_section(cp["svm"])
