"""Surrogate models of expensive objectives: RBFN, epsilon-SVR, Ordinary Kriging.

All three train on the same input/output database and predict scalar costs.
Kriging additionally returns a confidence value (its standard deviation),
which is what the confidence-enhanced optimizer consumes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

NUGGET_INITIAL = 1e-10
NUGGET_MAX = 1e-4


class SurrogateFitError(RuntimeError):
    """Raised when a model cannot be fitted to the given training set."""


class TrainingSet:
    """Ordered input/output database of (design vector, cost) samples.

    Duplicate inputs (exact equality) are merged keeping the latest cost, so
    adaptive loops may resubmit a point without breaking interpolating models.
    """

    def __init__(self, inputs=None, targets=None):
        self._x: list[np.ndarray] = []
        self._y: list[float] = []
        if inputs is not None:
            targets = [] if targets is None else targets
            if len(inputs) != len(targets):
                raise ValueError("inputs and targets must have equal length")
            for x, y in zip(inputs, targets):
                self.add(x, y)

    def __len__(self) -> int:
        return len(self._y)

    @property
    def dims(self) -> int:
        if not self._x:
            raise ValueError("empty training set has no dimension")
        return self._x[0].size

    @property
    def inputs(self) -> np.ndarray:
        return np.array(self._x, dtype=float).reshape(len(self._x), -1)

    @property
    def targets(self) -> np.ndarray:
        return np.array(self._y, dtype=float)

    def add(self, x, y) -> None:
        x = np.asarray(x, dtype=float).ravel()
        y = float(y)
        if self._x and x.size != self._x[0].size:
            raise ValueError("sample dimension does not match the training set")
        for i, existing in enumerate(self._x):
            if np.array_equal(existing, x):
                self._y[i] = y
                return
        self._x.append(x.copy())
        self._y.append(y)

    def copy(self) -> "TrainingSet":
        out = TrainingSet()
        out._x = [x.copy() for x in self._x]
        out._y = list(self._y)
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        k = self.dims if self._x else 0
        writer.writerow([f"x{i + 1}" for i in range(k)] + ["phi"])
        for x, y in zip(self._x, self._y):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(y))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path) -> "TrainingSet":
        with open(path, newline="") as fh:
            return cls.from_csv_text(fh.read())

    @classmethod
    def from_csv_text(cls, text: str) -> "TrainingSet":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if not header or header[-1] != "phi":
            raise ValueError("training-set CSV must end with a 'phi' column")
        out = cls()
        for row in reader:
            if not row:
                continue
            out.add([float(v) for v in row[:-1]], float(row[-1]))
        return out


@dataclass(frozen=True)
class Prediction:
    """Predicted cost, plus a confidence value when the model provides one."""

    value: float
    confidence: Optional[float] = None


def _pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _mean_nn_distance(x: np.ndarray) -> float:
    """Mean nearest-neighbour distance among training inputs (width heuristic)."""
    if x.shape[0] < 2:
        return 1.0
    d2 = _pairwise_sq_dists(x, x)
    np.fill_diagonal(d2, np.inf)
    nn = np.sqrt(d2.min(axis=1))
    mean = float(nn.mean())
    return mean if mean > 0 else 1.0


def _closest_pair(x: np.ndarray) -> tuple[int, int]:
    d2 = _pairwise_sq_dists(x, x)
    np.fill_diagonal(d2, np.inf)
    i, j = np.unravel_index(int(np.argmin(d2)), d2.shape)
    return int(min(i, j)), int(max(i, j))


# ---------------------------------------------------------------------------
# Radial basis function network
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RbfnModel:
    """Gaussian RBF interpolant: weighted sum of kernels centred on the samples."""

    centers: np.ndarray
    weights: np.ndarray
    width: float

    def predict(self, x) -> Prediction:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.centers.shape[1]:
            raise ValueError("query dimension does not match the model")
        return Prediction(value=float(self.predict_batch(x[None, :])[0]))

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        d2 = _pairwise_sq_dists(np.asarray(x, dtype=float), self.centers)
        return np.exp(-d2 / (2.0 * self.width**2)) @ self.weights


def fit_rbfn(data: TrainingSet, width: Optional[float] = None) -> RbfnModel:
    """Fit an exactly-interpolating Gaussian RBF network.

    The default width is the mean nearest-neighbour distance among the
    training inputs. Near-duplicate inputs make the kernel matrix singular;
    the error then names the offending pair.
    """
    if len(data) < 1:
        raise SurrogateFitError("RBFN needs at least one training sample")
    x, y = data.inputs, data.targets
    if width is None:
        width = _mean_nn_distance(x)
    if width <= 0:
        raise ValueError("width must be positive")
    kernel = np.exp(-_pairwise_sq_dists(x, x) / (2.0 * width**2))
    try:
        weights = np.linalg.solve(kernel, y)
    except np.linalg.LinAlgError as exc:
        i, j = _closest_pair(x)
        raise SurrogateFitError(
            f"singular RBFN interpolation matrix; closest inputs are samples {i} and {j}"
        ) from exc
    residual = np.linalg.norm(kernel @ weights - y)
    if residual > 1e-8 * (1.0 + np.linalg.norm(y)):
        i, j = _closest_pair(x)
        raise SurrogateFitError(
            f"ill-conditioned RBFN system (residual {residual:.3e}); "
            f"closest inputs are samples {i} and {j}"
        )
    return RbfnModel(centers=x, weights=weights, width=float(width))


# ---------------------------------------------------------------------------
# epsilon-insensitive support vector regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SvrModel:
    """Gaussian-kernel SVR: sparse kernel expansion plus bias, epsilon tube."""

    support_inputs: np.ndarray
    support_coeffs: np.ndarray
    bias: float
    kernel_width: float
    epsilon: float
    regularization: float

    def predict(self, x) -> Prediction:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.support_inputs.shape[1]:
            raise ValueError("query dimension does not match the model")
        return Prediction(value=float(self.predict_batch(x[None, :])[0]))

    def predict_batch(self, x: np.ndarray) -> np.ndarray:
        d2 = _pairwise_sq_dists(np.asarray(x, dtype=float), self.support_inputs)
        k = np.exp(-d2 / (2.0 * self.kernel_width**2))
        return k @ self.support_coeffs + self.bias


def fit_svr(data: TrainingSet, epsilon: Optional[float] = None,
            c: Optional[float] = None, kernel_width: Optional[float] = None,
            tol: float = 1e-6, max_passes: int = 10_000) -> SvrModel:
    """Fit an epsilon-SVR by pairwise coordinate ascent on the dual.

    Works on the net coefficients gamma_s = alpha_s - beta_s in [-C, C] with
    sum(gamma) = 0. Each step moves the maximal-violating pair and is exact
    for that pair. Stops when the duality gap falls below ``tol`` (relative
    to the primal scale) or errors out after ``max_passes`` updates.

    Defaults: epsilon is 1% of the target range, C is 100x the target range,
    and the kernel width follows the RBFN nearest-neighbour rule.
    """
    if len(data) < 1:
        raise SurrogateFitError("SVR needs at least one training sample")
    x, y = data.inputs, data.targets
    n = len(y)
    target_range = float(y.max() - y.min())
    if epsilon is None:
        epsilon = 0.01 * target_range if target_range > 0 else 1e-3
    if c is None:
        c = 100.0 * target_range if target_range > 0 else 1.0
    if kernel_width is None:
        kernel_width = _mean_nn_distance(x)
    if epsilon < 0 or c <= 0 or kernel_width <= 0:
        raise ValueError("need epsilon >= 0, c > 0, kernel_width > 0")

    kernel = np.exp(-_pairwise_sq_dists(x, x) / (2.0 * kernel_width**2))
    gamma = np.zeros(n)
    f = np.zeros(n)  # kernel @ gamma, maintained incrementally
    gap = np.inf

    def kkt_bounds():
        # b must satisfy max(up) <= b <= min(down) at the optimum.
        up = y - f - np.where(gamma >= 0, epsilon, -epsilon)
        down = y - f + np.where(gamma <= 0, epsilon, -epsilon)
        up[gamma >= c] = -np.inf
        down[gamma <= -c] = np.inf
        return up, down

    def bias_and_gap():
        up, down = kkt_bounds()
        lo, hi = float(up.max()), float(down.min())
        if not np.isfinite(lo):
            lo = hi
        if not np.isfinite(hi):
            hi = lo
        if not np.isfinite(lo):
            lo = hi = 0.0
        b = 0.5 * (lo + hi)
        quad = float(gamma @ f)
        dual = -0.5 * quad + float(y @ gamma) - epsilon * float(np.abs(gamma).sum())
        slack = np.maximum(np.abs(y - f - b) - epsilon, 0.0)
        primal = 0.5 * quad + c * float(slack.sum())
        return b, primal - dual, primal

    for iteration in range(max_passes):
        up, down = kkt_bounds()
        i = int(np.argmax(up))
        j = int(np.argmin(down))
        violation = up[i] - down[j]
        if violation <= tol:
            break
        if iteration % 64 == 0:
            _, gap, primal = bias_and_gap()
            if gap <= tol * max(1.0, abs(primal)):
                break
        # Exact maximisation over delta for gamma[i] += delta, gamma[j] -= delta.
        a = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        delta_max = min(c - gamma[i], gamma[j] + c)
        candidates = {delta_max}
        for kink in (-gamma[i], gamma[j]):
            if 0.0 < kink < delta_max:
                candidates.add(kink)
        if a > 1e-14:
            # Within each kink-free segment the l1 terms are linear in delta,
            # so the stationary point has a closed form.
            segments = sorted(candidates | {0.0})
            for lo_seg, hi_seg in zip(segments[:-1], segments[1:]):
                mid = 0.5 * (lo_seg + hi_seg)
                slope0 = (y[i] - f[i]) - (y[j] - f[j]) \
                    - epsilon * (1.0 if gamma[i] + mid >= 0 else -1.0) \
                    - epsilon * (1.0 if gamma[j] - mid <= 0 else -1.0)
                stationary = slope0 / a
                if lo_seg < stationary < hi_seg:
                    candidates.add(stationary)
        def objective_change(delta):
            return (delta * ((y[i] - f[i]) - (y[j] - f[j]))
                    - 0.5 * delta * delta * a
                    - epsilon * (abs(gamma[i] + delta) - abs(gamma[i]))
                    - epsilon * (abs(gamma[j] - delta) - abs(gamma[j])))
        best_delta = max(candidates, key=objective_change)
        if objective_change(best_delta) <= 0.0:
            break
        gamma[i] += best_delta
        gamma[j] -= best_delta
        f += best_delta * (kernel[:, i] - kernel[:, j])
    else:
        _, gap, primal = bias_and_gap()
        if gap > tol * max(1.0, abs(primal)):
            raise SurrogateFitError(
                f"SVR dual did not converge in {max_passes} passes (duality gap {gap:.3e})"
            )

    bias, _, _ = bias_and_gap()
    return SvrModel(support_inputs=x, support_coeffs=gamma, bias=float(bias),
                    kernel_width=float(kernel_width), epsilon=float(epsilon),
                    regularization=float(c))


# ---------------------------------------------------------------------------
# Ordinary Kriging
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OkModel:
    """Ordinary Kriging with anisotropic Gaussian correlation.

    Stores the generalized-least-squares mean, the factorized correlation
    matrix (after nugget regularization), and the precomputed residual solve,
    so predictions cost one correlation vector per query. The confidence
    channel is the Kriging standard deviation; it is exactly zero at the
    training inputs and positive elsewhere.
    """

    mu: float
    theta: np.ndarray
    process_variance: float
    training_inputs: np.ndarray
    training_targets: np.ndarray
    corr_inverse_times_residual: np.ndarray
    nugget: float
    _cho: tuple
    _rinv_ones: np.ndarray
    _ones_rinv_ones: float

    def _corr(self, x: np.ndarray) -> np.ndarray:
        diff = x[:, None, :] - self.training_inputs[None, :, :]
        return np.exp(-np.einsum("ijk,k,ijk->ij", diff, self.theta, diff))

    def predict(self, x) -> Prediction:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.training_inputs.shape[1]:
            raise ValueError("query dimension does not match the model")
        values, confidences = self.predict_batch(x[None, :])
        return Prediction(value=float(values[0]), confidence=float(confidences[0]))

    def predict_batch(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        eta = self._corr(x)
        values = self.mu + eta @ self.corr_inverse_times_residual
        rinv_eta = cho_solve(self._cho, eta.T)
        quad = np.einsum("ij,ji->i", eta, rinv_eta)
        trend = (1.0 - eta @ self._rinv_ones) ** 2 / self._ones_rinv_ones
        bracket = np.maximum(1.0 - quad + trend, 0.0)
        confidences = np.sqrt(self.process_variance * bracket)
        # Exact training inputs: interpolation is exact and confidence is zero.
        for q in range(x.shape[0]):
            match = np.nonzero((self.training_inputs == x[q]).all(axis=1))[0]
            if match.size:
                values[q] = self.training_targets[match[0]]
                confidences[q] = 0.0
        return values, confidences


def _ok_system(x: np.ndarray, y: np.ndarray, theta: np.ndarray):
    """Factorize the correlation matrix and return the GLS pieces.

    Escalates the diagonal nugget tenfold from 1e-10 up to 1e-4 until the
    factorization succeeds; clustered adaptive samples need this.
    """
    n = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    corr = np.exp(-np.einsum("ijk,k,ijk->ij", diff, theta, diff))
    nugget = NUGGET_INITIAL
    while True:
        try:
            cho = cho_factor(corr + nugget * np.eye(n), lower=True)
            break
        except (LinAlgError, np.linalg.LinAlgError):
            nugget *= 10.0
            if nugget > NUGGET_MAX:
                raise SurrogateFitError(
                    "correlation matrix is not positive definite even with "
                    f"maximum nugget {NUGGET_MAX}"
                ) from None
    ones = np.ones(n)
    rinv_ones = cho_solve(cho, ones)
    ones_rinv_ones = float(ones @ rinv_ones)
    mu = float(ones @ cho_solve(cho, y)) / ones_rinv_ones
    residual = y - mu
    rinv_residual = cho_solve(cho, residual)
    sigma2 = float(residual @ rinv_residual) / n
    log_det = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
    return cho, rinv_ones, ones_rinv_ones, mu, rinv_residual, sigma2, log_det, nugget


def _concentrated_loglik(x: np.ndarray, y: np.ndarray, theta: np.ndarray) -> float:
    try:
        *_, sigma2, log_det, _ = _ok_system(x, y, theta)
    except SurrogateFitError:
        return -np.inf
    n = x.shape[0]
    return -0.5 * (n * np.log(max(sigma2, 1e-300)) + log_det)


def _auto_theta(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Maximize the concentrated log-likelihood over a log-spaced grid.

    Starts from the best shared scalar over 25 grid values, then (for up to
    four dimensions) refines each dimension's scale over its own grid. Higher
    dimensions keep the shared scalar to bound the fitting cost.
    """
    k = x.shape[1]
    ranges = x.max(axis=0) - x.min(axis=0)
    ranges = np.where(ranges > 0, ranges, 1.0)
    grid = np.logspace(-3.0, 3.0, 25)
    mean_range = float(ranges.mean())

    best_scalar, best_ll = grid[0] / mean_range**2, -np.inf
    for g in grid:
        candidate = g / mean_range**2
        ll = _concentrated_loglik(x, y, np.full(k, candidate))
        if ll > best_ll:
            best_scalar, best_ll = candidate, ll
    theta = np.full(k, best_scalar)
    if k > 4:
        return theta
    for dim in range(k):
        for g in grid:
            candidate = theta.copy()
            candidate[dim] = g / ranges[dim]**2
            ll = _concentrated_loglik(x, y, candidate)
            if ll > best_ll:
                theta, best_ll = candidate, ll
    return theta


def fit_ok(data: TrainingSet, theta: Union[np.ndarray, Sequence[float], float, None] = None
           ) -> OkModel:
    """Fit Ordinary Kriging; ``theta=None`` selects the scales by likelihood."""
    if len(data) < 1:
        raise SurrogateFitError("Kriging needs at least one training sample")
    x, y = data.inputs, data.targets
    k = x.shape[1]
    if theta is None:
        if len(data) < 2:
            raise SurrogateFitError("automatic scale selection needs at least two samples")
        theta = _auto_theta(x, y)
    else:
        theta = np.broadcast_to(np.asarray(theta, dtype=float).ravel()
                                if np.ndim(theta) else np.full(k, float(theta)), (k,)).copy()
        if np.any(theta <= 0):
            raise ValueError("correlation scales must be positive")
    cho, rinv_ones, ones_rinv_ones, mu, rinv_residual, sigma2, _, nugget = \
        _ok_system(x, y, theta)
    # Floor keeps the confidence channel strictly positive away from the
    # samples even for degenerate (constant or single-sample) targets.
    floor = (1e-8 * (1.0 + float(np.abs(y).max())))**2
    return OkModel(mu=mu, theta=theta, process_variance=max(sigma2, floor),
                   training_inputs=x, training_targets=y,
                   corr_inverse_times_residual=rinv_residual, nugget=nugget,
                   _cho=cho, _rinv_ones=rinv_ones, _ones_rinv_ones=ones_rinv_ones)


# ---------------------------------------------------------------------------
# Shared entry points
# ---------------------------------------------------------------------------

AnyModel = Union[RbfnModel, SvrModel, OkModel]


def predict(model: AnyModel, x) -> Prediction:
    """Evaluate a fitted model; only Kriging fills the confidence field."""
    return model.predict(x)


def sm_error(model: AnyModel, test: TrainingSet) -> float:
    """Relative squared prediction error over a test set.

    Sum of squared prediction errors divided by the sum of squared true
    costs; undefined (error) when every test target is zero.
    """
    if len(test) < 1:
        raise ValueError("test set must be nonempty")
    y = test.targets
    denom = float(np.sum(y**2))
    if denom == 0.0:
        raise ValueError("surrogate error is undefined for all-zero test targets")
    if isinstance(model, OkModel):
        predictions, _ = model.predict_batch(test.inputs)
    else:
        predictions = model.predict_batch(test.inputs)
    return float(np.sum((predictions - y)**2)) / denom
