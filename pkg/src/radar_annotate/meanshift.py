"""Mean-shift clustering with a spherical Gaussian kernel.

Every cloud point is iterated to its kernel density mode; converged
locations closer than half the bandwidth are merged into one cluster,
so the clusters partition the cloud exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCluster, EmptyCloud, SingularCovariance, ValidationError
from .kernels import mean_shift_modes

MODE_MERGE_FRACTION = 0.5  # merge radius as a fraction of the bandwidth
COV_REGULARIZATION = 1e-6

LOG_TWO_PI = float(np.log(2.0 * np.pi))


@dataclass
class Gaussian:
    """Multivariate normal with a cached Cholesky factor."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        d = self.mean.shape[0]
        if self.cov.shape != (d, d):
            raise ValidationError(f"covariance shape {self.cov.shape} for dim {d}")
        try:
            self._chol = np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError as exc:
            raise SingularCovariance(str(exc)) from exc
        self._log_det = 2.0 * float(np.log(np.diag(self._chol)).sum())

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        diff = x - self.mean
        z = np.linalg.solve(self._chol, diff.T)
        quad = (z * z).sum(axis=0)
        return -0.5 * (self.dim * LOG_TWO_PI + self._log_det + quad)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        return self.mean + z @ self._chol.T

    def param_bytes(self) -> bytes:
        return self.mean.tobytes() + self.cov.tobytes()


@dataclass
class Cluster:
    """One mean-shift cluster over a point cloud.

    ``indices`` index the original cloud; ``centroid`` is the converged
    mode location. ``converged`` is False when any member hit the
    iteration cap before its step fell below tolerance (the cluster is
    still emitted from the last iterate).
    """

    indices: np.ndarray
    points: np.ndarray
    centroid: np.ndarray
    converged: bool = True

    def __len__(self) -> int:
        return self.points.shape[0]


def _as_points(cloud) -> np.ndarray:
    pts = getattr(cloud, "points", cloud)
    return np.asarray(pts, dtype=np.float64)


def mean_shift(cloud, sigma: float, tol: float = 1e-4, max_iter: int = 300):
    """Cluster a point cloud by iterating every point to its KDE mode.

    Accepts a DoaCloud or an (n, d) array. Returns clusters ordered by
    their smallest member index.
    """
    points = _as_points(cloud)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if points.shape[0] == 0:
        raise EmptyCloud("mean shift needs at least one point")
    if not sigma > 0:
        raise ValidationError("sigma must be > 0")

    modes, _iters, converged = mean_shift_modes(
        points, points, float(sigma), float(tol), int(max_iter)
    )

    labels = _merge_modes(modes, MODE_MERGE_FRACTION * sigma)
    clusters = []
    for label in range(labels.max() + 1):
        idx = np.flatnonzero(labels == label)
        clusters.append(
            Cluster(
                indices=idx,
                points=points[idx],
                centroid=modes[idx].mean(axis=0),
                converged=bool(converged[idx].all()),
            )
        )
    return clusters


def _merge_modes(modes: np.ndarray, radius: float) -> np.ndarray:
    """Connected components of the 'within radius' graph on mode locations.

    Union-find keyed by first-seen order so labels are deterministic and
    sorted by smallest member index.
    """
    n = modes.shape[0]
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    d2 = ((modes[:, None, :] - modes[None, :, :]) ** 2).sum(axis=2)
    close = d2 <= radius * radius
    for i in range(n):
        for j in np.flatnonzero(close[i, i + 1:]) + i + 1:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    roots = np.array([find(i) for i in range(n)])
    _, labels = np.unique(roots, return_inverse=True)
    return labels


def fit_gaussian(cluster) -> Gaussian:
    """Sample mean and unbiased covariance of a cluster's members.

    The covariance gets a +1e-6 I ridge so it is positive definite even
    for coincident points. Fewer than two members raises
    DegenerateCluster; callers fall back to an isotropic bandwidth-scaled
    Gaussian around the single point.
    """
    points = cluster.points if isinstance(cluster, Cluster) else _as_points(cluster)
    points = np.atleast_2d(points)
    n, d = points.shape
    if n < 2:
        raise DegenerateCluster(f"cannot fit a covariance to {n} point(s)")
    mean = points.mean(axis=0)
    centered = points - mean
    cov = centered.T @ centered / (n - 1)
    cov = cov + COV_REGULARIZATION * np.eye(d)
    return Gaussian(mean=mean, cov=cov)


def isotropic_gaussian(point: np.ndarray, sigma: float) -> Gaussian:
    """Fallback distribution for single-point clusters."""
    point = np.asarray(point, dtype=np.float64).reshape(-1)
    return Gaussian(mean=point, cov=(sigma * sigma) * np.eye(point.shape[0]))


def kde_value(points, x, sigma: float) -> float:
    """Gaussian KDE up to a constant factor, for diagnostics and tests."""
    points = _as_points(points)
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    d2 = ((points - x) ** 2).sum(axis=1)
    return float(np.exp(-d2 / (2.0 * sigma * sigma)).sum())


def mean_shift_trajectory(points, start, sigma: float, tol: float = 1e-4,
                          max_iter: int = 300):
    """Iterates of a single mean-shift trajectory, first to last."""
    points = _as_points(points)
    x = np.asarray(start, dtype=np.float64).reshape(-1).copy()
    path = [x.copy()]
    for _ in range(max_iter):
        d2 = ((points - x) ** 2).sum(axis=1)
        w = np.exp(-d2 / (2.0 * sigma * sigma))
        new = (w[:, None] * points).sum(axis=0) / w.sum()
        step = float(np.linalg.norm(new - x))
        x = new
        path.append(x.copy())
        if step < tol:
            break
    return path
