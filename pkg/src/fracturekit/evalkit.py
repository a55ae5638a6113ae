"""Evaluation stack for the fracture-reassembly task.

Point sampling and ground-truth pose bookkeeping, the chamfer-distance and
part-accuracy metrics, rotation/translation error statistics in Euler
degrees, and the training losses consumed by reassembly baselines.

Chamfer distance defaults to the raw double-sum of squared nearest
distances; a mean-normalized variant is available for cross-convention
comparisons. Euler angles use the intrinsic XYZ convention.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from . import kernels
from .geom import face_areas

PART_ACCURACY_THRESHOLD = 0.01
DEFAULT_POINTS_PER_PIECE = 1000


@dataclass
class Pose:
    rotation: np.ndarray     # (3, 3)
    translation: np.ndarray  # (3,)

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if np.abs(self.rotation.T @ self.rotation - np.eye(3)).max() > 1e-8:
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(self.rotation) < 0.0:
            raise ValueError("rotation has negative determinant")

    def apply(self, points):
        return points @ self.rotation.T + self.translation


@dataclass
class AssemblyInstance:
    clouds: list                 # per-piece (n_i, 3) arrays
    gt_poses: list               # per-piece Pose
    pred_poses: list = None      # optional predictions

    def __post_init__(self):
        if len(self.clouds) < 2:
            raise ValueError("an assembly needs at least 2 pieces")
        if len(self.gt_poses) != len(self.clouds):
            raise ValueError("ground-truth pose count mismatch")
        if self.pred_poses is not None and len(self.pred_poses) != len(self.clouds):
            raise ValueError("predicted pose count mismatch")

    @property
    def n_pieces(self):
        return len(self.clouds)

    def _require_predictions(self):
        if self.pred_poses is None:
            raise ValueError("no predicted poses present")

    def assembled(self, poses):
        return np.concatenate([pose.apply(c) for pose, c in zip(poses, self.clouds)])


def sample_point_cloud(surface, n_pts=DEFAULT_POINTS_PER_PIECE, rng=None):
    """Area-weighted uniform surface samples; deterministic given the rng."""
    if n_pts < 1:
        raise ValueError("n_pts must be at least 1")
    rng = rng or np.random.default_rng(0)
    areas = face_areas(surface)
    total = areas.sum()
    if total <= 0.0:
        raise ValueError("zero-area surface")
    fidx = rng.choice(len(areas), size=n_pts, p=areas / total)
    u = rng.random(n_pts)
    v = rng.random(n_pts)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    tri = surface.vertices[surface.faces[fidx]]
    return tri[:, 0] + u[:, None] * (tri[:, 1] - tri[:, 0]) + v[:, None] * (tri[:, 2] - tri[:, 0])


def random_rotation(rng):
    """Uniform random rotation from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return Rotation.from_quat(q).as_matrix()


def canonicalize_piece(cloud, rng):
    """Zero-center and randomly rotate a piece cloud; the returned pose maps
    the canonical cloud back onto the original points."""
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    centroid = cloud.mean(axis=0)
    rot = random_rotation(rng)
    canonical = (cloud - centroid) @ rot
    return canonical, Pose(rotation=rot, translation=centroid)


def chamfer_distance(p, q, normalization="sum"):
    """Double-sum (or per-direction mean) of squared nearest distances."""
    if len(p) == 0 or len(q) == 0:
        raise ValueError("chamfer distance needs nonempty clouds")
    fwd = kernels.nearest_sq_dists(p, q)
    bwd = kernels.nearest_sq_dists(q, p)
    if normalization == "sum":
        return float(fwd.sum() + bwd.sum())
    if normalization == "mean":
        return float(fwd.mean() + bwd.mean())
    raise ValueError("normalization must be 'sum' or 'mean'")


def part_accuracy(instance, threshold=PART_ACCURACY_THRESHOLD, normalization="sum"):
    """Percentage of pieces whose posed cloud lands within the chamfer
    threshold of its ground-truth placement."""
    instance._require_predictions()
    hits = 0
    for cloud, pred, gt in zip(instance.clouds, instance.pred_poses, instance.gt_poses):
        if chamfer_distance(pred.apply(cloud), gt.apply(cloud), normalization) < threshold:
            hits += 1
    return 100.0 * hits / instance.n_pieces


@dataclass
class TransformErrors:
    rmse_rot: float  # degrees
    mae_rot: float   # degrees
    rmse_trans: float
    mae_trans: float


def transform_errors(instance, translation_aggregation="components"):
    """Rotation errors from the relative rotation's intrinsic-XYZ Euler
    angles in (-180, 180], translation errors from the difference vectors.

    The default aggregates translation over all 3N vector components; pass
    'norms' to aggregate per-piece Euclidean norms instead.
    """
    instance._require_predictions()
    angles = []
    t_err = []
    for pred, gt in zip(instance.pred_poses, instance.gt_poses):
        rel = pred.rotation.T @ gt.rotation
        angles.append(Rotation.from_matrix(rel).as_euler("XYZ", degrees=True))
        t_err.append(pred.translation - gt.translation)
    angles = np.concatenate(angles)
    t_err = np.stack(t_err)
    if translation_aggregation == "components":
        t_vals = t_err.reshape(-1)
    elif translation_aggregation == "norms":
        t_vals = np.linalg.norm(t_err, axis=1)
    else:
        raise ValueError("translation_aggregation must be 'components' or 'norms'")
    return TransformErrors(
        rmse_rot=float(np.sqrt(np.mean(angles**2))),
        mae_rot=float(np.mean(np.abs(angles))),
        rmse_trans=float(np.sqrt(np.mean(t_vals**2))),
        mae_trans=float(np.mean(np.abs(t_vals))),
    )


@dataclass
class LossWeights:
    lam_rot: float = 0.2
    lam_shape: float = 1.0
    lam_chamfer: float = 10.0
    lam_point: float = 1.0

    def __post_init__(self):
        if min(self.lam_rot, self.lam_shape, self.lam_chamfer, self.lam_point) < 0.0:
            raise ValueError("loss weights must be nonnegative")


def loss_pose(instance, lam_rot=0.2):
    """Sum of squared translation errors plus lam_rot times the squared
    Frobenius distance of the relative rotation from the identity."""
    instance._require_predictions()
    total = 0.0
    for pred, gt in zip(instance.pred_poses, instance.gt_poses):
        total += float(np.sum((pred.translation - gt.translation) ** 2))
        total += lam_rot * float(np.sum((pred.rotation.T @ gt.rotation - np.eye(3)) ** 2))
    return total


def loss_chamfer(instance, lam_shape=1.0, normalization="sum"):
    """Per-piece rotation-only chamfer terms plus lam_shape times the
    assembled-shape chamfer between prediction and ground truth."""
    instance._require_predictions()
    total = 0.0
    for cloud, pred, gt in zip(instance.clouds, instance.pred_poses, instance.gt_poses):
        total += chamfer_distance(cloud @ pred.rotation.T, cloud @ gt.rotation.T, normalization)
    s_pred = instance.assembled(instance.pred_poses)
    s_gt = instance.assembled(instance.gt_poses)
    return total + lam_shape * chamfer_distance(s_pred, s_gt, normalization)


def loss_point(instance):
    """Translation-free point-to-point MSE between rotations (sum form)."""
    instance._require_predictions()
    total = 0.0
    for cloud, pred, gt in zip(instance.clouds, instance.pred_poses, instance.gt_poses):
        diff = cloud @ pred.rotation.T - cloud @ gt.rotation.T
        total += float(np.sum(diff**2))
    return total


def loss_total(instance, weights=None, normalization="sum"):
    weights = weights or LossWeights()
    return (
        loss_pose(instance, weights.lam_rot)
        + weights.lam_chamfer * loss_chamfer(instance, weights.lam_shape, normalization)
        + weights.lam_point * loss_point(instance)
    )


def split_dataset(shape_ids, ratio=0.8, seed=0):
    """Deterministic base-shape-level train/test split.

    Accepts a list of shape ids or a manifest dict with a 'shapes' mapping.
    """
    if isinstance(shape_ids, dict):
        shape_ids = sorted(shape_ids.get("shapes", {}))
    ids = list(shape_ids)
    if not ids:
        raise ValueError("empty manifest")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    perm = np.random.default_rng(seed).permutation(len(ids))
    n_train = int(len(ids) * ratio)
    train = sorted(ids[i] for i in perm[:n_train])
    test = sorted(ids[i] for i in perm[n_train:])
    return train, test
