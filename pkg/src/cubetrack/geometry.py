"""Rigid transforms, camera model, projection, and planar homographies.

Conventions used throughout the package:

- Quaternions are stored ``[w, x, y, z]`` and kept unit-norm.
- Camera frame: x right, y down, z forward (optical axis).
- Image frame: u right, v down, origin at the top-left image corner;
  pixel (i, j) covers the unit square with center (j + 0.5, i + 0.5).
- A :class:`Pose` maps points from its body frame to the camera/reference
  frame: ``p_ref = R(q) @ p_body + t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateConfiguration,
    NonInvertibleHomography,
    PointBehindCamera,
)

_QUAT_NORM_TOL = 1e-9


# ---------------------------------------------------------------------------
# quaternion primitives
# ---------------------------------------------------------------------------

def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion")
    return q / n


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_matrix(R: np.ndarray) -> np.ndarray:
    """Shepperd's method; numerically stable for all rotation matrices."""
    R = np.asarray(R, dtype=float)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2
        q = np.array(
            [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
        )
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        q = np.array(
            [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
        )
    elif R[1, 1] >= R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        q = np.array(
            [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
        q = np.array(
            [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
        )
    return quat_normalize(q)


def quat_exp(v: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle, radians) to unit quaternion."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        # second-order series keeps the map smooth through zero
        w = 1.0 - angle * angle / 8.0
        xyz = 0.5 * v
        return quat_normalize(np.array([w, *xyz]))
    axis = v / angle
    half = 0.5 * angle
    return np.array([math.cos(half), *(math.sin(half) * axis)])


def quat_log(q: np.ndarray) -> np.ndarray:
    """Unit quaternion to rotation vector with angle in [0, pi]."""
    q = np.asarray(q, dtype=float)
    if q[0] < 0:
        q = -q
    w = min(1.0, max(-1.0, q[0]))
    s = np.linalg.norm(q[1:])
    angle = 2.0 * math.atan2(s, w)
    if s < 1e-12:
        return 2.0 * q[1:]
    return (angle / s) * q[1:]


def slerp(qa: np.ndarray, qb: np.ndarray, s: float) -> np.ndarray:
    qa = quat_normalize(qa)
    qb = quat_normalize(qb)
    if np.dot(qa, qb) < 0:
        qb = -qb
    rel = quat_mul(quat_conj(qa), qb)
    return quat_mul(qa, quat_exp(s * quat_log(rel)))


# ---------------------------------------------------------------------------
# rigid transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pose:
    """Rigid transform as unit quaternion [w,x,y,z] + translation (meters)."""

    q: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        q = quat_normalize(np.asarray(self.q, dtype=float).reshape(4))
        t = np.asarray(self.t, dtype=float).reshape(3).copy()
        q.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_rt(R: np.ndarray, t: np.ndarray) -> "Pose":
        return Pose(quat_from_matrix(R), np.asarray(t, dtype=float))

    @staticmethod
    def from_rotvec(v: np.ndarray, t: np.ndarray | None = None) -> "Pose":
        return Pose(quat_exp(v), np.zeros(3) if t is None else t)

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.q)

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation()
        T[:3, 3] = self.t
        return T

    def compose(self, other: "Pose") -> "Pose":
        return Pose(quat_mul(self.q, other.q), self.rotation() @ other.t + self.t)

    def __matmul__(self, other: "Pose") -> "Pose":
        return self.compose(other)

    def invert(self) -> "Pose":
        qc = quat_conj(self.q)
        return Pose(qc, -(quat_to_matrix(qc) @ self.t))

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Apply to (..., 3) points."""
        points = np.asarray(points, dtype=float)
        return points @ self.rotation().T + self.t

    def rotvec(self) -> np.ndarray:
        return quat_log(self.q)

    def to_json(self) -> dict:
        return {"q": [float(v) for v in self.q], "t": [float(v) for v in self.t]}

    @staticmethod
    def from_json(d: dict) -> "Pose":
        return Pose(np.array(d["q"], dtype=float), np.array(d["t"], dtype=float))


def rotation_geodesic(a: Pose, b: Pose) -> float:
    """Minimal rotation angle between two orientations, in [0, pi].

    Symmetric in its arguments and invariant under quaternion sign flips.
    """
    d = abs(float(np.dot(a.q, b.q)))
    return 2.0 * math.acos(min(1.0, d))


def pose_difference(a: Pose, b: Pose) -> tuple[float, float]:
    """(translation distance m, rotation geodesic rad) between two poses."""
    return float(np.linalg.norm(a.t - b.t)), rotation_geodesic(a, b)


# ---------------------------------------------------------------------------
# se(3) log/exp (used by the actuation screw projection)
# ---------------------------------------------------------------------------

def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]], dtype=float)


def se3_log(p: Pose) -> np.ndarray:
    """Twist [rho, phi] with exp(se3_log(p)) == p for rotation angle < pi."""
    phi = p.rotvec()
    angle = np.linalg.norm(phi)
    if angle < 1e-9:
        Vinv = np.eye(3) - 0.5 * _skew(phi)
    else:
        K = _skew(phi / angle)
        half = 0.5 * angle
        cot = half / math.tan(half)
        Vinv = np.eye(3) - 0.5 * _skew(phi) + (1.0 - cot) * (K @ K)
    return np.concatenate([Vinv @ p.t, phi])


def se3_exp(xi: np.ndarray) -> Pose:
    xi = np.asarray(xi, dtype=float)
    rho, phi = xi[:3], xi[3:]
    angle = np.linalg.norm(phi)
    if angle < 1e-9:
        V = np.eye(3) + 0.5 * _skew(phi)
    else:
        K = _skew(phi / angle)
        V = (
            np.eye(3)
            + ((1 - math.cos(angle)) / angle) * K
            + ((angle - math.sin(angle)) / angle) * (K @ K)
        )
    return Pose(quat_exp(phi), V @ rho)


# ---------------------------------------------------------------------------
# camera model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera with two radial distortion coefficients."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    k1: float = 0.0
    k2: float = 0.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width) or not (0 <= self.cy < self.height):
            raise ValueError("principal point outside sensor")

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0, self.cx], [0, self.fy, self.cy], [0, 0, 1.0]])

    def distort_normalized(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        r2 = np.sum(xy * xy, axis=-1, keepdims=True)
        return xy * (1.0 + self.k1 * r2 + self.k2 * r2 * r2)

    def undistort_normalized(self, xy: np.ndarray, iters: int = 20, tol: float = 1e-9) -> np.ndarray:
        """Invert the radial model by fixed-point iteration."""
        xy = np.asarray(xy, dtype=float)
        out = xy.copy()
        for _ in range(iters):
            r2 = np.sum(out * out, axis=-1, keepdims=True)
            nxt = xy / (1.0 + self.k1 * r2 + self.k2 * r2 * r2)
            if np.max(np.abs(nxt - out)) < tol:
                out = nxt
                break
            out = nxt
        return out

    def project(self, points: np.ndarray) -> np.ndarray:
        """Project (..., 3) camera-frame points (meters) to pixel coords.

        Raises PointBehindCamera if any point has z <= 1e-6.
        """
        points = np.asarray(points, dtype=float)
        z = points[..., 2]
        if np.any(z <= 1e-6):
            raise PointBehindCamera(f"min z = {np.min(z):.3g} m")
        xy = points[..., :2] / z[..., None]
        xy = self.distort_normalized(xy)
        return xy * np.array([self.fx, self.fy]) + np.array([self.cx, self.cy])

    def pixels_to_normalized(self, uv: np.ndarray, undistort: bool = True) -> np.ndarray:
        uv = np.asarray(uv, dtype=float)
        xy = (uv - np.array([self.cx, self.cy])) / np.array([self.fx, self.fy])
        return self.undistort_normalized(xy) if undistort else xy

    def undistort_pixels(self, uv: np.ndarray) -> np.ndarray:
        """Map observed pixels to ideal pinhole pixels (distortion removed)."""
        xy = self.pixels_to_normalized(uv, undistort=True)
        return xy * np.array([self.fx, self.fy]) + np.array([self.cx, self.cy])

    def to_json(self) -> dict:
        return {
            "fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height, "k1": self.k1, "k2": self.k2,
        }

    @staticmethod
    def from_json(d: dict) -> "CameraIntrinsics":
        return CameraIntrinsics(
            fx=float(d["fx"]), fy=float(d["fy"]), cx=float(d["cx"]), cy=float(d["cy"]),
            width=int(d["width"]), height=int(d["height"]),
            k1=float(d.get("k1", 0.0)), k2=float(d.get("k2", 0.0)),
        )


def project_point(p: np.ndarray, cam: CameraIntrinsics) -> np.ndarray:
    """Single-point wrapper around CameraIntrinsics.project."""
    return cam.project(np.asarray(p, dtype=float).reshape(3))


# ---------------------------------------------------------------------------
# homographies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Homography:
    """3x3 projective map, scale-normalized so H[2,2] == 1 when nonzero."""

    H: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float).reshape(3, 3).copy()
        if abs(H[2, 2]) > 1e-12:
            H = H / H[2, 2]
        H.setflags(write=False)
        object.__setattr__(self, "H", H)

    def apply(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        ph = np.concatenate([pts, np.ones(pts.shape[:-1] + (1,))], axis=-1)
        out = ph @ self.H.T
        w = out[..., 2:]
        if np.any(np.abs(w) < 1e-15):
            raise NonInvertibleHomography("point mapped to infinity")
        return out[..., :2] / w

    def inverse(self) -> "Homography":
        det = np.linalg.det(self.H)
        if abs(det) < 1e-12:
            raise NonInvertibleHomography(f"|det| = {abs(det):.3g}")
        return Homography(np.linalg.inv(self.H))

    def compose(self, other: "Homography") -> "Homography":
        return Homography(self.H @ other.H)

    def __matmul__(self, other: "Homography") -> "Homography":
        return self.compose(other)


def _any_three_collinear(pts: np.ndarray, tol: float) -> bool:
    n = len(pts)
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            d1 = pts[j] - pts[i]
            for k in range(j + 1, n):
                d2 = pts[k] - pts[i]
                if abs(d1[0] * d2[1] - d1[1] * d2[0]) < tol:
                    return True
    return False


def solve_homography(src: np.ndarray, dst: np.ndarray) -> Homography:
    """Least-squares DLT homography mapping src points onto dst points.

    Requires >= 4 correspondences with no 3 source points collinear.
    """
    src = np.asarray(src, dtype=float).reshape(-1, 2)
    dst = np.asarray(dst, dtype=float).reshape(-1, 2)
    if len(src) < 4 or len(src) != len(dst):
        raise DegenerateConfiguration(f"{len(src)} correspondences, need >= 4")

    scale = max(np.ptp(src, axis=0).max(), 1e-12)
    if len(src) <= 8 and _any_three_collinear(src, tol=1e-9 * scale * scale):
        raise DegenerateConfiguration("3 collinear source points")

    def normalizer(pts):
        c = pts.mean(axis=0)
        rms = np.sqrt(np.mean(np.sum((pts - c) ** 2, axis=1)))
        s = math.sqrt(2.0) / max(rms, 1e-12)
        T = np.array([[s, 0, -s * c[0]], [0, s, -s * c[1]], [0, 0, 1.0]])
        return T, (pts - c) * s

    Ts, ns = normalizer(src)
    Td, nd = normalizer(dst)

    n = len(src)
    A = np.zeros((2 * n, 9))
    x, y = ns[:, 0], ns[:, 1]
    u, v = nd[:, 0], nd[:, 1]
    A[0::2, 0] = x
    A[0::2, 1] = y
    A[0::2, 2] = 1
    A[0::2, 6] = -u * x
    A[0::2, 7] = -u * y
    A[0::2, 8] = -u
    A[1::2, 3] = x
    A[1::2, 4] = y
    A[1::2, 5] = 1
    A[1::2, 6] = -v * x
    A[1::2, 7] = -v * y
    A[1::2, 8] = -v

    _, s, Vt = np.linalg.svd(A)
    if s[7] < 1e-10 * s[0]:
        raise DegenerateConfiguration("rank-deficient correspondence system")
    Hn = Vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ Hn @ Ts
    if abs(np.linalg.det(H)) < 1e-12:
        raise DegenerateConfiguration("singular homography")
    return Homography(H)
