"""Triangle meshes: a small OBJ reader, generators and fitted shape operators.

Faces are expected with consistent winding; the winding normal is taken as
the outward side, so the curvature normal is its negative (a round sphere
then has positive principal curvatures).
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geom import SurfacePoint
from .symfun import ShapeSpectrum


class MeshError(ValueError):
    def __init__(self, msg, edges=()):
        super().__init__(msg)
        self.edges = list(edges)


@dataclass
class Mesh:
    V: np.ndarray  # (n,3)
    F: np.ndarray  # (k,3) zero-based
    name: str = "mesh"
    _cache: dict = field(default_factory=dict, repr=False)

    def edges(self) -> np.ndarray:
        if "edges" not in self._cache:
            E = np.sort(np.concatenate([self.F[:, [0, 1]], self.F[:, [1, 2]], self.F[:, [2, 0]]]), axis=1)
            self._cache["edges"] = np.unique(E, axis=0)
        return self._cache["edges"]

    def edge_faces(self) -> dict:
        if "edge_faces" not in self._cache:
            ef = defaultdict(list)
            for fi, (a, b, c) in enumerate(self.F):
                for e in ((a, b), (b, c), (c, a)):
                    ef[(min(e), max(e))].append(fi)
            self._cache["edge_faces"] = dict(ef)
        return self._cache["edge_faces"]

    def boundary_vertices(self) -> np.ndarray:
        flag = np.zeros(len(self.V), dtype=bool)
        for (a, b), fs in self.edge_faces().items():
            if len(fs) == 1:
                flag[a] = flag[b] = True
        return flag

    def face_normals(self) -> np.ndarray:
        """Winding normals scaled by twice the face area."""
        P = self.V[self.F]
        return np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(), axis=1)

    def vertex_normals(self) -> np.ndarray:
        """Area-weighted unit winding normals."""
        N = np.zeros_like(self.V)
        fn = self.face_normals()
        for k in range(3):
            np.add.at(N, self.F[:, k], fn)
        return N / np.linalg.norm(N, axis=1, keepdims=True)

    def neighbors(self) -> list[set]:
        if "nbrs" not in self._cache:
            nb = [set() for _ in range(len(self.V))]
            for a, b in self.edges():
                nb[a].add(int(b))
                nb[b].add(int(a))
            self._cache["nbrs"] = nb
        return self._cache["nbrs"]

    def ring(self, v: int, k: int = 2) -> list[int]:
        nb = self.neighbors()
        seen = {v}
        front = {v}
        for _ in range(k):
            front = {w for u in front for w in nb[u]} - seen
            seen |= front
        return sorted(seen - {v})


def check_manifold(V, F, name="mesh"):
    mesh = Mesh(np.asarray(V, dtype=float), np.asarray(F, dtype=int), name)
    bad = [e for e, fs in mesh.edge_faces().items() if len(fs) > 2]
    if bad:
        raise MeshError(f"{name}: {len(bad)} non-manifold edge(s): {bad[:10]}", bad)
    return mesh


def load_obj(path) -> Mesh:
    """Read ``v x y z`` and ``f i j k`` records (1-based, ``i/t/n`` forms allowed)."""
    V, F = [], []
    path = Path(path)
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *rest = line.split()
        try:
            if tag == "v":
                V.append([float(x) for x in rest[:3]])
                if len(rest) < 3:
                    raise ValueError
            elif tag == "f":
                idx = [int(tok.split("/")[0]) for tok in rest]
                if len(idx) < 3:
                    raise ValueError
                for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                    F.append([idx[0] - 1, idx[k] - 1, idx[k + 1] - 1])
        except ValueError:
            raise MeshError(f"{path}:{lineno}: malformed {tag!r} record") from None
    V = np.array(V, dtype=float).reshape(-1, 3)
    F = np.array(F, dtype=int).reshape(-1, 3)
    if len(F) == 0:
        raise MeshError(f"{path}: no faces")
    if F.min() < 0 or F.max() >= len(V):
        raise MeshError(f"{path}: face index out of range")
    return check_manifold(V, F, path.name)


def write_obj(mesh: Mesh, path):
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.V]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.F]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class MeshShape:
    vertex: int
    point: SurfacePoint | None
    boundary: bool
    underdetermined: bool
    neighbours: int


def mesh_shape(mesh: Mesh, vertex: int, rings: int = 2) -> MeshShape:
    """Shape operator at a vertex from a least-squares quadric
    z = a x^2 + b xy + c y^2 + d x + e y over the k-ring, in the tangent
    frame of the area-weighted normal."""
    n = mesh.vertex_normals()[vertex]
    p = mesh.V[vertex]
    nb = mesh.ring(vertex, rings)
    boundary = bool(mesh.boundary_vertices()[vertex])
    if len(nb) < 6:
        return MeshShape(vertex, None, boundary, True, len(nb))
    t1 = np.cross(n, [1.0, 0, 0] if abs(n[0]) < 0.9 else [0, 1.0, 0])
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    Q = mesh.V[nb] - p
    x, y, z = Q @ t1, Q @ t2, Q @ n
    M = np.column_stack([x * x, x * y, y * y, x, y])
    coef, _, rank, _ = np.linalg.lstsq(M, z, rcond=None)
    if rank < 5:
        return MeshShape(vertex, None, boundary, True, len(nb))
    a, b, c, d, e = coef
    Ig = np.array([[1 + d * d, d * e], [d * e, 1 + e * e]])
    IIg = -np.array([[2 * a, b], [b, 2 * c]]) / math.sqrt(1 + d * d + e * e)
    L = np.linalg.cholesky(Ig)
    Li = np.linalg.inv(L)
    At = Li @ IIg @ Li.T
    lam, W = np.linalg.eigh(0.5 * (At + At.T))
    dirs = (np.column_stack([t1 + d * n, t2 + e * n]) @ (Li.T @ W)).T
    eta = -(n - d * t1 - e * t2) / math.sqrt(1 + d * d + e * e)
    pt = SurfacePoint(
        u=np.array([float(vertex)]),
        position=p,
        normal=eta,
        I=Ig,
        II=IIg,
        A=np.linalg.solve(Ig, IIg),
        spectrum=ShapeSpectrum(tuple(lam)),
        directions=dirs,
        asymmetry=0.0,
    )
    return MeshShape(vertex, pt, boundary, False, len(nb))


def mesh_spectra(mesh: Mesh, rings: int = 2):
    """Principal curvatures at interior, well-determined vertices: (indices, (n,2))."""
    idx, lams = [], []
    for v in range(len(mesh.V)):
        s = mesh_shape(mesh, v, rings)
        if s.boundary or s.underdetermined:
            continue
        idx.append(v)
        lams.append(s.point.spectrum.lambdas)
    return np.array(idx, dtype=int), np.array(lams)


# -- generators ---------------------------------------------------------------


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> Mesh:
    t = (1 + 5**0.5) / 2
    V = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0], [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    F = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4], [11, 10, 2],
         [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9], [4, 9, 5],
         [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    V = [np.array(v, dtype=float) / np.linalg.norm(v) for v in V]
    for _ in range(subdivisions):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                w = V[i] + V[j]
                V.append(w / np.linalg.norm(w))
                cache[key] = len(V) - 1
            return cache[key]

        newF = []
        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            newF += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        F = newF
    return Mesh(radius * np.array(V), np.array(F), f"icosphere-{subdivisions}")


def grid_mesh(n: int = 10, size: float = 1.0) -> Mesh:
    """Flat triangulated square [-size, size]^2 in the plane z = 0, winding normal +z."""
    xs = np.linspace(-size, size, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    V = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    F = []
    for i in range(n):
        for j in range(n):
            a = i * (n + 1) + j
            b, c, d = a + (n + 1), a + (n + 1) + 1, a + 1
            F += [[a, b, c], [a, c, d]]
    return Mesh(V, np.array(F), "grid")


def cylinder_mesh(radius: float = 1.0, height: float = 2.0, n_theta: int = 64, n_z: int = 32) -> Mesh:
    """Open cylinder about the z axis with outward winding normals."""
    th = np.linspace(0, 2 * math.pi, n_theta, endpoint=False)
    zs = np.linspace(-height / 2, height / 2, n_z + 1)
    V = np.array([[radius * math.cos(t), radius * math.sin(t), z] for z in zs for t in th])
    F = []
    for k in range(n_z):
        for i in range(n_theta):
            a = k * n_theta + i
            b = k * n_theta + (i + 1) % n_theta
            c, d = b + n_theta, a + n_theta
            F += [[a, b, c], [a, c, d]]
    return Mesh(V, np.array(F), "cylinder")
