"""Periodic clusters and the two-layer coupled model built on them.

Sites of a 2D cluster are integer points of the underlying Bravais lattice
reduced modulo the lattice spanned by two integer translation vectors.
For the triangular lattice the integer coordinates refer to the basis
``a1 = (1, 0)``, ``a2 = (1/2, sqrt(3)/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

KINDS = ("chain", "square", "triangular", "explicit")

# Tilted cells used when a ClusterSpec carries no translation vectors.
DEFAULT_VECTORS: dict[str, dict[int, tuple[tuple[int, int], tuple[int, int]]]] = {
    "square": {
        8: ((2, 2), (2, -2)),
        10: ((3, 1), (-1, 3)),
        12: ((2, 2), (-2, 4)),
    },
    "triangular": {
        # the square-lattice (2,2),(2,-2) cell folds triangular bonds onto each other
        8: ((3, -1), (-1, 3)),
        10: ((3, 1), (-1, 3)),
        12: ((2, 2), (-2, 4)),
    },
}

# forward half of the nearest-neighbour star
_FORWARD = {
    "square": ((1, 0), (0, 1)),
    "triangular": ((1, 0), (0, 1), (-1, 1)),
}


@dataclass(frozen=True)
class ClusterSpec:
    kind: str
    n_sites: int
    translation_vectors: tuple[tuple[int, int], tuple[int, int]] | None = None
    explicit_bonds: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cluster kind {self.kind!r}; expected one of {KINDS}")
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        if self.kind == "explicit":
            if self.explicit_bonds is None:
                raise ValueError("explicit clusters need explicit_bonds")
        elif self.n_sites < 2:
            raise ValueError(f"{self.kind} clusters need at least 2 sites")
        if self.kind in _FORWARD and self.translation_vectors is None:
            if self.n_sites not in DEFAULT_VECTORS[self.kind]:
                raise ValueError(
                    f"no default cell for {self.kind} N={self.n_sites}; "
                    f"defaults exist for {sorted(DEFAULT_VECTORS[self.kind])}"
                )

    def vectors(self):
        if self.translation_vectors is not None:
            return tuple(tuple(int(c) for c in v) for v in self.translation_vectors)
        return DEFAULT_VECTORS[self.kind][self.n_sites]

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n_sites": self.n_sites}
        if self.kind in _FORWARD:
            d["vectors"] = [list(v) for v in self.vectors()]
        if self.explicit_bonds is not None:
            d["bonds"] = [list(b) for b in self.explicit_bonds]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterSpec":
        vectors = d.get("vectors", d.get("translation_vectors"))
        bonds = d.get("bonds", d.get("explicit_bonds"))
        return cls(
            kind=str(d["kind"]),
            n_sites=int(d["n_sites"]),
            translation_vectors=None if vectors is None else tuple(tuple(v) for v in vectors),
            explicit_bonds=None if bonds is None else tuple(tuple(b) for b in bonds),
        )


@dataclass(frozen=True)
class BondList:
    """Nearest-neighbour pairs ``(i, j)``, ``i < j``, sorted lexicographically.

    ``coords`` holds integer lattice coordinates of each site (``None`` for
    explicit clusters); ``kind`` records the generating geometry.
    """

    bonds: tuple[tuple[int, int], ...]
    n_sites: int
    kind: str = "explicit"
    coords: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        for i, j in self.bonds:
            if not (0 <= i < j < self.n_sites):
                raise ValueError(f"invalid bond ({i}, {j}) for {self.n_sites} sites")

    def __len__(self) -> int:
        return len(self.bonds)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_sites, dtype=int)
        for i, j in self.bonds:
            deg[i] += 1
            deg[j] += 1
        return deg

    def shifted(self, offset: int) -> tuple[tuple[int, int], ...]:
        return tuple((i + offset, j + offset) for i, j in self.bonds)


def _cell_sites(vectors):
    """Integer points of the cell and a reducer mapping any point to its site key."""
    (a, b), (c, d) = vectors
    det = a * d - b * c
    if det == 0:
        raise ValueError(f"translation vectors {vectors} are linearly dependent")
    adet = abs(det)

    def key(x: int, y: int) -> tuple[int, int]:
        # fractional coordinates times det, reduced mod |det|
        return ((d * x - c * y) % adet, (-b * x + a * y) % adet)

    xs = [0, a, c, a + c]
    ys = [0, b, d, b + d]
    reps: dict[tuple[int, int], tuple[int, int]] = {}
    for y in range(min(ys), max(ys) + 1):
        for x in range(min(xs), max(xs) + 1):
            reps.setdefault(key(x, y), (x, y))
    return adet, key, reps


def _periodic_cluster(spec: ClusterSpec) -> BondList:
    vectors = spec.vectors()
    area, key, reps = _cell_sites(vectors)
    if area != spec.n_sites:
        raise ValueError(
            f"cell spanned by {vectors} has area {area}, but n_sites={spec.n_sites}"
        )
    if len(reps) != area:  # pragma: no cover - bounding box always covers the cell
        raise RuntimeError("failed to enumerate cell sites")
    coords = sorted(reps.values(), key=lambda p: (p[1], p[0]))
    index = {key(*p): n for n, p in enumerate(coords)}
    bonds = set()
    for n, (x, y) in enumerate(coords):
        for dx, dy in _FORWARD[spec.kind]:
            m = index[key(x + dx, y + dy)]
            if m == n:
                raise ValueError(
                    f"cell {vectors} is too small: offset ({dx}, {dy}) wraps onto itself"
                )
            bonds.add((min(n, m), max(n, m)))
    return BondList(tuple(sorted(bonds)), spec.n_sites, spec.kind, tuple(coords))


def build_cluster(spec: ClusterSpec) -> BondList:
    """Bond list of a periodic cluster, sorted by ``(i, j)``.

    A chain of N sites is the ring ``(i, i+1 mod N)`` with exactly N bonds;
    for N = 2 both ring bonds join the same pair and are both kept.
    """
    if spec.kind == "chain":
        n = spec.n_sites
        bonds = sorted((min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n))
        return BondList(tuple(bonds), n, "chain", tuple((i, 0) for i in range(n)))
    if spec.kind == "explicit":
        bonds = set()
        for i, j in spec.explicit_bonds:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-bond ({i}, {i})")
            bonds.add((min(i, j), max(i, j)))
        bl = BondList(tuple(sorted(bonds)), spec.n_sites, "explicit")
        if spec.n_sites > 1 and np.any(bl.degrees() == 0):
            missing = np.flatnonzero(bl.degrees() == 0).tolist()
            raise ValueError(f"sites {missing} appear in no bond")
        return bl
    return _periodic_cluster(spec)


def load_cluster_spec(path: str | Path) -> ClusterSpec:
    """Read a cluster definition from a YAML or JSON document."""
    import yaml

    text = Path(path).read_text()
    doc = yaml.safe_load(text)
    if isinstance(doc, dict) and "geometry" in doc:
        doc = doc["geometry"]
    return ClusterSpec.from_dict(doc)


@dataclass(frozen=True)
class CoupledModel:
    """Two copies of a cluster joined by rungs ``i <-> i + n_a``.

    Global site indices: layer A is ``0..n_a-1``, layer B is ``n_a..2 n_a-1``.
    """

    cluster: BondList
    j_a: float
    j_b: float
    lam: float
    bonds_a: tuple[tuple[int, int], ...] = field(init=False)
    bonds_b: tuple[tuple[int, int], ...] = field(init=False)
    rung_bonds: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        n = self.cluster.n_sites
        object.__setattr__(self, "bonds_a", self.cluster.bonds)
        object.__setattr__(self, "bonds_b", self.cluster.shifted(n))
        object.__setattr__(self, "rung_bonds", tuple((i, i + n) for i in range(n)))

    @property
    def n_a(self) -> int:
        return self.cluster.n_sites

    @property
    def n_b(self) -> int:
        return self.cluster.n_sites

    @property
    def n_sites(self) -> int:
        return 2 * self.cluster.n_sites

    def with_lambda(self, lam: float) -> "CoupledModel":
        return CoupledModel(self.cluster, self.j_a, self.j_b, lam)


def build_coupled_model(bonds: BondList, j_a: float, j_b: float, lam: float) -> CoupledModel:
    if not j_a > 0 or not j_b > 0:
        raise ValueError("j_a and j_b must be positive")
    if not lam >= 0:
        raise ValueError("lambda must be non-negative")
    return CoupledModel(bonds, float(j_a), float(j_b), float(lam))


def chain_distance(i: int, j: int, n: int) -> int:
    d = abs(i - j) % n
    return min(d, n - d)
