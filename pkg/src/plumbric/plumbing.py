"""Combinatorial plumbing trees and their exact topological ledgers.

Everything here is exact integer/rational arithmetic: intersection matrices
and their determinants, mod-2 quadratic refinements and the Arf invariant,
boundary clutching words, spin-index differences of glued pairs, and the
fixed-point ledgers that certify pairwise-distinct end invariants.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "PlumbingVertex",
    "PlumbingTree",
    "tangent_chain",
    "intersection_matrix",
    "bareiss_det",
    "boundary_sphere_test",
    "arf_invariant",
    "arf_of_refinement",
    "clutching_word",
    "MilnorPairInput",
    "milnor_ahat_difference",
    "eta_local_contribution",
    "eta_rp",
    "EtaLedger",
    "EtaLedgerResult",
    "eta_ledger",
    "fixed_point_count",
]


class TreeStructureError(ValueError):
    """The vertex/edge data does not describe a valid plumbing tree."""


@dataclass(frozen=True)
class PlumbingVertex:
    """One disk bundle in the plumbing.

    ``base_dim`` is the dimension of the base sphere, ``rank`` the fiber
    rank; ``euler`` the Euler number of the bundle; ``framing_q`` the mod-2
    framing value used by the quadratic refinement in the middle-odd case
    (1 for tangent bundles of odd spheres); ``char_label`` an opaque name
    for the clutching map with ``trivial`` marking product bundles.
    """

    base_dim: int
    rank: int
    euler: int
    framing_q: int = 0
    char_label: str = ""
    trivial: bool = False

    def __post_init__(self):
        if self.base_dim < 1 or self.rank < 1:
            raise TreeStructureError("base dimension and rank must be positive")
        if self.framing_q not in (0, 1):
            raise TreeStructureError(f"framing value must be 0 or 1, got {self.framing_q}")


@dataclass(frozen=True)
class PlumbingTree:
    """Plumbing of disk bundles along a tree.

    ``edges`` are (i, j, sign) with sign +-1.  In equivariant mode the
    underlying graph must be a path (an order-two symmetry acting on each
    bundle with isolated fixed points forces a straight line).
    """

    vertices: tuple
    edges: tuple
    equivariant: bool = False

    def __post_init__(self):
        n = len(self.vertices)
        if n == 0:
            raise TreeStructureError("tree needs at least one vertex")
        seen = set()
        adj = {i: [] for i in range(n)}
        for (i, j, s) in self.edges:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise TreeStructureError(f"bad edge ({i}, {j})")
            if s not in (1, -1):
                raise TreeStructureError(f"edge sign must be +-1, got {s}")
            key = frozenset((i, j))
            if key in seen:
                raise TreeStructureError(f"duplicate edge between {i} and {j}")
            seen.add(key)
            adj[i].append(j)
            adj[j].append(i)
        if len(self.edges) != n - 1:
            raise TreeStructureError(
                f"a tree on {n} vertices needs {n - 1} edges, got {len(self.edges)}")
        # connectivity
        stack, visited = [0], {0}
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in visited:
                    visited.add(w)
                    stack.append(w)
        if len(visited) != n:
            raise TreeStructureError("plumbing graph is not connected")
        # dimensions must alternate across each plumbing point
        for (i, j, _s) in self.edges:
            vi, vj = self.vertices[i], self.vertices[j]
            if vi.base_dim != vj.rank or vi.rank != vj.base_dim:
                raise TreeStructureError(
                    f"edge ({i}, {j}): base/fiber dimensions do not cross-match")
        if self.equivariant and any(len(adj[v]) > 2 for v in adj):
            raise TreeStructureError(
                "equivariant plumbing requires a path (straight-line) graph")
        object.__setattr__(self, "_adj", {k: tuple(v) for k, v in adj.items()})

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def total_dim(self) -> int:
        v = self.vertices[0]
        return v.base_dim + v.rank

    def path_order(self) -> list:
        """Vertex order along the path; raises if the tree is not a path."""
        adj = self._adj
        degs = {v: len(adj[v]) for v in adj}
        if self.n == 1:
            return [0]
        if any(d > 2 for d in degs.values()):
            raise TreeStructureError("plumbing graph is not a path")
        start = min(v for v, d in degs.items() if d == 1)
        order = [start]
        prev = None
        while len(order) < self.n:
            nxt = [w for w in adj[order[-1]] if w != prev]
            prev = order[-1]
            order.append(nxt[0])
        return order

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "schema": "plumbric-tree/1",
            "equivariant": self.equivariant,
            "vertices": [{
                "base_dim": v.base_dim, "rank": v.rank, "euler": v.euler,
                "framing_q": v.framing_q, "char_label": v.char_label,
                "trivial": v.trivial} for v in self.vertices],
            "edges": [list(e) for e in self.edges],
        }, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PlumbingTree":
        doc = json.loads(text)
        verts = tuple(PlumbingVertex(
            base_dim=v["base_dim"], rank=v["rank"], euler=v["euler"],
            framing_q=v.get("framing_q", 0), char_label=v.get("char_label", ""),
            trivial=v.get("trivial", False)) for v in doc["vertices"])
        edges = tuple((int(i), int(j), int(s)) for i, j, s in doc["edges"])
        return cls(vertices=verts, edges=edges,
                   equivariant=bool(doc.get("equivariant", False)))


def tangent_chain(length: int, dim: int, equivariant: bool = False) -> PlumbingTree:
    """Straight-line plumbing of ``length`` copies of the odd-sphere tangent
    disk bundle (Euler number 0, framing value 1)."""
    if dim % 2 == 0:
        raise TreeStructureError("tangent chains use odd-dimensional spheres")
    verts = tuple(PlumbingVertex(base_dim=dim, rank=dim, euler=0, framing_q=1,
                                 char_label=f"tau_{i + 1}") for i in range(length))
    edges = tuple((i, i + 1, 1) for i in range(length - 1))
    return PlumbingTree(vertices=verts, edges=edges, equivariant=equivariant)


# ---------------------------------------------------------------------------
# Intersection form
# ---------------------------------------------------------------------------


def intersection_matrix(tree: PlumbingTree):
    """Integer intersection matrix of the plumbing and its symmetry type.

    Diagonal entries are the Euler numbers, off-diagonal entries the edge
    signs; the form is symmetric when the middle dimension (p+q)/2 is even
    and skew-symmetric when it is odd.  Requires p+q even.
    """
    if tree.total_dim % 2 != 0:
        raise TreeStructureError(
            f"intersection form needs even total dimension, got {tree.total_dim}")
    middle = tree.total_dim // 2
    skew = middle % 2 == 1
    n = tree.n
    M = [[0] * n for _ in range(n)]
    for k, v in enumerate(tree.vertices):
        M[k][k] = v.euler
    for (i, j, s) in tree.edges:
        M[i][j] = s
        M[j][i] = -s if skew else s
    return M, ("skew" if skew else "symmetric")


def bareiss_det(matrix) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    M = [list(map(int, row)) for row in matrix]
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix must be square")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[-1][-1]


def boundary_sphere_test(tree: PlumbingTree):
    """(is_homotopy_sphere, det): |det| = 1 detects homotopy-sphere boundaries
    for simply connected tree plumbings over spheres (p, q >= 3)."""
    M, _sym = intersection_matrix(tree)
    det = bareiss_det(M)
    return abs(det) == 1, det


# ---------------------------------------------------------------------------
# Arf invariant
# ---------------------------------------------------------------------------


class NonUnimodularFormError(ValueError):
    """The mod-2 intersection form is degenerate."""


def _gf2_symplectic_basis(B):
    """Symplectic basis of a nondegenerate alternating form over GF(2).

    Returns pairs (a_i, b_i) of basis vectors (as int bitmasks over the
    standard basis).  Raises :class:`NonUnimodularFormError` if degenerate.
    """
    n = len(B)

    def pairing(x, y):
        total = 0
        xi = x
        i = 0
        while xi:
            if xi & 1:
                yj = y
                j = 0
                while yj:
                    if yj & 1:
                        total ^= B[i][j] & 1
                    yj >>= 1
                    j += 1
            xi >>= 1
            i += 1
        return total

    basis = [1 << i for i in range(n)]
    pairs = []
    while basis:
        a = basis.pop(0)
        partner = next((y for y in basis if pairing(a, y) == 1), None)
        if partner is None:
            raise NonUnimodularFormError("mod-2 form is degenerate on the remaining space")
        basis.remove(partner)
        # project the rest onto the complement of the hyperbolic pair
        basis = [y ^ (pairing(y, partner) * a) ^ (pairing(y, a) * partner)
                 for y in basis]
        pairs.append((a, partner))
    return pairs, pairing


def arf_of_refinement(B, q_values) -> int:
    """Arf invariant of the quadratic refinement q over the alternating form B.

    ``q_values`` lists q(e_i) on the standard basis; q extends by
    q(x + y) = q(x) + q(y) + B(x, y).  The value is the majority invariant
    sum q(a_i) q(b_i) over a symplectic basis, and is basis independent.
    """
    pairs, pairing = _gf2_symplectic_basis(B)

    def q(x):
        total = 0
        idxs = [i for i in range(len(q_values)) if (x >> i) & 1]
        for i in idxs:
            total ^= q_values[i] & 1
        for ii in range(len(idxs)):
            for jj in range(ii + 1, len(idxs)):
                total ^= B[idxs[ii]][idxs[jj]] & 1
        return total

    return sum(q(a) * q(b) for a, b in pairs) % 2


def arf_invariant(tree: PlumbingTree) -> int:
    """Arf invariant of the plumbing's mod-2 quadratic refinement.

    Middle-odd case (skew intersection form); the refinement on the vertex
    basis is the recorded framing value (1 for tangent-bundle vertices).
    """
    M, sym = intersection_matrix(tree)
    if sym != "skew":
        raise TreeStructureError("Arf invariant applies to the middle-odd (skew) case")
    B = [[abs(x) % 2 for x in row] for row in M]
    q_values = [v.framing_q for v in tree.vertices]
    return arf_of_refinement(B, q_values)


# ---------------------------------------------------------------------------
# Clutching words
# ---------------------------------------------------------------------------


def clutching_word(tree: PlumbingTree) -> list:
    """Boundary gluing word of a straight-line plumbing.

    The boundary of an m-chain is two trivial pieces glued along the
    composition of the vertices' clutching maps alternated with the cross
    swap I; trivial bundles drop out and the empty composition renders as
    the plain cross swap (the standard-sphere gluing).
    """
    order = tree.path_order()
    tokens = []
    for pos, vi in enumerate(reversed(order)):
        v = tree.vertices[vi]
        if pos > 0:
            tokens.append("I")
        if not v.trivial:
            tokens.append(v.char_label or f"Phi_{vi + 1}")
    return tokens if tokens else ["I"]


def render_word(tokens) -> str:
    return " . ".join(tokens) if tokens else "I"


# ---------------------------------------------------------------------------
# Spin-index difference of glued pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MilnorPairInput:
    """Clutching data of two 2-vertex plumbings glued along their boundary.

    s, t index the relevant homotopy groups (p = 4s, q = 4t); ps1/pt1 and
    ps2/pt2 are the integer values of the two characteristic-class
    homomorphisms on the respective clutching elements.
    """

    s: int
    t: int
    ps1: int
    pt1: int
    ps2: int
    pt2: int

    def __post_init__(self):
        if not (1 <= self.s <= self.t < 2 * self.s):
            raise ValueError(
                f"need 1 <= s <= t < 2s (the homomorphisms vanish otherwise); "
                f"got s={self.s}, t={self.t}")


def milnor_ahat_difference(inp: MilnorPairInput) -> int:
    """Spin-index difference of the glued double, in units of the dimension
    constant: ps1*pt1 - ps2*pt2.  Nonzero values certify that the two glued
    structures lie in different positive-scalar-curvature components."""
    return inp.ps1 * inp.pt1 - inp.ps2 * inp.pt2


# ---------------------------------------------------------------------------
# Fixed-point ledgers
# ---------------------------------------------------------------------------


def eta_local_contribution(n: int) -> Fraction:
    """Local index contribution of an isolated fixed point: exactly 2^-n."""
    if n < 1:
        raise ValueError("need n >= 1")
    return Fraction(1, 2 ** n)


def eta_rp(n: int) -> Fraction:
    """End invariant of the twisted operator on the odd projective quotient
    under positive scalar curvature: exactly -2^(1-n)."""
    return -2 * eta_local_contribution(n)


def fixed_point_count(m_bundles: int, convention: str = "reported") -> int:
    """Number of isolated fixed points of the involution on an m-bundle chain.

    "reported" follows the recorded count 2l+1 for m = 8l; "chain" counts two
    fixed points per bundle with one identified per plumbing (m + 1).  Both
    are strictly increasing in the chain length, so distinctness results do
    not depend on the convention.
    """
    if m_bundles < 1:
        raise ValueError("need at least one bundle")
    if convention == "reported":
        if m_bundles % 8 != 0:
            raise ValueError("the reported count applies to chains of length 8l")
        warnings.warn(
            "fixed-point count conventions disagree (2l+1 vs m+1); "
            "using 2l+1 -- distinctness is convention independent",
            stacklevel=2)
        return 2 * (m_bundles // 8) + 1
    if convention == "chain":
        return m_bundles + 1
    raise ValueError(f"unknown convention {convention!r}")


@dataclass(frozen=True)
class EtaLedger:
    """Exact fixed-point ledger for a family of chain plumbings.

    ``k`` fixes the boundary dimension 4k+1 (so n = 2k+1); ``lengths``
    indexes the family; ``fixed_point_counts`` maps each length to its
    isolated fixed-point count.  ``manifold_constant`` names the symbolic
    ambient offset shared by every member (it cancels in differences).
    """

    k: int
    lengths: tuple
    fixed_point_counts: dict
    manifold_constant: str = "C_V"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need k >= 1")
        counts = [self.fixed_point_counts[l] for l in self.lengths]
        if sorted(self.lengths) != list(self.lengths):
            raise ValueError("lengths must be increasing")
        if any(c2 <= c1 for c1, c2 in zip(counts, counts[1:])):
            raise ValueError("fixed-point counts must be strictly increasing in the length")

    @property
    def n(self) -> int:
        return 2 * self.k + 1


@dataclass(frozen=True)
class EtaLedgerResult:
    """End invariants eta_l = -2 (count_l 2^-n + C_V) and their distinctness."""

    n: int
    etas: dict                   # length -> Fraction (rational part)
    cv_coefficient: int          # coefficient of the symbolic constant (always -2)
    distinct: bool
    collisions: tuple

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "cv_coefficient": self.cv_coefficient,
            "etas": {str(l): [v.numerator, v.denominator] for l, v in self.etas.items()},
            "distinct": self.distinct,
            "collisions": [list(c) for c in self.collisions],
        }, sort_keys=True, indent=1)


def eta_ledger(ledger: EtaLedger) -> EtaLedgerResult:
    """Evaluate the ledger exactly and certify pairwise distinctness.

    Each end invariant is -2(count * 2^-n + C_V); differences cancel the
    symbolic constant exactly, so distinctness reduces to distinct counts.
    """
    n = ledger.n
    unit = eta_local_contribution(n)
    etas = {l: -2 * ledger.fixed_point_counts[l] * unit for l in ledger.lengths}
    collisions = []
    ls = list(ledger.lengths)
    for i in range(len(ls)):
        for j in range(i + 1, len(ls)):
            if etas[ls[i]] == etas[ls[j]]:
                collisions.append((ls[i], ls[j]))
    return EtaLedgerResult(n=n, etas=etas, cv_coefficient=-2,
                           distinct=not collisions, collisions=tuple(collisions))
