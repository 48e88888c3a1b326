"""Twisted simplicial cochains on odd-dimensional simplicial complexes.

A flat bundle is given by transport matrices on oriented edges; a cochain's
value on ``(v0, ..., vq)`` lives in the fibre over ``v0``. The flux is a scalar
top-degree cochain ``h`` acting by the Alexander-Whitney cup product, which on a
complex of dimension ``n`` can only hit 0-cochains, so ``(h cup)^2 = 0`` and the
twisted differential squares to zero by degree alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from ..complex import BilinearStructure, GradedComplex
from ..exceptions import DimensionError, ValidationError


def closure(top_simplices):
    """All faces of the given simplices, grouped by dimension, each sorted."""
    faces = {}
    for s in top_simplices:
        s = tuple(sorted(s))
        for q in range(len(s)):
            for f in itertools.combinations(s, q + 1):
                faces.setdefault(q, set()).add(f)
    return [sorted(faces[q]) for q in sorted(faces)]


@dataclass(frozen=True, eq=False)
class SimplicialTwistedModel:
    """Simplicial complex of odd dimension with a flat bundle and a top-degree flux.

    ``holonomy`` maps an edge ``(a, b)`` with ``a < b`` to the matrix carrying the
    fibre over ``b`` to the fibre over ``a``; missing edges get the identity.
    ``flux`` maps top simplices to scalars; missing ones are zero.
    """

    top_simplices: tuple
    rank: int = 1
    holonomy: dict = field(default_factory=dict)
    flux: dict = field(default_factory=dict)
    b_fibre: np.ndarray = None
    cell_weights: dict = field(default_factory=dict)
    flatness_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        tops = tuple(tuple(sorted(int(v) for v in s)) for s in self.top_simplices)
        if not tops or len({len(s) for s in tops}) != 1:
            raise DimensionError("top simplices must be non-empty and of one dimension")
        n = len(tops[0]) - 1
        if n % 2 == 0:
            raise ValidationError(f"dimension {n} is even; twisted complexes here need odd dimension")
        object.__setattr__(self, "top_simplices", tops)
        r = int(self.rank)
        hol = {}
        for e, g in self.holonomy.items():
            a, c = (int(x) for x in e)
            g = np.array(g, dtype=complex).reshape(r, r)
            if a < c:
                hol[(a, c)] = g
            else:
                hol[(c, a)] = np.linalg.inv(g)
        object.__setattr__(self, "holonomy", hol)
        flux = {tuple(sorted(int(v) for v in s)): complex(x) for s, x in self.flux.items()}
        for s in flux:
            if s not in set(tops):
                raise ValidationError(f"flux given on {s}, which is not a top simplex")
        object.__setattr__(self, "flux", flux)
        bf = np.eye(r, dtype=complex) if self.b_fibre is None else np.array(self.b_fibre, dtype=complex)
        if not np.array_equal(bf, bf.T):
            raise ValidationError("fibre form is not symmetric")
        object.__setattr__(self, "b_fibre", bf)
        self.check_flatness()

    @property
    def dimension(self):
        return len(self.top_simplices[0]) - 1

    def cells(self):
        return closure(self.top_simplices)

    def transport(self, a, b):
        """Matrix carrying the fibre over ``b`` to the fibre over ``a``."""
        if a == b:
            return np.eye(self.rank, dtype=complex)
        if a < b:
            return self.holonomy.get((a, b), np.eye(self.rank, dtype=complex))
        return np.linalg.inv(self.transport(b, a))

    def check_flatness(self):
        """Raise unless ``g_ab g_bc = g_ac`` on every 2-simplex."""
        cells = self.cells()
        if len(cells) < 3:
            return
        for a, b, c in cells[2]:
            lhs = self.transport(a, b) @ self.transport(b, c)
            rhs = self.transport(a, c)
            res = np.abs(lhs - rhs).max()
            if res > self.flatness_tol * max(1.0, np.abs(rhs).max()):
                raise ValidationError(f"holonomy is not flat on triangle {(a, b, c)} (residual {res:.3e})")


def coboundary_blocks(model):
    """Twisted coboundaries ``C^q -> C^{q+1}`` as dense matrices, indexed by ``q``."""
    cells = model.cells()
    r = model.rank
    index = [{s: i for i, s in enumerate(cq)} for cq in cells]
    out = []
    for q in range(len(cells) - 1):
        M = np.zeros((r * len(cells[q + 1]), r * len(cells[q])), dtype=complex)
        for row, s in enumerate(cells[q + 1]):
            for j in range(q + 2):
                face = s[:j] + s[j + 1 :]
                col = index[q][face]
                blk = model.transport(s[0], s[1]) if j == 0 else np.eye(r)
                M[row * r : (row + 1) * r, col * r : (col + 1) * r] += (-1) ** j * blk
        out.append(M)
    return out


def flux_block(model):
    """Cup with ``h``: ``C^0 -> C^n``, ``(h cup f)(s) = h(s) g_{s0 sn} f(s_n)``."""
    cells = model.cells()
    r, n = model.rank, model.dimension
    index0 = {s: i for i, s in enumerate(cells[0])}
    M = np.zeros((r * len(cells[n]), r * len(cells[0])), dtype=complex)
    for row, s in enumerate(cells[n]):
        h = model.flux.get(s, 0j)
        if h:
            col = index0[(s[-1],)]
            M[row * r : (row + 1) * r, col * r : (col + 1) * r] += h * model.transport(s[0], s[-1])
    return M


def degree_offsets(model):
    """Start index of each degree inside its parity block."""
    cells = model.cells()
    r = model.rank
    offs, sizes = {}, {0: 0, 1: 0}
    for q, cq in enumerate(cells):
        offs[q] = sizes[q % 2]
        sizes[q % 2] += r * len(cq)
    return offs, sizes[0], sizes[1]


def build_simplicial(model):
    """``(K, b)`` with ``C_even = C^0 + C^2 + ...`` and ``C_odd = C^1 + C^3 + ...``.

    Raises
    ------
    ValidationError
        If the assembled differential does not square to zero.
    """
    cells = model.cells()
    offs, n_even, n_odd = degree_offsets(model)
    d_even = np.zeros((n_odd, n_even), dtype=complex)
    d_odd = np.zeros((n_even, n_odd), dtype=complex)
    for q, M in enumerate(coboundary_blocks(model)):
        tgt = d_even if q % 2 == 0 else d_odd
        r0, c0 = offs[q + 1], offs[q]
        tgt[r0 : r0 + M.shape[0], c0 : c0 + M.shape[1]] += M
    n = model.dimension
    F = flux_block(model)
    d_even[offs[n] : offs[n] + F.shape[0], : F.shape[1]] += F
    K = GradedComplex(d_even, d_odd)
    res = max(np.abs(K.d_odd @ K.d_even).max(initial=0), np.abs(K.d_even @ K.d_odd).max(initial=0))
    if res > 1e-12 * K.scale() ** 2:
        raise ValidationError(f"twisted differential does not square to zero (residual {res:.3e})")
    forms = {0: [], 1: []}
    for q, cq in enumerate(cells):
        for s in cq:
            forms[q % 2].append(model.cell_weights.get(s, 1.0) * model.b_fibre)
    b = BilinearStructure(block_diag(*forms[0]), block_diag(*forms[1]))
    return K, b


def vertex_mean_operator(model, B):
    """Multiplication by the mean of a vertex function over each simplex, per parity.

    On a closed combinatorial manifold of odd dimension its supertrace vanishes,
    which is what makes it an admissible gauge generator here.
    """
    cells = model.cells()
    r = model.rank
    diag = {0: [], 1: []}
    for q, cq in enumerate(cells):
        for s in cq:
            diag[q % 2].extend([np.mean([B[v] for v in s])] * r)
    return np.diag(np.array(diag[0], dtype=complex)), np.diag(np.array(diag[1], dtype=complex))


def circle(n_vertices=3, holonomy=1.0, flux=0.0, rank=1):
    """Triangulated circle with holonomy on the closing edge ``(0, n-1)`` and flux on edge ``(0, 1)``."""
    tops = tuple((i, (i + 1) % n_vertices) for i in range(n_vertices))
    g = np.atleast_2d(np.asarray(holonomy, dtype=complex))
    if g.shape == (1, 1) and rank > 1:
        g = g[0, 0] * np.eye(rank)
    hol = {(0, n_vertices - 1): g}
    fl = {(0, 1): flux} if flux else {}
    return SimplicialTwistedModel(tops, rank, hol, fl)


def sphere3(flux=0.0, holonomy_gauge=None, rank=1):
    """Boundary of the 4-simplex, a triangulated 3-sphere.

    Flat bundles on a simply connected space are trivial, so a holonomy is only
    available in the gauge-trivial form ``g_ab = P_a P_b^-1`` built from
    ``holonomy_gauge`` (one invertible matrix per vertex).
    """
    tops = tuple(itertools.combinations(range(5), 4))
    hol = {}
    if holonomy_gauge is not None:
        P = [np.atleast_2d(np.asarray(p, dtype=complex)) for p in holonomy_gauge]
        for a, b in itertools.combinations(range(5), 2):
            hol[(a, b)] = P[a] @ np.linalg.inv(P[b])
    fl = {tops[0]: flux} if flux else {}
    return SimplicialTwistedModel(tops, rank, hol, fl)
