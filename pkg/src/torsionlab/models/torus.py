"""Fourier-truncated twisted de Rham complex of the flat 3-torus.

Sections of ``Lambda(T^3) (x) C^r`` are truncated to modes ``k`` with
``max|k_i| <= N``. With a constant flat connection ``d + sum A_i dx_i`` and a
constant top-degree flux ``c dx^123`` every operator preserves each mode, while
the bilinear Gram form pairs mode ``k`` with mode ``-k`` (the integral of
``e^{i<k+k', x>}`` vanishes otherwise). The natural blocks are therefore the
antipodal pairs ``{k, -k}``; the zero mode is a pair on its own.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from ..complex import BilinearStructure, GradedComplex, cohomology_basis, symmetrize
from ..exceptions import DimensionError, ValidationError
from ..torsion import ChiralityData, cappell_miller_torsion, chirality_residuals, torsion

# Form bases, as sorted index tuples into (x1, x2, x3).
EVEN_FORMS = ((), (0, 1), (0, 2), (1, 2))
ODD_FORMS = ((0,), (1,), (2,), (0, 1, 2))
FORMS = EVEN_FORMS + ODD_FORMS
_INDEX = {I: j for j, I in enumerate(FORMS)}


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def wedge_matrix(J):
    """8x8 matrix of ``dx^J ^ .`` on the form basis ``FORMS``."""
    E = np.zeros((8, 8))
    for col, I in enumerate(FORMS):
        if set(I) & set(J):
            continue
        out = tuple(sorted(J + I))
        E[_INDEX[out], col] = _perm_sign(J + I)
    return E


def hodge_star(scales):
    """8x8 Hodge star of the constant metric ``diag(s_i^2)``."""
    s = np.asarray(scales, dtype=float)
    S = np.zeros((8, 8))
    for col, I in enumerate(FORMS):
        Ic = tuple(i for i in range(3) if i not in I)
        S[_INDEX[Ic], col] = _perm_sign(I + Ic) * np.prod(s[list(Ic)]) / np.prod(s[list(I)])
    return S


def chirality_matrix(scales):
    """``Gamma = i^2 (-1)^{q(q+1)/2} *`` on q-forms; an involution."""
    star = hodge_star(scales)
    sign = np.array([-((-1) ** (len(I) * (len(I) + 1) // 2)) for I in FORMS], dtype=float)
    return star * sign[None, :]


def form_weights(scales):
    """Pointwise norms ``|dx^I|^2 = prod_{i in I} s_i^-2``."""
    s = np.asarray(scales, dtype=float)
    return np.array([np.prod(s[list(I)] ** -2.0) for I in FORMS])


@dataclass(frozen=True, eq=False)
class TorusModel:
    """Constant flat connection, constant flux and constant metric on ``T^3 = R^3 / (2 pi Z)^3``."""

    rank: int
    A: tuple
    scales: tuple = (1.0, 1.0, 1.0)
    flux: complex = 0j
    cutoff: int = 0
    b_E: np.ndarray = None
    commutator_tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        r = int(self.rank)
        if r < 1:
            raise DimensionError("rank must be positive")
        A = tuple(np.array(a, dtype=complex) for a in self.A)
        if len(A) != 3 or any(a.shape != (r, r) for a in A):
            raise DimensionError(f"A must be three {r}x{r} matrices")
        scales = tuple(float(x) for x in self.scales)
        if len(scales) != 3 or min(scales) <= 0:
            raise ValidationError("scales must be three positive numbers")
        if int(self.cutoff) < 0:
            raise ValidationError("cutoff must be non-negative")
        bE = np.eye(r, dtype=complex) if self.b_E is None else np.array(self.b_E, dtype=complex)
        if bE.shape != (r, r):
            raise DimensionError(f"b_E must be {r}x{r}")
        if not np.array_equal(bE, bE.T):
            raise ValidationError("b_E is not symmetric")
        if np.linalg.cond(bE) > 1e12:
            raise ValidationError("b_E is singular")
        ref = max(1.0, max(np.abs(a).max() for a in A)) ** 2
        for i, j in ((0, 1), (0, 2), (1, 2)):
            res = np.abs(A[i] @ A[j] - A[j] @ A[i]).max()
            if res > self.commutator_tol * ref:
                raise ValidationError(f"connection is not flat: [A_{i + 1}, A_{j + 1}] has size {res:.3e}")
        for a in A:
            a.setflags(write=False)
        bE.setflags(write=False)
        object.__setattr__(self, "rank", r)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "flux", complex(self.flux))
        object.__setattr__(self, "cutoff", int(self.cutoff))
        object.__setattr__(self, "b_E", bE)

    def replace(self, **changes):
        kw = dict(rank=self.rank, A=self.A, scales=self.scales, flux=self.flux, cutoff=self.cutoff, b_E=self.b_E)
        kw.update(changes)
        return TorusModel(**kw)

    @property
    def volume(self):
        return (2 * np.pi) ** 3 * float(np.prod(self.scales))

    def modes(self):
        N = self.cutoff
        return list(itertools.product(range(-N, N + 1), repeat=3))

    def pairs(self):
        """Antipodal pairs ``(k, -k)`` with ``k`` lexicographically positive; the zero mode first, alone."""
        out = [((0, 0, 0),)]
        for k in self.modes():
            if k > (0, 0, 0):
                out.append((k, tuple(-x for x in k)))
        return out

    def dims(self):
        n = 4 * self.rank * len(self.modes())
        return n, n


def mode_differential(model, k):
    """``8r x 8r`` matrix of ``d^H`` on mode ``k`` in the basis ``FORMS (x) C^r``."""
    r = model.rank
    D = np.zeros((8 * r, 8 * r), dtype=complex)
    I = np.eye(r)
    for i in range(3):
        D += np.kron(wedge_matrix((i,)), 1j * k[i] * I + model.A[i])
    D += np.kron(wedge_matrix((0, 1, 2)), model.flux * I)
    return D


def _split(M, r):
    ne = 4 * r
    return M[ne:, :ne], M[:ne, ne:]


@dataclass(frozen=True, eq=False)
class TorusBlock:
    """One antipodal-pair block: subcomplex, Gram form, chirality and its modes."""

    modes: tuple
    complex: GradedComplex
    form: BilinearStructure
    chirality: ChiralityData


def build_block(model, pair):
    r = model.rank
    Ds = [mode_differential(model, k) for k in pair]
    d_even = block_diag(*[_split(D, r)[0] for D in Ds])
    d_odd = block_diag(*[_split(D, r)[1] for D in Ds])
    G = model.volume * np.kron(np.diag(form_weights(model.scales)), model.b_E)
    Ge, Go = G[: 4 * r, : 4 * r], G[4 * r :, 4 * r :]
    if len(pair) == 1:
        Be, Bo = Ge, Go
    else:
        Z = np.zeros_like(Ge)
        Be, Bo = np.block([[Z, Ge], [Ge, Z]]), np.block([[Z, Go], [Go, Z]])
    Gam = np.kron(chirality_matrix(model.scales), np.eye(r))
    g_eo = block_diag(*[Gam[4 * r :, : 4 * r]] * len(pair))
    g_oe = block_diag(*[Gam[: 4 * r, 4 * r :]] * len(pair))
    return TorusBlock(
        tuple(pair),
        GradedComplex(d_even, d_odd),
        BilinearStructure(symmetrize(Be), symmetrize(Bo)),
        ChiralityData(g_eo, g_oe),
    )


def torus_blocks(model):
    """Per-pair blocks in deterministic mode order."""
    return [build_block(model, p) for p in model.pairs()]


def build_torus(model):
    """Global ``(K, b, Gamma)``, block-diagonal over antipodal pairs in ``model.pairs()`` order."""
    blocks = torus_blocks(model)
    K = GradedComplex(
        block_diag(*[B.complex.d_even for B in blocks]), block_diag(*[B.complex.d_odd for B in blocks])
    )
    b = BilinearStructure(
        block_diag(*[B.form.B_even for B in blocks]), block_diag(*[B.form.B_odd for B in blocks])
    )
    Gamma = ChiralityData(
        block_diag(*[B.chirality.Gamma_even_to_odd for B in blocks]),
        block_diag(*[B.chirality.Gamma_odd_to_even for B in blocks]),
    )
    return K, b, Gamma


def block_cohomology_bases(model, blocks=None):
    blocks = blocks if blocks is not None else torus_blocks(model)
    return [cohomology_basis(B.complex) for B in blocks]


def assemble_basis(bases):
    """Block-diagonal global cohomology basis from per-block bases."""
    return block_diag(*[h[0] for h in bases]), block_diag(*[h[1] for h in bases])


def torus_cohomology_dims(model):
    bases = block_cohomology_bases(model)
    return sum(h[0].shape[1] for h in bases), sum(h[1].shape[1] for h in bases)


@dataclass(frozen=True)
class BlockProduct:
    """Torsion as a product over blocks: total log and the per-block logs in mode order."""

    log_value: complex
    block_logs: tuple
    modes: tuple
    components: dict = field(default_factory=dict)
    cohomology_dims: tuple = (0, 0)

    @property
    def value(self):
        return complex(np.exp(self.log_value))

    def as_dict(self):
        return {
            "value": [self.value.real, self.value.imag],
            "log_value": [self.log_value.real, self.log_value.imag],
            "components": {k: [complex(v).real, complex(v).imag] for k, v in self.components.items()},
            "cohomology_dims": list(self.cohomology_dims),
            "blocks": [
                {"modes": [list(k) for k in m], "log_value": [complex(x).real, complex(x).imag]}
                for m, x in zip(self.modes, self.block_logs)
            ],
        }


def _block_product(values, blocks, bases):
    comps = {}
    for v in values:
        for key, x in v.components.items():
            comps[key] = comps.get(key, 0j) + complex(x)
    dims = (sum(h[0].shape[1] for h in bases), sum(h[1].shape[1] for h in bases))
    logs = tuple(v.log_value for v in values)
    return BlockProduct(complex(sum(logs)), logs, tuple(B.modes for B in blocks), comps, dims)


def torus_torsion(model, a=0.0, bases=None, cluster_tol=1e-8):
    """Bilinear torsion assembled multiplicatively from the pair blocks."""
    blocks = torus_blocks(model)
    bases = bases if bases is not None else block_cohomology_bases(model, blocks)
    vals = [torsion(B.complex, B.form, a, h, cluster_tol) for B, h in zip(blocks, bases)]
    return _block_product(vals, blocks, bases)


def torus_cm_torsion(model, a=0.0, bases=None, cluster_tol=1e-8):
    blocks = torus_blocks(model)
    bases = bases if bases is not None else block_cohomology_bases(model, blocks)
    vals = [cappell_miller_torsion(B.complex, B.chirality, a, h, cluster_tol) for B, h in zip(blocks, bases)]
    return _block_product(vals, blocks, bases)


def dual_connection(model):
    """Model of the dual connection ``A'_i = -b_E^-1 A_i^T b_E`` with the same flux."""
    bE = model.b_E
    A_dual = tuple(-np.linalg.solve(bE, a.T @ bE) for a in model.A)
    return model.replace(A=A_dual)


def dual_connection_residual(model, rng=None, samples=4):
    """Residual of ``d b(u, v) = b(nabla u, v) + b(u, nabla' v)`` on mode sections.

    For ``u = e^{i<k,x>} u0`` and ``v = e^{i<l,x>} v0`` both sides are multiples
    of ``e^{i<k+l,x>} dx_i``, so the identity reduces to coefficients.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    dual = dual_connection(model)
    bE, r = model.b_E, model.rank
    worst = 0.0
    for _ in range(samples):
        u0 = rng.normal(size=r) + 1j * rng.normal(size=r)
        v0 = rng.normal(size=r) + 1j * rng.normal(size=r)
        k = rng.integers(-3, 4, size=3)
        l = rng.integers(-3, 4, size=3)
        for i in range(3):
            lhs = 1j * (k[i] + l[i]) * (u0 @ bE @ v0)
            rhs = ((1j * k[i] * u0 + model.A[i] @ u0) @ bE @ v0) + (u0 @ bE @ (1j * l[i] * v0 + dual.A[i] @ v0))
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst


def chirality_identities_check(model):
    """Worst residuals of the chirality identities over all pair blocks."""
    dual = dual_connection(model)
    worst = {}
    for B, Bd in zip(torus_blocks(model), torus_blocks(dual)):
        res = chirality_residuals(B.complex, B.form, B.chirality, Bd.complex)
        for key, val in res.items():
            worst[key] = max(worst.get(key, 0.0), val)
    return worst


def random_commuting(rng, r, count=3, spread=1.0):
    """Commuting matrices ``P D_i P^-1`` with random diagonal ``D_i``."""
    P = np.eye(r) + 0.4 * (rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))) / np.sqrt(2 * r)
    Pinv = np.linalg.inv(P)
    out = []
    for _ in range(count):
        D = np.diag(spread * (rng.normal(size=r) + 1j * rng.normal(size=r)))
        out.append(P @ D @ Pinv)
    return tuple(out)


def random_torus_model(rng, rank=2, cutoff=1, flux=None):
    """Model with commuting holonomy, non-identity symmetric ``b_E`` and random scales."""
    A = random_commuting(rng, rank, spread=0.7)
    R = np.eye(rank) + 0.4 * (rng.normal(size=(rank, rank)) + 1j * rng.normal(size=(rank, rank))) / np.sqrt(2 * rank)
    bE = R @ R.T
    bE = (bE + bE.T) / 2
    scales = tuple(np.exp(rng.uniform(-0.3, 0.3, size=3)))
    c = complex(rng.normal(), rng.normal()) if flux is None else flux
    return TorusModel(rank, A, scales, c, cutoff, bE)
