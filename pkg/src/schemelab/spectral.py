"""Numerical Wedderburn decomposition of the adjacency algebra.

The center of the span of the adjacency matrices is computed from the
intersection numbers, a random center element is split into commuting
self-adjoint parts, and their joint eigenprojections are the candidate
central primitive idempotents.  Integer invariants (sum of m*n equal to the
degree, sum of n^2 equal to the rank, m >= n, a principal J/n block) validate
every decomposition; on failure the random element is redrawn with a fresh
seed, up to five times.

All numerics are double precision; no exact arithmetic is used.  The
validation-by-integer-invariants is the module's principal trade-off.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import cc_core, extension
from .cc_core import _require_scheme
from .errors import DecompositionUnstable, TooLarge

DEFAULT_SEED = 20090
CLUSTER_TOL = 1e-8      # eigenvalue gap, relative to the spectral radius
RANK_TOL = 1e-8         # singular-value threshold, relative to sigma_max
INT_TOL = 1e-6          # residual allowed when rounding to integers
DEGREE_CAP = 500
RANK_CAP = 200          # the center solver is dense in (rank^2, rank)


def _resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get("SCHEMELAB_SEED")
    return int(env) if env else DEFAULT_SEED


@dataclass
class IrreducibleBlock:
    """One central primitive idempotent with multiplicity and degree."""
    projector: np.ndarray
    multiplicity: int
    degree: int

    @property
    def pair(self):
        return (self.multiplicity, self.degree)


@dataclass
class SpectralDecomposition:
    blocks: list
    principal_index: int

    @property
    def pairs(self):
        return [b.pair for b in self.blocks]

    @property
    def nonprincipal(self):
        return [b for i, b in enumerate(self.blocks) if i != self.principal_index]


class _Unstable(Exception):
    pass


def _center_basis(cfg):
    """Orthonormal coefficient vectors spanning {z : [sum z_s A(s), A(t)] = 0}."""
    r = cfg.rank
    eqs = np.zeros((r * r, r))
    for (a, b), row in cfg.tensor._products.items():
        for u, c in row.items():
            eqs[b * r + u, a] += c   # + c_{ab}^u  at equation (t=b, u)
            eqs[a * r + u, b] -= c   # - c_{ab}^u  at equation (t=a, u)
    _, sv, vt = np.linalg.svd(eqs)
    rank = int((sv > RANK_TOL * sv[0]).sum()) if sv.size and sv[0] > 0 else 0
    return vt[rank:]


def _cluster(values, scale):
    """Split sorted eigenvalues into groups separated by gaps > tol*scale."""
    groups = []
    start = 0
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > CLUSTER_TOL * scale:
            groups.append(slice(start, i))
            start = i
    groups.append(slice(start, len(values)))
    return groups


def _round_int(x, what):
    k = round(x)
    if abs(x - k) > INT_TOL * max(1.0, abs(x)):
        raise _Unstable(f"{what} = {x} is not integral")
    return int(k)


def _tensor_arrays(cfg):
    """Nonzero tensor entries as flat arrays (u, s, t, c)."""
    entries = [(u, s, t, c) for (u, s, t), c in cfg.tensor.items()]
    u, s, t, c = (np.array(col, dtype=np.int64) for col in zip(*entries))
    return u, s, t, c


def _attempt(cfg, reps, tensor_arrays, basis, rng):
    n, r = cfg.n, cfg.rank
    colors = cfg.colors
    d = basis.shape[0]
    w = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    z = basis.T @ w
    C = z[colors]  # sum_s z_s A(s), read off by color
    H1 = (C + C.conj().T) / 2
    H2 = (C - C.conj().T) / 2j
    scale = max(np.linalg.norm(H1, 2), np.linalg.norm(H2, 2), 1e-12)

    projectors = []
    vals1, vecs1 = np.linalg.eigh(H1)
    for cl1 in _cluster(vals1, scale):
        V1 = vecs1[:, cl1]
        B = V1.conj().T @ H2 @ V1
        vals2, vecs2 = np.linalg.eigh(B)
        for cl2 in _cluster(vals2, scale):
            V = V1 @ vecs2[:, cl2]
            projectors.append(V @ V.conj().T)
    if len(projectors) != d:
        raise _Unstable(f"{len(projectors)} joint eigenspaces for center of dim {d}")

    t_u, t_s, t_t, t_c = tensor_arrays
    blocks = []
    for P in projectors:
        if np.abs(P @ P - P).max() > INT_TOL or np.abs(P - P.conj().T).max() > INT_TOL:
            raise _Unstable("projector fails idempotency/hermiticity")
        # P lies in the adjacency algebra: entries are constant per color.
        coeffs = P[reps]
        if np.abs(coeffs[colors] - P).max() > INT_TOL:
            raise _Unstable("projector entries not constant on colors")
        # Left multiplication by P in algebra coordinates: the ideal P*CS
        # has dimension n_P^2, so n_P is the square root of its rank.
        left = np.zeros((r, r), dtype=complex)
        np.add.at(left, (t_t, t_s), coeffs[t_u] * t_c)
        sv = np.linalg.svd(left, compute_uv=False)
        dim = int((sv > RANK_TOL * sv[0]).sum())
        n_p = _round_int(float(np.sqrt(dim)), "sqrt(dim P*CS)")
        m_p = _round_int(float(P.trace().real) / n_p, "trace(P)/n_P")
        if m_p < n_p:
            raise _Unstable(f"m_P={m_p} < n_P={n_p}")
        blocks.append(IrreducibleBlock(P, m_p, n_p))

    if sum(b.multiplicity * b.degree for b in blocks) != n:
        raise _Unstable("sum m_P n_P != n")
    if sum(b.degree ** 2 for b in blocks) != r:
        raise _Unstable("sum n_P^2 != rank")

    principal = [i for i, b in enumerate(blocks)
                 if np.abs(b.projector - np.full((n, n), 1.0 / n)).max() < INT_TOL]
    if len(principal) != 1 or blocks[principal[0]].pair != (1, 1):
        raise _Unstable("principal idempotent J/n not found")
    p0 = principal[0]
    order = [p0] + sorted((i for i in range(len(blocks)) if i != p0),
                          key=lambda i: (blocks[i].degree, blocks[i].multiplicity, i))
    blocks = [blocks[i] for i in order]
    return SpectralDecomposition(blocks, 0)


def decompose(cfg, seed=None, retries=5):
    """Central primitive idempotents with (m_P, n_P), principal block first.

    Reproducible under a fixed seed; the SCHEMELAB_SEED environment variable
    overrides the default.
    """
    _require_scheme(cfg)
    if cfg.n > DEGREE_CAP:
        raise TooLarge(f"degree {cfg.n} exceeds spectral cap {DEGREE_CAP}")
    if cfg.rank > RANK_CAP:
        raise TooLarge(f"rank {cfg.rank} exceeds spectral cap {RANK_CAP}")
    base_seed = _resolve_seed(seed)
    n, r = cfg.n, cfg.rank
    flat = cfg.colors.ravel()
    first = np.full(r, n * n, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(n * n, dtype=np.int64))
    reps = (first // n, first % n)
    tensor_arrays = _tensor_arrays(cfg)
    basis = _center_basis(cfg)
    last = None
    for attempt in range(retries):
        rng = np.random.default_rng(base_seed + attempt)
        try:
            return _attempt(cfg, reps, tensor_arrays, basis, rng)
        except _Unstable as exc:
            last = exc
    raise DecompositionUnstable(f"all {retries} attempts failed: {last}")


def is_pseudocyclic_spectral(cfg, dec=None, seed=None):
    """The common ratio m_P/n_P over non-principal blocks, or None.

    Returns Fraction(1) for the trivial rank-1 scheme (no non-principal
    blocks), matching the combinatorial convention.
    """
    if dec is None:
        dec = decompose(cfg, seed=seed)
    ratios = {Fraction(b.multiplicity, b.degree) for b in dec.nonprincipal}
    if not ratios:
        return Fraction(1)
    if len(ratios) == 1:
        return ratios.pop()
    return None


def frame_number(cfg, dec):
    """n^r * prod n_s / prod m_P^(n_P^2), as an exact rational.

    A positive integer for every scheme; integrality is the assertion used
    to pin down the block dimensions of pseudocyclic schemes.
    """
    num = cfg.n ** cfg.rank
    for s in range(cfg.rank):
        num *= int(cfg.valencies[s])
    den = 1
    for b in dec.blocks:
        den *= b.multiplicity ** (b.degree ** 2)
    return Fraction(num, den)


def verify_afm_identity(cfg, dec):
    """Max-abs residual of
    sum_s reg(s*)/n_s A(s) = n sum_P (n_P/m_P) P."""
    n = cfg.n
    coeffs = np.array([
        cc_core.reg_number(cfg, int(cfg.star[s])) / int(cfg.valencies[s])
        for s in range(cfg.rank)])
    lhs = coeffs[cfg.colors]
    rhs = np.zeros((n, n), dtype=complex)
    for b in dec.blocks:
        rhs += (b.degree / b.multiplicity) * b.projector
    rhs *= n
    return float(np.abs(lhs - rhs).max())


@dataclass
class TerwilligerResult:
    point: int
    dimension: int              # dim of the Terwilliger algebra T_alpha
    extension_dimension: int    # dim of the adjacency algebra of the alpha-extension
    coincides: bool


def terwilliger_dimension(cfg, alpha, point_cap=200):
    """Dimension of the algebra generated by the adjacency matrices and the
    diagonal indicators of the sets alpha·s, via span closure.

    T_alpha always embeds in the adjacency algebra of the alpha-extension,
    so the closure runs in that algebra's coordinates; the extension
    dimension is reported alongside for the equality comparison."""
    _require_scheme(cfg)
    if cfg.n > point_cap:
        raise TooLarge(f"degree {cfg.n} exceeds Terwilliger cap {point_cap}")
    ext = extension.coherent_closure(cfg, {alpha})
    R = ext.rank

    parent = np.empty(R, dtype=np.int64)
    for t in range(R):
        a, b = ext.relation_pairs(t)[0]
        parent[t] = cfg.colors[a, b]
    ext_diag = np.array(ext.colors.diagonal())

    gens = []
    for s in range(cfg.rank):
        gens.append((parent == s).astype(np.float64))
    for s in range(cfg.rank):
        vec = np.zeros(R)
        for t in ext.diagonal_colors:
            x = int(np.flatnonzero(ext_diag == t)[0])
            if cfg.colors[alpha, x] == s:
                vec[t] = 1.0
        gens.append(vec)

    prods = ext.tensor._products

    def multiply(x, y):
        out = np.zeros(R)
        for (a, b), row in prods.items():
            coeff = x[a] * y[b]
            if coeff:
                for t, c in row.items():
                    out[t] += coeff * c
        return out

    basis = []          # orthonormal rows
    members = []        # raw vectors, for products

    def absorb(vec):
        v = vec.astype(np.float64).copy()
        for q in basis:
            v -= (q @ v) * q
        norm = np.linalg.norm(v)
        if norm > 1e-8 * max(1.0, np.linalg.norm(vec)):
            basis.append(v / norm)
            members.append(vec)
            return True
        return False

    fresh = [g for g in gens if absorb(g)]
    while fresh:
        new = []
        for x in fresh:
            for y in list(members):
                for prod in (multiply(x, y), multiply(y, x)):
                    if absorb(prod):
                        new.append(prod)
        fresh = new
    dim = len(basis)
    return TerwilligerResult(alpha, dim, R, dim == R)
