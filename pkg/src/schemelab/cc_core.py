"""Coherent configurations: color-matrix data model and intersection numbers.

A configuration on n points is stored as an n x n integer matrix of relation
ids ("colors").  ``validate_config`` checks the three defining axioms (the
diagonal is a union of colors, the color partition is transpose-closed, and
all triple intersection counts are constant on each color), then returns an
immutable ``CoherentConfig`` carrying the star map, fibers, valencies and the
full intersection tensor.

Conventions:

* Relation ids of freshly constructed configurations are dense integers
  0..r-1 ordered by first occurrence in a row-major scan of the matrix
  (``canonicalize_colors``); every derived map uses this ordering so golden
  files are reproducible.  One-point extensions keep their own fiber-ordered
  labeling and skip the relabeling step.
* The tensor is stored sparsely as ``{(r, s): {t: c}}``.  One-point
  extensions of a scheme on n points have rank comparable to n^2/4, which a
  dense r^3 array cannot accommodate; a dense view is available for small
  ranks via ``IntersectionTensor.as_array``.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    AxiomS1Violated,
    AxiomS2Violated,
    AxiomS3Violated,
    BadRelationId,
    NotAScheme,
    TooLarge,
)
from .parallel import run_chunked

_EMPTY: dict = {}


def canonicalize_colors(colors):
    """Relabel color ids to first-occurrence order in a row-major scan."""
    colors = np.ascontiguousarray(colors, dtype=np.int64)
    flat = colors.ravel()
    r = int(flat.max()) + 1
    first = np.full(r, flat.size, dtype=np.int64)
    np.minimum.at(first, flat, np.arange(flat.size, dtype=np.int64))
    order = np.argsort(first, kind="stable")
    relabel = np.empty(r, dtype=np.int64)
    relabel[order] = np.arange(r, dtype=np.int64)
    return relabel[colors]


class IntersectionTensor:
    """Intersection numbers c_{rs}^t of a coherent configuration."""

    def __init__(self, rank, products):
        self.rank = rank
        self._products = products  # {(r, s): {t: c}}, nonzero entries only

    def __getitem__(self, rst):
        r, s, t = rst
        return self._products.get((r, s), _EMPTY).get(t, 0)

    def products(self, r, s):
        """Nonzero slice {t: c_{rs}^t} for fixed (r, s)."""
        return self._products.get((r, s), _EMPTY)

    def items(self):
        """Iterate ((r, s, t), c) over nonzero entries."""
        for (r, s), row in self._products.items():
            for t, c in row.items():
                yield (r, s, t), c

    def nonzero_count(self):
        return sum(len(row) for row in self._products.values())

    def as_array(self, max_rank=150):
        """Dense (r, r, r) int array; refuses for large ranks."""
        if self.rank > max_rank:
            raise TooLarge(f"rank {self.rank} exceeds dense-tensor cap {max_rank}")
        arr = np.zeros((self.rank,) * 3, dtype=np.int64)
        for (r, s, t), c in self.items():
            arr[r, s, t] = c
        return arr


class CoherentConfig:
    """A validated coherent configuration (immutable).

    Attributes
    ----------
    colors : (n, n) int array of relation ids
    star : length-r array, star[s] = s*
    diagonal_colors : tuple of ids covering the diagonal
    fibers : tuple of point arrays, ordered by diagonal color id
    point_fiber : length-n array of fiber indices
    relation_source, relation_target : length-r arrays of fiber indices
    valencies : length-r array, n_s per relation (per source fiber)
    tensor : IntersectionTensor
    """

    def __init__(self, colors, star, diagonal_colors, fibers, point_fiber,
                 relation_source, relation_target, valencies, tensor):
        self.colors = colors
        self.star = star
        self.diagonal_colors = diagonal_colors
        self.fibers = fibers
        self.point_fiber = point_fiber
        self.relation_source = relation_source
        self.relation_target = relation_target
        self.valencies = valencies
        self.tensor = tensor
        for arr in (colors, star, point_fiber, relation_source,
                    relation_target, valencies):
            arr.setflags(write=False)

    @property
    def n(self):
        return self.colors.shape[0]

    @property
    def rank(self):
        return len(self.star)

    @property
    def is_scheme(self):
        return len(self.fibers) == 1

    @property
    def identity_color(self):
        """The diagonal color of a scheme."""
        _require_scheme(self)
        return self.diagonal_colors[0]

    @property
    def nondiagonal_colors(self):
        return tuple(s for s in range(self.rank) if s not in self.diagonal_colors)

    def adjacency(self, s, dtype=np.float64):
        self._check_id(s)
        return (self.colors == s).astype(dtype)

    def relation_pairs(self, s):
        self._check_id(s)
        return np.argwhere(self.colors == s)

    def neighbors(self, alpha, s):
        """The set alpha·s as a point array."""
        self._check_id(s)
        return np.flatnonzero(self.colors[alpha] == s)

    def _check_id(self, s):
        if not 0 <= s < self.rank:
            raise BadRelationId(f"relation id {s} out of range 0..{self.rank - 1}")

    def __repr__(self):
        kind = "scheme" if self.is_scheme else "configuration"
        return f"<CoherentConfig {kind} n={self.n} rank={self.rank}>"


def _require_scheme(cfg):
    if not cfg.is_scheme:
        raise NotAScheme(f"configuration has {len(cfg.fibers)} fibers")


def _row_signatures(colors, alpha, r):
    """Sorted composition codes of every pair (alpha, gamma); column gamma
    holds the multiset {color(alpha,beta)*r + color(beta,gamma) : beta}."""
    code = colors[alpha][:, None] * np.int64(r) + colors
    code.sort(axis=0)
    return code


def validate_config(matrix, *, canonicalize=True):
    """Validate a color matrix and build the full CoherentConfig.

    Checks axioms S1 (diagonal is a union of colors), S2 (transpose-closed)
    and S3 (constant triple counts, verified over all pairs of every
    relation, not a sample), computing the intersection tensor along the
    way.  With ``canonicalize`` the ids are first relabeled to row-major
    first-occurrence order.
    """
    colors = np.array(matrix, dtype=np.int64)
    if colors.ndim != 2 or colors.shape[0] != colors.shape[1]:
        raise ValueError("color matrix must be square")
    n = colors.shape[0]
    if n == 0:
        raise ValueError("empty point set")
    if colors.min() < 0:
        raise ValueError("negative relation id")
    r = int(colors.max()) + 1
    if np.bincount(colors.ravel(), minlength=r).min() == 0:
        raise ValueError("relation ids must be contiguous from 0")
    if canonicalize:
        colors = canonicalize_colors(colors)

    # S1: a color that meets the diagonal must lie inside it.
    diag = colors.diagonal().copy()
    diag_counts = np.bincount(diag, minlength=r)
    total_counts = np.bincount(colors.ravel(), minlength=r)
    mixed = np.flatnonzero((diag_counts > 0) & (diag_counts != total_counts))
    if mixed.size:
        s = int(mixed[0])
        raise AxiomS1Violated(
            f"color {s} has {int(diag_counts[s])} diagonal and "
            f"{int(total_counts[s] - diag_counts[s])} off-diagonal pairs")
    diagonal_colors = tuple(int(d) for d in np.flatnonzero(diag_counts > 0))

    # S2: the transpose of each color is a single color.
    pair_codes = np.unique(colors.ravel() * np.int64(r) + colors.T.ravel())
    if pair_codes.size != r:
        c_of = pair_codes // r
        dup = int(c_of[np.flatnonzero(c_of[1:] == c_of[:-1])[0]])
        parts = pair_codes[c_of == dup] % r
        raise AxiomS2Violated(
            f"transpose of color {dup} is split across colors {parts.tolist()}")
    star = np.empty(r, dtype=np.int64)
    star[pair_codes // r] = pair_codes % r
    if not np.array_equal(star[star], np.arange(r)):
        raise AxiomS2Violated("star map is not an involution")

    # Fibers, and the source/target fiber of every relation.
    fiber_of_diag = {d: i for i, d in enumerate(diagonal_colors)}
    point_fiber = np.array([fiber_of_diag[int(d)] for d in diag], dtype=np.int64)
    nf = len(diagonal_colors)
    fibers = tuple(np.flatnonzero(diag == d) for d in diagonal_colors)
    relation_source = _relation_fibers(colors, point_fiber, nf, r, axis=0)
    relation_target = _relation_fibers(colors, point_fiber, nf, r, axis=1)

    # Valencies: |alpha·s| constant over the source fiber (a special case of
    # S3 with the triple (s, s*, 1_fiber), checked here for a sharper error).
    rowcount = np.zeros((n, r), dtype=np.int64)
    np.add.at(rowcount, (np.arange(n)[:, None], colors), 1)
    valencies = np.zeros(r, dtype=np.int64)
    for s in range(r):
        rows = fibers[relation_source[s]]
        v = rowcount[rows, s]
        if not np.all(v == v[0]):
            bad = rows[int(np.flatnonzero(v != v[0])[0])]
            a0 = int(rows[0])
            raise AxiomS3Violated(
                f"valency of color {s} differs between points {a0} and {int(bad)}",
                triple=(s, int(star[s]), int(diag[a0])),
                pairs=((a0, a0), (int(bad), int(bad))),
                counts=(int(v[0]), int(rowcount[bad, s])))
        valencies[s] = v[0]

    # S3 in full: the sorted composition-code multiset of (alpha, gamma) must
    # be identical for all pairs of each color.  References are pinned at the
    # row-major first occurrence of every color, so threaded verification is
    # deterministic.
    flat = colors.ravel()
    first_cell = np.full(r, n * n, dtype=np.int64)
    np.minimum.at(first_cell, flat, np.arange(n * n, dtype=np.int64))
    first_row = first_cell // n
    first_col = first_cell % n
    ref = np.empty((r, n), dtype=np.int64)
    for alpha in np.unique(first_row):
        sig = _row_signatures(colors, int(alpha), r)
        for t in np.flatnonzero(first_row == alpha):
            ref[t] = sig[:, first_col[t]]

    bad_cells = np.full(n, -1, dtype=np.int64)

    def check_rows(lo, hi):
        for alpha in range(lo, hi):
            sig = _row_signatures(colors, alpha, r)
            ok = (sig == ref[colors[alpha]].T).all(axis=0)
            if not ok.all():
                bad_cells[alpha] = int(np.flatnonzero(~ok)[0])

    run_chunked(check_rows, n)
    bad_rows = np.flatnonzero(bad_cells >= 0)
    if bad_rows.size:
        alpha = int(bad_rows[0])
        gamma = int(bad_cells[alpha])
        t = int(colors[alpha, gamma])
        sig = _row_signatures(colors, alpha, r)[:, gamma]
        code, c1, c2 = _first_multiset_difference(sig, ref[t])
        rr, ss = divmod(code, r)
        raise AxiomS3Violated(
            f"c[{rr}][{ss}][{t}] is {c1} at pair ({alpha},{gamma}) but {c2} at "
            f"pair ({int(first_row[t])},{int(first_col[t])})",
            triple=(int(rr), int(ss), t),
            pairs=((alpha, gamma), (int(first_row[t]), int(first_col[t]))),
            counts=(c1, c2))

    products: dict = {}
    for t in range(r):
        codes, counts = np.unique(ref[t], return_counts=True)
        for code, c in zip(codes.tolist(), counts.tolist()):
            rr, ss = divmod(code, r)
            products.setdefault((rr, ss), {})[t] = c
    tensor = IntersectionTensor(r, products)

    return CoherentConfig(colors, star, diagonal_colors, fibers, point_fiber,
                          relation_source, relation_target, valencies, tensor)


def _relation_fibers(colors, point_fiber, nf, r, axis):
    """Fiber index of every relation on the given side; raises if mixed."""
    if axis == 0:
        codes = colors * np.int64(nf) + point_fiber[:, None]
    else:
        codes = colors * np.int64(nf) + point_fiber[None, :]
    uniq = np.unique(codes.ravel())
    owners = uniq // nf
    if uniq.size != r:
        dup = int(owners[np.flatnonzero(owners[1:] == owners[:-1])[0]])
        side = "source" if axis == 0 else "target"
        raise AxiomS3Violated(
            f"color {dup} crosses {side} fibers "
            f"{(uniq[owners == dup] % nf).tolist()}",
            triple=None, pairs=None, counts=None)
    out = np.empty(r, dtype=np.int64)
    out[owners] = uniq % nf
    return out


def _first_multiset_difference(a, b):
    """First code whose multiplicity differs between two sorted arrays."""
    codes = np.union1d(a, b)
    ca = np.searchsorted(a, codes, side="right") - np.searchsorted(a, codes, side="left")
    cb = np.searchsorted(b, codes, side="right") - np.searchsorted(b, codes, side="left")
    i = int(np.flatnonzero(ca != cb)[0])
    return int(codes[i]), int(ca[i]), int(cb[i])


def complex_product(cfg, r, s):
    """The set rs = {t : c_{rs}^t > 0} of basis relations in r·s."""
    cfg._check_id(r)
    cfg._check_id(s)
    return frozenset(cfg.tensor.products(r, s))


def indistinguishing_number(cfg, s):
    """c(s) = sum_t c_{t t*}^s; counts points related equally to both ends
    of a pair in s.  c(1_Omega) = n."""
    _require_scheme(cfg)
    cfg._check_id(s)
    star = cfg.star
    return int(sum(cfg.tensor[t, int(star[t]), s] for t in range(cfg.rank)))


def reg_number(cfg, s):
    """reg(s) = sum_t c_{s t}^t.

    The adjacency-algebra identity uses the starred indexing reg(s*); both
    are reachable from this function through the star map.
    """
    _require_scheme(cfg)
    cfg._check_id(s)
    return int(sum(cfg.tensor[s, t, t] for t in range(cfg.rank)))


def scheme_indistinguishing_number(cfg):
    """max c(s) over the non-diagonal relations (the scheme's c)."""
    _require_scheme(cfg)
    non = cfg.nondiagonal_colors
    if not non:
        return 0
    return max(indistinguishing_number(cfg, s) for s in non)


def is_equivalenced(cfg):
    """The common valency k when all non-diagonal valencies agree, else None.

    The trivial rank-1 scheme is reported equivalenced of valency 1.
    """
    _require_scheme(cfg)
    vals = {int(cfg.valencies[s]) for s in cfg.nondiagonal_colors}
    if not vals:
        return 1
    if len(vals) == 1:
        return vals.pop()
    return None


def is_pseudocyclic_combinatorial(cfg):
    """The valency k when the scheme is equivalenced with c(r) = k - 1 for
    every non-diagonal r, else None."""
    k = is_equivalenced(cfg)
    if k is None:
        return None
    for s in cfg.nondiagonal_colors:
        if indistinguishing_number(cfg, s) != k - 1:
            return None
    return k


def is_commutative(cfg):
    """Whether c_{rs}^t = c_{sr}^t for all triples."""
    prods = cfg.tensor._products
    for (a, b), row in prods.items():
        if a < b and prods.get((b, a), _EMPTY) != row:
            return False
    return True


def is_symmetric(cfg):
    """Whether every relation is its own transpose."""
    return bool(np.array_equal(cfg.star, np.arange(cfg.rank)))


def same_partition(cfg1, cfg2):
    """Whether two configurations induce the same partition of pairs."""
    if cfg1.n != cfg2.n or cfg1.rank != cfg2.rank:
        return False
    return partition_bijection(cfg1, cfg2) is not None


def partition_bijection(cfg1, cfg2):
    """Color bijection identifying equal pair partitions, else None.

    Matching is by co-occurrence (greedy first occurrence), which is unique
    whenever the partitions coincide.
    """
    if cfg1.n != cfg2.n:
        return None
    r1, r2 = cfg1.rank, cfg2.rank
    codes = np.unique(cfg1.colors.ravel() * np.int64(r2) + cfg2.colors.ravel())
    if codes.size != r1 or codes.size != r2:
        return None
    a = codes // r2
    b = codes % r2
    if np.unique(a).size != r1 or np.unique(b).size != r2:
        return None
    mapping = np.empty(r1, dtype=np.int64)
    mapping[a] = b
    return mapping
