"""Algebraic isomorphisms and their one-point extensions, schurity and
separability testing, fusions, the t-condition, affine recognition, and
2-design extraction.

Separability is decidable here only against self-maps (plus any explicitly
supplied targets); reports label that scope.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import cc_core, extension, permgroup
from .cc_core import _require_scheme
from .errors import (
    NotAnAlgebraicAutomorphism,
    NotCoherent,
    AxiomS3Violated,
    RankTooLarge,
    TooLarge,
    ValencyTooSmall,
    ValidationFailed,
)

ISO_RANK_CAP = 40
T_CONDITION_POINT_CAP = 100


@dataclass(frozen=True)
class ColorBijection:
    """A candidate algebraic isomorphism between two configurations."""
    source: cc_core.CoherentConfig
    target: cc_core.CoherentConfig
    mapping: tuple

    def __post_init__(self):
        if len(self.mapping) != self.source.rank or self.source.rank != self.target.rank:
            raise ValueError("mapping length must equal the common rank")

    def __call__(self, s):
        return self.mapping[s]

    def is_valid(self):
        """Whether every intersection number is preserved."""
        m = self.mapping
        if sorted(m) != list(range(self.source.rank)):
            return False
        src = self.source.tensor
        dst = self.target.tensor
        if src.nonzero_count() != dst.nonzero_count():
            return False
        for (a, b), row in src._products.items():
            image = dst.products(m[a], m[b])
            if len(image) != len(row):
                return False
            for t, c in row.items():
                if image.get(m[t]) != c:
                    return False
        return True

    def inverse(self):
        inv = [0] * len(self.mapping)
        for s, t in enumerate(self.mapping):
            inv[t] = s
        return ColorBijection(self.target, self.source, tuple(inv))

    def compose(self, other):
        """self then other (source of self to target of other)."""
        return ColorBijection(self.source, other.target,
                              tuple(other.mapping[t] for t in self.mapping))

    @classmethod
    def identity(cls, cfg):
        return cls(cfg, cfg, tuple(range(cfg.rank)))


def algebraic_isomorphisms(cfg1, cfg2, max_rank=ISO_RANK_CAP):
    """All tensor-preserving color bijections cfg1 -> cfg2.

    Backtracking over color maps with candidate filtering by the structure
    vectors of every assigned pair.  Degrees must match; a rank mismatch
    yields the empty list.
    """
    if cfg1.n != cfg2.n:
        raise ValueError(f"degree mismatch: {cfg1.n} vs {cfg2.n}")
    if cfg1.rank != cfg2.rank:
        return []
    r = cfg1.rank
    if r > max_rank:
        raise RankTooLarge(f"rank {r} exceeds enumeration cap {max_rank}")
    T1 = cfg1.tensor.as_array(max_rank)
    T2 = cfg2.tensor.as_array(max_rank)

    diag1 = np.zeros(r, dtype=bool)
    diag1[list(cfg1.diagonal_colors)] = True
    diag2 = np.zeros(r, dtype=bool)
    diag2[list(cfg2.diagonal_colors)] = True
    selfstar1 = cfg1.star == np.arange(r)
    selfstar2 = cfg2.star == np.arange(r)
    cand = (diag1[:, None] == diag2[None, :]) \
        & (cfg1.valencies[:, None] == cfg2.valencies[None, :]) \
        & (selfstar1[:, None] == selfstar2[None, :])

    results = []

    def extend(depth, cand, image):
        if depth == r:
            bij = ColorBijection(cfg1, cfg2, tuple(image))
            if bij.is_valid():
                results.append(bij)
            return
        a = depth
        for a2 in np.flatnonzero(cand[a]):
            a2 = int(a2)
            new = cand.copy()
            new[a, :] = False
            new[:, a2] = False
            new[a, a2] = True
            ok = True
            for b in range(depth + 1):
                b2 = image[b] if b < depth else a2
                for V1, V2 in (
                        (T1[a, b], T2[a2, b2]), (T1[b, a], T2[b2, a2]),
                        (T1[a, :, b], T2[a2, :, b2]), (T1[b, :, a], T2[b2, :, a2]),
                        (T1[:, a, b], T2[:, a2, b2]), (T1[:, b, a], T2[:, b2, a2])):
                    new &= V1[:, None] == V2[None, :]
                if not (new.any(axis=1).all() and new.any(axis=0).all()):
                    ok = False
                    break
            if not ok:
                continue
            image[a] = a2
            extend(depth + 1, new, image)
            image[a] = -1

    extend(0, cand, [-1] * r)
    return results


def realization(phi, node_cap=permgroup.SEARCH_NODE_CAP):
    """A point bijection inducing the color bijection phi, or None."""
    found = permgroup.search_color_isomorphisms(
        phi.source, phi.target, np.asarray(phi.mapping),
        find_all=False, node_cap=node_cap)
    return found[0] if found else None


def is_schurian(cfg):
    """Whether cfg is the 2-orbit configuration of its automorphism group."""
    G = permgroup.automorphism_group(cfg)
    return cc_core.same_partition(permgroup.orbital_scheme(G), cfg)


def is_separable_desk(cfg, others=(), max_rank=ISO_RANK_CAP):
    """Desk-scale separability: every algebraic automorphism (and every
    algebraic isomorphism onto each explicitly supplied target) is induced
    by a point bijection.

    This is the self-target fragment of separability; the universal
    quantifier over all targets is not decidable here and output labels the
    scope accordingly.
    """
    for phi in algebraic_isomorphisms(cfg, cfg, max_rank):
        if realization(phi) is None:
            return False
    for other in others:
        for phi in algebraic_isomorphisms(cfg, other, max_rank):
            if realization(phi) is None:
                return False
    return True


def fuse(cfg, partition):
    """Merge colors along a partition of the relation ids.

    The partition must send the class of each color's transpose to a class
    and must not mix diagonal with off-diagonal colors.  NotCoherent signals
    a legitimate S3 failure of the merged matrix."""
    r = cfg.rank
    classes = [tuple(sorted(set(c))) for c in partition]
    flat = [s for c in classes for s in c]
    if sorted(flat) != list(range(r)):
        raise ValueError("partition must cover every relation id exactly once")
    class_ids = {c: i for i, c in enumerate(classes)}
    for c in classes:
        starred = tuple(sorted(int(cfg.star[s]) for s in c))
        if starred not in class_ids:
            raise ValueError(f"partition does not respect the star map at {c}")
        diag = [s in cfg.diagonal_colors for s in c]
        if any(diag) and not all(diag):
            raise ValueError(f"class {c} mixes diagonal and off-diagonal colors")
    relabel = np.empty(r, dtype=np.int64)
    for i, c in enumerate(classes):
        for s in c:
            relabel[s] = i
    try:
        return cc_core.validate_config(relabel[cfg.colors])
    except AxiomS3Violated as exc:
        raise NotCoherent(f"fusion is not coherent: {exc}") from exc


def algebraic_fusion(cfg, group):
    """Fusion along the color orbits of a group of algebraic automorphisms.

    Coherence of the result is guaranteed, unlike for arbitrary fusions."""
    maps = []
    for phi in group:
        if isinstance(phi, ColorBijection):
            if phi.source is not cfg or phi.target is not cfg:
                raise NotAnAlgebraicAutomorphism("map is not a self-map of cfg")
            maps.append(phi.mapping)
        else:
            maps.append(tuple(phi))
    for m in maps:
        if not ColorBijection(cfg, cfg, m).is_valid():
            raise NotAnAlgebraicAutomorphism(f"{m} does not preserve the tensor")
    parent = list(range(cfg.rank))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for m in maps:
        for s, t in enumerate(m):
            rs, rt = find(s), find(t)
            if rs != rt:
                parent[max(rs, rt)] = min(rs, rt)
    orbits = {}
    for s in range(cfg.rank):
        orbits.setdefault(find(s), []).append(s)
    partition = [tuple(v) for _, v in sorted(orbits.items())]
    return fuse(cfg, partition)


def _pack(cols, r):
    """Pack up to 6 color entries per int64 word (r^6 must fit)."""
    out = np.zeros_like(cols[0], dtype=np.int64)
    for c in cols:
        out = out * np.int64(r) + c
    return out


def t_condition(cfg, t, point_cap=T_CONDITION_POINT_CAP):
    """Per-relation verdicts of the t-condition, t in {3, 4}.

    For each basis relation and each k <= t, the counts of k-subset types
    over the pairs of the relation must be constant.  The type of a 2-subset
    is determined by the pair's own colors and is constant automatically;
    3- and 4-subset types are counted explicitly, the latter canonicalized
    by exact minimization over the two orderings of the non-pinned points."""
    if t not in (3, 4):
        raise ValueError("t must be 3 or 4")
    n = cfg.n
    if n > point_cap:
        raise TooLarge(f"degree {n} exceeds t-condition cap {point_cap}")
    r = cfg.rank
    if r ** 6 > 2 ** 62:
        raise TooLarge("rank too large for type packing")
    C = cfg.colors
    diag = C.diagonal().copy()
    idx = np.arange(n)

    verdicts = {}
    for s in range(r):
        pairs = cfg.relation_pairs(s)
        ok = True
        ref3 = None
        ref4 = None
        for alpha, beta in pairs:
            alpha, beta = int(alpha), int(beta)
            others = (idx != alpha) & (idx != beta)
            # A non-pinned point gamma contributes five colors to/from the
            # pinned pair; their packed word typifies the 3-subset.
            p5 = _pack([C[alpha], C[:, alpha], C[beta], C[:, beta], diag], r)
            sig3 = np.sort(p5[others])
            if ref3 is None:
                ref3 = sig3
            elif not np.array_equal(ref3, sig3):
                ok = False
                break
            if t < 4:
                continue
            # A 4-subset adds a second point delta and the cross colors; the
            # ordered type is the word pair (p5[gamma].C[gamma,delta],
            # p5[delta].C[delta,gamma]), which the gamma/delta swap simply
            # exchanges, so (min, max) is the canonical unordered type.
            hi = p5[:, None] * np.int64(r) + C
            lo = p5[None, :] * np.int64(r) + C.T
            mask = others[:, None] & others[None, :] & (idx[:, None] < idx[None, :])
            packed = np.empty(int(mask.sum()), dtype=[("h", np.int64), ("l", np.int64)])
            packed["h"] = np.minimum(hi, lo)[mask]
            packed["l"] = np.maximum(hi, lo)[mask]
            packed.sort()
            if ref4 is None:
                ref4 = packed
            elif not np.array_equal(ref4, packed):
                ok = False
                break
        verdicts[s] = ok
    return verdicts


def recognize_affine(cfg):
    """Whether the scheme is the scheme of an affine space, via the tensor
    criterion c_{rs}^t <= 1 whenever r != s*.  Requires all non-diagonal
    valencies >= 3."""
    _require_scheme(cfg)
    star = cfg.star
    for s in cfg.nondiagonal_colors:
        if cfg.valencies[s] < 3:
            raise ValencyTooSmall(
                f"valency {int(cfg.valencies[s])} of color {s} is below 3")
    for (a, b), row in cfg.tensor._products.items():
        if a != int(star[b]) and max(row.values()) > 1:
            return False
    # The criterion forces each relation plus the diagonal to be an
    # equivalence relation; verify as a consistency trap.
    for s in cfg.nondiagonal_colors:
        B = cfg.adjacency(s) + np.eye(cfg.n)
        if not np.array_equal(B @ B > 0, B > 0):
            raise ValidationFailed(
                f"tensor criterion held but color {s} is not an equivalence"
                " minus the diagonal")  # pragma: no cover
    return True


@dataclass
class Design:
    """Point set with a block multiset, tested against 2-(n, k, k-1)."""
    n: int
    blocks: tuple
    params: tuple          # (n, k, lambda) claimed, k = scheme valency
    valid: bool
    coverage: tuple        # (min, max) pair coverage observed


def design_from_scheme(cfg):
    """Blocks alpha·s over all points and non-diagonal relations; valid
    exactly when they form a 2-(n, k, k-1) design, which happens exactly for
    pseudocyclic schemes of valency k."""
    _require_scheme(cfg)
    n = cfg.n
    blocks = []
    for alpha in range(n):
        row = cfg.colors[alpha]
        for s in cfg.nondiagonal_colors:
            blocks.append(tuple(int(x) for x in np.flatnonzero(row == s)))
    sizes = {len(b) for b in blocks}
    coverage = Counter()
    for b in blocks:
        for pair in combinations(b, 2):
            coverage[pair] += 1
    covs = set(coverage.values())
    npairs = n * (n - 1) // 2
    if len(coverage) < npairs:
        covs.add(0)
    cmin, cmax = (min(covs), max(covs)) if covs else (0, 0)
    k = sizes.pop() if len(sizes) == 1 else None
    valid = (k is not None and covs == {k - 1})
    return Design(
        n=n,
        blocks=tuple(blocks),
        params=(n, k, (k - 1) if k is not None else None),
        valid=valid,
        coverage=(cmin, cmax))


def extend_algebraic_iso(phi, alpha, alpha_prime):
    """The one-point extension of an algebraic isomorphism: a color
    bijection between the alpha-extension of the source and the
    alpha'-extension of the target.

    Direct blocks map through the restriction of phi; other blocks factor
    through a splitting relation w.  The result is validated as an algebraic
    isomorphism that sends 1_alpha to 1_alpha' and refines phi."""
    src, dst = phi.source, phi.target
    ext1 = extension.explicit_extension(src, alpha)
    ext2 = extension.explicit_extension(dst, alpha_prime, check_conditions=False)
    k = cc_core.is_equivalenced(src)
    star = src.star
    e1 = src.identity_color

    data = extension._splitting_data(src)

    def block_piece_color(ext, cfgref, apoint, u, v, orig_color):
        """Extension color of the piece orig_color ∩ (a·u x a·v)."""
        au = ext.fiber_points[u]
        av = ext.fiber_points[v]
        for x in au:
            for y in av:
                if cfgref.colors[x, y] == orig_color:
                    return int(ext.config.colors[x, y]), (x, y)
        raise ValidationFailed(
            f"color {orig_color} missing from block ({u},{v})")  # pragma: no cover

    mapping = [-1] * ext1.config.rank
    for cid in range(ext1.config.rank):
        u, v = ext1.relation_block[cid]
        pairs = ext1.config.relation_pairs(cid)
        x0, y0 = int(pairs[0][0]), int(pairs[0][1])
        if u == e1 or v == e1 or len(cc_core.complex_product(src, int(star[u]), v)) == k:
            c_orig = int(src.colors[x0, y0])
            image, _ = block_piece_color(ext2, dst, alpha_prime,
                                         phi(u), phi(v), phi(c_orig))
            mapping[cid] = image
        else:
            w = min(extension._bits(data.masks[(u, v)]))
            au = ext1.fiber_points[u]
            aw = ext1.fiber_points[w]
            av = ext1.fiber_points[v]
            piece = {int(x): int(y) for x, y in pairs}
            left = extension._block_matchings(src, au, aw)
            right = extension._block_matchings(src, aw, av)
            found = next(((a, b) for a in left for b in right
                          if all(b[a[x]] == piece[x] for x in piece)), None)
            if found is None:
                raise ValidationFailed(
                    f"no factorization through w={w} for color {cid}")
            a, b = found
            s1 = int(src.colors[x0, a[x0]])
            s2 = int(src.colors[a[x0], piece[x0]])
            # compose the phi-images of the two matchings in the target
            au2 = ext2.fiber_points[phi(u)]
            aw2 = ext2.fiber_points[phi(w)]
            av2 = ext2.fiber_points[phi(v)]
            m1 = {x: next(z for z in aw2 if dst.colors[x, z] == phi(s1))
                  for x in au2}
            m2 = {z: next(y for y in av2 if dst.colors[z, y] == phi(s2))
                  for z in aw2}
            x2 = au2[0]
            mapping[cid] = int(ext2.config.colors[x2, m2[m1[x2]]])

    bij = ColorBijection(ext1.config, ext2.config, tuple(mapping))
    if not bij.is_valid():
        raise ValidationFailed("extended map is not an algebraic isomorphism")
    if mapping[int(ext1.config.colors[alpha, alpha])] != \
            int(ext2.config.colors[alpha_prime, alpha_prime]):
        raise ValidationFailed("extended map does not send 1_alpha to 1_alpha'")
    for cid in range(ext1.config.rank):
        a, b = ext1.config.relation_pairs(cid)[0]
        parent = int(src.colors[a, b])
        a2, b2 = ext2.config.relation_pairs(mapping[cid])[0]
        if int(dst.colors[a2, b2]) != phi(parent):
            raise ValidationFailed("extended map does not refine phi")
    return bij
