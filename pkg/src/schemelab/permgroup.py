"""Permutation groups on 0..n-1: closure, orbitals, Frobenius test,
color-preserving automorphism search.

Permutations are plain tuples in image notation: ``p[i]`` is the image of
point ``i``.  Groups are materialized as full element lists (desk scale), in
deterministic breadth-first order from the generators.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from . import cc_core
from .errors import GroupTooLarge, SearchBudgetExceeded, TooLarge

GROUP_ORDER_CAP = 2_000_000
SEARCH_NODE_CAP = 10 ** 8
AUT_POINT_CAP = 200


def identity(n):
    return tuple(range(n))


def compose(p, q):
    """Apply p, then q."""
    return tuple(q[i] for i in p)


def inverse(p):
    inv = [0] * len(p)
    for i, pi in enumerate(p):
        inv[pi] = i
    return tuple(inv)


def check_permutation(p):
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation of 0..{len(p) - 1}: {p}")


def parse_permutation(text):
    """Parse image notation, e.g. '0 2 1 3'."""
    p = tuple(int(tok) for tok in text.split())
    check_permutation(p)
    return p


def load_generators(path):
    """Read one permutation per line; '#' starts a comment."""
    gens = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.split("#", 1)[0].strip()
            if line:
                gens.append(parse_permutation(line))
    if gens and len({len(g) for g in gens}) != 1:
        raise ValueError("generators have unequal degrees")
    return gens


class PermutationGroup:
    """A permutation group with a fully materialized element list."""

    def __init__(self, n, generators, elements):
        self.n = n
        self.generators = tuple(tuple(g) for g in generators)
        self.elements = tuple(tuple(e) for e in elements)
        self._element_set = frozenset(self.elements)

    @property
    def order(self):
        return len(self.elements)

    def __contains__(self, p):
        return tuple(p) in self._element_set

    def orbit(self, alpha):
        seen = {alpha}
        queue = deque([alpha])
        while queue:
            x = queue.popleft()
            for g in self.generators:
                y = g[x]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return sorted(seen)

    def orbits(self):
        out = []
        assigned = [False] * self.n
        for alpha in range(self.n):
            if not assigned[alpha]:
                orb = self.orbit(alpha)
                for x in orb:
                    assigned[x] = True
                out.append(tuple(orb))
        return out

    def is_transitive(self):
        return len(self.orbit(0)) == self.n

    def is_regular(self):
        return self.is_transitive() and self.order == self.n

    def stabilizer_elements(self, alpha):
        return [g for g in self.elements if g[alpha] == alpha]

    def __repr__(self):
        return f"<PermutationGroup degree={self.n} order={self.order}>"


def group_closure(generators, n=None, cap=GROUP_ORDER_CAP):
    """Close a generator set under composition (breadth-first, deterministic).

    An empty generator list needs an explicit degree ``n`` and yields the
    trivial group.
    """
    gens = [tuple(g) for g in generators]
    for g in gens:
        check_permutation(g)
    if gens:
        degrees = {len(g) for g in gens}
        if len(degrees) != 1:
            raise ValueError("generators have unequal degrees")
        n = degrees.pop()
    elif n is None:
        raise ValueError("degree n required for an empty generator list")
    e = identity(n)
    elements = [e]
    seen = {e}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = compose(x, g)
            if y not in seen:
                if len(seen) >= cap:
                    raise GroupTooLarge(f"group order exceeds cap {cap}")
                seen.add(y)
                elements.append(y)
                queue.append(y)
    return PermutationGroup(n, gens, elements)


def orbital_scheme(G):
    """The coherent configuration of the 2-orbits of G.

    Homogeneous exactly when G is transitive.  Color ids follow row-major
    first occurrence.  Validation failure here would be a bug, not data.
    """
    n = G.n
    colors = np.full((n, n), -1, dtype=np.int64)
    gens = list(G.generators)
    c = 0
    for alpha in range(n):
        for beta in range(n):
            if colors[alpha, beta] >= 0:
                continue
            colors[alpha, beta] = c
            stack = [(alpha, beta)]
            while stack:
                x, y = stack.pop()
                for g in gens:
                    gx, gy = g[x], g[y]
                    if colors[gx, gy] < 0:
                        colors[gx, gy] = c
                        stack.append((gx, gy))
            c += 1
    return cc_core.validate_config(colors)


def is_frobenius(G):
    """Transitive, non-regular, and every non-identity element fixes at most
    one point."""
    if not G.is_transitive():
        return False
    if G.order == G.n:
        return False
    e = identity(G.n)
    for g in G.elements:
        if g == e:
            continue
        if sum(1 for i, gi in enumerate(g) if gi == i) > 1:
            return False
    return True


def fixed_points(g):
    return [i for i, gi in enumerate(g) if gi == i]


def point_stabilizer_orbits(G, alpha):
    """Orbits of the point stabilizer G_alpha, as sorted tuples."""
    stab = G.stabilizer_elements(alpha)
    n = G.n
    out = []
    assigned = [False] * n
    for start in range(n):
        if assigned[start]:
            continue
        seen = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for g in stab:
                y = g[x]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        for x in seen:
            assigned[x] = True
        out.append(tuple(sorted(seen)))
    return out


def search_color_isomorphisms(src_cfg, dst_cfg, color_map, *, find_all=True,
                              node_cap=SEARCH_NODE_CAP):
    """Backtracking search for point bijections f with
    dst_color(f(a), f(b)) = color_map[src_color(a, b)].

    Points are assigned in a fixed order (fiber, then degree-refined color
    signature, then index); candidates are filtered against every assigned
    point after each assignment.  Deterministic by construction.
    """
    n = src_cfg.n
    if dst_cfg.n != n:
        return []
    src = src_cfg.colors
    dst = dst_cfg.colors
    mapped = np.asarray(color_map, dtype=np.int64)[src]

    r2 = dst_cfg.rank
    src_rows = np.zeros((n, r2), dtype=np.int64)
    np.add.at(src_rows, (np.arange(n)[:, None], mapped), 1)
    src_cols = np.zeros((n, r2), dtype=np.int64)
    np.add.at(src_cols, (np.arange(n)[None, :], mapped), 1)
    dst_rows = np.zeros((n, r2), dtype=np.int64)
    np.add.at(dst_rows, (np.arange(n)[:, None], dst), 1)
    dst_cols = np.zeros((n, r2), dtype=np.int64)
    np.add.at(dst_cols, (np.arange(n)[None, :], dst), 1)

    sig_src = np.column_stack([mapped.diagonal(), src_rows, src_cols])
    sig_dst = np.column_stack([dst.diagonal(), dst_rows, dst_cols])
    cand = (sig_src[:, None, :] == sig_dst[None, :, :]).all(axis=2)

    _, sig_id = np.unique(sig_src, axis=0, return_inverse=True)
    order = np.lexsort((np.arange(n), sig_id))

    results = []
    nodes = 0

    def extend(depth, cand, image):
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise SearchBudgetExceeded(f"node cap {node_cap} exceeded")
        if depth == n:
            results.append(tuple(image))
            return not find_all
        gamma = int(order[depth])
        for delta in np.flatnonzero(cand[gamma]):
            delta = int(delta)
            mask = (mapped[gamma][:, None] == dst[delta][None, :]) \
                & (mapped[:, gamma][:, None] == dst[:, delta][None, :])
            new = cand & mask
            new[gamma, :] = False
            new[:, delta] = False
            new[gamma, delta] = True
            if not (new.any(axis=1).all() and new.any(axis=0).all()):
                continue
            image[gamma] = delta
            if extend(depth + 1, new, image):
                return True
            image[gamma] = -1
        return False

    extend(0, cand, [-1] * n)
    return results


def automorphism_group(cfg, *, point_cap=AUT_POINT_CAP, node_cap=SEARCH_NODE_CAP):
    """Aut(Omega, S): all permutations preserving every color."""
    if cfg.n > point_cap:
        raise TooLarge(f"degree {cfg.n} exceeds automorphism-search cap {point_cap}")
    found = search_color_isomorphisms(
        cfg, cfg, np.arange(cfg.rank), find_all=True, node_cap=node_cap)
    return PermutationGroup(cfg.n, found, found)
