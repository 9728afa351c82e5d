"""Session corpus: the schemes exercised across the whole suite."""

from itertools import permutations

import pytest

from schemelab import constructors, permgroup


def _perm_table(m):
    """Cayley table of Sym(m) with elements in lexicographic order,
    composition p*q = apply p then q."""
    elems = sorted(permutations(range(m)))
    index = {p: i for i, p in enumerate(elems)}
    return [[index[tuple(q[x] for x in p)] for q in elems] for p in elems]


def _dihedral_on_4():
    rot = (1, 2, 3, 0)
    flip = (0, 3, 2, 1)
    return permgroup.orbital_scheme(permgroup.group_closure([rot, flip]))


CORPUS_BUILDERS = {
    "regular-Z3": lambda: constructors.regular_scheme(constructors.cyclic_group_table(3)),
    "regular-Z4": lambda: constructors.regular_scheme(constructors.cyclic_group_table(4)),
    "regular-S3": lambda: constructors.regular_scheme(_perm_table(3)),
    "paley-5": lambda: constructors.cyclotomic_scheme(constructors.FiniteField(5), 2),
    "paley-13": lambda: constructors.cyclotomic_scheme(constructors.FiniteField(13), 6),
    "cyclotomic-13-k3": lambda: constructors.cyclotomic_scheme(constructors.FiniteField(13), 3),
    "cyclotomic-67-k2": lambda: constructors.cyclotomic_scheme(constructors.FiniteField(67), 2),
    "ag-2-3": lambda: constructors.affine_scheme(2, 3),
    "ag-2-4": lambda: constructors.affine_scheme(2, 4),
    "ag-3-3": lambda: constructors.affine_scheme(3, 3),
    "passman-3": lambda: constructors.passman_scheme(3),
    "passman-5": lambda: constructors.passman_scheme(5),
    "hollman-8": lambda: constructors.hollman_scheme(8),
    "dihedral-4": _dihedral_on_4,
    "frobenius-2-3": lambda: constructors.frobenius_example_scheme(2, 3),
}

# Schemes known pseudocyclic, with the predicted valency.
PSEUDOCYCLIC_K = {
    "regular-Z3": 1,
    "regular-Z4": 1,
    "regular-S3": 1,
    "paley-5": 2,
    "paley-13": 6,
    "cyclotomic-13-k3": 3,
    "cyclotomic-67-k2": 2,
    "ag-2-3": 2,
    "ag-2-4": 3,
    "ag-3-3": 2,
    "passman-3": 4,
    "passman-5": 8,
    "hollman-8": 9,
    "frobenius-2-3": 7,
}


@pytest.fixture(scope="session")
def corpus():
    return {name: build() for name, build in CORPUS_BUILDERS.items()}


@pytest.fixture(scope="session")
def ag23(corpus):
    return corpus["ag-2-3"]


@pytest.fixture(scope="session")
def ag33(corpus):
    return corpus["ag-3-3"]


@pytest.fixture(scope="session")
def c67k2(corpus):
    return corpus["cyclotomic-67-k2"]


@pytest.fixture(scope="session")
def c13k3(corpus):
    return corpus["cyclotomic-13-k3"]


@pytest.fixture(scope="session")
def frob23(corpus):
    return corpus["frobenius-2-3"]


@pytest.fixture(scope="session")
def dihedral4(corpus):
    return corpus["dihedral-4"]


@pytest.fixture(scope="session")
def z3(corpus):
    return corpus["regular-Z3"]


@pytest.fixture(scope="session")
def c151k3():
    """Smallest cyclotomic scheme with valency 3 whose splitting-set
    conditions hold while some |u*v| < k, exercising the composition
    branch of the explicit extension."""
    return constructors.cyclotomic_scheme(constructors.FiniteField(151), 3)
