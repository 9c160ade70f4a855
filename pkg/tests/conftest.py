import numpy as np
import pytest

from causaldg import scm as S


def copy_confounder_scm() -> S.ScmSpec:
    """D ~ Bern(0.5); M := D; Y | M, D with rows over (m, d) lexicographic.

    P(Y=1 | m, d): (0,0) -> 0.1, (0,1) -> 0.5, (1,0) -> 0.5, (1,1) -> 0.9.
    Parents of Y in declaration order are (D, M), so rows run over (d, m).
    """
    return S.ScmSpec(
        variables=[("D", 2), ("M", 2), ("Y", 2)],
        edges=[("D", "M"), ("D", "Y"), ("M", "Y")],
        cpts={
            "D": [[0.5, 0.5]],
            "M": [[1.0, 0.0], [0.0, 1.0]],
            # rows: (d=0,m=0), (d=0,m=1), (d=1,m=0), (d=1,m=1)
            "Y": [[0.9, 0.1], [0.5, 0.5], [0.5, 0.5], [0.1, 0.9]],
        },
    )


def dg_dag_scm() -> S.ScmSpec:
    """The domain/invariant/specific/sentiment DAG with arbitrary positive CPTs.

    Edges: Mspc -> D, D -> Minv, D -> Y, Mspc -> Y, Minv -> Y.
    """
    rng = np.random.default_rng(7)

    def rows(n, card):
        t = rng.uniform(0.1, 1.0, size=(n, card))
        return t / t.sum(axis=1, keepdims=True)

    return S.ScmSpec(
        variables=[("Mspc", 2), ("D", 3), ("Minv", 2), ("Y", 2)],
        edges=[("Mspc", "D"), ("D", "Minv"), ("D", "Y"), ("Mspc", "Y"), ("Minv", "Y")],
        cpts={
            "Mspc": rows(1, 2),
            "D": rows(2, 3),
            "Minv": rows(3, 2),
            "Y": rows(12, 2),  # parents (Mspc, D, Minv): 2*3*2 rows
        },
    )


def random_positive_scm(rng, max_vars=5, max_card=4):
    """Random DAG with strictly positive CPTs (positivity holds everywhere)."""
    n = int(rng.integers(3, max_vars + 1))
    names = [f"V{i}" for i in range(n)]
    cards = [int(rng.integers(2, max_card + 1)) for _ in range(n)]
    edges = []
    for j in range(1, n):
        for i in range(j):
            if rng.random() < 0.45:
                edges.append((names[i], names[j]))
    cpts = {}
    for j, name in enumerate(names):
        parents = [i for i in range(j) if (names[i], name) in set(edges)]
        rows = int(np.prod([cards[i] for i in parents], dtype=np.int64)) if parents else 1
        t = rng.uniform(0.1, 1.0, size=(rows, cards[j]))
        cpts[name] = t / t.sum(axis=1, keepdims=True)
    return S.ScmSpec(list(zip(names, cards)), edges, cpts)


@pytest.fixture
def copy_scm():
    return copy_confounder_scm()


@pytest.fixture
def dg_scm():
    return dg_dag_scm()
