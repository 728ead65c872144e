import os
import random

import pytest

from dsspan.graph import load_tu_dataset, make_dataset

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MUTAG_DIR = os.path.join(ROOT, "data", "MUTAG")


def random_connected(rng, n, n_vlabels, n_elabels, extra):
    edges = {}
    for v in range(1, n):
        u = rng.randrange(v)
        edges[(u, v)] = rng.randrange(n_elabels)
    for _ in range(extra):
        u, v = rng.sample(range(n), 2)
        edges.setdefault((min(u, v), max(u, v)), rng.randrange(n_elabels))
    labels = [rng.randrange(n_vlabels) for _ in range(n)]
    return labels, [(u, v, l) for (u, v), l in edges.items()]


def random_corpus(seed, edgeless=False):
    """5-10 connected graphs of 4-8 vertices, 2-3 vertex and 1-2 edge labels."""
    rng = random.Random(seed)
    n_vl, n_el = rng.randint(2, 3), rng.randint(1, 2)
    graphs = [random_connected(rng, rng.randint(4, 8), n_vl, n_el, rng.randint(0, 3))
              for _ in range(rng.randint(5, 10))]
    if edgeless:
        graphs.append(([0] * rng.randint(4, 8), []))
    labels = [rng.randrange(2) for _ in graphs]
    return make_dataset(graphs, labels, name=f"random{seed}", class_count=2)


@pytest.fixture(scope="session")
def mutag():
    return load_tu_dataset(MUTAG_DIR, "MUTAG")


# criterion lines collected by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
