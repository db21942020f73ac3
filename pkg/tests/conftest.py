import math
import random

import pytest

from qgraph_iso.graph import build_graph


def random_graph(rng: random.Random, max_vertices: int = 6, allow_inf: bool = False):
    """Connected multigraph with random types, lengths and couplings (loops allowed)."""
    n = rng.randint(1, max_vertices)
    edges = [(i, rng.randrange(i), rng.uniform(0.3, 3.0)) for i in range(1, n)]
    for _ in range(rng.randint(0 if n > 1 else 1, 3)):
        edges.append((rng.randrange(n), rng.randrange(n), rng.uniform(0.3, 3.0)))
    types = [rng.choice(["delta", "delta_prime"]) for _ in range(n)]
    alphas = [rng.uniform(-3, 3) for _ in range(n)]
    if allow_inf:
        alphas = [math.inf if rng.random() < 0.3 else a for a in alphas]
    return build_graph(edges, types, alphas)


@pytest.fixture
def rng():
    return random.Random(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
