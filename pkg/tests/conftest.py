import networkx as nx
import numpy as np
import pytest

from eneat.genome import INPUT, Genome, InnovationRegistry, initial_genome
from eneat.nn import ALL_ACTIVATIONS


def genome_violations(g: Genome) -> list[str]:
    """Independent structural check of a genome (networkx for cycles)."""
    problems = []
    ids = g.node_ids.tolist()
    if len(set(ids)) != len(ids):
        problems.append("duplicate node id")
    inn = g.innovations.tolist()
    if len(set(inn)) != len(inn):
        problems.append("duplicate innovation")
    pairs = list(zip(g.sources.tolist(), g.targets.tolist()))
    if len(set(pairs)) != len(pairs):
        problems.append("duplicate (source, target)")
    known = set(ids)
    inputs = set(g.node_ids[g.node_kinds == INPUT].tolist())
    for s, t in pairs:
        if s not in known or t not in known:
            problems.append(f"dangling endpoint {s}->{t}")
        if t in inputs:
            problems.append(f"connection into input {s}->{t}")
    graph = nx.DiGraph()
    graph.add_nodes_from(ids)
    graph.add_edges_from(p for p, e in zip(pairs, g.enabled.tolist()) if e)
    if not nx.is_directed_acyclic_graph(graph):
        problems.append("cycle in enabled graph")
    return problems


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_genome(rng):
    g = initial_genome(3, 2, 1, ALL_ACTIVATIONS, rng)
    return g, InnovationRegistry.initial(3, 2, 1)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request, capsys):
    """``acceptance(n, title, ok, detail)`` prints one PASS/FAIL line and records it for the summary."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        request.config.stash[_ACCEPTANCE].append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
