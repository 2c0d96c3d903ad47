import io
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodemic.graph import (
    EdgeParseError,
    GraphError,
    GraphGenConfig,
    SocialGraph,
    generate_graph,
    load_edges,
    load_edges_file,
    save_edges,
)


def test_basic_adjacency():
    g = SocialGraph(4, [(0, 1), (2, 1), (1, 3)])
    assert g.n_users == 4
    assert g.n_edges == 3
    assert list(g.follows(0)) == [1]
    assert list(g.followers_array(1)) == [0, 2]
    assert g.followers_of(3) == {1}
    assert list(g.follows(3)) == []


def test_duplicate_edges_collapse():
    g = SocialGraph(3, [(0, 1), (0, 1), (0, 1), (1, 2)])
    assert g.n_edges == 2


def test_self_edges_dropped_and_counted():
    g = SocialGraph(3, [(0, 0), (1, 1), (0, 2)])
    assert g.n_edges == 1
    assert g.self_edges_dropped == 2


def test_edge_endpoint_out_of_range():
    with pytest.raises(GraphError):
        SocialGraph(2, [(0, 5)])
    with pytest.raises(GraphError):
        SocialGraph(2, [(-1, 0)])


def test_query_out_of_range():
    g = SocialGraph(2, [(0, 1)])
    with pytest.raises(GraphError):
        g.follows(2)
    with pytest.raises(GraphError):
        g.followers_array(-1)


def test_degrees_match_edge_list():
    g = SocialGraph(5, [(0, 1), (0, 2), (3, 2), (4, 2), (2, 0)])
    assert list(g.out_degrees()) == [2, 0, 1, 1, 1]
    assert list(g.in_degrees()) == [1, 1, 3, 0, 0]
    assert sorted(g.edge_list()) == [(0, 1), (0, 2), (2, 0), (3, 2), (4, 2)]


def test_neighbor_arrays_read_only():
    g = SocialGraph(3, [(0, 1), (0, 2)])
    with pytest.raises(ValueError):
        g.follows(0)[0] = 9


@given(
    st.integers(2, 10),
    st.sets(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=40),
)
@settings(max_examples=60, deadline=None)
def test_follows_followers_are_transposes(n, raw):
    edges = [(a % n, b % n) for a, b in raw if a % n != b % n]
    g = SocialGraph(n, edges)
    for u in range(n):
        for v in g.follows(u):
            assert u in g.followers_of(int(v))
        for w in g.followers_array(u):
            assert u in set(int(x) for x in g.follows(int(w)))


# -- synthesis ---------------------------------------------------------------


def test_generate_deterministic():
    cfg = GraphGenConfig(n_users=200, seed=42, min_degree=1, max_degree=20)
    g1, g2 = generate_graph(cfg), generate_graph(cfg)
    assert sorted(g1.edge_list()) == sorted(g2.edge_list())


def test_generate_seed_changes_graph():
    a = generate_graph(GraphGenConfig(n_users=200, seed=1))
    b = generate_graph(GraphGenConfig(n_users=200, seed=2))
    assert sorted(a.edge_list()) != sorted(b.edge_list())


def test_generate_degree_bounds():
    g = generate_graph(GraphGenConfig(n_users=300, seed=3, min_degree=2, max_degree=9))
    deg = g.out_degrees()
    assert deg.min() >= 2
    assert deg.max() <= 9


def test_generate_fixed_degree():
    g = generate_graph(GraphGenConfig(n_users=50, seed=0, fixed_degree=4))
    assert list(g.out_degrees()) == [4] * 50


def test_generate_heavy_tailed_follower_counts():
    g = generate_graph(GraphGenConfig(n_users=2000, seed=5, min_degree=3, popularity_exponent=1.2))
    ind = np.sort(g.in_degrees())[::-1]
    # a few hub accounts dominate; the median account has almost no audience
    assert ind[0] > 30 * max(np.median(ind), 1)


def test_generate_empty_graph():
    g = generate_graph(GraphGenConfig(n_users=0))
    assert g.n_users == 0
    assert g.n_edges == 0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_users=-1),
        dict(n_users=10, exponent=1.0),
        dict(n_users=10, min_degree=-1),
        dict(n_users=10, min_degree=5, max_degree=4),
        dict(n_users=10, max_degree=10),
        dict(n_users=10, fixed_degree=10),
    ],
)
def test_generate_config_validation(kwargs):
    with pytest.raises(GraphError):
        GraphGenConfig(**kwargs)


# -- CSV I/O -----------------------------------------------------------------


CSV = textwrap.dedent(
    """\
    follower_id,followee_id
    alice,bob
    carol,bob
    alice,carol
    """
)


def test_load_edges_dense_remap():
    g = load_edges(io.StringIO(CSV))
    assert g.n_users == 3
    assert g.external_ids == ("alice", "bob", "carol")
    assert g.followers_of(g.dense_id("bob")) == {g.dense_id("alice"), g.dense_id("carol")}


def test_load_edges_duplicates_and_self_edges():
    text = "follower_id,followee_id\na,b\na,b\nc,c\n"
    g = load_edges(io.StringIO(text))
    assert g.n_edges == 1
    assert g.self_edges_dropped == 1


def test_load_edges_empty_stream():
    g = load_edges(io.StringIO(""))
    assert g.n_users == 0
    assert g.n_edges == 0


def test_load_edges_bad_header():
    with pytest.raises(EdgeParseError) as exc:
        load_edges(io.StringIO("src,dst\na,b\n"))
    assert exc.value.line_no == 1


def test_load_edges_malformed_record_line_number():
    text = "follower_id,followee_id\na,b\nc\n"
    with pytest.raises(EdgeParseError) as exc:
        load_edges(io.StringIO(text))
    assert exc.value.line_no == 3


def test_unknown_external_id():
    g = load_edges(io.StringIO(CSV))
    with pytest.raises(GraphError):
        g.dense_id("mallory")


def test_save_load_roundtrip(tmp_path):
    g = load_edges(io.StringIO(CSV))
    path = tmp_path / "edges.csv"
    save_edges(g, path)
    g2 = load_edges_file(path)
    assert g2.external_ids == g.external_ids
    assert sorted(g2.edge_list()) == sorted(g.edge_list())
