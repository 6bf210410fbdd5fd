import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dindex.graph import (UNLIMITED, DuplicatePaper, PaperRecord, UnknownPaper,
                          Window, build_graph)
from helpers import random_inputs


def test_direct_construction():
    records = [PaperRecord("A", 2000), PaperRecord("B", 2001),
               PaperRecord("C", 2002)]
    g = build_graph(records, [("B", "A"), ("C", "A")])
    assert g.citers("A") == ["B", "C"]
    assert g.references("B") == ["A"]
    assert g.references("A") == []


def test_empty_edge_stream():
    records = [PaperRecord("A", 2000), PaperRecord("B", 2001)]
    g = build_graph(records, [])
    assert g.citers("A") == [] and g.references("B") == []
    assert g.build_report.n_edges == 0


def test_duplicate_edges_collapse():
    records = [PaperRecord("A", 2000), PaperRecord("B", 2001)]
    g = build_graph(records, [("B", "A"), ("B", "A")])
    assert g.citers("A") == ["B"]
    assert g.build_report.n_duplicate_edges == 1


def test_dangling_edges_counted_not_fatal():
    records = [PaperRecord("A", 2000)]
    g = build_graph(records, [("B", "A"), ("A", "Z")])
    assert g.build_report.n_dangling == 2
    assert g.build_report.n_edges == 0
    assert ("B", "A") in g.build_report.dangling_sample


def test_strict_dangling_raises():
    from dindex.graph import GraphError
    with pytest.raises(GraphError):
        build_graph([PaperRecord("A", 2000)], [("B", "A")],
                    strict_dangling=True)


def test_self_loops_dropped():
    g = build_graph([PaperRecord("A", 2000)], [("A", "A")])
    assert g.build_report.n_self_loops == 1
    assert g.citers("A") == []


def test_duplicate_record_id_rejected():
    with pytest.raises(DuplicatePaper):
        build_graph([PaperRecord("A", 2000), PaperRecord("A", 2001)], [])


def test_year_out_of_range_rejected():
    with pytest.raises(ValueError):
        build_graph([PaperRecord("A", 1200)], [])


def test_unknown_paper():
    g = build_graph([PaperRecord("A", 2000)], [])
    with pytest.raises(UnknownPaper):
        g.citers("nope")
    with pytest.raises(UnknownPaper):
        g.references("nope")


def test_window_boundary():
    records = [PaperRecord("P", 2000), PaperRecord("C1", 2001),
               PaperRecord("C2", 2006)]
    g = build_graph(records, [("C1", "P"), ("C2", "P")])
    assert g.citers("P", Window(5)) == ["C1"]
    assert g.citers("P", UNLIMITED) == ["C1", "C2"]


def test_citer_before_focal_year_excluded():
    # hand-built 4-node graph: E cites P but was published earlier
    records = [PaperRecord("P", 2000), PaperRecord("E", 1999),
               PaperRecord("L", 2001), PaperRecord("S", 2000)]
    g = build_graph(records, [("E", "P"), ("L", "P"), ("S", "P")])
    assert g.citers("P", UNLIMITED) == ["L", "S"]  # same-year counts, earlier not
    assert g.references("E") == ["P"]  # raw adjacency keeps the edge


def test_references_no_window():
    records = [PaperRecord("P", 2000), PaperRecord("R1", 1990),
               PaperRecord("R2", 1991), PaperRecord("R3", 2005)]
    g = build_graph(records, [("P", "R1"), ("P", "R2"), ("P", "R3")])
    assert g.references("P") == ["R1", "R2", "R3"]


def test_most_cited_reference_argmax(toy_graph):
    records = [PaperRecord("P", 2000), PaperRecord("R1", 1990),
               PaperRecord("R2", 1991)]
    citers = [PaperRecord(f"C{i}", 2001) for i in range(5)]
    edges = [("P", "R1"), ("P", "R2")]
    edges += [(f"C{i}", "R1") for i in range(5)]
    edges += [("C0", "R2")]
    g = build_graph(records + citers, edges)
    assert g.most_cited_reference("P") == ("R1", 5)


def test_most_cited_reference_tie_smallest_id():
    records = [PaperRecord("P", 2000), PaperRecord("Rb", 1990),
               PaperRecord("Ra", 1991), PaperRecord("C1", 2001),
               PaperRecord("C2", 2002)]
    edges = [("P", "Rb"), ("P", "Ra"),
             ("C1", "Ra"), ("C2", "Ra"), ("C1", "Rb"), ("C2", "Rb")]
    g = build_graph(records, edges)
    assert g.most_cited_reference("P") == ("Ra", 2)


def test_most_cited_reference_none_without_refs():
    g = build_graph([PaperRecord("P", 2000)], [])
    assert g.most_cited_reference("P") is None


def test_most_cited_reference_excludes_focal_and_anchors_at_focal_year():
    # R's citers: P itself (excluded) and O published before P (excluded)
    records = [PaperRecord("P", 2000), PaperRecord("R", 1990),
               PaperRecord("O", 1995)]
    g = build_graph(records, [("P", "R"), ("O", "R")])
    assert g.most_cited_reference("P") == ("R", 0)


def test_record_roundtrip():
    rec = PaperRecord("A", 2000, "other", ("X2", "X1"), (5, 3, 5))
    g = build_graph([rec, PaperRecord("B", 2001)], [("B", "A")])
    got = g.record("A")
    assert got.year == 2000 and got.doc_type == "other"
    assert got.author_ids == ("X1", "X2")  # normalized sorted unique
    assert got.field_ids == (3, 5)
    assert got.n_citations == 1 and got.n_references == 0


def test_symmetry_references_vs_citers():
    rng = np.random.default_rng(7)
    records, edges = random_inputs(rng, 60)
    g = build_graph(records, edges)
    for p in g.ids:
        for q in g.references(p):
            if g.year_of(q) <= g.year_of(p):
                assert p in g.citers(q, UNLIMITED)
    for q in g.ids:
        for p in g.citers(q, UNLIMITED):
            assert q in g.references(p)


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
@settings(max_examples=30, deadline=None)
def test_window_monotonicity(seed, w1):
    rng = np.random.default_rng(seed)
    records, edges = random_inputs(rng, 40)
    g = build_graph(records, edges)
    w2 = w1 + int(seed % 7)
    for p in g.ids[:10]:
        c1 = set(g.citers(p, Window(w1)))
        c2 = set(g.citers(p, Window(w1 + (w2 - w1) if w2 > w1 else w1)))
        cu = set(g.citers(p, UNLIMITED))
        assert c1 <= c2 <= cu


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_build_determinism_under_permutation(seed):
    rng = np.random.default_rng(seed)
    records, edges = random_inputs(rng, 30)
    g1 = build_graph(records, edges)
    order = rng.permutation(len(records))
    records2 = [records[int(i)] for i in order]
    edges2 = [edges[int(i)] for i in rng.permutation(len(edges))]
    g2 = build_graph(records2, edges2)
    assert g1.content_equal(g2)


def test_adjacency_sorted_and_unique():
    rng = np.random.default_rng(13)
    records, edges = random_inputs(rng, 80)
    g = build_graph(records, edges)
    for ix in range(len(g)):
        row = g.ref_idx[g.ref_indptr[ix]:g.ref_indptr[ix + 1]]
        assert np.all(np.diff(row) > 0)
        row = g.cit_idx[g.cit_indptr[ix]:g.cit_indptr[ix + 1]]
        assert np.all(np.diff(row) > 0)


def test_frozen_arrays():
    g = build_graph([PaperRecord("A", 2000)], [])
    with pytest.raises(ValueError):
        g.years[0] = 1999
