import numpy as np
import pytest

from lipext.errors import AgreementViolation, DomainMismatch, EmptySubset, XInS
from lipext.gluing import claim1_bound, glue, paper_form_bound, run_claim1, select_near_nearest
from lipext.metric import (
    Euclidean,
    RealLine,
    cycle_metric,
    equilateral,
    graph_metric,
    lipschitz_constant,
    make_map,
    path_metric,
)
from lipext.solvers import ExtensionResult, brute_force_extend

from oracles import best_extension, floyd_warshall


def test_near_nearest_path():
    assert select_near_nearest(path_metric(3), [0, 3], [1], 0.0) == [0]


def test_near_nearest_unique_minimiser_ignores_delta():
    M = path_metric(5)
    for delta in (0.0, 0.3, 0.9):
        assert select_near_nearest(M, [0, 5], [4], delta) == [5]


def test_near_nearest_cycle_tie():
    fw = floyd_warshall(4, [(i, (i + 1) % 4, 1.0) for i in range(4)])
    assert fw[1][0] == fw[1][2] == 1
    assert select_near_nearest(cycle_metric(4), [0, 2], [1], 0.0) == [0]


def test_near_nearest_perturbed_uses_slack():
    M = path_metric(6)
    # x = 2: d(2, S) = 2 via 0; with delta = 0.5, point 5 at distance 3 is admissible
    ys = select_near_nearest(M, [0, 5, 6], [2], 0.5, perturb=True)
    assert ys == [5]
    assert M.dist[5, 2] <= 1.5 * 2


def test_near_nearest_errors():
    M = path_metric(3)
    with pytest.raises(EmptySubset):
        select_near_nearest(M, [], [1])
    with pytest.raises(XInS) as exc:
        select_near_nearest(M, [0, 3], [1, 3])
    assert exc.value.j == 2


def test_glue_nothing_to_add():
    phi = make_map(path_metric(2), [0, 2], [0.0, 2.0], RealLine())
    psi = phi.restrict([0])
    out = glue(phi, psi)
    assert out.domain == phi.domain
    assert np.array_equal(out.values, phi.values)


def test_glue_path_example():
    M = path_metric(2)
    phi = make_map(M, [0, 2], [0.0, 2.0], RealLine())
    psi = make_map(M, [0, 1], [0.0, 0.0], RealLine())
    out = glue(phi, psi)
    assert out.domain == (0, 1, 2)
    assert out.values[:, 0].tolist() == [0.0, 0.0, 2.0]
    assert lipschitz_constant(out).constant == 2


def test_glue_agreement_violation():
    M = path_metric(2)
    phi = make_map(M, [0, 2], [0.0, 2.0], RealLine())
    psi = make_map(M, [0, 1], [0.5, 0.0], RealLine())
    with pytest.raises(AgreementViolation) as exc:
        glue(phi, psi, ys=[0])
    assert exc.value.j == 1
    assert exc.value.discrepancy == 0.5


def test_glue_domain_mismatch():
    M = path_metric(2)
    phi = make_map(M, [0, 2], [0.0, 2.0], RealLine())
    with pytest.raises(DomainMismatch):
        glue(phi, make_map(M, [1], [0.0], RealLine()))
    with pytest.raises(DomainMismatch):
        glue(phi, make_map(M, [0, 1], [[0.0], [0.0]], Euclidean(1)))


def test_claim1_bound_examples():
    assert claim1_bound(1, 1, 0) == 3
    assert claim1_bound(0, 0, 0.7) == 0
    delta, K = 0.5, 2
    assert claim1_bound(1, (1 + delta) * K, delta) == 7 == paper_form_bound(1, K, delta)


def test_run_claim1_no_new_points():
    M = path_metric(2)
    phi = make_map(M, [0, 2], [0.0, 2.0], RealLine())
    tr = run_claim1(M, [0, 2], [], phi)
    assert tr.achieved == tr.L == 1
    assert tr.certified_bound >= tr.L


def test_run_claim1_mcshane_path():
    M = path_metric(4)
    phi = make_map(M, [0, 4], [0.0, 4.0], RealLine())
    tr = run_claim1(M, [0, 4], [2], phi, oracle="mcshane")
    assert tr.ys == (0,)
    # Psi lives on {0, 2}; McShane gives Phi(2) = min(0 + 2) = 2
    assert tr.phi_glued.value_at(2)[0] == 2.0
    assert tr.L == 1 and tr.C_psi == 1
    assert tr.achieved == 1
    assert tr.certified_bound == 3


def test_run_claim1_two_point_target_matches_enumeration():
    M = path_metric(4)
    two = equilateral(2)
    phi = make_map(M, [0, 4], [0, 1], two)
    tr = run_claim1(M, [0, 4], [2], phi, oracle="brute")
    # Psi extends phi|{0} to {0, 2}: the constant copy is optimal
    c, _ = best_extension(M.dist.tolist(), two.space.dist.tolist(), {0: 0}, [0, 2])
    assert tr.C_psi == c == 0
    assert tr.achieved <= tr.certified_bound
    assert tr.achieved == 0.5


def test_run_claim1_trace_fields():
    M = graph_metric([(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 4, 3), (0, 4, 2), (1, 3, 2)], 5)
    phi = make_map(M, [0, 2, 4], [[0, 0], [1, 2], [3, -1]], Euclidean(2))
    tr = run_claim1(M, [0, 2, 4], [1, 3], phi, delta=0.1, K=1.0)
    assert len(tr.ys) == 2
    names = [c.name for c in tr.pair_classes]
    assert names == ["within_S", "within_psi_domain", "S_minus_y_to_x"]
    assert all(c.slack >= -1e-9 for c in tr.pair_classes)
    assert all(s >= -1e-9 for s in tr.selection_slack)
    d = tr.to_dict()
    assert d["achieved"] == tr.achieved
    assert d["oracle"] == "euclidean"


def test_run_claim1_shared_y():
    M = path_metric(4)
    phi = make_map(M, [0, 1], [0, 1], equilateral(3))
    tr = run_claim1(M, [0, 1], [2, 3, 4], phi, oracle="brute")
    assert tr.ys == (1, 1, 1)
    assert tr.psi.map.domain == (1, 2, 3, 4)
    assert tr.achieved <= tr.certified_bound + 1e-9


def test_run_claim1_perturbed_selection():
    M = path_metric(6)
    phi = make_map(M, [0, 5, 6], [0.0, 3.0, 1.0], RealLine())
    tr = run_claim1(M, [0, 5, 6], [2], phi, delta=0.5, perturb=True)
    assert tr.ys == (5,)
    assert tr.achieved <= tr.certified_bound + 1e-9


def test_run_claim1_phi_must_live_on_S():
    M = path_metric(3)
    phi = make_map(M, [0, 3], [0.0, 1.0], RealLine())
    with pytest.raises(DomainMismatch):
        run_claim1(M, [0, 2], [1], phi)


def test_glue_accepts_extension_result():
    M = path_metric(3)
    phi = make_map(M, [0, 3], [0, 1], equilateral(2))
    psi = brute_force_extend(phi.restrict([0]), [0, 1])
    assert isinstance(psi, ExtensionResult)
    out = glue(phi, psi)
    assert out.domain == (0, 1, 3)
