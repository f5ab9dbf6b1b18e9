import pytest

from arrange.linalg import RationalMatrix
from arrange.models import configuration_model, hyperplane_model, os_oracle
from arrange.polys import IntPoly
from arrange.projective import ProjProduct
from arrange.spectral import (ExplicitModeUnavailable, Infeasible,
                              MissingStratumData, NotComposable, SpectralPage,
                              WeightViolation, WeightedCell, assemble_e2,
                              build_differential_config, feasibility, run,
                              skew_row_homology)
from arrange.stalks import decompose
from helpers import run_explicit

BOOLEAN_P2 = [([1, 0, 0], 0), ([0, 1, 0], 0), ([0, 0, 1], 0)]
TWO_POINTS_P1 = [([1, 0], 0), ([0, 1], 0)]


def assemble(model):
    dec = decompose(model)
    return assemble_e2(dec, model.strata(), model.ambient, model.c,
                       bottom=model.poset.bottom)


def cell_dims(page):
    return {key: cell.dim for key, cell in page.cells.items()}


def test_assemble_single_hypersurface_rows():
    # one smooth hypersurface in P^2: ambient row plus its shifted row
    m = hyperplane_model([([1, 0, 0], 0)], mode="projective")
    page = assemble(m)
    assert cell_dims(page) == {(0, 0): 1, (2, 0): 1, (4, 0): 1,
                               (0, 1): 1, (2, 1): 1}
    assert page.cells[(2, 1)].weight == 4


def test_assemble_boolean_p2_rows():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    page = assemble(m)
    assert cell_dims(page) == {(0, 0): 1, (2, 0): 1, (4, 0): 1,
                               (0, 1): 3, (2, 1): 3, (0, 2): 3}
    assert page.cells[(0, 1)].weight == 2
    assert page.cells[(2, 1)].weight == 4
    assert page.cells[(0, 2)].weight == 4


def test_assemble_configuration_p2_pair():
    # c = 2: rows only at q = 0 and q = 3
    m = configuration_model(ProjProduct((2,)), 2)
    page = assemble(m)
    assert {q for (_, q) in page.cells} == {0, 3}
    assert cell_dims(page)[(0, 3)] == 1
    assert page.cells[(0, 3)].weight == 4
    assert page.cells[(2, 3)].weight == 6


def test_assemble_missing_stratum_data():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    dec = decompose(m)
    with pytest.raises(MissingStratumData):
        assemble_e2(dec, {}, m.ambient, m.c, bottom=m.poset.bottom)


def test_two_points_in_p1():
    # the complement is the punctured affine line
    m = hyperplane_model(TWO_POINTS_P1, mode="projective")
    page, res = run_explicit(m)
    block = page.differential[(0, 1)]
    assert (block.rows, block.cols) == (1, 2)
    assert block.rank() == 1
    assert res.betti == IntPoly([1, 1])
    assert res.weights.get(1, 2) == 1


def test_boolean_p2_ranks_and_limit():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    page, res = run_explicit(m)
    assert res.ranks == {(0, 1): 1, (0, 2): 2, (2, 1): 1}
    assert res.betti == IntPoly([1, 2, 1])
    assert res.betti == os_oracle(m.poset)
    assert res.weights.get(1, 2) == 2
    assert res.weights.get(2, 4) == 1


def test_configuration_f_p1_2():
    m = configuration_model(ProjProduct((1,)), 2)
    page, res = run_explicit(m)
    assert res.betti == IntPoly([1, 0, 1])
    assert res.weights.get(2, 2) == 1


def test_configuration_f_p1_3():
    m = configuration_model(ProjProduct((1,)), 3)
    page, res = run_explicit(m)
    assert res.betti == IntPoly([1, 0, 0, 1])
    assert res.weights.get(3, 4) == 1


def test_configuration_f_p2_2():
    m = configuration_model(ProjProduct((2,)), 2)
    page, res = run_explicit(m)
    assert res.betti == IntPoly([1, 0, 2, 0, 2, 0, 1])
    for k in (0, 2, 4, 6):
        assert res.weights.get(k, k) == res.betti.coeff(k)


def test_configuration_f_p1xp1_2():
    # product factor: F(P1xP1, 2); chi(F(Y,2)) = chi(Y)(chi(Y) - 1) by
    # point counting, an oracle independent of the page bookkeeping
    m = configuration_model(ProjProduct((1, 1)), 2)
    page, res = run_explicit(m)
    assert res.euler == page.euler() == 4 * 3
    assert res.betti.coeff(0) == 1 and res.betti.coeff(1) == 0


def test_configuration_three_points_product_base():
    # n = 3 over a multi-factor base exercises the multiplicity-space
    # blocks with c = 2; chi(F(Y,3)) = chi(Y)(chi(Y)-1)(chi(Y)-2)
    m = configuration_model(ProjProduct((1, 1)), 3)
    page, res = run_explicit(m)
    page.check_differential()
    assert res.euler == 4 * 3 * 2
    assert res.betti.coeff(0) == 1 and res.betti.coeff(1) == 0

    m2 = configuration_model(ProjProduct((2,)), 3)
    page2, res2 = run_explicit(m2)
    page2.check_differential()
    assert res2.euler == 3 * 2 * 1
    assert res2.betti.coeff(0) == 1


def test_explicit_mode_unavailable_for_four_points():
    m = configuration_model(ProjProduct((1,)), 4)
    page = assemble(m)
    with pytest.raises(ExplicitModeUnavailable):
        build_differential_config(m, page)


def test_run_zero_differential_keeps_page():
    m = hyperplane_model([([1, 0, 0], 0)], mode="projective")
    page = assemble(m).with_differential({})
    res = run(page)
    assert cell_dims(res.einfty) == cell_dims(page)
    # with a zero differential the page survives verbatim: one cell on each
    # antidiagonal 0..4
    assert res.betti == IntPoly([1, 1, 1, 1, 1])


def test_d_squared_checked():
    cells = {
        (0, 2): WeightedCell(0, 2, 1, 4, (("a", 0, 0),)),
        (2, 1): WeightedCell(2, 1, 1, 4, (("b", 0, 0),)),
        (4, 0): WeightedCell(4, 0, 1, 4, (("c", 0, 0),)),
    }
    bad = {
        (0, 2): RationalMatrix.from_rows([[1]]),
        (2, 1): RationalMatrix.from_rows([[1]]),
    }
    page = SpectralPage(1, 2, cells, differential=bad)
    with pytest.raises(NotComposable):
        run(page)


def test_weight_violation_checked():
    cells = {
        (0, 1): WeightedCell(0, 1, 1, 2, (("a", 0, 0),)),
        (2, 0): WeightedCell(2, 0, 1, 3, (("b", 0, 0),)),  # wrong weight
    }
    diff = {(0, 1): RationalMatrix.from_rows([[1]])}
    page = SpectralPage(1, 2, cells, differential=diff)
    with pytest.raises(WeightViolation):
        run(page)


def test_skew_row_punctured_line():
    m = hyperplane_model(TWO_POINTS_P1, mode="projective")
    page, res = run_explicit(m)
    assert skew_row_homology(page, 1, 1) == 1   # weight-2 piece of H^1
    assert skew_row_homology(page, 0, 0) == 1
    assert skew_row_homology(page, 1, 0) == 0
    assert skew_row_homology(page, 2, 1) == 0


def test_skew_row_boolean_p2():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    page, res = run_explicit(m)
    assert skew_row_homology(page, 2, 2) == 1   # weight-4 piece of H^2
    assert skew_row_homology(page, 1, 1) == 2
    assert skew_row_homology(page, 2, 0) == 0


def test_skew_rows_match_weight_table_everywhere():
    for forms in (BOOLEAN_P2, TWO_POINTS_P1):
        m = hyperplane_model(forms, mode="projective")
        page, res = run_explicit(m)
        maxq = max(q for (_, q) in page.cells)
        maxk = max(p + q for (p, q) in page.cells)
        for k in range(maxk + 1):
            for ell in range(maxq + 1):
                assert skew_row_homology(page, k, ell) == \
                    res.weights.get(k, k + ell)


def test_euler_preserved_by_run():
    for build in (
            lambda: hyperplane_model(BOOLEAN_P2, mode="projective"),
            lambda: configuration_model(ProjProduct((1,)), 3),
            lambda: configuration_model(ProjProduct((2,)), 2)):
        m = build()
        page, res = run_explicit(m)
        assert page.euler() == res.einfty.euler() == res.euler


def test_feasibility_boolean_p2_unique():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    page = assemble(m)
    res = feasibility(page, IntPoly([1, 2, 1]))
    assert res.feasible and res.unique
    assert res.ranks == {(0, 1): 1, (0, 2): 2, (2, 1): 1}


def test_feasibility_euler_only():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    page = assemble(m)
    res = feasibility(page)
    assert res.euler == 0      # the complement is a torus
    assert res.bounds[0] == (1, 1)
    assert res.feasible is None


def test_feasibility_infeasible_target():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    page = assemble(m)
    with pytest.raises(Infeasible):
        feasibility(page, IntPoly([1, 9, 1]))
    with pytest.raises(Infeasible):
        # right bounds, wrong Euler characteristic
        feasibility(page, IntPoly([1, 2, 2]))


def test_feasibility_nongeneric_projective():
    # three concurrent lines in P^2: deconed oracle is 1 + 2t
    forms = [([1, -1, 0], 0), ([0, 1, -1], 0), ([1, 0, -1], 0)]
    m = hyperplane_model(forms, mode="projective")
    assert not m.ncd
    page = assemble(m)
    res = feasibility(page, os_oracle(m.poset))
    assert res.feasible and res.unique
    assert res.euler == -1


def test_row_vanishing_pattern_enforced():
    with pytest.raises(Exception):
        SpectralPage(2, 4, {(0, 1): WeightedCell(0, 1, 1, 0, (("x", 0, 0),))})


def test_basis_labels_carry_provenance():
    m = hyperplane_model(BOOLEAN_P2, mode="projective")
    page, res = run_explicit(m)
    cell = res.einfty.cells[(0, 1)]
    assert cell.dim == 2
    flats = {label[0] for label in cell.basis}
    line_ids = {f.index for f in m.poset.flats if f.codim == 1}
    assert flats <= line_ids
