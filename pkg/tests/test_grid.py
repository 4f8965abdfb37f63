import numpy as np
import pytest

from kirchhoff_spectral import ParameterError, SpectralGrid, regularity_threshold


def test_regularity_threshold():
    assert regularity_threshold(1) == 1.0
    assert regularity_threshold(2) == 1.5
    assert regularity_threshold(3) == 1.5


@pytest.mark.parametrize("d,n", [(1, 8), (2, 4), (2, 8), (3, 3)])
def test_construction_invariants(d, n):
    g = SpectralGrid(d, n)
    assert np.all(g.j2 >= 1)
    assert np.all(g.j2 <= n * n)
    # closed under negation
    assert np.array_equal(g.modes[g.neg_index], -g.modes)
    # every mode in exactly one class, keyed by its integer squared norm
    assert np.array_equal(g.class_j2[g.class_of], g.j2)
    # classes are contiguous runs in the canonical order
    assert np.all(np.diff(g.class_of) >= 0)


def test_ball_truncation_keeps_spheres_complete():
    g = SpectralGrid(2, 4)
    slots = {tuple(m) for m in g.modes.tolist()}
    assert (4, 0) in slots
    assert (3, 3) not in slots  # |j|^2 = 18 > 16
    # the |j|^2 = 16 sphere is complete: (+-4, 0) and (0, +-4)
    cls = int(np.searchsorted(g.class_j2, 16))
    members = {tuple(m) for m in g.modes[g.class_of == cls].tolist()}
    assert members == {(4, 0), (-4, 0), (0, 4), (0, -4)}


def test_canonical_order_is_deterministic():
    a = SpectralGrid(1, 4)
    b = SpectralGrid(1, 4)
    assert np.array_equal(a.modes, b.modes)
    # sorted by squared norm first, then lexicographically
    assert a.modes[:, 0].tolist() == [-1, 1, -2, 2, -3, 3, -4, 4]


def test_large_grids_validate_at_construction():
    for d, n in [(1, 12), (2, 12), (3, 12)]:
        g = SpectralGrid(d, n)
        assert g.n_modes > 0


def test_slot_lookup_and_errors(grid1):
    assert grid1.modes[grid1.slot(3)][0] == 3
    assert grid1.modes[grid1.slot((3,))][0] == 3
    with pytest.raises(ParameterError):
        grid1.slot(0)
    with pytest.raises(ParameterError):
        grid1.slot(9)
    with pytest.raises(ParameterError):
        grid1.slot((1, 1))


def test_bad_parameters():
    with pytest.raises(ParameterError):
        SpectralGrid(4, 4)
    with pytest.raises(ParameterError):
        SpectralGrid(1, 0)


def test_weight_cache(grid1):
    w = grid1.weight(1.5)
    assert w is grid1.weight(1.5)
    assert np.allclose(w, grid1.j2f ** 1.5)
    assert np.all(grid1.weight(0.0) == 1.0)


def test_coupling_tables_resonant_zero(grid2):
    # diagonal of the difference table is exactly zero (resonant pairs)
    assert np.all(np.diag(grid2.diff_table) == 0.0)
    assert np.all(np.isfinite(grid2.diff_table))
    assert np.all(grid2.sum_table > 0.0)


def test_corrupt_flag_flips_diff_table():
    g = SpectralGrid(1, 4)
    gc = SpectralGrid(1, 4, corrupt_diff_sign=True)
    assert np.array_equal(gc.diff_table, -g.diff_table)
