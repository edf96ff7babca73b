import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionchain import coupling, equilibrium, modes


def tensors_for(n, alpha=None):
    u = equilibrium.solve_equilibrium(n)
    axial = modes.axial_matrix(u)
    if alpha is None:
        alpha = 0.5 * modes.critical_anisotropy(np.linalg.eigvalsh(axial))
    basis = modes.diagonalize(axial, alpha)
    return u, basis, coupling.coupling_tensors(u, basis)


def test_two_ion_mode_tensor_closed_form():
    _, _, t = tensors_for(2)
    assert abs(t.mode[1, 1, 1] + 2.0 ** (1.0 / 6.0)) < 1e-12


def test_three_ion_mode_tensor_closed_forms():
    _, _, t = tensors_for(3)
    d222 = -(4.0 / 5.0) ** (1.0 / 3.0) / np.sqrt(2.0)
    d233 = -3.0 * (4.0 / 5.0) ** (4.0 / 3.0) / np.sqrt(2.0)
    assert abs(t.mode[1, 1, 1] - d222) < 1e-12
    assert abs(t.mode[1, 2, 2] - d233) < 1e-12
    # one stretch index anywhere picks the same entry
    assert abs(t.mode[2, 1, 2] - d233) < 1e-12


def test_ion_tensor_sparsity_pattern():
    _, _, t = tensors_for(5)
    n = 5
    for m in range(n):
        for q in range(n):
            for p in range(n):
                if m != q and q != p and m != p:
                    assert t.ion[m, q, p] == 0.0
    # diagonal entries are strictly positive for edge ions
    assert t.ion[0, 0, 0] > 0.0


@settings(max_examples=10, deadline=None)
@given(n=st.integers(min_value=2, max_value=9))
def test_full_permutation_symmetry(n):
    _, _, t = tensors_for(n)
    for tensor in (t.ion, t.mode):
        for perm in ((0, 2, 1), (1, 0, 2), (2, 1, 0), (1, 2, 0), (2, 0, 1)):
            assert np.max(np.abs(tensor - tensor.transpose(perm))) < 1e-12


@pytest.mark.parametrize("n", range(2, 11))
def test_structural_identities(n):
    u, basis, t = tensors_for(n)
    report = coupling.check_identities(t, basis, u)
    assert report.max_violation() < 1e-9
    assert report.com_decoupling < 1e-12


def test_stretch_contraction_is_diagonal():
    _, basis, t = tensors_for(7)
    d_stretch = t.mode[:, :, 1]
    off = d_stretch - np.diag(np.diag(d_stretch))
    assert np.max(np.abs(off)) < 1e-12
    expected = (1.0 - basis.mu) / (2.0 * t.stretch_norm)
    assert np.allclose(np.diag(d_stretch), expected, atol=1e-10)


def test_nonzero_records_format():
    _, _, t = tensors_for(3)
    records = coupling.nonzero_records(t, threshold=1e-12)
    assert all(1 <= i <= 3 for rec in records for i in rec[:3])
    # every record clears the threshold in at least one tensor
    assert all(abs(rec[3]) > 1e-12 or abs(rec[4]) > 1e-12 for rec in records)
    lookup = {rec[:3]: rec for rec in records}
    assert (2, 2, 2) in lookup
    full = coupling.nonzero_records(t)
    assert len(full) >= len(records)


def test_tensors_are_read_only():
    _, _, t = tensors_for(4)
    with pytest.raises(ValueError):
        t.ion[0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        t.mode[0, 0, 0] = 1.0
