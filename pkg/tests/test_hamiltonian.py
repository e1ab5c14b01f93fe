import numpy as np
import pytest

from conftest import kron_hamiltonian, multiset_close
from noclick.basis import FULL, SectorLabel, enumerate_sector, sector_labels, sector_to_full
from noclick.hamiltonian import (MODELS, Disorder, ModelSpec, build, build_sparse, ground_truth_diagonal)
from noclick.spectral import diagonalize

PARAMS = {
    "transverse_measured": dict(h=0.3, gamma=1.3),
    "nnn_transverse_measured": dict(h=0.3, gamma=1.6, J2=0.9),
    "longfield_transverse_measured": dict(h=0.25, gamma=1.2, g=0.14),
    "longitudinal_measured": dict(h=0.7, gamma=1.2),
}


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("L", [3, 4, 5])
def test_full_space_matches_kronecker_oracle(model, L):
    spec = ModelSpec(model, L, **PARAMS[model])
    assert np.allclose(build(spec).matrix, kron_hamiltonian(model, L, **PARAMS[model]), atol=1e-14)


@pytest.mark.parametrize("model", MODELS)
def test_disordered_fields_match_oracle(model):
    spec = ModelSpec(model, 5, disorder=Disorder(0.3, 7), **PARAMS[model])
    fields = spec.site_fields()
    assert np.allclose(build(spec).matrix, kron_hamiltonian(model, 5, fields=fields, **PARAMS[model]))


def test_disorder_fields_are_seeded_and_bounded():
    spec = ModelSpec("transverse_measured", 12, h=0.5, gamma=1.0, disorder=Disorder(0.05, 3))
    f = spec.site_fields()
    assert np.array_equal(f, spec.site_fields())
    assert np.all(np.abs(f / 0.5 - 1) <= 0.05)
    assert not np.allclose(f, ModelSpec("transverse_measured", 12, h=0.5, disorder=Disorder(0.05, 4)).site_fields())
    with pytest.raises(ValueError):
        Disorder(-0.1, 0)


@pytest.mark.parametrize("model", MODELS)
def test_complex_symmetric(model):
    M = build(ModelSpec(model, 8, **PARAMS[model])).matrix
    assert np.array_equal(M, M.T)


@pytest.mark.parametrize("model", ["transverse_measured", "nnn_transverse_measured", "longfield_transverse_measured"])
def test_hermitian_without_measurement(model):
    p = dict(PARAMS[model], gamma=0.0)
    M = build(ModelSpec(model, 6, **p)).matrix
    assert np.allclose(M, M.conj().T)
    assert np.max(np.abs(np.linalg.eigvals(M).imag)) < 1e-10


def test_transverse_hermitian_limit_example():
    ev = diagonalize(build(ModelSpec("transverse_measured", 4, h=0.3, gamma=0.0))).eigenvalues
    assert abs(ev.imag.max()) < 1e-12


@pytest.mark.parametrize("model", MODELS)
def test_gamma_sign_flip_conjugates_spectrum(model):
    p = PARAMS[model]
    neg = kron_hamiltonian(model, 5, **dict(p, gamma=-p["gamma"]))
    ev = np.linalg.eigvals(build(ModelSpec(model, 5, **p)).matrix)
    assert multiset_close(np.linalg.eigvals(neg), ev.conj(), 1e-9)


@pytest.mark.parametrize("L", [6, 7, 8])
def test_longitudinal_spectrum_has_conjugate_pairs(L):
    ev = np.linalg.eigvals(build(ModelSpec("longitudinal_measured", L, h=0.7, gamma=1.2)).matrix)
    assert multiset_close(ev, ev.conj(), 1e-8)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("L", [4, 6, 8])
def test_sector_blocks_are_projections_of_full_matrix(model, L):
    spec = ModelSpec(model, L, **PARAMS[model])
    H = build(spec).matrix
    for lab in sector_labels(L, z2=spec.has_z2):
        b = enumerate_sector(L, lab)
        if b.dim == 0:
            continue
        E = sector_to_full(np.eye(b.dim), b)
        assert np.allclose(E.conj().T @ H @ E, build(spec, b).matrix, atol=1e-12)
        # the block is invariant: H E = E H_sector
        assert np.allclose(H @ E, E @ build(spec, b).matrix, atol=1e-12)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("L", [5, 6, 8])
def test_sector_union_spectrum_equals_full(model, L):
    spec = ModelSpec(model, L, **PARAMS[model])
    full = diagonalize(build(spec)).eigenvalues
    parts = [diagonalize(build(spec, enumerate_sector(L, lab))).eigenvalues
             for lab in sector_labels(L, z2=spec.has_z2) if enumerate_sector(L, lab).dim]
    assert multiset_close(np.concatenate(parts), full, 1e-8)


def test_sparse_and_dense_agree():
    spec = ModelSpec("nnn_transverse_measured", 8, **PARAMS["nnn_transverse_measured"])
    b = enumerate_sector(8, SectorLabel(0, 1, 1))
    assert np.allclose(build_sparse(spec, b).toarray(), build(spec, b).matrix)


def test_longitudinal_classical_limit_is_diagonal():
    spec = ModelSpec("longitudinal_measured", 6, h=0.0, gamma=1.2)
    M = build(spec).matrix
    assert np.count_nonzero(M - np.diag(np.diag(M))) == 0
    assert M[0, 0] == pytest.approx(-6 + 6j * 1.2 / 4)


def test_ground_truth_examples():
    gt = ground_truth_diagonal(ModelSpec("longitudinal_measured", 2, h=0.0, gamma=4.0))
    assert gt[0] == pytest.approx(-2 + 2j)
    gt4 = ground_truth_diagonal(ModelSpec("longitudinal_measured", 4, h=0.0, gamma=4.0))
    assert gt4[0b0101] == pytest.approx(4 + 0j)
    ev = diagonalize(build(ModelSpec("longitudinal_measured", 4, h=0.0, gamma=4.0))).eigenvalues
    assert multiset_close(ev, gt4, 1e-12)
    assert np.argmax(gt4.imag) == 0


def test_ground_truth_errors():
    with pytest.raises(ValueError):
        ground_truth_diagonal(ModelSpec("longitudinal_measured", 4, h=0.1, gamma=1.0))
    with pytest.raises(ValueError):
        ground_truth_diagonal(ModelSpec("transverse_measured", 4, h=0.0, gamma=1.0))


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("transverse_measured", 4, J2=0.5)
    with pytest.raises(ValueError):
        ModelSpec("nnn_transverse_measured", 4, g=0.1)
    with pytest.raises(ValueError):
        ModelSpec("longitudinal_measured", 4, J2=0.1)
    with pytest.raises(ValueError):
        ModelSpec("transverse_measured", 4, gamma=-1)
    with pytest.raises(ValueError):
        ModelSpec("ising", 4)
    with pytest.raises(ValueError):
        ModelSpec("transverse_measured", 1)


def test_symmetry_queries():
    assert ModelSpec("transverse_measured", 4).has_z2
    assert not ModelSpec("longitudinal_measured", 4).has_z2
    assert not ModelSpec("longfield_transverse_measured", 4, g=0.1).has_z2


def test_basis_errors():
    spec = ModelSpec("transverse_measured", 6, h=0.3, gamma=1.0, disorder=Disorder(0.05, 1))
    with pytest.raises(ValueError):
        build(spec, enumerate_sector(6, SectorLabel(0)))
    # spin inversion survives field disorder
    assert build(spec, enumerate_sector(6, SectorLabel(None, 1))).matrix.shape == (32, 32)
    with pytest.raises(ValueError):
        build(ModelSpec("longitudinal_measured", 6, h=0.3), enumerate_sector(6, SectorLabel(0, 1)))
    with pytest.raises(ValueError):
        build(ModelSpec("transverse_measured", 6), enumerate_sector(8, FULL))
    with pytest.raises(MemoryError):
        build(ModelSpec("transverse_measured", 8), max_dim=100)


def test_spec_dict_roundtrip():
    spec = ModelSpec("nnn_transverse_measured", 10, h=0.3, gamma=1.6, J2=0.9, disorder=Disorder(0.05, 11))
    d = spec.to_dict()
    assert set(d) == {"model", "L", "J", "J2", "h", "g", "gamma", "disorder"}
    assert ModelSpec.from_dict(d) == spec
    assert spec.with_(L=12).L == 12
