import numpy as np
import pytest

from noclick.entanglement import default_subsystem, entropy, reduce, steady_state_entropy
from noclick.hamiltonian import Disorder, ModelSpec


def random_state(rng, L):
    v = rng.standard_normal(1 << L) + 1j * rng.standard_normal(1 << L)
    return v / np.linalg.norm(v)


def oracle_entropy(psi, L, L_A):
    """Block of the lowest L_A sites via a plain reshape (high bits are rows)."""
    m = psi.reshape(1 << (L - L_A), 1 << L_A)
    s = np.linalg.svd(m, compute_uv=False) ** 2
    s = s[s > 1e-14]
    return float(-np.sum(s * np.log(s)))


def test_product_state_has_zero_entropy():
    psi = np.zeros(1 << 6, complex)
    psi[0b101100] = 1
    assert entropy(reduce(psi, 6, 3)) == 0.0


def test_bell_pair_across_cut():
    L = 4
    psi = np.zeros(1 << L, complex)
    # sites 1 and 2 entangled, others down
    psi[0b0000] = psi[0b0110] = 1 / np.sqrt(2)
    assert entropy(reduce(psi, L, 2, offset=0)) == pytest.approx(np.log(2))
    assert entropy(reduce(psi, L, 2, offset=1)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("L,L_A", [(4, 1), (6, 2), (8, 3), (9, 4)])
def test_against_svd_oracle(rng, L, L_A):
    psi = random_state(rng, L)
    assert entropy(reduce(psi, L, L_A)) == pytest.approx(oracle_entropy(psi, L, L_A), abs=1e-10)


def test_rho_is_a_density_matrix(rng):
    rho = reduce(random_state(rng, 8), 8, 3).entries
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


@pytest.mark.parametrize("L", [6, 8, 10])
def test_complementary_blocks_agree(rng, L):
    psi = random_state(rng, L)
    for L_A in range(1, L):
        assert entropy(reduce(psi, L, L_A)) == pytest.approx(entropy(reduce(psi, L, L - L_A, offset=L_A)), abs=1e-9)


def test_wrapped_block_equals_translated_state(rng):
    L = 7
    psi = random_state(rng, L)
    mask = (1 << L) - 1
    s = np.arange(1 << L)
    shifted = np.empty_like(psi)
    # move site j to site j-5 (mod L)
    shifted[((s >> 5) | (s << (L - 5))) & mask] = psi
    assert entropy(reduce(psi, L, 3, offset=5)) == pytest.approx(entropy(reduce(shifted, L, 3)), abs=1e-10)


def test_site_bookkeeping():
    L = 5
    psi = np.zeros(1 << L, complex)
    psi[1 << 3] = 1  # site 3 up
    r = reduce(psi, L, 2, offset=3)
    assert r.sites == (3, 4)
    assert r.entries[1, 1] == pytest.approx(1.0)


def test_reduce_rejects_bad_input(rng):
    psi = random_state(rng, 4)
    with pytest.raises(ValueError):
        reduce(psi, 5, 2)
    with pytest.raises(ValueError):
        reduce(psi, 4, 0)
    with pytest.raises(ValueError):
        reduce(psi, 4, 4)
    with pytest.raises(ValueError):
        reduce(psi, 4, 2, offset=4)
    with pytest.raises(ValueError):
        reduce(2 * psi, 4, 2)


def test_entropy_rejects_non_density_matrices():
    with pytest.raises(ValueError):
        entropy(np.array([[0.5, 0.3], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        entropy(np.eye(2))


def test_maximally_mixed_block():
    assert entropy(np.eye(4) / 4) == pytest.approx(np.log(4))


def test_default_subsystem():
    assert [default_subsystem(L) for L in (2, 4, 8, 10, 20)] == [1, 1, 2, 2, 5]


def test_steady_state_entropy_clean_only():
    with pytest.raises(ValueError):
        steady_state_entropy(ModelSpec("transverse_measured", 6, h=0.2, gamma=1.0, disorder=Disorder(0.05, 0)))


def test_steady_state_entropy_is_translation_invariant():
    spec = ModelSpec("transverse_measured", 8, h=0.2, gamma=1.0)
    vals = [steady_state_entropy(spec, 2, offset=o) for o in range(8)]
    assert np.ptp(vals) < 1e-9
