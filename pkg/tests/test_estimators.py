import numpy as np
import pytest
from sklearn.base import clone

from unionrec import decode, model
from unionrec.estimators import BlockOMP, MLSubspaceDecoder
from unionrec.exceptions import DimensionMismatchError, DomainError
from unionrec.seeding import derive_rng


def _problem(seed=0, L=8, d=2, k0=2, M=10, noisy=True):
    bm = model.BlockModel(L, d, k0, model.random_orthonormal(L * d, seed))
    op = model.sample_gaussian_operator(M, L * d, derive_rng(seed, 0))
    noise = model.NoiseSpec(0.01)
    sig = model.generate_block_signal(bm, (1, 5), 15.0, 1.2, noise, derive_rng(seed, 1))
    y = model.observe(op, bm, sig, noise if noisy else None, derive_rng(seed, 2))
    X = op.A @ bm.V
    return X, y, sig


def test_ml_estimator_recovers_support():
    X, y, sig = _problem()
    est = MLSubspaceDecoder(n_nonzero_blocks=2, block_size=2).fit(X, y)
    assert est.support_ == sig.support
    assert est.residual_energy_ >= 0.0
    assert est.coef_.shape == (16,)


def test_ml_estimator_matches_functional_core():
    X, y, _ = _problem(seed=3)
    est = MLSubspaceDecoder(n_nonzero_blocks=2, block_size=2, store_energies=True).fit(X, y)
    supports = model.enumerate_supports(8, 2)
    cands = [X[:, model.block_columns(u, 2)] for u in supports]
    res = decode.ml_decode(y, cands)
    assert est.support_ == supports[res.estimated]
    assert np.allclose(est.per_candidate_energies_, res.per_candidate_energies)


def test_bomp_estimator_matches_functional_core():
    X, y, _ = _problem(seed=4)
    est = BlockOMP(n_nonzero_blocks=2, block_size=2).fit(X, y)
    blocks = [X[:, 2 * i : 2 * i + 2] for i in range(8)]
    assert est.support_ == decode.bomp(y, blocks, 2)


def test_predict_reconstructs_noiseless_signal():
    X, y, sig = _problem(seed=5, noisy=False)
    est = MLSubspaceDecoder(n_nonzero_blocks=2, block_size=2).fit(X, y)
    assert est.support_ == sig.support
    assert np.allclose(est.predict(X), y, atol=1e-8)
    assert est.residual_energy_ == pytest.approx(0.0, abs=1e-16)


def test_estimators_are_sklearn_compatible():
    est = MLSubspaceDecoder(n_nonzero_blocks=3, block_size=2, store_energies=True)
    params = est.get_params()
    assert params["n_nonzero_blocks"] == 3
    assert params["block_size"] == 2
    cloned = clone(est)
    assert cloned.get_params() == params
    est.set_params(n_nonzero_blocks=1)
    assert est.get_params()["n_nonzero_blocks"] == 1
    omp = clone(BlockOMP(n_nonzero_blocks=2, block_size=4))
    assert omp.get_params()["block_size"] == 4


def test_estimator_input_validation():
    X, y, _ = _problem()
    with pytest.raises(DimensionMismatchError):
        MLSubspaceDecoder(n_nonzero_blocks=2, block_size=3).fit(X, y)  # 16 % 3 != 0
    with pytest.raises(DimensionMismatchError):
        BlockOMP(n_nonzero_blocks=2, block_size=2).fit(X, y[:-1])
    with pytest.raises(DomainError):
        BlockOMP(n_nonzero_blocks=0, block_size=2).fit(X, y)


def test_estimators_agree_on_easy_problem():
    # orthogonal-ish high-SNR instance: greedy equals exhaustive
    X, y, sig = _problem(seed=7, M=14)
    ml = MLSubspaceDecoder(n_nonzero_blocks=2, block_size=2).fit(X, y)
    omp = BlockOMP(n_nonzero_blocks=2, block_size=2).fit(X, y)
    assert ml.support_ == omp.support_ == sig.support
    assert np.allclose(ml.coef_, omp.coef_, atol=1e-10)
