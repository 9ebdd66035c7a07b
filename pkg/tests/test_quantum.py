import math

import numpy as np
import pytest

from sgcat.diagnostics.quantum import (
    QuantumFeatureMap, phase_angles, quantum_gram, quantum_kernel, quantum_state, quantum_states,
)

from .oracles import dense_feature_state, dense_fidelity

FMAP = QuantumFeatureMap()


def test_state_matches_dense_expm_oracle():
    rng = np.random.default_rng(17)
    for _ in range(20):
        x = rng.uniform(0, math.pi, 3)
        assert np.max(np.abs(quantum_state(x) - dense_feature_state(x))) < 1e-10


def test_kernel_matches_dense_oracle_on_pairs():
    rng = np.random.default_rng(18)
    for _ in range(20):
        x, x2 = rng.uniform(0, math.pi, (2, 3))
        assert abs(quantum_kernel(x, x2) - dense_fidelity(x, x2)) < 1e-10


def test_other_depth_and_entanglement_match_oracle():
    fmap = QuantumFeatureMap(n_qubits=3, depth=3, entanglement=((0, 2),))
    x = np.array([0.3, 2.0, 1.1])
    ref = dense_feature_state(x, depth=3, pairs=((0, 2),))
    assert np.max(np.abs(quantum_state(x, fmap) - ref)) < 1e-10


def test_states_are_normalised():
    X = np.random.default_rng(0).uniform(0, math.pi, (30, 3))
    assert np.allclose(np.linalg.norm(quantum_states(X), axis=1), 1.0, atol=1e-12)


def test_origin_state_against_oracle():
    x = np.zeros(3)
    assert np.allclose(quantum_state(x), dense_feature_state(x), atol=1e-12)


def test_phase_angles_single_qubit_terms():
    fmap = QuantumFeatureMap(n_qubits=2, depth=1, entanglement=())
    theta = phase_angles([[0.4, 1.0]], fmap)[0]
    # basis 0 -> s = (+,+), basis 1 -> bit0 set -> s = (-,+)
    assert np.allclose(theta, [1.4, 0.6, -0.6, -1.4])


def test_gram_properties():
    X = np.random.default_rng(5).uniform(0, math.pi, (50, 3))
    K = quantum_gram(X)
    assert np.array_equal(K, K.T)
    assert np.max(np.abs(np.diag(K) - 1.0)) <= 1e-12
    assert np.linalg.eigvalsh(K).min() >= -1e-8
    assert K.min() >= 0.0 and K.max() <= 1.0 + 1e-12


def test_cross_gram_agrees_with_pairwise_kernel():
    rng = np.random.default_rng(6)
    X, Y = rng.uniform(0, math.pi, (4, 3)), rng.uniform(0, math.pi, (3, 3))
    K = quantum_gram(X, Y)
    for i in range(4):
        for j in range(3):
            assert K[i, j] == pytest.approx(quantum_kernel(X[i], Y[j]), abs=1e-12)


def test_out_of_range_features_rejected():
    with pytest.raises(ValueError):
        quantum_state([0.1, 3.5, 0.2])
    with pytest.raises(ValueError):
        quantum_state([-0.1, 0.5, 0.2])
    with pytest.raises(ValueError):
        quantum_state([0.1, 0.2])


def test_feature_map_roundtrip_and_validation():
    assert QuantumFeatureMap.from_dict(FMAP.to_dict()) == FMAP
    assert QuantumFeatureMap.linear(3, 2) == FMAP
    with pytest.raises(ValueError):
        QuantumFeatureMap(entanglement=((0, 3),))
    with pytest.raises(ValueError):
        QuantumFeatureMap(depth=0)
