import math

import numpy as np
import pytest

from adiaspin.errors import InvalidInputError
from adiaspin.observables import FlipConvention, bloch_vector, compare, flip_probability
from adiaspin.su2 import Spinor, Su2, apply, axis_angle, compose, rot_z, rotation_matrix

from conftest import random_su2


def test_bloch_vectors():
    assert np.allclose(bloch_vector(Spinor(1, 0)), [0, 0, 1])
    assert np.allclose(bloch_vector(Spinor.normalized(1, 1)), [1, 0, 0])
    assert np.allclose(bloch_vector(Spinor.normalized(1, 1j)), [0, 1, 0])


def test_flip_of_half_turn():
    z = FlipConvention((0, 0, 1))
    assert flip_probability(axis_angle([1, 0, 0], math.pi), z) == pytest.approx(1.0)
    assert flip_probability(Su2.identity(), z) == 0.0
    assert flip_probability(rot_z(0.7), z) == pytest.approx(0.0, abs=1e-30)


def test_flip_matches_matrix_element(rng):
    for _ in range(50):
        u = random_su2(rng)
        a = rng.normal(size=3)
        a /= np.linalg.norm(a)
        conv = FlipConvention(tuple(a))
        # eigenvectors of a . sigma
        sig = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
        _, vecs = np.linalg.eigh(np.einsum("i,ijk->jk", a, sig))
        minus, plus = vecs[:, 0], vecs[:, 1]
        w = abs(minus.conj() @ u.matrix() @ plus) ** 2
        assert flip_probability(u, conv) == pytest.approx(w, abs=1e-13)


def test_rotation_invariance(rng):
    for _ in range(50):
        u, r = random_su2(rng), random_su2(rng)
        a = np.array([0.0, 0.0, 1.0])
        rotated = rotation_matrix(r) @ a
        conj = compose(compose(r, u), r.conjugate())
        w1 = flip_probability(u, FlipConvention(tuple(a)))
        w2 = flip_probability(conj, FlipConvention(tuple(rotated / np.linalg.norm(rotated))))
        assert w1 == pytest.approx(w2, abs=1e-12)


def test_gauge_frame_axis():
    conv = FlipConvention((1, 0, 0), frame="gauge")
    assert np.allclose(conv.lab_axis(math.pi / 2), [0, 1, 0])


def test_convention_validation():
    with pytest.raises(InvalidInputError):
        FlipConvention((1, 1, 0))
    with pytest.raises(InvalidInputError):
        FlipConvention((0, 0, 1), frame="rotating")


def test_compare():
    z = FlipConvention((0, 0, 1))
    u = axis_angle([1, 0, 0], 0.3)
    c = compare(u, u, z)
    assert c.fidelity_error == 0.0 and c.w_rel_err == 0.0 and not c.both_negligible
    c = compare(Su2.identity(), rot_z(0.2), z)
    assert c.both_negligible


def test_apply_preserves_norm(rng):
    s = Spinor.normalized(0.3 + 0.1j, -0.7)
    out = apply(random_su2(rng), s)
    assert abs(out.up) ** 2 + abs(out.down) ** 2 == pytest.approx(1.0)
