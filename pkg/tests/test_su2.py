import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiaspin import _quat
from adiaspin.errors import InvalidInputError
from adiaspin.su2 import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    CayleyKlein,
    Spinor,
    Su2,
    apply,
    axis_angle,
    compose,
    fidelity_error,
    from_cayley_klein,
    from_rotation_matrix,
    rot_z,
    rotation_matrix,
    to_cayley_klein,
)

from conftest import matrix_close, random_su2

MINUS_I_SX = Su2(0.0, 1.0, 0.0, 0.0)

quaternions = st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).filter(
    lambda q: np.linalg.norm(q) > 1e-3
)


def test_matrix_form_matches_pauli_expansion(rng):
    u = random_su2(rng)
    expected = u.w * np.eye(2) - 1j * (u.x * SIGMA_X + u.y * SIGMA_Y + u.z * SIGMA_Z)
    assert np.allclose(u.matrix(), expected, atol=1e-15)
    assert abs(np.linalg.det(u.matrix()) - 1) < 1e-14


def test_compose_identity_and_inverse(rng):
    u = random_su2(rng)
    assert fidelity_error(compose(Su2.identity(), u), u) == 0.0
    assert matrix_close(compose(u, u.conjugate()), np.eye(2))


def test_compose_shared_axis_adds_angles():
    assert matrix_close(compose(rot_z(math.pi / 2), rot_z(math.pi / 2)), rot_z(math.pi).matrix())


def test_compose_is_matrix_product(rng):
    a, b = random_su2(rng), random_su2(rng)
    assert np.allclose(compose(a, b).matrix(), a.matrix() @ b.matrix(), atol=1e-14)
    assert (a @ b) == compose(a, b)


def test_su2_rejects_non_unit():
    with pytest.raises(InvalidInputError):
        Su2(1.0, 1.0, 0.0, 0.0)
    with pytest.raises(InvalidInputError):
        Su2.from_array([0, 0, 0, 0])


def test_from_matrix_round_trip(rng):
    u = random_su2(rng)
    phase = cmath.exp(0.7j)
    assert fidelity_error(Su2.from_matrix(phase * u.matrix()), u) < 1e-14


class TestCayleyKlein:
    def test_identity(self):
        assert matrix_close(from_cayley_klein(CayleyKlein(1, 0, 0.0)), np.eye(2))

    def test_pure_phase(self):
        b = 0.83
        u = from_cayley_klein(CayleyKlein(1, 0, b))
        assert matrix_close(u, np.diag([cmath.exp(-1j * b), cmath.exp(1j * b)]))

    def test_eta_i(self):
        m = from_cayley_klein(CayleyKlein(0, 1j, 0.0)).matrix()
        assert abs(m[1, 0] - (-1j)) < 1e-15 and abs(m[0, 1] - (-1j)) < 1e-15

    def test_entry_structure(self, rng):
        xi, eta = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        n = math.hypot(abs(xi), abs(eta))
        xi, eta, beta = xi / n, eta / n, 1.3
        m = from_cayley_klein(CayleyKlein(xi, eta, beta)).matrix()
        e = cmath.exp(-1j * beta)
        assert np.allclose(m, [[xi * e, eta.conjugate() * e], [-eta / e, xi.conjugate() / e]], atol=1e-14)

    def test_norm_violation(self):
        with pytest.raises(InvalidInputError):
            from_cayley_klein(CayleyKlein(1.0, 0.1, 0.0))

    def test_to_cayley_klein_examples(self):
        ck = to_cayley_klein(Su2.identity(), 0.0)
        assert abs(ck.xi - 1) < 1e-15 and abs(ck.eta) < 1e-15
        ck = to_cayley_klein(from_cayley_klein(CayleyKlein(1, 0, 1.0)), 1.0)
        assert abs(ck.xi - 1) < 1e-15 and abs(ck.eta) < 1e-15

    def test_round_trip_random(self, rng):
        for _ in range(200):
            u, beta = random_su2(rng), rng.uniform(-10, 10)
            assert fidelity_error(from_cayley_klein(to_cayley_klein(u, beta)), u) < 1e-10
            ck = to_cayley_klein(u, beta)
            back = to_cayley_klein(from_cayley_klein(ck), beta)
            assert abs(back.xi - ck.xi) < 1e-10 and abs(back.eta - ck.eta) < 1e-10


class TestApply:
    def test_identity(self):
        s = Spinor.normalized(0.3, 0.4j)
        out = apply(Su2.identity(), s)
        assert abs(out.up - s.up) < 1e-15 and abs(out.down - s.down) < 1e-15

    def test_minus_i_sigma_x(self):
        out = apply(MINUS_I_SX, Spinor(1, 0))
        assert abs(out.up) < 1e-15 and abs(out.down - (-1j)) < 1e-15

    def test_diagonal(self):
        b = 0.4
        out = apply(from_cayley_klein(CayleyKlein(1, 0, b)), Spinor(1, 0))
        assert abs(out.up - cmath.exp(-1j * b)) < 1e-15 and abs(out.down) < 1e-15

    def test_norm_preserved(self, rng):
        for _ in range(100):
            s = Spinor.normalized(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
            v = random_su2(rng).matrix() @ s.as_array()
            assert abs(np.linalg.norm(v) - 1) < 1e-12


class TestFidelityError:
    def test_examples(self, rng):
        u = random_su2(rng)
        assert fidelity_error(u, u) == 0.0
        assert fidelity_error(u, -u) == 0.0
        assert abs(fidelity_error(Su2.identity(), MINUS_I_SX) - 1.0) < 1e-15

    def test_matches_trace_formula(self, rng):
        for _ in range(50):
            u, v = random_su2(rng), random_su2(rng)
            tr = abs(np.trace(u.matrix().conj().T @ v.matrix())) / 2
            assert abs(fidelity_error(u, v) - math.sqrt(max(0.0, 1 - tr**2))) < 1e-7

    def test_resolves_tiny_differences(self):
        u = Su2.identity()
        v = axis_angle([0.3, -0.2, 0.9], 2e-13)
        assert abs(fidelity_error(u, v) - 1e-13) < 1e-16

    def test_triangle_like_bound(self, rng):
        for _ in range(300):
            a, b, c = (random_su2(rng) for _ in range(3))
            assert fidelity_error(a, c) <= fidelity_error(a, b) + fidelity_error(b, c) + 1e-9

    def test_symmetric(self, rng):
        a, b = random_su2(rng), random_su2(rng)
        assert fidelity_error(a, b) == pytest.approx(fidelity_error(b, a), abs=1e-15)


def test_rotation_matrix_conjugates_pauli_vectors(rng):
    u = random_su2(rng)
    r = rotation_matrix(u)
    m = rng.normal(size=3)
    lhs = u.matrix() @ (m[0] * SIGMA_X + m[1] * SIGMA_Y + m[2] * SIGMA_Z) @ u.matrix().conj().T
    rm = r @ m
    assert np.allclose(lhs, rm[0] * SIGMA_X + rm[1] * SIGMA_Y + rm[2] * SIGMA_Z, atol=1e-13)
    assert fidelity_error(from_rotation_matrix(r), u) < 1e-12


def test_rot_z_is_half_angle_exponential():
    a = 0.9
    assert matrix_close(rot_z(a), np.diag([cmath.exp(-0.5j * a), cmath.exp(0.5j * a)]))


@settings(max_examples=200, deadline=None)
@given(quaternions, quaternions)
def test_composition_keeps_unit_norm(a, b):
    u, v = Su2.from_array(a), Su2.from_array(b)
    assert compose(u, v).norm_error < 1e-12


def test_vectorized_composition_chain_keeps_unit_norm(rng):
    q = _quat.qnormalize(rng.normal(size=(4096, 4)))
    acc = _quat.qidentity()
    worst = 0.0
    for k in range(64):
        acc = _quat.qnormalize(_quat.qmul(q[k], acc))
        worst = max(worst, abs(np.linalg.norm(acc) - 1))
    assert worst < 1e-12
