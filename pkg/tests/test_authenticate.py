import math

import numpy as np
import pytest

from qcopy import authenticate, qsim
from qcopy.experiments import acceptance_rate, decrypt_statistics, swap_pair_rate
from qcopy.issuer import make_key_string, mint_medium, phase_key_state
from conftest import random_qubit


def three_sigma(p, trials):
    return 3 * math.sqrt(p * (1 - p) / trials)


def swap_mass(phi, psi):
    reg = authenticate.swap_test_circuit(phi, psi)
    return float(np.sum(np.abs(reg[:4]) ** 2))


class TestSwapTest:
    def test_equal_states(self, rng):
        for _ in range(20):
            psi = random_qubit(rng)
            assert 1 - swap_mass(psi, psi) < 1e-12
            assert authenticate.swap_test(psi, psi, rng).outcome == 0

    def test_orthogonal(self):
        assert abs(swap_mass(qsim.ZERO, qsim.ONE) - 0.5) < 1e-15
        assert abs(swap_mass(qsim.PLUS, qsim.MINUS) - 0.5) < 1e-15

    def test_circuit_matches_formula(self, rng):
        for _ in range(100):
            phi, psi = random_qubit(rng), random_qubit(rng)
            expected = 0.5 + 0.5 * abs(np.vdot(psi, phi)) ** 2
            assert abs(swap_mass(phi, psi) - expected) < 1e-12
            assert abs(authenticate.swap_test(phi, psi, rng).analytic_p0 - expected) < 1e-12

    def test_symmetric(self, rng):
        phi, psi = random_qubit(rng), random_qubit(rng)
        assert abs(swap_mass(phi, psi) - swap_mass(psi, phi)) < 1e-12

    def test_empirical_pair(self):
        phi, psi = phase_key_state(0.0), phase_key_state(2.0)
        est = swap_pair_rate(phi, psi, 40_000, seed=3)
        expected = 0.5 + 0.5 * math.cos(1.0) ** 2
        assert abs(est.p - expected) <= three_sigma(expected, est.trials)

    def test_dimension_error(self, rng):
        with pytest.raises(qsim.DimensionError):
            authenticate.swap_test(qsim.basis_state("00"), qsim.basis_state("00"), rng)


class TestHashGeneration:
    def test_success_branch_is_product_rotation(self, rng):
        thetas = rng.uniform(0, 2 * np.pi, 3)
        d = random_qubit(rng)
        keys = make_key_string(thetas, 6)
        hits = 0
        for _ in range(50):
            state, ok = authenticate.generate_hash(keys, d, rng)
            if ok:
                hits += 1
                assert qsim.equal_up_to_phase(state, qsim.rotation_z(thetas.sum()) @ d, tol=1e-9)
        assert hits > 0

    def test_zero_angles(self, rng):
        keys = make_key_string(np.zeros(4), 3)
        state, _ = authenticate.generate_hash(keys, qsim.PLUS, rng)
        np.testing.assert_allclose(state, qsim.PLUS, atol=1e-12)

    def test_success_rate(self):
        rng = np.random.default_rng(4)
        trials, n, l = 20_000, 3, 2
        keys = make_key_string(rng.uniform(0, 2 * np.pi, (trials, n)), l)
        _, ok = authenticate.generate_hash(keys, np.broadcast_to(qsim.PLUS, (trials, 2)), rng)
        expected = (1 - 0.5 ** l) ** n
        assert abs(np.mean(ok) - expected) <= three_sigma(expected, trials)

    def test_bad_shape(self, rng):
        with pytest.raises(qsim.DimensionError):
            authenticate.generate_hash(np.zeros((3, 2)), qsim.PLUS, rng)


class TestVerify:
    def test_genuine_medium_accepted(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            medium, _ = mint_medium(rng.integers(0, 2, 8), 4, rng)
            verdict = authenticate.verify_medium(medium, 16, rng)
            assert verdict.accepted and verdict.tests_run == 16
            assert verdict.first_rejection_index is None

    def test_verdict_dict(self):
        verdict = authenticate.VerificationVerdict(False, 3, 2, 5)
        assert verdict.to_dict() == {"accepted": False, "tests_run": 3, "first_rejection_index": 2}

    def test_orthogonal_hash(self):
        medium, _ = mint_medium([0, 1, 1], 4, np.random.default_rng(6))
        fake = qsim.rotation_z(np.pi) @ medium.hash_state  # orthogonal on the equator
        assert abs(np.vdot(fake, medium.hash_state)) < 1e-12
        est = acceptance_rate(medium.replace(hash_state=fake), 5, 10_000, seed=6)
        expected = 0.5 ** 5
        assert abs(est.p - expected) <= three_sigma(expected, est.trials)

    def test_stops_at_first_rejection(self):
        medium, _ = mint_medium([0, 1], 4, np.random.default_rng(7))
        fake = qsim.rotation_z(np.pi) @ medium.hash_state
        verdicts = [authenticate.verify_medium(medium, 16, np.random.default_rng(s), reference=fake)
                    for s in range(30)]
        for v in verdicts:
            assert not v.accepted or v.tests_run == 16
            if not v.accepted:
                assert v.tests_run == v.first_rejection_index + 1

    @pytest.mark.parametrize("delta,n,m", [(0.5, 2, 3), (0.3, 4, 4)])
    def test_angle_error_in_every_key(self, delta, n, m):
        rng = np.random.default_rng(8)
        medium, sec = mint_medium(rng.integers(0, 2, n), 6, rng)
        forged = medium.replace(keys=make_key_string(sec.thetas + delta, 6))
        est = acceptance_rate(forged, m, 10_000, seed=8, reference=medium.hash_state)
        expected = (0.5 + 0.5 * math.cos(n * delta / 2) ** 2) ** m
        assert abs(est.p - expected) <= three_sigma(expected, est.trials)

    def test_invalid_key_valid_hash_rejected(self):
        medium, sec = mint_medium([1, 0, 1], 4, np.random.default_rng(9))
        shifted = sec.thetas.copy()
        shifted[0] += np.pi
        forged = medium.replace(keys=make_key_string(shifted, 4))
        est = acceptance_rate(forged, 16, 2000, seed=9)
        assert est.hits <= 3  # (1/2)^16 per run

    def test_invalid_key_matching_hash_accepted_but_useless(self):
        # forged keys with a hash built from them pass verification,
        # yet they no longer decrypt the genuine data
        rng = np.random.default_rng(10)
        bits = [1, 0, 1, 1, 0, 0]
        medium, _ = mint_medium(bits, 4, rng)
        fake, _ = mint_medium(bits, 4, rng)
        forged = medium.replace(keys=fake.keys, hash_state=fake.hash_state)
        est = acceptance_rate(forged, 16, 2000, seed=10)
        assert est.hits == est.trials
        stats = decrypt_statistics(forged, 2000, seed=10, bits=bits)
        genuine = decrypt_statistics(medium, 2000, seed=10, bits=bits)
        assert genuine.exact_recovery.hits == genuine.all_success.hits
        assert stats.exact_recovery.p < 0.1 < genuine.exact_recovery.p

    def test_regenerations_counted(self):
        medium, _ = mint_medium([1] * 4, 1, np.random.default_rng(11))
        verdict = authenticate.verify_medium(medium, 8, np.random.default_rng(11))
        assert verdict.accepted and verdict.discarded_hashes > 0

    def test_needs_rng_and_positive_m(self):
        medium, _ = mint_medium([1], 2, np.random.default_rng(0))
        with pytest.raises(ValueError):
            authenticate.verify_medium(medium, 4)
        with pytest.raises(qsim.InvalidParameterError):
            authenticate.verify_medium(medium, 0, np.random.default_rng(0))
