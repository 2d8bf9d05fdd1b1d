import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcrb.exceptions import (
    KernelBlockDerivative,
    ModelError,
    NonHermitianDerivative,
    NotDensityMatrix,
    RankDeficientDbeta,
)
from qcrb.model import (
    FIXTURE_NAMES,
    QuantumModel,
    fixture,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate,
)
from _support import random_model

SZ = np.diag([1.0, -1.0]).astype(complex)


def simple_qubit(**overrides):
    fields = dict(
        dim=2,
        rho=np.eye(2, dtype=complex) / 2,
        drho=np.array([SZ / 2]),
        dbeta=np.array([[1.0]]),
        weight=np.array([[1.0]]),
    )
    fields.update(overrides)
    return QuantumModel(**fields)


class TestValidate:
    def test_valid_qubit(self):
        diag = validate(simple_qubit())
        assert diag.rho_rank == 2
        assert diag.min_eigenvalue == pytest.approx(0.5)
        assert_allclose(diag.support_projector, np.eye(2), atol=1e-12)

    def test_rejects_nonunit_trace(self):
        with pytest.raises(NotDensityMatrix, match="Tr rho"):
            validate(simple_qubit(rho=np.eye(2, dtype=complex)))

    def test_rejects_nonhermitian_rho(self):
        bad = np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex)
        with pytest.raises(NotDensityMatrix):
            validate(simple_qubit(rho=bad))

    def test_rejects_negative_rho(self):
        with pytest.raises(NotDensityMatrix, match="negative eigenvalue"):
            validate(simple_qubit(rho=np.diag([1.5, -0.5]).astype(complex)))

    def test_rejects_traceful_derivative(self):
        with pytest.raises(NonHermitianDerivative, match="trace"):
            validate(simple_qubit(drho=np.array([np.eye(2, dtype=complex)])))

    def test_rejects_nonhermitian_derivative(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(NonHermitianDerivative):
            validate(simple_qubit(drho=np.array([bad])))

    def test_kernel_block_derivative(self):
        # rank-1 state whose derivative grows the kernel eigenvalue
        with pytest.raises(KernelBlockDerivative):
            validate(
                simple_qubit(
                    rho=np.diag([1.0, 0.0]).astype(complex),
                    drho=np.array([np.diag([-1.0, 1.0]).astype(complex)]),
                )
            )

    def test_rank_deficient_dbeta(self):
        with pytest.raises(RankDeficientDbeta):
            validate(simple_qubit(dbeta=np.array([[0.0]])))

    def test_rejects_non_psd_weight(self):
        with pytest.raises(ModelError):
            validate(simple_qubit(weight=np.array([[-1.0]])))

    def test_rank_one_valid_model(self):
        # pure state with a support/cross-block derivative is fine
        m = fixture("pure_qubit_angles", [1.1, 0.4])
        diag = validate(m)
        assert diag.rho_rank == 1

    def test_totality_on_fuzzed_inputs(self):
        # validate never crashes: diagnostics or a typed ModelError
        rng = np.random.default_rng(99)
        for _ in range(200):
            d = int(rng.integers(1, 4))
            shape_rho = (d + rng.integers(0, 2), d)
            rho = rng.normal(size=shape_rho) + 1j * rng.normal(size=shape_rho)
            p = int(rng.integers(1, 3))
            drho = rng.normal(size=(p, d, d)) + 1j * rng.normal(size=(p, d, d))
            dbeta = rng.normal(size=(p + rng.integers(0, 2), rng.integers(1, 3)))
            weight = rng.normal(size=(rng.integers(1, 3), rng.integers(1, 3)))
            m = QuantumModel(dim=d, rho=rho, drho=drho, dbeta=dbeta, weight=weight)
            try:
                diag = validate(m)
                assert 0 < diag.rho_rank <= d
            except ModelError:
                pass


class TestSerialization:
    def test_minimal_round_trip(self, tmp_path):
        path = tmp_path / "m.json"
        m = simple_qubit()
        save_model(m, path)
        loaded = load_model(path)
        assert loaded.dim == 2
        assert loaded.drho.shape == (1, 2, 2)
        assert loaded.dbeta.shape == (1, 1)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        for k in range(10):
            m = random_model(rng, d=int(rng.integers(2, 5)), p=2, q=2, weighted=True)
            path = tmp_path / f"m{k}.json"
            save_model(m, path)
            loaded = load_model(path)
            assert np.array_equal(loaded.rho, m.rho)
            assert np.array_equal(loaded.drho, m.drho)
            assert np.array_equal(loaded.dbeta, m.dbeta)
            assert np.array_equal(loaded.weight, m.weight)

    def test_load_rejects_nonhermitian_rho(self, tmp_path):
        data = model_to_dict(simple_qubit())
        data["rho"][0][1] = [0.5, 0.0]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(NotDensityMatrix):
            load_model(path)

    def test_load_reports_field_context(self, tmp_path):
        data = model_to_dict(simple_qubit())
        data["rho"][0][0] = "oops"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError, match=r"rho\[0\]\[0\]"):
            load_model(path)

    def test_load_reports_json_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\n  broken\n}")
        with pytest.raises(ValueError, match="line 2"):
            load_model(path)

    def test_rectangular_dbeta_accepted(self):
        m = model_from_dict(
            {
                "dim": 2,
                "rho": model_to_dict(simple_qubit())["rho"],
                "drho": [model_to_dict(simple_qubit())["drho"][0]] * 3,
                "dbeta": [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]],
            }
        )
        assert m.dbeta.shape == (3, 2)
        assert m.weight.shape == (2, 2)  # identity default

    def test_missing_field(self):
        with pytest.raises(ValueError, match="dim"):
            model_from_dict({"rho": []})


class TestFixtures:
    def test_qubit_xy_at_z(self):
        m = fixture("qubit_xy_at_z", [0.5])
        assert_allclose(np.linalg.eigvalsh(m.rho), [0.25, 0.75], atol=1e-12)
        assert m.drho.shape == (2, 2, 2)
        assert_allclose(m.dbeta, np.eye(2))
        validate(m)

    @pytest.mark.parametrize("z", [-0.99, 0.0, 0.7])
    def test_qubit_xy_valid_range(self, z):
        m = fixture("qubit_xy_at_z", [z])
        assert np.trace(m.rho).real == pytest.approx(1.0)
        validate(m)

    def test_qubit_xy_rejects_unit_z(self):
        with pytest.raises(ValueError, match="range|< 1"):
            fixture("qubit_xy_at_z", [1.0])

    def test_classical_diagonal_commutes(self):
        m = fixture("classical_diagonal", [0.2, 0.3])
        for dj in m.drho:
            assert np.abs(m.rho @ dj - dj @ m.rho).max() < 1e-14
        validate(m)

    def test_pure_qubit_is_rank_one(self):
        m = fixture("pure_qubit_angles", [0.9, 2.0])
        vals = np.linalg.eigvalsh(m.rho)
        assert_allclose(sorted(vals), [0.0, 1.0], atol=1e-12)
        validate(m)

    def test_pure_qubit_rejects_pole(self):
        with pytest.raises(ValueError, match="pole"):
            fixture("pure_qubit_angles", [0.0, 1.0])

    def test_qubit_bloch(self):
        m = fixture("qubit_bloch", [0.1, 0.2, 0.3])
        validate(m)
        assert m.n_params == 3

    def test_qubit_bloch_rejects_unit_radius(self):
        with pytest.raises(ValueError):
            fixture("qubit_bloch", [1.0, 0.0, 0.0])

    def test_random_full_rank_deterministic(self):
        a = fixture("random_full_rank", [42])
        b = fixture("random_full_rank", [42])
        assert np.array_equal(a.rho, b.rho)
        assert np.array_equal(a.drho, b.drho)
        assert np.array_equal(a.dbeta, b.dbeta)
        c = fixture("random_full_rank", [43])
        assert not np.array_equal(a.rho, c.rho)
        validate(a)

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown fixture"):
            fixture("nope", [1.0])

    @pytest.mark.parametrize("name", FIXTURE_NAMES)
    def test_all_fixtures_validate(self, name):
        params = {
            "qubit_bloch": [0.2, -0.1, 0.4],
            "qubit_xy_at_z": [0.3],
            "pure_qubit_angles": [1.2, 0.5],
            "classical_diagonal": [0.25, 0.25],
            "random_full_rank": [7],
        }[name]
        validate(fixture(name, params))
