import math

import numpy as np
import pytest
import yaml

from readout_opt import (
    DeviceConfigError,
    FrequencyRangeError,
    NeighborOrder,
    QubitId,
    Role,
    coupling_strength,
    load_device,
    neighbors,
    relaxation_rate,
    serialize_device,
)

from conftest import TWO_PI, grid_3x3, make_graph, make_qubit

MINIMAL_ENTRY = {
    "row": 0, "col": 0, "role": "data",
    "alpha_GHz": -0.2, "g_eff": 0.07, "f_r_GHz": 4.7, "eta": 0.5,
    "kappa_MHz": 11.0, "amp_ref": 1.0, "band_GHz": [5.6, 6.3],
    "gamma1_table": [[5.2, 0.05], [5.8, 0.06], [6.4, 0.05]],
}


def minimal_yaml(**overrides):
    entry = {**MINIMAL_ENTRY, **overrides}
    return yaml.safe_dump({"qubits": [entry]})


class TestLoadDevice:
    def test_minimal_single_qubit(self):
        graph = load_device(minimal_yaml())
        assert len(graph.qubits) == 1
        qid = graph.sorted_ids()[0]
        assert neighbors(graph, qid, NeighborOrder.BOTH) == []
        q = graph.qubits[qid]
        assert q.omega_r == pytest.approx(TWO_PI * 4.7)
        assert q.kappa == pytest.approx(TWO_PI * 0.011)
        assert q.alpha == pytest.approx(-TWO_PI * 0.2)
        # rates convert from 1/us to 1/ns
        assert q.gamma1_table[0][1] == pytest.approx(5e-5)

    def test_d3_layout_roles(self, d3_graph):
        roles = [q.role for q in d3_graph.qubits]
        assert len(d3_graph.qubits) == 17
        assert sum(r is Role.MEASURE for r in roles) == 8
        assert sum(r is Role.DATA for r in roles) == 9

    def test_kappa_zero_rejected(self):
        with pytest.raises(DeviceConfigError, match="kappa"):
            load_device(minimal_yaml(kappa_MHz=0.0))

    def test_eta_out_of_range_rejected(self):
        with pytest.raises(DeviceConfigError, match="eta"):
            load_device(minimal_yaml(eta=1.5))

    def test_positive_alpha_rejected(self):
        with pytest.raises(DeviceConfigError, match="alpha"):
            load_device(minimal_yaml(alpha_GHz=0.2))

    def test_band_outside_gamma1_span_rejected(self):
        with pytest.raises(DeviceConfigError, match="band"):
            load_device(minimal_yaml(band_GHz=[5.0, 6.3]))

    def test_unsorted_gamma1_rejected(self):
        with pytest.raises(DeviceConfigError, match="increasing"):
            load_device(minimal_yaml(
                gamma1_table=[[5.2, 0.05], [5.2, 0.06], [6.4, 0.05]]))

    def test_duplicate_coordinates_rejected(self):
        doc = yaml.safe_load(minimal_yaml())
        doc["qubits"].append({**MINIMAL_ENTRY, "role": "measure"})
        with pytest.raises(DeviceConfigError, match="duplicate"):
            load_device(yaml.safe_dump(doc))

    def test_parse_failure(self):
        with pytest.raises(DeviceConfigError):
            load_device("qubits: [::")

    def test_round_trip(self, d3_graph):
        again = load_device(serialize_device(d3_graph))
        assert set(again.qubits) == set(d3_graph.qubits)
        for qid, q in d3_graph.qubits.items():
            q2 = again.qubits[qid]
            assert q2.alpha == pytest.approx(q.alpha, rel=1e-12)
            assert q2.kappa == pytest.approx(q.kappa, rel=1e-12)
            assert q2.omega_r == pytest.approx(q.omega_r, rel=1e-12)
            assert np.allclose(q2.gamma1_table, q.gamma1_table, rtol=1e-12)
            lo1, hi1 = d3_graph.search_band[qid]
            lo2, hi2 = again.search_band[qid]
            assert lo2 == pytest.approx(lo1, rel=1e-12)
            assert hi2 == pytest.approx(hi1, rel=1e-12)


class TestCouplingStrength:
    def test_zero_coupling_efficiency(self):
        q = make_qubit(g_eff=0.0)
        assert coupling_strength(q, TWO_PI * 6.0) == 0.0

    def test_at_resonator_frequency(self):
        q = make_qubit()
        assert coupling_strength(q, q.omega_r) == pytest.approx(
            q.g_eff * q.omega_r / 2.0)

    def test_monotone_in_omega_q(self):
        q = make_qubit()
        omegas = np.linspace(TWO_PI * 5.0, TWO_PI * 7.0, 50)
        values = [coupling_strength(q, w) for w in omegas]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_nonpositive_frequency_rejected(self):
        with pytest.raises(ValueError):
            coupling_strength(make_qubit(), 0.0)


class TestRelaxationRate:
    def setup_method(self):
        self.q = make_qubit(gamma1_table=(
            (TWO_PI * 5.0, 1e-5), (TWO_PI * 6.0, 3e-5), (TWO_PI * 7.0, 2e-5),
        ))

    def test_table_node_exact(self):
        assert relaxation_rate(self.q, TWO_PI * 6.0) == 3e-5

    def test_midpoint_is_mean(self):
        assert relaxation_rate(self.q, TWO_PI * 5.5) == pytest.approx(2e-5)

    def test_below_range_rejected(self):
        with pytest.raises(FrequencyRangeError):
            relaxation_rate(self.q, TWO_PI * 4.9)

    def test_above_range_rejected(self):
        with pytest.raises(FrequencyRangeError):
            relaxation_rate(self.q, TWO_PI * 7.1)

    def test_array_input(self):
        out = relaxation_rate(self.q, np.array([TWO_PI * 5.0, TWO_PI * 6.5]))
        assert out == pytest.approx([1e-5, 2.5e-5])

    def test_piecewise_linear_continuity(self):
        omegas = np.linspace(TWO_PI * 5.0, TWO_PI * 7.0, 401)
        rates = relaxation_rate(self.q, omegas)
        assert np.all(np.abs(np.diff(rates)) < 1e-6)


class TestNeighbors:
    def test_corner_nearest(self):
        graph = grid_3x3()
        corner = graph.at(0, 0)
        assert len(neighbors(graph, corner, NeighborOrder.NEAREST)) == 2

    def test_center_both(self):
        graph = grid_3x3()
        center = graph.at(1, 1)
        both = neighbors(graph, center, NeighborOrder.BOTH)
        assert len(both) == 8
        assert len(neighbors(graph, center, NeighborOrder.NEAREST)) == 4
        assert len(neighbors(graph, center, NeighborOrder.NEXT_NEAREST)) == 4

    def test_row_major_order(self):
        graph = grid_3x3()
        both = neighbors(graph, graph.at(1, 1), NeighborOrder.BOTH)
        keys = [(n.row, n.col) for n in both]
        assert keys == sorted(keys)

    def test_single_qubit_no_neighbors(self):
        graph = make_graph([(0, 0, Role.DATA)])
        assert neighbors(graph, graph.at(0, 0), NeighborOrder.BOTH) == []

    def test_unknown_qubit(self):
        graph = grid_3x3()
        with pytest.raises(KeyError):
            neighbors(graph, QubitId(9, 9, Role.DATA), NeighborOrder.BOTH)

    @pytest.mark.parametrize("order", list(NeighborOrder))
    def test_symmetry(self, order, d3_graph):
        for q in d3_graph.qubits:
            for n in neighbors(d3_graph, q, order):
                assert q in neighbors(d3_graph, n, order)
