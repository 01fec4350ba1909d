from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tzvarnet.errors import DataError
from tzvarnet.netmetrics import metrics_summary
from tzvarnet.network import SignedNetwork
from tzvarnet.reports import (
    coefficients_to_dict,
    metrics_csv_rows,
    network_from_files,
    read_matrix_csv,
    selections_to_dict,
    write_json,
    write_matrix_csv,
)
from tzvarnet.selection import LambdaSelection
from tzvarnet.tzvar import CoefficientMatrix, LagStructure

from conftest import make_market_set, random_signed_network


class TestMatrixCsv:
    def test_float_round_trip_is_exact(self, tmp_path, rng):
        ids = ("AS1", "EU1", "AM1")
        m = rng.standard_normal((3, 3)) * 1e-3
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m, ids)
        got_ids, got = read_matrix_csv(path)
        assert got_ids == ids
        assert np.array_equal(got, m)

    @given(
        values=st.lists(
            st.floats(
                min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False
            ),
            min_size=4,
            max_size=4,
        )
    )
    @settings(max_examples=60)
    def test_arbitrary_floats_round_trip(self, tmp_path_factory, values):
        tmp = tmp_path_factory.mktemp("m")
        m = np.array(values).reshape(2, 2)
        write_matrix_csv(tmp / "m.csv", m, ("a", "b"))
        _, got = read_matrix_csv(tmp / "m.csv")
        assert np.array_equal(got, m)

    def test_integer_matrix_written_as_ints(self, tmp_path):
        m = np.array([[1, -1], [0, 1]], dtype=np.int8)
        write_matrix_csv(tmp_path / "a.csv", m, ("x", "y"))
        text = (tmp_path / "a.csv").read_text()
        assert "1.0" not in text
        _, got = read_matrix_csv(tmp_path / "a.csv")
        assert np.array_equal(got, m)

    def test_malformed_matrix_rejected(self, tmp_path):
        (tmp_path / "bad.csv").write_text(",x,y\nx,1,2\n")
        with pytest.raises(DataError, match="expected"):
            read_matrix_csv(tmp_path / "bad.csv")

    def test_network_from_files_validates_roster(self, tmp_path, rng):
        net = random_signed_network(rng)
        write_matrix_csv(tmp_path / "A.csv", net.A, net.markets.ids)
        write_matrix_csv(tmp_path / "W.csv", net.W, net.markets.ids)
        again = network_from_files(tmp_path / "A.csv", tmp_path / "W.csv", net.markets)
        assert np.array_equal(again.A, net.A)
        assert np.array_equal(again.W, net.W)
        other = make_market_set((1, 1, 1))
        if other.ids != net.markets.ids:
            with pytest.raises(DataError, match="roster"):
                network_from_files(tmp_path / "A.csv", tmp_path / "W.csv", other)


class TestJsonPayloads:
    def test_selections_payload_shape(self):
        sel = LambdaSelection(
            market="AS1", lambda_star=0.5, top=((0.5, 7), (0.3, 3)),
            replications=10, top_m=2,
        )
        payload = selections_to_dict({"AS1": sel})
        assert payload["AS1"]["lambda_star"] == 0.5
        assert payload["AS1"]["top"] == [
            {"lambda": 0.5, "freq": 7},
            {"lambda": 0.3, "freq": 3},
        ]
        assert payload["AS1"]["R"] == 10
        assert payload["AS1"]["M"] == 2
        assert "note" not in payload["AS1"]

    def test_selection_note_included_when_present(self):
        sel = LambdaSelection(
            market="AS1", lambda_star=0.5, top=((0.5, 10),),
            replications=10, top_m=3, note="only 1 distinct",
        )
        assert selections_to_dict({"AS1": sel})["AS1"]["note"] == "only 1 distinct"

    def test_coefficients_payload(self):
        ms = make_market_set()
        B = np.array([[0.1, 0.0, 0.0], [0.2, -0.3, 0.0], [0.0, 0.0, 0.0]])
        cm = CoefficientMatrix(
            B, np.array([0.0, 0.01, 0.0]), LagStructure.TIME_ZONE, ms,
            np.array([True, True, False]),
        )
        payload = coefficients_to_dict(cm)
        assert payload["structure"] == "timezone"
        assert payload["coefficients"]["EU1"]["AS1"] == 0.2
        assert payload["intercepts"]["EU1"] == 0.01
        assert payload["converged"]["AM1"] is False

    def test_write_json_is_sorted_and_round_trips(self, tmp_path, rng):
        net = random_signed_network(rng)
        summary = metrics_summary(net)
        write_json(summary, tmp_path / "m.json")
        text = (tmp_path / "m.json").read_text()
        assert json.loads(text) == json.loads(text)  # parseable
        again = json.loads(text)
        assert again["density"] == summary["density"]


class TestMetricsCsvRows:
    def test_row_inventory_and_reasons(self, rng):
        net = random_signed_network(rng)
        rows = metrics_csv_rows(metrics_summary(net), period="p1")
        metrics = {r[1] for r in rows}
        assert {
            "density", "edge_count", "continent_assortativity",
            "degree_assortativity", "in_strength", "out_strength",
            "net_in_strength", "net_out_strength", "quadrant", "continent_flow",
        } <= metrics
        n = net.markets.n
        flow_rows = [r for r in rows if r[1] == "continent_flow"]
        assert len(flow_rows) == 2 * 3 * 9  # bases x classes x cells
        strength_rows = [r for r in rows if r[1] == "in_strength"]
        assert len(strength_rows) == 2 * n
        assert all(r[0] == "p1" for r in rows)

    def test_undefined_metric_leaves_empty_cell_with_reason(self):
        ms = make_market_set((2, 0, 0))
        net = SignedNetwork(
            A=np.zeros((2, 2), dtype=np.int8), W=np.zeros((2, 2)), markets=ms
        )
        rows = metrics_csv_rows(metrics_summary(net), period="p")
        assort = [r for r in rows if r[1] == "continent_assortativity"]
        assert all(r[7] == "" and r[8] == "no edges" for r in assort)
