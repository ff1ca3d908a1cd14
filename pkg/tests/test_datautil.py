import csv
import datetime as dt
import json

import numpy as np
import pytest
import sympy
import uncertainties

from holobf.datautil import (
    SWEEP_COLUMNS, DataEncoder, build_manifest, data_decoder, pprint,
    read_sweep_csv, write_report, write_sweep_csv,
)
from holobf.common import DomainError
from holobf.weights import WeightResult


class TestEncoding:

    def test_arrays_and_datetimes(self):
        now = dt.datetime(2026, 3, 1, 12, 30, 5, 123)
        document = {"array": np.arange(3), "time": now}
        text = json.dumps(document, cls=DataEncoder)
        decoded = json.loads(text, object_hook=data_decoder)
        assert np.array_equal(decoded["array"], np.arange(3))
        assert decoded["time"] == now

    def test_library_types(self):
        encoded = json.loads(json.dumps({
            "u": uncertainties.ufloat(1.5, 0.25),
            "expr": sympy.Rational(-1, 4),
            "scalar": np.float64(0.5),
            "result": WeightResult(0.0, 0.0, degree_zero_flag=True, reason="form degree"),
        }, cls=DataEncoder))
        assert encoded["u"] == {"nominal": 1.5, "std": 0.25}
        assert encoded["expr"] == "-1/4"
        assert encoded["scalar"] == 0.5
        assert encoded["result"]["reason"] == "form degree"

    def test_pprint(self, capsys, tmp_path):
        out = tmp_path / "rows.tsv"
        pprint(1, "ab", width=4, out=out)
        assert capsys.readouterr().out == "   1   ab\n"
        assert out.read_text() == "1\tab\n"


class TestArtifacts:

    def test_manifest(self):
        manifest = build_manifest({"grid": 4, "seed": 7, "tol": 1e-6, "help": False}, extra=1)
        assert manifest["constants"] == {"lambda_c1": "1", "lambda_c2": "-4"}
        assert (manifest["grid"], manifest["seed"], manifest["tol"]) == (4, 7, 1e-6)
        assert "help" not in manifest["config"]
        assert manifest["extra"] == 1

    def test_sweep_csv(self, tmp_path):
        rows = [{"epsilon": 0.1, "L": 1.0, "graph_id": "abc", "value": np.float64(0.25), "error_estimate": 0.0}]
        path, manifest_path = write_sweep_csv(tmp_path / "out" / "sweep.csv", rows, build_manifest(seed=3))
        first, header = path.read_text().splitlines()[:2]
        assert first.startswith("# manifest: ") and json.loads(first[12:])["seed"] == 3
        assert header == ",".join(SWEEP_COLUMNS)
        assert json.loads(manifest_path.read_text())["seed"] == 3

        (row,), manifest = read_sweep_csv(path)
        assert tuple(row) == SWEEP_COLUMNS
        assert row["value"] == 0.25 and row["graph_id"] == "abc"
        assert manifest["constants"] == {"lambda_c1": "1", "lambda_c2": "-4"}

    def test_plain_csv(self, tmp_path):
        path = tmp_path / "plain.csv"
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(SWEEP_COLUMNS)
            writer.writerow([0.1, 1, "abc", 0.5, 0])
        (row,), manifest = read_sweep_csv(path)
        assert manifest is None
        assert row["epsilon"] == 0.1 and row["graph_id"] == "abc"

    def test_report(self, tmp_path):
        text = write_report(None, {"c_an": 0.5}, build_manifest())
        assert json.loads(text)["manifest"]["sign_convention"]
        path = tmp_path / "report.json"
        write_report(path, {"c_an": 0.5}, build_manifest())
        assert json.loads(path.read_text())["c_an"] == pytest.approx(0.5)

    def test_output_path_is_a_directory(self, tmp_path):
        with pytest.raises(DomainError):
            write_report(tmp_path, {"c_an": 1.0}, build_manifest())
