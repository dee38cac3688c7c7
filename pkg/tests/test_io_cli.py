from __future__ import annotations

import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given

from dsdreg import cli
from dsdreg import io as dio
from dsdreg.interval import IntervalVariable, SymbolicTable

from strategies import random_tables


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestTableFormat:
    @given(random_tables())
    def test_roundtrip(self, table):
        text = dio.format_variables(table.unit_labels, (table.response, *table.explicatives))
        back = dio.parse_variables(text).table("Y")
        assert back == table

    def test_write_read(self, tmp_path):
        t = dio.load_forestfires()
        p = tmp_path / "t.csv"
        dio.write_table(t, p)
        assert dio.read_table(p) == t

    @pytest.mark.parametrize(
        "text, msg",
        [
            ("unit,Y_lb,Y_ub\na,2,1\n", r"row 2 \('a'\), variable 'Y': lower bound 2.0 exceeds"),
            ("unit,Y_lb,Y_ub\na,1\n", "row 2 has 2 cells"),
            ("unit,Y_lb,Y_ub\na,x,1\n", "row 2, column 'Y_lb': non-numeric"),
            ("unit,Y_lb,Z_ub\na,0,1\n", "not a V_lb, V_ub pair"),
            ("unit,Y_lb\na,0\n", "header"),
            ("unit,Y_lb,Y_ub\na,0,1\na,0,1\n", "duplicated unit labels"),
            ("", "empty"),
        ],
    )
    def test_validation(self, text, msg):
        with pytest.raises(dio.TableFormatError, match=msg):
            dio.parse_variables(text)

    def test_float_format_lossless(self):
        for v in (0.1, 1 / 3, -2.5e-300, 123456789.123, 3.0):
            assert float(dio.fmt_float(v)) == v
        assert dio.fmt_float(3.0) == "3"


class TestDatasets:
    def test_unemployment(self):
        t = dio.load_unemployment()
        assert (t.m, t.p, t.response.name, t.predictor_names) == (58, 1, "LNY", ("X",))
        vf = dio.load_dataset_variables("unemployment")
        np.testing.assert_array_equal(vf.variable("LNY").lowers, t.response.lowers)
        raw = dio.load_unemployment(log_response=False)
        assert raw.response.name == "Y" and raw.response[0].upper == 49

    def test_printed_typo_variant(self):
        t = dio.load_unemployment(printed_typo=True)
        j = t.unit_labels.index("FxLxA3xB")
        assert t.explicatives[0][j].lower == 29

    def test_forestfires(self):
        t = dio.load_forestfires()
        assert (t.m, t.response.name, t.predictor_names) == (10, "LNarea", ("temp", "wind", "rh"))
        assert t.unit_labels[0] == "Feb" and t.unit_labels[-1] == "Dec"


class TestModelFile:
    @pytest.mark.parametrize("method", cli.METHODS)
    def test_roundtrip_predictions(self, method, tmp_path):
        t = dio.load_forestfires()
        model, lo, hi, _ = cli.fit_method(method, t)
        p = tmp_path / "m.txt"
        dio.write_model(model, p, "LNarea", m=t.m)
        loaded = dio.read_model(p)
        L = np.column_stack([v.lowers for v in t.explicatives])
        U = np.column_stack([v.uppers for v in t.explicatives])
        lo2, hi2 = loaded.predict_arrays(L, U)
        np.testing.assert_array_equal(lo, lo2)
        np.testing.assert_array_equal(hi, hi2)

    def test_missing_key(self):
        with pytest.raises(dio.TableFormatError, match="missing key"):
            dio.kv_to_model({"method": "dsd"})


class TestCli:
    def test_fit_and_predict(self, tmp_path, capsys):
        model = tmp_path / "model.txt"
        report = tmp_path / "report.csv"
        code, _, _ = run(
            ["fit", "unemployment.csv", "--response", "LNY", "--method", "dsd",
             "--out", str(model), "--report", str(report)],
            capsys,
        )
        assert code == 0
        kv = dio.parse_kv(model.read_text())
        assert float(kv["alpha"]) == pytest.approx(0.0779, abs=1e-3)
        assert report.read_text().startswith("method,response,m,omega")
        preds = tmp_path / "pred.csv"
        assert run(["predict", str(model), "unemployment", "--out", str(preds)], capsys)[0] == 0
        assert len(preds.read_text().splitlines()) == 59

    def test_fit_default_predictors_skip_raw_copy(self, capsys):
        code, out, _ = run(["fit", "unemployment", "--response", "LNY"], capsys)
        assert code == 0 and "predictors = X\n" in out

    def test_compare_rows(self, capsys):
        code, out, _ = run(["compare", "forestfires_monthly.csv", "--response", "LNarea"], capsys)
        lines = out.splitlines()
        assert code == 0 and [l.split(",")[0] for l in lines[1:]] == list(cli.METHODS)

    def test_loo(self, capsys):
        code, out, _ = run(["loo", "forestfires_monthly", "--response", "LNarea"], capsys)
        assert code == 0 and len(out.splitlines()) == 11

    def test_invalid_method_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["fit", "unemployment", "--method", "lasso"])
        assert info.value.code == 2

    def test_missing_variable_exit_code(self, capsys):
        code, _, err = run(["fit", "unemployment", "--response", "nope"], capsys)
        assert code == 1 and "nope" in err

    def test_missing_file(self, capsys):
        code, _, err = run(["compare", "/no/such/file.csv"], capsys)
        assert code == 1 and "not found" in err

    def test_study_byte_identical(self, tmp_path, capsys):
        cfg = tmp_path / "study1_low.cfg"
        cfg.write_text("study = I\ntable = 1SA2\nsizes = 10\nmicrodata_count = 100\n")
        outs = []
        for k in range(2):
            out = tmp_path / f"r{k}.csv"
            code, _, _ = run(
                ["study", "--config", str(cfg), "--replications", "5", "--seed", "7", "--out", str(out)], capsys
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        first = outs[0].decode().splitlines()[1].split(",")
        assert first[2] == "a=0;b=0" and float(first[5]) == pytest.approx(1, abs=1e-12)

    def test_study_custom_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text(
            "study = II\ntruth = 2,1,-1\nvariability = high\nlinearity = high\n"
            "sizes = 10,30\nreplications = 2\nmicrodata_count = 50\n"
        )
        code, out, _ = run(["study", "--config", str(cfg)], capsys)
        assert code == 0 and len(out.splitlines()) == 3

    def test_study_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("table = 1SA2\ncolour = blue\n")
        code, _, err = run(["study", "--config", str(cfg), "--replications", "1"], capsys)
        assert code == 1 and "colour" in err

    def test_byte_identical_compare(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            run(["compare", "unemployment", "--response", "LNY", "--out", str(p)], capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_console_script(self):
        out = subprocess.run(
            [sys.executable, "-m", "dsdreg.cli", "dataset", "forestfires_monthly"],
            capture_output=True, text=True, check=True,
        )
        assert out.stdout.startswith("unit,LNarea_lb")
