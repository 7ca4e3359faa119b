from __future__ import annotations

import json
import math

import pytest
from click.testing import CliRunner
from hypothesis import given, settings
from hypothesis import strategies as st

from kkit.cli import ConfigError, RunConfig, config_hash, main, parse_config, parse_grid


def run(*args: str, **kw):
    return CliRunner().invoke(main, list(args), catch_exceptions=False, **kw)


def csv_parts(text: str) -> tuple[list[str], list[str]]:
    lines = text.splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    meta = [ln for ln in lines if ln.startswith("#")]
    return body, meta


class TestConfig:
    def test_round_trip(self):
        text = "[global]\nthreads = 2\n\n[geometric scan]\nD = 5\npartition = Q+=1,2\ns-grid = 0.5:0.05:log:5\n"
        cfg = parse_config(text)
        assert cfg.sections["geometric scan"]["s-grid"] == "0.5:0.05:log:5"
        assert parse_config(cfg.dumps()) == cfg

    @settings(max_examples=50)
    @given(st.dictionaries(st.from_regex(r"[A-Za-z][A-Za-z0-9_-]{0,8}", fullmatch=True),
                           st.from_regex(r"[A-Za-z0-9.,:;+=\[\]()*/ -]{0,20}", fullmatch=True).map(str.strip),
                           max_size=5))
    def test_round_trip_property(self, items):
        cfg = RunConfig({"density tauber": dict(items)})
        assert parse_config(cfg.dumps()) == cfg

    @pytest.mark.parametrize("text,line,col", [
        ("[global]\nthreads 2\n", 2, 1),
        ("[global]\n  [geometric scan\n", 2, 18),
        ("[nope cmd]\n", 1, 2),
        ("threads = 1\n", 1, 1),
        ("[global]\nthreads = 1\nthreads = 2\n", 3, 1),
        ("[global]\n1x = 2\n", 2, 1),
    ])
    def test_errors_carry_position(self, text, line, col):
        with pytest.raises(ConfigError) as exc:
            parse_config(text)
        assert (exc.value.line, exc.value.column) == (line, col)
        assert f"line {line}, column {col}" in str(exc.value)

    def test_bad_config_file_is_usage_error(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("[global]\nthreads 2\n")
        res = run("--config", str(p), "field", "info", "--D", "5")
        assert res.exit_code == 2
        assert "line 2, column 1" in res.stderr

    def test_config_supplies_options(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("[field info]\nD = 5\n")
        a = run("--config", str(p), "field", "info")
        b = run("field", "info", "--D", "5")
        assert a.exit_code == 0 and a.stdout == b.stdout

    def test_grids(self):
        assert parse_grid("1,2,3") == [1.0, 2.0, 3.0]
        g = parse_grid("100:10000:log:3")
        assert g[0] == 100.0 and g[1] == pytest.approx(1000.0) and g[2] == pytest.approx(10000.0)
        assert parse_grid("0:1:lin:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
        with pytest.raises(Exception):
            parse_grid("0:1:log")


class TestCommands:
    def test_missing_required(self):
        res = run("field", "info")
        assert res.exit_code == 2
        assert "Usage:" in res.stderr and "--D" in res.stderr

    def test_field_info(self):
        res = run("field", "info", "--D", "5")
        doc = json.loads(res.stdout)
        assert doc["result"]["D_F"] == 5
        assert doc["result"]["fundamental_unit"] == "w"
        assert doc["config"] == {"command": "field info", "params": {"D": 5}}
        assert doc["config_hash"] == config_hash(doc["config"])

    def test_module_error_record(self):
        res = run("field", "info", "--D", "4")
        assert res.exit_code == 1
        rec = json.loads(res.stderr.strip().splitlines()[-1])
        assert set(rec) == {"error", "message"}

    def test_kloosterman_eval(self):
        doc = json.loads(run("kloosterman", "eval", "--D", "1", "--r", "1", "--c", "5").stdout)
        assert doc["result"]["S"]["re"] == pytest.approx(2 + 2 * math.cos(4 * math.pi / 5), abs=1e-12)
        assert doc["result"]["terms"] == 4

    def test_csv_trailer(self):
        res = run("--threads", "1", "kloosterman", "scan", "--D", "5", "--B", "30")
        body, meta = csv_parts(res.stdout)
        assert body[0] == "c,norm_c,S_re,S_im,N_rr,ratio"
        assert len(body) > 5
        assert all(len(row.split(",")) == 6 for row in body)
        assert meta[-1].startswith("# config_hash: ")
        params = json.loads(next(m for m in meta if m.startswith("# params: "))[len("# params: "):])
        assert params["B"] == 30.0
        h = config_hash({"command": "kloosterman scan", "params": params})
        assert meta[-1] == f"# config_hash: {h}"

    def test_threads_byte_identical(self):
        args = ["kloosterman", "scan", "--D", "5", "--q", "[2]", "--B", "120"]
        a = run("--threads", "1", *args).stdout
        b = run("--threads", "2", *args).stdout
        assert a == b

    def test_geometric_threads_byte_identical(self):
        args = ["geometric", "scan", "--D", "1", "--partition", "Q+=1", "--s-grid", "0.4,0.3,0.25,0.2", "--B", "200"]
        a = run("--threads", "1", *args)
        b = run("--threads", "2", *args)
        assert a.exit_code == 0 and a.stdout == b.stdout

    def test_geometric_rejects_E(self):
        res = run("geometric", "scan", "--D", "5", "--partition", "E=1;Q+=2")
        assert res.exit_code == 2

    def test_eta_eval(self):
        doc = json.loads(run("eta", "eval", "--family", "minus", "--s", "1").stdout)
        assert doc["result"]["total"]["re"] == pytest.approx(0.20922, abs=5e-6)

    def test_rayclass_table(self):
        doc = json.loads(run("rayclass", "table", "--D", "5", "--q", "[4]").stdout)
        assert doc["result"]["orthogonality_defect"] <= 1e-12

    def test_lfun_eval(self):
        res = run("lfun", "eval", "--D", "1", "--t-grid", "14.134725")
        body, meta = csv_parts(res.stdout)
        assert body[0] == "t,re,im,abs,log7bound"
        assert len(body) == 2

    def test_lfun_bad_chi(self):
        assert run("lfun", "eval", "--D", "1", "--chi", "3").exit_code == 2

    def test_phi_check(self):
        doc = json.loads(run("phi", "check", "--D", "1", "--B", "2000").stdout)
        assert doc["result"]["difference"] < 1e-3

    def test_density_constants(self):
        doc = json.loads(run("density", "constants", "--D", "5", "--partition", "E=2;Q+=1",
                             "--cube", "2:-2.5,-1.5").stdout)
        assert doc["result"]["value"] == pytest.approx(math.sqrt(5) / math.pi**2 * 1.5, rel=1e-14)
        assert doc["result"]["normalization_factorial"] == 1

    def test_density_endpoint_error(self):
        res = run("density", "constants", "--D", "5", "--partition", "E=2;Q+=1", "--cube", "2:-2,1")
        assert res.exit_code == 1
        assert "b=4" in res.stderr

    def test_density_tauber(self):
        res = run("density", "tauber", "--D", "5", "--partition", "Q+=1;Q-=2")
        body, meta = csv_parts(res.stdout)
        assert body[0] == "X,muX_scaled,target,rel_err"
        assert float(body[-1].split(",")[3]) <= 0.05
        assert any(m.startswith("# provenance: ") for m in meta)

    def test_output_file(self, tmp_path):
        out = tmp_path / "f.json"
        res = run("-o", str(out), "field", "info", "--D", "2")
        assert res.stdout == ""
        assert json.loads(out.read_text())["result"]["D_F"] == 8

    def test_verify_all_single(self):
        res = run("--threads", "1", "verify-all", "--only", "1")
        lines = res.stdout.splitlines()
        assert lines[0].startswith("[PASS] criterion 1:")
        assert lines[-1].startswith("[PASS] criterion 10:")
