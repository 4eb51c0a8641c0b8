import json
import os

import pytest

from wigring.cli import main
from wigring.grids import read_field


def files_in(d):
    return sorted(os.listdir(d))


class TestFieldCommands:
    def test_wigner_dump_and_figure(self, tmp_path, capsys):
        out = str(tmp_path)
        main(["wigner", "--n", "4", "--nr", "40", "--ntheta", "32",
              "--outdir", out])
        names = files_in(out)
        assert "wigner_exact_n4.txt" in names
        assert "wigner_semi_n4.txt" in names
        assert "wigner_exact_n4.png" in names
        header, data = read_field(os.path.join(out, "wigner_exact_n4.txt"))
        assert data.shape[1] == 3

    def test_moyal_dump_complex_columns(self, tmp_path):
        out = str(tmp_path)
        main(["moyal", "--m", "6", "--n", "3", "--nr", "30", "--ntheta", "32",
              "--outdir", out, "--no-figures"])
        header, data = read_field(os.path.join(out, "moyal_exact_6_3.txt"))
        assert data.shape[1] == 4

    def test_compare_reports_error_stats(self, tmp_path, capsys):
        out = str(tmp_path)
        main(["compare", "--m", "14", "--n", "10", "--nr", "60",
              "--outdir", out, "--no-figures"])
        captured = capsys.readouterr().out
        assert "mid-ring relative L2 error" in captured
        rel = float(captured.split("mid-ring relative L2 error:")[1].split()[0])
        assert rel < 0.05


class TestEvolveCommands:
    def test_evolve_prints_all_channels(self, tmp_path, capsys):
        main(["evolve", "--m", "8", "--n", "5", "--eps", "1e-3",
              "--methods", "exact,semiclassical"])
        out = capsys.readouterr().out
        assert "[exact]" in out and "[semiclassical]" in out

    def test_deltaw_writes_field_and_summary(self, tmp_path, capsys):
        out = str(tmp_path)
        main(["deltaw", "--m", "8", "--n", "5", "--kind", "cubic",
              "--eps", "2e-2", "--outdir", out])
        printed = capsys.readouterr().out
        assert "deltaw_semiclassical.txt" in printed
        assert os.path.exists(os.path.join(out, "deltaw_semiclassical.png"))
        summary = json.loads(printed[printed.index("{"):printed.rindex("}") + 1])
        assert summary["method"] == "semiclassical"
        assert "status" in summary


class TestAiryCheck:
    def test_default_table_and_csv(self, tmp_path, capsys):
        out = str(tmp_path)
        main(["airy-check", "--hbars", "0.05,0.02", "--outdir", out])
        printed = capsys.readouterr().out
        assert "rel_err" in printed
        assert os.path.exists(os.path.join(out, "airy_check.csv"))
        assert os.path.exists(os.path.join(out, "airy_check.png"))

    def test_fixed_y_regime_is_accurate(self, tmp_path, capsys):
        out = str(tmp_path)
        main(["airy-check", "--hbars", "0.05,0.01", "--fixed-y", "1.0",
              "--outdir", out, "--no-figures"])
        lines = [ln for ln in capsys.readouterr().out.splitlines()
                 if ln and ln[0].isdigit()]
        errs = [float(ln.split()[-1]) for ln in lines]
        assert errs[0] < 0.05 and errs[1] < errs[0]


class TestSweepAndReport:
    def test_end_to_end(self, tmp_path, capsys):
        outdir = str(tmp_path / "scan")
        config = {
            "mode": "fixed_quanta", "m": 8, "n": 5,
            "hbar_list": [1.0], "eps_list": [1e-3],
            "kinds": ["cubic"], "methods": ["semiclassical"],
            "radial_panels": 10, "gauss_order": 8, "angular_samples": 32,
            "max_refinements": 2, "x1_panels": 8, "x1_order": 6,
        }
        cfg_path = str(tmp_path / "config.json")
        with open(cfg_path, "w") as fh:
            json.dump(config, fh)
        main(["sweep", "--config", cfg_path, "--outdir", outdir])
        assert os.path.exists(os.path.join(outdir, "sweep.csv"))
        assert os.path.exists(os.path.join(outdir, "sweep.json"))
        assert os.path.exists(os.path.join(outdir, "records.jsonl"))
        capsys.readouterr()
        report_dir = str(tmp_path / "report")
        main(["report", "--records", os.path.join(outdir, "records.jsonl"),
              "--outdir", report_dir])
        printed = capsys.readouterr().out
        assert "converged_fraction" in printed
        assert os.path.exists(os.path.join(report_dir, "report.csv"))
        assert os.path.exists(os.path.join(report_dir, "report_convergence.png"))

    def test_sweep_requires_outdir(self):
        with pytest.raises(SystemExit):
            main(["sweep"])
