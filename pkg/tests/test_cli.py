import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from drivenpair import analytic as an
from drivenpair.cli import main
from drivenpair.hilbert import ModelParams
from drivenpair.experiments import read_csv

GOLDEN = Path(__file__).parent / "golden"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_analytic_run_writes_csv_and_sidecar(tmp_path, capsys):
    cfg = write(tmp_path, "a.cfg", "mode = analytic\nname = pur\nparams.g_over_k = 0.5\nprep = gg\n"
                                   "time.t_end = 10\ntime.n_points = 11\noutputs = purity_whole\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert "wrote" in capsys.readouterr().out
    header, data = read_csv(tmp_path / "out" / "pur.csv")
    assert header == ["kt", "gt", "purity_whole"]
    assert data.shape == (11, 3)
    ref = [an.purities(kt, "gg", ModelParams.from_ratio(0.5))["whole"] for kt in data[:, 0]]
    assert np.array_equal(data[:, 2], ref)
    text = (tmp_path / "out" / "pur.csv").read_text().splitlines()
    assert text[0] == "kt [1],gt [1],purity_whole [1]"
    side = json.loads((tmp_path / "out" / "pur.json").read_text())
    assert {"config", "version", "seed", "truncation", "tables"} <= set(side)
    assert side["config"]["prep.label"] == "gg"


@pytest.mark.parametrize("cfg_name", ["analytic_phi_plus.cfg", "oracle_psi_plus.cfg", "mcwf_small.cfg"])
def test_sidecar_round_trip(tmp_path, cfg_name):
    first, second = tmp_path / "1", tmp_path / "2"
    assert main(["run", str(GOLDEN / cfg_name), "--out", str(first)]) == 0
    stem = cfg_name[:-4]
    assert main(["run", str(first / f"{stem}.json"), "--out", str(second)]) == 0
    assert (first / f"{stem}.csv").read_bytes() == (second / f"{stem}.csv").read_bytes()


def test_invalid_prep_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "bad.cfg", "mode = analytic\nparams.g_over_k = 1\nprep = up\n")
    assert main(["run", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "phi+" in err and "psi-" in err


def test_io_and_numeric_exit_codes(tmp_path):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 4
    cfg = write(tmp_path, "leak.cfg", "mode = oracle\nparams.g_over_k = 2\nprep = gg\nn_max = 4\n"
                                      "oracle.generator = effective_rwa\ntime.t_end = 5\ntime.n_points = 11\n")
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == 3


def test_unknown_figure_exit_code():
    assert main(["figure", "fig11"]) == 2


def test_fig6_columns(tmp_path):
    assert main(["figure", "fig6", "--out", str(tmp_path)]) == 0
    header, data = read_csv(tmp_path / "fig6.csv")
    assert header == ["kt", "P_ee@g/k=0.1", "P_ee@g/k=0.5", "P_ee@g/k=1", "P_ee@g/k=5"]
    assert np.allclose(data[0, 1:], 0.5)


def test_golden_check_passes(capsys):
    assert main(["golden-check", str(GOLDEN)]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 4 and "FAIL" not in out


def test_golden_check_detects_perturbed_coupling(tmp_path):
    d = tmp_path / "golden"
    shutil.copytree(GOLDEN, d)
    p = d / "analytic_gg.cfg"
    p.write_text(p.read_text().replace("params.g_over_k = 0.5", "params.g_over_k = 0.500001"))
    assert main(["golden-check", str(d)]) == 1


def test_golden_check_missing_files(tmp_path):
    assert main(["golden-check", str(tmp_path)]) == 4
    shutil.copy(GOLDEN / "analytic_gg.cfg", tmp_path)
    assert main(["golden-check", str(tmp_path)]) == 4


def test_mcwf_output_independent_of_threads(tmp_path):
    cfg = GOLDEN / "mcwf_small.cfg"
    outs = []
    for threads in ("1", "3"):
        env = {"DRIVENPAIR_THREADS": threads, "PATH": "/usr/bin:/bin"}
        d = tmp_path / threads
        subprocess.run([sys.executable, "-m", "drivenpair", "run", str(cfg), "--out", str(d)],
                       check=True, env=env, capture_output=True)
        outs.append((d / "mcwf_small.csv").read_bytes())
    assert outs[0] == outs[1]


def test_oracle_compare(tmp_path, capsys):
    cfg = write(tmp_path, "c.cfg", "mode = analytic\nparams.g_over_k = 0.5\nprep = phi+\nn_max = 14\n"
                                   "time.t_end = 3\ntime.n_points = 7\n")
    assert main(["oracle-compare", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("PASS")
    cfg = write(tmp_path, "c2.cfg", "mode = analytic\nparams.g_over_k = 0.5\nprep = phi+\nn_max = 14\n"
                                    "time.t_end = 3\ntime.n_points = 7\ncompare.tol = 1e-14\n")
    assert main(["oracle-compare", str(cfg)]) == 1
    fig = write(tmp_path, "f.cfg", "mode = figure\nfigure.id = fig2\n")
    assert main(["oracle-compare", str(fig)]) == 2
