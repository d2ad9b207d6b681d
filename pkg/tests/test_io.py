import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mottprobe import io as mio
from mottprobe.dynamics import CurrentTrace, SpectrumResult
from mottprobe.meanfield import PhaseDiagramGrid


def _grid(n_mu=4, n_k=3, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.random((n_mu, n_k)) * np.pi
    flags = np.full(psi.shape, "", dtype=object)
    flags[0, 0] = "omega shifted"
    return PhaseDiagramGrid(
        np.linspace(0, 3, n_mu) / 7, np.linspace(0.01, 0.3, n_k) / 3, psi, "josephson", 2, {}, flags
    )


def test_phase_diagram_round_trip_bit_exact(tmp_path):
    grid = _grid()
    path = mio.write_phase_diagram_csv(grid, tmp_path / "phase_diagram.csv")
    back = mio.read_phase_diagram_csv(path)
    assert np.array_equal(back.psi, grid.psi)
    assert np.array_equal(back.mu_over_u, grid.mu_over_u)
    assert np.array_equal(back.kappa_over_u, grid.kappa_over_u)
    assert back.source == "josephson" and back.coordination == 2
    assert back.flags[0, 0] == "omega shifted"


def test_phase_diagram_columns(tmp_path):
    path = mio.write_phase_diagram_csv(_grid(2, 2), tmp_path / "p.csv")
    rows = list(csv.DictReader(open(path)))
    assert list(rows[0]) == mio.PHASE_HEADER
    assert len(rows) == 4
    assert float(rows[1]["zkappa_over_u"]) == pytest.approx(2 * float(rows[1]["kappa_over_u"]))


def test_empty_grid_header_only(tmp_path):
    grid = PhaseDiagramGrid([], [], np.zeros((0, 0)), "auxfield")
    path = mio.write_phase_diagram_csv(grid, tmp_path / "empty.csv")
    assert path.read_text() == ",".join(mio.PHASE_HEADER) + "\n"
    with pytest.raises(ValueError):
        mio.read_phase_diagram_csv(path)


def test_nan_survives_round_trip(tmp_path):
    grid = _grid()
    grid.psi[1, 1] = np.nan
    back = mio.read_phase_diagram_csv(mio.write_phase_diagram_csv(grid, tmp_path / "p.csv"))
    assert np.isnan(back.psi[1, 1])


def test_trace_and_spectrum_csv(tmp_path):
    trace = CurrentTrace(np.arange(4) * 0.1, np.array([0.0, 0.5, -0.25, 1e-17]))
    spec = SpectrumResult(np.array([0.0, 1.0]), np.array([0.0, 2.5]), 1.0)
    t = mio.write_trace_csv(trace, tmp_path / "trace.csv").read_text().splitlines()
    s = mio.write_spectrum_csv(spec, tmp_path / "spectrum.csv").read_text().splitlines()
    assert t[0] == "t,J" and s[0] == "omega,J_omega"
    assert float(t[4].split(",")[1]) == 1e-17
    assert s[2] == "1.0,2.5"


def test_atomic_write_leaves_no_temporaries(tmp_path):
    mio.atomic_write(tmp_path / "a.txt", "x")
    mio.atomic_write(tmp_path / "a.txt", "y")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_text() == "y"


def test_atomic_write_error(tmp_path):
    (tmp_path / "file").write_text("")
    with pytest.raises(OSError):
        mio.atomic_write(tmp_path / "file" / "x.csv", "data")


def test_run_meta_json(tmp_path):
    path = mio.write_run_meta(tmp_path / "run.meta", {"params": {"g": 0.1}}, {"wall_time": 1.5, "x": float("nan")})
    doc = json.loads(path.read_text())
    assert doc["config"]["params"]["g"] == 0.1
    assert doc["versions"]["numpy"] == np.__version__
    assert doc["x"] is None


def test_svg_40x40_valid_and_deterministic(tmp_path):
    grid = _grid(40, 40)
    a = mio.write_heatmap_svg(grid, tmp_path / "a.svg", overlay=_grid(40, 40, seed=1))
    b = mio.write_heatmap_svg(grid, tmp_path / "b.svg", overlay=_grid(40, 40, seed=1))
    root = ET.parse(a).getroot()
    assert root.tag.endswith("svg")
    assert a.read_bytes() == b.read_bytes()
