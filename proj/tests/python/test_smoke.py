import os
import subprocess
from pathlib import Path

import pytest

import hpcserve

ROOT = Path(os.environ.get("HPCSERVE_SOURCE_DIR", Path(__file__).resolve().parents[2]))
CONFIGS = ROOT / "configs"


@pytest.fixture(scope="module")
def catalog():
    return hpcserve.load_catalog(CONFIGS / "catalog.yaml")


@pytest.fixture(scope="module")
def site():
    return hpcserve.load_site_profile(CONFIGS / "sites" / "default.yaml")


@pytest.fixture(scope="module")
def hops():
    return hpcserve.load_platform_profile(CONFIGS / "platforms" / "hops.yaml")


def test_plan_scout_on_hops(catalog, site, hops):
    spec = hpcserve.resolve_spec(CONFIGS / "specs" / "scout.yaml", catalog)
    p = hpcserve.plan(spec, catalog, hops, site)
    assert p.feasible
    assert (p.tensor_parallel_size, p.pipeline_parallel_size) == (4, 1)
    assert p.weight_shard_per_gpu_gib == pytest.approx(54)


def test_render_podman_and_apptainer(catalog, site, hops):
    spec = hpcserve.resolve_spec(CONFIGS / "specs" / "scout.yaml", catalog)
    p = hpcserve.plan(spec, catalog, hops, site)
    podman = hpcserve.render_deploy(spec, p, site, catalog, "podman")
    apptainer = hpcserve.render_deploy(spec, p, site, catalog, "apptainer")
    assert podman.startswith("podman run")
    assert apptainer.startswith("apptainer exec")
    assert "--tensor_parallel_size=4" in podman and "--tensor_parallel_size=4" in apptainer


def test_overrides_and_errors(catalog, hops, site):
    spec = hpcserve.resolve_spec(CONFIGS / "specs" / "scout.yaml", catalog, ["tensor_parallel_size=8"])
    p = hpcserve.plan(spec, catalog, hops, site)
    assert not p.feasible
    with pytest.raises(hpcserve.Error) as info:
        hpcserve.resolve_spec(CONFIGS / "specs" / "scout.yaml", catalog, ["model=nobody/nothing"])
    assert info.value.kind == "UnknownModel"
    assert info.value.exit_code == 2


def test_sweep_and_report():
    assert hpcserve.sweep_concurrencies(1, 1024) == [2**k for k in range(11)]
    with pytest.raises(hpcserve.Error):
        hpcserve.sweep_concurrencies(8, 4)

    def series(label, b1, peak):
        s = hpcserve.BenchSeries()
        s.label = label
        pts = []
        for c, t in ((1, b1), (1024, peak)):
            pt = hpcserve.BenchPoint()
            pt.concurrency = c
            pt.output_token_throughput = t
            pts.append(pt)
        s.points = pts
        return s

    a, b = series("hops", 103, 4313), series("eldorado", 48, 1899)
    c = hpcserve.compare(a, b)
    assert c.batch1_ratio == pytest.approx(103 / 48, abs=1e-12)
    assert c.peak_ratio == pytest.approx(4313 / 1899, abs=1e-12)
    text = hpcserve.emit_plot_data(a)
    assert hpcserve.emit_plot_data(hpcserve.parse_plot_data(text)) == text
    assert hpcserve.parse_series(a.to_yaml()) == a


def test_parse_bench_output():
    raw = (ROOT / "tests" / "fixtures" / "vllm_summary.txt").read_text()
    pt = hpcserve.parse_bench_output(raw)
    assert pt.concurrency == 16
    assert pt.output_token_throughput == pytest.approx(984.77)


def test_cli_in_process_and_binary():
    args = ["plan", "--catalog", str(CONFIGS / "catalog.yaml"), "--spec", str(CONFIGS / "specs" / "llama-405b.yaml"),
            "--platform", str(CONFIGS / "platforms" / "hops.yaml")]
    code, out, err = hpcserve.main(args)
    assert code == 0, err
    assert "tp=4 pp=4 gpus=16" in out
    binary = os.environ.get("HPCSERVE_BIN")
    if binary:
        proc = subprocess.run([binary, *args], capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert proc.stdout == out
