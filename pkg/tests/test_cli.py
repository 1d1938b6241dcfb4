import subprocess
import sys

import pytest

from sailprice.cli import main
from sailprice.ingest import CSV_COLUMNS, load_csv


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    spec = d / "spec.txt"
    spec.write_text("n_rows=400\nnoise_pct=5\nregion.europe=17809.42\nregion.usa=117553.40\n"
                    "region.hong_kong=16804.39\nregion.caribbean=0\n", encoding="utf-8")
    out = d / "synthetic.csv"
    assert main(["synth", "--spec", str(spec), "--output", str(out)]) == 0
    return out


def _files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_synth_writes_loadable_csv(synth_csv):
    records, report = load_csv(synth_csv)
    assert len(records) == 400 and report.dropped == 0
    assert synth_csv.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_clean_reports_counts(tmp_path, synth_csv, capsys):
    lines = synth_csv.read_text().splitlines()
    lines.append(lines[1].replace("syn-000000", "dup").replace(",europe,", ",,")
                 .replace(",usa,", ",,").replace(",caribbean,", ",,").replace(",hong_kong,", ",,"))
    src = tmp_path / "dirty.csv"
    src.write_text("\n".join(lines) + "\n")
    assert main(["clean", "--input", str(src), "--output", str(tmp_path / "c.csv")]) == 0
    out = capsys.readouterr().out
    assert "rows_in=401" in out and "dropped_missing_region=1" in out and "rows_out=400" in out


@pytest.mark.parametrize("family", ["ols", "gd", "adadelta", "gbr"])
def test_fit_outputs(tmp_path, synth_csv, family):
    args = ["fit", "--input", str(synth_csv), "--model", family, "--output-dir", str(tmp_path),
            "--regions", "four"]
    if family == "gbr":
        args += ["--config", str(_config(tmp_path, "gbr.n_iters=30"))]
    assert main(args) == 0
    names = set(_files(tmp_path))
    assert {f"model_{family}.txt", f"metrics_{family}.csv", f"residuals_{family}.svg"} <= names
    if family != "ols":
        assert f"loss_trace_{family}.csv" in names


def _config(tmp_path, text):
    path = tmp_path / "cfg.txt"
    path.write_text(text + "\n")
    return path


def test_compare_and_report(tmp_path, synth_csv, capsys):
    cfg = _config(tmp_path, "gbr.n_iters=40\nseed=7")
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(cfg), "--input", str(synth_csv),
                 "--output-dir", str(out), "--regions", "four"]) == 0
    assert {"comparison.csv", "comparison.md", "swap.csv"} <= set(_files(out))
    assert "relative MSE gap" in capsys.readouterr().out
    rep = tmp_path / "rep"
    assert main(["report", "--input", str(synth_csv), "--output-dir", str(rep),
                 "--sample-size", "50"]) == 0
    files = _files(rep)
    assert {"report.md", "correlations.csv", "regional_effects.csv", "counterfactual.csv",
            "fig_length_ft.svg", "fig_hull.svg", "fig_hk_monohull.svg"} <= set(files)
    assert len(files["counterfactual.csv"].decode().splitlines()) == 51
    assert "## Hong Kong" in files["report.md"].decode()


def test_exit_codes(tmp_path, synth_csv, capsys):
    assert main(["fit", "--input", str(tmp_path / "missing.csv")]) == 1
    header_only = tmp_path / "empty.csv"
    header_only.write_text(",".join(CSV_COLUMNS) + "\n")
    assert main(["fit", "--input", str(header_only)]) == 2
    # Hong Kong rows cannot be encoded by the three-region scheme
    assert main(["report", "--input", str(synth_csv), "--regions", "three",
                 "--output-dir", str(tmp_path / "r")]) == 2
    assert main(["fit", "--input", str(synth_csv), "--config", str(_config(tmp_path, "bogus=1"))]) == 64
    with pytest.raises(SystemExit) as info:
        main(["fit", "--model", "svm"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 64
    # gradient descent on raw dollar-scale features is refused
    assert main(["fit", "--input", str(synth_csv), "--model", "gd", "--no-standardize",
                 "--output-dir", str(tmp_path / "f")]) == 64


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sailprice", "synth", "--output",
                           str(tmp_path / "s.csv")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "s.csv").is_file()


@pytest.fixture(scope="module")
def noise_free_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("clean")
    spec = d / "spec.txt"
    spec.write_text("n_rows=300\nregion.caribbean=0\nregion.europe=1000\nregion.usa=5000\n"
                    "region.hong_kong=-2000\n", encoding="utf-8")
    out = d / "synthetic.csv"
    assert main(["synth", "--spec", str(spec), "--output", str(out)]) == 0
    return out


def _csv_rows(path):
    import csv

    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_clean_file_passes_through(tmp_path, noise_free_csv, capsys):
    out = tmp_path / "c.csv"
    assert main(["clean", "--input", str(noise_free_csv), "--output", str(out)]) == 0
    text = capsys.readouterr().out
    assert "dropped_missing_region=0" in text and "dropped_malformed=0" in text
    assert out.read_bytes() == noise_free_csv.read_bytes()


def test_three_bad_rows_dropped(tmp_path, noise_free_csv, capsys):
    lines = noise_free_csv.read_text().splitlines()
    lines[1] = lines[1].replace(",europe,", ",,").replace(",usa,", ",,").replace(
        ",caribbean,", ",,").replace(",hong_kong,", ",,")
    lines[2] = lines[2].rsplit(",", 1)[0] + ",NA"
    lines[3] = lines[3].rsplit(",", 1)[0] + ",12k"
    src = tmp_path / "bad.csv"
    src.write_text("\n".join(lines) + "\n")
    assert main(["clean", "--input", str(src), "--output", str(tmp_path / "c.csv")]) == 0
    assert "rows_out=297" in capsys.readouterr().out


def test_ols_fit_on_noise_free_data(tmp_path, noise_free_csv):
    assert main(["fit", "--input", str(noise_free_csv), "--model", "ols", "--regions", "four",
                 "--output-dir", str(tmp_path)]) == 0
    test_row = [r for r in _csv_rows(tmp_path / "metrics_ols.csv") if r["split"] == "A->B"][0]
    prices = [float(r["listing_price"]) for r in _csv_rows(noise_free_csv)]
    mean_y = sum(prices) / len(prices)
    assert float(test_row["mse"]) < 1e-6 * mean_y ** 2


def test_gbr_default_trace_non_increasing(tmp_path, noise_free_csv):
    assert main(["fit", "--input", str(noise_free_csv), "--model", "gbr",
                 "--output-dir", str(tmp_path)]) == 0
    losses = [float(r["loss"]) for r in _csv_rows(tmp_path / "loss_trace_gbr.csv")]
    assert len(losses) > 1
    assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))


def test_single_family_compare(tmp_path, noise_free_csv):
    assert main(["compare", "--input", str(noise_free_csv), "--model", "ols",
                 "--output-dir", str(tmp_path)]) == 0
    assert len(_csv_rows(tmp_path / "comparison.csv")) == 1
    assert len(_csv_rows(tmp_path / "swap.csv")) == 1


def test_report_effects_table_and_links(tmp_path, noise_free_csv):
    import re

    assert main(["report", "--input", str(noise_free_csv), "--output-dir", str(tmp_path),
                 "--sample-size", "30"]) == 0
    effects = _csv_rows(tmp_path / "regional_effects.csv")
    assert [r["region"] for r in effects] == ["caribbean", "europe", "usa", "hong_kong"]
    assert float(effects[0]["effect_usd"]) == 0.0
    assert float(effects[2]["effect_usd"]) == pytest.approx(5000.0, rel=1e-6)
    report = (tmp_path / "report.md").read_text()
    links = re.findall(r"\]\(([^)]+)\)", report)
    assert links and all((tmp_path / link).is_file() for link in links)
