"""Figure rendering: series grouping, determinism, empty input."""

from wslab.harness import CSV_COLUMNS, ExperimentConfig, parse_omega, run_sweep
from wslab.plotting import plot_steps, plot_success_rates


def sweep_csv(tmp_path):
    cfg = ExperimentConfig(k=3, n_values=[10, 12], alphas=[2.0, 3.0],
                           omega=parse_omega("linear:40"), trials=4,
                           master_seed=2)
    path = tmp_path / "rows.csv"
    run_sweep(cfg, path)
    return path


def test_success_plot_series_and_determinism(tmp_path):
    csv_path = sweep_csv(tmp_path)
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    series = plot_success_rates(csv_path, a, title="demo")
    plot_success_rates(csv_path, b, title="demo")
    assert a.read_bytes() == b.read_bytes()
    assert set(series) == {(3, 10), (3, 12)}
    alphas, rates = series[(3, 10)]
    assert alphas == [2.0, 3.0]
    assert all(0.0 <= r <= 1.0 for r in rates)


def test_steps_plot(tmp_path):
    csv_path = sweep_csv(tmp_path)
    fig = tmp_path / "steps.svg"
    series = plot_steps(csv_path, fig)
    assert fig.exists()
    assert set(series) <= {(3, 10), (3, 12)}


def test_empty_csv_renders_empty_axes(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(CSV_COLUMNS) + "\n")
    fig = tmp_path / "empty.svg"
    series = plot_success_rates(empty, fig)
    assert series == {}
    assert fig.exists() and fig.stat().st_size > 0
