"""End-to-end: render every preset from files the simulator actually wrote.

Skipped when the simulator package is absent; the rest of this suite runs
on synthetic inputs only.
"""

import math

import pytest

fermibounce = pytest.importorskip("fermibounce")

from figplots import FigureSpec, render  # noqa: E402

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="module")
def produced(tmp_path_factory):
    """One tiny real run per preset family."""
    from fermibounce.experiments import preset, run_experiment

    dirs = {}
    for name, shrink in (
        ("fig1a", dict(t_final=50 * TWO_PI)),
        ("fig2", dict(t_final=8 * TWO_PI, ensemble_n=60)),
        ("fig3", dict(t_final=8 * TWO_PI, ensemble_n=60)),
        ("fig4", dict(t_final=60 * TWO_PI, ensemble_n=2000)),
        ("fig5", dict(t_final=8 * TWO_PI, ensemble_n=60,
                      sweep_lambdas=[0.3, 0.8])),
    ):
        out = tmp_path_factory.mktemp(name)
        cfg = preset(name, str(out), profile="ci")
        for key, value in shrink.items():
            setattr(cfg, key, value)
        run_experiment(cfg)
        dirs[name] = out
    dirs["fig1b"] = dirs["fig1a"]  # same file contract
    return dirs


@pytest.mark.parametrize("preset_name",
                         ["fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5"])
def test_renders_real_outputs(produced, tmp_path, preset_name):
    out = tmp_path / f"{preset_name}.png"
    render(FigureSpec(preset_name, str(produced[preset_name]), str(out)))
    assert out.stat().st_size > 1000
