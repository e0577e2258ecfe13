"""Named parameter presets for the experiment harness.

Two coupling regimes ship as presets: ``detail`` keeps regions finely
separated (the model-vs-baseline comparison setting) and ``shape`` uses
roughly 2-3x stronger coupling so large contiguous shapes merge at the
expense of contour fidelity.  ``tuned-thresholds`` carries the hand-tuned
fixed binary thresholds on frequency maps that outperform auto-scaling.
"""

from __future__ import annotations

from .errors import ConfigError
from .models import BzParams, MemsParams, ModelParams, NeuralParams

DETAIL_COUPLING: dict[str, float] = {"neural": 0.02, "bz": 0.1, "mems": 0.05}
SHAPE_COUPLING: dict[str, float] = {"neural": 0.05, "bz": 0.35, "mems": 0.1}
TUNED_THRESHOLDS: dict[str, float] = {"neural": 0.025, "bz": 0.0125,
                                      "mems": 0.02}

PRESET_NAMES = ("neural-default", "bz-default", "mems-default",
                "shape-extraction", "tuned-thresholds")


def default_params(model: str) -> ModelParams:
    """Factory-default parameters for a model name."""
    try:
        return {"neural": NeuralParams, "bz": BzParams,
                "mems": MemsParams}[model]()
    except KeyError:
        raise ConfigError(f"unknown model {model!r}") from None


def preset_settings(name: str) -> dict:
    """Config-key overlay for a named preset.

    ``*-default`` presets pin the model and its detail-regime coupling;
    ``shape-extraction`` switches the coupling table; ``tuned-thresholds``
    switches the comparison harness to fixed per-model thresholds.
    """
    if name in ("neural-default", "bz-default", "mems-default"):
        model = name.split("-")[0]
        return {"model": model, "coupling": DETAIL_COUPLING[model]}
    if name == "shape-extraction":
        return {"coupling_table": SHAPE_COUPLING}
    if name == "tuned-thresholds":
        return {"thresholds": "tuned"}
    raise ConfigError(f"unknown preset {name!r}; known: "
                      + ", ".join(PRESET_NAMES))
