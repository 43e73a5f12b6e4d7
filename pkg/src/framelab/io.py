"""File formats: frame CSV, measure-spec JSON, experiment configs, reports.

Floats are written with ``repr``, Python's shortest string that parses
back to the same double, so files round-trip exactly and are identical
across runs and platforms.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FormatError, FrameLabError
from .frame_core import FiniteFrame
from . import measures as M


# ---------------------------------------------------------------------------
# frame CSV


def parse_frame_csv(text: str, source: str = "<string>") -> FiniteFrame:
    """Strict parse of a frame CSV with header ``x1,...,xd``."""
    rows = list(csv.reader(_io.StringIO(text)))
    # tolerate trailing blank lines only
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise FormatError(f"{source}: empty file")
    header = [c.strip() for c in rows[0]]
    d = len(header)
    if header != [f"x{i + 1}" for i in range(d)]:
        raise FormatError(f"{source}:1: header must be x1,...,x{d}, got {','.join(header)}")
    if len(rows) == 1:
        raise FormatError(f"{source}: no vectors after the header")
    out = np.empty((len(rows) - 1, d))
    for k, row in enumerate(rows[1:]):
        line = k + 2
        if len(row) != d:
            raise FormatError(f"{source}:{line}: expected {d} columns, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                val = float(cell)
            except ValueError:
                raise FormatError(f"{source}:{line}: column {j + 1} is not a number: {cell!r}") from None
            if not math.isfinite(val):
                raise FormatError(f"{source}:{line}: column {j + 1} is not finite")
            out[k, j] = val
    return FiniteFrame(out)


def read_frame_csv(path) -> FiniteFrame:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    return parse_frame_csv(text, str(path))


def format_frame_csv(vectors) -> str:
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim == 1:
        v = v.reshape(1, -1)
    lines = [",".join(f"x{i + 1}" for i in range(v.shape[1]))]
    lines += [",".join(repr(float(x)) for x in row) for row in v]
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_frame_csv(path, vectors) -> None:
    write_text(path, format_frame_csv(vectors))


def format_table_csv(columns: list, rows: list) -> str:
    def cell(x):
        if isinstance(x, (bool, np.bool_)):
            return "true" if x else "false"
        if isinstance(x, (float, np.floating)):
            return repr(float(x))
        return str(x)

    out = [",".join(columns)]
    out += [",".join(cell(x) for x in row) for row in rows]
    return "\n".join(out) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        # JSON has no inf/nan; keep the file valid
        return x if math.isfinite(x) else str(x)
    return obj


def format_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    write_text(path, format_json(obj))


# ---------------------------------------------------------------------------
# measure specs


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def _p(value) -> float:
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        raise FormatError(f"p must be a number or \"inf\", got {value!r}")
    return float(value)


def _points(obj: dict, csv_key: str, inline_key: str, base_dir: Path) -> FiniteFrame:
    if csv_key in obj:
        return read_frame_csv(base_dir / obj[csv_key])
    if inline_key in obj:
        return FiniteFrame(obj[inline_key])
    raise FormatError(f"spec needs '{csv_key}' or '{inline_key}'")


def _build_spec(obj, base_dir: Path):
    if not isinstance(obj, dict) or "type" not in obj:
        raise FormatError("a measure spec must be a JSON object with a 'type' key")
    t = obj["type"]
    if t == "uniform_sphere":
        return M.UniformSphere(int(obj["d"]), float(obj.get("r", 1.0)))
    if t == "uniform_lp_sphere":
        return M.UniformLpSphere(int(obj["d"]), _p(obj["p"]), float(obj.get("r", 1.0)))
    if t == "uniform_lp_ball":
        return M.UniformLpBall(int(obj["d"]), _p(obj["p"]), float(obj.get("r", 1.0)))
    if t == "von_mises_mixture":
        return M.VonMisesMixture(_points(obj, "funtf_csv", "funtf", base_dir), float(obj["kappa"]))
    if t == "watson_mixture":
        return M.WatsonMixture(_points(obj, "funtf_csv", "funtf", base_dir), float(obj["kappa"]))
    if t == "bernoulli_hypercube":
        return M.BernoulliHypercube(int(obj["d"]))
    if t == "isotropic_gaussian":
        return M.IsotropicGaussian(int(obj["d"]))
    if t == "discrete_counting":
        w = obj.get("weights")
        return M.DiscreteCounting(_points(obj, "frame_csv", "points", base_dir),
                                  None if w is None else tuple(float(x) for x in w))
    if t == "point_mass":
        return M.point_mass(obj["x"])
    if t == "sign_symmetrized":
        return M.SignSymmetrized(_build_spec(obj["base"], base_dir))
    if t == "group_symmetrized":
        gens = tuple(np.asarray(g, dtype=np.float64) for g in obj["generators"])
        return M.GroupSymmetrized(_build_spec(obj["base"], base_dir), gens)
    raise FormatError(f"unknown measure type {t!r}")


def spec_from_dict(obj, base_dir=".") -> "M.MeasureSpec":
    """Build a measure spec; CSV paths inside resolve against ``base_dir``."""
    try:
        return _build_spec(obj, Path(base_dir))
    except FrameLabError:
        raise
    except KeyError as exc:
        raise FormatError(f"spec is missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad spec: {exc}") from None


def read_spec(path):
    return spec_from_dict(_load_json(path), Path(path).parent)


def spec_to_dict(spec) -> dict:
    """Inverse of :func:`spec_from_dict` with point sets inlined."""
    if isinstance(spec, M.UniformSphere):
        return {"type": "uniform_sphere", "d": spec.d, "r": spec.r}
    if isinstance(spec, (M.UniformLpSphere, M.UniformLpBall)):
        t = "uniform_lp_sphere" if isinstance(spec, M.UniformLpSphere) else "uniform_lp_ball"
        p = "inf" if math.isinf(spec.p) else spec.p
        return {"type": t, "d": spec.d, "p": p, "r": spec.r}
    if isinstance(spec, M.VonMisesMixture):
        return {"type": "von_mises_mixture", "funtf": spec.funtf.vectors.tolist(), "kappa": spec.kappa}
    if isinstance(spec, M.WatsonMixture):
        return {"type": "watson_mixture", "funtf": spec.funtf.vectors.tolist(), "kappa": spec.kappa}
    if isinstance(spec, M.BernoulliHypercube):
        return {"type": "bernoulli_hypercube", "d": spec.d}
    if isinstance(spec, M.IsotropicGaussian):
        return {"type": "isotropic_gaussian", "d": spec.d}
    if isinstance(spec, M.DiscreteCounting):
        out = {"type": "discrete_counting", "points": spec.frame.vectors.tolist()}
        if spec.weights is not None:
            out["weights"] = list(spec.weights)
        return out
    if isinstance(spec, M.SignSymmetrized):
        return {"type": "sign_symmetrized", "base": spec_to_dict(spec.base)}
    if isinstance(spec, M.GroupSymmetrized):
        return {"type": "group_symmetrized", "base": spec_to_dict(spec.base),
                "generators": [g.tolist() for g in spec.generators]}
    raise TypeError(f"cannot serialize {type(spec).__name__}")


# ---------------------------------------------------------------------------
# experiment configs


class ExperimentConfig:
    """Parsed experiment config.

    ``specs`` is None for the DFT-row experiment, which is selected by a
    ``{"type": "dft_rows", "d": d}`` entry in place of the spec list.
    """

    def __init__(self, specs, trials, target, seed, dft_d: Optional[int] = None,
                 mc_budget: int = 100_000):
        self.specs = specs
        self.trials = trials
        self.target = target
        self.seed = seed
        self.dft_d = dft_d
        self.mc_budget = mc_budget

    @property
    def d(self) -> int:
        return self.dft_d if self.specs is None else self.specs[0].dim

    def specs_for(self, n: int) -> list:
        """Spec list of length ``n``; a single or repeated spec is broadcast."""
        if len(self.specs) == n:
            return list(self.specs)
        first = self.specs[0]
        if all(s is first or s == first for s in self.specs):
            return [first] * n
        raise FormatError(f"config lists {len(self.specs)} specs; cannot run with n={n}")


def config_from_dict(obj, base_dir=".") -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise FormatError("experiment config must be a JSON object")
    try:
        trials = int(obj.get("trials", 1000))
        target = obj.get("target", "scaled_identity")
        seed = obj.get("seed")
        seed = None if seed is None else int(seed)
        budget = int(obj.get("mc_budget", 100_000))
        raw = obj["specs"]
        if isinstance(raw, dict) and raw.get("type") == "dft_rows":
            return ExperimentConfig(None, trials, target, seed, int(raw["d"]), budget)
        if isinstance(raw, dict) and "repeat" in raw:
            one = spec_from_dict(raw["spec"], base_dir)
            specs = [one] * int(raw["repeat"])
        elif isinstance(raw, list):
            specs = [spec_from_dict(s, base_dir) for s in raw]
        elif isinstance(raw, dict):
            specs = [spec_from_dict(raw, base_dir)]
        else:
            raise FormatError("'specs' must be a list or an object")
    except FrameLabError:
        raise
    except KeyError as exc:
        raise FormatError(f"config is missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad config: {exc}") from None
    if not specs:
        raise FormatError("config has no specs")
    return ExperimentConfig(specs, trials, target, seed, None, budget)


def read_config(path) -> ExperimentConfig:
    return config_from_dict(_load_json(path), Path(path).parent)


def ensure_parent(path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
