import json
import math

import numpy as np
import pytest

from framelab import io as fio
from framelab.errors import FormatError, InvalidSpecError
from framelab.measures import (
    GroupSymmetrized,
    SignSymmetrized,
    UniformLpBall,
    UniformSphere,
    VonMisesMixture,
)


def test_frame_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    v = rng.standard_normal((7, 3)) * 10.0 ** rng.integers(-8, 8, (7, 3))
    path = tmp_path / "f.csv"
    fio.write_frame_csv(path, v)
    assert path.read_text().splitlines()[0] == "x1,x2,x3"
    back = fio.read_frame_csv(path).vectors
    assert back.tobytes() == v.tobytes()


@pytest.mark.parametrize("text,where", [
    ("", "empty"),
    ("a,b\n1,2\n", ":1:"),
    ("x1,x2\n", "no vectors"),
    ("x1,x2\n1,2\n3\n", ":3:"),
    ("x1,x2\n1,zz\n", ":2:"),
    ("x1,x2\n1,nan\n", ":2:"),
])
def test_frame_csv_errors(text, where):
    with pytest.raises(FormatError, match=where):
        fio.parse_frame_csv(text)


def test_spec_parsing(tmp_path, mb3):
    fio.write_frame_csv(tmp_path / "mb3.csv", mb3.vectors)
    (tmp_path / "vm.json").write_text(json.dumps(
        {"type": "von_mises_mixture", "funtf_csv": "mb3.csv", "kappa": 2.0}))
    spec = fio.read_spec(tmp_path / "vm.json")
    assert isinstance(spec, VonMisesMixture) and spec.kappa == 2.0
    ball = fio.spec_from_dict({"type": "uniform_lp_ball", "d": 3, "p": "inf"})
    assert ball == UniformLpBall(3, math.inf)
    g = fio.spec_from_dict({"type": "group_symmetrized", "base": {"type": "point_mass", "x": [1, 0]},
                            "generators": [[[0, -1], [1, 0]]]})
    assert isinstance(g, GroupSymmetrized) and len(g.group) == 4


@pytest.mark.parametrize("spec", [
    UniformSphere(3, 2.0),
    UniformLpBall(2, math.inf),
    SignSymmetrized(UniformSphere(2)),
])
def test_spec_round_trip(spec):
    assert fio.spec_from_dict(json.loads(json.dumps(fio.spec_to_dict(spec)))) == spec


def test_spec_errors(tmp_path):
    with pytest.raises(FormatError):
        fio.spec_from_dict({"d": 3})
    with pytest.raises(FormatError):
        fio.spec_from_dict({"type": "nope"})
    with pytest.raises(FormatError):
        fio.spec_from_dict({"type": "uniform_sphere"})
    with pytest.raises(InvalidSpecError):
        fio.spec_from_dict({"type": "von_mises_mixture", "funtf": [[1, 0], [1, 0]], "kappa": 1})
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(FormatError, match=":1:"):
        fio.read_spec(tmp_path / "bad.json")


def test_config_parsing():
    cfg = fio.config_from_dict({"specs": {"repeat": 4, "spec": {"type": "uniform_sphere", "d": 2}},
                                "trials": 10, "seed": 3})
    assert len(cfg.specs) == 4 and cfg.seed == 3 and len(cfg.specs_for(9)) == 9
    dft = fio.config_from_dict({"specs": {"type": "dft_rows", "d": 4}})
    assert dft.specs is None and dft.d == 4
    mixed = fio.config_from_dict({"specs": [{"type": "uniform_sphere", "d": 2},
                                            {"type": "isotropic_gaussian", "d": 2}]})
    with pytest.raises(FormatError):
        mixed.specs_for(5)


def test_json_is_deterministic():
    obj = {"b": np.float64(0.1), "a": [np.int64(3), np.bool_(True)], "c": float("inf")}
    text = fio.format_json(obj)
    assert text == fio.format_json(obj)
    assert json.loads(text) == {"a": [3, True], "b": 0.1, "c": "inf"}
