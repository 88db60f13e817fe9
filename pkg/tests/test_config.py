import json

import pytest

from conftest import ABLATION, DEMO
from kwagent.config import load_run_config
from kwagent.domain import VariantKind
from kwagent.errors import ValidationError
from kwagent.evaluation import read_generated


def write(tmp_path, text):
    (tmp_path / "d.csv").write_text((ABLATION / "dataset.csv").read_text())
    path = tmp_path / "run.ini"
    path.write_text(text)
    return path


def test_demo_config_resolves_paths():
    run = load_run_config(DEMO / "demo.ini")
    assert run.dataset == (DEMO / "dataset.csv").resolve()
    assert run.model.kind == "mock" and run.hermetic
    assert run.campaign.per_step_n == 18 and run.campaign.retry_limit == 0


def test_fixed_ratio_key(tmp_path):
    run = load_run_config(write(tmp_path, "product = x\ndataset = d.csv\nvariant = fixed\nratio = 0.3\n[tools]\nmodel = catalog:d.csv\nsearch = fixture:d.csv\n"))
    assert run.campaign.variant.kind is VariantKind.FIXED_GROWTH and run.campaign.variant.ratio == 0.3


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("product = x\ndataset = d.csv\n[extra]\na = 1\n", "extra"),
        ("product = x\ndataset = d.csv\nseed = many\n", "seed"),
        ("product = x\ndataset = d.csv\n[tools]\nmodel = remote\n", "chat_url"),
        ("product = x\ndataset = d.csv\n[tools]\nmodel = mock:nothing.json\n", "tools.model"),
        ("product = x\ndataset = d.csv\nkpi_noise = -1\n[tools]\nmodel = catalog:d.csv\nsearch = fixture:d.csv\n", "kpi_noise"),
        ("product = x\ndataset = d.csv\nkpi_metric = likes\n", "kpi_metric"),
    ],
)
def test_bad_configs(tmp_path, text, fragment):
    with pytest.raises(ValidationError, match=fragment):
        load_run_config(write(tmp_path, text))


def test_read_generated_forms(tmp_path):
    obj = tmp_path / "m.json"
    obj.write_text(json.dumps({"A": ["x", " y "], "B": ["z"]}))
    assert read_generated(obj) == {"A": ["x", "y"], "B": ["z"]}
    arr = tmp_path / "planner.json"
    arr.write_text(json.dumps(["x"]))
    assert read_generated(arr) == {"planner": ["x"]}
    txt = tmp_path / "agent.txt"
    txt.write_text("a\n\n b \n")
    assert read_generated(txt) == {"agent": ["a", "b"]}
    bad = tmp_path / "bad.json"
    bad.write_text('{"A": [1]}')
    with pytest.raises(ValidationError):
        read_generated(bad)
