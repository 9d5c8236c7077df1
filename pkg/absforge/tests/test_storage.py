import json
import os
import re

import pytest

from absforge.app.errors import PddlError
from absforge.app.models import IterationRecord, RunRecord
from absforge.states.stages import DebugStage
from absforge.utils.storage import (
    load_domain,
    load_instances,
    load_run_config,
    load_run_records,
    record_to_json,
    save_run_record,
    save_text,
)


def sample_record(debugging: bool = True) -> RunRecord:
    record = RunRecord(domain="gripper", proposer="scripted", debugging=debugging, accepted=True,
                       accepted_iteration=2, coverage=0.5)
    record.iterations.append(IterationRecord(iteration=1, stage=DebugStage.ASC_UNSOLVABLE))
    record.iterations.append(IterationRecord(iteration=2, accepted=True))
    record.count_stage(DebugStage.ASC_UNSOLVABLE)
    return record


@pytest.mark.asyncio
async def test_save_and_load_record(tmp_path):
    record = sample_record()
    run_dir, json_path = await save_run_record(record, str(tmp_path))

    assert re.fullmatch(r"\d{8}_\d{6}_gripper_debug_[0-9a-f]{8}", os.path.basename(run_dir))
    assert json_path.startswith(run_dir)
    assert json_path.endswith("_record.json")

    loaded = await load_run_records([str(tmp_path)])
    assert loaded == [record]
    assert loaded[0].iterations[0].stage == DebugStage.ASC_UNSOLVABLE


@pytest.mark.asyncio
async def test_no_debug_runs_are_named_apart(tmp_path):
    run_dir, _ = await save_run_record(sample_record(debugging=False), str(tmp_path))
    assert "_gripper_nodebug_" in os.path.basename(run_dir)


def test_record_json_is_stable():
    text = record_to_json(sample_record())
    assert text == record_to_json(sample_record())
    data = json.loads(text)
    assert data["stage_counts"]["ASC_UNSOLVABLE"] == 1
    assert data["iterations"][0]["stage"] == "ASC_UNSOLVABLE"


@pytest.mark.asyncio
async def test_load_run_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "domain": "domain.pddl",
        "training": ["train-1.pddl"],
        "proposer": {"kind": "file", "paths": ["reply.md"]},
        "max_iterations": 3,
    }), encoding="utf-8")
    cfg = await load_run_config(str(path))
    assert cfg.max_iterations == 3
    assert cfg.proposer.paths == ["reply.md"]
    assert cfg.debugging


@pytest.mark.asyncio
async def test_load_domain_and_instances(scripted_run_config):
    dom = await load_domain(scripted_run_config.domain)
    insts = await load_instances(scripted_run_config.training, dom)
    assert dom.name == "gripper"
    assert [inst.name for inst in insts] == ["gripper-train-1", "gripper-train-2"]


@pytest.mark.asyncio
async def test_parse_errors_name_the_file(tmp_path, gripper_domain):
    bad = tmp_path / "broken.pddl"
    bad.write_text("(define (problem p) (:domain gripper) (:objects r1 - room", encoding="utf-8")
    with pytest.raises(PddlError) as exc:
        await load_instances([str(bad)], gripper_domain)
    assert str(bad) in str(exc.value)


@pytest.mark.asyncio
async def test_save_text_creates_directories(tmp_path):
    path = await save_text(str(tmp_path / "tables" / "coverage.csv"), "Domain\n")
    assert open(path, encoding="utf-8").read() == "Domain\n"
