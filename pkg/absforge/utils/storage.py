import json
import os
import uuid
from datetime import datetime
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import aiofiles

from absforge.app.models import RunConfig, RunRecord
from absforge.config.config import OUTPUT_DIR
from absforge.planning.pddl_core import GpDomain, GpInstance, parse_domain, parse_instance


async def read_text(path: str) -> str:
    async with aiofiles.open(path, "r", encoding="utf-8") as f:
        return await f.read()


async def load_domain(path: str) -> GpDomain:
    return parse_domain(await read_text(path), source=str(path))


async def load_instances(paths: Sequence[str], dom: GpDomain) -> List[GpInstance]:
    return [parse_instance(await read_text(path), dom, source=str(path)) for path in paths]


async def load_run_config(path: str) -> RunConfig:
    return RunConfig.model_validate_json(await read_text(path))


def record_to_json(record: RunRecord) -> str:
    return json.dumps(record.model_dump(mode="json"), ensure_ascii=False, indent=2)


async def save_run_record(record: RunRecord, output_dir: Optional[str] = None) -> Tuple[str, str]:
    """
    Save a run record as JSON in its own run directory.

    Args:
        record: finished (or partial) run record
        output_dir: parent directory, defaults to OUTPUT_DIR

    Returns:
        Tuple containing (run directory, path of the JSON file)
    """
    run_id = str(uuid.uuid4())[:8]
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    mode = "debug" if record.debugging else "nodebug"

    # Directory name: when, which domain, which mode
    run_dir_name = f"{timestamp}_{record.domain}_{mode}_{run_id}"
    run_dir = os.path.join(output_dir or str(OUTPUT_DIR), run_dir_name)
    os.makedirs(run_dir, exist_ok=True)

    json_path = os.path.join(run_dir, f"{record.domain}_{mode}_{run_id}_record.json")
    async with aiofiles.open(json_path, "w", encoding="utf-8") as f:
        await f.write(record_to_json(record))
    return run_dir, json_path


async def load_run_records(paths: Sequence[str]) -> List[RunRecord]:
    """Read records back; directories are searched for ``*_record.json`` files."""
    files: List[Path] = []
    for path in paths:
        p = Path(path)
        files.extend(sorted(p.rglob("*_record.json")) if p.is_dir() else [p])
    return [RunRecord.model_validate_json(await read_text(str(f))) for f in files]


async def save_text(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    async with aiofiles.open(path, "w", encoding="utf-8") as f:
        await f.write(text)
    return path
