import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

import pytest

from absforge.app.models import ProposerConfig, RunConfig
from absforge.planning.pddl_core import GpDomain, GpInstance, parse_domain, parse_instance
from absforge.planning.refinement import Abstraction
from absforge.proposer.documents import load_abstraction


DATA_PATH = Path(__file__).resolve().parent.parent / "data"
GRIPPER_PATH = DATA_PATH / "domains" / "gripper"
SPANNER_PATH = DATA_PATH / "domains" / "spanner"
QNP_PATH = DATA_PATH / "qnp"
DOMAINS_PATH = DATA_PATH / "domains"


def gripper_instance_path(name: str) -> Path:
    return GRIPPER_PATH / "instances" / f"{name}.pddl"


def gripper_abstraction_path(name: str) -> Path:
    return GRIPPER_PATH / "abstractions" / f"{name}.json"


def load_gripper_abstraction(dom: GpDomain, name: str) -> Abstraction:
    built = load_abstraction(gripper_abstraction_path(name).read_text(encoding="utf-8"), dom)
    assert isinstance(built, Abstraction), built
    return built


@pytest.fixture(scope="session")
def gripper_domain() -> GpDomain:
    """Parsed Gripper domain."""
    path = GRIPPER_PATH / "domain.pddl"
    return parse_domain(path.read_text(encoding="utf-8"), str(path))


@pytest.fixture(scope="session")
def gripper_instances(gripper_domain) -> Dict[str, GpInstance]:
    """Every Gripper instance by file stem."""
    instances = {}
    for path in sorted((GRIPPER_PATH / "instances").glob("*.pddl")):
        instances[path.stem] = parse_instance(path.read_text(encoding="utf-8"), gripper_domain, str(path))
    return instances


@pytest.fixture
def train_1(gripper_instances) -> GpInstance:
    return gripper_instances["train-1"]


@pytest.fixture
def train_2(gripper_instances) -> GpInstance:
    return gripper_instances["train-2"]


@pytest.fixture
def eval_instances(gripper_instances) -> List[GpInstance]:
    return [inst for name, inst in sorted(gripper_instances.items()) if name.startswith("eval-")]


@pytest.fixture(scope="session")
def reference_abstraction(gripper_domain) -> Abstraction:
    return load_gripper_abstraction(gripper_domain, "reference")


@pytest.fixture
def reference_doc_text() -> str:
    return gripper_abstraction_path("reference").read_text(encoding="utf-8")


@pytest.fixture
def reference_doc_json(reference_doc_text) -> dict:
    return json.loads(reference_doc_text)


@pytest.fixture(scope="session")
def spanner_domain() -> GpDomain:
    path = SPANNER_PATH / "domain.pddl"
    return parse_domain(path.read_text(encoding="utf-8"), str(path))


@pytest.fixture
def spanner_train_1(spanner_domain) -> GpInstance:
    path = SPANNER_PATH / "instances" / "train-1.pddl"
    return parse_instance(path.read_text(encoding="utf-8"), spanner_domain, str(path))


@pytest.fixture
def scripted_run_config(tmp_path) -> RunConfig:
    """Gripper run replaying a broken reply, then the fixed one."""
    return RunConfig(
        domain=str(GRIPPER_PATH / "domain.pddl"),
        training=[str(gripper_instance_path("train-1")), str(gripper_instance_path("train-2"))],
        evaluation=[str(gripper_instance_path(f"eval-0{i}")) for i in (1, 2, 3)],
        proposer=ProposerConfig(
            kind="file",
            label="scripted",
            paths=[
                str(GRIPPER_PATH / "scripts" / "reply-missing-move.md"),
                str(GRIPPER_PATH / "scripts" / "reply-fixed.md"),
            ],
        ),
        max_iterations=10,
        output_dir=str(tmp_path / "runs"),
    )


@pytest.fixture
def gripper_qnp_text() -> str:
    return (QNP_PATH / "gripper.qnp").read_text(encoding="utf-8")


@pytest.fixture
def qnp_text():
    """Reader for the listings under data/qnp."""
    def read(name: str) -> str:
        return (QNP_PATH / f"{name}.qnp").read_text(encoding="utf-8")
    return read


@pytest.fixture
def gripper_abstraction(gripper_domain):
    """Loader for the Gripper abstraction documents by name."""
    def load(name: str) -> Abstraction:
        return load_gripper_abstraction(gripper_domain, name)
    return load


@pytest.fixture
def spanner_abstraction(spanner_domain) -> Abstraction:
    text = (SPANNER_PATH / "abstractions" / "best_effort.json").read_text(encoding="utf-8")
    built = load_abstraction(text, spanner_domain)
    assert isinstance(built, Abstraction), built
    return built


@dataclass
class Benchmark:
    domain: GpDomain
    training: List[GpInstance]
    evaluation: List[GpInstance]
    root: Path

    def abstraction(self, name: str = "reference") -> Abstraction:
        text = (self.root / "abstractions" / f"{name}.json").read_text(encoding="utf-8")
        built = load_abstraction(text, self.domain)
        assert isinstance(built, Abstraction), built
        return built


def load_benchmark(name: str) -> Benchmark:
    root = DOMAINS_PATH / name
    path = root / "domain.pddl"
    dom = parse_domain(path.read_text(encoding="utf-8"), str(path))

    def instances(prefix: str) -> List[GpInstance]:
        return [
            parse_instance(p.read_text(encoding="utf-8"), dom, str(p))
            for p in sorted((root / "instances").glob(f"{prefix}-*.pddl"))
        ]

    return Benchmark(dom, instances("train"), instances("eval"), root)


@pytest.fixture(scope="session")
def benchmark():
    """Loader for the domains under data/domains, cached per name."""
    cache: Dict[str, Benchmark] = {}

    def load(name: str) -> Benchmark:
        if name not in cache:
            cache[name] = load_benchmark(name)
        return cache[name]
    return load
