"""Coverage and detected-error tables over run records."""

import csv
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from statistics import mean
from typing import Dict, List, Optional, Sequence, Tuple

from absforge.app.models import RunRecord
from absforge.states.stages import STAGE_GROUPS


logger = logging.getLogger(__name__)

FOOTER = "Single deterministic run per configuration (scripted proposers are not averaged over repeated runs)."


@dataclass
class Table:
    title: str
    header: List[str]
    rows: List[List[str]] = field(default_factory=list)

    def to_text(self) -> str:
        widths = [len(h) for h in self.header]
        for row in self.rows:
            widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
        lines = [self.title, "  ".join(h.ljust(w) for h, w in zip(self.header, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in self.rows]
        return "\n".join(line.rstrip() for line in lines)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buffer.getvalue()


def _column(record: RunRecord) -> Tuple[str, bool]:
    return record.proposer, record.debugging


def _column_name(column: Tuple[str, bool]) -> str:
    label, debugging = column
    return f"{label} ({'debug' if debugging else 'no debug'})"


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def run_coverage(record: RunRecord) -> Optional[float]:
    """Coverage of one run: 0 when nothing was accepted, None when there was nothing to evaluate."""
    if not record.accepted:
        return 0.0
    return record.coverage


def coverage_table(records: Sequence[RunRecord]) -> Table:
    columns = sorted({_column(r) for r in records}, key=lambda c: (c[0], not c[1]))
    domains = sorted({r.domain for r in records})
    cells: Dict[Tuple[str, Tuple[str, bool]], List[float]] = defaultdict(list)
    for r in records:
        value = run_coverage(r)
        if value is not None:
            cells[(r.domain, _column(r))].append(value)

    table = Table("Coverage (solved fraction of evaluation instances)", ["Domain"] + [_column_name(c) for c in columns])
    per_column: Dict[Tuple[str, bool], List[float]] = defaultdict(list)
    for domain in domains:
        row = [domain]
        for column in columns:
            values = cells.get((domain, column))
            value = mean(values) if values else None
            if value is not None:
                per_column[column].append(value)
            row.append(_fmt(value))
        table.rows.append(row)
    if domains:
        table.rows.append(["Mean"] + [_fmt(mean(per_column[c]) if per_column[c] else None) for c in columns])
    return table


def stage_table(records: Sequence[RunRecord]) -> Table:
    """Average number of detected errors per check, per proposer."""
    labels = sorted({r.proposer for r in records if r.debugging})
    table = Table("Average number of detected errors", ["Check"] + labels)
    for group, stages in STAGE_GROUPS.items():
        row = [group]
        for label in labels:
            runs = [r for r in records if r.debugging and r.proposer == label]
            totals = [sum(r.stage_counts.get(stage.value, 0) for stage in stages) for r in runs]
            row.append(f"{mean(totals):.2f}")
        table.rows.append(row)
    return table


def report(records: Sequence[RunRecord]) -> Tuple[Table, Table]:
    if not records:
        logger.warning("No run records given, tables are empty")
    return coverage_table(records), stage_table(records)

