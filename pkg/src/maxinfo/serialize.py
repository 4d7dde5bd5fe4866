"""CSV loaders for joints and kernels, and report writers."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DuplicateEntry, ParseError, ValidationError
from .harness import canonical_json
from .prob import (
    Domain,
    JointPMF,
    MechanismKernel,
    enumerate_datasets,
    is_exact,
    label_text,
)

REPORT_SCHEMA = "maxinfo-report/1"


def _parse_prob(text: str, rational: bool, line: int):
    try:
        value = Fraction(text.strip()) if rational else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad probability {text!r}", line) from exc
    if not rational and not np.isfinite(value):
        raise ParseError(f"non-finite probability {text!r}", line)
    return value


def _read_triples(path, header: tuple[str, str, str], rational: bool) -> list[tuple[str, str, object]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    reader = csv.reader(io.StringIO(text))
    rows, seen = [], {}
    for row in reader:
        line = reader.line_num
        if line == 1:
            if tuple(c.strip() for c in row) != header:
                raise ParseError(f"expected header {','.join(header)}", line)
            continue
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line)
        a, b, p = (c.strip() for c in row)
        if (a, b) in seen:
            raise DuplicateEntry(f"duplicate entry ({a}, {b}), first at line {seen[a, b]}", line)
        seen[a, b] = line
        rows.append((a, b, _parse_prob(p, rational, line)))
    if reader.line_num == 0:
        raise ParseError("empty file", 1)
    return rows


def load_joint_csv(path, rational: bool = False) -> JointPMF:
    """Read a joint from ``x,z,prob`` rows; absent pairs have mass zero."""
    return joint_from_rows(_read_triples(path, ("x", "z", "prob"), rational), rational)


def joint_from_rows(rows, rational: bool = False) -> JointPMF:
    if not rows:
        raise ValidationError("joint has no entries, deficit 1")
    left, right = {}, {}
    for x, z, _ in rows:
        left.setdefault(x, len(left))
        right.setdefault(z, len(right))
    mass = np.full((len(left), len(right)), Fraction(0), dtype=object) if rational else np.zeros((len(left), len(right)))
    for x, z, p in rows:
        mass[left[x], right[z]] = p
    return JointPMF(Domain(tuple(left)), Domain(tuple(right)), mass)


def _fmt_prob(p) -> str:
    return str(p) if isinstance(p, Fraction) else repr(float(p))


def save_joint_csv(joint: JointPMF, path) -> None:
    """Write nonzero entries; floats use shortest round-trip repr."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "z", "prob"])
        for i, j in joint.support():
            writer.writerow([label_text(joint.left.labels[i]), label_text(joint.right.labels[j]), _fmt_prob(joint.mass[i, j])])


def load_kernel_csv(path, marginal: tuple[str, ...] | None = None, rational: bool = False) -> MechanismKernel:
    """Read a kernel from ``x,y,prob`` rows whose inputs are datasets written as strings.

    Each input label is a string of ``n`` one-character records. ``marginal``
    fixes the record alphabet and its order; by default it is the sorted set
    of characters seen. Every dataset of the alphabet must appear.
    """
    rows = _read_triples(path, ("x", "y", "prob"), rational)
    inputs = sorted({x for x, _, _ in rows})
    lengths = {len(x) for x in inputs}
    if len(lengths) != 1:
        raise ValidationError("dataset labels must all have the same length")
    n = lengths.pop()
    alphabet = tuple(marginal) if marginal else tuple(sorted({c for x in inputs for c in x}))
    domain = enumerate_datasets(Domain(alphabet), n)
    expected = {"".join(t) for t in domain.labels}
    if set(inputs) != expected:
        missing = sorted(expected - set(inputs))[:3]
        raise ValidationError(f"kernel must cover all {domain.size} datasets; missing e.g. {missing}")
    outputs = {}
    for _, y, _ in rows:
        outputs.setdefault(y, len(outputs))
    table = np.full((domain.size, len(outputs)), Fraction(0), dtype=object) if rational else np.zeros((domain.size, len(outputs)))
    for x, y, p in rows:
        table[domain.index(tuple(x)), outputs[y]] = p
    return MechanismKernel(domain, Domain(tuple(outputs)), table)


def save_kernel_csv(kernel: MechanismKernel, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "prob"])
        rows = kernel.rows
        for i, x in enumerate(kernel.input_domain.labels):
            for j, y in enumerate(kernel.output_domain.labels):
                if rows[i, j] != 0:
                    writer.writerow([label_text(x), label_text(y), _fmt_prob(rows[i, j])])


def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def render_report(report: dict, fmt: str = "json", rows: list | None = None, columns=None) -> str:
    """Serialize a report; ``csv`` writes ``rows`` if given, else flattened key/value pairs."""
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps({"schema": REPORT_SCHEMA, **report}, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValidationError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows is not None:
        writer.writerow(columns)
        writer.writerows(rows)
    else:
        writer.writerow(["key", "value"])
        for key, value in _flatten(report):
            writer.writerow([key, value if not isinstance(value, (list, dict)) else canonical_json(value)])
    return buf.getvalue()


def _flatten(obj: dict, prefix: str = ""):
    for key in sorted(obj):
        value = obj[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, name + ".")
        else:
            yield name, value


def save_report(report: dict, path, fmt: str = "json", rows=None, columns=None) -> None:
    try:
        Path(path).write_text(render_report(report, fmt, rows, columns))
    except OSError as exc:
        raise ParseError(f"cannot write {path}: {exc.strerror}") from exc


def load_report(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid report JSON: {exc.msg}", exc.lineno) from exc
    if data.get("schema") != REPORT_SCHEMA:
        raise ParseError(f"unsupported report schema {data.get('schema')!r}")
    return data


def exact_or_float(joint: JointPMF) -> str:
    return "rational" if is_exact(joint.mass) else "binary64"
