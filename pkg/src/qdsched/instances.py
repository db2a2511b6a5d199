"""RCPSP instance model and parsers for the PSPLib and Patterson text formats.

An instance is a project of M activities (activity 0 is the dummy source,
activity M-1 the dummy sink), K renewable resources with per-period
capacities, fixed integer durations and per-resource requirements, and a
precedence DAG given as immediate-successor lists.
"""
from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass
from functools import cached_property

log = logging.getLogger(__name__)


class ParseError(ValueError):
    """Malformed instance or metadata text; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Instance:
    """An immutable single-mode RCPSP project.

    Activities are indexed 0..M-1 internally; file formats use 1-based IDs.
    Index 0 is the dummy source and M-1 the dummy sink, both with zero
    duration and zero requirements.
    """

    id: str
    durations: tuple[int, ...]
    requirements: tuple[tuple[int, ...], ...]  # M x K
    capacities: tuple[int, ...]  # K
    successors: tuple[tuple[int, ...], ...]  # immediate, 0-based
    horizon: int

    @property
    def num_activities(self) -> int:
        return len(self.durations)

    @property
    def num_real_activities(self) -> int:
        """Activity count excluding the two dummies (what benchmark names count)."""
        return len(self.durations) - 2

    @property
    def num_resources(self) -> int:
        return len(self.capacities)

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return len(self.durations) - 1

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        preds: list[list[int]] = [[] for _ in range(self.num_activities)]
        for j, succs in enumerate(self.successors):
            for s in succs:
                preds[s].append(j)
        return tuple(tuple(p) for p in preds)

    def activity_id(self, index: int) -> int:
        """1-based ID as used in benchmark files and tie-breaking reports."""
        return index + 1


def topological_order(instance: Instance) -> tuple[int, ...]:
    """Kahn's algorithm; raises ParseError if the precedence graph has a cycle."""
    m = instance.num_activities
    indeg = [len(p) for p in instance.predecessors]
    queue = [j for j in range(m) if indeg[j] == 0]
    order: list[int] = []
    while queue:
        j = queue.pop()
        order.append(j)
        for s in instance.successors[j]:
            indeg[s] -= 1
            if indeg[s] == 0:
                queue.append(s)
    if len(order) != m:
        raise ParseError(f"instance {instance.id}: precedence graph contains a cycle")
    return tuple(order)


def validate_instance(instance: Instance) -> Instance:
    """Check the structural invariants every parsed instance must satisfy."""
    m = instance.num_activities
    k = instance.num_resources
    if m < 3:
        raise ParseError(f"instance {instance.id}: needs at least one real activity")
    if len(instance.requirements) != m or len(instance.successors) != m:
        raise ParseError(f"instance {instance.id}: inconsistent activity counts")
    if any(len(r) != k for r in instance.requirements):
        raise ParseError(f"instance {instance.id}: requirement row length != {k}")
    if any(c <= 0 for c in instance.capacities):
        raise ParseError(f"instance {instance.id}: capacities must be positive")
    if any(d < 0 for d in instance.durations):
        raise ParseError(f"instance {instance.id}: negative duration")
    for j, succs in enumerate(instance.successors):
        for s in succs:
            if not 0 <= s < m:
                raise ParseError(
                    f"instance {instance.id}: successor {s + 1} of activity "
                    f"{j + 1} out of range 1..{m}"
                )
    for j, row in enumerate(instance.requirements):
        for res, (need, cap) in enumerate(zip(row, instance.capacities)):
            if need < 0:
                raise ParseError(f"instance {instance.id}: negative requirement")
            if need > cap:
                raise ParseError(
                    f"instance {instance.id}: activity {j + 1} requires {need} of "
                    f"resource {res + 1} but only {cap} available"
                )
    preds = instance.predecessors
    sources = [j for j in range(m) if not preds[j]]
    sinks = [j for j in range(m) if not instance.successors[j]]
    if sources != [0]:
        raise ParseError(f"instance {instance.id}: expected unique source at ID 1")
    if sinks != [m - 1]:
        raise ParseError(f"instance {instance.id}: expected unique sink at ID {m}")
    for dummy in (0, m - 1):
        if instance.durations[dummy] != 0 or any(instance.requirements[dummy]):
            raise ParseError(
                f"instance {instance.id}: dummy activity {dummy + 1} must have "
                "zero duration and zero requirements"
            )
    if not any(instance.durations):
        raise ParseError(f"instance {instance.id}: all durations are zero")
    topological_order(instance)
    return instance


# ---------------------------------------------------------------------------
# PSPLib single-mode (.sm) format
# ---------------------------------------------------------------------------

def parse_psplib(text: str, instance_id: str = "") -> Instance:
    """Parse a single-mode PSPLib instance file."""
    lines = text.splitlines()

    def find(predicate, what, start=0):
        for i in range(start, len(lines)):
            if predicate(lines[i]):
                return i
        raise ParseError(f"missing {what} section", line=len(lines))

    def ints(i):
        try:
            return [int(tok) for tok in lines[i].split()]
        except ValueError as exc:
            raise ParseError(f"expected integers, got {lines[i]!r}", line=i + 1) from exc

    jobs_line = find(lambda s: s.lstrip().startswith("jobs"), "job count header")
    m_match = re.search(r"(\d+)\s*$", lines[jobs_line])
    if not m_match:
        raise ParseError("job count missing", line=jobs_line + 1)
    m = int(m_match.group(1))

    horizon = None
    for i in range(jobs_line, len(lines)):
        if lines[i].lstrip().startswith("horizon"):
            h_match = re.search(r"(\d+)\s*$", lines[i])
            if h_match:
                horizon = int(h_match.group(1))
            break

    renew_line = find(lambda s: "renewable" in s and "non" not in s, "renewable resources")
    k_match = re.search(r":\s*(\d+)", lines[renew_line])
    if not k_match:
        raise ParseError("renewable resource count missing", line=renew_line + 1)
    k = int(k_match.group(1))

    prec_line = find(lambda s: s.strip().startswith("PRECEDENCE RELATIONS"), "precedence")
    row = prec_line + 2  # skip the jobnr./#modes column header
    successors: list[tuple[int, ...]] = []
    for j in range(m):
        vals = ints(row + j)
        if len(vals) < 3:
            raise ParseError(f"truncated precedence row for job {j + 1}", line=row + j + 1)
        jobnr, modes, nsucc = vals[0], vals[1], vals[2]
        if jobnr != j + 1:
            raise ParseError(f"expected job {j + 1}, found {jobnr}", line=row + j + 1)
        if modes != 1:
            raise ParseError("multi-mode instances are not supported", line=row + j + 1)
        succ = vals[3 : 3 + nsucc]
        if len(succ) != nsucc:
            raise ParseError(
                f"job {j + 1} declares {nsucc} successors, lists {len(succ)}",
                line=row + j + 1,
            )
        for s in succ:
            if not 1 <= s <= m:
                raise ParseError(
                    f"successor {s} of job {j + 1} out of range 1..{m}",
                    line=row + j + 1,
                )
        successors.append(tuple(s - 1 for s in succ))

    req_line = find(lambda s: s.strip().startswith("REQUESTS/DURATIONS"), "requests", prec_line)
    row = req_line + 1
    # skip the column header and any separator ruled line
    while row < len(lines) and not re.match(r"\s*\d", lines[row]):
        row += 1
    durations: list[int] = []
    requirements: list[tuple[int, ...]] = []
    for j in range(m):
        vals = ints(row + j)
        if len(vals) != 3 + k:
            raise ParseError(
                f"job {j + 1}: expected 3+{k} request/duration fields, got {len(vals)}",
                line=row + j + 1,
            )
        if vals[0] != j + 1:
            raise ParseError(f"expected job {j + 1}, found {vals[0]}", line=row + j + 1)
        durations.append(vals[2])
        requirements.append(tuple(vals[3:]))

    avail_line = find(
        lambda s: s.strip().startswith("RESOURCEAVAILABILITIES"), "availabilities", req_line
    )
    row = avail_line + 1
    while row < len(lines) and not re.match(r"\s*\d", lines[row]):
        row += 1
    if row >= len(lines):
        raise ParseError("resource availabilities missing", line=len(lines))
    caps = ints(row)
    if len(caps) != k:
        raise ParseError(f"expected {k} capacities, got {len(caps)}", line=row + 1)

    inst = Instance(
        id=instance_id,
        durations=tuple(durations),
        requirements=tuple(requirements),
        capacities=tuple(caps),
        successors=tuple(successors),
        horizon=horizon if horizon is not None else sum(durations),
    )
    return validate_instance(inst)


# ---------------------------------------------------------------------------
# Patterson format (RG300 / RanGen distributions) and the canonical form
# ---------------------------------------------------------------------------

def _tokenize_numbered(text: str):
    """Yield (int, line_number) for every numeric token; parse '#' metadata."""
    meta: dict[str, str] = {}
    tokens: list[tuple[int, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if ":" in body:
                key, _, value = body.partition(":")
                meta[key.strip()] = value.strip()
            continue
        for tok in stripped.split():
            try:
                tokens.append((int(tok), lineno))
            except ValueError as exc:
                raise ParseError(f"expected integer, got {tok!r}", line=lineno) from exc
    return tokens, meta


def parse_patterson(text: str, instance_id: str = "") -> Instance:
    """Parse a Patterson-style file: "M K", capacities, then one record per
    activity (duration, K requirements, successor count, successor IDs).

    Files distributed without dummy source/sink activities are normalized to
    include them; the decision is logged per file.
    """
    tokens, meta = _tokenize_numbered(text)
    if not tokens:
        raise ParseError("empty instance text", line=1)
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(tokens):
            last_line = tokens[-1][1] if tokens else 1
            raise ParseError(f"unexpected end of file reading {what}", line=last_line)
        value, line = tokens[pos]
        pos += 1
        return value, line

    m_raw, _ = take("activity count")
    k, _ = take("resource count")
    if m_raw <= 0 or k <= 0:
        raise ParseError("activity and resource counts must be positive", line=1)
    caps = tuple(take("capacity")[0] for _ in range(k))

    durations: list[int] = []
    requirements: list[tuple[int, ...]] = []
    successors_raw: list[list[int]] = []
    for j in range(m_raw):
        d, line = take(f"duration of activity {j + 1}")
        reqs = tuple(take("requirement")[0] for _ in range(k))
        nsucc, _ = take("successor count")
        succ = []
        for _ in range(nsucc):
            s, sline = take("successor")
            if not 1 <= s <= m_raw:
                raise ParseError(
                    f"successor {s} of activity {j + 1} out of range 1..{m_raw}",
                    line=sline,
                )
            succ.append(s - 1)
        durations.append(d)
        requirements.append(reqs)
        successors_raw.append(succ)
    if pos != len(tokens):
        raise ParseError("trailing data after last activity", line=tokens[pos][1])

    instance_id = meta.get("id", instance_id)
    has_preds = [False] * m_raw
    for succ in successors_raw:
        for s in succ:
            has_preds[s] = True
    headless = [j for j in range(m_raw) if not has_preds[j]]
    tailless = [j for j in range(m_raw) if not successors_raw[j]]
    dummies_present = (
        headless == [0]
        and tailless == [m_raw - 1]
        and durations[0] == 0
        and not any(requirements[0])
        and durations[-1] == 0
        and not any(requirements[-1])
    )

    if dummies_present:
        log.info("instance %s: file includes dummy source/sink", instance_id or "<anon>")
        durs = tuple(durations)
        reqs = tuple(requirements)
        succs = tuple(tuple(s) for s in successors_raw)
    else:
        log.info("instance %s: adding dummy source/sink", instance_id or "<anon>")
        zero = tuple(0 for _ in range(k))
        durs = (0, *durations, 0)
        reqs = (zero, *requirements, zero)
        shifted = [tuple(s + 1 for s in succ) for succ in successors_raw]
        sink = m_raw + 1
        succs = (
            tuple(j + 1 for j in headless),
            *(succ if succ else (sink,) for succ in shifted),
            (),
        )

    horizon = int(meta["horizon"]) if "horizon" in meta else sum(durs)
    inst = Instance(
        id=instance_id,
        durations=durs,
        requirements=reqs,
        capacities=caps,
        successors=succs,
        horizon=horizon,
    )
    return validate_instance(inst)


def serialize_instance(instance: Instance) -> str:
    """Canonical internal text form: Patterson layout plus '#' metadata lines.

    parse_patterson(serialize_instance(x)) reconstructs an equal Instance.
    """
    out = io.StringIO()
    if instance.id:
        out.write(f"# id: {instance.id}\n")
    out.write(f"# horizon: {instance.horizon}\n")
    out.write(f"{instance.num_activities} {instance.num_resources}\n")
    out.write(" ".join(str(c) for c in instance.capacities) + "\n")
    for j in range(instance.num_activities):
        succ = instance.successors[j]
        fields = [
            instance.durations[j],
            *instance.requirements[j],
            len(succ),
            *(s + 1 for s in succ),
        ]
        out.write(" ".join(str(v) for v in fields) + "\n")
    return out.getvalue()


def parse_instance_file(path, instance_id: str | None = None) -> Instance:
    """Parse a file, picking the format from its extension (.sm => PSPLib)."""
    import pathlib

    p = pathlib.Path(path)
    text = p.read_text()
    name = instance_id if instance_id is not None else p.stem
    if p.suffix.lower() == ".sm":
        return parse_psplib(text, name)
    return parse_patterson(text, name)


# ---------------------------------------------------------------------------
# Instance parameter metadata (sidecar CSV)
# ---------------------------------------------------------------------------

_META_SCHEMAS = (("OS", "RU", "RC"), ("NC", "RF", "RS"))


@dataclass(frozen=True, eq=True)
class InstanceMeta:
    """Generator parameters for one benchmark instance."""

    id: str
    params: dict[str, float]
    set_name: str = ""

    @property
    def is_hard(self) -> bool:
        """High resource pressure: RC >= 0.6 and RU >= 3."""
        if "RC" not in self.params or "RU" not in self.params:
            raise KeyError(f"meta for {self.id} lacks RC/RU parameters")
        return self.params["RC"] >= 0.6 and self.params["RU"] >= 3

    @property
    def combination(self) -> tuple[float, ...]:
        return tuple(v for _, v in sorted(self.params.items()))


def load_meta(csv_text: str) -> list[InstanceMeta]:
    """Read an id,OS,RU,RC (or id,NC,RF,RS) metadata CSV."""
    reader = csv.DictReader(io.StringIO(csv_text))
    header = reader.fieldnames or []
    if "id" not in header:
        raise ParseError("metadata CSV must have an 'id' column", line=1)
    schema = next((s for s in _META_SCHEMAS if all(c in header for c in s)), None)
    if schema is None:
        raise ParseError(
            "metadata CSV must carry OS,RU,RC or NC,RF,RS columns", line=1
        )
    records: list[InstanceMeta] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        ident = (row["id"] or "").strip()
        if not ident:
            raise ParseError("empty instance id", line=lineno)
        if ident in seen:
            raise ParseError(f"duplicate instance id {ident!r}", line=lineno)
        seen.add(ident)
        try:
            params = {c: float(row[c]) for c in schema}
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad parameter value for {ident}", line=lineno) from exc
        records.append(InstanceMeta(id=ident, params=params, set_name=row.get("set", "") or ""))
    return records
