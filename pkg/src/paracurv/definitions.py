"""Manifold definition files.

A definition is a small sectioned text file::

    # comments start with '#'
    [chart]
    name = para_kenmotsu_s5
    coordinates = x, y, z
    x = -1, 1            # sampling interval per coordinate
    y = -1, 1
    z = -2, -0.1

    [metric]             # lower triangle, 1-based indices, every entry required
    g 1 1 = exp(2*z)
    g 2 1 = 0
    ...

    [phi]                # phi i j = component i of phi(d_j); omitted entries are 0
    phi 1 2 = 1
    [xi]
    xi 3 = 1
    [eta]
    eta 3 = 1

    [tensor.h]           # extra (0,2) fields for the parallel check
    h 1 2 = 1

    [options]
    samples = 32
    seed = 0
    tol = 1e-9

The structure blocks ``[phi]``, ``[xi]``, ``[eta]`` are optional but must
appear together.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .chartcalc import MetricField, TensorField, object_array
from .exprcore import ZERO, Chart, Expression, ParseError, parse, render
from .paracontact import ParacontactStructure

BUNDLED = ("para_kenmotsu_s5", "paracosymplectic_flat", "para_kenmotsu_alpha2")
SUFFIX = ".manifold"
_STRUCTURE = ("phi", "xi", "eta")
_OPTION_TYPES = {"samples": int, "seed": int, "tol": float}


class DefinitionError(Exception):
    """Problem in a definition file; ``line``/``column`` are 1-based."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, path=None):
        self.message = message
        self.line = line
        self.column = column
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)


class MissingBlockError(DefinitionError):
    pass


class ExpressionSyntaxError(DefinitionError):
    pass


@dataclass
class ManifoldDefinition:
    name: str
    chart: Chart
    metric: dict[tuple[int, int], Expression]
    phi: dict[tuple[int, int], Expression] | None = None
    xi: dict[int, Expression] | None = None
    eta: dict[int, Expression] | None = None
    tensors: dict[str, dict[tuple[int, int], Expression]] = field(default_factory=dict)
    options: dict[str, float | int] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def has_structure(self) -> bool:
        return self.phi is not None

    def metric_field(self, chart: Chart | None = None) -> MetricField:
        chart = chart or self.chart
        d = chart.dim
        comps = object_array((d, d))
        for (i, j), e in self.metric.items():
            comps[i, j] = comps[j, i] = e
        return MetricField(chart, comps)

    def structure(self, chart: Chart | None = None) -> ParacontactStructure | None:
        if not self.has_structure:
            return None
        chart = chart or self.chart
        d = chart.dim
        phi = object_array((d, d))
        for (i, j), e in self.phi.items():
            phi[i, j] = e
        xi = [self.xi.get(i, ZERO) for i in range(d)]
        eta = [self.eta.get(i, ZERO) for i in range(d)]
        return ParacontactStructure.from_components(self.metric_field(chart), phi, xi, eta)

    def tensor_fields(self, chart: Chart | None = None) -> dict[str, TensorField]:
        chart = chart or self.chart
        d = chart.dim
        out = {}
        for name, entries in self.tensors.items():
            comps = object_array((d, d))
            for (i, j), e in entries.items():
                comps[i, j] = e
            out[name] = TensorField(chart, (0, 2), comps)
        return out


# --------------------------------------------------------------------------
# reading
# --------------------------------------------------------------------------


@dataclass
class _Entry:
    key: str
    value: str
    line: int
    value_col: int  # 1-based column where the value text starts


def _sections(text: str, path) -> dict[str, tuple[int, list[_Entry]]]:
    sections: dict[str, tuple[int, list[_Entry]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            m = re.fullmatch(r"\[\s*([A-Za-z_][A-Za-z_0-9.]*)\s*\]", stripped)
            if m is None:
                raise DefinitionError("malformed section header", lineno, raw.index("[") + 1, path)
            current = m.group(1)
            if current in sections:
                raise DefinitionError(f"duplicate section [{current}]", lineno, 1, path)
            sections[current] = (lineno, [])
            continue
        if current is None:
            raise DefinitionError("entry outside of any section", lineno, 1, path)
        if "=" not in line:
            raise DefinitionError("expected 'key = value'", lineno, len(line) - len(line.lstrip()) + 1, path)
        key, _, value = line.partition("=")
        col = len(key) + 2 + (len(value) - len(value.lstrip()))
        sections[current][1].append(_Entry(" ".join(key.split()), value.strip(), lineno, col))
    return sections


def _parse_expr(entry: _Entry, chart: Chart, path) -> Expression:
    try:
        return parse(entry.value, chart)
    except ParseError as exc:
        # byte offset back to a character column
        prefix = entry.value.encode("utf-8")[: exc.offset].decode("utf-8", errors="ignore")
        raise ExpressionSyntaxError(exc.message, entry.line, entry.value_col + len(prefix), path) from exc


def _indices(entry: _Entry, symbol: str, count: int, dim: int, path) -> tuple[int, ...]:
    parts = entry.key.split()
    if len(parts) != count + 1 or parts[0] != symbol:
        want = " ".join([symbol] + ["i", "j"][:count])
        raise DefinitionError(f"expected key of the form '{want}', got {entry.key!r}", entry.line, 1, path)
    try:
        idx = tuple(int(p) - 1 for p in parts[1:])
    except ValueError:
        raise DefinitionError(f"non-integer index in {entry.key!r}", entry.line, 1, path) from None
    if any(not 0 <= i < dim for i in idx):
        raise DefinitionError(f"index out of range 1..{dim} in {entry.key!r}", entry.line, 1, path)
    return idx


def _read_chart(sections, path) -> tuple[str, list[str], list[tuple[float, float]]]:
    if "chart" not in sections:
        raise MissingBlockError("missing [chart] block", None, None, path)
    line0, entries = sections["chart"]
    values = {e.key: e for e in entries}
    if "coordinates" not in values:
        raise MissingBlockError("[chart] needs 'coordinates'", line0, None, path)
    names = [n.strip() for n in values["coordinates"].value.split(",") if n.strip()]
    name = values["name"].value if "name" in values else (Path(path).stem if path else "unnamed")
    box = []
    for coord_name in names:
        if coord_name not in values:
            raise MissingBlockError(f"[chart] needs a sampling interval for {coord_name!r}", line0, None, path)
        e = values[coord_name]
        try:
            lo, hi = (float(v) for v in e.value.split(","))
        except ValueError:
            raise DefinitionError(f"interval for {coord_name!r} must be 'lo, hi'", e.line, e.value_col, path) from None
        box.append((lo, hi))
    known = {"name", "coordinates", *names}
    for e in entries:
        if e.key not in known:
            raise DefinitionError(f"unknown [chart] key {e.key!r}", e.line, 1, path)
    return name, names, box


def _read_options(sections, path) -> dict:
    opts = {}
    if "options" not in sections:
        return opts
    for e in sections["options"][1]:
        if e.key not in _OPTION_TYPES:
            raise DefinitionError(f"unknown option {e.key!r}", e.line, 1, path)
        try:
            opts[e.key] = _OPTION_TYPES[e.key](e.value)
        except ValueError:
            raise DefinitionError(f"bad value for option {e.key!r}", e.line, e.value_col, path) from None
    return opts


def loads(text: str, path=None) -> ManifoldDefinition:
    sections = _sections(text, path)
    name, names, box = _read_chart(sections, path)
    options = _read_options(sections, path)
    try:
        chart = Chart(tuple(names), tuple(box), samples=options.get("samples", 32), seed=options.get("seed", 0))
    except ValueError as exc:
        raise DefinitionError(str(exc), sections["chart"][0], None, path) from None
    d = chart.dim

    if "metric" not in sections:
        raise MissingBlockError("missing [metric] block", None, None, path)
    metric = {}
    line0, entries = sections["metric"]
    for e in entries:
        i, j = _indices(e, "g", 2, d, path)
        if j > i:
            raise DefinitionError(
                f"upper-triangle entry 'g {i + 1} {j + 1}'; give the lower triangle only", e.line, 1, path)
        if (i, j) in metric:
            raise DefinitionError(f"duplicate metric entry {e.key!r}", e.line, 1, path)
        metric[(i, j)] = _parse_expr(e, chart, path)
    missing = [(i, j) for i in range(d) for j in range(i + 1) if (i, j) not in metric]
    if missing:
        i, j = missing[0]
        raise MissingBlockError(f"metric block incomplete: missing 'g {i + 1} {j + 1}'", line0, None, path)

    present = [s for s in _STRUCTURE if s in sections]
    phi = xi = eta = None
    if present:
        if len(present) != len(_STRUCTURE):
            absent = [s for s in _STRUCTURE if s not in sections]
            raise MissingBlockError(f"structure blocks must appear together; missing [{absent[0]}]", None, None, path)
        phi = _read_indexed(sections["phi"][1], "phi", 2, chart, path)
        xi = {k[0]: v for k, v in _read_indexed(sections["xi"][1], "xi", 1, chart, path).items()}
        eta = {k[0]: v for k, v in _read_indexed(sections["eta"][1], "eta", 1, chart, path).items()}

    tensors = {}
    for sec, (lineno, entries) in sections.items():
        if sec.startswith("tensor."):
            tname = sec[len("tensor."):]
            if not tname:
                raise DefinitionError("tensor block needs a name", lineno, 1, path)
            tensors[tname] = _read_indexed(entries, tname, 2, chart, path)
        elif sec not in ("chart", "metric", "options", *_STRUCTURE):
            raise DefinitionError(f"unknown section [{sec}]", lineno, 1, path)

    return ManifoldDefinition(name, chart, metric, phi, xi, eta, tensors, options)


def _read_indexed(entries, symbol, count, chart, path) -> dict:
    out = {}
    for e in entries:
        idx = _indices(e, symbol, count, chart.dim, path)
        if idx in out:
            raise DefinitionError(f"duplicate entry {e.key!r}", e.line, 1, path)
        out[idx] = _parse_expr(e, chart, path)
    return out


def load(path) -> ManifoldDefinition:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DefinitionError(f"cannot read definition: {exc.strerror or exc}", path=path) from exc
    return loads(text, path)


def bundled_text(name: str) -> str:
    if name not in BUNDLED:
        raise DefinitionError(f"no bundled example named {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("paracurv").joinpath("data", name + SUFFIX).read_text(encoding="utf-8")


def load_bundled(name: str) -> ManifoldDefinition:
    return loads(bundled_text(name), name + SUFFIX)


def resolve(spec: str) -> ManifoldDefinition:
    """A path if one exists, else a bundled example name."""
    if Path(spec).exists() or spec not in BUNDLED:
        return load(spec)
    return load_bundled(spec)


# --------------------------------------------------------------------------
# writing
# --------------------------------------------------------------------------


def _fmt_float(v: float) -> str:
    return repr(float(v))


def dumps(defn: ManifoldDefinition) -> str:
    names = defn.chart.names
    lines = ["[chart]", f"name = {defn.name}", f"coordinates = {', '.join(names)}"]
    for n, (lo, hi) in zip(names, defn.chart.box):
        lines.append(f"{n} = {_fmt_float(lo)}, {_fmt_float(hi)}")
    lines += ["", "[metric]"]
    for (i, j), e in sorted(defn.metric.items()):
        lines.append(f"g {i + 1} {j + 1} = {render(e, names)}")
    if defn.has_structure:
        lines += ["", "[phi]"]
        lines += [f"phi {i + 1} {j + 1} = {render(e, names)}" for (i, j), e in sorted(defn.phi.items())]
        lines += ["", "[xi]"]
        lines += [f"xi {i + 1} = {render(e, names)}" for i, e in sorted(defn.xi.items())]
        lines += ["", "[eta]"]
        lines += [f"eta {i + 1} = {render(e, names)}" for i, e in sorted(defn.eta.items())]
    for tname, entries in defn.tensors.items():
        lines += ["", f"[tensor.{tname}]"]
        lines += [f"{tname} {i + 1} {j + 1} = {render(e, names)}" for (i, j), e in sorted(entries.items())]
    if defn.options:
        lines += ["", "[options]"]
        lines += [f"{k} = {v!r}" for k, v in defn.options.items()]
    return "\n".join(lines) + "\n"


def write(defn: ManifoldDefinition, path) -> None:
    Path(path).write_text(dumps(defn), encoding="utf-8")
