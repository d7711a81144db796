"""Parameter sweeps and the bundled experiment manifests.

A manifest is a small ``key: value`` text file::

    name: single-reliability
    description: ...
    model: satellite.ctmc
    const: T=129600

    experiment: replacements-vs-r
    query: R{"num_replace"}=?[C<=T]
    sweep: r=0.01:0.99:0.05

Keys before the first ``experiment:`` describe the manifest; ``query``,
``sweep`` and ``const`` lines after it belong to that experiment.
``const`` and ``sweep`` may repeat.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from ..checker import ModelChecker
from ..ctmc import build_state_space
from ..errors import ModelError
from ..lang.ast import ModelAst
from ..lang.parser import parse_model, parse_property
from ..numerics import DEFAULT_EPS, DEFAULT_TOL
from .params import RamParams

ModelSource = Union[str, ModelAst, Callable[[RamParams], ModelAst]]


@dataclass(frozen=True)
class Sweep:
    name: str
    lo: float
    hi: float
    step: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and math.isfinite(self.step)):
            raise ValueError(f"sweep {self.name}: bounds must be finite")
        if self.lo > self.hi:
            raise ValueError(f"sweep {self.name}: lower bound {self.lo:g} exceeds upper bound {self.hi:g}")
        if self.step <= 0:
            raise ValueError(f"sweep {self.name}: step must be positive")

    @property
    def values(self) -> np.ndarray:
        # lo, lo+step, ... not exceeding hi (tolerant of rounding)
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return np.round(self.lo + self.step * np.arange(count), 12)

    def __str__(self) -> str:
        return f"{self.name}={self.lo:g}:{self.hi:g}:{self.step:g}"


def parse_sweep(text: str) -> Sweep:
    """Parse ``name=lo:hi:step`` (or ``name=value`` for a single point)."""
    name, sep, rng = text.partition("=")
    name = name.strip()
    if not sep or not name.isidentifier():
        raise ValueError(f"malformed sweep {text!r}; expected name=lo:hi:step")
    parts = rng.split(":")
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"malformed sweep {text!r}; bounds must be numbers") from None
    if len(numbers) == 1:
        numbers = [numbers[0], numbers[0], 1.0]
    if len(numbers) != 3:
        raise ValueError(f"malformed sweep {text!r}; expected name=lo:hi:step")
    return Sweep(name, *numbers)


@dataclass
class SweepTable:
    """Rows ``(param values..., query, value)``, kept sorted by parameter."""

    params: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def sort(self) -> None:
        self.rows.sort(key=lambda row: (row[: len(self.params)], row[len(self.params)]))

    def column(self, query: str) -> tuple[np.ndarray, np.ndarray]:
        """Parameter grid and values for one query (single-parameter tables)."""
        k = len(self.params)
        picked = [row for row in self.rows if row[k] == query]
        if not picked:
            raise KeyError(query)
        x = np.array([row[0] for row in picked]) if k else np.zeros(len(picked))
        return x, np.array([row[k + 1] for row in picked], dtype=float)

    def to_csv(self, digits: int = 6) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*self.params, "query", "value"])
        for row in self.rows:
            *point, query, value = row
            writer.writerow([*(f"{v:.12g}" for v in point), query, _format_value(value, digits)])
        return buf.getvalue()


def _format_value(value, digits: int) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return f"{value:.{digits}g}"


def crossing(x: Sequence[float], y: Sequence[float], level: float) -> float:
    """First ``x`` where the piecewise-linear curve through ``(x, y)`` meets ``level``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) - level
    for i in range(len(x) - 1):
        if y[i] == 0:
            return float(x[i])
        if y[i] * y[i + 1] < 0:
            return float(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))
    if len(y) and y[-1] == 0:
        return float(x[-1])
    raise ValueError(f"curve does not cross {level:g}")


# -- evaluation ----------------------------------------------------------------

_PARAM_FIELDS = set(RamParams.__dataclass_fields__) | {"o"}


def _evaluate_point(model, base, point, queries, eps, tol) -> list:
    """Rebuild the chain for one grid point and answer every query."""
    if callable(model):
        params = base if isinstance(base, RamParams) else RamParams()
        unknown = set(point) - _PARAM_FIELDS
        if unknown:
            raise ModelError(f"unknown parameter(s) {', '.join(sorted(unknown))}")
        ast, constants = model(params.replace(**point)), None
    else:
        ast = parse_model(model) if isinstance(model, str) else model
        constants = {**(base or {}), **point}
    checker = ModelChecker(build_state_space(ast, constants or None), eps, tol)
    out = []
    for q in queries:
        v = checker.check(q).value
        out.append(v)
    return out


def run_experiment_sweep(
    model: ModelSource,
    queries: Sequence[str],
    sweeps: Sequence[Sweep | str] = (),
    base: RamParams | Mapping[str, float] | None = None,
    jobs: int = 1,
    eps: float = DEFAULT_EPS,
    tol: float = DEFAULT_TOL,
) -> SweepTable:
    """Evaluate ``queries`` over the Cartesian grid spanned by ``sweeps``.

    ``model`` is model source text, a parsed model, or a builder taking
    :class:`RamParams`. For text and parsed models the swept names are
    model constants and ``base`` holds extra constant overrides; for a
    builder they are ``RamParams`` fields and ``base`` is the starting
    parameter set. Points are evaluated independently (in ``jobs``
    processes when ``jobs > 1``) and rows come back sorted.
    """
    sweeps = [parse_sweep(s) if isinstance(s, str) else s for s in sweeps]
    if len({s.name for s in sweeps}) != len(sweeps):
        raise ValueError("a parameter may be swept only once")
    queries = list(queries)
    for q in queries:
        parse_property(q)
    names = tuple(s.name for s in sweeps)
    grid = [dict(zip(names, (float(v) for v in combo))) for combo in itertools.product(*(s.values for s in sweeps))]
    if not callable(model) and base is not None and not isinstance(base, Mapping):
        raise TypeError("base must be a mapping of constant overrides for text models")
    args = [(model, base, point, queries, eps, tol) for point in grid]
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_point, *zip(*args)))
    else:
        results = [_evaluate_point(*a) for a in args]
    table = SweepTable(names)
    for point, values in zip(grid, results):
        key = tuple(point[n] for n in names)
        table.rows.extend((*key, q, v) for q, v in zip(queries, values))
    table.sort()
    return table


# -- manifests -----------------------------------------------------------------


@dataclass
class Experiment:
    name: str
    queries: list[str] = field(default_factory=list)
    sweeps: list[Sweep] = field(default_factory=list)
    constants: dict[str, float] = field(default_factory=dict)


@dataclass
class Manifest:
    name: str
    model: str
    description: str = ""
    constants: dict[str, float] = field(default_factory=dict)
    experiments: list[Experiment] = field(default_factory=list)
    directory: Path | None = None

    def model_source(self) -> str:
        """Text of the model file, looked up next to the manifest, then in the bundled data."""
        if self.directory is not None and (self.directory / self.model).is_file():
            return (self.directory / self.model).read_text()
        return read_bundled(self.model)


def _parse_constant(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    name = name.strip()
    if not sep or not name.isidentifier():
        raise ValueError(f"malformed constant {text!r}; expected name=value")
    try:
        return name, float(value)
    except ValueError:
        raise ValueError(f"malformed constant {text!r}; value must be a number") from None


def parse_manifest(text: str, directory: Path | None = None) -> Manifest:
    header: dict[str, str] = {}
    constants: dict[str, float] = {}
    experiments: list[Experiment] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise ValueError(f"manifest line {lineno}: expected 'key: value'")
        try:
            if key == "experiment":
                experiments.append(Experiment(value))
            elif experiments and key == "query":
                experiments[-1].queries.append(value)
            elif experiments and key == "sweep":
                experiments[-1].sweeps.append(parse_sweep(value))
            elif key == "const":
                target = experiments[-1].constants if experiments else constants
                name, number = _parse_constant(value)
                target[name] = number
            elif not experiments and key in ("name", "model", "description"):
                header[key] = value
            else:
                raise ValueError(f"unexpected key {key!r}")
        except ValueError as exc:
            raise ValueError(f"manifest line {lineno}: {exc}") from None
    for key in ("name", "model"):
        if key not in header:
            raise ValueError(f"manifest lacks '{key}'")
    for e in experiments:
        if not e.queries:
            raise ValueError(f"experiment {e.name!r} has no query")
    return Manifest(header["name"], header["model"], header.get("description", ""), constants, experiments, directory)


def load_manifest(name_or_path: str | Path) -> Manifest:
    """Load a manifest file, or a bundled manifest by name."""
    path = Path(name_or_path)
    if path.suffix == ".manifest" and path.is_file():
        return parse_manifest(path.read_text(), path.parent)
    bundled = resources.files("satmc.data").joinpath("manifests", f"{name_or_path}.manifest")
    if not bundled.is_file():
        raise FileNotFoundError(f"no manifest named {str(name_or_path)!r} (known: {', '.join(bundled_manifests())})")
    return parse_manifest(bundled.read_text())


def bundled_manifests() -> list[str]:
    folder = resources.files("satmc.data").joinpath("manifests")
    return sorted(p.name[: -len(".manifest")] for p in folder.iterdir() if p.name.endswith(".manifest"))


def read_bundled(filename: str) -> str:
    item = resources.files("satmc.data").joinpath(filename)
    if not item.is_file():
        raise FileNotFoundError(f"no bundled model {filename!r}")
    return item.read_text()


def run_manifest(
    manifest: Manifest, jobs: int = 1, eps: float = DEFAULT_EPS, tol: float = DEFAULT_TOL
) -> dict[str, SweepTable]:
    source = manifest.model_source()
    ast = parse_model(source)
    return {
        e.name: run_experiment_sweep(
            ast, e.queries, e.sweeps, {**manifest.constants, **e.constants}, jobs=jobs, eps=eps, tol=tol
        )
        for e in manifest.experiments
    }


def manifest_csv(tables: Mapping[str, SweepTable], digits: int = 6) -> dict[str, str]:
    return {name: table.to_csv(digits) for name, table in tables.items()}
