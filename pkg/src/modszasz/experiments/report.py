"""Experiment specifications, reports and their text formats."""

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .. import __version__
from ..errors import ConfigError, DomainError
from ..operator import EvalConfig, TestFunction, parse_function
from ..sequences import BnSequence, parse_sequence
from ..smoothness import WeightedSpace

STUDIES = ("converge", "voronovskaja", "direct_bound", "alpha_inverse", "figures", "moment_audit")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything a study needs. ``x_max`` is the evaluation window [0, x_max]
    for operator errors; ``space.x_max`` is the (usually wider) window used for
    norms and moduli. ``x_max = None`` means the same as ``space.x_max``."""

    study: str
    function: TestFunction = None
    sequence: BnSequence = field(default_factory=BnSequence.classical)
    n_ladder: tuple = (10, 20, 40, 80)
    space: WeightedSpace = field(default_factory=WeightedSpace)
    eval: EvalConfig = field(default_factory=EvalConfig)
    output_path: str = None
    x_max: float = None
    x_points: int = 65
    refine: bool = True
    h_samples: int = 64
    deltas: tuple = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
    settings: tuple = ()
    figure_points: int = 512
    b_values: tuple = (1.0, 2.5, 10.0, 100.0)
    x_values: tuple = (0.0, 0.1, 1.0, 5.0, 10.0)

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; expected one of {STUDIES}")
        ladder = tuple(int(n) for n in self.n_ladder)
        if not ladder or any(n < 1 for n in ladder):
            raise ConfigError("n_ladder must hold positive integers")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("n_ladder must be strictly increasing")
        object.__setattr__(self, "n_ladder", ladder)
        if self.study == "figures" and self.eval.fixed_k is None:
            raise ConfigError("the figures study truncates at a fixed index; set fixed_k")
        if self.study in ("converge", "voronovskaja", "direct_bound", "alpha_inverse") and self.function is None:
            raise ConfigError(f"study {self.study!r} needs a function")
        if self.x_points < 2:
            raise ConfigError("x_points must be at least 2")

    @property
    def window(self):
        return self.space.x_max if self.x_max is None else float(self.x_max)

    def echo(self):
        """Resolved parameters as plain JSON-compatible values."""
        return {
            "study": self.study,
            "function": None if self.function is None else self.function.spec(),
            "sequence": self.sequence.spec(),
            "n_ladder": list(self.n_ladder),
            "N": self.space.N,
            "space_x_max": self.space.x_max,
            "grid_points": self.space.grid_points,
            "x_max": self.window,
            "x_points": self.x_points,
            "refine": self.refine,
            "h_samples": self.h_samples,
            "tol": self.eval.tol,
            "term_cap": self.eval.term_cap,
            "fixed_k": self.eval.fixed_k,
            "deltas": list(self.deltas),
            "settings": list(self.settings),
            "figure_points": self.figure_points,
            "b_values": list(self.b_values),
            "x_values": list(self.x_values),
            "output_path": self.output_path,
        }


@dataclass
class ExperimentReport:
    """Rows of flat records plus a summary; ``bundles`` holds figure curves."""

    spec_echo: dict
    rows: list
    summary: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    bundles: dict = field(default_factory=dict)

    def columns(self):
        cols = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def to_csv(self):
        return rows_to_csv(self.rows, self.columns())

    def to_json(self):
        payload = {
            "spec_echo": self.spec_echo,
            "rows": [{k: _json_value(v) for k, v in row.items()} for row in self.rows],
            "summary": _json_value(self.summary),
            "metadata": _json_value(self.metadata),
        }
        return json.dumps(payload, indent=1, allow_nan=False) + "\n"

    def write(self, path):
        """Write CSV (or JSON for a ``.json`` suffix); figure bundles go next to it."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = self.to_json() if path.suffix == ".json" else self.to_csv()
        path.write_text(text, newline="")
        written = [path]
        for name, (header, columns) in self.bundles.items():
            target = path.with_name(f"{path.stem}_{name}.csv")
            rows = [dict(zip(header, values)) for values in zip(*columns)]
            target.write_text(rows_to_csv(rows, header), newline="")
            written.append(target)
        return written


def new_report(spec, rows, summary=None, **diagnostics):
    metadata = {
        "tool": "modszasz",
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    metadata.update(diagnostics)
    return ExperimentReport(spec.echo(), rows, summary or {}, metadata)


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    try:
        return format_value(v.item())
    except AttributeError:
        return str(v)


def rows_to_csv(rows, columns):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return format_value(v)
    return v


# ---------------------------------------------------------------------------
# flat key = value config files

def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def _float_list(text):
    return tuple(float(p) for p in text.split(",") if p.strip())


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    return None if text.strip().lower() in ("", "none") else int(text)


_SPEC_KEYS = {
    "study": str,
    "function": parse_function,
    "sequence": parse_sequence,
    "n_ladder": _int_list,
    "output_path": str,
    "x_max": float,
    "x_points": int,
    "refine": _bool,
    "h_samples": int,
    "deltas": _float_list,
    "settings": lambda t: tuple(s.strip() for s in t.split(",") if s.strip()),
    "figure_points": int,
    "b_values": _float_list,
    "x_values": _float_list,
}
_SPACE_KEYS = {"N": int, "space_x_max": float, "grid_points": int}
_EVAL_KEYS = {"tol": float, "term_cap": int, "fixed_k": _optional_int}


def parse_config(text, study=None):
    """Build an :class:`ExperimentSpec` from ``key = value`` lines.

    ``#`` starts a comment. ``study`` (e.g. from a CLI subcommand) overrides a
    ``study`` key in the text.
    """
    spec_kw, space_kw, eval_kw = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        for table, target in ((_SPEC_KEYS, spec_kw), (_SPACE_KEYS, space_kw), (_EVAL_KEYS, eval_kw)):
            if key in table:
                try:
                    target[key] = table[key](val)
                except (ValueError, DomainError) as exc:
                    raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
                break
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if study is not None:
        spec_kw["study"] = study
    if "study" not in spec_kw:
        raise ConfigError("no study given")
    if "space_x_max" in space_kw:
        space_kw["x_max"] = space_kw.pop("space_x_max")
    try:
        spec_kw["space"] = WeightedSpace(**space_kw)
        spec_kw["eval"] = EvalConfig(**eval_kw)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentSpec(**spec_kw)


def load_config(path, study=None):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, study)


def with_output(spec, path):
    return replace(spec, output_path=str(path))
