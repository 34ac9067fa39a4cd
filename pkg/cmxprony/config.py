"""
Run configuration: INI config files, command-line overrides and grids.

A config file looks like::

    [run]
    model = ho-knowles
    N = 1..3
    t = 0:3:61
    format = json
    precision = ext:50

    [hamiltonian]
    dims = 1
    potential =
        1 (2)
        1 (4)

    [trial]
    dims = 1
    quad = 1
    poly =
        1 (0)

A [hamiltonian] + [trial] pair replaces the catalog model.
"""

import configparser
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cmxprony.algebra import GaussianPolyState, PolynomialHamiltonian, as_fraction
from cmxprony.errors import ConfigError
from cmxprony.models import BaseModel, InlineModel, get_model
from cmxprony.moments import DEFAULT_MAX_ORDER
from cmxprony.prony import Precision

FORMATS = ("csv", "json")
DEFAULT_ORDERS = "1..5"
DEFAULT_T = "0:3:61"
DEFAULT_TAU = "0:pi:121"
DEFAULT_PRECISION = "ext:50"

_PI_TERM = re.compile(r"^([-+]?[\d.]*)\*?pi(?:/([\d.]+))?$")


def parse_real(text: str) -> float:
    """A float, or a multiple of pi such as 'pi', '2pi', '-pi/2'."""
    text = text.strip().lower().replace(" ", "")
    match = _PI_TERM.match(text)
    if match:
        head, tail = match.groups()
        factor = float(head) if head not in ("", "+", "-") else (-1.0 if head == "-" else 1.0)
        return factor * math.pi / (float(tail) if tail else 1.0)
    return float(text)


@dataclass(frozen=True)
class TGrid:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")
        if not self.stop > self.start:
            raise ValueError(f"grid stop {self.stop} must exceed start {self.start}")

    @classmethod
    def parse(cls, text: str) -> "TGrid":
        """START:STOP:COUNT."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected START:STOP:COUNT, got {text!r}")
        return cls(parse_real(parts[0]), parse_real(parts[1]), int(parts[2]))

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self) -> str:
        return f"{self.start:.12g}:{self.stop:.12g}:{self.count}"


def parse_orders(text: str) -> tuple[tuple[int, ...], bool]:
    """'3' -> ((3,), False); '1..3' -> ((1, 2, 3), True)."""
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        orders = tuple(range(int(lo), int(hi) + 1))
        range_mode = True
    else:
        orders = (int(text),)
        range_mode = False
    if not orders:
        raise ValueError(f"empty order range {text!r}")
    if orders[0] < 1:
        raise ValueError(f"N must be at least 1, got {orders[0]}")
    return orders, range_mode


def parse_terms(text: str, dims: int) -> dict[tuple[int, ...], object]:
    """Lines of 'coeff exponent-tuple', e.g. '-1/2 (0, 2)' or '3 2 0'."""
    terms: dict[tuple[int, ...], object] = {}
    for raw in text.strip().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        coeff, _, rest = line.partition(" ")
        exponents = tuple(int(e) for e in re.findall(r"\d+", rest))
        if len(exponents) != dims:
            raise ValueError(f"term {line!r} needs {dims} exponent(s)")
        value = as_fraction(coeff)
        terms[exponents] = terms.get(exponents, 0) + value
    if not terms:
        raise ValueError("no polynomial terms given")
    return terms


@dataclass(frozen=True)
class RunConfig:
    model: str | None = None
    hamiltonian: PolynomialHamiltonian | None = None
    trial: GaussianPolyState | None = None
    orders: tuple[int, ...] = (1, 2, 3, 4, 5)
    range_mode: bool = True
    t_grid: TGrid | None = None
    output_format: str = "csv"
    precision: Precision = Precision.extended(50)
    max_order: int = DEFAULT_MAX_ORDER
    seed: int = 0
    out: Path | None = None

    def __post_init__(self):
        if self.output_format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.output_format!r}")
        if not self.orders or min(self.orders) < 1:
            raise ValueError("N must be at least 1")
        if self.max_order < 1:
            raise ValueError(f"J must be at least 1, got {self.max_order}")
        if (self.hamiltonian is None) != (self.trial is None):
            raise ValueError("an inline model needs both [hamiltonian] and [trial]")

    @property
    def model_name(self) -> str:
        return self.model or "inline"

    def grid(self, default: str) -> TGrid:
        return self.t_grid or TGrid.parse(default)

    def resolve_model(self) -> BaseModel:
        if self.hamiltonian is not None:
            return InlineModel(self.hamiltonian, self.trial)
        if not self.model:
            raise ConfigError("no model given (use --model or a [hamiltonian]/[trial] pair)", key="run.model")
        return get_model(self.model)


def _line_of(text: str, section: str, key: str) -> int | None:
    """1-based line of ``key`` inside ``[section]``, for diagnostics."""
    current = None
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]", re.IGNORECASE)
    for number, line in enumerate(text.splitlines(), 1):
        header = re.match(r"^\s*\[([^\]]+)\]", line)
        if header:
            current = header.group(1).strip()
        elif current == section and pattern.match(line):
            return number
    return None


class _Reader:
    """Typed access to a parsed config with key/line error reporting."""

    def __init__(self, parser: configparser.ConfigParser, text: str):
        self.parser = parser
        self.text = text

    def get(self, section: str, key: str, convert=str):
        if not self.parser.has_option(section, key):
            return None
        raw = self.parser.get(section, key)
        try:
            return convert(raw)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(str(e), key=f"{section}.{key}", line=_line_of(self.text, section, key)) from None

    def require(self, section: str, key: str, convert=str):
        value = self.get(section, key, convert)
        if value is None:
            raise ConfigError("missing required key", key=f"{section}.{key}")
        return value


def _fractions(text: str):
    return tuple(as_fraction(v) for v in text.replace(",", " ").split())


def read_config_file(path: str | Path) -> dict:
    """Parse a config file into RunConfig keyword arguments."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None

    parser = configparser.ConfigParser(inline_comment_prefixes=(";",))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as e:
        raise ConfigError(e.message if hasattr(e, "message") else str(e), line=getattr(e, "lineno", None)) from None

    unknown = set(parser.sections()) - {"run", "hamiltonian", "trial"}
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}", key=sorted(unknown)[0])

    reader = _Reader(parser, text)
    values: dict = {}
    if parser.has_section("run"):
        values["model"] = reader.get("run", "model")
        orders = reader.get("run", "n", parse_orders)
        if orders:
            values["orders"], values["range_mode"] = orders
        values["t_grid"] = reader.get("run", "t", TGrid.parse)
        values["output_format"] = reader.get("run", "format")
        values["precision"] = reader.get("run", "precision", Precision.parse)
        values["max_order"] = reader.get("run", "j", int)
        values["seed"] = reader.get("run", "seed", int)

    if parser.has_section("hamiltonian"):
        dims = reader.require("hamiltonian", "dims", int)
        potential = reader.require("hamiltonian", "potential", lambda s: parse_terms(s, dims))
        values["hamiltonian"] = reader.get(
            "hamiltonian", "potential", lambda _: PolynomialHamiltonian(dims=dims, potential=potential)
        )

    if parser.has_section("trial"):
        dims = reader.require("trial", "dims", int)
        poly = reader.require("trial", "poly", lambda s: parse_terms(s, dims))
        quad = reader.require("trial", "quad", _fractions)
        lin = reader.get("trial", "lin", _fractions)
        values["trial"] = reader.get(
            "trial", "poly", lambda _: GaussianPolyState(dims=dims, poly=poly, quad=quad, lin=lin)
        )

    return {k: v for k, v in values.items() if v is not None}


def build_config(
    config_path: str | Path | None = None,
    model: str | None = None,
    orders: str | None = None,
    t: str | None = None,
    output_format: str | None = None,
    precision: str | None = None,
    max_order: int | None = None,
    seed: int | None = None,
    out: str | Path | None = None,
) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    values = read_config_file(config_path) if config_path else {}

    def override(key: str, raw, convert=lambda v: v):
        if raw is None:
            return
        try:
            values[key] = convert(raw)
        except ValueError as e:
            raise ConfigError(str(e), key=f"--{key}") from None

    if model is not None:
        values.pop("hamiltonian", None)
        values.pop("trial", None)
    override("model", model)
    if orders is not None:
        try:
            values["orders"], values["range_mode"] = parse_orders(orders)
        except ValueError as e:
            raise ConfigError(str(e), key="--N") from None
    override("t_grid", t, TGrid.parse)
    override("output_format", output_format)
    override("precision", precision, Precision.parse)
    override("max_order", max_order)
    override("seed", seed)
    override("out", out, Path)

    if "orders" not in values:
        values["orders"], values["range_mode"] = parse_orders(DEFAULT_ORDERS)
    if "precision" not in values:
        values["precision"] = Precision.parse(DEFAULT_PRECISION)

    try:
        return RunConfig(**values)
    except ValueError as e:
        raise ConfigError(str(e)) from None
