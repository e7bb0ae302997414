"""Experiment configuration for dgd_local runs."""

import configparser
import os
from typing import (
    Any,
    Callable,
    Optional,
    Union,
)

from ..constants import (
    DEFAULT_MAX_ITERS,
    DEFAULT_SAFETY,
    FLOAT_FORMAT,
    TOLERANCES,
)
from ..errors import ConfigError
from ..matkit import PathLike
from ..solvers import ENGINE_KINDS
from ..topology import GRAPH_KINDS

RHO_MODES: tuple[str, ...] = ("auto", "auto_network")
CONFIG_KEYS: tuple[str, ...] = (
    'n',
    'm',
    'r',
    'J',
    'topology',
    'p',
    'seed',
    'mu',
    'rho',
    'max_iters',
    'tol_grad',
    'tol_consensus',
    'trials',
    'output_dir',
    'lazy',
    'engine',
    'safety',
    'init_seed',
    'halt_on_leave',
)
REQUIRED_KEYS: tuple[str, ...] = ('n', 'm', 'r', 'J', 'topology')

_SECTION = "experiment"
_BOOLEANS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def bundled_config_dir() -> str:
    return os.path.join(os.path.dirname(os.path.dirname(__file__)), '_configs')


def resolve_config_path(path: PathLike) -> str:
    """Return `path`, or the bundled config of that name when `path` does not exist.

    Raises:
        FileNotFoundError: If neither exists
    """
    if os.path.exists(path):
        return os.path.abspath(path)
    bundled = os.path.join(bundled_config_dir(), os.path.basename(str(path)))
    if os.path.exists(bundled):
        return bundled
    raise FileNotFoundError(f"Config file not found: {path}")


class ExperimentConfig:
    """Configuration of one experiment.

    Read from flat `key = value` text (one pair per line, `#` starts a comment):

        n = 10
        m = 12
        r = 2
        J = 4
        topology = ring
        lazy = true
        mu = auto
        rho = auto_network

    `mu`, `rho` and `tol_grad` accept `auto` and are resolved against the data
    when the experiment is prepared; `rho` additionally accepts `auto_network`.
    """

    def __init__(
        self,
        n: int,
        m: int,
        r: int,
        J: int,
        topology: str,
        p: Optional[float] = None,
        seed: int = 0,
        mu: Union[float, str] = "auto",
        rho: Union[float, str] = "auto",
        max_iters: int = DEFAULT_MAX_ITERS,
        tol_grad: Union[float, str] = "auto",
        tol_consensus: float = TOLERANCES.consensus,
        trials: int = 1,
        output_dir: str = "runs",
        lazy: bool = False,
        engine: str = "dgd_local",
        safety: float = DEFAULT_SAFETY,
        init_seed: Optional[int] = None,
        halt_on_leave: bool = False,
    ):
        """Initialize and validate the configuration.

        Raises:
            ConfigError: On any invalid value
        """
        self.n = n
        self.m = m
        self.r = r
        self.J = J
        self.topology = topology
        self.p = None if p is None else float(p)
        self.seed = seed
        self.mu = _as_number(mu)
        self.rho = _as_number(rho)
        self.max_iters = max_iters
        self.tol_grad = _as_number(tol_grad)
        self.tol_consensus = float(tol_consensus)
        self.trials = trials
        self.output_dir = output_dir
        self.lazy = lazy
        self.engine = engine
        self.safety = float(safety)
        self.init_seed = seed if init_seed is None else init_seed
        self.halt_on_leave = halt_on_leave
        self._validate()

    def _validate(self) -> None:
        for key in ('n', 'm', 'r', 'J', 'trials'):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be positive, got {getattr(self, key)}")
        if self.r > min(self.n, self.m):
            raise ConfigError(f"r = {self.r} exceeds min(n, m) = {min(self.n, self.m)}")
        if self.J > self.m:
            raise ConfigError(f"J = {self.J} exceeds m = {self.m}; every node needs a column")
        if self.topology not in GRAPH_KINDS:
            raise ConfigError(f"Invalid topology '{self.topology}'. Must be one of {list(GRAPH_KINDS)}")
        if self.topology == "erdos" and (self.p is None or not 0 < self.p <= 1):
            raise ConfigError(f"topology = erdos needs 0 < p <= 1, got p = {self.p}")
        if self.engine not in ENGINE_KINDS:
            raise ConfigError(f"Invalid engine '{self.engine}'. Must be one of {list(ENGINE_KINDS)}")
        if self.mu != "auto" and not (isinstance(self.mu, float) and self.mu > 0):
            raise ConfigError(f"mu must be a positive number or auto, got {self.mu!r}")
        if self.rho not in RHO_MODES and not (isinstance(self.rho, float) and self.rho > 0):
            raise ConfigError(f"rho must be a positive number, auto or auto_network, got {self.rho!r}")
        if self.tol_grad != "auto" and not (isinstance(self.tol_grad, float) and self.tol_grad > 0):
            raise ConfigError(f"tol_grad must be a positive number or auto, got {self.tol_grad!r}")
        if not self.tol_consensus > 0:
            raise ConfigError(f"tol_consensus must be positive, got {self.tol_consensus}")
        if self.seed < 0 or self.init_seed < 0:
            raise ConfigError(f"Seeds must be nonnegative, got seed={self.seed}, init_seed={self.init_seed}")
        if self.max_iters < 0:
            raise ConfigError(f"max_iters must be nonnegative, got {self.max_iters}")
        if not 0 < self.safety <= 1:
            raise ConfigError(f"safety must lie in (0, 1], got {self.safety}")

    # ---- Parsing -------------------------------------------------------------

    @classmethod
    def from_file(cls, path: PathLike) -> "ExperimentConfig":
        """Parse a config file; bare names fall back to the bundled configs.

        Raises:
            FileNotFoundError: If the file does not exist
            ConfigError: If it cannot be parsed or validated
        """
        resolved = resolve_config_path(path)
        with open(resolved, "r") as f:
            return cls.from_text(f.read(), source=resolved)

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "ExperimentConfig":
        parser = configparser.ConfigParser(
            interpolation=None,
            inline_comment_prefixes=("#",),
            default_section="__defaults__",
        )
        parser.optionxform = str  # type: ignore[assignment]  # Keys are case sensitive (J)
        try:
            parser.read_string(f"[{_SECTION}]\n{text}", source=source)
        except configparser.Error as e:
            raise ConfigError(f"{source}: {e}") from e

        raw = dict(parser.items(_SECTION))
        unknown = sorted(set(raw) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"{source}: unknown keys {unknown}. Valid: {list(CONFIG_KEYS)}")
        missing = [key for key in REQUIRED_KEYS if key not in raw]
        if missing:
            raise ConfigError(f"{source}: missing required keys {missing}")

        try:
            values = {key: _PARSERS[key](value) for key, value in raw.items()}
        except ValueError as e:
            raise ConfigError(f"{source}: {e}") from e
        return cls(**values)

    # ---- Output --------------------------------------------------------------

    def as_dict(self) -> dict[str, Any]:
        return {key: getattr(self, key) for key in CONFIG_KEYS}

    def echo(self, **resolved: Any) -> str:
        """Config text with `resolved` values substituted; parses back to the same run."""
        values = self.as_dict()
        values.update(resolved)
        lines = [f"{key} = {_format_value(values[key])}" for key in CONFIG_KEYS if values[key] is not None]
        return "\n".join(lines) + "\n"

    def describe(self) -> str:
        """Get description of configuration."""
        lazy = " (lazy)" if self.lazy else ""
        return (
            f"{self.engine} on {self.topology}{lazy} network, J={self.J}: Y is {self.n}x{self.m}, "
            f"rank {self.r}, seed {self.seed}, mu={self.mu}, rho={self.rho}"
        )


def _as_number(value: Union[float, str]) -> Union[float, str]:
    return value if isinstance(value, str) else float(value)


def _number_or(*keywords: str) -> Callable[[str], Union[float, str]]:

    def parse(value: str) -> Union[float, str]:
        if value in keywords:
            return value
        try:
            return float(value)
        except ValueError:
            raise ValueError(f"expected a number or one of {list(keywords)}, got '{value}'") from None

    return parse


def _count(value: str) -> int:
    """Integer, also accepting integral float spellings such as 2e5."""
    try:
        return int(value)
    except ValueError:
        number = float(value)
        if not number.is_integer():
            raise ValueError(f"expected an integer, got '{value}'") from None
        return int(number)


def _boolean(value: str) -> bool:
    if value.lower() not in _BOOLEANS:
        raise ValueError(f"expected true or false, got '{value}'")
    return _BOOLEANS[value.lower()]


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


_PARSERS = {
    'n': int,
    'm': int,
    'r': int,
    'J': int,
    'topology': str,
    'p': float,
    'seed': int,
    'mu': _number_or("auto"),
    'rho': _number_or(*RHO_MODES),
    'max_iters': _count,
    'tol_grad': _number_or("auto"),
    'tol_consensus': float,
    'trials': int,
    'output_dir': str,
    'lazy': _boolean,
    'engine': str,
    'safety': float,
    'init_seed': int,
    'halt_on_leave': _boolean,
}

__all__ = [
    'CONFIG_KEYS',
    'ExperimentConfig',
    'bundled_config_dir',
    'resolve_config_path',
]
