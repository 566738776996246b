"""
Storage module - reads run configurations and writes result tables.

Output is diff-stable: CSV floats use format(x, ".11e") with "." decimals,
JSON is written with sorted keys and two-space indentation.
"""

import csv
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from bbfiber import settings
from bbfiber.bounds import BoundQuery, SpectralDensity
from bbfiber.exceptions import BBFiberError, ConfigError, StorageError
from bbfiber.hamiltonian import FiberModel

logger = logging.getLogger(__name__)

RUN_CONFIG_KEYS = (
    "model",
    "controls",
    "sweep",
    "spectral_density",
    "bound_query",
    "seed",
    "output",
    "format",
)
SWEEP_KEYS = ("epsilon", "g_rad_s", "tau_s", "seeds")
SPECTRAL_KEYS = ("n", "alpha", "omega_c_rad_s", "beta_s")
QUERY_KEYS = ("delta", "length_m", "speed_m_s", "time_s")
FORMATS = ("csv", "json")


def format_value(value: Any) -> str:
    """Integers and booleans verbatim, floats with 12 significant digits."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".11e")
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def render_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class Storage:
    """Handles reading configs and writing result files under an output directory."""

    def __init__(self, output_dir: Optional[str] = None):
        """
        Initialize storage with an output directory.

        Args:
            output_dir: Directory for relative output names (default from settings)
        """
        self.output_dir = Path(output_dir or settings.OUTPUT_DIR)

    def resolve(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() or path.parent != Path(".") else self.output_dir / path

    def write_text(self, name: str, text: str) -> Path:
        """
        Write ``text`` to ``name``, creating parent directories.

        Raises:
            StorageError: If the file cannot be written
        """
        path = self.resolve(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            raise StorageError(f"Failed to write {path}: {str(e)}") from e
        logger.debug("Wrote %s", path)
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self.write_text(name, render_csv(header, rows))

    def write_json(self, name: str, payload: Any) -> Path:
        return self.write_text(name, render_json(payload))

    @staticmethod
    def read_json(path: str) -> Dict[str, Any]:
        """
        Load a JSON object from ``path``.

        Raises:
            StorageError: If the file cannot be read
            ConfigError: If the content is not a JSON object
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise StorageError(f"Failed to read {path}: {str(e)}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in {path}: {str(e)}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a JSON object")
        return data


@dataclass(frozen=True)
class Sweep:
    """Cartesian grid walked in the order seeds, epsilon, g_rad_s, tau_s."""

    seeds: Tuple[int, ...]
    epsilon: Tuple[float, ...]
    g_rad_s: Tuple[float, ...]
    tau_s: Tuple[float, ...]

    def points(self) -> List[Tuple[int, float, float, float]]:
        return [
            (seed, eps, g, tau)
            for seed in self.seeds
            for eps in self.epsilon
            for g in self.g_rad_s
            for tau in self.tau_s
        ]


@dataclass(frozen=True)
class RunConfig:
    model: Optional[FiberModel]
    controls: Optional[str]
    sweep: Optional[Sweep]
    spectral_density: Optional[SpectralDensity]
    bound_query: Optional[BoundQuery]
    seed: int
    output: Optional[str]
    format: str


def _reject_unknown(block: Mapping[str, Any], allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown key(s) in {where}: {', '.join(unknown)}")


def _as_tuple(value: Any, cast, name: str) -> Tuple:
    values = value if isinstance(value, list) else [value]
    try:
        return tuple(cast(v) for v in values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value for {name}: {value!r}") from e


def _build_sweep(block: Mapping[str, Any], model: FiberModel, seed: int) -> Sweep:
    _reject_unknown(block, SWEEP_KEYS, "sweep")
    return Sweep(
        seeds=_as_tuple(block.get("seeds", seed), int, "seeds"),
        epsilon=_as_tuple(block.get("epsilon", model.epsilon), float, "epsilon"),
        g_rad_s=_as_tuple(block.get("g_rad_s", model.bath_modes[0].g_rad_s), float, "g_rad_s"),
        tau_s=_as_tuple(block.get("tau_s", model.tau_s), float, "tau_s"),
    )


def parse_run_config(data: Mapping[str, Any]) -> RunConfig:
    """
    Validate a run configuration mapping.

    Raises:
        ConfigError: On unknown keys or invalid blocks; the message names the key
    """
    _reject_unknown(data, RUN_CONFIG_KEYS, "run config")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    output_format = data.get("format", "csv")
    if output_format not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {output_format!r}")

    try:
        model = FiberModel.from_dict(data["model"]) if "model" in data else None
        spectral = None
        if "spectral_density" in data:
            _reject_unknown(data["spectral_density"], SPECTRAL_KEYS, "spectral_density")
            spectral = SpectralDensity(**data["spectral_density"])
        query = None
        if "bound_query" in data:
            _reject_unknown(data["bound_query"], QUERY_KEYS, "bound_query")
            query = BoundQuery(**data["bound_query"])
    except ConfigError:
        raise
    except (BBFiberError, TypeError) as e:
        raise ConfigError(str(e)) from e

    sweep = None
    if "sweep" in data:
        if model is None:
            raise ConfigError("sweep needs a model block")
        sweep = _build_sweep(data["sweep"], model, seed)

    return RunConfig(
        model=model,
        controls=data.get("controls"),
        sweep=sweep,
        spectral_density=spectral,
        bound_query=query,
        seed=seed,
        output=data.get("output"),
        format=output_format,
    )


def load_run_config(path: str) -> RunConfig:
    return parse_run_config(Storage.read_json(path))
