"""
Run configuration: the defining function together with sampling, tolerance,
oracle and optimizer settings, loaded from TOML.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from loguru import logger

from crindex.errors import ConfigError, ExpressionError
from crindex.expr import ExprAst, parse_defining_function

TOP_LEVEL_KEYS = frozenset(
    {"n", "rho", "sampling", "tolerances", "oracle", "optimizer", "parallel", "conformal_basis"}
)


@dataclass(frozen=True)
class SamplingConfig:
    seed: int = 42
    count: int = 512
    newton_tol: float = 1e-12
    max_newton_iters: int = 50
    box_radius: float = 4.0
    anchors: Tuple[Tuple[complex, ...], ...] = ()


@dataclass(frozen=True)
class Tolerances:
    null_eig_rel_tol: float = 1e-7
    psd_tol: float = 1e-9
    strict_margin: float = 1e-8


@dataclass(frozen=True)
class GammaGrid:
    lo: float
    hi: float
    bisect_tol: float


@dataclass(frozen=True)
class OracleConfig:
    distances: Tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    interior: GammaGrid = GammaGrid(0.01, 0.999, 1e-4)
    exterior: GammaGrid = GammaGrid(1.001, 64.0, 1e-3)


@dataclass(frozen=True)
class OptimizerConfig:
    budget: int = 2000
    restarts: int = 8
    objective: str = "df"


@dataclass(frozen=True)
class DomainSpec:
    """
    A domain {rho < 0} in C^n with every knob of the analysis.

    `rho_text` and `conformal_basis_text` keep the source strings so that the
    spec can be echoed and re-validated.
    """

    n: int
    rho: ExprAst
    rho_text: str
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    conformal_basis: Tuple[ExprAst, ...] = ()
    conformal_basis_text: Tuple[str, ...] = ()
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    workers: int = 1

    def __repr__(self):
        return f"DomainSpec(n={self.n}, rho={self.rho_text!r}, samples={self.sampling.count})"

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "DomainSpec":
        """Build and validate a spec from parsed TOML (or an echoed dict)."""
        if "n" not in data:
            raise ConfigError("missing mandatory key `n`")
        if "rho" not in data:
            raise ConfigError("missing mandatory key `rho`")
        n = _int(data["n"], "n")
        if n < 2:
            raise ConfigError(f"invariant violation: n must be at least 2, got {n}")
        rho_text = _str(data["rho"], "rho")
        rho = _expression(rho_text, n, "rho")

        sampling = _sampling(_table(data, "sampling"), n)
        tolerances = _tolerances(_table(data, "tolerances"))
        oracle = _oracle(_table(data, "oracle"))
        optimizer = _optimizer(_table(data, "optimizer"))
        workers = _int(_table(data, "parallel").get("workers", 1), "parallel.workers")
        if workers == 0 or workers < -1:
            raise ConfigError("invariant violation: parallel.workers must be >= 1 or -1")

        basis_raw = data.get("conformal_basis", [])
        if not isinstance(basis_raw, (list, tuple)):
            raise ConfigError("type mismatch: conformal_basis must be a list of strings")
        basis_text = tuple(
            _str(item, f"conformal_basis[{k}]") for k, item in enumerate(basis_raw)
        )
        basis = tuple(
            _expression(text, n, f"conformal_basis[{k}]")
            for k, text in enumerate(basis_text)
        )

        _warn_unknown(data, TOP_LEVEL_KEYS)
        _warn_unknown(_table(data, "parallel"), {"workers"}, "parallel")

        return DomainSpec(
            n=n,
            rho=rho,
            rho_text=rho_text,
            sampling=sampling,
            tolerances=tolerances,
            oracle=oracle,
            conformal_basis=basis,
            conformal_basis_text=basis_text,
            optimizer=optimizer,
            workers=workers,
        )

    def with_overrides(
        self, seed: Optional[int] = None, count: Optional[int] = None
    ) -> "DomainSpec":
        """Copy of the spec with CLI overrides applied."""
        sampling = self.sampling
        if seed is not None:
            if seed < 0:
                raise ConfigError("invariant violation: seed must be nonnegative")
            sampling = replace(sampling, seed=seed)
        if count is not None:
            if count <= 0:
                raise ConfigError("invariant violation: sample count must be positive")
            sampling = replace(sampling, count=count)
        return replace(self, sampling=sampling)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to the config layout with Python native types."""
        return {
            "n": int(self.n),
            "rho": self.rho_text,
            "sampling": {
                "seed": int(self.sampling.seed),
                "count": int(self.sampling.count),
                "newton_tol": float(self.sampling.newton_tol),
                "max_newton_iters": int(self.sampling.max_newton_iters),
                "box_radius": float(self.sampling.box_radius),
                "anchors": [
                    [_complex_text(c) for c in anchor] for anchor in self.sampling.anchors
                ],
            },
            "tolerances": {
                "null_eig_rel_tol": float(self.tolerances.null_eig_rel_tol),
                "psd_tol": float(self.tolerances.psd_tol),
                "strict_margin": float(self.tolerances.strict_margin),
            },
            "oracle": {
                "distances": [float(d) for d in self.oracle.distances],
                "gamma_grid": {
                    side: {
                        "lo": float(grid.lo),
                        "hi": float(grid.hi),
                        "bisect_tol": float(grid.bisect_tol),
                    }
                    for side, grid in (
                        ("interior", self.oracle.interior),
                        ("exterior", self.oracle.exterior),
                    )
                },
            },
            "optimizer": {
                "budget": int(self.optimizer.budget),
                "restarts": int(self.optimizer.restarts),
                "objective": self.optimizer.objective,
            },
            "parallel": {"workers": int(self.workers)},
            "conformal_basis": list(self.conformal_basis_text),
        }


def load_domain_config(contents: str) -> DomainSpec:
    """
    Parse TOML config text into a DomainSpec, applying defaults.

    Raises:
        ConfigError: Malformed TOML, missing `n`/`rho`, type mismatch or
            invariant violation
    """
    try:
        data = tomllib.loads(contents)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"malformed config: {e}") from e
    return DomainSpec.from_dict(data)


def load_domain_config_file(path: Path) -> DomainSpec:
    logger.debug(f"Loading config {path}")
    return load_domain_config(Path(path).read_text(encoding="utf-8"))


def _warn_unknown(table: Mapping[str, Any], known: Iterable[str], prefix: str = "") -> None:
    for key in sorted(set(table) - set(known)):
        name = f"{prefix}.{key}" if prefix else key
        logger.warning(f"Ignoring unknown config key `{name}`")


def _table(data: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise ConfigError(f"type mismatch: `{key}` must be a table")
    return value


def _int(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"type mismatch: `{key}` must be an integer, got {value!r}")
    return value


def _real(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"type mismatch: `{key}` must be a number, got {value!r}")
    return float(value)


def _positive(value: Any, key: str) -> float:
    x = _real(value, key)
    if not x > 0:
        raise ConfigError(f"invariant violation: `{key}` must be positive, got {x}")
    return x


def _str(value: Any, key: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"type mismatch: `{key}` must be a string, got {value!r}")
    return value


def _expression(text: str, n: int, key: str) -> ExprAst:
    try:
        return parse_defining_function(text, n)
    except ExpressionError as e:
        raise ConfigError(f"invalid expression in `{key}`: {e}") from e


def _complex(value: Any, key: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"type mismatch: `{key}` must be a number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as e:
            raise ConfigError(f"type mismatch: `{key}` is not a complex literal") from e
    raise ConfigError(f"type mismatch: `{key}` must be a number or complex literal")


def _complex_text(value: complex) -> str:
    return repr(complex(value)).strip("()")


def _sampling(table: Mapping[str, Any], n: int) -> SamplingConfig:
    _warn_unknown(table, SamplingConfig.__dataclass_fields__, "sampling")
    defaults = SamplingConfig()
    seed = _int(table.get("seed", defaults.seed), "sampling.seed")
    if not 0 <= seed < 2**64:
        raise ConfigError("invariant violation: sampling.seed must be an unsigned 64-bit integer")
    count = _int(table.get("count", defaults.count), "sampling.count")
    if count <= 0:
        raise ConfigError(f"invariant violation: sampling.count must be positive, got {count}")
    iters = _int(
        table.get("max_newton_iters", defaults.max_newton_iters), "sampling.max_newton_iters"
    )
    if iters <= 0:
        raise ConfigError("invariant violation: sampling.max_newton_iters must be positive")
    anchors_raw = table.get("anchors", [])
    if not isinstance(anchors_raw, list):
        raise ConfigError("type mismatch: sampling.anchors must be a list of points")
    anchors = []
    for k, anchor in enumerate(anchors_raw):
        if not isinstance(anchor, list) or len(anchor) != n:
            raise ConfigError(f"type mismatch: sampling.anchors[{k}] must list {n} coordinates")
        anchors.append(tuple(_complex(c, f"sampling.anchors[{k}]") for c in anchor))
    return SamplingConfig(
        seed=seed,
        count=count,
        newton_tol=_positive(table.get("newton_tol", defaults.newton_tol), "sampling.newton_tol"),
        max_newton_iters=iters,
        box_radius=_positive(table.get("box_radius", defaults.box_radius), "sampling.box_radius"),
        anchors=tuple(anchors),
    )


def _tolerances(table: Mapping[str, Any]) -> Tolerances:
    _warn_unknown(table, Tolerances.__dataclass_fields__, "tolerances")
    defaults = Tolerances()
    return Tolerances(
        null_eig_rel_tol=_positive(
            table.get("null_eig_rel_tol", defaults.null_eig_rel_tol), "tolerances.null_eig_rel_tol"
        ),
        psd_tol=_positive(table.get("psd_tol", defaults.psd_tol), "tolerances.psd_tol"),
        strict_margin=_positive(
            table.get("strict_margin", defaults.strict_margin), "tolerances.strict_margin"
        ),
    )


def _grid(table: Mapping[str, Any], default: GammaGrid, key: str) -> GammaGrid:
    _warn_unknown(table, GammaGrid.__dataclass_fields__, key)
    grid = GammaGrid(
        lo=_real(table.get("lo", default.lo), f"{key}.lo"),
        hi=_real(table.get("hi", default.hi), f"{key}.hi"),
        bisect_tol=_positive(table.get("bisect_tol", default.bisect_tol), f"{key}.bisect_tol"),
    )
    if not grid.lo < grid.hi:
        raise ConfigError(f"invariant violation: {key}.lo must be below {key}.hi")
    return grid


def _oracle(table: Mapping[str, Any]) -> OracleConfig:
    _warn_unknown(table, {"distances", "gamma_grid"}, "oracle")
    defaults = OracleConfig()
    raw = table.get("distances", list(defaults.distances))
    if not isinstance(raw, list) or not raw:
        raise ConfigError("type mismatch: oracle.distances must be a nonempty list")
    distances = tuple(_positive(d, "oracle.distances") for d in raw)
    if any(a <= b for a, b in zip(distances, distances[1:])):
        raise ConfigError("invariant violation: oracle.distances must be strictly decreasing")
    grids = _table(table, "gamma_grid")
    _warn_unknown(grids, {"interior", "exterior"}, "oracle.gamma_grid")
    interior = _grid(_table(grids, "interior"), defaults.interior, "oracle.gamma_grid.interior")
    exterior = _grid(_table(grids, "exterior"), defaults.exterior, "oracle.gamma_grid.exterior")
    if not (0 < interior.lo and interior.hi < 1):
        raise ConfigError("invariant violation: interior gamma grid must lie in (0, 1)")
    if not exterior.lo > 1:
        raise ConfigError("invariant violation: exterior gamma grid must lie above 1")
    return OracleConfig(distances=distances, interior=interior, exterior=exterior)


def _optimizer(table: Mapping[str, Any]) -> OptimizerConfig:
    _warn_unknown(table, OptimizerConfig.__dataclass_fields__, "optimizer")
    defaults = OptimizerConfig()
    budget = _int(table.get("budget", defaults.budget), "optimizer.budget")
    restarts = _int(table.get("restarts", defaults.restarts), "optimizer.restarts")
    objective = _str(table.get("objective", defaults.objective), "optimizer.objective")
    if budget < 1 or restarts < 0:
        raise ConfigError("invariant violation: optimizer budget must be >= 1, restarts >= 0")
    if objective not in ("df", "s"):
        raise ConfigError(f"invariant violation: optimizer.objective must be df or s, got {objective}")
    return OptimizerConfig(budget=budget, restarts=restarts, objective=objective)
