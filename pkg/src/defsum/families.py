"""Named sequence, schedule and matrix families addressable from a run configuration.

Parameters arrive as ``key=value`` pairs separated by commas; list values use
``;`` between items and matrix tables use ``|`` between rows, e.g.
``values=1;-1;0.5`` or ``rows=1;0|0.5;0.5``.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

try:
    from . import matrices, sequences
    from .errors import ConfigError
except ImportError:
    import matrices
    import sequences
    from errors import ConfigError

logger = logging.getLogger(__name__)


def parse_params(text: str, field_name: str) -> dict[str, str]:
    """Split ``a=1,b=2`` into {"a": "1", "b": "2"}.

    Raises:
        ConfigError: on a pair without ``=``, an empty key or a repeated key.
    """
    params: dict[str, str] = {}
    if not text or not text.strip():
        return params
    for pair in text.split(","):
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(field_name, f"expected key=value, got {pair.strip()!r}")
        if key in params:
            raise ConfigError(field_name, f"parameter {key!r} given twice")
        params[key] = value.strip()
    return params


def _float(text: str) -> float:
    return float(text)


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(item) for item in text.split(";") if item.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(_int(item) for item in text.split(";") if item.strip())


def _rows(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_floats(row) for row in text.split("|"))


def _text(text: str) -> str:
    return text


@dataclass(frozen=True)
class Family:
    """A factory plus its accepted parameters: name -> (converter, default)."""
    build: Callable
    params: dict = field(default_factory=dict)
    passthrough: bool = False   # unrecognised keys go to the factory as raw strings

    def convert(self, raw: dict[str, str], field_name: str) -> dict:
        kwargs = {name: default for name, (_, default) in self.params.items()}
        extra = {}
        for key, value in raw.items():
            if key not in self.params:
                if self.passthrough:
                    extra[key] = value
                    continue
                known = ", ".join(sorted(self.params)) or "none"
                raise ConfigError(f"{field_name}-params", f"unknown parameter {key!r} (accepted: {known})")
            converter, _ = self.params[key]
            try:
                kwargs[key] = converter(value)
            except ValueError as exc:
                raise ConfigError(f"{field_name}-params", f"{key}: {exc}") from exc
        missing = [name for name, value in kwargs.items() if value is None]
        if missing:
            raise ConfigError(f"{field_name}-params", f"missing parameter(s): {', '.join(missing)}")
        if extra:
            kwargs["extra"] = extra
        return kwargs


def _build(registry: dict[str, Family], kind: str, name: str, params: str, field_name: str):
    family = registry.get(name)
    if family is None:
        raise ConfigError(field_name, f"unknown {kind} {name!r} (choose from {', '.join(sorted(registry))})")
    kwargs = family.convert(parse_params(params, f"{field_name}-params"), field_name)
    try:
        built = family.build(**kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(field_name, str(exc)) from exc
    logger.debug("built %s %s(%s)", kind, name, params)
    return built


def _impulse(j: int) -> sequences.Seq:
    if j < 1:
        raise ValueError(f"impulse index must be >= 1, got {j}")
    return sequences.unit(j)


SEQUENCE_FAMILIES = {
    "constant": Family(sequences.constant, {"c": (_float, 1.0)}),
    "alternating": Family(sequences.alternating),
    "harmonic-power": Family(sequences.harmonic_power, {"s": (_float, 2.0)}),
    "impulse": Family(_impulse, {"j": (_int, 1)}),
    "random": Family(sequences.random_decay, {"seed": (_int, 0), "decay": (_float, 0.5)}),
    "table": Family(lambda values: sequences.from_table(values, "table"), {"values": (_floats, None)}),
    "periodic": Family(lambda pattern: sequences.periodic(pattern, f"periodic({len(pattern)})"),
                       {"pattern": (_floats, None)}),
    "geometric": Family(sequences.geometric,
                        {"coefficient": (_float, 1.0), "ratio": (_float, 0.5), "offset": (_float, 0.0)}),
}

SCHEDULE_FAMILIES = {
    "cesaro": Family(sequences.cesaro_schedule),
    "block": Family(sequences.block_schedule),
    "poly": Family(sequences.poly_schedule, {"a": (_float, 1.0), "b": (_float, 2.0)}),
    "sliding": Family(sequences.sliding_schedule, {"length": (_int, 1)}),
    "custom-table": Family(lambda p, q: sequences.table_schedule(p, q), {"p": (_ints, None), "q": (_ints, None)}),
}


def _deferred_mean_matrix(schedule: str = "cesaro", extra: Optional[dict] = None) -> matrices.InfiniteMatrix:
    params = ",".join(f"{k}={v}" for k, v in (extra or {}).items())
    d = _build(SCHEDULE_FAMILIES, "schedule", schedule, params, "matrix")
    return matrices.DeferredMeanMatrix(d)


def _weighted_mean_matrix(power: float) -> matrices.InfiniteMatrix:
    return matrices.WeightedMean(matrices.power_weights(power))


def _table_matrix(rows: tuple) -> matrices.InfiniteMatrix:
    if any(not row for row in rows):
        raise ValueError("matrix table rows must not be empty")
    return matrices.UserTable(rows, "table")


MATRIX_FAMILIES = {
    "identity": Family(matrices.Identity),
    "cesaro": Family(matrices.CesaroC1),
    "difference": Family(matrices.Difference),
    "zweier": Family(matrices.Zweier, {"alpha": (_float, 0.5)}),
    "shift-left": Family(matrices.ShiftLeft),
    "deferred-mean": Family(_deferred_mean_matrix, {"schedule": (_text, "cesaro")}, passthrough=True),
    "weighted-mean": Family(_weighted_mean_matrix, {"power": (_float, 1.0)}),
    "table": Family(_table_matrix, {"rows": (_rows, None)}),
    "zero": Family(matrices.zero_matrix),
}


def build_sequence(name: str, params: str = "") -> sequences.Seq:
    return _build(SEQUENCE_FAMILIES, "sequence", name, params, "sequence")


def build_schedule(name: str, params: str = "", horizon: Optional[int] = None) -> sequences.DefermentSchedule:
    """Build a schedule and check p(n) < q(n) on [1, horizon]."""
    d = _build(SCHEDULE_FAMILIES, "schedule", name, params, "schedule")
    try:
        d.validate(horizon)
    except ValueError as exc:
        raise ConfigError("schedule", str(exc)) from exc
    return d if horizon is None else d.with_horizon(horizon)


def build_matrix(name: str, params: str = "") -> matrices.InfiniteMatrix:
    return _build(MATRIX_FAMILIES, "matrix", name, params, "matrix")
