"""Command execution for the batch front-end.

A run turns a RunConfig into two artifacts in the output directory: a CSV
trace (``n,value`` rows) and a ``key = value`` summary ending with the
config echo. Both are written atomically and carry nothing that varies
between identical runs.
"""

import csv
import inspect
import io
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable, Optional

try:
    from . import config
    from .convergence import DetectParams, Outcome, limit_outcome
    from .criteria import (CriterionReport, criterion_bvA, criterion_cA, criterion_lA,
                           criterion_linfA, criterion_wedge, section_test, zeta_image_test)
    from .errors import ConfigError
    from .families import build_matrix, build_schedule, build_sequence
    from .harness import SUITES, SuiteReport
    from .matrices import characteristic, classify
    from .sequences import deferred_mean
    from .spaces import SPACES_BY_NAME, member_sigma_pq_s
    from .validator import Validator
except ImportError:
    import config
    from convergence import DetectParams, Outcome, limit_outcome
    from criteria import (CriterionReport, criterion_bvA, criterion_cA, criterion_lA,
                          criterion_linfA, criterion_wedge, section_test, zeta_image_test)
    from errors import ConfigError
    from families import build_matrix, build_schedule, build_sequence
    from harness import SUITES, SuiteReport
    from matrices import characteristic, classify
    from sequences import deferred_mean
    from spaces import SPACES_BY_NAME, member_sigma_pq_s
    from validator import Validator

logger = logging.getLogger(__name__)

COMMANDS = ("mean", "test-sum", "check-conull", "section-test", "verify", "report")
CRITERIA = ("c", "l", "bv", "linf", "wedge", "zeta")
DEFAULT_SCHEDULE = "cesaro"

EXIT_BY_OUTCOME = {
    Outcome.HOLDS: config.EXIT_OK,
    Outcome.FAILS: config.EXIT_FAILS,
    Outcome.INCONCLUSIVE: config.EXIT_INCONCLUSIVE,
}


@dataclass(frozen=True)
class RunConfig:
    """One batch run. Unset numeric fields fall back to the preset of the command."""
    command: str
    schedule: Optional[str] = None
    schedule_params: str = ""
    matrix: str = "identity"
    matrix_params: str = ""
    sequence: str = "alternating"
    sequence_params: str = ""
    space: str = "c"
    criterion: str = "c"
    suite: str = "ksi"
    tol: Optional[float] = None
    window: Optional[int] = None
    horizon: Optional[int] = None
    trunc: int = config.DEFAULT_TRUNC
    i_horizon: Optional[int] = None
    seed: int = 0
    trials: Optional[int] = None
    out: str = config.DEFAULT_OUT_DIR

    def echo(self) -> list[tuple[str, str]]:
        """Sorted ``config.<field>`` pairs; the output directory is left out."""
        items = asdict(self)
        items.pop("out")
        return sorted((f"config.{name.replace('_', '-')}", "default" if value is None else str(value))
                      for name, value in items.items())


def _positive_int(value: str) -> tuple[bool, str]:
    return Validator.validate_positive_int(value)


FIELD_RULES: dict[str, tuple[Callable[[str], tuple[bool, str]], Callable[[str], object]]] = {
    "command": (lambda v: Validator.validate_choice(v, COMMANDS), str),
    "space": (lambda v: Validator.validate_choice(v, SPACES_BY_NAME), str),
    "criterion": (lambda v: Validator.validate_choice(v, CRITERIA), str),
    "suite": (lambda v: Validator.validate_choice(v, SUITES), str),
    "tol": (Validator.validate_positive_float, float),
    "window": (_positive_int, int),
    "horizon": (_positive_int, int),
    "trunc": (_positive_int, int),
    "i_horizon": (_positive_int, int),
    "trials": (_positive_int, int),
    "seed": (Validator.validate_non_negative_int, int),
}


def config_from_mapping(raw: dict[str, str]) -> RunConfig:
    """Validate raw string settings (keys in flag spelling) into a RunConfig.

    Raises:
        ConfigError: naming the first unknown or invalid field.
    """
    known = {f.name for f in fields(RunConfig)}
    values: dict[str, object] = {}
    for key, value in raw.items():
        name = key.strip().replace("-", "_")
        if name not in known:
            raise ConfigError(key, "unknown setting")
        value = value.strip()
        if name in FIELD_RULES:
            check, convert = FIELD_RULES[name]
            ok, error = check(value)
            if not ok:
                raise ConfigError(key, error)
            values[name] = convert(value)
        else:
            values[name] = value
    if "command" not in values:
        raise ConfigError("command", "Invalid: value required")
    return RunConfig(**values)


def read_config_file(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; later keys override earlier ones."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        ok, error = Validator.validate_config_line(line)
        if not ok:
            raise ConfigError("config", f"line {lineno}: {error}")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    return raw


def format_value(value) -> str:
    """Decimal text with TRACE_DIGITS significant digits."""
    digits = config.TRACE_DIGITS
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, complex):
        if value.imag == 0:
            return format(value.real, f".{digits}g")
        return f"{value.real:.{digits}g}{value.imag:+.{digits}g}j"
    try:
        return format(float(value), f".{digits}g")
    except (TypeError, ValueError):
        return str(value)


@dataclass
class RunResult:
    """What a command produced, before it is written out."""
    header: tuple[str, str]
    rows: list
    summary: list
    exit_code: int


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_trace(result: RunResult) -> str:
    """CSV text of the trace, values at TRACE_DIGITS significant digits."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result.header)
    for n, value in result.rows:
        writer.writerow((n, format_value(value)))
    return buffer.getvalue()


def render_summary(result: RunResult, cfg: RunConfig) -> str:
    """key = value lines: the result first, then the config echo."""
    lines = [f"{key} = {value if isinstance(value, str) else format_value(value)}"
             for key, value in result.summary]
    lines += [f"{key} = {value}" for key, value in cfg.echo()]
    return "\n".join(lines) + "\n"


def write_artifacts(result: RunResult, cfg: RunConfig) -> tuple[Path, Path]:
    """Write trace.csv and summary.txt, each through a temp file and os.replace."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path, summary_path = out / config.TRACE_FILE, out / config.SUMMARY_FILE
    _write_atomic(trace_path, render_trace(result))
    _write_atomic(summary_path, render_summary(result, cfg))
    logger.info("wrote %s and %s", trace_path, summary_path)
    return trace_path, summary_path


def _overrides(cfg: RunConfig) -> dict:
    return {k: v for k, v in (("tol", cfg.tol), ("window", cfg.window), ("horizon", cfg.horizon))
            if v is not None}


def _membership_params(cfg: RunConfig) -> DetectParams:
    return DetectParams.for_membership(**_overrides(cfg))


def _criterion_params(cfg: RunConfig) -> DetectParams:
    return DetectParams.for_criteria(**_overrides(cfg))


def _schedule(cfg: RunConfig, horizon: int):
    return build_schedule(cfg.schedule or DEFAULT_SCHEDULE, cfg.schedule_params, horizon)


def _check_window(params: DetectParams) -> None:
    if params.window < 2:
        raise ConfigError("window", "Invalid: must be at least 2")
    if params.horizon < params.window:
        raise ConfigError("horizon", f"Invalid: must be at least the window ({params.window})")


def _verdict_lines(verdict) -> list:
    return [
        ("verdict", verdict.status.value),
        ("limit", verdict.limit),
        ("residual", verdict.residual),
        ("tolerance", verdict.tolerance),
        ("notes", "; ".join(verdict.notes) or "none"),
    ]


def run_mean(cfg: RunConfig) -> RunResult:
    """Trace of (D_{p,q} x)_n and its limit verdict."""
    params = _membership_params(cfg)
    _check_window(params)
    x = build_sequence(cfg.sequence, cfg.sequence_params)
    d = _schedule(cfg, params.horizon)
    verdict = params.detect(deferred_mean(x, d))
    summary = [("command", cfg.command), ("sequence", x.name), ("schedule", d.describe()),
               ("outcome", limit_outcome(verdict).value)] + _verdict_lines(verdict)
    return RunResult(("n", "value"), list(verdict.trace), summary, EXIT_BY_OUTCOME[limit_outcome(verdict)])


def run_test_sum(cfg: RunConfig) -> RunResult:
    """Membership of x in sigma_p^q[s]: trace of the deferred means of its partial sums."""
    params = _membership_params(cfg)
    _check_window(params)
    x = build_sequence(cfg.sequence, cfg.sequence_params)
    d = _schedule(cfg, params.horizon)
    verdict = member_sigma_pq_s(x, d, params)
    summary = [("command", cfg.command), ("sequence", x.name), ("schedule", d.describe()),
               ("space", f"sigma[{d.describe()}]"),
               ("outcome", limit_outcome(verdict).value)] + _verdict_lines(verdict)
    return RunResult(("n", "value"), list(verdict.trace), summary, EXIT_BY_OUTCOME[limit_outcome(verdict)])


def _criterion_summary(cfg: RunConfig, report: CriterionReport, A) -> list:
    summary = [("command", cfg.command), ("criterion", report.label), ("matrix", report.matrix),
               ("schedule", report.schedule), ("outcome", report.outcome.value)]
    summary += _verdict_lines(report.verdict)
    summary += [("regime", report.regime or "none"),
                ("criterion-notes", "; ".join(report.notes) or "none"),
                ("matrix-class", classify(A)),
                ("matrix-characteristic", characteristic(A))]
    for part in report.parts:
        summary.append((f"part.{part.criterion.value}", part.outcome.value))
    for eps, length, worst, holds in report.table:
        summary.append((f"table.eps={format_value(eps)}.L={length}",
                        f"{format_value(worst)} {'holds' if holds else 'fails'}"))
    return summary


def run_check_conull(cfg: RunConfig) -> RunResult:
    """Conullity criterion for the chosen domain; trace of T_n."""
    params = _criterion_params(cfg)
    _check_window(params)
    A = build_matrix(cfg.matrix, cfg.matrix_params)
    d = _schedule(cfg, params.horizon)
    kind = cfg.criterion
    if kind == "c":
        report = criterion_cA(A, d, params, cfg.i_horizon)
    elif kind == "l":
        report = criterion_lA(A, d, params, cfg.i_horizon)
    elif kind == "bv":
        report = criterion_bvA(A, d, params, cfg.i_horizon)
    elif kind == "linf":
        if params.horizon < max(config.LINF_LENGTHS):
            raise ConfigError("horizon", f"Invalid: the linf criterion samples subsequences of length "
                                         f"{max(config.LINF_LENGTHS)}; horizon must be at least that")
        report = criterion_linfA(A, d, params, cfg.i_horizon, seed=cfg.seed)
    elif kind == "wedge":
        report = criterion_wedge(SPACES_BY_NAME[cfg.space], A, d, params, cfg.i_horizon)
    else:
        report = zeta_image_test(SPACES_BY_NAME[cfg.space], A, d, params, cfg.i_horizon)
    return RunResult(("n", "T_n"), list(report.trace), _criterion_summary(cfg, report, A),
                     EXIT_BY_OUTCOME[report.outcome])


def run_section_test(cfg: RunConfig) -> RunResult:
    """Strong deferred section test of z in Y_A; trace of T_n."""
    params = _criterion_params(cfg)
    _check_window(params)
    A = build_matrix(cfg.matrix, cfg.matrix_params)
    z = build_sequence(cfg.sequence, cfg.sequence_params)
    d = _schedule(cfg, params.horizon)
    report = section_test(SPACES_BY_NAME[cfg.space], A, z, d, params, cfg.i_horizon)
    summary = _criterion_summary(cfg, report, A)
    summary.insert(2, ("sequence", z.name))
    return RunResult(("n", "T_n"), list(report.trace), summary, EXIT_BY_OUTCOME[report.outcome])


def _suite_kwargs(name: str, cfg: RunConfig) -> dict:
    accepted = inspect.signature(SUITES[name]).parameters
    kwargs = {}
    if "seed" in accepted:
        kwargs["seed"] = cfg.seed
    if "trials" in accepted and cfg.trials is not None:
        kwargs["trials"] = cfg.trials
    if "tol" in accepted and cfg.tol is not None:
        kwargs["tol"] = cfg.tol
    if "horizon" in accepted and cfg.horizon is not None:
        kwargs["horizon"] = cfg.horizon
    # agnew-reverse names its schedule p
    target = next((key for key in ("d", "p") if key in accepted), None)
    if target and cfg.schedule is not None:
        kwargs[target] = build_schedule(cfg.schedule, cfg.schedule_params)
    return kwargs


def _suite_lines(report: SuiteReport, prefix: str) -> list:
    lines = [(f"{prefix}outcome", report.outcome.value),
             (f"{prefix}passed", report.passed),
             (f"{prefix}failed", report.failed),
             (f"{prefix}excluded", report.excluded),
             (f"{prefix}notes", "; ".join(report.notes) or "none")]
    failures = [c for c in report.cases if not c.passed and not c.excluded]
    for index, case in enumerate(failures, start=1):
        lines.append((f"{prefix}failure.{index}", f"{case.name}: {case.detail}"))
    return lines


def run_verify(cfg: RunConfig) -> RunResult:
    """One suite; the trace marks each non-excluded case 1 (passed) or 0 (failed)."""
    report = SUITES[cfg.suite](**_suite_kwargs(cfg.suite, cfg))
    rows = [(n, 1 if case.passed else 0)
            for n, case in enumerate((c for c in report.cases if not c.excluded), start=1)]
    summary = [("command", cfg.command), ("suite", report.name)] + _suite_lines(report, "")
    return RunResult(("n", "passed"), rows, summary, EXIT_BY_OUTCOME[report.outcome])


def run_report(cfg: RunConfig) -> RunResult:
    """Every suite in turn; the trace holds the passed count per suite."""
    rows, summary = [], [("command", cfg.command)]
    outcomes = []
    for n, name in enumerate(SUITES, start=1):
        report = SUITES[name](**_suite_kwargs(name, cfg))
        outcomes.append(report.outcome)
        rows.append((n, report.passed))
        summary += _suite_lines(report, f"suite.{name}.")
    if Outcome.FAILS in outcomes:
        overall = Outcome.FAILS
    elif Outcome.INCONCLUSIVE in outcomes:
        overall = Outcome.INCONCLUSIVE
    else:
        overall = Outcome.HOLDS
    summary.insert(1, ("outcome", overall.value))
    return RunResult(("n", "passed"), rows, summary, EXIT_BY_OUTCOME[overall])


HANDLERS: dict[str, Callable[[RunConfig], RunResult]] = {
    "mean": run_mean,
    "test-sum": run_test_sum,
    "check-conull": run_check_conull,
    "section-test": run_section_test,
    "verify": run_verify,
    "report": run_report,
}


def run(cfg: RunConfig) -> int:
    """Execute a run and write its artifacts; return the exit status.

    Raises:
        ConfigError: on unknown ids, invalid schedules or out-of-range values.
    """
    config.thread_limit()
    logger.info("running %s", cfg.command)
    result = HANDLERS[cfg.command](cfg)
    write_artifacts(result, cfg)
    logger.info("%s finished with exit status %d", cfg.command, result.exit_code)
    return result.exit_code
