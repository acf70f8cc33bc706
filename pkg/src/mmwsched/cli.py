"""Command-line driver: parse scenario configs, run experiments, persist results."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .channel import ChannelParams
from .geometry import Room
from .rate import RadioParams
from .sched import SchedulerKind
from .sim import (
    ComparisonResult,
    RunResult,
    ScenarioConfig,
    ScenarioError,
    SchedulerSpec,
    SweepCell,
    build_state,
    compare,
    run,
    sweep_ap_count,
    sweep_density,
)

EXIT_OK = 0
EXIT_MISSING_CONFIG = 2
EXIT_MALFORMED = 3
EXIT_SCHEMA = 4
EXIT_INFEASIBLE = 5
EXIT_IO = 6

_ALL_KINDS = (SchedulerKind.CONVENTIONAL, SchedulerKind.ES_JPFS, SchedulerKind.IS_JPFS)


class ConfigError(Exception):
    exit_code = EXIT_SCHEMA


class MissingConfigError(ConfigError):
    exit_code = EXIT_MISSING_CONFIG


class MalformedConfigError(ConfigError):
    exit_code = EXIT_MALFORMED


class SchemaError(ConfigError):
    exit_code = EXIT_SCHEMA


# ---------------------------------------------------------------------------
# Config parsing


def _check_keys(section: dict, allowed: set[str], path: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise SchemaError(f"unknown key '{path}{unknown[0]}'")


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise SchemaError(f"'{name}' must be an object")
    return value


def _positions(value, path: str) -> tuple[tuple[float, float, float], ...]:
    try:
        pts = tuple(tuple(float(c) for c in p) for p in value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'{path}' must be a list of [x, y, z] points") from exc
    if any(len(p) != 3 for p in pts) or not pts:
        raise SchemaError(f"'{path}' must be a non-empty list of [x, y, z] points")
    return pts


def _float(section: dict, key: str, default: float, path: str) -> float:
    value = section.get(key, default)
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'{path}{key}' must be a number") from exc


def _int(section: dict, key: str, default: int, path: str) -> int:
    value = section.get(key, default)
    if isinstance(value, bool):
        raise SchemaError(f"'{path}{key}' must be an integer")
    try:
        as_int = int(value)
        if float(value) != as_int:
            raise ValueError(value)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"'{path}{key}' must be an integer") from exc
    return as_int


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Strictly validate a config document; unknown keys are errors."""
    if not isinstance(doc, dict):
        raise SchemaError("config root must be an object")
    _check_keys(
        doc,
        {"room", "aps", "codebook", "users", "channel", "radio", "scheduler",
         "n_slots", "seed", "es_budget"},
        "",
    )
    room_s = _section(doc, "room")
    _check_keys(room_s, {"length_m", "width_m", "height_m", "ue_height_m"}, "room.")
    aps_s = _section(doc, "aps")
    _check_keys(aps_s, {"positions", "active"}, "aps.")
    cb_s = _section(doc, "codebook")
    _check_keys(cb_s, {"az_beamwidth_deg", "downtilt_deg"}, "codebook.")
    users_s = _section(doc, "users")
    _check_keys(users_s, {"density_per_m2", "positions"}, "users.")
    chan_s = _section(doc, "channel")
    _check_keys(
        chan_s,
        {"tx_power_dbm", "pl_ref_db", "ref_dist_m", "pl_exponent",
         "shadow_sigma_db", "block_prob", "block_loss_db"},
        "channel.",
    )
    radio_s = _section(doc, "radio")
    _check_keys(
        radio_s,
        {"bandwidth_hz", "bw_efficiency", "snr_efficiency", "noise_power_dbm"},
        "radio.",
    )
    sched_s = _section(doc, "scheduler")
    _check_keys(sched_s, {"kind", "delta_th", "epsilon_bps"}, "scheduler.")

    try:
        room = Room(
            length_m=_float(room_s, "length_m", 20.0, "room."),
            width_m=_float(room_s, "width_m", 10.0, "room."),
            height_m=_float(room_s, "height_m", 4.0, "room."),
            ue_height_m=_float(room_s, "ue_height_m", 1.0, "room."),
        )
        ap_positions = (
            _positions(aps_s["positions"], "aps.positions")
            if "positions" in aps_s
            else None
        )
        active = tuple(int(i) for i in aps_s["active"]) if "active" in aps_s else None
        channel = ChannelParams(
            tx_power_dbm=_float(chan_s, "tx_power_dbm", 10.0, "channel."),
            pl_ref_db=_float(chan_s, "pl_ref_db", 68.0, "channel."),
            ref_dist_m=_float(chan_s, "ref_dist_m", 1.0, "channel."),
            pl_exponent=_float(chan_s, "pl_exponent", 2.0, "channel."),
            shadow_sigma_db=_float(chan_s, "shadow_sigma_db", 1.5, "channel."),
            block_prob=_float(chan_s, "block_prob", 0.5, "channel."),
            block_loss_db=_float(chan_s, "block_loss_db", 30.0, "channel."),
        )
        radio = RadioParams(
            bandwidth_hz=_float(radio_s, "bandwidth_hz", 2.16e9, "radio."),
            bw_efficiency=_float(radio_s, "bw_efficiency", 0.6, "radio."),
            snr_efficiency=_float(radio_s, "snr_efficiency", 1.0, "radio."),
            noise_power_dbm=_float(radio_s, "noise_power_dbm", -73.66, "radio."),
        )
        kind_raw = sched_s.get("kind", "is")
        try:
            kind = SchedulerKind(kind_raw)
        except ValueError as exc:
            raise SchemaError(
                f"'scheduler.kind' must be one of conv|es|is, got {kind_raw!r}"
            ) from exc
        scheduler = SchedulerSpec(
            kind=kind,
            delta_th=_float(sched_s, "delta_th", 0.1, "scheduler."),
            epsilon_bps=_float(sched_s, "epsilon_bps", 1e3, "scheduler."),
        )
        if "positions" in users_s and "density_per_m2" in users_s:
            raise SchemaError("'users' must give either density_per_m2 or positions")
        if "positions" in users_s:
            density = None
            ue_positions = _positions(users_s["positions"], "users.positions")
        else:
            density = _float(users_s, "density_per_m2", 0.2, "users.")
            ue_positions = None
        return ScenarioConfig(
            room=room,
            ap_positions=ap_positions,
            active_aps=active,
            az_beamwidth_deg=_float(cb_s, "az_beamwidth_deg", 30.0, "codebook."),
            downtilt_deg=_float(cb_s, "downtilt_deg", 45.0, "codebook."),
            ue_density_per_m2=density,
            ue_positions=ue_positions,
            channel=channel,
            radio=radio,
            scheduler=scheduler,
            n_slots=_int(doc, "n_slots", 500, ""),
            seed=_int(doc, "seed", 0, ""),
            es_budget=_int(doc, "es_budget", 100_000_000, ""),
        )
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def parse_config(path) -> ScenarioConfig:
    """Read and strictly parse a JSON scenario configuration file."""
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError as exc:
        raise MissingConfigError(f"config file not found: {p}") from exc
    except OSError as exc:
        raise MissingConfigError(f"cannot read config file: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def config_to_dict(config: ScenarioConfig) -> dict:
    """Resolved config echo: every default expanded, re-parseable, reproducible."""
    users = (
        {"positions": [list(p) for p in config.ue_positions]}
        if config.ue_positions is not None
        else {"density_per_m2": config.ue_density_per_m2}
    )
    return {
        "room": {
            "length_m": config.room.length_m,
            "width_m": config.room.width_m,
            "height_m": config.room.height_m,
            "ue_height_m": config.room.ue_height_m,
        },
        "aps": {
            "positions": [list(p) for p in config.resolved_ap_positions().tolist()],
            "active": list(config.resolved_active()),
        },
        "codebook": {
            "az_beamwidth_deg": config.az_beamwidth_deg,
            "downtilt_deg": config.downtilt_deg,
        },
        "users": users,
        "channel": {
            "tx_power_dbm": config.channel.tx_power_dbm,
            "pl_ref_db": config.channel.pl_ref_db,
            "ref_dist_m": config.channel.ref_dist_m,
            "pl_exponent": config.channel.pl_exponent,
            "shadow_sigma_db": config.channel.shadow_sigma_db,
            "block_prob": config.channel.block_prob,
            "block_loss_db": config.channel.block_loss_db,
        },
        "radio": {
            "bandwidth_hz": config.radio.bandwidth_hz,
            "bw_efficiency": config.radio.bw_efficiency,
            "snr_efficiency": config.radio.snr_efficiency,
            "noise_power_dbm": config.radio.noise_power_dbm,
        },
        "scheduler": {
            "kind": config.scheduler.kind.value,
            "delta_th": config.scheduler.delta_th,
            "epsilon_bps": config.scheduler.epsilon_bps,
        },
        "n_slots": config.n_slots,
        "seed": config.seed,
        "es_budget": config.es_budget,
    }


# ---------------------------------------------------------------------------
# Results emission


def _fmt(value) -> str:
    """CSV cell: NA for absent, 9 significant digits for floats."""
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".9g")


def _density_of(result: RunResult) -> float:
    return result.n_ues / result.config.room.floor_area_m2


def _summary_row(result: RunResult) -> list[str]:
    m = result.metrics
    return [
        result.config.scheduler.kind.value,
        str(result.n_active),
        str(result.n_ues),
        _fmt(_density_of(result)),
        str(result.config.seed),
        _fmt(m.total_rate_gbps),
        _fmt(m.spatial_reuse),
        _fmt(m.fairness_index),
        str(m.complexity_switchings),
        _fmt(m.alpha_mean),
    ]


_SUMMARY_HEADER = (
    "scheduler,m_active,n_ues,density_per_m2,seed,"
    "total_rate_gbps,rho,fairness_index,complexity,alpha_mean"
)


def _write_text(path: Path, text: str) -> None:
    path.write_text(text)


def write_summary(rows: list[list[str]], out_dir: Path) -> None:
    lines = [_SUMMARY_HEADER] + [",".join(r) for r in rows]
    _write_text(out_dir / "summary.csv", "\n".join(lines) + "\n")


def result_to_dict(result: RunResult) -> dict:
    m = result.metrics
    c = result.complexity
    doc = {
        "config": config_to_dict(result.config),
        "derived": {
            "n_ues": result.n_ues,
            "n_active_aps": result.n_active,
            "n_beams": result.n_beams,
            "density_per_m2": _density_of(result),
        },
        "metrics": {
            "total_rate_gbps": m.total_rate_gbps,
            "spatial_reuse": m.spatial_reuse,
            "fairness_index": m.fairness_index,
            "complexity_switchings": m.complexity_switchings,
            "alpha_mean": m.alpha_mean,
            "per_user_rate_bps": [float(x) for x in m.per_user_rate_bps],
        },
        "complexity": {
            "measured_switchings": c.measured_switchings,
            "conventional_formula": c.conventional_formula,
            "es_formula_per_slot": c.es_formula_per_slot,
            "es_formula_total": c.es_formula_total,
            "is_iterations": c.is_iterations,
            "alpha_mean": c.alpha_mean,
        },
    }
    if result.trace is not None:
        doc["trace"] = [
            {
                "slot": t.slot,
                "links": [list(l) if l is not None else None for l in t.links],
                "sum_rate_bps": t.sum_rate_bps,
                "objective": t.objective,
                "alpha": t.alpha,
            }
            for t in result.trace
        ]
    return doc


def write_run_json(result: RunResult, out_dir: Path, run_id: str) -> None:
    _write_text(
        out_dir / f"run-{run_id}.json",
        json.dumps(result_to_dict(result), indent=2, sort_keys=True) + "\n",
    )


_PLOT_METRICS = {
    "rate": lambda r: r.metrics.total_rate_gbps,
    "reuse": lambda r: r.metrics.spatial_reuse,
    "fairness": lambda r: r.metrics.fairness_index,
    "complexity": lambda r: r.metrics.complexity_switchings,
}


def write_plot_csvs(
    cells: list[SweepCell],
    schedulers: Sequence[SchedulerKind],
    x_name: str,
    out_dir: Path,
    metrics: Sequence[str],
) -> None:
    """One plot-ready CSV per metric: x column plus one column per scheduler."""
    xs = sorted({c.x for c in cells})
    by_key = {(c.x, c.scheduler): c for c in cells}
    for metric in metrics:
        getter = _PLOT_METRICS[metric]
        lines = [",".join([x_name] + [k.value for k in schedulers])]
        for x in xs:
            row = [_fmt(x)]
            for kind in schedulers:
                cell = by_key.get((x, kind))
                if cell is None or cell.result is None:
                    row.append("NA")
                else:
                    row.append(_fmt(getter(cell.result)))
            lines.append(",".join(row))
        _write_text(out_dir / f"plot-{metric}.csv", "\n".join(lines) + "\n")


def write_infeasible_notes(cells: list[SweepCell], x_name: str, out_dir: Path) -> None:
    notes = [
        f"{x_name}={_fmt(c.x)} scheduler={c.scheduler.value}: "
        f"predicted {c.infeasible_cost} beam switchings per slot exceeds the "
        f"enumeration budget; cell reported NA"
        for c in cells
        if c.result is None
    ]
    if notes:
        _write_text(out_dir / "infeasible-notes.txt", "\n".join(notes) + "\n")


def write_compare_csv(result: ComparisonResult, out_dir: Path) -> None:
    header = (
        "label,total_rate_gbps,spatial_reuse,fairness_index,"
        "alpha_mean,complexity_switchings"
    )
    lines = [header]
    for kind, values in result.means.items():
        lines.append(
            ",".join(
                [f"mean:{kind.value}"]
                + [
                    _fmt(values[m])
                    for m in (
                        "total_rate_gbps",
                        "spatial_reuse",
                        "fairness_index",
                        "alpha_mean",
                        "complexity_switchings",
                    )
                ]
            )
        )
    for label, values in result.ratios.items():
        lines.append(
            ",".join(
                [f"ratio:{label}"]
                + [_fmt(values[m]) for m in ("total_rate_gbps", "spatial_reuse", "fairness_index")]
                + ["NA", "NA"]
            )
        )
    for kind, cost in result.infeasible.items():
        lines.append(f"infeasible:{kind.value},{cost},NA,NA,NA,NA")
    _write_text(out_dir / "compare.csv", "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Commands


def _prepare_out(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    probe = path / ".write-probe"
    probe.write_text("")
    probe.unlink()
    return path


def _apply_overrides(config: ScenarioConfig, args) -> ScenarioConfig:
    from dataclasses import replace

    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


def _selected_kinds(args) -> list[SchedulerKind]:
    if args.scheduler:
        return [SchedulerKind(s) for s in args.scheduler]
    return list(_ALL_KINDS)


def cmd_run(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    if args.scheduler:
        from dataclasses import replace

        config = replace(
            config,
            scheduler=replace(config.scheduler, kind=SchedulerKind(args.scheduler[0])),
        )
    out = _prepare_out(args.out)
    result = run(config, collect_trace=args.trace)
    kind = config.scheduler.kind.value
    write_summary([_summary_row(result)], out)
    write_run_json(result, out, f"{kind}-seed{config.seed}")
    print(f"run complete: {out / 'summary.csv'}")
    return EXIT_OK


def _na_row(cell: SweepCell) -> list[str]:
    cfg = cell.config
    return [
        cell.scheduler.value,
        str(len(cfg.resolved_active())),
        str(cfg.resolved_n_ues()),
        _fmt(cfg.resolved_n_ues() / cfg.room.floor_area_m2),
        str(cfg.seed),
        "NA",
        "NA",
        "NA",
        "NA",
        "NA",
    ]


def _emit_sweep(
    cells: list[SweepCell],
    kinds: Sequence[SchedulerKind],
    x_name: str,
    out: Path,
    metrics: Sequence[str],
) -> None:
    rows = [
        _summary_row(c.result) if c.result is not None else _na_row(c) for c in cells
    ]
    write_summary(rows, out)
    for cell in cells:
        if cell.result is not None:
            write_run_json(
                cell.result,
                out,
                f"{cell.scheduler.value}-{x_name}{format(cell.x, 'g')}-seed{cell.result.config.seed}",
            )
    write_plot_csvs(cells, kinds, x_name, out, metrics)
    write_infeasible_notes(cells, x_name, out)


def cmd_sweep_aps(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    kinds = _selected_kinds(args)
    counts = [int(c) for c in args.counts.split(",")] if args.counts else None
    if counts is None:
        counts = list(range(1, config.resolved_ap_positions().shape[0] + 1))
    out = _prepare_out(args.out)
    cells = sweep_ap_count(config, counts, kinds, collect_trace=args.trace)
    _emit_sweep(cells, kinds, "aps", out, ("rate", "reuse", "fairness", "complexity"))
    print(f"sweep-aps complete: {len(cells)} cells -> {out}")
    return EXIT_OK


def cmd_sweep_density(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    kinds = _selected_kinds(args)
    densities = (
        [float(d) for d in args.densities.split(",")]
        if args.densities
        else [0.2, 0.5, 1.0, 1.5, 2.0]
    )
    out = _prepare_out(args.out)
    cells = sweep_density(config, densities, kinds, collect_trace=args.trace)
    _emit_sweep(cells, kinds, "density", out, ("rate", "reuse", "fairness"))
    print(f"sweep-density complete: {len(cells)} cells -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    kinds = _selected_kinds(args)
    seeds = list(range(config.seed, config.seed + args.num_seeds))
    out = _prepare_out(args.out)
    result = compare(config, kinds, seeds)
    rows = [
        _summary_row(result.runs[(kind, seed)])
        for kind in kinds
        if kind not in result.infeasible
        for seed in seeds
    ]
    write_summary(rows, out)
    for (kind, seed), r in sorted(result.runs.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        write_run_json(r, out, f"{kind.value}-seed{seed}")
    write_compare_csv(result, out)
    print(f"compare complete: {len(result.runs)} runs -> {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    build_state(config)  # raises ScenarioError on infeasibility
    print(json.dumps(config_to_dict(config), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mmwsched",
        description=(
            "Seeded simulator for multi-AP 60 GHz WLAN concurrent transmission "
            "under conventional, exhaustive-search, and iterative-search "
            "proportional-fair scheduling."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True, help="scenario config JSON")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument(
            "--scheduler",
            action="append",
            choices=[k.value for k in _ALL_KINDS],
            help="scheduler filter; repeatable",
        )
        p.add_argument("--trace", action="store_true", help="keep per-slot traces")

    p_run = sub.add_parser("run", help="execute one run")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_aps = sub.add_parser("sweep-aps", help="sweep the active AP count at density 1/m^2")
    common(p_aps)
    p_aps.add_argument("--counts", default=None, help="comma list of AP counts")
    p_aps.set_defaults(func=cmd_sweep_aps)

    p_den = sub.add_parser("sweep-density", help="sweep the user density")
    common(p_den)
    p_den.add_argument("--densities", default=None, help="comma list of densities")
    p_den.set_defaults(func=cmd_sweep_density)

    p_cmp = sub.add_parser("compare", help="compare schedulers across seeds")
    common(p_cmp)
    p_cmp.add_argument("--num-seeds", type=int, default=5, help="seeds per scheduler")
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="parse a config and echo it resolved")
    common(p_val, needs_out=False)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ScenarioError as exc:
        print(f"error: infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
