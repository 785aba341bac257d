"""Trial batches, time decomposition, success-rate metrics, JSONL logs,
CSV/plain-text reports.

All timers are stored as integer tick counts (dt seconds per tick), which
makes the time decompositions exactly additive and log files bit-stable.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

from .fsm import TrialEvent, classify_failure
from .operators import OperatorParams, ScriptedOperator
from .scene import SceneConfig
from .session import ExchangeSession, MechanismConfig

DEFAULT_TICK_BUDGET = 60_000  # 600 s of sim time at dt = 10 ms

# phase-entry pairs defining each timer, per task side
_DETACH_SPANS = (
    ("t_move_return", "returning", "inserting"),
    ("t_trigger_release", "inserting", "release_triggered"),
    ("t_withdraw", "release_triggered", "detached"),
)
_ATTACH_SPANS = (
    ("t_align", "aligning", "feeding"),
    ("t_feed", "feeding", "mouth_contact"),
    ("t_lock", "mouth_contact", "locked"),
)


@dataclass
class PhaseTimers:
    """Tick counts per sub-phase; aggregates are sums by construction."""

    ticks: dict[str, int] = field(default_factory=dict)
    dt: float = 0.01

    def seconds(self, name: str) -> float | None:
        t = self.ticks.get(name)
        return None if t is None else t * self.dt

    def _aggregate(self, parts: tuple[str, ...], name: str) -> None:
        if all(p in self.ticks for p in parts):
            self.ticks[name] = sum(self.ticks[p] for p in parts)

    def finalize(self) -> None:
        self._aggregate(("t_move_return", "t_trigger_release", "t_withdraw"),
                        "t_unload")
        self._aggregate(("t_align", "t_feed", "t_lock"), "t_install")
        self._aggregate(("t_unload", "t_install"), "t_exchange")


@dataclass
class TrialRecord:
    trial_index: int
    task: str
    operator: str
    seed: int
    outcome: str  # "success" | failure mode value | "timeout"
    timers: PhaseTimers
    macro_transit_ticks: int = 0
    events: list[TrialEvent] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.outcome == "success"

    def to_json(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "task": self.task,
            "operator": self.operator,
            "seed": self.seed,
            "outcome": self.outcome,
            "dt": self.timers.dt,
            "timers_ticks": self.timers.ticks,
            "macro_transit_ticks": self.macro_transit_ticks,
            "events": [e.to_json() for e in self.events],
        }

    @classmethod
    def from_json(cls, d: dict) -> "TrialRecord":
        return cls(
            trial_index=int(d["trial_index"]),
            task=str(d["task"]),
            operator=str(d["operator"]),
            seed=int(d["seed"]),
            outcome=str(d["outcome"]),
            timers=PhaseTimers(
                ticks={k: int(v) for k, v in d["timers_ticks"].items()},
                dt=float(d["dt"])),
            macro_transit_ticks=int(d.get("macro_transit_ticks", 0)),
            events=[TrialEvent.from_json(e) for e in d.get("events", [])],
        )


@dataclass
class BatchSummary:
    n_total: int
    n_fail: int
    p_success: float
    mean_timers_s: dict[str, float]
    std_timers_s: dict[str, float]
    failure_counts: dict[str, int]
    rounds_to_baseline: int | None = None


def success_rate(n_fail: int, n_total: int) -> float:
    """Success percentage over a planned batch."""
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    if not 0 <= n_fail <= n_total:
        raise ValueError("need 0 <= n_fail <= n_total")
    return 100.0 * (n_total - n_fail) / n_total


def _timers_from_events(events: list[TrialEvent], dt: float) -> PhaseTimers:
    marks: dict[str, int] = {}
    for ev in events:
        if ev.kind == "phase":
            marks.setdefault(ev.payload["phase"], ev.tick)
        elif ev.kind == "mech" and ev.payload.get("outcome") == "mouth_contact":
            marks.setdefault("mouth_contact", ev.tick)
    timers = PhaseTimers(dt=dt)
    for name, start, end in _DETACH_SPANS + _ATTACH_SPANS:
        if start in marks and end in marks:
            timers.ticks[name] = marks[end] - marks[start]
    timers.finalize()
    return timers


def run_trial(task: str, params: OperatorParams, seed: int,
              trial_index: int = 1, scene_cfg: SceneConfig | None = None,
              mech: MechanismConfig | None = None,
              tick_budget: int = DEFAULT_TICK_BUDGET) -> TrialRecord:
    """One headless trial through the in-process session loop.

    The trial clock starts at the first nonzero command (the first
    movement phase entry), so leading idle ticks never count.
    """
    scene_cfg = scene_cfg or SceneConfig()
    session = ExchangeSession(task, scene_cfg, mech)
    policy = ScriptedOperator(params, task, trial_index=trial_index,
                              seed=seed, slot_depth_mm=scene_cfg.slot_depth_mm,
                              dt=scene_cfg.dt)
    update = session.state_update([], full=True)
    while not session.done and session.scene.tick < tick_budget:
        cmd = policy.next_command(update)
        events = session.step(cmd)
        update = session.state_update(events, full=False)

    failure = classify_failure(session.events)
    if failure is not None:
        outcome = failure.value
    elif session.fsm.task_complete:
        outcome = "success"
    else:
        outcome = "timeout"
    return TrialRecord(
        trial_index=trial_index,
        task=task,
        operator=params.label,
        seed=seed,
        outcome=outcome,
        timers=_timers_from_events(session.events, scene_cfg.dt),
        macro_transit_ticks=policy.macro_ticks_total,
        events=session.events,
    )


def trial_seed(batch_seed: int, trial_index: int) -> int:
    return batch_seed * 1_000_003 + trial_index


def run_batch(task: str, params: OperatorParams, n_trials: int, seed: int,
              scene_cfg: SceneConfig | None = None,
              mech: MechanismConfig | None = None,
              expert_baseline_s: float | None = None,
              ) -> tuple[list[TrialRecord], BatchSummary]:
    """n seeded trials; the novice trial index advances across the batch."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    records = [
        run_trial(task, params, trial_seed(seed, i), trial_index=i,
                  scene_cfg=scene_cfg, mech=mech)
        for i in range(1, n_trials + 1)
    ]
    return records, summarize(records, expert_baseline_s)


def summarize(records: list[TrialRecord],
              expert_baseline_s: float | None = None) -> BatchSummary:
    n_total = len(records)
    n_fail = sum(1 for r in records if not r.success)
    per_timer: dict[str, list[float]] = {}
    failure_counts: dict[str, int] = {}
    for r in records:
        if r.success:
            for name in r.timers.ticks:
                per_timer.setdefault(name, []).append(r.timers.seconds(name))
        else:
            failure_counts[r.outcome] = failure_counts.get(r.outcome, 0) + 1
    mean = {k: sum(v) / len(v) for k, v in per_timer.items()}
    std = {k: _std(v) for k, v in per_timer.items()}
    return BatchSummary(
        n_total=n_total,
        n_fail=n_fail,
        p_success=success_rate(n_fail, n_total),
        mean_timers_s=mean,
        std_timers_s=std,
        failure_counts=failure_counts,
        rounds_to_baseline=(
            rounds_to_baseline(records, expert_baseline_s)
            if expert_baseline_s is not None else None),
    )


def spearman(xs: list[float], ys: list[float]) -> float:
    """Spearman rank correlation (average ranks for ties)."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need two equal-length series of >= 2 points")

    def rank(v: list[float]) -> list[float]:
        order = sorted(range(len(v)), key=lambda i: v[i])
        r = [0.0] * len(v)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and v[order[j + 1]] == v[order[i]]:
                j += 1
            avg = (i + j) / 2 + 1
            for k in range(i, j + 1):
                r[order[k]] = avg
            i = j + 1
        return r

    rx, ry = rank(xs), rank(ys)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    dx = math.sqrt(sum((a - mx) ** 2 for a in rx))
    dy = math.sqrt(sum((b - my) ** 2 for b in ry))
    if dx == 0 or dy == 0:
        return 0.0
    return num / (dx * dy)


def _std(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    m = sum(values) / len(values)
    return math.sqrt(sum((v - m) ** 2 for v in values) / (len(values) - 1))


def rounds_to_baseline(records: list[TrialRecord],
                       expert_baseline_s: float) -> int | None:
    """First trial index whose successful cycle time reaches the baseline.

    Failed trials are skipped, matching the successful-attempts framing of
    the learning-curve series.
    """
    if expert_baseline_s <= 0:
        raise ValueError("baseline must be positive")
    for r in sorted(records, key=lambda r: r.trial_index):
        if not r.success:
            continue
        t = r.timers.seconds("t_exchange")
        if t is not None and t <= expert_baseline_s:
            return r.trial_index
    return None


# -- JSONL persistence ----------------------------------------------------

@dataclass
class LogLineError:
    line_number: int
    reason: str


def write_log(records: list[TrialRecord], path: str) -> None:
    """One JSON object per line per record, LF-terminated, UTF-8."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r.to_json(), allow_nan=False,
                               separators=(",", ":")))
            f.write("\n")


def read_log(path: str) -> tuple[list[TrialRecord], list[LogLineError]]:
    """Inverse of write_log; malformed lines are reported, not fatal."""
    records: list[TrialRecord] = []
    errors: list[LogLineError] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(TrialRecord.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                errors.append(LogLineError(lineno, str(exc)))
    return records, errors


# -- reporting ------------------------------------------------------------

_TIMER_ORDER = ("t_move_return", "t_trigger_release", "t_withdraw", "t_unload",
                "t_align", "t_feed", "t_lock", "t_install", "t_exchange")


def report(records: list[TrialRecord], out_dir: str) -> dict[str, str]:
    """Render CSV tables + a plain-text summary; returns written paths."""
    if not records:
        raise ValueError("report needs at least one record")
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    paths["trials"] = _write_csv(
        os.path.join(out_dir, "trials.csv"),
        ["trial_index", "task", "operator", "seed", "outcome",
         "macro_transit_s"] + [f"{t}_s" for t in _TIMER_ORDER],
        [[r.trial_index, r.task, r.operator, r.seed, r.outcome,
          _fmt(r.macro_transit_ticks * r.timers.dt)]
         + [_fmt(r.timers.seconds(t)) for t in _TIMER_ORDER]
         for r in records])

    groups: dict[tuple[str, str], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.operator, r.task), []).append(r)

    mode_names = sorted({r.outcome for r in records if not r.success})
    rate_rows = []
    for (op, task), rs in sorted(groups.items()):
        s = summarize(rs)
        rate_rows.append([op, task, s.n_total, s.n_fail, _fmt(s.p_success)]
                         + [s.failure_counts.get(m, 0) for m in mode_names])
    pooled = summarize(records)
    rate_rows.append(["all", "pooled", pooled.n_total, pooled.n_fail,
                      _fmt(pooled.p_success)]
                     + [pooled.failure_counts.get(m, 0) for m in mode_names])
    paths["success_rates"] = _write_csv(
        os.path.join(out_dir, "success_rates.csv"),
        ["operator", "task", "n_total", "n_fail", "p_success"] + mode_names,
        rate_rows)

    curve_rows = []
    for r in sorted(records, key=lambda r: (r.operator, r.task, r.trial_index)):
        if r.success:
            curve_rows.append(
                [r.operator, r.task, r.trial_index,
                 _fmt(r.macro_transit_ticks * r.timers.dt)]
                + [_fmt(r.timers.seconds(t))
                   for t in ("t_unload", "t_install", "t_exchange")])
    paths["learning_curve"] = _write_csv(
        os.path.join(out_dir, "learning_curve.csv"),
        ["operator", "task", "trial_index", "macro_transit_s",
         "t_unload_s", "t_install_s", "t_exchange_s"],
        curve_rows)

    lines = ["trial batch summary", "==================", ""]
    for (op, task), rs in sorted(groups.items()):
        s = summarize(rs)
        lines.append(f"{op} / {task}: n={s.n_total} fail={s.n_fail} "
                     f"success={s.p_success:.1f}%")
        for t in _TIMER_ORDER:
            if t in s.mean_timers_s:
                lines.append(f"  {t}: mean {s.mean_timers_s[t]:.2f}s "
                             f"std {s.std_timers_s[t]:.2f}s")
        for m, c in sorted(s.failure_counts.items()):
            lines.append(f"  failures[{m}] = {c}")
        lines.append("")
    summary_path = os.path.join(out_dir, "summary.txt")
    with open(summary_path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    paths["summary"] = summary_path
    return paths


def _fmt(v) -> str:
    return "" if v is None else f"{v:.6g}" if isinstance(v, float) else str(v)


def _write_csv(path: str, header: list[str], rows: list[list]) -> str:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)  # RFC 4180 quoting
        w.writerow(header)
        w.writerows(rows)
    return path
