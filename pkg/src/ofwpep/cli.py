"""Command-line interface: ``ofwpep {bound,optimize,verify-proof,sweep,witness,replay}``.

Exit codes: 0 success, 2 solver failure, 3 bad input, 4 certificate failure,
5 witness audit failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds, pep, witness
from .model import (PRESETS, MultiRoundSchedule, ParamSchedule, ProblemSetting, _jsonable,
                    load_schedule, preset)

log = logging.getLogger("ofwpep")

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_INPUT = 3
EXIT_CERT = 4
EXIT_AUDIT = 5

DEFAULT_MAX_T = 64
DEFAULT_GRID = tuple(range(3, 26)) + (30, 40, 50)
CSV_HEADER = ("T", "value", "status", "wall_ms", "series")
MODES = ("tight-bound", "joint-opt", "joint-opt-beta0", "closed-form")  # plus joint-opt-rounds:r


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# helpers


def _setting(T, L, D):
    try:
        return ProblemSetting(int(T), float(L), float(D))
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc


def resolve_schedule(algo, schedule_file, T, L, D):
    """A schedule from a preset name or a JSON file (exactly one must be given)."""
    if schedule_file:
        try:
            sch = load_schedule(schedule_file)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CliError(f"cannot read schedule {schedule_file}: {exc}", EXIT_INPUT) from exc
        if T is not None and sch.T != T:
            raise CliError(f"schedule horizon {sch.T} differs from --T {T}", EXIT_INPUT)
        return sch
    if not algo:
        raise CliError("give --algo or --schedule", EXIT_INPUT)
    if T is None:
        raise CliError("--T is required with --algo", EXIT_INPUT)
    try:
        return preset(algo, T, L, D)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc


def loglog_slope(Ts, values):
    """Ordinary least squares slope of ``log value`` against ``log T``."""
    x = np.log(np.asarray(Ts, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2:
        raise ValueError("need at least two points")
    return float(np.polyfit(x, y, 1)[0])


def _emit(payload, args, out=None):
    out = out or sys.stdout
    text = json.dumps(_jsonable(payload), indent=2)
    if getattr(args, "out", None) and not getattr(args, "_out_used", False):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    out.write(text + "\n")


def _threads():
    raw = os.environ.get("OFWPEP_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise CliError("OFWPEP_THREADS must be an integer", EXIT_INPUT)
    return max(1, n)


# ---------------------------------------------------------------------------
# commands


def run_bound(schedule, setting, tol=1e-8):
    primal = pep.build_primal(schedule, setting).solve(tol=tol)
    dual = pep.build_dual(schedule, setting).solve(tol=tol)
    ok = primal.status == "optimal" and dual.status == "optimal"
    return {
        "T": setting.T, "L": setting.L, "D": setting.D,
        "schedule": schedule.meta.get("name"),
        "primal": primal.value, "dual": dual.value, "gap": dual.value - primal.value,
        "certified_upper": dual.certified_upper,
        "status": "optimal" if ok else f"primal:{primal.status},dual:{dual.status}",
        "theorem1": bounds.theorem1_bound(setting.T, setting.L, setting.D),
    }


def cmd_bound(args):
    sch = resolve_schedule(args.algo, args.schedule, args.T, args.L, args.D)
    setting = _setting(sch.T, args.L, args.D)
    rep = run_bound(sch, setting, args.tol)
    _emit(rep, args)
    return EXIT_OK if rep["status"] == "optimal" else EXIT_SOLVER


def run_optimize(T, setting, beta_zero=False, rounds=1, tol=1e-8):
    prob = pep.build_joint_opt(T, setting, beta_zero=beta_zero, rounds=rounds)
    res = prob.solve(tol=tol)
    rec = pep.recover_params(prob, res)
    check = pep.build_primal(rec.schedule, setting).solve(tol=tol)
    return {
        "T": T, "L": setting.L, "D": setting.D, "beta0": bool(beta_zero), "rounds": int(rounds),
        "value": res.value, "status": res.status, "certified_upper": res.certified_upper,
        "reevaluated": check.value, "reevaluated_status": check.status,
        "recovery": rec.method, "recovery_residual": rec.residual,
        "schedule": rec.schedule.to_json_dict(),
    }, rec.schedule


def cmd_optimize(args):
    if args.T is None or args.T < 2:
        raise CliError("optimize needs --T >= 2", EXIT_INPUT)
    if args.rounds < 1:
        raise CliError("--rounds must be positive", EXIT_INPUT)
    setting = _setting(args.T, args.L, args.D)
    rep, sch = run_optimize(args.T, setting, args.beta0, args.rounds, args.tol)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(_jsonable(sch.to_json_dict()), fh, indent=1)
        args._out_used = True
    _emit(rep, args)
    return EXIT_OK if rep["status"] == "optimal" else EXIT_SOLVER


def run_verify_proof(T, L=1.0, D=1.0, tol=1e-7, sdp_slack=1e-5):
    """All certificate checks for one horizon (``T >= 3``)."""
    setting = ProblemSetting(T, L, D)
    pp = bounds.optimal_proof_params(T, L, D)
    sos = bounds.sos_certificate(pp.eta, pp.sigma, pp.a, pp.lambda_g, L, D)
    budget = bounds.per_step_budget(pp, L, D)
    _, res = pep.solve_potential_design(pp.eta, pp.sigma, setting, tol=tol)
    assembled = bounds.regret_upper_from_proof(T, L, D, pp)
    thm = bounds.theorem1_bound(T, L, D)
    expected_disc = 7.0 * (T / 3.0) ** 1.5 / 18.0
    resid = max(res.solution.residuals.values(), default=0.0)
    # a stalled solve is accepted only when it is close to feasible
    sdp_ok = res.status == "optimal" or (res.status == "max_iter" and resid <= 1e-6)
    checks = {
        "sos_feasible": sos.feasible,
        "discriminant_positive": sos.discriminant > 0,
        "discriminant_closed_form": bool(abs(sos.discriminant - expected_disc)
                                         <= 1e-9 * expected_disc),
        "sdp_within_budget": bool(sdp_ok and res.value <= budget + sdp_slack),
        "assembled_matches_theorem": bool(pp.sigma >= 1.0
                                          or abs(assembled - thm) <= 1e-9 * abs(thm)),
    }
    return {
        "T": T, "L": L, "D": D, "passed": all(checks.values()), "checks": checks,
        "params": pp.to_dict(), "discriminant": sos.discriminant,
        "discriminant_expected": expected_disc,
        "conservative_discriminant": sos.conservative_discriminant,
        "sos": sos.to_dict(), "sdp_value": res.value, "sdp_status": res.status,
        "sdp_params": {"a": float(res.meta["x"][0]), "b": float(res.meta["x"][1])},
        "per_step_budget": budget, "assembled_bound": assembled, "theorem1": thm,
    }


def cmd_verify_proof(args):
    Ts = _t_range(args, single_ok=True)
    if min(Ts) < 3:
        sys.stderr.write("verify-proof: not applicable, the potential argument requires T >= 3\n")
        return EXIT_INPUT
    reps = [run_verify_proof(T, args.L, args.D) for T in Ts]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(("T", "passed", "discriminant", "sdp_value", "per_step_budget",
                    "assembled_bound", "theorem1"))
        for r in reps:
            w.writerow((r["T"], int(r["passed"]), repr(r["discriminant"]), repr(r["sdp_value"]),
                        repr(r["per_step_budget"]), repr(r["assembled_bound"]), repr(r["theorem1"])))
        _write_text(buf.getvalue(), args)
    else:
        _emit(reps[0] if len(reps) == 1 else {"results": reps,
                                              "passed": all(r["passed"] for r in reps)}, args)
    return EXIT_OK if all(r["passed"] for r in reps) else EXIT_CERT


# -- sweep ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    mode: str
    Ts: tuple
    L: float = 1.0
    D: float = 1.0
    algo: str | None = None
    schedule_file: str | None = None
    tol: float = 1e-8
    max_T: int = DEFAULT_MAX_T

    def __post_init__(self):
        if not self.Ts:
            raise ValueError("empty T range")
        if min(self.Ts) < 1:
            raise ValueError("T must be positive")
        if max(self.Ts) > self.max_T:
            raise ValueError(f"T above the configured maximum {self.max_T}")
        if self.mode not in MODES and not self.mode.startswith("joint-opt-rounds:"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode.startswith("joint-opt-rounds:"):
            r = self.mode.split(":", 1)[1]
            if not r.isdigit() or int(r) < 1:
                raise ValueError("rounds must be a positive integer")
        if self.mode == "tight-bound" and not (self.algo or self.schedule_file):
            raise ValueError("tight-bound sweeps need an algorithm")

    @property
    def series(self):
        if self.mode == "closed-form":
            return "closed-form:theorem1"
        if self.mode == "tight-bound":
            return f"{self.mode}:{self.algo or os.path.basename(self.schedule_file)}"
        return self.mode


def sweep_point(spec: SweepSpec, T):
    """One row of a sweep: ``(T, value, status, wall_ms, series)``."""
    t0 = time.perf_counter()
    try:
        setting = ProblemSetting(T, spec.L, spec.D)
        if spec.mode == "closed-form":
            val = bounds.theorem1_bound(T, spec.L, spec.D)
            status = "optimal" if val is not None else "not-applicable"
        elif spec.mode == "tight-bound":
            sch = resolve_schedule(spec.algo, spec.schedule_file, T, spec.L, spec.D)
            res = pep.tight_bound(sch, setting, tol=spec.tol)
            val, status = res.value, res.status
        else:
            rounds = int(spec.mode.split(":")[1]) if ":" in spec.mode else 1
            prob = pep.build_joint_opt(T, setting, beta_zero=spec.mode == "joint-opt-beta0",
                                       rounds=rounds)
            res = prob.solve(tol=spec.tol)
            val, status = res.value, res.status
    except CliError as exc:
        val, status = None, f"error:{exc}"
    except Exception as exc:  # recorded in the row, the sweep keeps going
        log.exception("sweep point T=%s failed", T)
        val, status = None, f"error:{type(exc).__name__}"
    ms = (time.perf_counter() - t0) * 1000.0
    return (T, val, status, ms, spec.series)


def run_sweep(spec: SweepSpec, sink=None, workers=1):
    """Rows ordered by T; each row is written to ``sink`` (a csv writer) as soon as
    every smaller T is done."""
    Ts = sorted(set(spec.Ts))
    rows = []
    if workers <= 1 or len(Ts) == 1:
        for T in Ts:
            row = sweep_point(spec, T)
            rows.append(row)
            if sink is not None:
                sink(row)
        return rows
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(sweep_point, spec, T) for T in Ts]
        for T, f in zip(Ts, futs):
            try:
                row = f.result()
            except Exception as exc:
                row = (T, None, f"error:{type(exc).__name__}", float("nan"), spec.series)
            rows.append(row)
            if sink is not None:
                sink(row)
    return rows


def _fmt_row(row):
    T, val, status, ms, series = row
    return (T, "" if val is None else repr(float(val)), status, f"{ms:.1f}", series)


def _t_range(args, single_ok=False):
    if args.T is not None and (args.T_min is not None or args.T_max is not None):
        raise CliError("give either --T or --T-min/--T-max", EXIT_INPUT)
    if args.T is not None:
        return [args.T]
    if args.T_min is None and args.T_max is None:
        if single_ok:
            raise CliError("--T or --T-min/--T-max is required", EXIT_INPUT)
        return list(DEFAULT_GRID)
    lo = args.T_min if args.T_min is not None else 3
    hi = args.T_max if args.T_max is not None else lo
    if hi < lo:
        raise CliError("empty T range", EXIT_INPUT)
    return list(range(lo, hi + 1))


def _write_text(text, args):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_sweep(args):
    Ts = _t_range(args)
    mode = args.mode
    if mode is None:
        mode = "tight-bound" if (args.algo or args.schedule) else "joint-opt"
    if args.beta0 and mode == "joint-opt":
        mode = "joint-opt-beta0"
    if args.rounds > 1 and mode == "joint-opt":
        mode = f"joint-opt-rounds:{args.rounds}"
    try:
        spec = SweepSpec(mode, tuple(Ts), args.L, args.D, args.algo, args.schedule, args.tol,
                         args.max_T)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    if max(Ts) > DEFAULT_MAX_T:
        sys.stderr.write(f"warning: T up to {max(Ts)} is long-running\n")
    fh = open(args.out, "w", newline="") if args.out else None
    streams = [s for s in (sys.stdout, fh) if s is not None]
    writers = [csv.writer(s) for s in streams]
    for w in writers:
        w.writerow(CSV_HEADER)

    def sink(row):
        for w, s in zip(writers, streams):
            w.writerow(_fmt_row(row))
            s.flush()

    try:
        rows = run_sweep(spec, sink, workers=_threads())
    finally:
        if fh is not None:
            fh.close()
    good = [(r[0], r[1]) for r in rows if r[1] is not None and r[1] > 0]
    if len(good) >= 2:
        sys.stderr.write(f"log-log slope: {loglog_slope(*zip(*good)):.4f}\n")
    bad = [r for r in rows if r[2].startswith("error")]
    return EXIT_SOLVER if bad else EXIT_OK


# -- witness / replay -------------------------------------------------------


def run_witness(schedule, setting, tol=1e-8):
    """Solve the primal, extract the instance, audit it and bracket it by the dual."""
    if setting.T == 1:
        wc = witness.worst_case_T1(setting)
        objective = setting.L * setting.D
        upper = objective
        status = "optimal"
    else:
        res = pep.tight_bound(schedule, setting, tol=tol)
        wc = witness.extract(res, pep.pep_basis(setting.T, getattr(schedule, "r", 1)))
        objective, upper, status = res.value, res.certified_upper, res.status
    rep = witness.audit(wc, schedule, setting, objective=objective)
    return wc, rep, {"objective": objective, "certified_upper": upper, "status": status}


def cmd_witness(args):
    sch = resolve_schedule(args.algo, args.schedule, args.T, args.L, args.D)
    setting = _setting(sch.T, args.L, args.D)
    wc, rep, info = run_witness(sch, setting, args.tol)
    doc = {"witness": wc.to_json_dict(), "schedule": sch.to_json_dict(),
           "setting": {"T": setting.T, "L": setting.L, "D": setting.D}, **info,
           "audit": rep.to_dict()}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(_jsonable(doc), fh, indent=1)
        args._out_used = True
    _emit({"T": setting.T, **info, "regret": rep.regret, "audit": rep.to_dict(),
           "dimension": wc.d}, args)
    if info["status"] != "optimal":
        return EXIT_SOLVER
    return EXIT_OK if rep.passed else EXIT_AUDIT


def _schedule_from_doc(d):
    return MultiRoundSchedule.from_json_dict(d) if "r" in d else ParamSchedule.from_json_dict(d)


def _same_schedule(a, b):
    a = a.to_multiround() if isinstance(a, ParamSchedule) else a
    b = b.to_multiround() if isinstance(b, ParamSchedule) else b
    return (a.T == b.T and a.r == b.r and np.allclose(a.eta, b.eta) and np.allclose(a.beta, b.beta)
            and np.allclose(a.gamma, b.gamma))


def run_replay(doc, schedule=None):
    wc = witness.WorstCase.from_json_dict(doc["witness"])
    st = doc["setting"]
    setting = ProblemSetting(int(st["T"]), float(st["L"]), float(st["D"]))
    stored = _schedule_from_doc(doc["schedule"])
    sch = stored if schedule is None else schedule
    if sch.T != wc.T:
        raise CliError("schedule horizon differs from the witness", EXIT_INPUT)
    if _same_schedule(sch, stored):
        rep = witness.audit(wc, sch, setting, objective=doc.get("objective"))
        return {"mode": "re-audit", "regret": rep.regret, "objective": doc.get("objective"),
                "passed": rep.passed, "audit": rep.to_dict()}
    # a different schedule: the instance is still admissible, so its regret lower-bounds B_T
    base = witness.audit(wc, stored, setting)
    valid = {k: base.checks[k] for k in ("gradient_norms", "diameter") if k in base.checks}
    _, reg = witness.replay(wc, sch)
    return {"mode": "other-schedule", "regret": reg, "passed": all(c["ok"] for c in valid.values()),
            "checks": valid}


def cmd_replay(args):
    try:
        with open(args.witness) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read witness {args.witness}: {exc}", EXIT_INPUT) from exc
    sch = None
    if args.schedule or args.algo:
        T = int(doc["setting"]["T"])
        sch = resolve_schedule(args.algo, args.schedule, T, doc["setting"]["L"], doc["setting"]["D"])
    rep = run_replay(doc, sch)
    _emit(rep, args)
    return EXIT_OK if rep["passed"] else EXIT_AUDIT


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    p = argparse.ArgumentParser(prog="ofwpep", description="Tight regret bounds for online "
                                "Frank-Wolfe schemes via Gram-lifted SDPs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, algo=True, trange=False):
        if algo:
            sp.add_argument("--algo", choices=PRESETS)
            sp.add_argument("--schedule", help="schedule JSON file")
        sp.add_argument("--T", type=int)
        if trange:
            sp.add_argument("--T-min", dest="T_min", type=int)
            sp.add_argument("--T-max", dest="T_max", type=int)
        sp.add_argument("--L", type=float, default=1.0)
        sp.add_argument("--D", type=float, default=1.0)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("bound", help="tight worst-case regret of a schedule")
    common(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("optimize", help="jointly optimize the schedule")
    common(sp, algo=False)
    sp.add_argument("--beta0", action="store_true", help="fix every beta to zero")
    sp.add_argument("--rounds", type=int, default=1, help="oracle calls per round")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("verify-proof", help="check the potential-based certificates")
    common(sp, algo=False, trange=True)
    sp.set_defaults(func=cmd_verify_proof)

    sp = sub.add_parser("sweep", help="one value per horizon, as CSV")
    common(sp, trange=True)
    sp.add_argument("--mode", help="tight-bound, joint-opt, joint-opt-beta0, "
                                   "joint-opt-rounds:R or closed-form")
    sp.add_argument("--beta0", action="store_true")
    sp.add_argument("--rounds", type=int, default=1)
    sp.add_argument("--max-T", dest="max_T", type=int, default=DEFAULT_MAX_T)
    sp.set_defaults(func=cmd_sweep, format="csv")

    sp = sub.add_parser("witness", help="extract and audit a worst-case instance")
    common(sp)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("replay", help="re-audit a stored witness")
    sp.add_argument("witness", help="file written by 'witness --out'")
    sp.add_argument("--algo", choices=PRESETS)
    sp.add_argument("--schedule")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"ofwpep {args.command}: {exc}\n")
        return exc.code
    except (ValueError, TypeError) as exc:
        sys.stderr.write(f"ofwpep {args.command}: {exc}\n")
        return EXIT_INPUT
    except np.linalg.LinAlgError as exc:
        sys.stderr.write(f"ofwpep {args.command}: solver failure: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
