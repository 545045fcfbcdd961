"""Command-line front end binding the corpus, configuration, and the suites.

Exit codes: 0 = ran and every asserted check passed; 1 = a check failed;
2 = usage/argument error.  Each subcommand writes CSV (to --out or stdout)
and prints a one-line JSON summary {subcommand, pass, rows, worst_margin}.
Identical argv + seed produce byte-identical CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .domain import (FIELD_NAMES, PROFILE_NAMES, WEIGHT_NAMES, corpus_field,
                     corpus_profile, corpus_weight, validate_field,
                     validate_profile, validate_weight)
from .gamma import QuadConfig, compute_gamma
from .nestedlp import (NestedLpInstance, greedy_solution, ledger_c3, limit_value,
                       oracle_max, random_instance, riemann_Y)
from .onedim import KappaPartition, chain_check, check_slope_floor, decompose
from .study import (DEFAULT_A_GRID, SweepRow, constants_ledger, rows_to_csv,
                    scaling_sweep, worst_margin)

L_GRID_DEFAULT = tuple(2.0 ** (-e) for e in range(1, 7))
THETA_GRID_DEFAULT = (1e-1, 1e-2, 1e-3, 1e-4)


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Canonical, JSON-round-trippable record of one invocation."""

    subcommand: str
    options: dict

    def canonical(self) -> dict:
        opts = {k: self.options[k] for k in sorted(self.options)
                if self.options[k] is not None}
        return {"subcommand": self.subcommand, "options": opts}

    def to_json(self) -> str:
        return json.dumps(self.canonical(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        doc = json.loads(text)
        return cls(doc["subcommand"], dict(doc.get("options", {})))


def _csv_text(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _emit(csv_text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)


def _summary(subcommand: str, ok: bool, rows: int, margin: float) -> None:
    print(json.dumps({"subcommand": subcommand, "pass": bool(ok), "rows": rows,
                      "worst_margin": float(margin)}, sort_keys=True))


def _fmt(x: float) -> str:
    return repr(float(x))


def _quad_config(n: int, o: dict) -> QuadConfig:
    return QuadConfig.for_dimension(n, tol=o.get("tol") or 1e-3).override(
        base_cells=o.get("cells"), max_doublings=o.get("max_doublings"))


def _fields_arg(o: dict) -> list:
    name = o.get("field") or "all"
    return list(FIELD_NAMES) if name == "all" else [name]


def _weights_arg(o: dict) -> list:
    name = o.get("f") or "all"
    return list(WEIGHT_NAMES) if name == "all" else [name]


def _profiles_arg(o: dict) -> list:
    name = o.get("profile") or "all"
    return list(PROFILE_NAMES) if name == "all" else [name]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gamma(o: dict) -> int:
    a = o.get("a")
    if a is None or not (0.0 < a < 1.0):
        raise UsageError(f"--a must lie in (0, 1), got {a}")
    n = o.get("n") or 2
    field = corpus_field(o.get("field") or "linear-x1", n=n)
    weight = corpus_weight(o.get("f") or "weight-log1")
    cfg = _quad_config(n, o)
    res = compute_gamma(field, weight, a, cfg)
    led = constants_ledger(n, field.domain.half_side, field.hessian_bound, weight)
    row = SweepRow(field.name, weight.name, a,
                   res.gamma1.value, res.gamma1.error_estimate,
                   res.gamma2.value, res.gamma2.error_estimate,
                   res.axis_bound, res.axis_error,
                   led.C1 * math.sqrt(a), led.C2,
                   res.gamma1.converged and res.gamma2.converged)
    _emit(rows_to_csv([row]), o.get("out"))
    print(f"gamma1={_fmt(row.gamma1)} gamma2={_fmt(row.gamma2)} "
          f"axis_bound={_fmt(row.axis_bound)}")
    ok = row.pass_g1 and row.pass_g2 and row.pass_axis and row.converged
    _summary("gamma", ok, 1, worst_margin([row]))
    return 0 if ok else 1


def cmd_scaling(o: dict) -> int:
    n = o.get("n") or 2
    if o.get("a_min") is not None or o.get("a_max") is not None:
        lo = o.get("a_min") or 2.0 ** -12
        hi = o.get("a_max") or 0.25
        steps = o.get("a_steps") or 11
        if not (0.0 < lo < hi < 0.5):
            raise UsageError("need 0 < a-min < a-max < 1/2")
        a_grid = np.geomspace(lo, hi, steps)
    else:
        a_grid = np.asarray(DEFAULT_A_GRID)
    cfg = _quad_config(n, o)
    all_rows, ok = [], True
    margin = math.inf
    for name in _fields_arg(o):
        field = corpus_field(name, n=n)
        weights = [corpus_weight(w) for w in _weights_arg(o)]
        res = scaling_sweep(field, weights, a_grid, cfg)
        all_rows.extend(res.rows)
        ok = ok and res.all_pass and all(r.pass_axis for r in res.rows)
        margin = min(margin, worst_margin(res.rows))
        exp = "n/a" if res.exponent is None else f"{res.exponent:.4f}"
        print(f"field={name} exponent={exp}")
    _emit(rows_to_csv(all_rows), o.get("out"))
    _summary("scaling", ok, len(all_rows), margin)
    return 0 if ok else 1


def cmd_lemma21(o: dict) -> int:
    ls = [o["l"]] if o.get("l") is not None else list(L_GRID_DEFAULT)
    rows, ok = [], True
    margin = math.inf
    for pname in _profiles_arg(o):
        profile = corpus_profile(pname)
        for l in ls:
            a = o.get("a") if o.get("a") is not None else l * l
            if not (0.0 < a < 0.5):
                raise UsageError(f"chain threshold a must lie in (0, 1/2), got {a}")
            rep = chain_check(profile, a, l)
            ok = ok and rep.passed
            margin = min(margin, rep.link_parts - rep.measured_total)
            cert = "" if rep.sqrt_certificate is None else _fmt(rep.sqrt_certificate)
            rows.append([pname, _fmt(a), _fmt(l), _fmt(rep.measured_total),
                         _fmt(rep.measured_m), _fmt(rep.measured_lambda),
                         str(rep.r1), _fmt(rep.link_parts), _fmt(rep.link_formula),
                         cert, str(int(rep.passed))])
    _emit(_csv_text(["profile", "a", "l", "measured", "measured_m", "measured_lambda",
                     "r1", "bound_parts", "bound_formula", "sqrt_certificate", "pass"],
                    rows), o.get("out"))
    _summary("lemma21", ok, len(rows), margin)
    return 0 if ok else 1


def cmd_lemma22(o: dict) -> int:
    ls = [o["l"]] if o.get("l") is not None else list(L_GRID_DEFAULT)
    samples = o.get("samples") or 10_000
    rows, ok = [], True
    margin = math.inf
    for pname in _profiles_arg(o):
        profile = corpus_profile(pname)
        for l in ls:
            dec = decompose(profile, l)
            rep = check_slope_floor(dec, profile, samples)
            ok = ok and rep.passed
            if not rep.vacuous:
                margin = min(margin, rep.margin)
            rows.append([pname, _fmt(l), _fmt(dec.h), str(dec.r1), _fmt(rep.floor),
                         "inf" if rep.vacuous else _fmt(rep.min_slope),
                         str(int(rep.vacuous)), str(int(rep.passed))])
    _emit(_csv_text(["profile", "l", "h", "r1", "floor", "min_slope", "vacuous", "pass"],
                    rows), o.get("out"))
    _summary("lemma22", ok, len(rows), margin)
    return 0 if ok else 1


def cmd_lp(o: dict) -> int:
    trials = o.get("trials") or 200
    seed = o.get("seed") if o.get("seed") is not None else 7
    k = o.get("k")
    rows, ok = [], True
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        inst = random_instance(rng, k)
        g = greedy_solution(inst)
        v = oracle_max(inst)
        diff = abs(g.objective - v.objective)
        agree = diff <= 1e-9
        ok = ok and agree
        worst = max(worst, diff)
        rows.append([str(t), str(inst.k), _fmt(inst.c2), _fmt(g.objective),
                     _fmt(v.objective), _fmt(diff), str(int(agree))])
    _emit(_csv_text(["trial", "k", "c2", "greedy", "oracle", "diff", "agree"], rows),
          o.get("out"))
    print(f"{sum(int(r[-1]) for r in rows)}/{trials} greedy=oracle")
    _summary("lp", ok, len(rows), 1e-9 - worst)
    return 0 if ok else 1


def cmd_limit(o: dict) -> int:
    weight = corpus_weight(o.get("f") or "weight-log1")
    a = o.get("a") if o.get("a") is not None else 0.25
    if not (0.0 < a < 1.0):
        raise UsageError(f"--a must lie in (0, 1), got {a}")
    c2 = o.get("c2") if o.get("c2") is not None else 1.0
    thetas = [o["theta"]] if o.get("theta") is not None else list(THETA_GRID_DEFAULT)
    lim = limit_value(weight, a, c2)
    c3 = ledger_c3(weight, c2)
    rows = []
    errs = []
    for theta in thetas:
        kk = max(1, int(math.ceil((1.0 - a) / theta)))
        kp = KappaPartition.uniform(a, kk)
        y = riemann_Y(kp, weight, c2)
        err = abs(y - lim)
        errs.append((theta, err))
        rows.append([_fmt(theta), str(kk), _fmt(y), _fmt(lim), _fmt(err)])
    pos = [(t, e) for t, e in errs if e > 0]
    order = None
    if len(pos) >= 2:
        xs = np.log([t for t, _ in pos])
        ys = np.log([e for _, e in pos])
        order = float(np.polyfit(xs, ys, 1)[0])
    ok = (lim <= c3 + 1e-12) and (order is None or order >= 0.9)
    _emit(_csv_text(["theta", "k", "riemann_Y", "limit", "abs_err"], rows), o.get("out"))
    print(f"limit={_fmt(lim)} c3={_fmt(c3)} order={'n/a' if order is None else f'{order:.3f}'}")
    _summary("limit", ok, len(rows), c3 - lim)
    return 0 if ok else 1


def cmd_constants(o: dict) -> int:
    n = o.get("n") or 2
    d = o.get("d") if o.get("d") is not None else 0.9
    c1 = o.get("c1") if o.get("c1") is not None else 1.0
    rows = []
    for wname in _weights_arg(o):
        w = corpus_weight(wname)
        led = constants_ledger(n, d, c1, w)
        again = constants_ledger(n, d, c1, w)
        assert (led.c2, led.c3, led.C1, led.C2) == (again.c2, again.c3, again.C1, again.C2)
        rows.append([str(n), _fmt(d), _fmt(c1), wname, _fmt(led.c2), _fmt(led.c3),
                     _fmt(led.C1), _fmt(led.C2)])
    _emit(_csv_text(["n", "d", "c1", "f", "c2", "c3", "C1", "C2"], rows), o.get("out"))
    _summary("constants", True, len(rows), math.inf)
    return 0


def cmd_validate(o: dict) -> int:
    samples = o.get("samples") or 64
    rows, ok = [], True
    for n in (1, 2, 3):
        for name in FIELD_NAMES:
            rep = validate_field(corpus_field(name, n=n), samples)
            ok = ok and rep.passed
            rows.append(["field", name, str(n), str(int(rep.passed)),
                         _fmt(rep.sigma_in_range.worst_value),
                         _fmt(rep.gradient_consistent.worst_value),
                         _fmt(rep.hessian_bounded.worst_value)])
    for name in PROFILE_NAMES:
        rep = validate_profile(corpus_profile(name), samples * 64)
        ok = ok and rep.passed
        rows.append(["profile", name, "1", str(int(rep.passed)),
                     _fmt(rep.psi_in_range.worst_value),
                     _fmt(rep.deriv_consistent.worst_value),
                     _fmt(rep.second_deriv_bounded.worst_value)])
    for name in WEIGHT_NAMES:
        rep = validate_weight(corpus_weight(name), samples * 64)
        ok = ok and rep.passed
        rows.append(["weight", name, "-", str(int(rep.passed)),
                     _fmt(rep.sqrt_bound_holds.worst_value),
                     _fmt(rep.integral_matches.worst_value), "0.0"])
    _emit(_csv_text(["kind", "name", "n", "pass", "worst1", "worst2", "worst3"], rows),
          o.get("out"))
    _summary("validate", ok, len(rows), math.inf if ok else -1.0)
    return 0 if ok else 1


_COMMANDS = {
    "gamma": cmd_gamma,
    "scaling": cmd_scaling,
    "lemma21": cmd_lemma21,
    "lemma22": cmd_lemma22,
    "lp": cmd_lp,
    "limit": cmd_limit,
    "constants": cmd_constants,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="varbound",
                                description="Verification suites for band-truncated "
                                            "gradient integral bounds.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, help_text, flags):
        sp = sub.add_parser(name, help=help_text)
        for flag, kw in flags:
            sp.add_argument(flag, **kw)
        sp.add_argument("--out", type=str, default=None, help="CSV output path")
        sp.add_argument("--config", type=str, default=None,
                        help="JSON config file; flags override its values")
        return sp

    num = dict(type=float, default=None)
    integer = dict(type=int, default=None)
    add("gamma", "single-threshold band integrals", [
        ("--field", dict(type=str, default=None)), ("--f", dict(type=str, default=None)),
        ("--a", num), ("--n", integer), ("--cells", integer), ("--tol", num),
        ("--max-doublings", integer)])
    add("scaling", "threshold sweep with scaling fit", [
        ("--field", dict(type=str, default=None)), ("--f", dict(type=str, default=None)),
        ("--a-min", num), ("--a-max", num), ("--a-steps", integer), ("--n", integer),
        ("--cells", integer), ("--tol", num), ("--max-doublings", integer)])
    add("lemma21", "1-D bound chain over the slope grid", [
        ("--profile", dict(type=str, default=None)), ("--l", num), ("--a", num)])
    add("lemma22", "slope floor on the complement part", [
        ("--profile", dict(type=str, default=None)), ("--l", num),
        ("--samples", integer)])
    add("lp", "greedy vs vertex-enumeration oracle", [
        ("--k", integer), ("--trials", integer), ("--seed", integer)])
    add("limit", "partition-refinement convergence table", [
        ("--f", dict(type=str, default=None)), ("--a", num), ("--c2", num),
        ("--theta", num)])
    add("constants", "dump the constant ledger", [
        ("--n", integer), ("--d", num), ("--c1", num),
        ("--f", dict(type=str, default=None))])
    add("validate", "corpus hypothesis checks", [
        ("--samples", integer)])
    return p


def merge_config(ns: argparse.Namespace) -> RunConfig:
    opts = {k: v for k, v in vars(ns).items() if k not in ("subcommand", "config")}
    if ns.config:
        doc = json.loads(Path(ns.config).read_text())
        file_opts = doc.get("options", doc)
        for k, v in file_opts.items():
            key = k.replace("-", "_")
            if key not in opts:
                raise UsageError(f"unknown config key {k!r}")
            if opts[key] is None:
                opts[key] = v
    return RunConfig(ns.subcommand, opts)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_json(merge_config(ns).to_json())  # canonical round-trip
        return _COMMANDS[cfg.subcommand](cfg.options)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
