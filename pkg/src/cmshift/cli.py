"""Command-line surface and batch experiment runner.

One subcommand per top-level quantity or verification.  Every command
prints a JSON report (schema ``cmshift/output/v1``, shipped in
``schemas/output_schema_v1.json``) and, with ``--out DIR``, writes the
report plus tidy CSV tables into the directory.  Exit codes: 0 success,
2 validation/schema error, 3 inconclusive verdict under ``--strict``.
"""

import argparse
import contextlib
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

from . import counting, density, infinity, katok, measures, thermo
from .errors import CmshiftError, ValidationError
from .graphs import FiniteGraph, load_graph_file

SCHEMA_ID = "cmshift/output/v1"

_FAMILIES = {
    "constant-mme": "mme",
    "pure-drift": "drift",
    "half-mme-half-drift": "mixture",
}


def _jsonable(x):
    """Recursively coerce to strict-JSON values (non-finite floats become
    the strings "inf"/"-inf"/"nan")."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return str(x)


def _int_list(text):
    try:
        values = [int(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated list of integers: {text!r}") from exc
    if not values:
        raise ValidationError("the integer list is empty")
    return values


def _graph(args):
    if not getattr(args, "graph", None):
        raise ValidationError("--graph PATH is required", field="graph")
    return load_graph_file(args.graph)


# ---------------------------------------------------------------------------
# command runners: each returns (result dict, {csv filename: rows})


def _cmd_entropy(args):
    g = _graph(args)
    rep = thermo.gurevich_entropy(g, n_max=args.n_max)
    result = {
        "value": rep.value,
        "method": rep.method,
        "count_rate": rep.count_rate,
        "truncations": [[q, v] for q, v in rep.truncations],
    }
    tables = {}
    if rep.truncations and rep.method != "perron":
        tables["trace.csv"] = [["q", "estimate"]] + [
            [q, repr(v)] for q, v in rep.truncations
        ]
    if args.vertex is not None:
        series = counting.loop_count(g, args.vertex, args.n_max)
        est = counting.growth_rate(series)
        result["count_rate"] = est.rate
        result["count_vertex"] = args.vertex
        tables["counts.csv"] = series.to_csv_rows()
    return result, tables


def _cmd_delta_inf(args):
    g = _graph(args)
    Ms = _int_list(args.M) if args.M else (8, 16)
    qs = _int_list(args.q) if args.q else (1, 2, 4)
    grid = thermo.delta_inf(g, Ms=tuple(Ms), qs=tuple(qs), n_max=args.n_max)
    result = grid.to_json()
    rows = [["M\\q"] + [str(q) for q in qs]]
    for m in Ms:
        row = [str(m)]
        for q in qs:
            cell = grid.cells.get((m, q))
            row.append("" if cell is None or cell.empty else repr(cell.rate))
        rows.append(row)
    return result, {"grid.csv": rows}


def _cmd_classify(args):
    rep = thermo.classify(_graph(args))
    result = {
        "verdict": rep.verdict,
        "entropy": rep.entropy,
        "x_star": rep.x_star,
        "radius": rep.radius,
        "reason": rep.reason,
    }
    return result, {}


def _cmd_spr(args):
    rep = thermo.is_spr(_graph(args))
    return (
        {
            "spr": rep.spr,
            "entropy": rep.entropy,
            "delta_inf": rep.delta_inf,
            "margin": rep.margin,
            "threshold": rep.threshold,
        },
        {},
    )


def _cmd_b_inf(args):
    q = _int_list(args.q)[0] if args.q else 1
    lam = args.delta if args.delta is not None else 1e-3
    rep = infinity.b_inf_estimate(_graph(args), lam=lam, q=q)
    return (
        {
            "value": rep.value,
            "t_opt": rep.t_opt,
            "lam": rep.lam,
            "q": rep.q,
            "pressure_at_opt": rep.pressure_at_opt,
        },
        {},
    )


def _cmd_h_inf(args):
    rep = infinity.h_inf_lower_bound(_graph(args), count=args.steps or 4)
    result = {
        "value": rep.value,
        "entropies": list(rep.entropies),
        "windows": [list(w) for w in rep.windows],
        "escaping": rep.escaping,
        "base_masses": list(rep.base_masses),
    }
    rows = [["lo", "hi", "entropy", "base_mass"]]
    for (lo, hi), h, b in zip(rep.windows, rep.entropies, rep.base_masses):
        rows.append([lo, hi, repr(h), repr(b)])
    return result, {"windows.csv": rows}


def _cmd_katok(args):
    g = _graph(args)
    if not isinstance(g, FiniteGraph):
        raise ValidationError(
            "covering numbers need a finite graph; truncate the system first",
            field="graph",
        )
    mu = measures.parry_measure(g)
    delta = args.delta if args.delta is not None else 0.1
    rep = katok.katok_estimate(mu, g, delta=delta, n_max=args.n_max or 16)
    result = {
        "rate": rep.rate,
        "delta": rep.delta,
        "window": list(rep.window),
        "counts": rep.counts.to_json(),
    }
    return result, {"counts.csv": rep.counts.to_csv_rows()}


def _cmd_verify_main(args):
    g = _graph(args)
    wanted = args.family or "all"
    if wanted == "all":
        names = list(_FAMILIES)
    elif wanted in _FAMILIES:
        names = [wanted]
    else:
        raise ValidationError(
            f"unknown family {wanted!r}; choose from {sorted(_FAMILIES)} or all",
            field="family",
        )
    count = args.steps or 6
    families = []
    ok = True
    for name in names:
        rep = infinity.verify_main_inequality(g, family=_FAMILIES[name], count=count)
        ok = ok and rep.slack >= -1e-9
        families.append(
            {
                "family": name,
                "lhs": rep.lhs,
                "rhs": rep.rhs,
                "slack": rep.slack,
                "mass": rep.mass,
                "limit_entropy": rep.limit_entropy,
                "delta_inf": rep.delta_inf,
                "entropies": list(rep.entropies),
            }
        )
    rows = [["family", "lhs", "rhs", "slack", "mass"]] + [
        [f["family"], repr(f["lhs"]), repr(f["rhs"]), repr(f["slack"]), repr(f["mass"])]
        for f in families
    ]
    return {"families": families, "ok": ok}, {"families.csv": rows}


def _cmd_mass_bound(args):
    g = _graph(args)
    c = args.t
    if c is None:
        c = 0.5 * thermo.gurevich_entropy(g).value
    rep = infinity.mass_bound_check(g, c=c)
    return (
        {
            "bound": rep.bound,
            "measured": rep.measured,
            "c": rep.c,
            "delta_inf": rep.delta_inf,
            "entropy_top": rep.entropy_top,
            "entropies_ok": rep.entropies_ok,
            "satisfied": rep.satisfied,
        },
        {},
    )


def _cmd_dim_series(args):
    g = _graph(args)
    m = _int_list(args.M)[0] if args.M else 16
    q = _int_list(args.q)[0] if args.q else 1
    t = args.t if args.t is not None else 0.5
    rep = infinity.dimension_series(g, t=t, m=m, q=q, l_max=args.n_max or 60)
    result = {
        "verdict": rep.verdict,
        "s": rep.s,
        "t": rep.t,
        "m": rep.m,
        "q": rep.q,
        "partial_sum": rep.partial_sum,
        "tail_slope": rep.tail_slope,
        "terms": [[l, term] for l, term in rep.terms],
    }
    rows = [["l", "term"]] + [[l, repr(term)] for l, term in rep.terms]
    return result, {"terms.csv": rows}


def _cmd_density_demo(args):
    rep = density.two_component_demo(
        n=args.n_max or 64, M=_int_list(args.M)[0] if args.M else 4, depth=args.depth or 6
    )
    return (
        {
            "rho": rep.rho,
            "depth": rep.depth,
            "entropy_target": rep.entropy_target,
            "entropy_built": rep.entropy_built,
            "gap": rep.gap,
            "n": rep.n,
            "M": rep.M,
            "block_counts": list(rep.block_counts),
            "states": rep.states,
        },
        {},
    )


_COMMANDS = {
    "entropy": _cmd_entropy,
    "delta-inf": _cmd_delta_inf,
    "classify": _cmd_classify,
    "spr": _cmd_spr,
    "b-inf": _cmd_b_inf,
    "h-inf": _cmd_h_inf,
    "katok": _cmd_katok,
    "verify-main": _cmd_verify_main,
    "mass-bound": _cmd_mass_bound,
    "dim-series": _cmd_dim_series,
    "density-demo": _cmd_density_demo,
}


def _strict_verdict(command, result):
    """The verdict --strict turns into exit code 3 when inconclusive."""
    if command == "classify":
        return result.get("verdict")
    if command == "dim-series":
        return result.get("verdict")
    return None


# ---------------------------------------------------------------------------
# output plumbing


def _write_atomic(path, data):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(report, tables, out_dir, stdout=True):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if stdout:
        print(text)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        _write_atomic(os.path.join(out_dir, "report.json"), text + "\n")
        for name, rows in tables.items():
            buf = []
            for row in rows:
                buf.append(",".join(str(x) for x in row))
            _write_atomic(os.path.join(out_dir, name), "\n".join(buf) + "\n")


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cmshift",
        description="Entropy, escape of mass, and verification for countable Markov shifts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph=True):
        if graph:
            p.add_argument("--graph", help="path to a graph spec JSON document")
        p.add_argument("--out", help="directory for report.json and CSV tables")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--strict", action="store_true",
                       help="exit 3 when the verdict is inconclusive")

    p = sub.add_parser("entropy", help="Gurevich entropy")
    common(p)
    p.add_argument("--n-max", type=int, default=40)
    p.add_argument("--vertex", type=int, help="also fit the loop-count growth at this vertex")

    p = sub.add_parser("delta-inf", help="escape-rate grid and headline")
    common(p)
    p.add_argument("--M", help="comma-separated visit budgets (default 8,16)")
    p.add_argument("--q", help="comma-separated finite parts (default 1,2,4)")
    p.add_argument("--n-max", type=int, default=40)

    p = sub.add_parser("classify", help="recurrence classification")
    common(p)

    p = sub.add_parser("spr", help="strong positive recurrence verdict")
    common(p)

    p = sub.add_parser("b-inf", help="dual bound on entropy at infinity")
    common(p)
    p.add_argument("--delta", type=float, help="mass level lam (default 0.001)")
    p.add_argument("--q", help="finite part (default 1)")

    p = sub.add_parser("h-inf", help="escaping-measure entropy estimate")
    common(p)
    p.add_argument("--steps", type=int, help="number of windows (default 4)")

    p = sub.add_parser("katok", help="covering-number entropy of the maximal measure")
    common(p)
    p.add_argument("--delta", type=float, help="covering level (default 0.1)")
    p.add_argument("--n-max", type=int, default=16)

    p = sub.add_parser("verify-main", help="escape-of-mass inequality harness")
    common(p)
    p.add_argument("--family", help="constant-mme | pure-drift | half-mme-half-drift | all")
    p.add_argument("--steps", type=int, help="schedule length (default 6)")

    p = sub.add_parser("mass-bound", help="limit-mass floor at entropy level c")
    common(p)
    p.add_argument("--t", type=float, help="entropy level c (default h_top/2)")

    p = sub.add_parser("dim-series", help="weighted escape series verdict")
    common(p)
    p.add_argument("--t", type=float, help="dimension parameter (default 0.5)")
    p.add_argument("--M", help="visit budget m (default 16)")
    p.add_argument("--q", help="finite part (default 1)")
    p.add_argument("--n-max", type=int, default=60, help="largest term length")

    p = sub.add_parser("density-demo", help="two-component ergodic approximation")
    common(p, graph=False)
    p.add_argument("--n-max", type=int, help="block length n (default 64)")
    p.add_argument("--M", help="number of slots (default 4)")
    p.add_argument("--depth", type=int, help="cylinder depth for rho (default 6)")

    p = sub.add_parser("run", help="run a manifest of commands")
    common(p, graph=False)
    p.add_argument("manifest", help="path to a run-manifest JSON file")
    p.add_argument("--jobs", type=int, default=1)

    return parser


# ---------------------------------------------------------------------------
# the manifest runner


def _run_entry(index, entry, base_dir, out_root, defaults=None):
    command = entry.get("command")
    if command not in _COMMANDS:
        raise ValidationError(
            f"manifest entry {index}: unknown command {command!r}",
            field=f"commands[{index}].command",
        )
    merged = dict(defaults or {})
    merged.update(entry.get("args") or {})
    argv = [command]
    for key, value in merged.items():
        flag = "--" + str(key)
        if isinstance(value, bool):
            if value:
                argv.append(flag)
            continue
        if key == "graph":
            value = os.path.join(base_dir, str(value))
        argv.extend([flag, str(value)])
    try:
        with contextlib.redirect_stderr(io.StringIO()) as captured:
            args = _build_parser().parse_args(argv)
    except (SystemExit, argparse.ArgumentError) as exc:
        detail = captured.getvalue().strip().splitlines()
        raise ValidationError(
            f"manifest entry {index}: {detail[-1] if detail else exc}",
            field=f"commands[{index}].args",
        ) from exc
    result, tables = _COMMANDS[command](args)
    report = {
        "schema": SCHEMA_ID,
        "command": command,
        "params": _params_of(args),
        "result": result,
        "error": None,
    }
    entry_name = f"{index:02d}-{command}"
    _emit(report, tables, os.path.join(out_root, entry_name), stdout=False)
    return {"index": index, "command": command, "dir": entry_name, "ok": True}


def _cmd_run(args):
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    commands = manifest.get("commands")
    if not isinstance(commands, list) or not commands:
        raise ValidationError("manifest needs a non-empty commands list", field="commands")
    base_dir = os.path.dirname(os.path.abspath(args.manifest))
    out_root = args.out or manifest.get("out") or "cmshift-run"
    jobs = max(1, args.jobs or int(manifest.get("jobs", 1)))
    defaults = dict(manifest.get("overrides") or {})
    if "seed" in manifest:
        defaults.setdefault("seed", manifest["seed"])
    entries = []
    if jobs == 1:
        for i, entry in enumerate(commands):
            entries.append(_run_entry(i, entry, base_dir, out_root, defaults))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_entry, i, entry, base_dir, out_root, defaults)
                for i, entry in enumerate(commands)
            ]
            entries = [f.result() for f in futures]
    return {"count": len(entries), "entries": entries}, {}


def _params_of(args):
    skip = {"command", "out", "strict", "jobs"}
    return {
        k: _jsonable(v)
        for k, v in sorted(vars(args).items())
        if k not in skip and v is not None
    }


# ---------------------------------------------------------------------------
# entry point


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command
    report = {
        "schema": SCHEMA_ID,
        "command": command,
        "params": _params_of(args),
        "result": None,
        "error": None,
    }
    try:
        if command == "run":
            result, tables = _cmd_run(args)
        else:
            result, tables = _COMMANDS[command](args)
    except CmshiftError as exc:
        report["error"] = exc.to_json()
        _emit(report, {}, getattr(args, "out", None))
        return 2
    except FileNotFoundError as exc:
        report["error"] = {"code": "not-found", "message": str(exc), "field": "graph"}
        _emit(report, {}, getattr(args, "out", None))
        return 2
    report["result"] = result
    _emit(report, tables, getattr(args, "out", None))
    if args.strict and _strict_verdict(command, result) == "inconclusive":
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
