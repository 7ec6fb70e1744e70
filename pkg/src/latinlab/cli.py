"""Command-line front end: ``latinlab <command> [options]``.

Exit codes: 0 success, 1 property violation, 2 resource limit hit,
3 usage or input error.  Every file written with ``--out`` gets a
``<out>.manifest.json`` next to it.

Config files hold one ``key = value`` per line (``#`` starts a comment);
keys are the long option names with dashes or underscores, booleans are
``true``/``false`` and lists are comma separated.  Flags given on the
command line override the file.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .core import LatinSquare, from_json, parse_rectangle
from .discrepancy import (
    BOX_CSV_COLUMNS,
    STRATEGIES,
    box_scan,
    bregman_upper,
    build_cover,
    factorization_bounds,
    or_lower_bound,
    or_lower_bound_exact,
    permanent_sandwich,
    q_graph,
    vdw_lower,
)
from .errors import LatinLabError, ResourceError, ValidationError
from .facts import check_switching_rules, check_join_rules, random_twist_trial
from .intercalates import census, count_two_rows
from .oracle import (
    count_one_factorizations,
    enumerate_rectangles,
    enumerate_squares,
    regular_bipartite_graphs,
)
from .rng import RNG_ID, RawStream, derive_seed
from .sampler import SampleConfig, sample, sample_exact_small
from .switchings import class_ratios, enumerate_twists, is_good, twist_predecessors

EXIT_OK, EXIT_VIOLATION, EXIT_RESOURCE, EXIT_USAGE = 0, 1, 2, 3
COMMANDS = ("census", "sample", "verify-facts", "class-ratios", "enumerate",
            "discrepancy", "bounds", "cover", "twist-count")

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["tool", "version", "command", "config", "rng", "wall_time_s",
                 "outputs", "summary"],
    "properties": {
        "tool": {"const": "latinlab"},
        "version": {"type": "string"},
        "command": {"enum": list(COMMANDS)},
        "config": {"type": "object"},
        "rng": {"type": "string"},
        "wall_time_s": {"type": "number", "minimum": 0},
        "outputs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["path", "sha256", "bytes"],
                "properties": {
                    "path": {"type": "string"},
                    "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                    "bytes": {"type": "integer", "minimum": 0},
                },
            },
        },
        "summary": {"type": "object"},
        "exit_code": {"type": "integer", "enum": [0, 1, 2, 3]},
    },
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- option types --------------------------------------------------------------


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text}")
    return v


def _floats(text):
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text}") from None


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected true/false, got {text!r}")


# -- config --------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """All options of one run; ``options`` holds every parsed flag by name."""

    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None

    def snapshot(self) -> dict:
        return {"command": self.command, **{k: _jsonable(v) for k, v in sorted(self.options.items())}}

    def to_text(self) -> str:
        lines = [f"# latinlab {self.command}"]
        for key, v in sorted(self.options.items()):
            if v is None or key == "config":
                continue
            lines.append(f"{key} = {_config_value(v)}")
        return "\n".join(lines) + "\n"


def _config_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ",".join(_config_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(sub: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        act = actions.get(key)
        if act is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {sub.prog}")
        if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = _bool(value)
        else:
            # argparse runs string defaults through the option's type
            defaults[key] = value
    sub.set_defaults(**defaults)


# -- parser --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, *, n=None, samples=None):
    p.add_argument("--n", type=_nonneg, default=n, help="order (columns / symbols)")
    p.add_argument("--k", type=_nonneg, default=None, help="rows, for rectangles")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--samples", type=_nonneg, default=samples, help="number of sampled squares")
    p.add_argument("--burn-in", type=_nonneg, default=None, help="chain moves before the first sample (default n^3)")
    p.add_argument("--thin", type=_nonneg, default=None, help="chain moves between samples (default n^3)")
    p.add_argument("--workers", type=_nonneg, default=1)
    p.add_argument("--out", default=None, help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--eps", type=_floats, default=(0.05, 0.1, 0.2), help="tail grid for Pr(N < (1-eps) n^2/4)")
    p.add_argument("--cap", type=_nonneg, default=None, help="goodness cap K (max intercalates per row)")
    p.add_argument("--exact-small", action="store_true", help="exactly uniform sampler (n <= 5)")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    top = _Parser(prog="latinlab", description="Latin square intercalate experiments.")
    top.add_argument("--version", action="version", version=f"latinlab {__version__}")
    subs = top.add_subparsers(dest="command", parser_class=_Parser)
    p = {}

    p["census"] = s = subs.add_parser("census", help="intercalate census of a file or a sampled batch")
    _common(s, samples=1)
    s.add_argument("--input", default=None, help="square in text or JSON form")

    p["sample"] = s = subs.add_parser("sample", help="emit sampled squares")
    _common(s, samples=1)

    p["verify-facts"] = s = subs.add_parser("verify-facts", help="switching invariant suite on sampled squares")
    _common(s)
    s.add_argument("--n-min", type=_nonneg, default=4)
    s.add_argument("--n-max", type=_nonneg, default=8)
    s.add_argument("--trials", type=_nonneg, default=100, help="squares per order")
    s.add_argument("--pairs", type=_nonneg, default=None, help="random column pairs per square (default all)")
    s.add_argument("--twist-tries", type=_nonneg, default=40, help="twist proposals per square")
    s.add_argument("--reproducer", default=None, help="where to dump the first violation")
    s.add_argument("--inject-fault", action="store_true", help="corrupt every switching output (negative control)")

    p["class-ratios"] = s = subs.add_parser("class-ratios", help="exact |L(s)| and ratio bounds (n <= 5)")
    _common(s)

    p["enumerate"] = s = subs.add_parser("enumerate", help="exact intercalate distribution")
    _common(s)
    s.add_argument("--long-run", action="store_true", help="allow n = 6 squares")
    s.add_argument("--checkpoint", default=None, help="resumable progress file")

    p["discrepancy"] = s = subs.add_parser("discrepancy", help="random box scan of one square")
    _common(s)
    s.add_argument("--boxes", type=_nonneg, default=1000)
    s.add_argument("--strategy", choices=STRATEGIES, default="uniform-element")
    s.add_argument("--input", default=None)

    p["bounds"] = s = subs.add_parser("bounds", help="permanent and regular-graph counting bounds")
    _common(s)
    s.add_argument("--d", type=_nonneg, default=None)
    s.add_argument("--all-d", action="store_true")

    p["cover"] = s = subs.add_parser("cover", help="random covering family and its pair coverage")
    _common(s)
    s.add_argument("--M", type=_nonneg, default=None)

    p["twist-count"] = s = subs.add_parser("twist-count", help="forward and backward twist counts")
    _common(s)
    s.add_argument("--input", default=None)
    s.add_argument("--backward", action="store_true", help="also enumerate predecessors")
    return top, p


def parse_config(argv: list[str]) -> ExperimentConfig:
    top, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    cmd = next((a for a in argv if a in subs), None)
    if known.config is not None and cmd is not None:
        try:
            text = Path(known.config).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {known.config}: {exc.strerror}") from None
        _apply_config(subs[cmd], read_config_text(text))
    ns = top.parse_args(argv)
    if ns.command is None:
        raise UsageError(top.format_usage().strip())
    opts = {k: v for k, v in vars(ns).items() if k != "command"}
    return ExperimentConfig(ns.command, opts)


def config_from_text(command: str, text: str) -> ExperimentConfig:
    """Rebuild a config from :meth:`ExperimentConfig.to_text` output."""
    _, subs = build_parser()
    sub = subs[command]
    _apply_config(sub, read_config_text(text))
    ns = sub.parse_args([])
    return ExperimentConfig(command, vars(ns))


# -- output --------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _csv_cell(v):
    v = _jsonable(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(map(str, v))
    return str(v)


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        data = [{c: _jsonable(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def atomic_write(path: str | Path, data: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(data)
    os.replace(tmp, path)


@dataclass
class Output:
    rows: list[dict]
    columns: list[str]
    summary: dict = field(default_factory=dict)
    extra: dict[str, tuple[list[dict], list[str]]] = field(default_factory=dict)
    exit_code: int = EXIT_OK
    message: str = ""


def _extra_path(out: str, suffix: str) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}.{suffix}{p.suffix}"))


def emit(cfg: ExperimentConfig, res: Output, started: float, stdout) -> None:
    fmt = cfg.format
    main = render(res.rows, res.columns, fmt)
    if cfg.out is None:
        stdout.write(main)
        for rows, cols in res.extra.values():
            stdout.write(render(rows, cols, fmt))
        return
    files = {cfg.out: main}
    for suffix, (rows, cols) in res.extra.items():
        files[_extra_path(cfg.out, suffix)] = render(rows, cols, fmt)
    for path, data in files.items():
        atomic_write(path, data)
    manifest = {
        "tool": "latinlab",
        "version": __version__,
        "command": cfg.command,
        "config": cfg.snapshot(),
        "rng": RNG_ID,
        "wall_time_s": round(time.perf_counter() - started, 6),
        "outputs": [{"path": os.path.basename(p), "sha256": hashlib.sha256(d.encode()).hexdigest(),
                     "bytes": len(d.encode())} for p, d in files.items()],
        "summary": {k: _jsonable(v) for k, v in res.summary.items()},
        "exit_code": res.exit_code,
    }
    jsonschema.validate(manifest, MANIFEST_SCHEMA)
    atomic_write(f"{cfg.out}.manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")


# -- shared helpers ------------------------------------------------------------


def _need(cfg, *names):
    for name in names:
        if getattr(cfg, name) is None:
            raise UsageError(f"{cfg.command}: --{name.replace('_', '-')} is required")


def _load_square(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        return from_json(text) if text.lstrip().startswith("{") else parse_rectangle(text)
    except ValidationError as exc:
        where = f":{exc.row + 2}" if exc.row is not None else ""
        raise UsageError(f"{path}{where}: {exc}") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _sampled(cfg, n=None, count=None, seed=None):
    n = cfg.n if n is None else n
    count = (cfg.samples or 1) if count is None else count
    seed = cfg.seed if seed is None else seed
    if cfg.exact_small:
        return sample_exact_small(n, count, seed)
    sc = SampleConfig(n, seed=seed, burn_in=cfg.burn_in, thinning=cfg.thin,
                      sample_count=count, workers=max(cfg.workers, 1))
    return sample(sc)


def _rows_text(L) -> str:
    return "/".join(" ".join(map(str, r)) for r in L.rows())


# -- commands ------------------------------------------------------------------


CENSUS_COLUMNS = ["index", "n", "N", "N2", "max_row", "N_over_n2", "pair_histogram"]


def _hist_text(h: dict) -> str:
    return ";".join(f"{a}:{b}" for a, b in sorted(h.items()))


def cmd_census(cfg: ExperimentConfig) -> Output:
    if cfg.input is not None:
        squares = [_load_square(cfg.input)]
    else:
        _need(cfg, "n")
        squares = _sampled(cfg)
    rows, counts = [], []
    n = None
    for t, L in enumerate(squares):
        c = census(L)
        n = L.n
        counts.append(c.total)
        rows.append({"index": t, "n": L.n, "N": c.total,
                     "N2": count_two_rows(L, 0, 1) if L.k >= 2 else 0,
                     "max_row": c.max_row, "N_over_n2": c.total / L.n**2,
                     "pair_histogram": _hist_text(c.pair_histogram())})
    v = np.array(counts, dtype=float)
    m = len(v)
    mean = float(v.mean())
    var = float(v.var(ddof=1)) if m > 1 else 0.0
    summary = {"squares": m, "n": n, "mean_N": mean, "var_N": var,
               "se_mean": math.sqrt(var / m) if m > 1 else 0.0,
               "mean_N_over_n2": mean / n**2, "max_row_max": max(r["max_row"] for r in rows)}
    if cfg.cap is not None:
        summary["K"] = cfg.cap
        summary["frac_good"] = sum(r["max_row"] <= cfg.cap for r in rows) / m
    tails = []
    for eps in cfg.eps:
        thr = (1 - eps) * n * n / 4
        freq = float((v < thr).mean())
        summary[f"tail_eps_{eps!r}"] = freq
        tails.append({"eps": eps, "threshold": thr, "frequency": freq, "squares": m})
    extra = {}
    if m > 1:
        srow = {k: summary[k] for k in ("squares", "n", "mean_N", "var_N", "se_mean", "mean_N_over_n2", "max_row_max")}
        extra["summary"] = ([srow], list(srow))
        extra["tails"] = (tails, ["eps", "threshold", "frequency", "squares"])
    return Output(rows, CENSUS_COLUMNS, summary, extra)


def cmd_sample(cfg: ExperimentConfig) -> Output:
    _need(cfg, "n")
    rows = []
    for t, L in enumerate(_sampled(cfg)):
        rows.append({"index": t, "n": L.n, "N": census(L).total, "rows": _rows_text(L)})
    return Output(rows, ["index", "n", "N", "rows"], {"squares": len(rows)})


VERIFY_COLUMNS = ["n", "squares", "switching_violations", "join_violations", "single_joins_checked",
                  "twists_accepted", "twists_rejected", "twist_violations"]


def _fault(cells):
    # negative control: copy a neighbour into cell (0, 0), forcing a row repeat
    if cells.shape[1] > 1:
        cells[0, 0] = cells[0, 1]


def cmd_verify_facts(cfg: ExperimentConfig) -> Output:
    lo, hi = cfg.n_min, cfg.n_max
    if not 2 <= lo <= hi:
        raise UsageError("verify-facts needs 2 <= --n-min <= --n-max")
    fault = _fault if cfg.inject_fault else None
    rows, first = [], None
    for n in range(lo, hi + 1):
        seed = derive_seed(cfg.seed, n)
        rng = RawStream(derive_seed(cfg.seed, n, 1))
        thin = cfg.thin if cfg.thin is not None else n * n
        sc = SampleConfig(n, seed=seed, burn_in=cfg.burn_in, thinning=thin, sample_count=cfg.trials)
        tally = dict.fromkeys(VERIFY_COLUMNS, 0)
        tally["n"] = n
        for L in sample(sc):
            tally["squares"] += 1
            v32 = check_switching_rules(L, rng if cfg.pairs is not None else None, cfg.pairs, fault)
            v34 = check_join_rules(L, fault)
            tally["switching_violations"] += len(v32)
            tally["join_violations"] += len(v34)
            tally["single_joins_checked"] += 1
            tv = []
            k = 2 + tally["squares"] % (min(6, n) - 1)
            R = L.rectangle(k)
            cap = cfg.cap if cfg.cap is not None else n
            if is_good(R, cap):
                for _ in range(cfg.twist_tries):
                    choice, out, exc, bad = random_twist_trial(R, cap, rng, targeted=True)
                    tv += bad
                    if choice is None:
                        continue
                    if out is None:
                        tally["twists_rejected"] += 1
                    else:
                        tally["twists_accepted"] += 1
                        break
            tally["twist_violations"] += len(tv)
            problems = v32 + v34 + tv
            if problems and first is None:
                # twist checks run on the first k rows only
                first = {"n": n, "square": L.rows(), "rows_used": k if not v32 + v34 else n,
                         "operation": problems[0], "violations": problems[:20]}
        rows.append(tally)
    total = sum(r["switching_violations"] + r["join_violations"] + r["twist_violations"] for r in rows)
    summary = {"violations": total, "orders": f"{lo}..{hi}", "trials": cfg.trials}
    res = Output(rows, VERIFY_COLUMNS, summary)
    if first is not None:
        path = cfg.reproducer or (f"{cfg.out}.reproducer.json" if cfg.out else "latinlab-reproducer.json")
        atomic_write(path, json.dumps(first, indent=1) + "\n")
        res.exit_code = EXIT_VIOLATION
        res.message = f"{total} violation(s); reproducer written to {path}"
        summary["reproducer"] = os.path.basename(path)
    return res


RATIO_COLUMNS = ["n", "s", "size", "ratio1", "bound1", "single_ok", "ratio2", "bound2", "double_ok"]


def cmd_class_ratios(cfg: ExperimentConfig) -> Output:
    _need(cfg, "n")
    rep = class_ratios(cfg.n)
    rows = [{"n": cfg.n, **r} for r in rep.rows]
    res = Output(rows, RATIO_COLUMNS, {"total": rep.total, "all_within_bounds": rep.all_within_bounds()})
    if not rep.all_within_bounds():
        res.exit_code = EXIT_VIOLATION
        res.message = "a class ratio exceeds its bound"
    return res


def cmd_enumerate(cfg: ExperimentConfig) -> Output:
    _need(cfg, "n")
    n = cfg.n
    k = n if cfg.k is None else cfg.k
    if k == n:
        res = enumerate_squares(n, long_run=cfg.long_run, workers=max(cfg.workers, 1),
                                checkpoint=cfg.checkpoint)
    else:
        res = enumerate_rectangles(k, n)
    rows = [{"kind": "N", "value": v, "count": c} for v, c in res.n_histogram.items()]
    rows += [{"kind": "N2", "value": v, "count": c} for v, c in res.class_sizes.items()]
    summary = {"n": n, "k": k, "total": res.total_count, "mean_N": res.mean_intercalates(),
               "var_N": res.variance_intercalates()}
    if res.class_sizes:
        summary["mean_N2"] = res.mean_two_row()
    return Output(rows, ["kind", "value", "count"], summary)


def cmd_discrepancy(cfg: ExperimentConfig) -> Output:
    if cfg.input is not None:
        L = _load_square(cfg.input)
        if not isinstance(L, LatinSquare):
            raise UsageError(f"{cfg.input}: discrepancy needs a full square")
    else:
        _need(cfg, "n")
        L = next(iter(_sampled(cfg, count=1)))
    stats = box_scan(L, cfg.strategy, cfg.boxes, derive_seed(cfg.seed, 1))
    rows = [s.row(cfg.seed, cfg.strategy) for s in stats]
    ratios = [r["ratio"] for r in rows]
    summary = {"n": L.n, "boxes": len(rows), "max_ratio": max(ratios, default=0.0),
               "max_deviation": max((r["deviation"] for r in rows), default=0.0)}
    return Output(rows, BOX_CSV_COLUMNS, summary)


BOUNDS_COLUMNS = ["n", "d", "graphs", "log_perm_min", "log_perm_max", "vdw_lower", "bregman_upper",
                  "sandwich_ok", "G_exact", "log_G_exact", "log_or_bound", "or_ok",
                  "log_phi_min", "log_phi_max", "fact_lower", "fact_upper", "fact_c"]


def _bounds_row(n, d, graphs, exact_count):
    lps, phis, ok = [], [], True
    for B in graphs:
        r = permanent_sandwich(B)
        ok &= r["ok"]
        lps.append(r["log_perm"])
        if n <= 4:
            phis.append(math.log(count_one_factorizations(B)))
    lo, hi, c = factorization_bounds(d, n)
    row = {"n": n, "d": d, "graphs": len(lps), "log_perm_min": min(lps), "log_perm_max": max(lps),
           "vdw_lower": vdw_lower(d, n), "bregman_upper": bregman_upper(d, n), "sandwich_ok": ok,
           "log_or_bound": or_lower_bound(d, n), "fact_lower": lo, "fact_upper": hi, "fact_c": c}
    if exact_count is not None:
        row["G_exact"] = exact_count
        row["log_G_exact"] = math.log(exact_count)
        row["or_ok"] = exact_count >= or_lower_bound_exact(d, n)
    if phis:
        row["log_phi_min"], row["log_phi_max"] = min(phis), max(phis)
    return row


def _sampled_graphs(cfg, n, d, count):
    """d-regular bipartite graphs G_Q(L): sampled square, random symbol set Q."""
    rng = RawStream(derive_seed(cfg.seed, n, d))
    for t, L in enumerate(_sampled(cfg, n=n, count=count, seed=derive_seed(cfg.seed, n, d, 1))):
        yield q_graph(L, rng.sample(n, d)).biadjacency


def cmd_bounds(cfg: ExperimentConfig) -> Output:
    _need(cfg, "n")
    n = cfg.n
    if n < 1:
        raise UsageError("bounds needs --n >= 1")
    if cfg.all_d:
        ds = list(range(1, n + 1))
    else:
        _need(cfg, "d")
        if not 1 <= cfg.d <= n:
            raise UsageError("bounds needs 1 <= --d <= --n")
        ds = [cfg.d]
    rows = []
    for d in ds:
        if n <= 4:
            graphs = list(regular_bipartite_graphs(n, d))
            rows.append(_bounds_row(n, d, graphs, len(graphs)))
        else:
            rows.append(_bounds_row(n, d, _sampled_graphs(cfg, n, d, cfg.samples or 200), None))
    ok = all(r["sandwich_ok"] and r.get("or_ok", True) for r in rows)
    res = Output(rows, BOUNDS_COLUMNS, {"n": n, "all_ok": ok})
    if not ok:
        res.exit_code = EXIT_VIOLATION
        res.message = "a bound is violated"
    return res


COVER_COLUMNS = ["n", "k", "M", "min_coverage", "max_coverage", "center", "exact_mean",
                 "band_lo", "band_hi", "within_band", "regime_ratio", "label"]


def cmd_cover(cfg: ExperimentConfig) -> Output:
    _need(cfg, "n", "k", "M")
    try:
        fam = build_cover(cfg.n, cfg.k, cfg.M, cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = fam.report()
    hist = [{"coverage": a, "pairs": b} for a, b in fam.histogram().items()]
    return Output([rep], COVER_COLUMNS, rep, {"histogram": (hist, ["coverage", "pairs"])})


TWIST_COLUMNS = ["k", "n", "N", "cap", "good", "forward", "forward_results", "candidates",
                 "backward", "backward_tried", "backward_bound"]


def cmd_twist_count(cfg: ExperimentConfig) -> Output:
    if cfg.input is not None:
        R = _load_square(cfg.input)
        if cfg.k is not None:
            if not 2 <= cfg.k <= R.k:
                raise UsageError(f"twist-count needs 2 <= --k <= {R.k} for this input")
            R = R.rectangle(cfg.k)
    else:
        _need(cfg, "n", "k")
        if not 2 <= cfg.k <= cfg.n:
            raise UsageError("twist-count needs 2 <= --k <= --n")
        R = next(iter(_sampled(cfg, count=1))).rectangle(cfg.k)
    cap = cfg.cap if cfg.cap is not None else R.n
    N = census(R).total
    row = {"k": R.k, "n": R.n, "N": N, "cap": cap, "good": is_good(R, cap)}
    if row["good"]:
        tc = enumerate_twists(R, cap)
        row.update(forward=tc.forward, forward_results=tc.forward_results, candidates=tc.candidates)
    if cfg.backward:
        pred, tried = twist_predecessors(R, cap)
        row.update(backward=len(pred), backward_tried=tried, backward_bound=2 * N * R.n**4)
    res = Output([row], TWIST_COLUMNS, dict(row))
    if cfg.backward and row["backward"] > row["backward_bound"]:
        res.exit_code = EXIT_VIOLATION
        res.message = "backward count exceeds 2 s n^4"
    return res


HANDLERS = {
    "census": cmd_census,
    "sample": cmd_sample,
    "verify-facts": cmd_verify_facts,
    "class-ratios": cmd_class_ratios,
    "enumerate": cmd_enumerate,
    "discrepancy": cmd_discrepancy,
    "bounds": cmd_bounds,
    "cover": cmd_cover,
    "twist-count": cmd_twist_count,
}


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    started = time.perf_counter()
    try:
        cfg = parse_config(argv)
        res = HANDLERS[cfg.command](cfg)
        emit(cfg, res, started, stdout)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=stderr)
        return EXIT_RESOURCE
    except LatinLabError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if res.message:
        print(res.message, file=stderr)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
