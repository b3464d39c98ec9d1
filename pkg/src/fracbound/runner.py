"""Batch runs: configuration, sweep orchestration, persisted reports.

A run configuration is JSON::

    {
      "corpus": [{"name": "t", "spec": {"kind": "power", "gamma": 1.0}}, ...],
      "grids": [4096],
      "scheme": "fft",
      "bmo_cap": 1024,
      "checks": [
        {"tag": "supercritical-continuity", "params": {"alpha": [0.6, 0.75], "p": 2}},
        {"tag": "linf-holder", "params": {"alpha": 0.5, "r": [0.6, 0.75]},
         "study_grids": [128, 256, 512, 1024]},
        ...
      ]
    }

List-valued parameters expand to their Cartesian product.  ``functions``
restricts a check to named corpus entries and ``grids`` overrides the
global grid list (for bound checks) or the refinement ladder (for studies).
An omitted ``corpus`` means the default eight-function corpus.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import itertools
import json
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable

from . import __version__
from . import theorem_bench as tb
from .corpus import default_corpus, label, smooth_corpus
from .errors import ConfigParseError, MissingManifest, ParamsOutOfScope
from .frac_calculus import FracParams, Scheme
from .function_model import spec_from_json, spec_to_json

__all__ = [
    "CSV_HEADER",
    "RunConfig",
    "RunManifest",
    "parse_config",
    "load_config",
    "builtin_suite",
    "execute",
    "run",
    "report",
]

CSV_HEADER = ["theorem", "params", "function", "n", "lhs", "rhs", "margin", "verdict", "seconds"]

# parameters each tag accepts
TAGS = {
    "supercritical-continuity": {"alpha", "p"},
    "wrl-bound": {"alpha", "gamma", "convention"},
    "linf-holder": {"alpha", "r"},
    "embedding": {"p", "q", "alpha"},
    "holder-regularity": {"alpha", "p", "q"},
    "critical-bk": {"p", "n", "gamma"},
    "linf-general": {"alpha", "q"},
    "holder-sharpness": {"p", "alpha", "r", "gamma"},
    "weak-noninclusion": {"alpha", "r"},
    "inversion": {"alpha"},
    "commutation": {"alpha"},
    "semigroup": {"alpha", "beta"},
}
_REQUIRED = {
    "supercritical-continuity": {"alpha", "p"},
    "wrl-bound": {"alpha", "gamma"},
    "linf-holder": {"alpha"},
    "embedding": {"p", "q"},
    "holder-regularity": {"alpha", "p"},
    "critical-bk": {"p"},
    "linf-general": {"alpha"},
    "holder-sharpness": {"p", "alpha", "r"},
    "weak-noninclusion": {"alpha", "r"},
    "inversion": {"alpha"},
    "commutation": {"alpha"},
    "semigroup": {"alpha"},
}
_CHECK_KEYS = {"tag", "params", "functions", "grids", "study_grids", "tol"}


@dataclass(frozen=True)
class CheckEntry:
    tag: str
    params: dict
    functions: tuple | None = None
    grids: tuple | None = None
    study_grids: tuple | None = None
    tol: float = tb.DEFAULT_TOL


@dataclass(frozen=True)
class RunConfig:
    corpus: tuple  # of (name, AnalyticSpec)
    checks: tuple  # of CheckEntry
    grids: tuple
    scheme: Scheme = Scheme.FFT
    bmo_cap: int | None = 1024
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def digest(self) -> str:
        """SHA-256 of the canonical JSON form of the configuration."""
        canon = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def to_json(self) -> dict:
        return {
            "corpus": [{"name": n, "spec": spec_to_json(s)} for n, s in self.corpus],
            "grids": list(self.grids),
            "scheme": self.scheme.value,
            "bmo_cap": self.bmo_cap,
            "checks": [
                {k: v for k, v in (
                    ("tag", c.tag), ("params", c.params),
                    ("functions", list(c.functions) if c.functions else None),
                    ("grids", list(c.grids) if c.grids else None),
                    ("study_grids", list(c.study_grids) if c.study_grids else None),
                    ("tol", c.tol)) if v is not None}
                for c in self.checks
            ],
        }


@dataclass
class RunManifest:
    config_hash: str
    tool_version: str
    started_at: str
    finished_at: str
    counts: dict
    status: str
    errors: list
    files: list

    def to_json(self) -> dict:
        return dict(self.__dict__)


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------


def _grid_list(value, where) -> tuple:
    if not isinstance(value, list) or not value:
        raise ConfigParseError("must be a nonempty list of integers", where)
    out = []
    for i, n in enumerate(value):
        if isinstance(n, bool) or not isinstance(n, int) or n < 4:
            raise ConfigParseError(f"grid size must be an integer >= 4, got {n!r}", f"{where}[{i}]")
        out.append(n)
    return tuple(out)


def _number(value, where):
    if value is None or value == "inf":
        return math.inf if value == "inf" else None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigParseError(f"expected a number, got {value!r}", where)
    return float(value)


def _parse_check(obj, i, names) -> CheckEntry:
    where = f"checks[{i}]"
    if not isinstance(obj, dict):
        raise ConfigParseError("each check must be an object", where)
    unknown = set(obj) - _CHECK_KEYS
    if unknown:
        raise ConfigParseError(f"unknown keys {sorted(unknown)}", where)
    tag = obj.get("tag")
    if tag not in TAGS:
        raise ConfigParseError(f"unknown theorem tag {tag!r}", f"{where}.tag")
    allowed = TAGS[tag]
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ConfigParseError("params must be an object", f"{where}.params")
    bad = set(params) - allowed
    if bad:
        raise ConfigParseError(f"{tag} does not take {sorted(bad)}", f"{where}.params")
    missing = _REQUIRED[tag] - set(params)
    if missing:
        raise ConfigParseError(f"{tag} needs {sorted(missing)}", f"{where}.params")
    clean = {}
    for key, val in sorted(params.items()):
        vals = val if isinstance(val, list) else [val]
        pw = f"{where}.params.{key}"
        if key == "convention":
            if any(v not in ("strict", "integer") for v in vals):
                raise ConfigParseError("convention is 'strict' or 'integer'", pw)
            clean[key] = list(vals)
        elif key == "n":
            if any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in vals):
                raise ConfigParseError("derivative order must be a positive integer", pw)
            clean[key] = list(vals)
        else:
            clean[key] = [_number(v, f"{pw}") for v in vals]
    functions = obj.get("functions")
    if functions is not None:
        if not isinstance(functions, list) or any(f not in names for f in functions):
            raise ConfigParseError(f"functions must name corpus entries {sorted(names)}",
                                   f"{where}.functions")
        functions = tuple(functions)
    grids = _grid_list(obj["grids"], f"{where}.grids") if "grids" in obj else None
    study = _grid_list(obj["study_grids"], f"{where}.study_grids") if "study_grids" in obj else None
    tol = _number(obj.get("tol", tb.DEFAULT_TOL), f"{where}.tol")
    return CheckEntry(tag, clean, functions, grids, study, tol)


def parse_config(obj) -> RunConfig:
    """Validate a decoded JSON object; errors name the offending field."""
    if not isinstance(obj, dict):
        raise ConfigParseError("top level must be an object", "config")
    unknown = set(obj) - {"corpus", "grids", "scheme", "checks", "bmo_cap"}
    if unknown:
        raise ConfigParseError(f"unknown keys {sorted(unknown)}", "config")
    if "corpus" in obj:
        if not isinstance(obj["corpus"], list):
            raise ConfigParseError("corpus must be a list", "corpus")
        corpus = []
        for i, entry in enumerate(obj["corpus"]):
            try:
                spec_obj = entry["spec"] if "spec" in entry else entry
                spec = spec_from_json(spec_obj)
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigParseError(f"bad function spec ({exc})", f"corpus[{i}]") from None
            corpus.append((entry.get("name") or label(spec), spec))
        if len({n for n, _ in corpus}) != len(corpus):
            raise ConfigParseError("corpus names must be unique", "corpus")
    else:
        corpus = list(default_corpus().items())
    grids = _grid_list(obj.get("grids", [4096]), "grids")
    try:
        scheme = Scheme.parse(obj.get("scheme", "fft"))
    except ValueError:
        raise ConfigParseError(f"unknown scheme {obj.get('scheme')!r}", "scheme") from None
    cap = obj.get("bmo_cap", 1024)
    if cap is not None and (isinstance(cap, bool) or not isinstance(cap, int) or cap < 4):
        raise ConfigParseError("bmo_cap must be an integer >= 4 or null", "bmo_cap")
    checks = obj.get("checks", [])
    if not isinstance(checks, list):
        raise ConfigParseError("checks must be a list", "checks")
    names = {n for n, _ in corpus}
    entries = tuple(_parse_check(c, i, names) for i, c in enumerate(checks))
    return RunConfig(tuple(corpus), entries, grids, scheme, cap, raw=obj)


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, f"{path}: line {exc.lineno} column {exc.colno}") from None
    return parse_config(obj)


# --------------------------------------------------------------------------
# built-in suites
# --------------------------------------------------------------------------


def builtin_suite(kind: str = "full") -> dict:
    """The acceptance sweep as a config object (``quick`` shrinks every grid)."""
    if kind not in ("full", "quick"):
        raise ValueError("suite is 'full' or 'quick'")
    full = kind == "full"
    N = 4096 if full else 1024
    ladder7 = [2**k for k in range(7, 13)] if full else [2**k for k in range(5, 11)]
    ladder8 = [2**k for k in range(8, 15)] if full else [2**k for k in range(8, 13)]
    bk_grids = [128, 256, 512, 1024] if full else [64, 128, 256, 512]
    smooth = sorted(smooth_corpus())
    checks = [
        {"tag": "supercritical-continuity", "params": {"alpha": [0.6, 0.75, 0.9, 1.5], "p": [1.5, 2, 4]}},
        {"tag": "wrl-bound", "params": {"alpha": 1, "gamma": [0.5, 1]}},
        {"tag": "wrl-bound", "params": {"alpha": 1.5, "gamma": [0.5, 1, 1.5]}},
        {"tag": "wrl-bound", "params": {"alpha": 2, "gamma": [0.5, 1, 2]}},
        {"tag": "wrl-bound", "params": {"alpha": [1, 2], "gamma": 1, "convention": "integer"}},
        {"tag": "wrl-bound", "params": {"alpha": 2, "gamma": 2, "convention": "integer"}},
        {"tag": "linf-holder", "params": {"alpha": 0.5, "r": [0.6, 0.75]}, "study_grids": ladder7},
        {"tag": "linf-holder", "params": {"alpha": [0.25, 0.75]}, "study_grids": ladder7},
        {"tag": "embedding", "params": {"p": 1, "q": [1.5, 2], "alpha": [None, 0.5]}},
        {"tag": "embedding", "params": {"p": [1.5, 2], "q": 4, "alpha": [None, 0.5]}},
        {"tag": "embedding", "params": {"p": 4, "q": 8, "alpha": [None, 0.5]}},
        {"tag": "holder-sharpness", "params": {"p": 2, "alpha": 0.75, "r": 0.5}, "grids": ladder7},
        {"tag": "holder-sharpness", "params": {"p": 2, "alpha": 0.75, "r": 0.5, "gamma": -0.4},
         "grids": ladder7},
        {"tag": "holder-sharpness", "params": {"p": 4, "alpha": 0.5, "r": 0.4}, "grids": ladder7},
        {"tag": "weak-noninclusion", "params": {"alpha": 0.5, "r": [2, 3]}, "grids": ladder8},
        {"tag": "holder-regularity", "params": {"alpha": [0.75, 1.2, 2.0], "p": 2}},
        {"tag": "critical-bk", "params": {"p": 2, "n": 1}, "grids": bk_grids},
        {"tag": "linf-general", "params": {"alpha": [1.5, 2]}},
        {"tag": "inversion", "params": {"alpha": 0.5}, "functions": smooth},
        {"tag": "commutation", "params": {"alpha": 0.5}, "functions": smooth},
        {"tag": "semigroup", "params": {"alpha": 0.3, "beta": 0.7}, "functions": smooth},
    ]
    return {"grids": [N], "scheme": "fft", "bmo_cap": 1024, "checks": checks}


# --------------------------------------------------------------------------
# execution
# --------------------------------------------------------------------------


Job = Callable[[], list]


def _expand(params: dict) -> list[dict]:
    keys = sorted(params)
    combos = []
    for values in itertools.product(*(params[k] for k in keys)):
        combo = dict(zip(keys, values))
        if combo not in combos:
            combos.append(combo)
    return combos


def _skip(tag, params: FracParams, fname, n, exc, status="skip") -> tb.TheoremCheck:
    return tb.TheoremCheck(tag, params, fname, math.nan, math.nan, n, 0.0, status=status,
                           detail=f"{type(exc).__name__}: {exc}")


def _guard(tag, params, fname, n, fn) -> Job:
    def job():
        try:
            out = fn()
        except ParamsOutOfScope as exc:
            return [_skip(tag, params, fname, n, exc)]
        except Exception as exc:  # recorded as an error row, the run continues
            return [_skip(tag, params, fname, n, exc, status="error")]
        return list(out) if isinstance(out, (list, tuple)) else [out]
    return job


def _fp(combo: dict, **extra) -> FracParams:
    """Placeholder params for skip/error rows."""
    try:
        alpha = combo.get("alpha")
        kw = {k: combo[k] for k in ("p", "q", "gamma") if combo.get(k) is not None}
        rest = tuple((k, v) for k, v in sorted(combo.items())
                     if k not in ("alpha", "p", "q", "gamma") and v is not None)
        return FracParams(alpha=alpha, extra=rest + tuple(sorted(extra.items())), **kw)
    except Exception:
        return FracParams(extra=tuple(sorted((k, repr(v)) for k, v in combo.items())))


def _identity_job(spec, name, alpha, beta, tag, ladder, scheme, tol):
    checks, study = tb.check_identities(spec, alpha, tag, ladder, beta=beta, scheme=scheme,
                                        tol=tol, name=name)
    return [*checks, study]


def _jobs_for(entry: CheckEntry, config: RunConfig) -> list[Job]:
    tag = entry.tag
    sch = config.scheme
    tol = entry.tol
    corpus = [(n, s) for n, s in config.corpus if entry.functions is None or n in entry.functions]
    grids = entry.grids or config.grids
    ladder = entry.grids or tb.default_ladder(max(config.grids))
    jobs: list[Job] = []

    def add(combo, fname, n, fn, *args, **kw):
        jobs.append(_guard(tag, _fp(combo), fname, n, partial(fn, *args, **kw)))

    for combo in _expand(entry.params):
        a, p, q, r, g = (combo.get(k) for k in ("alpha", "p", "q", "r", "gamma"))
        if tag == "supercritical-continuity":
            for (name, spec), n in itertools.product(corpus, grids):
                add(combo, name, n, tb.check_supercritical_sup, spec, a, p, n, scheme=sch,
                    tol=tol, name=name)
        elif tag == "wrl-bound":
            conv = combo.get("convention", "strict")
            for (name, spec), n in itertools.product(corpus, grids):
                add(combo, name, n, tb.check_wrl_bound, spec, a, g, n, convention=conv,
                    scheme=sch, tol=tol, name=name)
        elif tag == "linf-holder":
            for (name, spec), n in itertools.product(corpus, grids):
                add(combo, name, n, tb.check_linf_holder, spec, a, n, scheme=sch, tol=tol, name=name)
            r_val = (a + 1.0) / 2.0 if r is None else r
            sgrids = entry.study_grids or tb.default_ladder(max(grids))
            add(combo, "const1", sgrids[-1], tb.linf_holder_sharpness, a, r_val, sgrids, scheme=sch)
        elif tag == "embedding":
            for (name, spec), n in itertools.product(corpus, grids):
                add(combo, name, n, tb.check_embedding, spec, p, q, n, alpha=a, scheme=sch,
                    tol=tol, name=name)
        elif tag == "holder-regularity":
            for name, spec in corpus:
                add(combo, name, ladder[-1], tb.check_holder_regularity, spec, a, p, ladder, q=q,
                    scheme=sch, name=name)
        elif tag == "critical-bk":
            for name, spec in corpus:
                add(combo, name, ladder[-1], tb.check_critical_bk, spec, p, combo.get("n", 1),
                    ladder, gamma_kr=g, scheme=sch, bmo_cap=config.bmo_cap, name=name)
        elif tag == "linf-general":
            for name, spec in corpus:
                add(combo, name, ladder[-1], tb.check_linf_general, spec, a, ladder, q=q,
                    scheme=sch, name=name)
        elif tag == "holder-sharpness":
            sgrids = entry.grids or tuple(2**k for k in range(7, 13))
            add(combo, "t^gamma", sgrids[-1], tb.check_holder_sharpness, p, a, r, gamma_exp=g,
                grids=sgrids, scheme=sch)
        elif tag == "weak-noninclusion":
            sgrids = entry.grids or tuple(2**k for k in range(8, 15))
            targets = [(None, None)] if entry.functions is None else corpus
            for name, spec in targets:
                fname = name or label(tb.noninclusion_spec())
                add(combo, fname, sgrids[-1], tb.check_weak_noninclusion, a, r, sgrids, spec=spec,
                    scheme=sch, name=name)
        else:
            for name, spec in corpus:
                add(combo, name, ladder[-1], _identity_job, spec, name, a, combo.get("beta"), tag,
                    ladder, sch, tol)
    return jobs


def _workers() -> int:
    env = os.environ.get("FRACBOUND_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(cpus, int(env)))
        except ValueError:
            pass
    return cpus


def execute(config: RunConfig) -> list:
    """Run every job and return the results sorted deterministically."""
    jobs = [job for entry in config.checks for job in _jobs_for(entry, config)]
    workers = min(_workers(), max(1, len(jobs)))
    if workers == 1:
        chunks = [job() for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda j: j(), jobs))
    results = [r for chunk in chunks for r in chunk]
    return sorted(results, key=lambda r: r.sort_key())


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------


def _counts(results) -> dict:
    counts = {"pass": 0, "fail": 0, "skip": 0, "error": 0, "diverging": 0, "bounded": 0}
    for r in results:
        counts[r.verdict] += 1
    return counts


def _csv_text(results, timings: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.csv_row(timings))
    return buf.getvalue()


def _plot_name(study: tb.ConvergenceStudy) -> str:
    digest = hashlib.sha1(study.params_text().encode()).hexdigest()[:10]
    stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", f"{study.tag}__{study.function}")
    return f"{stem}__{digest}.dat"


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run(config: RunConfig, out_dir, timings: bool = False) -> RunManifest:
    """Execute ``config`` and write results.csv, results.json, manifest.json
    and ``plots/*.dat`` into ``out_dir``.  Apart from the manifest
    timestamps (and the ``seconds`` column with ``timings=True``) the output
    bytes depend only on the configuration."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise ConfigParseError("output directory is not writable", str(out))
    started = _now()
    results = execute(config)
    finished = _now()

    files = ["results.csv", "results.json"]
    (out / "results.csv").write_text(_csv_text(results, timings))
    payload = {"config_hash": config.digest, "tool_version": __version__,
               "results": [r.to_json(timings) for r in results]}
    (out / "results.json").write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    for r in results:
        if isinstance(r, tb.ConvergenceStudy):
            name = _plot_name(r)
            (plots / name).write_text(r.plot_data())
            files.append(f"plots/{name}")

    errors = [{"theorem": r.tag, "params": r.params.describe(), "function": r.function,
               "detail": r.detail} for r in results if r.verdict == "error"]
    manifest = RunManifest(config.digest, __version__, started, finished, _counts(results),
                           "partial-failure" if errors else "ok", errors, files + ["manifest.json"])
    (out / "manifest.json").write_text(json.dumps(manifest.to_json(), indent=1, sort_keys=True) + "\n")
    (out / "config.json").write_text(json.dumps(config.to_json(), indent=1, sort_keys=True) + "\n")
    return manifest


def report(out_dir) -> tuple[str, int]:
    """Summary table of a run directory and its exit status.

    The status is 0 exactly when no check failed or errored and every study
    reached its expected verdict.
    """
    out = Path(out_dir)
    mpath = out / "manifest.json"
    if not mpath.is_file():
        raise MissingManifest(f"no manifest.json in {out}")
    manifest = json.loads(mpath.read_text())
    results = json.loads((out / "results.json").read_text())["results"]

    table: dict[str, dict] = {}
    for r in results:
        if r["kind"] != "check":
            continue
        row = table.setdefault(r["theorem"], {"pass": 0, "fail": 0, "skip": 0, "error": 0})
        row[r["verdict"]] += 1
    lines = [f"run {manifest['config_hash'][:12]}  version {manifest['tool_version']}  "
             f"status {manifest['status']}", "",
             f"{'theorem':<26}{'pass':>6}{'fail':>6}{'skip':>6}{'error':>7}"]
    for tag in sorted(table):
        c = table[tag]
        lines.append(f"{tag:<26}{c['pass']:>6}{c['fail']:>6}{c['skip']:>6}{c['error']:>7}")
    studies = [r for r in results if r["kind"] == "study"]
    if studies:
        lines += ["", f"{'study':<20}{'function':<16}{'slope':>10}{'growth':>9}  verdict"]
        for s in studies:
            flag = "" if s["matches"] else f"   <-- expected {s['expected']}"
            lines.append(f"{s['theorem']:<20}{s['function']:<16}{s['slope']:>10.4f}"
                         f"{s['growth_per_doubling']:>9.4f}  {s['verdict']}{flag}")
            lines.append(f"    {s['params']}")
    failed = [r for r in results if r["kind"] == "check" and r["verdict"] in ("fail", "error")]
    mismatched = [s for s in studies if not s["matches"]]
    for r in failed:
        lines.append(f"FAILED {r['theorem']} [{r['function']}] {r['params']}: "
                     f"lhs={r['lhs']!r} rhs={r['rhs']!r} {r['detail']}")
    code = 0 if not failed and not mismatched else 1
    lines += ["", f"{len(failed)} failed checks, {len(mismatched)} studies off their expected verdict"]
    return "\n".join(lines) + "\n", code
