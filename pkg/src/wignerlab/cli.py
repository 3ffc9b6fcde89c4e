"""Config-driven experiment runner.

Usage::

    wignerlab COMMAND CONFIG.json [--set key=value ...] [--seed S] [--samples M]
                                  [--workers W] [--output PATH]
    wignerlab --schema

Commands: predict, correlate, compare, sweep-n, sweep-a, moments,
check-profile, semicircle.  Each writes a long-format CSV to ``output`` and a
``<output>.meta.json`` sidecar holding the config as read, the effective
config after overrides, and the resolved ensembles.  Scalar precedence is
flag > config file > default.

Exit codes: 0 success, 2 invalid config or parameters, 3 numerical failure,
4 unknown command, 5 output path not writable.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys

import jsonschema

from wignerlab import __version__
from wignerlab.ensembles import EnsembleSpec, EntryDistribution, SeedSpec, check_profile, make_variance_profile
from wignerlab.ensembles import VarianceProfile, sample_matrix
from wignerlab.exceptions import NumericalError, ValidationError
from wignerlab.moment_match import (
    MOMENT_PAIRS,
    check_four_moment_condition,
    compute_moments,
    entry_moment,
    fit_atomic_match,
)
from wignerlab.predictions import predicted_statistic
from wignerlab.spectra import eigenvalues, ks_distance, local_density_check
from wignerlab.statistics import (
    Observable,
    compare_ensembles,
    convergence_sweep,
    divisibility_sweep,
    empirical_statistic,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_UNKNOWN_COMMAND, EXIT_UNWRITABLE = 0, 2, 3, 4, 5

COMMANDS = ("predict", "correlate", "compare", "sweep-n", "sweep-a", "moments", "check-profile", "semicircle")

STAT_COLUMNS = ["ensemble_label", "N", "E", "k", "observable_id", "M", "estimate", "stderr", "prediction", "z_score"]

COLUMNS = {
    "predict": ["observable_id", "k", "value", "error_estimate", "tol"],
    "correlate": STAT_COLUMNS,
    "compare": [
        "label_a", "label_b", "N", "E", "k", "observable_id", "M", "estimate_a", "stderr_a",
        "estimate_b", "stderr_b", "difference", "combined_stderr", "z_score", "prediction",
    ],
    "sweep-n": STAT_COLUMNS + ["deviation"],
    "sweep-a": ["a"] + STAT_COLUMNS,
    "moments": ["quantity", "a", "b", "value_v", "stderr_v", "value_w", "stderr_w", "difference", "bound", "passed"],
    "check-profile": [
        "N", "kind", "symmetric", "max_row_sum_error", "min_scaled", "max_scaled", "delta", "valid", "violations",
    ],
    "semicircle": [
        "ensemble_label", "N", "E", "eta", "ks_distance", "empirical_count", "predicted_count", "relative_deviation",
    ],
}

REQUIRED = {
    "predict": ["observable"],
    "correlate": ["ensemble", "E", "observable", "M"],
    "compare": ["ensembles", "E", "observable", "M"],
    "sweep-n": ["ensemble", "N_values", "E", "observable", "M"],
    "sweep-a": ["ensemble", "a_values", "E", "observable", "M"],
    "moments": ["distribution"],
    "check-profile": ["profile", "N"],
    "semicircle": ["ensemble"],
}

_ENTRY_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["complex-gaussian", "four-point-bernoulli", "atomic", "heavy-tailed", "fitted-match"]},
        "re_atoms": {"type": "array", "items": {"type": "number"}},
        "re_probs": {"type": "array", "items": {"type": "number"}},
        "im_atoms": {"type": "array", "items": {"type": "number"}},
        "im_probs": {"type": "array", "items": {"type": "number"}},
        "gamma": {"type": "number"},
        "target": {"$ref": "#/$defs/entry"},
        "support_size": {"type": "integer", "minimum": 3},
    },
    "additionalProperties": False,
}

_PROFILE_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["flat", "circulant-band", "explicit"]},
        "width": {"type": "integer", "minimum": 1},
        "contrast": {"type": "number"},
        "variances": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "delta": {"type": "number"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "wignerlab experiment config",
    "type": "object",
    "$defs": {
        "entry": _ENTRY_SCHEMA,
        "profile": _PROFILE_SCHEMA,
        "ensemble": {
            "type": "object",
            "required": ["N"],
            "properties": {
                "N": {"type": "integer", "minimum": 1},
                "label": {"type": "string"},
                "entry": {"$ref": "#/$defs/entry"},
                "profile": {"$ref": "#/$defs/profile"},
            },
            "additionalProperties": False,
        },
        "observable": {
            "type": "object",
            "properties": {
                "k": {"type": "integer", "minimum": 1, "maximum": 3},
                "center": {"type": "number"},
                "half_width": {"type": "number", "exclusiveMinimum": 0},
                "centers": {"type": "array", "items": {"type": "number"}},
                "half_widths": {"type": "array", "items": {"type": "number"}},
                "amplitude": {"type": "number"},
            },
            "anyOf": [{"required": ["k"]}, {"required": ["centers", "half_widths"]}],
            "additionalProperties": False,
        },
    },
    "properties": {
        "ensemble": {"$ref": "#/$defs/ensemble"},
        "ensembles": {"type": "array", "items": {"$ref": "#/$defs/ensemble"}, "minItems": 2, "maxItems": 2},
        "observable": {"$ref": "#/$defs/observable"},
        "E": {"type": "number", "exclusiveMinimum": -2, "exclusiveMaximum": 2},
        "M": {"type": "integer", "minimum": 2},
        "N": {"type": "integer", "minimum": 1},
        "N_values": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "a_values": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1},
        "seed": {"type": "integer", "minimum": 0},
        "stream": {"type": "integer", "minimum": 0},
        "output": {"type": "string"},
        "tol": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "shared_seed": {"type": "boolean"},
        "energy_window": {"type": ["number", "null"], "minimum": 0},
        "eta": {"type": "number", "exclusiveMinimum": 0},
        "distribution": {"$ref": "#/$defs/entry"},
        "compare_to": {"$ref": "#/$defs/entry"},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "abs_orders": {"type": "array", "items": {"type": "number", "minimum": 1}},
        "mc_samples": {"type": ["integer", "null"], "minimum": 1},
        "profile": {"$ref": "#/$defs/profile"},
    },
    "additionalProperties": False,
}

DEFAULTS = {"seed": 0, "stream": 0, "workers": 1, "tol": None, "output": "results.csv", "E": 0.0, "eta": 0.1,
            "shared_seed": False, "energy_window": None, "delta": 0.1, "abs_orders": [], "mc_samples": None}


class _Abort(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------


def _apply_override(cfg, assignment):
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise _Abort(EXIT_INVALID, f"override {assignment!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def _resolve_entry(data):
    if data.get("kind") == "fitted-match":
        target = compute_moments(_resolve_entry(data["target"]))
        return fit_atomic_match(target, data.get("support_size", 3))
    return EntryDistribution.from_dict(data)


def _resolve_ensemble(data):
    data = dict(data)
    entry = _resolve_entry(data.pop("entry", {"kind": "complex-gaussian"}))
    spec = EnsembleSpec.from_dict({**data, "entry": entry.to_dict()})
    return spec


def _observable(data):
    return Observable.from_dict(data)


def _seed(cfg):
    return SeedSpec(cfg["seed"], cfg["stream"])


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return value


def _stat_row(stat, prediction):
    return [stat.label, stat.N, stat.E, stat.k, stat.observable_id, stat.M, stat.estimate, stat.stderr,
            prediction, stat.z_against(prediction)]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_predict(cfg, resolved):
    O = _observable(cfg["observable"])
    p = predicted_statistic(O, O.k, cfg["tol"])
    return [[O.identifier, O.k, p.value, p.error, cfg["tol"]]]


def _cmd_correlate(cfg, resolved):
    spec = _resolve_ensemble(cfg["ensemble"])
    resolved["ensemble"] = spec.to_dict()
    O = _observable(cfg["observable"])
    stat = empirical_statistic(spec, cfg["E"], O, cfg["M"], _seed(cfg), cfg["workers"],
                               energy_window=cfg["energy_window"])
    return [_stat_row(stat, predicted_statistic(O, O.k, cfg["tol"]).value)]


def _cmd_compare(cfg, resolved):
    a, b = (_resolve_ensemble(e) for e in cfg["ensembles"])
    resolved["ensembles"] = [a.to_dict(), b.to_dict()]
    O = _observable(cfg["observable"])
    res = compare_ensembles(a, b, cfg["E"], O, cfg["M"], _seed(cfg), cfg["workers"], cfg["shared_seed"])
    s1, s2 = res.first, res.second
    pred = predicted_statistic(O, O.k, cfg["tol"]).value
    return [[s1.label, s2.label, s1.N, s1.E, s1.k, s1.observable_id, s1.M, s1.estimate, s1.stderr,
             s2.estimate, s2.stderr, res.difference, res.combined_stderr, res.z_score, pred]]


def _cmd_sweep_n(cfg, resolved):
    template = dict(cfg["ensemble"])
    template["N"] = cfg["N_values"][0]
    spec = _resolve_ensemble(template)
    resolved["ensemble_template"] = spec.to_dict()
    O = _observable(cfg["observable"])
    label = cfg["ensemble"].get("label")

    def family(n):
        s = spec.with_N(n)
        return EnsembleSpec(n, s.entry, s.profile, f"{label}/N={n}" if label else "")

    rows = convergence_sweep(family, cfg["N_values"], cfg["E"], O, cfg["M"], _seed(cfg), cfg["workers"], cfg["tol"])
    return [_stat_row(r.statistic, r.prediction) + [r.deviation] for r in rows]


def _cmd_sweep_a(cfg, resolved):
    spec = _resolve_ensemble(cfg["ensemble"])
    resolved["ensemble"] = spec.to_dict()
    O = _observable(cfg["observable"])
    stats = divisibility_sweep(spec, cfg["a_values"], cfg["E"], O, cfg["M"], _seed(cfg), cfg["workers"])
    pred = predicted_statistic(O, O.k, cfg["tol"]).value
    return [[a] + _stat_row(s, pred) for a, s in zip(cfg["a_values"], stats)]


def _cmd_moments(cfg, resolved):
    v = _resolve_entry(cfg["distribution"])
    resolved["distribution"] = v.to_dict()
    mc = cfg["mc_samples"]
    mv = compute_moments(v, mc, _seed(cfg))
    rows = []
    if "compare_to" in cfg:
        w = _resolve_entry(cfg["compare_to"])
        resolved["compare_to"] = w.to_dict()
        mw = compute_moments(w, mc, SeedSpec(cfg["seed"], cfg["stream"], (1,)))
        if "N" not in cfg:
            raise _Abort(EXIT_INVALID, "moments with compare_to needs N")
        report = check_four_moment_condition(mv, mw, cfg["N"], cfg["delta"])
        for r in report.records:
            rows.append(["mixed", r.a, r.b, r.value_v, mv.stderr[(r.a, r.b)], r.value_w, mw.stderr[(r.a, r.b)],
                         r.difference, r.bound, r.passed])
        rows.append(["verdict", "", "", "", "", "", "", report.max_difference, "", report.passed])
    else:
        for a, b in MOMENT_PAIRS:
            rows.append(["mixed", a, b, mv[(a, b)], mv.stderr[(a, b)], "", "", "", "", ""])
    for p in cfg["abs_orders"]:
        val, err = entry_moment(v, p, mc, _seed(cfg), return_stderr=True)
        rows.append(["abs_moment", p, "", val, err, "", "", "", "", ""])
    return rows


def _cmd_check_profile(cfg, resolved):
    data = cfg["profile"]
    N = cfg["N"]
    if data["kind"] == "explicit":
        prof = VarianceProfile.from_variances(data["variances"], data.get("delta"))
    else:
        prof = make_variance_profile(data["kind"], N, data.get("width"), data.get("contrast"))
    rep = check_profile(prof.variances, prof.delta)
    return [[rep.N, prof.kind, rep.symmetric, rep.max_row_sum_error, rep.min_scaled, rep.max_scaled, rep.delta,
             rep.valid, "; ".join(rep.violations)]]


def _cmd_semicircle(cfg, resolved):
    spec = _resolve_ensemble(cfg["ensemble"])
    resolved["ensemble"] = spec.to_dict()
    spectrum = eigenvalues(sample_matrix(spec, _seed(cfg)))
    rec = local_density_check(spectrum, cfg["E"], cfg["eta"])
    return [[spec.label, spec.N, rec.energy, rec.eta, ks_distance(spectrum), rec.empirical_count,
             rec.predicted_count, rec.relative_deviation]]


HANDLERS = {
    "predict": _cmd_predict,
    "correlate": _cmd_correlate,
    "compare": _cmd_compare,
    "sweep-n": _cmd_sweep_n,
    "sweep-a": _cmd_sweep_a,
    "moments": _cmd_moments,
    "check-profile": _cmd_check_profile,
    "semicircle": _cmd_semicircle,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="wignerlab", description="Run a universality experiment from a JSON config.")
    p.add_argument("command", nargs="?", help=", ".join(COMMANDS))
    p.add_argument("config", nargs="?", help="JSON config file")
    p.add_argument("--schema", action="store_true", help="print the config JSON schema and exit")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field (dotted path, JSON value)")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", "-M", type=int, dest="M")
    p.add_argument("--workers", type=int)
    p.add_argument("--output", "-o")
    return p


def _check_output(path):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
        raise _Abort(EXIT_UNWRITABLE, f"output path {path!r} is not writable")
    if os.path.exists(path) and not os.access(path, os.W_OK):
        raise _Abort(EXIT_UNWRITABLE, f"output path {path!r} is not writable")


def run(command: str, config: dict, overrides: dict | None = None, assignments=()) -> int:
    """Run one command on an already-parsed config and return the exit status.

    Failures print a one-line diagnostic to stderr.
    """
    try:
        return _run(command, config, overrides, assignments)
    except _Abort as exc:
        print(f"wignerlab: {exc}", file=sys.stderr)
        return exc.code


def _run(command, config, overrides, assignments):
    if command not in HANDLERS:
        raise _Abort(EXIT_UNKNOWN_COMMAND, f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    raw = copy.deepcopy(config)
    cfg = copy.deepcopy(config)
    for a in assignments:
        _apply_override(cfg, a)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise _Abort(EXIT_INVALID, f"config invalid at {where}: {exc.message}") from None
    missing = [k for k in REQUIRED[command] if k not in cfg]
    if missing:
        raise _Abort(EXIT_INVALID, f"command {command} needs config fields {missing}")
    effective = {**DEFAULTS, **cfg}
    _check_output(effective["output"])

    resolved: dict = {}
    try:
        rows = HANDLERS[command](effective, resolved)
    except ValidationError as exc:
        raise _Abort(EXIT_INVALID, f"invalid parameters: {exc}") from None
    except NumericalError as exc:
        raise _Abort(EXIT_NUMERICAL, f"numerical failure: {exc}") from None

    out = effective["output"]
    try:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS[command])
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        meta = {
            "command": command,
            "version": __version__,
            "master_seed": effective["seed"],
            "config": raw,
            "effective_config": effective,
            "resolved": resolved,
            "columns": COLUMNS[command],
        }
        with open(out + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
    except OSError as exc:
        raise _Abort(EXIT_UNWRITABLE, f"cannot write output {out!r}: {exc}") from None
    return EXIT_OK


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return str(obj)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.schema:
        print(json.dumps(CONFIG_SCHEMA, indent=2))
        return EXIT_OK
    try:
        if args.command is None:
            raise _Abort(EXIT_UNKNOWN_COMMAND, "no command given; expected one of " + ", ".join(COMMANDS))
        if args.command not in HANDLERS:
            raise _Abort(EXIT_UNKNOWN_COMMAND, f"unknown command {args.command!r}; expected one of {', '.join(COMMANDS)}")
        if args.config is None:
            raise _Abort(EXIT_INVALID, "missing config file argument")
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _Abort(EXIT_INVALID, f"cannot read config {args.config!r}: {exc}") from None
        overrides = {"seed": args.seed, "M": args.M, "workers": args.workers, "output": args.output}
        return _run(args.command, config, overrides, args.set)
    except _Abort as exc:
        print(f"wignerlab: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
