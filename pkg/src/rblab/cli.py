"""Command-line entry point ``rblab``.

Exit codes: 0 success, 2 usage, 3 contract violation, 4 capacity. Failures
print one JSON object ``{"error": kind, "message": ...}`` on stderr.
"""

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from . import channels as ch
from . import clifford as cl
from . import engine as en
from . import fitting as fi
from . import metrics as me
from .errors import CapacityError, ContractError, DomainError

EXIT_OK, EXIT_USAGE, EXIT_CONTRACT, EXIT_CAPACITY = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _finite(obj):
    # strict JSON has no inf/nan; unidentifiable standard errors become null
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _dump(obj, path=None):
    obj = _finite(json.loads(json.dumps(obj, default=_jsonable)))
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)
    if path is None:
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if hasattr(x, "_asdict"):
        return x._asdict()
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"not serializable: {type(x).__name__}")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path} is not valid JSON: {exc}") from None


def config_hash(obj):
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def manifest_path(data_path):
    return data_path + ".manifest.json"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_sample_clifford(args):
    rng = np.random.default_rng(args.seed)
    for g in cl.random_cliffords(args.n, args.count, rng):
        if args.gates:
            print(" ".join(str(gate) for gate in cl.decompose(g)) or "I")
        else:
            print(cl.to_hex(g))
    return EXIT_OK


def cmd_decompose(args):
    if args.hex is not None:
        g = cl.from_hex(args.hex, args.n)
    else:
        g = cl.random_clifford(args.n, np.random.default_rng(args.seed))
    gates = cl.decompose(g)
    _dump({"n": args.n, "element": cl.to_hex(g), "length": len(gates),
           "gates": [str(x) for x in gates]})
    return EXIT_OK


def cmd_simulate(args):
    raw = _load_json(args.config)
    cfg = en.config_from_dict(raw)
    started = _now()
    data = en.run_experiment(cfg, threads=args.threads)
    data.to_csv(args.out)
    manifest = {"config_hash": config_hash(raw), "config": raw, "seed": cfg.seed,
                "version": __version__, "started": started, "finished": _now(),
                "outputs": [os.path.abspath(args.out)]}
    _dump(manifest, args.manifest or manifest_path(args.out))
    return EXIT_OK


def _dataset_n(args):
    if args.n is not None:
        return args.n
    path = args.manifest or manifest_path(args.data)
    if not os.path.exists(path):
        raise UsageError("qubit count unknown: pass --n or provide a manifest")
    return int(_load_json(path)["config"]["n"])


def cmd_fit(args):
    if not os.path.exists(args.data):
        raise UsageError(f"no such data file: {args.data}")
    data = en.RbDataset.from_csv(args.data, _dataset_n(args))
    ms = data.averages()[0]
    grid = np.unique(np.linspace(ms.min(), ms.max(), 200).round(6))
    out = {"data": os.path.abspath(args.data), "n": data.n, "version": __version__}
    if args.model == "both":
        report = fi.compare_models(data, threshold=args.threshold)
        fits = {"zeroth": fi.fit_zeroth(data), "first": fi.fit_first(data)}
        out["comparison"] = {k: v for k, v in report.items() if k not in ("zeroth", "first")}
    else:
        fits = {args.model: (fi.fit_zeroth if args.model == "zeroth" else fi.fit_first)(data)}
    out["fits"] = {k: f.to_dict(grid) for k, f in fits.items()}
    _dump(out, args.out)
    return EXIT_OK


def analyze_config(raw, restarts=64, m_bound=None):
    """Exact diagnostics for a config dict; returns a JSON-ready report."""
    cfg = en.config_from_dict(raw)
    noise, spam = cfg.noise, cfg.spam
    if cfg.n > 2:
        raise CapacityError("exact diagnostics need n <= 2")
    coeffs = en.model_coefficients(noise, spam)
    gammas = en.gamma(noise, rng=np.random.default_rng(cfg.seed), restarts=restarts)
    m_bound = max(cfg.m_list) if m_bound is None else m_bound
    flat, value = fi.classify_flat_curve(coeffs, spam, noise.average())
    probe = en.pathology_probe(noise, spam=spam)
    report = {
        "n": cfg.n,
        "coefficients": coeffs._asdict(),
        "q_minus_p2": coeffs.q - coeffs.p ** 2,
        "r": (noise.d - 1) * (1 - coeffs.p) / noise.d,
        "gamma": gammas,
        "perturbation_bounds": {"m": m_bound, **{
            str(k): en.perturbation_bound(k, gammas, m_bound) for k in (1, 2, 3)}},
        "pathology": {"probabilities": list(probe.probabilities),
                      "threshold": probe.threshold, "pathological": probe.pathological},
        "flat_curve": {"class": flat.value, "value": value},
    }
    try:
        ms = np.asarray(sorted(set(cfg.m_list)))
        curve = en.exact_average_curve(ms, noise, spam)
    except CapacityError as exc:
        report["comparison"] = {"available": False, "reason": str(exc)}
    else:
        cmp = fi.compare_models(fi.dataset_from_curve(ms, curve, n=cfg.n))
        report["comparison"] = {"available": True, **{
            k: v for k, v in cmp.items() if k not in ("zeroth", "first")}}
    return report


def cmd_analyze(args):
    _dump(analyze_config(_load_json(args.config), restarts=args.restarts, m_bound=args.m),
          args.out)
    return EXIT_OK


def cmd_diamond(args):
    a = ch.channel_from_json(_load_json(args.a))
    b = ch.channel_from_json(_load_json(args.b))
    if a.shape != b.shape:
        raise ContractError("channels act on different dimensions")
    ch.check_cptp(a)
    ch.check_cptp(b)
    bound = me.min_fidelity_bound(a, b)
    res = me.pauli_diamond_distance(ch.pauli_probabilities(a), ch.pauli_probabilities(b))
    _dump({"d": ch.dim(a), "diamond": res.distance, "certificate": res.certificate._asdict(),
           "delta_F": me.delta_F(a, b), "one_one_H": me.one_one_H_norm(a - b),
           "min_fidelity_bound": bound.value, "vacuous": bound.vacuous})
    return EXIT_OK


def cmd_plan(args):
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            k = en.hoeffding_k(args.eps, args.delta, args.a, args.b)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _dump({"k": k, "eps": args.eps, "delta": args.delta, "a": args.a, "b": args.b,
           "warnings": [str(w.message) for w in caught],
           "note": "reference scale: about 7e4 sequences for eps=1e-3, delta=0.05, b-a=0.2"})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="rblab", description="Randomized benchmarking simulation and analysis.")
    p.add_argument("--version", action="version", version=f"rblab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample-clifford", help="draw uniform Clifford elements")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--gates", action="store_true", help="print H/S/CNOT words instead of hex")
    s.set_defaults(func=cmd_sample_clifford)

    s = sub.add_parser("decompose", help="decompose an element into H, S, CNOT and Paulis")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--hex", help="element as printed by sample-clifford")
    s.add_argument("--seed", type=int, default=0, help="sample an element when --hex is absent")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("simulate", help="run an RB experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--manifest", help="default: <out>.manifest.json")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="fit decay models to simulated data")
    s.add_argument("--data", required=True)
    s.add_argument("--model", choices=("zeroth", "first", "both"), default="zeroth")
    s.add_argument("--out")
    s.add_argument("--n", type=int, help="qubit count; read from the manifest when omitted")
    s.add_argument("--manifest")
    s.add_argument("--threshold", type=float, default=3.0,
                   help="standard errors separating p estimates before flagging")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("analyze", help="exact diagnostics for a noise config")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--restarts", type=int, default=64)
    s.add_argument("--m", type=int, help="sequence length for the perturbation bounds")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("diamond", help="distances between two Pauli channels")
    s.add_argument("--a", required=True, help="channel JSON")
    s.add_argument("--b", required=True, help="channel JSON")
    s.set_defaults(func=cmd_diamond)

    s = sub.add_parser("plan", help="Hoeffding sequence count")
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=0.2)
    s.set_defaults(func=cmd_plan)
    return p


def _fail(kind, message, code):
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except CapacityError as exc:
        return _fail("capacity", str(exc), EXIT_CAPACITY)
    except ContractError as exc:
        return _fail("contract", str(exc), EXIT_CONTRACT)


if __name__ == "__main__":
    sys.exit(main())
