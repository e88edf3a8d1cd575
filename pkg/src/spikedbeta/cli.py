"""Command line front end: compute, predict, sample, verify.

Exit codes: 0 success, 1 input error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import InputError, SpikedError, VerificationError
from .potential import REFERENCE_QUARTIC, TWO_WELL_QUARTIC, Potential, fmt17, make_potential

COMMANDS = ("eqm", "phase", "predict", "sample", "ks", "verify-appendix", "verify-jack")
STOCHASTIC = ("sample",)
NAMED_POTENTIALS = {"gaussian": (0.0, 0.0, 1.0), "gaussian2": (0.0, 0.0, 2.0),
                    "reference-quartic": REFERENCE_QUARTIC, "two-well-quartic": TWO_WELL_QUARTIC}

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


class CLIInputError(InputError):
    pass


@dataclass
class RunConfig:
    command: str
    coeffs: list = field(default_factory=lambda: [0.0, 0.0, 1.0])
    a: float | None = None
    a_min: float | None = None
    a_max: float | None = None
    a_count: int | None = None
    beta: float = 2.0
    n: int | None = None
    trials: int | None = None
    steps: int | None = None
    seed: int | None = None
    method: str = "auto"
    alpha: float | None = None
    sample: str | None = None
    out: str | None = None
    format: str = "json"
    tol_tie: float | None = None
    tol_ks: float | None = None
    jack_cases: list = field(default_factory=lambda: [[4, 2, 10], [3, 1, 10], [5, 4, 12], [4, 3, 10]])

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise CLIInputError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise CLIInputError("format must be json or csv")
        for name in ("a", "a_min", "a_max", "beta", "alpha", "tol_tie", "tol_ks"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(float(v)):
                raise CLIInputError(f"{name} must be finite")
        if not self.beta > 0:
            raise CLIInputError("beta must be positive")
        for name in ("n", "trials", "steps", "a_count"):
            v = getattr(self, name)
            if v is not None and int(v) < 1:
                raise CLIInputError(f"{name} must be a positive integer")
        if self.command in STOCHASTIC and self.seed is None:
            raise CLIInputError("stochastic commands need --seed")
        if self.command in ("predict", "sample") and self.a is None:
            raise CLIInputError(f"{self.command} needs --a")
        if self.command == "phase" and self.a is None and None in (self.a_min, self.a_max, self.a_count):
            raise CLIInputError("phase needs --a or all of --a-min, --a-max, --a-count")
        if self.command == "sample" and self.n is None:
            raise CLIInputError("sample needs --n")
        if self.command == "ks" and self.sample is None:
            raise CLIInputError("ks needs --sample")

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        return d

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIInputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spikedbeta", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        s = sub.add_parser(cmd)
        s.add_argument("--config", help="JSON file whose keys mirror the flags")
        s.add_argument("--potential", help="named potential or path to a JSON file with 'coeffs'")
        s.add_argument("--coeffs", help="comma-separated coefficients, ascending degree")
        s.add_argument("--a", type=float)
        s.add_argument("--a-min", type=float)
        s.add_argument("--a-max", type=float)
        s.add_argument("--a-count", type=int)
        s.add_argument("--beta", type=float)
        s.add_argument("--n", type=int)
        s.add_argument("--trials", type=int)
        s.add_argument("--steps", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--method", choices=("auto", "direct", "mcmc"))
        s.add_argument("--alpha", type=float)
        s.add_argument("--sample", help="sample CSV written by the sample command")
        s.add_argument("--out")
        s.add_argument("--format", choices=("json", "csv"))
        s.add_argument("--tol-tie", type=float)
        s.add_argument("--tol-ks", type=float, help="ks exits 2 when D exceeds this")
    return p


def _coeffs_from(potential: str | None, coeffs: str | None):
    if coeffs is not None:
        try:
            return [float(c) for c in coeffs.split(",")]
        except ValueError as exc:
            raise CLIInputError(f"bad --coeffs: {exc}") from None
    if potential is None:
        return None
    if potential in NAMED_POTENTIALS:
        return list(NAMED_POTENTIALS[potential])
    if not os.path.exists(potential):
        raise CLIInputError(f"unknown potential {potential!r}")
    with open(potential) as fh:
        return [float(c) for c in json.load(fh)["coeffs"]]


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    base = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CLIInputError(f"cannot read config: {exc}") from None
        base = {k.replace("-", "_"): v for k, v in base.items()}
        if "potential" in base:
            base.setdefault("coeffs", _coeffs_from(base.pop("potential"), None))
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(base) - known
    if unknown:
        raise CLIInputError(f"unknown config keys: {sorted(unknown)}")
    base["command"] = args.command
    flags = vars(args)
    c = _coeffs_from(flags.pop("potential"), flags.pop("coeffs"))
    if c is not None:
        base["coeffs"] = c
    for k, v in flags.items():
        if k in known and k != "command" and v is not None:
            base[k] = v
    cfg = RunConfig(**base)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# output helpers

def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def provenance(cfg: RunConfig) -> dict:
    return {"config_hash": cfg.hash(), "version": __version__, "command": cfg.command}


def json_doc(cfg: RunConfig, body) -> str:
    return json.dumps({"provenance": provenance(cfg), "result": _plain(body)}, sort_keys=True, indent=1) + "\n"


def csv_doc(cfg: RunConfig, columns, rows, extra: dict | None = None) -> str:
    out = io.StringIO()
    for k, v in {**provenance(cfg), **(extra or {})}.items():
        out.write(f"# {k}: {json.dumps(_plain(v), sort_keys=True)}\n")
    out.write(",".join(columns) + "\n")
    for r in rows:
        out.write(",".join(v if isinstance(v, str) else fmt17(v) for v in r) + "\n")
    return out.getvalue()


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def _setup(cfg):
    from .equilibrium import solve_equilibrium
    V = make_potential(cfg.coeffs)
    return V, solve_equilibrium(V)


def cmd_eqm(cfg):
    from .equilibrium import verify_variational
    from .potential import check_conditions
    V, eqm = _setup(cfg)
    cond = check_conditions(V, eqm)
    var = verify_variational(eqm, V)
    body = {"potential": V.to_dict(), "support": [eqm.b1, eqm.b2], "e": eqm.b2, "h": list(eqm.h_coeffs),
            "ell": eqm.ell, "conditions": cond.to_dict(), "all_conditions_ok": cond.all_ok,
            "variational": var.to_dict()}
    return json_doc(cfg, body), EXIT_OK


def _a_values(cfg):
    if cfg.a is not None:
        return [float(cfg.a)]
    return [float(v) for v in np.linspace(cfg.a_min, cfg.a_max, cfg.a_count)]


def cmd_phase(cfg):
    from . import phase
    V, eqm = _setup(cfg)
    a_c = phase.critical_value(eqm, V)
    tie = phase.TIE_TOL if cfg.tol_tie is None else cfg.tol_tie
    reps = []
    for a in _a_values(cfg):
        if not a > 0:
            raise CLIInputError("spike values must be positive")
        reps.append(phase.classify(eqm, V, a, a_c=a_c, tie_tol=tie))
    if cfg.format == "json":
        return json_doc(cfg, {"a_c": a_c, "reports": [r.to_dict() for r in reps]}), EXIT_OK
    r_max = max([len(r.maximizers) for r in reps] + [1])
    cols = ["a", "regime", "c_of_a"] + [f"x{i + 1}" for i in range(r_max)] + ["G_max", "H_c"]
    rows = []
    for r in reps:
        xs = [m[0] for m in r.maximizers] + [float("nan")] * (r_max - len(r.maximizers))
        rows.append([r.a, r.regime, r.c_of_a] + xs + [r.g_max, r.h_at_c])
    return csv_doc(cfg, cols, rows, {"a_c": a_c}), EXIT_OK


def _law(cfg, V, eqm):
    from . import limit_laws as LL
    from . import phase
    tie = phase.TIE_TOL if cfg.tol_tie is None else cfg.tol_tie
    return LL.predict_limit(eqm, V, float(cfg.a), beta=cfg.beta, alpha=cfg.alpha, tie_tol=tie)


def cmd_predict(cfg):
    V, eqm = _setup(cfg)
    law = _law(cfg, V, eqm)
    n = cfg.n if cfg.n is not None else 1
    lo = min(c.location - 6 * c.scale(n) for c in law.components)
    hi = max(c.location + 6 * c.scale(n) for c in law.components)
    xs = np.linspace(lo, hi, 201)
    table = [[float(x), float(law.cdf(x, n))] for x in xs]
    if cfg.format == "csv":
        return csv_doc(cfg, ["x", "cdf"], table, {"law": law.to_dict(), "n": n}), EXIT_OK
    comps = [{**c.to_dict(), "scale": c.scale(n)} for c in law.components]
    body = {"law": law.to_dict(), "n": n, "components": comps, "cdf_table": table}
    return json_doc(cfg, body), EXIT_OK


def cmd_sample(cfg):
    from . import sampler
    V = make_potential(cfg.coeffs)
    gaussian = tuple(cfg.coeffs) == (0.0, 0.0, 1.0) and cfg.beta in (1.0, 2.0, 4.0)
    method = cfg.method
    if method == "auto":
        method = "direct" if gaussian else "mcmc"
    if method == "direct":
        if not gaussian:
            raise CLIInputError("direct sampling needs V = x^2 and beta in {1, 2, 4}")
        s = sampler.sample_gaussian_spiked(cfg.n, int(cfg.beta), cfg.a, cfg.trials or 1000, cfg.seed)
    else:
        if cfg.steps is None:
            raise CLIInputError("mcmc sampling needs --steps")
        s = sampler.mcmc_spectrum(V, cfg.n, cfg.beta, cfg.a, cfg.steps, seed=cfg.seed)
    if cfg.format == "json":
        return json_doc(cfg, {**s.meta(), "values": s.values}), EXIT_OK
    return s.to_csv(provenance(cfg)), EXIT_OK


def cmd_ks(cfg):
    from . import sampler
    try:
        with open(cfg.sample) as fh:
            text = fh.read()
        if text.lstrip().startswith("{"):
            s = sampler.EmpiricalSample.from_json(text)
        else:
            s = sampler.EmpiricalSample.from_csv(text)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise CLIInputError(f"cannot read sample: {exc}") from None
    V, eqm = _setup(cfg)
    if V.hash != s.potential_hash:
        raise CLIInputError("sample was drawn for a different potential")
    if cfg.a is None:
        cfg.a = s.a
    if cfg.beta != s.beta:
        cfg.beta = s.beta
    law = _law(cfg, V, eqm)
    D, summary = sampler.ks_compare(s, law, cfg.n)
    summary["threshold"] = cfg.tol_ks
    status = EXIT_VERIFY if cfg.tol_ks is not None and D > cfg.tol_ks else EXIT_OK
    summary["passed"] = status == EXIT_OK
    return json_doc(cfg, summary), status


def cmd_verify_appendix(cfg):
    from . import appendix_oracle as appendix
    reps = appendix.run_all()
    ok = all(r.passed for r in reps)
    doc = json.dumps({"provenance": provenance(cfg), "all_passed": ok,
                      "reports": _plain([r.to_dict() for r in reps])}, sort_keys=True, indent=1) + "\n"
    return doc, EXIT_OK if ok else EXIT_VERIFY


def cmd_verify_jack(cfg):
    from .jack_general_beta import verify_jack_identities
    out = []
    for n, beta, K in cfg.jack_cases:
        out.append({"n": n, "beta": beta, "K": K, **verify_jack_identities(int(n), float(beta), int(K))})
    ok = all(r["all_ok"] for r in out)
    return json_doc(cfg, {"all_ok": ok, "cases": out}), EXIT_OK if ok else EXIT_VERIFY


DISPATCH = {"eqm": cmd_eqm, "phase": cmd_phase, "predict": cmd_predict, "sample": cmd_sample,
            "ks": cmd_ks, "verify-appendix": cmd_verify_appendix, "verify-jack": cmd_verify_jack}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    text, status = DISPATCH[cfg.command](cfg)
    _emit(cfg, text, stdout)
    return status


def main(argv=None, stdout=None, stderr=None) -> int:
    stderr = sys.stderr if stderr is None else stderr
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
        return run(cfg, stdout)
    except InputError as exc:
        stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (VerificationError, SpikedError) as exc:
        stderr.write(f"verification failure: {exc}\n")
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
