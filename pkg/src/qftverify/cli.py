"""Command-line driver: identity suites, Compton sweeps, potential tables and single amplitudes.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, plotting, potentials, scattering, suites, wick, xsection
from .errors import ConfigError, InvalidGrid, MalformedInput, QFTVerifyError
from .fields import fermion_spinors, photon_basis

CONFIG_SECTIONS = ("model", "measures", "multipliers", "sweep")

COLUMNS = {
    "verify": ["suite", "identity", "max_residual", "tol", "status", "error"],
    "compton": ["theta", "dsigma_feynman", "dsigma_constructed", "ratio", "fractional_error_bound"],
    "potential": ["r", "magnitude", "phase", "magnitude_closed_form", "r_times_magnitude", "regime"],
    "amplitude": ["variant", "term", "re", "im"],
}


# config and input parsing


def load_config(path) -> dict:
    if path is None:
        return {s: {} for s in CONFIG_SECTIONS}
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - set(CONFIG_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for s in CONFIG_SECTIONS:
        cfg.setdefault(s, {})
        if not isinstance(cfg[s], dict):
            raise ConfigError(f"config section {s!r} must be an object")
    return cfg


def _pick(cli_value, section: dict, key: str, default):
    if cli_value is not None:
        return cli_value
    return section.get(key, default)


def _measure(atoms, name: str) -> wick.DiscreteMeasure:
    try:
        return wick.DiscreteMeasure.from_atoms([(np.asarray(p, dtype=float), float(w)) for p, w in atoms])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"measure {name!r}: atoms must be [point, weight] pairs with weight > 0") from exc


def _complex_vector(data, name: str) -> np.ndarray:
    try:
        vals = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in data]
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"{name}: entries must be numbers or [re, im] pairs") from exc
    return np.array(vals)


def _multiplier(entry):
    entry = entry or {"type": "constant", "value": 1.0}
    kind = entry.get("type")
    if kind == "constant":
        v = float(entry.get("value", 1.0))
        return lambda p: v
    if kind == "yukawa":
        spec = _yukawa_spec(entry, {})
        return lambda p: potentials.u_s_invariant(spec, p)
    raise ConfigError(f"unknown multiplier type {kind!r}")


def _yukawa_spec(src: dict, cli: dict) -> potentials.YukawaSpec:
    keys = {"delta": 0.01, "epsilon": 1.0, "alpha": 1e-7, "c4": 1.0, "m": 1.0}
    vals = {k: float(cli.get(k) if cli.get(k) is not None else src.get(k, d)) for k, d in keys.items()}
    try:
        return potentials.YukawaSpec(**vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid(spec, lo, hi, n, name, log=False) -> np.ndarray:
    if isinstance(spec, list):
        g = np.asarray(spec, dtype=float)
    else:
        spec = spec or {}
        lo, hi, n = spec.get("min", lo), spec.get("max", hi), int(spec.get("n", n))
        if n < 1:
            raise InvalidGrid(f"{name} grid needs at least one point")
        if log:
            if lo <= 0 or hi <= 0:
                raise InvalidGrid(f"{name} grid bounds must be positive")
            g = np.geomspace(lo, hi, n)
        else:
            g = np.linspace(lo, hi, n)
    if g.size == 0 or not np.all(np.isfinite(g)):
        raise InvalidGrid(f"{name} grid is empty or not finite")
    return g


# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render(command: str, rows: list, fmt: str, meta: dict) -> str:
    if fmt == "json":
        return json.dumps(_jsonable({**meta, "rows": rows}), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    cols = [c for c in COLUMNS[command] if any(c in r for r in rows)] or COLUMNS[command]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def emit(text: str, out, plot=None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="\n") as fh:
        fh.write(text)
    if plot is not None:
        plot(out.with_suffix(".png"))


# commands


def cmd_verify(args, cfg) -> int:
    model = cfg["model"]
    corrupt = bool(args.corrupt_matlocal or model.get("corrupt", False))
    trials = args.trials if args.trials is not None else 100
    if trials < 1:
        raise InvalidGrid("trials must be positive")
    ctx = suites.Context(
        rng=np.random.default_rng(args.seed),
        trials=trials,
        tol=args.tol if args.tol is not None else suites.DEFAULT_TOL,
        mass=float(model.get("mass", 1.0)),
        corrupt=corrupt,
    )
    results = suites.run_suite(args.suite, ctx)
    if args.tol is not None:
        results = [suites.CheckRow(r.suite, r.identity, r.residual, args.tol, r.error) for r in results]
    rows = [
        {
            "suite": r.suite,
            "identity": r.identity,
            "max_residual": r.residual,
            "tol": r.tol,
            "status": "PASS" if r.passed else "FAIL",
            "error": r.error,
        }
        for r in results
    ]
    ok = all(r.passed for r in results)
    meta = {"command": "verify", "suite": args.suite, "seed": args.seed, "trials": trials, "passed": ok}
    emit(render("verify", rows, args.format, meta), args.out, None if args.no_plot else lambda p: plotting.plot_verify(rows, p))
    for r in results:
        if not r.passed:
            what = r.error or f"residual {r.residual:.3e} > tol {r.tol:.1e}"
            print(f"FAIL {r.suite}.{r.identity}: {what}", file=sys.stderr)
    return 0 if ok else 1


def cmd_compton(args, cfg) -> int:
    model, sweep = cfg["model"], cfg["sweep"]
    m = float(_pick(args.mass, model, "mass", 1.0))
    e = float(_pick(args.charge, model, "charge", 1.0))
    rho = float(_pick(args.rho_hat, sweep, "rho_hat", 1e-3))
    variant = _pick(args.variant, sweep, "variant", "both")
    if variant not in ("feynman", "constructed", "both"):
        raise ConfigError(f"unknown variant {variant!r}")
    if rho <= 0 or m <= 0:
        raise InvalidGrid("photon energy and mass must be positive")
    tspec = sweep.get("theta")
    if any(v is not None for v in (args.theta_min, args.theta_max, args.n_theta)):
        tspec = {
            "min": args.theta_min if args.theta_min is not None else 0.0,
            "max": args.theta_max if args.theta_max is not None else np.pi,
            "n": args.n_theta if args.n_theta is not None else 19,
        }
    theta = _grid(tspec, 0.0, np.pi, 19, "theta")
    if np.any(theta < 0) or np.any(theta > np.pi + 1e-12):
        raise InvalidGrid("theta must lie in [0, pi]")
    rows = []
    for t in theta:
        row = {"theta": float(t)}
        if variant in ("feynman", "both"):
            row["dsigma_feynman"] = xsection.compton_dsigma(rho, t, m, e, "feynman")
        if variant in ("constructed", "both"):
            row["dsigma_constructed"] = xsection.compton_dsigma(rho, t, m, e, "constructed")
        if variant == "both":
            row["ratio"] = row["dsigma_constructed"] / row["dsigma_feynman"]
        row["fractional_error_bound"] = scattering.fractional_error(rho, t, m)
        rows.append(row)
    meta = {"command": "compton", "rho_hat": rho, "mass": m, "charge": e, "variant": variant}
    if variant == "both":
        meta["max_abs_ratio_minus_one"] = max(abs(r["ratio"] - 1) for r in rows)
    emit(render("compton", rows, args.format, meta), args.out, None if args.no_plot else lambda p: plotting.plot_compton(rows, p))
    return 0


def _regime(spec: potentials.YukawaSpec, r: float) -> str:
    if r < spec.yukawa_onset:
        return "short"
    return "coulomb" if r < 1 / spec.epsilon else "yukawa"


def cmd_potential(args, cfg) -> int:
    mult = cfg["multipliers"].get("U2", {})
    if mult and mult.get("type", "yukawa") != "yukawa":
        raise ConfigError("the potential command needs a yukawa U2 multiplier")
    cli = {"delta": args.delta, "epsilon": args.epsilon, "alpha": args.alpha, "c4": args.c4, "m": args.mass}
    src = dict(mult)
    src.setdefault("c4", cfg["multipliers"].get("c4", 1.0))
    src.setdefault("m", cfg["model"].get("mass", 1.0))
    spec = _yukawa_spec(src, cli)
    rspec = cfg["sweep"].get("r")
    if any(v is not None for v in (args.r_min, args.r_max, args.n_r)):
        rspec = {
            "min": args.r_min if args.r_min is not None else 1e-2,
            "max": args.r_max if args.r_max is not None else 5.0,
            "n": args.n_r if args.n_r is not None else 40,
        }
    r = _grid(rspec, 1e-2, 5.0, 40, "r", log=True)
    if np.any(r <= 0):
        raise InvalidGrid("r must be positive")
    p1 = np.array([0.0, 0.0, float(_pick(args.p1, cfg["sweep"], "p1", 0.0))])
    rows = []
    for ri in r:
        pv = potentials.equivalent_potential(spec, p1, float(ri))
        closed = potentials.equivalent_potential(spec, p1, float(ri), quadrature=False)
        rows.append(
            {
                "r": float(ri),
                "magnitude": pv.magnitude,
                "phase": pv.phase,
                "magnitude_closed_form": closed.magnitude,
                "r_times_magnitude": float(ri) * pv.magnitude,
                "regime": _regime(spec, float(ri)),
            }
        )
    window = [row for row in rows if row["r"] >= 3 * spec.yukawa_onset]
    fit = None
    if len(window) >= 2:
        C, eps = potentials.fit_yukawa([w["r"] for w in window], [w["magnitude"] for w in window])
        C /= potentials.potential_prefactor(spec, p1) / potentials.potential_prefactor(spec, np.zeros(3))
        fit = {"C": C, "epsilon": eps, "strength": spec.strength, "relative_error": abs(C / spec.strength - 1)}
    meta = {
        "command": "potential",
        "spec": {"delta": spec.delta, "epsilon": spec.epsilon, "alpha": spec.alpha, "c4": spec.c4, "m": spec.m},
        "near_constant": spec.near_constant,
        "yukawa_onset": spec.yukawa_onset,
        "fit": fit,
    }
    emit(
        render("potential", rows, args.format, meta),
        args.out,
        None if args.no_plot else lambda p: plotting.plot_potential(rows, p, fit),
    )
    return 0


def _read_kinematics(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise MalformedInput(f"cannot read kinematics file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"kinematics file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "momenta" not in data:
        raise MalformedInput("kinematics file needs a 'momenta' entry")
    try:
        moms = [np.asarray(p, dtype=float) for p in data["momenta"]]
    except (TypeError, ValueError) as exc:
        raise MalformedInput("momenta must be numeric four-vectors") from exc
    if len(moms) != 4 or any(p.shape != (4,) for p in moms):
        raise MalformedInput("momenta must be four four-vectors")
    data["momenta"] = moms
    return data


def _result_record(res: scattering.AmplitudeResult) -> dict:
    return {
        "value": [res.value.real, res.value.imag],
        "abs2": res.abs2,
        "channel_terms": {k: [complex(v).real, complex(v).imag] for k, v in res.channel_terms.items()},
        "coefficients": {k: [complex(v).real, complex(v).imag] for k, v in res.coefficients.items()},
        "provenance": res.provenance,
    }


def cmd_amplitude(args, cfg) -> int:
    data = _read_kinematics(args.kinematics)
    process = data.get("process", "compton")
    m = float(data.get("mass", cfg["model"].get("mass", 1.0)))
    p1, p2, p3, p4 = data["momenta"]
    results = {}
    if process == "compton":
        e = float(data.get("charge", cfg["model"].get("charge", 1.0)))
        idx = {k: int(data.get(k, 0)) for k in ("pol1", "pol3", "spin2", "spin4")}
        if any(v not in (0, 1) for v in idx.values()):
            raise MalformedInput("polarization and spin indices must be 0 or 1")
        scattering.ScatterKinematics(p1, p2, p3, p4, mass=m).check_conservation()
        kin = scattering.ScatterKinematics(
            p1, p2, p3, p4,
            w1=photon_basis(p1)[1 + idx["pol1"]],
            w2=fermion_spinors(p2, m)[idx["spin2"]],
            w3=photon_basis(p3)[1 + idx["pol3"]],
            w4=fermion_spinors(p4, m)[idx["spin4"]],
            mass=m,
        )
        results["feynman"] = _result_record(scattering.feynman_compton(kin, e))
        results["constructed"] = _result_record(scattering.constructed_compton(kin, e))
    elif process == "scalar":
        kin = scattering.ScatterKinematics(p1, p2, p3, p4, mass=m, labels=tuple(data.get("labels", ("a", "b", "a", "b"))))
        kin.check_conservation()
        U = _multiplier(cfg["multipliers"].get("U2"))
        c4 = float(cfg["multipliers"].get("c4", 1.0))
        results["constructed"] = _result_record(scattering.scalar_amplitude(kin, U, c4=c4))
    elif process == "general":
        pols = data.get("polarizations")
        if not isinstance(pols, list) or len(pols) != 4:
            raise MalformedInput("general process needs four 12-component polarizations")
        ws = [_complex_vector(w, f"polarization {i + 1}") for i, w in enumerate(pols)]
        if any(w.shape != (12,) for w in ws):
            raise MalformedInput("polarizations must have 12 components")
        kin = scattering.ScatterKinematics(p1, p2, p3, p4, *ws, mass=m)
        kin.check_conservation()
        meas, mult = cfg["measures"], cfg["multipliers"]
        B = _measure(meas["mu_s"], "mu_s") if "mu_s" in meas else None
        Ups = None
        if "upsilon" in meas:
            um = _measure(meas["upsilon"], "upsilon")
            Ups = lambda p: wick.upsilon(um, p)
        betas = {}
        if "beta" in meas:
            bm = _measure(meas["beta"], "beta")
            betas = {j: wick.beta(bm, j) for j in (2, 3, 4)}
        vs = mult.get("varsigma2", 1.0)
        try:
            spec = scattering.MultiplierSpec(
                U={2: _multiplier(mult.get("U2"))},
                Upsilon=Ups,
                beta=betas,
                c4=float(mult.get("c4", 1.0)),
                varsigma2=complex(*vs) if isinstance(vs, list) else complex(vs),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        results["constructed"] = _result_record(scattering.constructed_amplitude(kin, spec, B_measure=B))
    else:
        raise MalformedInput(f"unknown process {process!r}")
    record = {"command": "amplitude", "process": process, "mass": m, "results": results}
    if args.format == "json":
        text = json.dumps(_jsonable(record), indent=2) + "\n"
    else:
        rows = [
            {"variant": v, "term": t, "re": c[0], "im": c[1]}
            for v, res in results.items()
            for t, c in [("total", res["value"]), *res["channel_terms"].items()]
        ]
        text = render("amplitude", rows, "csv", {})
    emit(text, args.out, None if args.no_plot else lambda p: plotting.plot_amplitude(record, p))
    return 0


# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config with sections model, measures, multipliers, sweep")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file; a PNG with the same stem is written next to it")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--no-plot", action="store_true", help="skip the PNG next to --out")

    p = argparse.ArgumentParser(prog="qftverify", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run randomized identity suites")
    v.add_argument("--suite", choices=(*suites.SUITES, "all"), default="all")
    v.add_argument("--corrupt-matlocal", action="store_true", help="debug: flip the fermion mass sign in M(-p)")

    c = sub.add_parser("compton", parents=[common], help="spin-averaged Compton cross sections over angle")
    c.add_argument("--rho-hat", type=float, help="photon energy in the electron rest frame")
    c.add_argument("--theta-min", type=float)
    c.add_argument("--theta-max", type=float)
    c.add_argument("--n-theta", type=int)
    c.add_argument("--variant", choices=("feynman", "constructed", "both"))
    c.add_argument("--mass", type=float)
    c.add_argument("--charge", type=float)

    q = sub.add_parser("potential", parents=[common], help="equivalent Yukawa potential table")
    for name in ("delta", "epsilon", "alpha", "c4", "mass", "p1", "r-min", "r-max"):
        q.add_argument(f"--{name}", type=float)
    q.add_argument("--n-r", type=int)

    a = sub.add_parser("amplitude", parents=[common], help="single-point amplitude from a kinematics file")
    a.add_argument("kinematics", help="JSON file with momenta and polarization data")
    return p


COMMANDS = {"verify": cmd_verify, "compton": cmd_compton, "potential": cmd_potential, "amplitude": cmd_amplitude}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except QFTVerifyError as exc:
        # input problems are ValueError subclasses; anything else is a failed check
        code = 2 if isinstance(exc, ValueError) else 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
