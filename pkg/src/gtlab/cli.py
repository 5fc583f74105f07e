"""Batch command-line entry point.

One process runs one job described by a JSON config: the requested command
(verify / collide / pushforward / potentials / gtsys / hydro / reconstruct /
rauch / report), a structure name from the catalog, and seeded numeric
parameters.  The run emits a machine-readable JSON report (deterministic
bytes for a fixed config and seed: complex numbers as [re, im] pairs,
fixed key order, no timing inside) plus an adjacent plain-text summary
which carries the wall-clock timing.

Exit codes: 0 all identities pass, 1 numeric failure (report written),
2 config/schema violation (no report body), 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Any

import numpy as np

from . import __version__, catalog, gtsys, hierarchy, hyperell
from .core import (
    CoordinateChange,
    collide_points_closed,
    pushforward,
    verify_all,
    verify_lambda,
    verify_potential,
)
from .errors import ConfigError, GTLabError
from .kernel import Domain, JetEvaluator

COMMON_KEYS = {"command", "structure", "n", "seed", "samples", "tol", "out"}
COMMAND_KEYS = {
    "verify": set(),
    "collide": {"groups"},
    "pushforward": {"scale"},
    "potentials": set(),
    "gtsys": {"M", "states", "steps", "h"},
    "hydro": {"z_count", "svd_tol", "triple"},
    "reconstruct": {"pair", "index"},
    "rauch": {"moduli", "delta", "nodes", "branch"},
    "report": set(),
}
POSITIVE_KEYS = {"n", "samples", "tol", "M", "states", "steps", "h",
                 "z_count", "svd_tol", "delta", "nodes"}
DEFAULT_N = {"benney": 3, "genus0": 2, "genus1": 2}


def validate_config(cfg: dict) -> dict:
    """Schema check; raises ConfigError with a reason on any violation."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    command = cfg.get("command")
    if command not in COMMAND_KEYS:
        raise ConfigError(f"unknown or missing command: {command!r}")
    allowed = COMMON_KEYS | COMMAND_KEYS[command]
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "seed" not in cfg:
        raise ConfigError("seed is mandatory (no wall-clock defaults)")
    seed = cfg["seed"]
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    for key in POSITIVE_KEYS:
        if key in cfg:
            val = cfg[key]
            if not isinstance(val, (int, float)) or isinstance(val, bool) or val <= 0:
                raise ConfigError(f"{key} must be a positive number, got {val!r}")
    if command not in ("rauch",):
        name = cfg.get("structure")
        if command != "report" and name not in catalog.CATALOG:
            raise ConfigError(
                f"unknown structure {name!r}; choose from "
                f"{sorted(catalog.CATALOG)}"
            )
    if command == "rauch":
        moduli = cfg.get("moduli", [1.5, 2.9, 4.1])
        if (not isinstance(moduli, (list, tuple)) or len(moduli) != 3
                or not all(isinstance(x, (int, float)) for x in moduli)):
            raise ConfigError("moduli must be three real numbers")
        a, b, c = moduli
        if not 1.0 < a < b < c:
            raise ConfigError(
                "moduli must satisfy 1 < a < b < c with distinct values"
            )
    if command == "hydro":
        triple = cfg.get("triple", [0, 1, 2])
        if len(set(triple)) != 3:
            raise ConfigError("triple must be three distinct indices")
    return cfg


def _build(cfg):
    ent = catalog.CATALOG[cfg["structure"]]
    if ent.takes_n:
        n = int(cfg.get("n", DEFAULT_N.get(ent.name, 2)))
        return ent, ent.build(n), n
    return ent, ent.build(), None


def _build_enhanced(cfg):
    ent = catalog.CATALOG[cfg["structure"]]
    if ent.build_enhanced is None:
        raise ConfigError(f"{ent.name} has no enhancement in the catalog")
    if ent.takes_n:
        n = int(cfg.get("n", DEFAULT_N.get(ent.name, 2)))
        return ent, ent.build_enhanced(n), n
    return ent, ent.build_enhanced(), None


def _pseudo(identity: str, value: float, tol: float, seed: int, ok: bool,
            **params) -> dict:
    """A report entry for scalar outcomes that are not sampled residuals."""
    return {
        "identity": identity,
        "samples": 1,
        "max_residual": float(value),
        "mean_residual": float(value),
        "tolerance": float(tol),
        "pass": bool(ok),
        "seed": seed,
        "params": params,
    }


# ---------------------------------------------------------------------------
# command handlers: each returns (report_entries, extras)
# ---------------------------------------------------------------------------


def _cmd_verify(cfg):
    samples = int(cfg.get("samples", 100))
    tol = float(cfg.get("tol", 1e-8))
    seed = cfg["seed"]
    ent, s, _ = _build(cfg)
    reports = [r.as_dict() for r in verify_all(s, samples, seed, tol)]
    if ent.build_enhanced is not None:
        _, enh, n = _build_enhanced(cfg)
        reports.append(verify_lambda(enh, samples, seed + 3, tol).as_dict())
    return reports, {}


def _cmd_potentials(cfg):
    samples = int(cfg.get("samples", 50))
    tol = float(cfg.get("tol", 1e-8))
    seed = cfg["seed"]
    ent, enh, n = _build_enhanced(cfg)
    if ent.potentials is None:
        raise ConfigError(f"{ent.name} has no catalog potentials")
    pots = ent.potentials(n) if ent.takes_n else ent.potentials()
    reports = []
    for idx, pot in enumerate(pots):
        rep = verify_potential(enh, pot, samples, seed + idx, tol)
        reports.append(rep.as_dict())
    return reports, {}


def _cmd_collide(cfg):
    samples = int(cfg.get("samples", 40))
    tol = float(cfg.get("tol", 1e-6))
    seed = cfg["seed"]
    ent, s, _ = _build(cfg)
    groups = cfg.get("groups", [[0, 1]])
    for grp in groups:
        for slot in grp:
            if not isinstance(slot, int) or not 0 <= slot < s.m:
                raise ConfigError(f"collision slot {slot!r} out of range")
    collided = collide_points_closed(s, groups)
    reports = [r.as_dict() for r in verify_all(collided, samples, seed, tol)]
    return reports, {"collided_label": collided.label, "m": collided.m}


def _cmd_pushforward(cfg):
    samples = int(cfg.get("samples", 40))
    tol = float(cfg.get("tol", 1e-6))
    seed = cfg["seed"]
    scale = float(cfg.get("scale", 0.05))
    ent, s, _ = _build(cfg)
    m = s.m

    def mu_fn(*args):
        return args[0] + scale * args[1] * args[0] ** 2

    def mu_pf(args, multi):
        pt, u1 = args[0], args[1]
        k, r = multi[0], multi[1]
        if any(multi[2:]) or r > 1 or k > 2:
            return 0.0 + 0.0j
        table = {
            (0, 0): pt + scale * u1 * pt**2,
            (1, 0): 1.0 + 2.0 * scale * u1 * pt,
            (2, 0): 2.0 * scale * u1,
            (0, 1): scale * pt**2,
            (1, 1): 2.0 * scale * pt,
            (2, 1): 2.0 * scale,
        }
        return table[(k, r)]

    mu = JetEvaluator(1 + m, mu_fn, domain=Domain(), partial_fn=mu_pf,
                      label="mu")
    pushed = pushforward(s, CoordinateChange(mu))
    reports = [r.as_dict() for r in verify_all(pushed, samples, seed, tol)]
    return reports, {"mu": "p + scale*u1*p^2", "scale": scale}


def _cmd_gtsys(cfg):
    seed = cfg["seed"]
    tol = float(cfg.get("tol", 1e-9))
    states = int(cfg.get("states", 50))
    M = int(cfg.get("M", 3))
    ent, s, _ = _build(cfg)
    sys_ = gtsys.build_system(s, extra_exclusions=ent.gt_exclusions)
    comp = gtsys.compatibility_residual(sys_, M=M, states=states, seed=seed,
                                        tol=tol)
    reports = [
        _pseudo("gt_compatibility", comp.max_residual, tol, seed,
                comp.passed, M=M, states=comp.states,
                mean_residual=comp.mean_residual)
    ]
    steps = int(cfg.get("steps", 10))
    h = float(cfg.get("h", 0.02))
    ratio, coarse, fine = gtsys.convergence_ratio(sys_, M=2, steps=steps,
                                                  h=h, seed=seed)
    ok = 3.5 <= ratio <= 4.5 and not coarse.blow_up and not fine.blow_up
    reports.append(
        _pseudo("reduction_order", ratio, 4.5, seed, ok, steps=steps, h=h,
                coarse_residual=coarse.residual, fine_residual=fine.residual)
    )
    return reports, {}


def _cmd_hydro(cfg):
    seed = cfg["seed"]
    tol = float(cfg.get("tol", 1e-8))
    z_count = int(cfg.get("z_count", 40))
    svd_tol = float(cfg.get("svd_tol", 1e-8))
    i, j, k = cfg.get("triple", [0, 1, 2])
    ent, enh, n = _build_enhanced(cfg)
    if ent.potentials is None:
        raise ConfigError(f"{ent.name} has no catalog potentials")
    pots = ent.potentials(n) if ent.takes_n else ent.potentials()
    fam = hierarchy.PotentialFamily(enh.base, pots, enhanced=enh,
                                    label=ent.name)
    _, v = fam.structure.sample(1, seed, 1)[0]
    D = hierarchy.dimension_D(fam, i, j, k, v, z_count=z_count, seed=seed,
                              svd_tol=svd_tol)
    hs = hierarchy.hydro_coefficients(fam, i, j, k, v, z_count=z_count,
                                      seed=seed, svd_tol=svd_tol,
                                      residual_tol=tol)
    ok = fam.m <= D <= 2 * fam.m - 1 and hs.expansion_residual < tol
    reports = [
        _pseudo("hydro_dimension", float(D), float(2 * fam.m - 1), seed,
                fam.m <= D <= 2 * fam.m - 1, m=fam.m, triple=[i, j, k]),
        _pseudo("hydro_expansion", hs.expansion_residual, tol, seed,
                hs.expansion_residual < tol, D=hs.D,
                rank_abc=hs.rank_abc),
    ]
    extras = {
        "D": D,
        "fiber_point": list(v),
        "matrices": [
            {"name": name, "rows": hs.D, "cols": fam.m,
             "row_index": "equation r", "col_index": "field l",
             "data": mat.tolist()}
            for name, mat in (("a", hs.a), ("b", hs.b), ("c", hs.c))
        ],
        "basis_rows": list(hs.basis_rows),
    }
    return reports, extras


def _cmd_reconstruct(cfg):
    seed = cfg["seed"]
    tol = float(cfg.get("tol", 1e-8))
    samples = int(cfg.get("samples", 30))
    pair = cfg.get("pair", [0, 1])
    index = int(cfg.get("index", 0))
    ent, enh, n = _build_enhanced(cfg)
    if ent.potentials is None:
        raise ConfigError(f"{ent.name} has no catalog potentials")
    pots = ent.potentials(n) if ent.takes_n else ent.potentials()
    fam = hierarchy.PotentialFamily(enh.base, pots, enhanced=enh,
                                    label=ent.name)
    i, j = pair
    _, rep_f = hierarchy.reconstruct_f(fam, i, j, samples=samples,
                                       seed=seed, tol=tol)
    _, rep_l = hierarchy.reconstruct_lambda(fam, index, samples=samples,
                                            seed=seed + 1, tol=tol)
    return [rep_f.as_dict(), rep_l.as_dict()], {}


def _cmd_rauch(cfg):
    seed = cfg["seed"]
    tol = float(cfg.get("tol", 1e-4))
    moduli = cfg.get("moduli", [1.5, 2.9, 4.1])
    delta = float(cfg.get("delta", 1e-4))
    nodes = int(cfg.get("nodes", hyperell.DEFAULT_NODES))
    branches = [int(cfg["branch"])] if "branch" in cfg else [0, 1, 2]
    pd = hyperell.periods(moduli, nodes=nodes)
    reports = [
        _pseudo("period_symmetry", pd.symmetry_error, 1e-8, seed,
                pd.symmetry_error < 1e-8, moduli=list(moduli)),
        _pseudo("period_positivity", float(min(pd.im_eigenvalues)), 0.0,
                seed, pd.positive, note="pass iff Im B positive definite"),
    ]
    for branch in branches:
        rd = hyperell.rauch_check(moduli, branch, delta=delta, nodes=nodes)
        reports.append(
            _pseudo("rauch_variation", rd.max_rel_error, tol, seed,
                    rd.max_rel_error < tol, branch=branch, delta=delta,
                    step_stability=rd.step_stability)
        )
    extras = {"period_matrix": pd.B.tolist()}
    return reports, extras


def _cmd_report(cfg):
    seed = cfg["seed"]
    samples = int(cfg.get("samples", 40))
    reports = []
    for name, ent in catalog.CATALOG.items():
        sub = dict(cfg)
        sub["structure"] = name
        sub["samples"] = samples
        sub["tol"] = 1e-6 if name == "genus2" else 1e-8
        entries, _ = _cmd_verify(sub)
        for e in entries:
            e["params"]["structure"] = name
        reports.extend(entries)
    return reports, {}


HANDLERS = {
    "verify": _cmd_verify,
    "collide": _cmd_collide,
    "pushforward": _cmd_pushforward,
    "potentials": _cmd_potentials,
    "gtsys": _cmd_gtsys,
    "hydro": _cmd_hydro,
    "reconstruct": _cmd_reconstruct,
    "rauch": _cmd_rauch,
    "report": _cmd_report,
}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _jsonify(obj: Any) -> Any:
    """Deterministic JSON form: complex -> [re, im], numpy -> python."""
    if isinstance(obj, complex):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.complexfloating,)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(x) for x in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def emit_report(report: dict, path: str, summary: str) -> None:
    """Atomic JSON write plus an adjacent .txt human summary."""
    payload = json.dumps(_jsonify(report), indent=2, ensure_ascii=False)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(payload)
        fh.write("\n")
    os.replace(tmp, path)
    stem, _ = os.path.splitext(path)
    with open(stem + ".txt", "w", encoding="utf-8") as fh:
        fh.write(summary)


def _summary_text(report: dict, elapsed: float) -> str:
    lines = [
        f"gtlab {report['artifact_version']} - command "
        f"{report['config'].get('command')}",
        f"elapsed: {elapsed:.2f} s",
    ]
    for entry in report["reports"]:
        verdict = "PASS" if entry["pass"] else "FAIL"
        lines.append(
            f"  [{verdict}] {entry['identity']}: max residual "
            f"{entry['max_residual']:.3e} (tol {entry['tolerance']:.1e})"
        )
    lines.append(f"verdict: {report['verdict']}")
    return "\n".join(lines) + "\n"


def run(cfg: dict, out_path: str | None) -> int:
    try:
        cfg = validate_config(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    error = None
    try:
        entries, extras = HANDLERS[cfg["command"]](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GTLabError as exc:
        entries, extras = [], {}
        error = f"{type(exc).__name__}: {exc}"
    verdict = "pass" if entries and all(e["pass"] for e in entries) else "fail"
    if error is not None:
        verdict = "fail"
    report = {
        "artifact_version": __version__,
        "config": cfg,
        "reports": entries,
        "extras": extras,
        "error": error,
        "verdict": verdict,
    }
    elapsed = time.perf_counter() - t0
    out = out_path or cfg.get("out") or "gtlab-report.json"
    try:
        emit_report(report, out, _summary_text(report, elapsed))
    except OSError as exc:
        print(f"i/o error writing report: {exc}", file=sys.stderr)
        return 3
    print(_summary_text(report, elapsed), end="")
    return 0 if verdict == "pass" else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gtlab",
        description="verify and analyze GT structures from the catalog",
    )
    parser.add_argument("--config", help="path to a JSON job config")
    parser.add_argument("--out", help="report output path (JSON)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--list-structures", action="store_true",
                        help="print catalog names and exit")
    args = parser.parse_args(argv)
    if args.list_structures:
        for name, ent in catalog.CATALOG.items():
            print(f"{name}: {ent.description}")
        return 0
    if not args.config:
        parser.error("--config is required (or use --list-structures)")
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"config is not valid JSON: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        if not isinstance(cfg, dict):
            print("config must be a JSON object", file=sys.stderr)
            return 2
        cfg["seed"] = args.seed
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
