"""
Command-line front end.

    lie-cubics --config run.json --out results/ [--seed 0] [--verbose]

The config is one JSON document whose ``command`` field selects what runs:

``ivp``
    integrate an initial value problem and write a trajectory CSV
``plan``
    solve a sphere interpolation problem; writes a solution JSON, the
    trajectory CSV and a CSV of momentum norms
``check``
    run the invariant suite on random states and write a pass/fail report
``converge``
    self-convergence study, written as a JSON report

Exit codes: 0 success, 1 bad config, 2 numerical failure, 3 I/O failure.
Nothing is written unless the config validates.
"""
import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import logging
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import algebra as al
from . import diagnostics as dg
from . import planner as pl
from .errors import InvariantError, LieCubicsError, LineSearchFailure, NonConvergence
from .integrators import SCHEMES, HOHPState, StepParams, flow

log = logging.getLogger("lie_cubics")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

COMMANDS = ("ivp", "plan", "check", "converge")

DEFAULT_OUTPUTS = {
    "ivp": {"trajectory": "trajectory.csv"},
    "plan": {"solution": "solution.json", "trajectory": "trajectory.csv",
             "momenta": "momenta.csv"},
    "check": {"report": "check.json"},
    "converge": {"report": "convergence.json"},
}

TRAJECTORY_COLUMNS = (
    ["k", "t"] + [f"g{i}{j}" for i in range(3) for j in range(3)]
    + [f"{v}{i}" for v in ("xi", "mu", "nu", "J") for i in (1, 2, 3)] + ["H"]
)
MOMENTA_COLUMNS = ["k", "t", "node", "norm_J", "norm_mu", "norm_nu", "norm_xi"]


class ConfigError(LieCubicsError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class RunConfig:
    command: str
    scheme: str = "sv"
    h: float = None
    steps: int = None
    initial: HOHPState = None
    fp_tol: float = 1e-12
    fp_max_iter: int = 100
    problem: pl.PlanningProblem = None
    mu0: np.ndarray = None
    nu0: np.ndarray = None
    descent: pl.DescentOptions = None
    T: float = None
    h_list: list = None
    samples: int = 5
    outputs: dict = field(default_factory=dict)


# ------------------------------------------------------------------ parsing

def _real(d, key, where, default=None, positive=False):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}{key}: required field is missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}{key}: expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}{key}: must be positive, got {v!r}")
    return float(v)


def _int(d, key, where, default=None, minimum=0):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}{key}: required field is missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{where}{key}: expected an integer >= {minimum}, got {v!r}")
    return v


def _vec(d, key, where, default=None, n=3):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}{key}: required field is missing")
        return np.array(default, dtype=float)
    v = d[key]
    if (not isinstance(v, list) or len(v) != n
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
            or not all(math.isfinite(x) for x in v)):
        raise ConfigError(f"{where}{key}: expected {n} finite numbers, got {v!r}")
    return np.array(v, dtype=float)


def _group_element(d, where):
    if "g" not in d:
        return np.eye(3)
    v = d["g"]
    if isinstance(v, dict):
        if set(v) != {"axis_angle"}:
            raise ConfigError(f"{where}g: expected 9 reals or {{'axis_angle': [x, y, z]}}")
        from scipy.spatial.transform import Rotation

        return Rotation.from_rotvec(_vec(v, "axis_angle", where + "g.")).as_matrix()
    g = _vec(d, "g", where, n=9).reshape(3, 3)
    try:
        return al.check_rotation(g, tol=1e-9)
    except LieCubicsError as exc:
        raise ConfigError(f"{where}g: {exc}") from None


def _state(d, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where.rstrip('.')}: expected an object")
    g = _group_element(d, where)
    return HOHPState.make(g, _vec(d, "xi", where, (0, 0, 0)),
                          _vec(d, "mu", where, (0, 0, 0)), _vec(d, "nu", where, (0, 0, 0)))


def _descent_options(d, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where.rstrip('.')}: expected an object")
    known = {"max_iters", "step0", "armijo_c", "shrink", "grad_tol", "max_halvings",
             "adaptive_step", "direction"}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"{where}{sorted(extra)[0]}: unknown field")
    kw = {}
    for k in ("step0", "armijo_c", "shrink", "grad_tol"):
        if k in d:
            kw[k] = _real(d, k, where)
    for k in ("max_iters", "max_halvings"):
        if k in d:
            kw[k] = _int(d, k, where, minimum=1)
    if "adaptive_step" in d:
        if not isinstance(d["adaptive_step"], bool):
            raise ConfigError(f"{where}adaptive_step: expected true or false")
        kw["adaptive_step"] = d["adaptive_step"]
    if "direction" in d:
        kw["direction"] = d["direction"]
    try:
        return pl.DescentOptions(**kw)
    except LieCubicsError as exc:
        raise ConfigError(f"{where.rstrip('.')}: {exc}") from None


def _planning(d, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where.rstrip('.')}: expected an object")
    if d.get("preset") is not None:
        if d["preset"] != "sphere":
            raise ConfigError(f"{where}preset: only 'sphere' is available, got {d['preset']!r}")
        N = _int(d, "N", where, default=500, minimum=5)
        sigma = _real(d, "sigma", where, default=0.025, positive=True)
        try:
            return pl.sphere_problem(N, sigma)
        except ValueError as exc:
            raise ConfigError(f"{where}N: {exc}") from None
    T0 = _vec(d, "T0", where)
    xi0 = _vec(d, "xi0", where, (0, 0, 0))
    N = _int(d, "N", where, minimum=1)
    h = _real(d, "h", where, default=1.0 / N, positive=True)
    sigma = _real(d, "sigma", where, positive=True)
    raw = d.get("targets")
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}targets: expected a non-empty list of [node, [x, y, z]]")
    targets = []
    for i, item in enumerate(raw):
        if (not isinstance(item, list) or len(item) != 2
                or isinstance(item[0], bool) or not isinstance(item[0], int)):
            raise ConfigError(f"{where}targets[{i}]: expected [node, [x, y, z]]")
        targets.append((item[0], _vec({"p": item[1]}, "p", f"{where}targets[{i}].")))
    try:
        return pl.PlanningProblem(T0, tuple(targets), sigma, xi0, h, N)
    except LieCubicsError as exc:
        raise ConfigError(f"{where}targets: {exc}") from None


def parse_config(doc):
    """Validate a decoded JSON document and return a :class:`RunConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    cmd = doc.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command: expected one of {list(COMMANDS)}, got {cmd!r}")
    cfg = RunConfig(command=cmd)
    scheme = doc.get("scheme", "sv")
    if scheme not in SCHEMES:
        raise ConfigError(f"scheme: expected one of {sorted(SCHEMES)}, got {scheme!r}")
    cfg.scheme = scheme
    cfg.fp_tol = _real(doc, "fp_tol", "", default=1e-12, positive=True)
    cfg.fp_max_iter = _int(doc, "fp_max_iter", "", default=100, minimum=1)

    if cmd == "ivp":
        cfg.h = _real(doc, "h", "", positive=True)
        cfg.steps = _int(doc, "steps", "")
        cfg.initial = _state(doc.get("initial", {}), "initial.")
    elif cmd == "plan":
        cfg.problem = _planning(doc.get("planning"), "planning.")
        p = doc["planning"]
        cfg.mu0 = _vec(p, "mu0", "planning.", (0, 0, 0))
        cfg.nu0 = _vec(p, "nu0", "planning.", (0, 0, 0))
        cfg.descent = _descent_options(p.get("descent", {}), "planning.descent.")
    elif cmd == "converge":
        cfg.T = _real(doc, "T", "", positive=True)
        hl = doc.get("h_list")
        if (not isinstance(hl, list) or len(hl) < 3
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0
                           for x in hl)):
            raise ConfigError("h_list: expected at least three positive step sizes")
        for h in hl:
            n = round(cfg.T / h)
            if n < 1 or abs(n * h - cfg.T) > 1e-9 * cfg.T:
                raise ConfigError(f"h_list: step size {h} does not divide T = {cfg.T}")
        cfg.h_list = [float(x) for x in hl]
        cfg.initial = _state(doc.get("initial", {}), "initial.")
    elif cmd == "check":
        cfg.samples = _int(doc, "samples", "", default=5, minimum=1)

    outs = doc.get("outputs", {})
    if not isinstance(outs, dict):
        raise ConfigError("outputs: expected an object mapping output kind to file name")
    allowed = DEFAULT_OUTPUTS[cmd]
    for k, v in outs.items():
        if k not in allowed:
            raise ConfigError(f"outputs.{k}: unknown output for command {cmd!r}")
        if not isinstance(v, str) or not v:
            raise ConfigError(f"outputs.{k}: expected a file name")
    cfg.outputs = {**allowed, **outs}
    return cfg


# ------------------------------------------------------------------ writing

def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, columns, rows):
    with open(path, "w", newline="\n", encoding="ascii") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(str(v) if isinstance(v, (int, np.integer)) else _fmt(v)
                             for v in row) + "\n")


def write_json(path, obj):
    with open(path, "w", newline="\n", encoding="ascii") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def trajectory_rows(g, xi, mu, nu, h):
    J = np.einsum("kij,kj->ki", g, mu)
    H = 0.5 * np.einsum("ki,ki->k", nu, nu) + np.einsum("ki,ki->k", mu, xi)
    for k in range(len(xi)):
        yield ([k, k * h] + list(g[k].ravel()) + list(xi[k]) + list(mu[k])
               + list(nu[k]) + list(J[k]) + [H[k]])


# ------------------------------------------------------------------ commands

def _run_ivp(cfg, out):
    p = StepParams(cfg.h, cfg.fp_tol, cfg.fp_max_iter)
    traj = flow(cfg.initial, p, cfg.steps, cfg.scheme)
    g = np.array([s.g for s in traj])
    arr = [np.array([getattr(s, a) for s in traj]) for a in ("xi", "mu", "nu")]
    write_csv(out / cfg.outputs["trajectory"], TRAJECTORY_COLUMNS,
              trajectory_rows(g, *arr, cfg.h))


def _run_plan(cfg, out):
    prob = cfg.problem
    sol = pl.descend(prob, cfg.mu0, cfg.nu0, cfg.descent)
    tr = sol.trajectory
    nodes = {n for n, _ in prob.targets}
    J = tr.momentum()
    doc = {
        "mu0": sol.mu0.tolist(),
        "nu0": sol.nu0.tolist(),
        "cost": sol.cost,
        "energy": tr.energy,
        "penalty": tr.penalty,
        "iterations": sol.iterations,
        "reason": sol.reason,
        "grad_norm": sol.grad_norm_history[-1],
        "cost_history": [float(c) for c in sol.cost_history],
        "mismatch": pl.node_mismatches(prob, tr),
        "terminal_nu": tr.nu[-1].tolist(),
        "terminal_mu_residual": (tr.mu[-1] + tr.kick[-1]).tolist(),
        "problem": {"T0": prob.T0.tolist(), "sigma": prob.sigma, "h": prob.h, "N": prob.N,
                    "xi0": prob.xi0.tolist(),
                    "targets": [[n, p.tolist()] for n, p in prob.targets]},
    }
    write_json(out / cfg.outputs["solution"], doc)
    write_csv(out / cfg.outputs["trajectory"], TRAJECTORY_COLUMNS,
              trajectory_rows(tr.g, tr.xi, tr.mu, tr.nu, tr.h))
    norms = lambda a: np.sqrt(np.einsum("ki,ki->k", a, a))
    nJ, nmu, nnu, nxi = norms(J), norms(tr.mu), norms(tr.nu), norms(tr.xi)
    rows = ([k, k * tr.h, int(k in nodes), nJ[k], nmu[k], nnu[k], nxi[k]]
            for k in range(len(tr)))
    write_csv(out / cfg.outputs["momenta"], MOMENTA_COLUMNS, rows)
    return sol


def _random_state(rng, scale=1.0):
    from scipy.spatial.transform import Rotation

    g = Rotation.from_rotvec(rng.normal(size=3)).as_matrix()
    return HOHPState.make(g, *(scale * rng.normal(size=3) for _ in range(3)))


def check_suite(seed, samples, threads=1):
    """Invariant checks on random states; returns a JSON-ready report."""
    rng = np.random.default_rng(seed)
    states = [_random_state(rng) for _ in range(samples)]
    rots = [_random_state(rng).g for _ in range(samples)]
    probs = []
    for _ in range(samples):
        pts = rng.normal(size=(3, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        probs.append(pl.PlanningProblem(pts[0], ((10, pts[1]), (20, pts[2])),
                                        float(rng.uniform(0.2, 1.0)), rng.normal(size=3),
                                        0.05, 20))
    mu_nu = [rng.normal(size=6) for _ in range(samples)]

    def momentum(i, scheme):
        traj = flow(states[i], StepParams(0.05), 200, scheme)
        return dg.momentum_drift(traj), 1e-11 * (1 + np.linalg.norm(states[i].mu))

    def symplectic(i, scheme):
        return dg.check_symplectic(scheme, states[i], StepParams(0.1), 1e-5), 1e-6

    def translation(i, scheme):
        p = StepParams(0.05)
        step = SCHEMES[scheme]
        a = step(states[i].left_translate(rots[i]), p)
        b = step(states[i], p).left_translate(rots[i])
        return dg.state_distance(a, b), 1e-12

    def gradient(i, _):
        x = mu_nu[i]
        _, grad, _ = pl.gradient(probs[i], x[:3], x[3:])
        fd = pl.fd_gradient(probs[i], x[:3], x[3:])
        return float(np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-300)), 1e-5

    checks = [("momentum_conservation", momentum), ("symplecticity", symplectic),
              ("left_invariance", translation)]
    jobs = [(name, fn, i, sch) for name, fn in checks for sch in ("euler", "sv")
            for i in range(samples)]
    jobs += [("adjoint_gradient", gradient, i, "euler") for i in range(samples)]

    def run(job):
        name, fn, i, sch = job
        value, tol = fn(i, sch)
        return {"check": name, "scheme": sch, "sample": i, "value": float(value),
                "tol": float(tol), "pass": bool(value <= tol)}

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, jobs))
    return {"seed": seed, "samples": samples, "results": results,
            "pass": all(r["pass"] for r in results)}


def _threads():
    raw = os.environ.get("LIE_CUBICS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"LIE_CUBICS_THREADS: expected an integer, got {raw!r}") from None


def run(cfg, out, seed=0, threads=1):
    """Execute a validated config, writing into directory ``out``."""
    out.mkdir(parents=True, exist_ok=True)
    if cfg.command == "ivp":
        _run_ivp(cfg, out)
    elif cfg.command == "plan":
        _run_plan(cfg, out)
    elif cfg.command == "check":
        report = check_suite(seed, cfg.samples, threads)
        write_json(out / cfg.outputs["report"], report)
        if not report["pass"]:
            log.warning("some invariant checks failed; see %s", cfg.outputs["report"])
    elif cfg.command == "converge":
        rep = dg.convergence_order(cfg.scheme, cfg.initial, cfg.T, cfg.h_list,
                                   fp_tol=min(cfg.fp_tol, 1e-13))
        write_json(out / cfg.outputs["report"], rep.to_dict())
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="lie-cubics", description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--seed", type=int, default=0, help="seed for the randomised check suite")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config, encoding="utf-8") as f:
            doc = json.load(f)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(doc)
        threads = _threads()
    except (ConfigError, InvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg, Path(args.out), seed=args.seed, threads=threads)
    except NonConvergence as exc:
        print(f"error: {exc} (step {exc.step})", file=sys.stderr)
        return EXIT_NUMERIC
    except LineSearchFailure as exc:
        print(f"error: {exc} (iteration {exc.iteration})", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
