"""Command-line front end.

Every subcommand reads JSON inputs (see :mod:`diagmink.schemas`) and writes a
JSON envelope ``{command, seed?, tolerances, verdict?, certified?, result}``
or CSV. Exit codes: 0 computed / verdict true, 1 verdict false or witness
found, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bodies, schemas, stable, transforms, universality
from .bodies import MERGE_TOL, DimensionError, Polygon2D, UnsupportedBodyError

EXIT_OK, EXIT_FALSE, EXIT_INPUT = 0, 1, 2

RANDOMIZED = {"stable-sample", "laplace-verify", "maxstable-sample", "cdf-verify"}


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    seed: int = stable.DEFAULT_SEED
    grid_size: int | None = None
    tol: float | None = None
    out: str | None = None
    format: str = "json"
    dump_grid: str | None = None
    options: dict = field(default_factory=dict)


@dataclass
class Outcome:
    result: dict
    tolerances: dict
    verdict: bool | None = None
    certified: bool | None = None
    table: tuple[list[str], list[list]] | None = None


# -- helpers --------------------------------------------------------------------------------


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")], dtype=float)
    except ValueError:
        raise InputError(f"cannot parse vector {text!r}; use comma-separated numbers") from None


def _parse_index_set(text: str, n: int) -> list[int]:
    try:
        idx = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"cannot parse index set {text!r}") from None
    if not idx or min(idx) < 1 or max(idx) > n or len(set(idx)) != len(idx):
        raise InputError(f"index set {text!r} must list distinct indices in 1..{n}")
    return sorted(i - 1 for i in idx)


def _directions(cfg: RunConfig, n: int, default_size: int) -> np.ndarray:
    us = cfg.options.get("u") or []
    if us:
        U = np.array([_parse_vector(u) for u in us])
        if U.shape[1] != n:
            raise InputError(f"direction has dimension {U.shape[1]}, input has {n}")
        return U
    size = cfg.grid_size or default_size
    if n == 1:
        size = 2
    return transforms.DirectionGrid.fibonacci(n, size).points


def _single_direction(cfg: RunConfig, n: int) -> np.ndarray:
    us = cfg.options.get("u") or []
    if len(us) != 1:
        raise InputError("this command needs exactly one --u direction")
    u = _parse_vector(us[0])
    if u.shape != (n,):
        raise InputError(f"direction has dimension {len(u)}, input has {n}")
    return u


def _dump_grid(cfg: RunConfig, U: np.ndarray) -> None:
    if cfg.dump_grid:
        with open(cfg.dump_grid, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"u{i + 1}" for i in range(U.shape[1])])
            for row in U:
                w.writerow([repr(float(x)) for x in row])


def _rows(U: np.ndarray, *cols: np.ndarray) -> list[list]:
    return [list(map(float, u)) + [float(c[k]) for c in cols] for k, u in enumerate(U)]


def _ucols(n: int) -> list[str]:
    return [f"u{i + 1}" for i in range(n)]


def _verdict_json(v: universality.Verdict) -> dict:
    out = {"holds": v.holds, "mode": v.mode, "certified": v.certified, "detail": v.detail}
    out["witness"] = None if v.witness is None else [float(x) for x in v.witness]
    return out


# -- commands -------------------------------------------------------------------------------


def cmd_support_eval(cfg: RunConfig) -> Outcome:
    K = schemas.read_body(cfg.inputs[0])
    U = _directions(cfg, K.dim, 64 * K.dim * K.dim)
    _dump_grid(cfg, U)
    vals = bodies.support(K, U)
    return Outcome(
        {"directions": U, "values": vals},
        {"zero_tol": bodies.ZERO_TOL},
        table=(_ucols(K.dim) + ["h"], _rows(U, vals)),
    )


def cmd_k_transform(cfg: RunConfig) -> Outcome:
    K = schemas.read_body(cfg.inputs[0])
    mu = schemas.read_measure(cfg.inputs[1])
    if mu.dim != K.dim:
        raise InputError(f"measure has dimension {mu.dim}, body has {K.dim}")
    U = _directions(cfg, K.dim, 64 * K.dim * K.dim)
    _dump_grid(cfg, U)
    vals = transforms.k_transform(K, mu, U)
    return Outcome(
        {"directions": U, "values": vals},
        {"weight_drop": 1e-15},
        table=(_ucols(K.dim) + ["T"], _rows(U, vals)),
    )


def cmd_zonoid_equiv(cfg: RunConfig) -> Outcome:
    xi, eta = schemas.read_law(cfg.inputs[0]), schemas.read_law(cfg.inputs[1])
    tol = cfg.tol if cfg.tol is not None else MERGE_TOL
    grid = None
    mode = cfg.options.get("mode") or "exact"
    if mode == "sampled":
        grid = transforms.DirectionGrid.fibonacci(xi.dim, cfg.grid_size or 64 * xi.dim**2)
        _dump_grid(cfg, grid.points)
    v = universality.zonoid_equivalent(xi, eta, mode=mode, tol=tol, grid=grid)
    tols = {"tol": tol} if mode == "exact" else {"rtol": universality.SAMPLED_RTOL}
    return Outcome(_verdict_json(v), tols, verdict=v.holds, certified=v.certified)


def cmd_as_check(cfg: RunConfig) -> Outcome:
    L = schemas.read_body(cfg.inputs[0])
    if not cfg.options.get("J"):
        raise InputError("as-check needs --J, e.g. --J 1,2")
    J = _parse_index_set(cfg.options["J"], L.dim)
    mode = cfg.options.get("mode") or "auto"
    grid = None
    if mode == "sampled":
        grid = transforms.DirectionGrid.fibonacci(len(J), cfg.grid_size or 64 * len(J) ** 2)
    v = universality.as_condition(L, J, mode=mode, grid=grid)
    result = _verdict_json(v)
    result["J"] = [j + 1 for j in J]
    tols = {"merge_tol": MERGE_TOL} if v.mode == "exact" else {"rtol": universality.SAMPLED_RTOL}
    return Outcome(result, tols, verdict=v.holds, certified=v.certified)


def cmd_d_universal(cfg: RunConfig) -> Outcome:
    K = schemas.read_body(cfg.inputs[0])
    rep = universality.d_universal(K)
    return Outcome(rep.to_json(), {"merge_tol": MERGE_TOL, "zero_tol": bodies.ZERO_TOL}, verdict=rep.verdict)


def cmd_uncond_universal(cfg: RunConfig) -> Outcome:
    K = schemas.read_body(cfg.inputs[0])
    rep = universality.unconditionally_d_universal(K)
    return Outcome(rep.to_json(), {"merge_tol": MERGE_TOL, "zero_tol": bodies.ZERO_TOL}, verdict=rep.verdict)


def cmd_inject_probe(cfg: RunConfig) -> Outcome:
    K = schemas.read_body(cfg.inputs[0])
    mu = schemas.read_measure(cfg.inputs[1])
    if mu.dim != K.dim:
        raise InputError(f"measure has dimension {mu.dim}, body has {K.dim}")
    size = cfg.grid_size or max(200, 2 * len(mu))
    grid = transforms.DirectionGrid.fibonacci(K.dim, size)
    _dump_grid(cfg, grid.points)
    rank_tol = cfg.tol if cfg.tol is not None else 1e-10
    tm = transforms.injectivity_probe(K, mu.directions, grid, rank_tol=rank_tol)
    summary = tm.summary()
    summary["kernel"] = tm.kernel.T
    summary["grid_size"] = grid.size
    rows = [list(map(float, u)) + list(map(float, r)) for u, r in zip(tm.directions, tm.matrix)]
    header = _ucols(K.dim) + [f"atom{j + 1}" for j in range(tm.matrix.shape[1])]
    return Outcome(summary, {"rank_tol": rank_tol}, verdict=tm.kernel_dim == 0, table=(header, rows))


def cmd_mixed_volume(cfg: RunConfig) -> Outcome:
    P = schemas.read_body(cfg.inputs[0])
    K = schemas.read_body(cfg.inputs[1])
    if not isinstance(P, Polygon2D):
        raise InputError("the first input must be a polygon2d body")
    if K.dim != 2:
        raise InputError("mixed-volume works in the plane")
    u = _single_direction(cfg, 2)
    S = transforms.surface_measure_2d(P)
    val = transforms.mixed_volume_transform(S, K, u)
    return Outcome({"u": u, "value": val, "surface_measure": schemas.measure_to_dict(S)}, {"merge_tol": MERGE_TOL})


def cmd_mean_width(cfg: RunConfig) -> Outcome:
    K = schemas.read_body(cfg.inputs[0])
    u = _single_direction(cfg, K.dim)
    size = cfg.grid_size or 64 * K.dim * K.dim
    grid = transforms.DirectionGrid.fibonacci(K.dim, size if K.dim > 1 else 2)
    _dump_grid(cfg, grid.points)
    val = transforms.mean_width_transform(K, u, grid)
    return Outcome(
        {"u": u, "value": val, "grid_size": grid.size, "scheme": grid.scheme},
        {"quadrature_points": grid.size},
        table=(_ucols(K.dim) + ["value"], [list(map(float, u)) + [val]]),
    )


def cmd_g_transform(cfg: RunConfig) -> Outcome:
    K = schemas.read_body(cfg.inputs[0])
    G = schemas.read_group(cfg.inputs[1])
    u = _single_direction(cfg, K.dim)
    return Outcome({"u": u, "value": transforms.g_transform(K, G, u), "elements": len(G)}, {"zero_tol": bodies.ZERO_TOL})


def cmd_dp_eval(cfg: RunConfig) -> Outcome:
    L = schemas.read_dpball(cfg.inputs[0])
    U = _directions(cfg, L.dim, 64 * L.dim * L.dim)
    _dump_grid(cfg, U)
    beta = cfg.options.get("beta")
    if beta is None:
        vals = stable.minkowski_functional(L, U)
    else:
        vals = stable.signed_power_functional(L, beta, U)
    return Outcome(
        {"p": L.p, "bounded": L.bounded, "beta": beta, "directions": U, "values": vals},
        {"unit_tol": bodies.UNIT_TOL},
        table=(_ucols(L.dim) + ["norm"], _rows(U, vals)),
    )


def _count(cfg: RunConfig, default: int) -> int:
    count = cfg.options.get("count") or default
    if count <= 0:
        raise InputError("--count must be positive")
    return count


def cmd_stable_sample(cfg: RunConfig) -> Outcome:
    L = schemas.read_dpball(cfg.inputs[0])
    spec = stable.dp_to_stable(L)
    X = stable.sample_one_sided_stable(spec, _count(cfg, 1000), np.random.default_rng(cfg.seed))
    return Outcome(
        {"alpha": spec.alpha, "samples": X, "spectral": schemas.stable_to_dict(spec)},
        {},
        table=([f"x{i + 1}" for i in range(L.dim)], X.tolist()),
    )


def cmd_maxstable_sample(cfg: RunConfig) -> Outcome:
    L = schemas.read_dpball(cfg.inputs[0])
    X = stable.sample_max_stable(L, _count(cfg, 1000), np.random.default_rng(cfg.seed))
    return Outcome({"samples": X}, {}, table=([f"x{i + 1}" for i in range(L.dim)], X.tolist()))


def _verify_grid(cfg: RunConfig, n: int, lo: float, hi: float, k: int) -> np.ndarray:
    lo = cfg.options.get("lo") if cfg.options.get("lo") is not None else lo
    hi = cfg.options.get("hi") if cfg.options.get("hi") is not None else hi
    k = cfg.grid_size or k
    if not 0 < lo <= hi:
        raise InputError("grid bounds must satisfy 0 < lo <= hi")
    G = stable.square_grid(lo, hi, k, n)
    _dump_grid(cfg, G)
    return G


def _report_outcome(rep: stable.VerificationReport) -> Outcome:
    header = _ucols(rep.grid.shape[1]) + ["empirical", "exact", "three_sigma"]
    return Outcome(
        rep.to_json(),
        {"tol": rep.tol},
        verdict=rep.passed,
        table=(header, _rows(rep.grid, rep.empirical, rep.exact, rep.three_sigma)),
    )


def cmd_laplace_verify(cfg: RunConfig) -> Outcome:
    L = schemas.read_dpball(cfg.inputs[0])
    alpha = cfg.options.get("alpha")
    if alpha is not None and abs(alpha * L.p - 1.0) > 1e-12:
        raise InputError(f"alpha={alpha} does not match p={L.p} (need p = 1/alpha)")
    G = _verify_grid(cfg, L.dim, 0.1, 2.0, 5)
    tol = cfg.tol if cfg.tol is not None else 0.005
    rep = stable.verify_laplace(L, G, _count(cfg, 200_000), cfg.seed, tol)
    return _report_outcome(rep)


def cmd_cdf_verify(cfg: RunConfig) -> Outcome:
    L = schemas.read_dpball(cfg.inputs[0])
    G = _verify_grid(cfg, L.dim, 0.5, 3.0, 3)
    tol = cfg.tol if cfg.tol is not None else 0.01
    rep = stable.verify_cdf(L, G, _count(cfg, 100_000), cfg.seed, tol)
    return _report_outcome(rep)


def cmd_rerepresent(cfg: RunConfig) -> Outcome:
    L = schemas.read_dpball(cfg.inputs[0])
    r = cfg.options.get("r")
    if r is None:
        raise InputError("rerepresent needs --r")
    cands = stable.positive_candidates(L.dim, cfg.options.get("candidates"))
    eval_grid = transforms.DirectionGrid.fibonacci(L.dim, cfg.grid_size) if cfg.grid_size else None
    fitted, rep = stable.rerepresent(L, r, cands, eval_grid)
    result = {"fitted": schemas.dpball_to_dict(fitted), **rep.to_json()}
    tols = {"nnls_stationarity": rep.stationarity}
    verdict = None
    if cfg.tol is not None:
        tols["residual_tol"] = cfg.tol
        verdict = rep.residual <= cfg.tol
    return Outcome(result, tols, verdict=verdict)


def cmd_moment_oracle(cfg: RunConfig) -> Outcome:
    xi, eta = schemas.read_law(cfg.inputs[0]), schemas.read_law(cfg.inputs[1])
    tol = cfg.tol if cfg.tol is not None else 1e-9
    depth = cfg.options.get("depth") or 4
    v = universality.moment_equivalence_oracle(xi, eta, grid_per_simplex=depth, tol=tol)
    return Outcome(_verdict_json(v), {"tol": tol, "lattice_lower": 0.05}, verdict=v.holds)


COMMANDS = {
    "support-eval": (cmd_support_eval, ["body"], "support function values h(K, u)"),
    "k-transform": (cmd_k_transform, ["body", "measure"], "K-transform of a sphere measure"),
    "zonoid-equiv": (cmd_zonoid_equiv, ["law", "law2"], "zonoid equivalence of two finite laws"),
    "as-check": (cmd_as_check, ["body"], "asymmetry condition on the projection to J"),
    "d-universal": (cmd_d_universal, ["body"], "D-universality of a generalized zonoid"),
    "uncond-universal": (cmd_uncond_universal, ["body"], "sufficient condition for unconditional D-universality"),
    "inject-probe": (cmd_inject_probe, ["body", "measure"], "numerical rank and kernel of a sampled K-transform"),
    "mixed-volume": (cmd_mixed_volume, ["polygon", "body"], "mixed area V(L, uK) of a polygon L"),
    "mean-width": (cmd_mean_width, ["body"], "mean-width transform of uK"),
    "g-transform": (cmd_g_transform, ["body", "group"], "weighted sum of h(gK, u) over a finite group"),
    "dp-eval": (cmd_dp_eval, ["dpball"], "Minkowski functional of a D_p-ball (or of a signed power)"),
    "stable-sample": (cmd_stable_sample, ["dpball"], "draws of the one-sided stable law of a D_{1/alpha}-ball"),
    "laplace-verify": (cmd_laplace_verify, ["dpball"], "Monte-Carlo check of the stable Laplace transform"),
    "maxstable-sample": (cmd_maxstable_sample, ["dpball"], "draws of the max-stable law of a D_inf-ball"),
    "cdf-verify": (cmd_cdf_verify, ["dpball"], "Monte-Carlo check of the max-stable distribution function"),
    "rerepresent": (cmd_rerepresent, ["dpball"], "refit a D_p-ball as a D_r-ball, r > p"),
    "moment-oracle": (cmd_moment_oracle, ["law", "law2"], "zonoid equivalence through signed power moments"),
}


# -- parsing and running -----------------------------------------------------------------------


def _seed(text: str) -> int:
    try:
        s = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return s


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=stable.DEFAULT_SEED, help="RNG seed (default 0xD1A6)")
    common.add_argument("--grid", type=int, default=None, dest="grid_size", help="grid size (directions, or points per axis for verifiers)")
    common.add_argument("--tol", type=float, default=None, help="override the command's main tolerance")
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--dump-grid", default=None, help="write the evaluation grid as CSV to this file")
    common.add_argument("--u", action="append", default=None, help="direction as comma-separated numbers (repeatable)")

    parser = argparse.ArgumentParser(prog="diagmink", description="Diagonal Minkowski classes, zonoid equivalence and stable laws.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, inputs, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        for i, kind in enumerate(inputs):
            p.add_argument(f"input{i}", metavar=kind.upper().rstrip("2") + ("_B" if kind.endswith("2") else ""), help=f"{kind.rstrip('2')} JSON file")
        if name in ("zonoid-equiv", "as-check"):
            p.add_argument("--mode", choices=("exact", "sampled") if name == "zonoid-equiv" else ("auto", "exact", "sampled"), default=None)
        if name == "as-check":
            p.add_argument("--J", required=True, help="1-based index set, e.g. 1,2,3,4")
        if name == "dp-eval":
            p.add_argument("--beta", type=float, default=None, help="evaluate the signed power L^<beta>")
        if name in RANDOMIZED:
            p.add_argument("--count", type=int, default=None, help="number of draws")
        if name in ("laplace-verify", "cdf-verify"):
            p.add_argument("--lo", type=float, default=None)
            p.add_argument("--hi", type=float, default=None)
        if name == "laplace-verify":
            p.add_argument("--alpha", type=float, default=None, help="assert p = 1/alpha")
        if name == "rerepresent":
            p.add_argument("--r", type=float, required=True, help="target exponent r > p")
            p.add_argument("--candidates", type=int, default=None, help="candidate atoms in S_+ (default 32 n)")
        if name == "moment-oracle":
            p.add_argument("--depth", type=int, default=None, help="simplex lattice depth (default 4)")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    inputs = [d.pop(k) for k in sorted(k for k in list(d) if k.startswith("input"))]
    base = {k: d.pop(k) for k in ("command", "seed", "grid_size", "tol", "out", "format", "dump_grid")}
    return RunConfig(inputs=inputs, options=d, **base)


def render(cfg: RunConfig, out: Outcome) -> str:
    if cfg.format == "csv":
        if out.table is None:
            raise InputError(f"{cfg.command} has no CSV output; use --format json")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header, rows = out.table
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()
    doc = {"command": cfg.command, "tolerances": out.tolerances, "result": out.result}
    if cfg.command in RANDOMIZED:
        doc["seed"] = cfg.seed
    if out.verdict is not None:
        doc["verdict"] = bool(out.verdict)
    if out.certified is not None:
        doc["certified"] = bool(out.certified)
    return schemas.dumps(doc)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if cfg.command not in COMMANDS:
        print(f"error: unknown command {cfg.command!r}", file=stderr)
        return EXIT_INPUT
    if cfg.grid_size is not None and cfg.grid_size <= 0:
        print("error: --grid must be positive", file=stderr)
        return EXIT_INPUT
    if cfg.command in RANDOMIZED:
        print(f"seed: {cfg.seed}", file=stderr)
    handler = COMMANDS[cfg.command][0]
    try:
        outcome = handler(cfg)
        text = render(cfg, outcome)
    except (schemas.SchemaError, InputError, DimensionError, UnsupportedBodyError,
            universality.PreconditionError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if outcome.verdict is False:
        return EXIT_FALSE
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
