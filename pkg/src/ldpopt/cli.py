"""Command-line front end: construct mechanisms, solve for optimal ones,
check privacy claims, export error-region boundaries, and run the
benchmark sweeps and the Chernoff-Stein Monte-Carlo estimate.

Exit codes: 0 success, 1 validation failure, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .bounds import converse_suite, mi_converse_suite
from .core import (Distribution, Mechanism, effective_epsilon, induced_marginal,
                   is_approx_private, is_locally_private, is_staircase,
                   make_distribution, mechanism_from_json, mechanism_to_json)
from .mechanisms import (binary_ht, binary_mi, geometric, quaternary,
                         randomized_response)
from .optsolve import MAX_LP_K, build_lp, extract_mechanism, solve
from .regions import region_eps_delta, tradeoff_region
from .utilities import (CHI2, KL, TV, AbsoluteContinuityViolated, f_divergence,
                        hypothesis_testing, information_preservation, utility)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

FDIV_KINDS = {"kl": KL, "tv": TV, "chi2": CHI2}
SWEEP_MECHANISMS = ("binary", "rr", "geometric", "optimal", "mixed")

# Instances whose LP optimum is below this are counted as achieving ratio 1.
ZERO_OPT = 1e-15


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _parse_probs(text: str) -> Distribution:
    return make_distribution([float(t) for t in text.split(",")])


def _parse_grid(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(","))


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    seed: int
    k: int
    num_instances: int
    eps_grid: tuple[float, ...]
    utility: str
    mechanisms: tuple[str, ...] = SWEEP_MECHANISMS
    out_path: str | None = None

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.num_instances < 1:
            raise ValueError("need at least one instance")
        if not self.eps_grid or any(e < 0 for e in self.eps_grid):
            raise ValueError("eps grid must be nonempty with eps >= 0")
        if self.utility not in ("kl", "tv", "chi2", "mi"):
            raise ValueError(f"unknown utility {self.utility!r}")
        bad = set(self.mechanisms) - set(SWEEP_MECHANISMS)
        if bad:
            raise ValueError(f"unknown mechanisms: {sorted(bad)}")
        # Every row carries the LP optimum for its ratio column, so the
        # alphabet cap applies to all sweeps, not only "optimal" rows.
        if self.k > MAX_LP_K:
            raise ValueError(f"sweeps are capped at k={MAX_LP_K}")


@dataclass(frozen=True)
class SweepRow:
    instance_id: int
    eps: float
    mechanism: str
    utility_value: float
    opt_value: float
    ratio: float


def _instance_priors(cfg: SweepConfig, instance_id: int):
    """Uniform-simplex priors from a counter-based per-instance stream."""
    rng = np.random.default_rng(cfg.seed ^ instance_id)

    def draw() -> Distribution:
        while True:
            p = rng.dirichlet(np.ones(cfg.k))
            if p.min() > 1e-9:
                return make_distribution(p)

    if cfg.utility == "mi":
        return information_preservation(draw())
    return hypothesis_testing(FDIV_KINDS[cfg.utility], draw(), draw())


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """One row per (instance, eps, mechanism), in canonical sorted order.

    Ratios are utility / LP-optimum; instances where the optimum is zero
    (eps = 0) count as ratio 1 since the gap is zero.
    """
    rows = []
    for instance_id in range(cfg.num_instances):
        spec = _instance_priors(cfg, instance_id)
        for eps in cfg.eps_grid:
            sol = solve(build_lp(spec, eps))
            opt = sol.value
            values = {}
            if {"binary", "mixed"} & set(cfg.mechanisms):
                mech = (binary_mi(spec.p, eps) if cfg.utility == "mi"
                        else binary_ht(spec.p0, spec.p1, eps))
                values["binary"] = utility(spec, mech)
            if {"rr", "mixed"} & set(cfg.mechanisms):
                values["rr"] = utility(spec, randomized_response(cfg.k, eps))
            if "geometric" in cfg.mechanisms and eps > 0:
                values["geometric"] = utility(spec, geometric(cfg.k, eps))
            if "optimal" in cfg.mechanisms:
                values["optimal"] = opt
            if "mixed" in cfg.mechanisms:
                values["mixed"] = max(values["binary"], values["rr"])
            for name in sorted(set(cfg.mechanisms) & set(values)):
                v = values[name]
                ratio = v / opt if opt > ZERO_OPT else 1.0
                rows.append(SweepRow(instance_id, eps, name, v, opt, ratio))
    rows.sort(key=lambda r: (r.instance_id, r.eps, r.mechanism))
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = ["instance_id,eps,mechanism,utility_value,opt_value,ratio"]
    for r in rows:
        lines.append(",".join([str(r.instance_id), _fmt(r.eps), r.mechanism,
                               _fmt(r.utility_value), _fmt(r.opt_value), _fmt(r.ratio)]))
    return "\n".join(lines) + "\n"


def sweep_summary(rows: list[SweepRow]) -> str:
    by_eps: dict[float, dict[str, list[float]]] = {}
    for r in rows:
        by_eps.setdefault(r.eps, {}).setdefault(r.mechanism, []).append(r.ratio)
    lines = []
    for eps in sorted(by_eps):
        means = {m: float(np.mean(v)) for m, v in sorted(by_eps[eps].items())}
        body = "  ".join(f"{m}={_fmt(v)}" for m, v in means.items())
        lines.append(f"eps={_fmt(eps)}  mean ratio: {body}")
    mixed = [r.ratio for r in rows if r.mechanism == "mixed"]
    if mixed:
        lines.append(f"min mixed-strategy ratio: {_fmt(min(mixed))}")
    return "\n".join(lines)


# -- Chernoff-Stein Monte-Carlo ----------------------------------------------


@dataclass(frozen=True)
class ExponentReport:
    exponent: float
    kl_rate: float
    beta: float
    n: int
    trials: int
    alpha_star: float


def run_exponent_sim(P0: Distribution, P1: Distribution, Q: Mechanism,
                     n: int, trials: int, alpha_star: float,
                     seed: int) -> ExponentReport:
    """Monte-Carlo estimate of the type-II error exponent of the LR test.

    Samples n-fold output counts under the null marginal; the threshold is
    the alpha_star empirical quantile of the log-likelihood ratio, and the
    type-II error is estimated by importance sampling (each null sample is
    reweighted by exp(-LLR)), which stays accurate even when beta is far
    below Monte-Carlo resolution.
    """
    if n < 100:
        raise ValueError("need n >= 100 samples per trial")
    if trials < 2 or not 0 < alpha_star < 1:
        raise ValueError("need trials >= 2 and alpha_star in (0, 1)")
    m0 = induced_marginal(P0, Q)
    m1 = induced_marginal(P1, Q)
    a, b = m0.probs, m1.probs

    w = np.zeros(a.size)
    finite = (a > 0) & (b > 0)
    w[finite] = np.log(a[finite] / b[finite])
    w[(a > 0) & (b == 0)] = math.inf  # never drawn under M1

    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, a, size=trials)
    terms = np.where(counts > 0, counts * w[None, :], 0.0)
    llr = terms.sum(axis=1)
    t = float(np.quantile(llr, alpha_star, method="lower"))
    accepted = llr[llr >= t]
    if accepted.size == 0:
        return ExponentReport(exponent=math.inf, kl_rate=0.0, beta=0.0,
                              n=n, trials=trials, alpha_star=alpha_star)
    # beta is typically exp(-n * rate), far below float range, so the
    # importance-sampling mean of exp(-LLR) is taken in log space.
    top = float((-accepted).max())
    log_beta = top + math.log(float(np.exp(-accepted - top).sum())) - math.log(trials)
    beta = math.exp(log_beta) if log_beta > -700 else 0.0
    exponent = -log_beta / n
    try:
        kl_rate = f_divergence(KL, m0, m1)
    except AbsoluteContinuityViolated:
        kl_rate = math.inf
    return ExponentReport(exponent=exponent, kl_rate=kl_rate, beta=beta,
                          n=n, trials=trials, alpha_star=alpha_star)


# -- subcommand handlers ------------------------------------------------------


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_record(path: str):
    with open(path, encoding="utf-8") as fh:
        return mechanism_from_json(fh.read())


def cmd_mech(args) -> int:
    eps, delta = args.eps, args.delta
    if args.kind == "rr":
        Q = randomized_response(args.k, eps)
    elif args.kind == "geometric":
        Q = geometric(args.k, eps)
    elif args.kind == "quaternary":
        Q = quaternary(eps, delta)
    elif args.kind == "binary":
        Q = binary_ht(_parse_probs(args.p0), _parse_probs(args.p1), eps)
    else:  # binary-mi
        Q = binary_mi(_parse_probs(args.p), eps)
    delta_claim = delta if args.kind == "quaternary" else 0.0
    _write_text(args.out, mechanism_to_json(Q, eps_claimed=eps,
                                            delta_claimed=delta_claim) + "\n")
    return EXIT_OK


def cmd_opt(args) -> int:
    kind = args.utility
    if kind == "mi":
        spec = information_preservation(_parse_probs(args.p))
    else:
        spec = hypothesis_testing(FDIV_KINDS[kind], _parse_probs(args.p0),
                                  _parse_probs(args.p1))
    lp = build_lp(spec, args.eps)
    sol = solve(lp)
    Q = extract_mechanism(sol, lp)
    if args.out:
        _write_text(args.out, mechanism_to_json(Q, eps_claimed=args.eps,
                                                delta_claimed=0.0) + "\n")
    print(_fmt(sol.value))
    return EXIT_OK


def cmd_check(args) -> int:
    record = _load_record(args.mechanism)
    Q = record.mechanism
    eps = args.eps if args.eps is not None else record.eps_claimed
    delta = args.delta if args.delta is not None else (record.delta_claimed or 0.0)
    print(f"k={Q.k} l={Q.l}")
    print(f"effective_epsilon={_fmt(effective_epsilon(Q))}")
    ok = True
    if eps is not None:
        pure = is_locally_private(Q, eps)
        approx = is_approx_private(Q, eps, delta)
        stair = is_staircase(Q, eps)
        print(f"is_locally_private(eps={_fmt(eps)}): {pure}")
        print(f"is_approx_private(eps={_fmt(eps)}, delta={_fmt(delta)}): {approx}")
        print(f"is_staircase(eps={_fmt(eps)}): {stair}")
        ok = approx if delta > 0 else pure
        if args.p0 and args.p1:
            reports = converse_suite(_parse_probs(args.p0), _parse_probs(args.p1), Q, eps)
        elif args.p:
            reports = mi_converse_suite(_parse_probs(args.p), Q, eps)
        else:
            reports = []
        for r in reports:
            print(f"bound {r.name}: lhs={_fmt(r.lhs)} rhs={_fmt(r.rhs)} "
                  f"satisfied={r.satisfied}")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_region(args) -> int:
    if args.mech:
        record = _load_record(args.mech)
        region = tradeoff_region(record.mechanism, args.x0, args.x1)
    else:
        if args.eps is None:
            raise ValueError("need either --mech or --eps/--delta")
        region = region_eps_delta(args.eps, args.delta)
    lines = ["p_md,p_fa"] + [f"{_fmt(md)},{_fmt(fa)}" for md, fa in region.vertices]
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        raw["eps_grid"] = tuple(raw["eps_grid"])
        raw["mechanisms"] = tuple(raw.get("mechanisms", SWEEP_MECHANISMS))
        if args.out:
            raw["out_path"] = args.out
        cfg = SweepConfig(**raw)
    else:
        if args.k is None or args.eps_grid is None or args.utility is None:
            raise ValueError("--k, --eps-grid and --utility are required without --config")
        cfg = SweepConfig(
            seed=args.seed, k=args.k, num_instances=args.num_instances,
            eps_grid=_parse_grid(args.eps_grid), utility=args.utility,
            mechanisms=tuple(args.mechanisms.split(",")) if args.mechanisms
            else SWEEP_MECHANISMS,
            out_path=args.out,
        )
    rows = run_sweep(cfg)
    _write_text(cfg.out_path, sweep_csv(rows))
    print(sweep_summary(rows))
    return EXIT_OK


def cmd_exponent(args) -> int:
    P0 = _parse_probs(args.p0)
    P1 = _parse_probs(args.p1)
    if args.mech:
        Q = _load_record(args.mech).mechanism
    elif args.mechanism == "rr":
        Q = randomized_response(P0.k, args.eps)
    else:
        Q = binary_ht(P0, P1, args.eps)
    report = run_exponent_sim(P0, P1, Q, n=args.n, trials=args.trials,
                              alpha_star=args.alpha, seed=args.seed)
    print(f"exponent_estimate={_fmt(report.exponent)}")
    print(f"kl_rate={_fmt(report.kl_rate)}")
    print(f"beta_estimate={_fmt(report.beta)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldpopt",
                                     description="Optimal mechanisms for local "
                                                 "differential privacy on finite alphabets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mech", help="construct a named mechanism and emit JSON")
    p.add_argument("kind", choices=["binary", "binary-mi", "rr", "geometric", "quaternary"])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--p0")
    p.add_argument("--p1")
    p.add_argument("--p")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mech)

    p = sub.add_parser("opt", help="solve the pattern LP and emit the optimal mechanism")
    p.add_argument("--utility", choices=["kl", "tv", "chi2", "mi"], required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--p0")
    p.add_argument("--p1")
    p.add_argument("--p")
    p.add_argument("--out")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("check", help="validate a mechanism file and its privacy claims")
    p.add_argument("mechanism")
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--p0")
    p.add_argument("--p1")
    p.add_argument("--p")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("region", help="emit an error-region boundary as CSV")
    p.add_argument("--mech")
    p.add_argument("--x0", type=int, default=0)
    p.add_argument("--x1", type=int, default=1)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("sweep", help="run a benchmark sweep over random priors")
    p.add_argument("--config", help="JSON file with the sweep configuration")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--num-instances", type=int, default=100)
    p.add_argument("--eps-grid", dest="eps_grid")
    p.add_argument("--utility", choices=["kl", "tv", "chi2", "mi"])
    p.add_argument("--mechanisms")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("exponent", help="Monte-Carlo Chernoff-Stein exponent estimate")
    p.add_argument("--p0", required=True)
    p.add_argument("--p1", required=True)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--mechanism", choices=["binary", "rr"], default="binary")
    p.add_argument("--mech")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_exponent)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
