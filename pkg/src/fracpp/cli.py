"""Command-line interface: ``fracpp <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error,
3 numerical-validity (accuracy) error.  Output files are written only after
the computation has succeeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis, process, rates, specfun, subord
from .errors import AccuracyError, DomainError

SCHEMA_VERSION = 1

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

SVG_MAX_PATHS = 10


@dataclass
class RunConfig:
    command: str
    variant: str = "NTFPP"
    alpha: float = 1.0
    beta: float = 1.0
    rate: str = "constant:lam=1"
    lambda_hom: float | None = None
    t_max: float = 10.0
    grid_points: int = 101
    n_paths: int = 1
    seed: int = 0
    threads: int = 1
    out: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps({"schema_version": SCHEMA_VERSION, **asdict(self)}, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        d.pop("schema_version", None)
        return cls(**d)

    def spec(self):
        rate = None if self.variant.upper() == "STFPP" else rates.parse_rate(self.rate)
        return process.ProcessSpec(self.variant, self.alpha, self.beta, rate, self.lambda_hom)

    def grid(self):
        if not self.t_max > 0:
            raise DomainError("--t-max must be > 0")
        if self.grid_points < 2:
            raise DomainError("--grid-points must be >= 2")
        return np.linspace(0.0, self.t_max, self.grid_points)

    def stream(self):
        return subord.RngStream(self.seed)


_EXTRA_KEYS = ("s", "t", "n_max", "t_grid", "plateau_t", "suite", "svg", "csv")


def _default_seed():
    env = os.environ.get("FRACPP_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise DomainError(f"FRACPP_SEED must be an integer, got {env!r}") from None


def config_from_args(ns):
    seed = ns.seed if ns.seed is not None else _default_seed()
    extra = {k: getattr(ns, k) for k in _EXTRA_KEYS if getattr(ns, k, None) is not None}
    return RunConfig(
        command=ns.command,
        variant=ns.variant,
        alpha=ns.alpha,
        beta=ns.beta,
        rate=ns.rate,
        lambda_hom=ns.lambda_hom,
        t_max=ns.t_max,
        grid_points=ns.grid_points,
        n_paths=ns.paths,
        seed=seed,
        threads=ns.threads,
        out=ns.out,
        format=ns.format or ("csv" if ns.command in ("simulate", "pmf") else "json"),
        extra=extra,
    )


# ---------------------------------------------------------------- output helpers


def _dumps(obj):
    return json.dumps({"schema_version": SCHEMA_VERSION, **obj}, indent=2, sort_keys=True) + "\n"


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def paths_csv(times, counts):
    lines = ["path_id,t,count"]
    for i, row in enumerate(counts):
        lines.extend(f"{i},{t!r},{int(c)}" for t, c in zip(times.tolist(), row))
    return "\n".join(lines) + "\n"


def paths_svg(times, counts, title="", width=800, height=500):
    """Self-contained SVG step plot of up to ``SVG_MAX_PATHS`` counting paths."""
    counts = np.asarray(counts)[:SVG_MAX_PATHS]
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    t0, t1 = float(times[0]), float(times[-1])
    ymax = max(int(counts.max()) if counts.size else 1, 1)

    def sx(t):
        return ml + (t - t0) / (t1 - t0) * pw

    def sy(c):
        return mt + ph - c / ymax * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
    ]
    for k in range(6):
        t = t0 + (t1 - t0) * k / 5
        c = ymax * k / 5
        out.append(f'<text x="{sx(t):.1f}" y="{mt + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{t:g}</text>')
        out.append(f'<text x="{ml - 6}" y="{sy(c) + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="11">{c:.4g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">t</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {mt + ph / 2:.1f})">W(t)</text>')
    for i, row in enumerate(counts):
        pts = [f"{sx(times[0]):.2f},{sy(row[0]):.2f}"]
        for j in range(1, len(times)):
            x = sx(times[j])
            pts.append(f"{x:.2f},{sy(row[j - 1]):.2f}")
            pts.append(f"{x:.2f},{sy(row[j]):.2f}")
        out.append(f'<polyline fill="none" stroke="{colors[i % len(colors)]}" stroke-width="1.2" points="{" ".join(pts)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _spec_title(spec):
    parts = [spec.variant]
    if spec.variant in ("NSTFPP", "NSFPP", "STFPP"):
        parts.append(f"alpha={spec.alpha:g}")
    if spec.variant in ("NSTFPP", "NTFPP", "STFPP", "FNPP"):
        parts.append(f"beta={spec.beta:g}")
    parts.append(spec.rate.describe() if spec.rate is not None else f"lambda={spec.lambda_hom:g}")
    return " ".join(parts)


# ---------------------------------------------------------------- commands


def cmd_simulate(cfg):
    spec = cfg.spec()
    grid = cfg.grid()
    if cfg.n_paths < 1:
        raise DomainError("--paths must be >= 1")
    counts = process.simulate_paths(spec, grid, cfg.n_paths, cfg.stream(), threads=cfg.threads)
    files = {}
    if cfg.format == "csv":
        files[cfg.out] = paths_csv(grid, counts)
    elif cfg.format == "json":
        files[cfg.out] = _dumps(
            {
                "spec": spec.to_dict(),
                "seed": cfg.seed,
                "times": grid.tolist(),
                "counts": counts.tolist(),
            }
        )
    else:
        files[cfg.out] = paths_svg(grid, counts, _spec_title(spec))
    svg = cfg.extra.get("svg")
    if svg:
        files[svg] = paths_svg(grid, counts, _spec_title(spec))
    return files


def cmd_pmf(cfg):
    spec = cfg.spec()
    t = cfg.extra.get("t", cfg.t_max)
    table = process.pmf_vector(spec, t, n_max=cfg.extra.get("n_max"))
    if cfg.format == "json":
        text = _dumps(
            {
                "spec": spec.to_dict(),
                "t": t,
                "probs": table.probs.tolist(),
                "n_max": table.n_max,
                "tail_mass": table.tail_mass,
                "tail_bound": table.tail_bound,
                "converged": table.converged,
            }
        )
    else:
        text = table.to_csv()
    return {cfg.out: text}


def cmd_pgf(cfg):
    spec = cfg.spec()
    t = cfg.extra.get("t", cfg.t_max)
    s = cfg.extra.get("s", 0.5)
    return {cfg.out: _dumps({"spec": spec.to_dict(), "s": s, "t": t, "pgf": process.pgf(spec, s, t)})}


def cmd_moments(cfg):
    spec = cfg.spec()
    t = cfg.extra.get("t", cfg.t_max)
    s = cfg.extra.get("s", t / 2)
    res = {
        "spec": spec.to_dict(),
        "s": s,
        "t": t,
        "mean_s": process.mean(spec, s),
        "mean_t": process.mean(spec, t),
        "var_s": process.variance(spec, s),
        "var_t": process.variance(spec, t),
        "cov": process.covariance(spec, s, t),
    }
    return {cfg.out: _dumps(res)}


def cmd_corr(cfg):
    spec = cfg.spec()
    t = cfg.extra.get("t", cfg.t_max)
    s = cfg.extra.get("s", t / 2)
    est = analysis.estimate_corr(spec, s, t, cfg.n_paths, cfg.stream(), threads=cfg.threads)
    res = {"spec": spec.to_dict(), "s": s, "t": t, "seed": cfg.seed, "corr": est.to_dict()}
    return {cfg.out: _dumps(res)}


def cmd_lrd(cfg):
    spec = cfg.spec()
    s = cfg.extra.get("s", 1.0)
    t_grid = cfg.extra.get("t_grid") or [10 * s * 2**k for k in range(5)]
    rep = analysis.lrd_exponent(
        spec, s, t_grid, cfg.n_paths, cfg.stream(), plateau_t=cfg.extra.get("plateau_t"), threads=cfg.threads
    )
    files = {cfg.out: _dumps({"spec": spec.to_dict(), "seed": cfg.seed, "report": asdict(rep)})}
    if cfg.extra.get("csv"):
        files[cfg.extra["csv"]] = rep.to_csv()
    return files


# ---------------------------------------------------------------- verify suites


def _check(name, ok, **detail):
    return {"name": name, "passed": bool(ok), **{k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in detail.items()}}


def _suite_specfun(seed):
    out = []
    err = max(abs(specfun.mittag_leffler(1.0, z).value - math.exp(z)) for z in np.linspace(-20, 0, 41))
    out.append(_check("ml_beta1_vs_exp", err < 1e-12, max_err=err))
    from scipy.special import erfcx

    err = max(abs(specfun.mittag_leffler(0.5, -x).value - erfcx(x)) for x in np.linspace(0, 3, 31))
    out.append(_check("ml_half_vs_erfc", err < 1e-8, max_err=err))
    out.append(_check("recip_gamma_poles", all(specfun.recip_gamma(-k) == 0.0 for k in range(11))))
    v = specfun.incomplete_beta(0.5, 1.5, 1.0)
    out.append(_check("complete_beta", abs(v - math.pi / 2) < 1e-10, value=v))
    v = specfun.caputo_numeric(lambda u: u, 0.5, 1.0, 512)
    out.append(_check("caputo_linear", abs(v - 1 / math.gamma(1.5)) < 1e-4, value=v))
    return out


def _suite_subord(seed):
    out = []
    st = subord.RngStream(seed, 1)
    out.append(_check("stable_alpha1_identity", subord.sample_stable(1.0, 4.2, st) == 4.2))
    for alpha in (0.3, 0.7):
        d = subord.sample_stable(alpha, 1.0, subord.RngStream(seed, 2), size=200_000)
        est = process.MonteCarloEstimate.from_samples(np.exp(-d))
        z = est.zscore(math.exp(-1.0))
        out.append(_check(f"laplace_alpha{alpha}", abs(z) < 4, zscore=z))
    a = subord.sample_stable(0.5, 1.0, subord.RngStream(seed, 3), size=1000)
    b = subord.sample_stable(0.5, 1.0, subord.RngStream(seed, 3), size=1000)
    out.append(_check("determinism", np.array_equal(a, b)))
    e = subord.sample_inverse_stable_marginal(0.5, 1.0, subord.RngStream(seed, 4), size=200_000)
    z = process.MonteCarloEstimate.from_samples(e).zscore(1 / math.gamma(1.5))
    out.append(_check("inverse_stable_mean", abs(z) < 4, zscore=z))
    return out


def _suite_process(seed):
    out = []
    npp = process.ProcessSpec("NPP", rate=rates.Constant(3.0))
    tab = process.pmf_vector(npp, 1.0, n_max=40)
    pois = np.array([math.exp(-3 + n * math.log(3) - math.lgamma(n + 1)) for n in range(41)])
    err = float(np.max(np.abs(tab.probs - pois)))
    out.append(_check("poisson_reduction", err < 1e-12, max_err=err))
    sp = process.ProcessSpec("NSTFPP", 0.7, 0.6, rates.Weibull(1.5, 1.0))
    tab = process.pmf_vector(sp, 2.0)
    err = abs(1.0 - math.fsum(tab.probs) - tab.tail_bound)
    out.append(_check("normalization", err < 1e-6, err=err))
    err = abs(tab.probs[0] - process.pgf(sp, 0.0, 2.0))
    out.append(_check("pmf0_vs_pgf0", err < 1e-10, err=err))
    worst = 0.0
    for beta in np.arange(0.2, 0.95, 0.1):
        lhs = (1 / beta) * (1 / math.gamma(2 * beta) - 1 / (beta * math.gamma(beta) ** 2))
        q1 = 1 / math.gamma(1 + beta)
        rhs = 2 * beta * q1 * q1 * math.gamma(beta) * math.gamma(1 + beta) / math.gamma(1 + 2 * beta) - q1 * q1
        worst = max(worst, abs(lhs - rhs))
    out.append(_check("variance_identity", worst < 1e-10, max_err=worst))
    w = process.sample_marginal(npp, 1.0, 100_000, subord.RngStream(seed, 5))
    z = process.MonteCarloEstimate.from_samples(w).zscore(3.0)
    out.append(_check("npp_mc_mean", abs(z) < 4, zscore=z))
    return out


def _suite_analysis(seed):
    out = []
    npp = process.ProcessSpec("NPP", rate=rates.Constant(1.0))
    est = analysis.estimate_corr(npp, 1.0, 2.0, 50_000, subord.RngStream(seed, 6))
    z = est.zscore(math.sqrt(0.5))
    out.append(_check("npp_corr", abs(z) < 4, zscore=z))
    r = analysis.pgf_fde_residual(0.8, 0.6, rates.Weibull(1.5, 1.0), 0.4, 1.0, n_grid=2048)
    out.append(_check("pgf_fde_residual", r < 1e-3, residual=r))
    rep = analysis.lrd_exponent(
        process.ProcessSpec("NTFPP", 1.0, 0.5, rates.Weibull(1.2, 1.0)), 2.0, [20, 40, 80, 160, 320], 20_000, subord.RngStream(seed, 7)
    )
    out.append(_check("ntfpp_lrd", rep.classification == "LRD", slope=rep.slope_estimate, stderr=rep.slope_stderr, classification=rep.classification))
    return out


SUITES = {
    "specfun": _suite_specfun,
    "subord": _suite_subord,
    "process": _suite_process,
    "analysis": _suite_analysis,
}


def cmd_verify(cfg):
    suite = cfg.extra.get("suite", "all")
    names = list(SUITES) if suite == "all" else [suite]
    checks = []
    for name in names:
        for c in SUITES[name](cfg.seed):
            checks.append({"suite": name, **c})
    passed = all(c["passed"] for c in checks)
    text = _dumps({"suite": suite, "seed": cfg.seed, "passed": passed, "checks": checks})
    return {cfg.out: text}, passed


COMMANDS = {
    "simulate": cmd_simulate,
    "pmf": cmd_pmf,
    "pgf": cmd_pgf,
    "moments": cmd_moments,
    "corr": cmd_corr,
    "lrd": cmd_lrd,
}


# ---------------------------------------------------------------- parser


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--variant", default="NTFPP", type=str.upper, choices=process.VARIANTS)
    common.add_argument("--alpha", type=float, default=1.0)
    common.add_argument("--beta", type=float, default=1.0)
    common.add_argument("--rate", default="constant:lam=1", help="kind:key=value,... e.g. weibull:a=2,b=1 or table:FILE.csv")
    common.add_argument("--lambda-hom", type=float, default=None, help="homogeneous rate for STFPP")
    common.add_argument("--t-max", type=float, default=10.0)
    common.add_argument("--grid-points", type=int, default=101)
    common.add_argument("--paths", type=int, default=1)
    common.add_argument("--seed", type=int, default=None, help="defaults to $FRACPP_SEED, then 0")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None, help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json", "svg"), default=None, help="default: csv for simulate/pmf, json otherwise")

    p = argparse.ArgumentParser(prog="fracpp", description="Fractional Poisson process simulation and verification.")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("simulate", parents=[common], help="simulate sample paths")
    sp.add_argument("--svg", default=None, help="also write an SVG step plot of up to 10 paths")
    sp = sub.add_parser("pmf", parents=[common], help="pmf table")
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--n-max", type=int, default=None)
    sp = sub.add_parser("pgf", parents=[common], help="generating function value")
    sp.add_argument("--s", type=float, default=None)
    sp.add_argument("--t", type=float, default=None)
    for name, helptext in (("moments", "closed-form mean/variance/covariance"), ("corr", "Monte Carlo correlation")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--s", type=float, default=None)
        sp.add_argument("--t", type=float, default=None)
    sp = sub.add_parser("lrd", parents=[common], help="long-range dependence exponent fit")
    sp.add_argument("--s", type=float, default=None)
    sp.add_argument("--t-grid", type=_float_list, default=None)
    sp.add_argument("--plateau-t", type=float, default=None)
    sp.add_argument("--csv", default=None, help="also write (log t, log corr) as CSV")
    sp = sub.add_parser("verify", parents=[common], help="run a verification suite")
    sp.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    return p


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if cfg.command == "verify":
            files, passed = cmd_verify(cfg)
        else:
            files, passed = COMMANDS[cfg.command](cfg), True
    except DomainError as exc:
        parser.print_usage(sys.stderr)
        print(f"fracpp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(f"fracpp: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path, text in files.items():
        _emit(text, path)
    return EXIT_OK if passed else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
