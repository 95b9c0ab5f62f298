"""Command-line front end: validated key=value configs, deterministic
seeding, CSV + summary + plot-script emission.

Subcommands: rates, lowerbound, coinbound, lemmas, smoothness, elicit,
cover-info.  Exit codes: 0 success, 1 validation error, 2 budget error.
Same (config, seed) always produces byte-identical CSVs, independent of
the worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np

from . import __version__
from .concepts import enumerate_concepts, uniform_distribution
from .elicitation import (
    LEDGER_CSV_HEADER,
    FamilyOutcomeModel,
    calibrate_schedule,
    estimate_Q,
    presence_family,
    run_algorithm1,
)
from .errors import BudgetError
from .outcomes import (
    CSV_HEADER as CHECK_CSV_HEADER,
    check_sauer,
    verify_lemma_chain,
    verify_sqrt_bound,
    verify_tree_inequality,
)
from .priors import (
    SmoothPriorParams,
    cover_priors,
    density_table,
    holder_check,
    random_prior,
    reference_prior,
    smooth_prior,
    parity_family,
)
from .ratelab import (
    COIN_CSV_HEADER,
    ESTIMATION_CSV_HEADER,
    RATE_CSV_HEADER,
    ExperimentConfig,
    coin_bound_table,
    run_baseline_comparison,
    run_lower_experiment,
    run_upper_experiment,
    write_csv,
)
from .sampling import stream

SUBCOMMANDS = (
    "rates", "lowerbound", "coinbound", "lemmas", "smoothness", "elicit", "cover-info",
)

_REQUIRED = object()


def _int_list(s: str) -> tuple[int, ...]:
    return tuple(int(x.strip()) for x in s.split(",") if x.strip())


def _float_list(s: str) -> tuple[float, ...]:
    return tuple(float(x.strip()) for x in s.split(",") if x.strip())


def _bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes"):
        return True
    if s.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# per-subcommand schema: key -> (caster, default); _REQUIRED means mandatory
SCHEMAS: dict[str, dict] = {
    "rates": {
        "m": (int, _REQUIRED),
        "d": (int, _REQUIRED),
        "L": (float, _REQUIRED),
        "alpha": (float, _REQUIRED),
        "T_grid": (_int_list, _REQUIRED),
        "family": (str, "parity"),
        "replicates": (int, 100),
        "k": (int, None),
        "truth_count": (int, 8),
        "twopoint_weight": (float, 0.05),
        "baseline_T": (int, None),
    },
    "lowerbound": {
        "m": (int, _REQUIRED),
        "d": (int, _REQUIRED),
        "L": (float, _REQUIRED),
        "alpha": (float, _REQUIRED),
        "T_grid": (_int_list, _REQUIRED),
        "replicates": (int, 200),
    },
    "coinbound": {
        "gammas": (_float_list, tuple(g / 100 for g in range(5, 55, 5))),
        "n_max": (int, 200),
    },
    "lemmas": {
        "m": (int, 2),
        "d": (int, 1),
        "k_max": (int, 3),
        "pairs": (int, 50),
    },
    "smoothness": {
        "m_max": (int, 8),
        "d_max": (int, 3),
        "L_list": (_float_list, (0.5, 1.0, 2.0)),
        "alpha_list": (_float_list, (0.5, 1.0)),
        "signs_per_instance": (int, 4),
    },
    "elicit": {
        "epsilon": (float, 0.2),
        "T": (int, 500),
        "replicates": (int, 5),
        "n_items": (int, 8),
        "calibration_T_grid": (_int_list, (25, 50, 100, 200, 400, 800)),
        "calibration_replicates": (int, 20),
        "q_trials": (int, 300),
        "family_seed": (int, 0),
    },
    "cover-info": {
        "m": (int, 2),
        "d": (int, 1),
        "L": (float, 1.0),
        "alpha": (float, 1.0),
        "epsilons": (_float_list, (0.6, 0.5, 0.4, 0.3)),
        "budget": (int, 100_000),
    },
}


def parse_config(path: str | Path, subcommand: str) -> dict:
    """Read `key = value` lines (# comments allowed), validate against the
    subcommand's schema, fill defaults; unknown or missing keys are errors."""
    schema = SCHEMAS[subcommand]
    raw: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ValueError(f"unknown config key(s) for {subcommand}: {', '.join(unknown)}")
    config = {}
    for key, (caster, default) in schema.items():
        if key in raw:
            try:
                config[key] = caster(raw[key])
            except ValueError as exc:
                raise ValueError(f"config key {key!r}: {exc}") from exc
        elif default is _REQUIRED:
            raise ValueError(f"missing required config key {key!r} for {subcommand}")
        else:
            config[key] = default
    return config


@dataclass(frozen=True)
class RunManifest:
    """Everything that determines a run's outputs; two runs with equal
    manifests produce byte-identical CSVs, whatever the worker count."""

    subcommand: str
    config_path: str
    config_sha256: str
    seed: int
    outdir: str
    tool_version: str

    def to_text(self, workers: int) -> str:
        return (
            f"tool=priorlab {self.tool_version}\n"
            f"subcommand={self.subcommand}\n"
            f"config={self.config_path}\n"
            f"config_sha256={self.config_sha256}\n"
            f"seed={self.seed}\n"
            f"workers={workers}\n"
            f"out={self.outdir}\n"
        )


def _manifest(outdir: Path, subcommand: str, config_path, config: dict, seed: int, workers: int):
    digest = hashlib.sha256(repr(sorted(config.items())).encode()).hexdigest()
    manifest = RunManifest(
        subcommand, str(config_path), digest, seed, str(outdir), __version__
    )
    (outdir / "manifest.txt").write_text(manifest.to_text(workers))


def _emit_plot_script(outdir: Path, subcommand: str, csv_name: str, x: str, y: str, loglog: bool):
    body = f'''"""Plot the {subcommand} results; run from the output directory."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{csv_name}")))
series = defaultdict(list)
for r in rows:
    series[r.get("truth_id", "all")].append((float(r["{x}"]), float(r["{y}"])))

fig, ax = plt.subplots()
for label, pts in sorted(series.items()):
    xs = sorted({{p[0] for p in pts}})
    means = [sum(p[1] for p in pts if p[0] == v) / len([p for p in pts if p[0] == v]) for v in xs]
    ax.plot(xs, means, marker="o", label=str(label))
{"ax.set_xscale('log'); ax.set_yscale('log')" if loglog else "pass"}
ax.set_xlabel("{x}")
ax.set_ylabel("{y}")
ax.legend(fontsize=6)
fig.savefig("{subcommand}.png", dpi=150)
print("wrote {subcommand}.png")
'''
    (outdir / f"plot_{subcommand}.py").write_text(body)


def cmd_rates(config: dict, seed: int, outdir: Path, workers: int, exact: bool) -> int:
    exp = ExperimentConfig(
        m=config["m"], d=config["d"], L=config["L"], alpha=config["alpha"],
        family=config["family"], T_grid=config["T_grid"],
        replicates=config["replicates"], seed=seed, k=config["k"],
        truth_count=config["truth_count"], twopoint_weight=config["twopoint_weight"],
    )
    res = run_upper_experiment(exp, workers=workers)
    write_csv(outdir / "rates.csv", RATE_CSV_HEADER, res.rows)
    write_csv(outdir / "skeleton_report.csv", ESTIMATION_CSV_HEADER, res.report_rows)
    baseline_T = config["baseline_T"] or config["T_grid"][-1]
    base = run_baseline_comparison(exp, T=baseline_T, workers=workers)
    write_csv(
        outdir / "baseline.csv",
        RATE_CSV_HEADER + ("direct_id", "direct_tv_error"),
        base.rows,
    )
    c = res.curve
    lines = [
        f"theory_upper_exponent={c.theory_upper_exponent!r}",
        f"theory_lower_exponent={c.theory_lower_exponent!r}",
        f"fitted_slope={c.fitted_slope!r}",
        f"fit_r2={c.fit_r2!r}",
    ]
    for (T, mean, se), (_, pmean, pse) in zip(c.points, c.pooled_points):
        lines.append(f"T={T} worst_mean={mean!r} worst_se={se!r} pooled_mean={pmean!r} pooled_se={pse!r}")
    lines.append(
        f"baseline_T={baseline_T} skeleton_mean={base.skeleton_mean!r} "
        f"direct_mean={base.direct_mean!r} diff_se={base.diff_se!r} ordered={base.ordered}"
    )
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")
    _emit_plot_script(outdir, "rates", "rates.csv", "T", "tv_error", loglog=True)
    return 0


def cmd_lowerbound(config: dict, seed: int, outdir: Path, workers: int, exact: bool) -> int:
    exp = ExperimentConfig(
        m=config["m"], d=config["d"], L=config["L"], alpha=config["alpha"],
        family="parity", T_grid=config["T_grid"],
        replicates=config["replicates"], seed=seed,
    )
    res = run_lower_experiment(exp, workers=workers)
    write_csv(outdir / "lowerbound.csv", RATE_CSV_HEADER, res.rows)
    lines = []
    for T, cell in sorted(res.per_T.items()):
        lines.append(
            f"T={T} mean={cell['mean']!r} se={cell['se']!r} "
            f"floor={cell['floor']!r} above_floor={cell['pass']}"
        )
    lines.append(
        f"ni_expected_per_task={res.ni_expected_per_task!r} ni_mean={res.ni_mean!r} "
        f"ni_sigma={res.ni_sigma!r} within_3sigma={res.ni_within_3sigma}"
    )
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")
    _emit_plot_script(outdir, "lowerbound", "lowerbound.csv", "T", "tv_error", loglog=True)
    return 0


def cmd_coinbound(config: dict, seed: int, outdir: Path, workers: int, exact: bool) -> int:
    rows = coin_bound_table(config["gammas"], range(config["n_max"] + 1))
    write_csv(outdir / "coinbound.csv", COIN_CSV_HEADER, rows)
    n_fail = sum(1 for r in rows if not r[4])
    (outdir / "summary.txt").write_text(
        f"rows={len(rows)}\nviolations={n_fail}\nall_pass={n_fail == 0}\n"
    )
    _emit_plot_script(outdir, "coinbound", "coinbound.csv", "n", "bayes_error", loglog=False)
    return 0


def cmd_lemmas(config: dict, seed: int, outdir: Path, workers: int, exact: bool) -> int:
    m, d, k_max = config["m"], config["d"], config["k_max"]
    space = enumerate_concepts(m, d)
    dist = uniform_distribution(m)
    rng = stream(seed, 1)
    rows = []
    for p in range(config["pairs"]):
        pa, pb = random_prior(space, rng), random_prior(space, rng)
        chain = verify_lemma_chain(pa, pb, dist, k_max)
        rows.extend(chain.csv_rows())
        k = int(rng.integers(d, k_max + 1))
        anchors = tuple(int(x) for x in rng.integers(1, m + 1, size=k))
        rows.append(verify_tree_inequality(pa, pb, anchors, d).csv_row())
        rows.extend(r.csv_row() for r in verify_sqrt_bound(pa, pb, dist, d))
    rows.extend(r.csv_row() for r in check_sauer(space, k_max=min(8, m)))
    write_csv(outdir / "lemmas.csv", CHECK_CSV_HEADER, rows)
    n_fail = sum(1 for r in rows if not r[5])
    (outdir / "summary.txt").write_text(
        f"rows={len(rows)}\nviolations={n_fail}\nall_pass={n_fail == 0}\n"
    )
    _emit_plot_script(outdir, "lemmas", "lemmas.csv", "k", "lhs", loglog=False)
    return 0


def cmd_smoothness(config: dict, seed: int, outdir: Path, workers: int, exact: bool) -> int:
    rows = []
    rng = stream(seed, 2)
    header = (
        "m", "d", "L", "alpha", "gamma", "mass_gap", "density_lo", "density_hi",
        "holder_ok", "pass",
    )
    for m in range(2, config["m_max"] + 1):
        for d in range(1, min(config["d_max"], m) + 1):
            space = enumerate_concepts(m, d)
            dist = uniform_distribution(m)
            for L in config["L_list"]:
                for alpha in config["alpha_list"]:
                    gamma = (L / 2.0) * (1.0 / m) ** alpha
                    if not 0 < gamma < 0.5:
                        continue  # rejected parameterization
                    use_exact = exact and float(alpha).is_integer()
                    for _ in range(config["signs_per_instance"]):
                        b = tuple(int(s) for s in rng.choice([-1, 1], size=comb(m, d)))
                        params = SmoothPriorParams(b, L, alpha, m, d)
                        pb = smooth_prior(params, space, exact=use_exact)
                        if use_exact:
                            mass_gap = 0.0 if sum(pb.exact) == 1 else float(abs(sum(pb.exact) - 1))
                        else:
                            mass_gap = abs(float(pb.mass.sum()) - 1.0)
                        ref = reference_prior(space, exact=use_exact)
                        f = density_table(pb, ref)
                        hold = holder_check(pb, ref, L, alpha, dist).ok
                        ok = (
                            mass_gap <= 1e-12
                            and f.min() >= 1 - gamma - 1e-12
                            and f.max() <= 1 + gamma + 1e-12
                            and hold
                        )
                        rows.append(
                            (m, d, L, alpha, gamma, mass_gap, float(f.min()), float(f.max()), hold, ok)
                        )
    write_csv(outdir / "smoothness.csv", header, rows)
    n_fail = sum(1 for r in rows if not r[9])
    (outdir / "summary.txt").write_text(
        f"rows={len(rows)}\nviolations={n_fail}\nall_pass={n_fail == 0}\n"
    )
    _emit_plot_script(outdir, "smoothness", "smoothness.csv", "m", "gamma", loglog=False)
    return 0


def cmd_elicit(config: dict, seed: int, outdir: Path, workers: int, exact: bool) -> int:
    eps = config["epsilon"]
    menu, family = presence_family(seed=config["family_seed"], n_items=config["n_items"])
    (outdir / "menu.tsv").write_text(menu.to_table_text())
    model = FamilyOutcomeModel(family)
    schedule = calibrate_schedule(
        family, model, alpha=eps / 2.0, T_grid=config["calibration_T_grid"],
        replicates=config["calibration_replicates"], seed=seed,
    )
    q_table = [
        estimate_Q(j, family, eps / 4.0, trials=config["q_trials"], seed=seed).mean
        for j in range(family.n_members)
    ]
    all_regrets, tails, exceeds = [], [], []
    for rep in range(config["replicates"]):
        truth = rep % family.n_members
        res = run_algorithm1(
            family, model, schedule, truth, eps, config["T"],
            seed=seed + 1000 + rep, q_table=q_table,
        )
        write_csv(
            outdir / f"ledger_{rep:03d}.csv",
            LEDGER_CSV_HEADER,
            [r.csv_row() for r in res.rows],
        )
        all_regrets.extend(r.regret for r in res.rows)
        tails.append((truth, res.tail_query_avg, q_table[truth]))
        exceeds.append(res.exceedance_rate)
    reg = np.asarray(all_regrets)
    se = float(reg.std(ddof=1) / np.sqrt(len(reg)))
    lines = [
        f"epsilon={eps!r}",
        f"streams={config['replicates']} T={config['T']}",
        f"mean_regret={float(reg.mean())!r} se={se!r} upper95={float(reg.mean() + 1.645 * se)!r}",
        f"exceedance_max={max(exceeds)!r} (target <= {eps / 2.0!r})",
    ]
    for truth, tail_avg, q in tails:
        lines.append(
            f"truth={truth} tail_query_avg={tail_avg!r} "
            f"q_hat={q!r} budget={q + family.d + 0.5!r}"
        )
    lines.append("schedule_knots=" + ",".join(str(k) for k in schedule.knots))
    lines.append("schedule_R=" + ",".join(repr(r) for r in schedule.R))
    lines.append("schedule_delta=" + ",".join(repr(x) for x in schedule.delta))
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")
    _emit_plot_script(outdir, "elicit", "ledger_000.csv", "t", "queries", loglog=False)
    return 0


def cmd_cover_info(config: dict, seed: int, outdir: Path, workers: int, exact: bool) -> int:
    space = enumerate_concepts(config["m"], config["d"])
    header = ("m", "d", "L", "alpha", "epsilon", "cover_size", "n_cells", "grid_step")
    rows = []
    for eps in config["epsilons"]:
        fam = cover_priors(
            space, config["L"], config["alpha"], eps, budget=config["budget"]
        )
        rows.append(
            (
                config["m"], config["d"], config["L"], config["alpha"], eps,
                fam.size, fam.meta["n_cells"], fam.meta["grid_step"],
            )
        )
    write_csv(outdir / "cover_info.csv", header, rows)
    _, members = parity_family(space, config["L"], config["alpha"])
    lines = [f"parity_family_size={len(members)}"]
    for r in rows:
        lines.append(f"epsilon={r[4]!r} measured_cover_size={r[5]} cells={r[6]}")
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")
    _emit_plot_script(outdir, "cover-info", "cover_info.csv", "epsilon", "cover_size", loglog=False)
    return 0


DISPATCH = {
    "rates": cmd_rates,
    "lowerbound": cmd_lowerbound,
    "coinbound": cmd_coinbound,
    "lemmas": cmd_lemmas,
    "smoothness": cmd_smoothness,
    "elicit": cmd_elicit,
    "cover-info": cmd_cover_info,
}


def dispatch(
    subcommand: str,
    config_path: str | Path | None,
    seed: int,
    outdir: str | Path,
    workers: int = 1,
    exact_rational: bool = False,
) -> int:
    """Run one subcommand; returns the process exit code."""
    if subcommand not in DISPATCH:
        print(f"unknown subcommand {subcommand!r}; choose from {', '.join(SUBCOMMANDS)}",
              file=sys.stderr)
        return 1
    outdir = Path(outdir)
    try:
        if config_path is None:
            config = {k: v for k, (_, v) in SCHEMAS[subcommand].items()}
            missing = [k for k, v in config.items() if v is _REQUIRED]
            if missing:
                raise ValueError(
                    f"{subcommand} requires a config file with: {', '.join(missing)}"
                )
        else:
            config = parse_config(config_path, subcommand)
        outdir.mkdir(parents=True, exist_ok=True)
        _manifest(outdir, subcommand, config_path, config, seed, workers)
        return DISPATCH[subcommand](config, seed, outdir, workers, exact_rational)
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="priorlab",
        description="Simulation workbench for prior estimation over finite VC classes.",
    )
    parser.add_argument("subcommand", help=f"one of: {', '.join(SUBCOMMANDS)}")
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--out",
        default=os.environ.get("PRIORLAB_OUT", "priorlab-out"),
        help="output directory (env PRIORLAB_OUT overrides the default)",
    )
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--exact-rational", type=_bool, default=False, metavar="BOOL")
    args = parser.parse_args(argv)
    if args.subcommand not in SUBCOMMANDS:
        parser.print_usage(sys.stderr)
        print(f"unknown subcommand {args.subcommand!r}; choose from {', '.join(SUBCOMMANDS)}",
              file=sys.stderr)
        return 1
    return dispatch(
        args.subcommand, args.config, args.seed, args.out, args.workers, args.exact_rational
    )


if __name__ == "__main__":
    sys.exit(main())
