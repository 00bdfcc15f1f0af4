"""Command-line front end: reproduction suite, expression evaluation, and
Fock-space experiments with reproducible CSV/JSON reports and figures.

Exit codes: 0 success, 1 gate failure (with a machine-readable failure
manifest), 2 configuration or expression errors.
"""

import argparse
import math
import os
import sys
import time

import numpy as np

from .core import GenfunError, GenNumber, combine, compose_polynomial, derivative
from .embedding import embed_delta, embed_heaviside, standard_test_suite
from .quadrature import integrate, integrate_gf_at, pair_result, QuadratureError
from .asymptotics import (
    NoLimitError,
    PowerLawUnfitError,
    VERDICT_INFINITE,
    classify,
    fit_power_law,
    is_negligible,
    limit_estimate,
)
from .qft import (
    FockSpec,
    InteractionSpec,
    StateVector,
    TransitionProblem,
    dyson_partial_sums,
    exact_amplitude,
    first_divergence_order,
    transition_probability,
    transition_report,
)
from .expr import (
    ExprEvalError,
    ExprSyntaxError,
    ExprTypeError,
    NUM,
    eval_genexpr,
    parse_genexpr,
)
from .config import (
    ConfigError,
    apply_overrides,
    default_config,
    load_config,
)
from . import reports

EQ2_VALUE = -1.0 / 6.0
EQ2_GATE = 1e-10
POWER_GATE = 1e-10
EQ1_LIMIT_GATE = 1e-8
EQ1_ORDER_GATE = 0.1
SUPNORM_GATE = 1e-6
DELTA_SQ_ORDER_GATE = 0.05
DELTA_SQ_COEFF_GATE = 0.01
UNITARITY_GATE = 1e-10
COMPLETENESS_GATE = 1e-9
RABI_GATE = 1e-8
PHASE_SPREAD_GATE = 1e-10
ORDER4_GATE = 1e-5


def _gen_number_from_table(table, description):
    values = {float(e): float(v) for e, v in table}

    def at(eps):
        return values[float(eps)]

    return GenNumber(at, description)


def _h_squared_minus_h(mollifier):
    h = embed_heaviside(mollifier)
    return combine("sub", compose_polynomial([0.0, 0.0, 1.0], h), h), h


def cmd_reproduce(cfg):
    """Run the reproduction suite; returns the process exit code."""
    t0 = time.perf_counter()
    grid = cfg.grid
    eps_list = [float(e) for e in grid.values()]
    suite = standard_test_suite(cfg.suite_count, cfg.suite_seed)
    primary = cfg.mollifier.build()
    mollifiers = [mc.build() for mc in cfg.reproduce_mollifiers]

    rows = []
    failures = []
    eq2_cells = {}
    delta_cells = {}
    delta_summary = {}
    power_max_dev = 0.0

    for m in mollifiers:
        h = embed_heaviside(m)
        hp = derivative(h)
        integrand = combine(
            "mul", combine("sub", compose_polynomial([0.0, 0.0, 1.0], h), h), hp)
        cells = []
        for eps in eps_list:
            res = integrate_gf_at(integrand, eps, -math.inf, math.inf,
                                  tol=cfg.tol_identity)
            rows.append(("eq2", m.kind, eps, None, res.value, res.error_estimate))
            cells.append((eps, res.value))
            if abs(res.value - EQ2_VALUE) > EQ2_GATE:
                failures.append({
                    "experiment": "eq2", "mollifier": m.kind, "epsilon": eps,
                    "message": f"deviates from -1/6 by {abs(res.value - EQ2_VALUE):.3e}",
                })
        eq2_cells[m.kind] = cells

        for n in range(1, cfg.power_identity_max + 1):
            hn = compose_polynomial([0.0] * n + [1.0], h)
            un = combine("mul", hn, hp)
            expected = 1.0 / (n + 1)
            for eps in eps_list:
                res = integrate_gf_at(un, eps, -math.inf, math.inf,
                                      tol=cfg.tol_identity)
                rows.append((f"power_identity_n{n}", m.kind, eps, None,
                             res.value, res.error_estimate))
                dev = abs(res.value - expected)
                power_max_dev = max(power_max_dev, dev)
                if dev > POWER_GATE:
                    failures.append({
                        "experiment": f"power_identity_n{n}",
                        "mollifier": m.kind, "epsilon": eps,
                        "message": f"deviates from 1/{n + 1} by {dev:.3e}",
                    })

        d = embed_delta(m)
        dsq = combine("mul", d, d)
        cells = []
        for eps in eps_list:
            res = integrate_gf_at(dsq, eps, -math.inf, math.inf,
                                  tol=cfg.tol_sweep)
            rows.append(("delta_squared", m.kind, eps, None,
                         res.value, res.error_estimate))
            cells.append((eps, res.value))
        delta_cells[m.kind] = cells
        radius = m.support_radius
        rho = m.kernel(0)
        oracle = integrate(lambda y: rho(y) ** 2, -radius, radius,
                           tol=1e-12).value
        cls = classify(_gen_number_from_table(cells, f"int(delta^2)[{m.kind}]"),
                       grid)
        delta_summary[m.kind] = {
            "classification": cls.to_dict(),
            "kernel_l2_oracle": oracle,
        }
        ok = (cls.verdict == VERDICT_INFINITE
              and abs(cls.order - 1.0) <= DELTA_SQ_ORDER_GATE
              and abs(cls.coefficient - oracle) <= DELTA_SQ_COEFF_GATE * oracle)
        if not ok:
            failures.append({
                "experiment": "delta_squared", "mollifier": m.kind,
                "message": f"classification {cls!r} does not match the "
                           f"scaling oracle {oracle:.6g}/eps",
            })

    # Pairings of H^2 - H against the suite (primary mollifier).
    u, _ = _h_squared_minus_h(primary)
    eq1_rows = {}
    eq1_summary = []
    all_vanish = True
    order_pass_count = 0
    for i, psi in enumerate(suite):
        cells = []
        for eps in eps_list:
            res = pair_result(u, psi, eps, tol=cfg.tol_identity)
            rows.append(("eq1_pairing", primary.kind, eps, i,
                         res.value, res.error_estimate))
            cells.append((eps, res.value))
        eq1_rows[i] = cells
        gn = _gen_number_from_table(cells, f"<H^2-H, psi_{i}>")
        entry = {"psi_id": i, "psi_value_at_zero": psi.value_at_zero}
        try:
            order, _, _ = fit_power_law(gn, grid)
        except PowerLawUnfitError:
            order = None
        entry["decay_order"] = order
        try:
            limit, err = limit_estimate(gn, grid)
            entry["limit"] = limit
            entry["limit_error"] = err
            vanish = abs(limit) <= EQ1_LIMIT_GATE
        except NoLimitError as exc:
            entry["limit"] = None
            entry["note"] = str(exc)
            vanish = False
        if not vanish:
            failures.append({
                "experiment": "eq1_pairing", "psi_id": i,
                "message": "pairing limit does not vanish within 1e-8",
            })
        all_vanish = all_vanish and vanish
        if (psi.value_at_zero != 0.0 and order is not None
                and abs(order - 1.0) <= EQ1_ORDER_GATE and vanish):
            order_pass_count += 1
        eq1_summary.append(entry)

    if order_pass_count < 5:
        failures.append({
            "experiment": "eq1_pairing",
            "message": f"only {order_pass_count} pairings decay with order "
                       f"1.0 +- {EQ1_ORDER_GATE} (need >= 5)",
        })

    # Sup-norm of H^2 - H: bounded away from zero at every eps.
    negligible, sup_table = is_negligible(u, (-1.0, 1.0), grid)
    for eps, sup in sup_table:
        rows.append(("supnorm_h2_minus_h", primary.kind, eps, None, sup, None))
        if abs(sup - 0.25) > SUPNORM_GATE:
            failures.append({
                "experiment": "supnorm_h2_minus_h", "epsilon": eps,
                "message": f"sup-norm {sup!r} deviates from 1/4 beyond 1e-6",
            })
    implication3_fails = all_vanish and not negligible
    if not implication3_fails:
        failures.append({
            "experiment": "implication3",
            "message": "expected all pairings to vanish while the sup-norm "
                       "stays at 1/4; one side failed",
        })

    runtime = time.perf_counter() - t0
    summary = {
        "schema_version": reports.SCHEMA_VERSION,
        "grid": {"eps0": grid.eps0, "ratio": grid.ratio, "count": grid.count},
        "suite": {"count": cfg.suite_count, "seed": cfg.suite_seed},
        "eq2": {
            kind: {f"{eps:.17g}": value for eps, value in cells}
            for kind, cells in eq2_cells.items()
        },
        "eq2_max_deviation": max(
            abs(v - EQ2_VALUE) for cells in eq2_cells.values() for _, v in cells),
        "power_identity_max_deviation": power_max_dev,
        "eq1": eq1_summary,
        "implication3": {
            "all_pairings_vanish": all_vanish,
            "negligible": negligible,
            "implication3_fails": implication3_fails,
            "supnorm_by_eps": [[e, s] for e, s in sup_table],
        },
        "delta_squared": delta_summary,
        "notes": [
            "the -1/6 identity and the 1/(n+1) family are mollifier-"
            "independent (verified across kinds); pairing decay "
            "coefficients depend on the kernel",
            "'negligible' is tested as fitted decay order >= 2 over the "
            "finite grid, an honest proxy for faster-than-any-power decay",
        ],
        "runtime_seconds": runtime,
        "gates_passed": not failures,
    }

    out = cfg.out_dir
    reports.write_csv(os.path.join(out, "reproduce.csv"),
                      reports.REPRODUCE_CSV_COLUMNS, rows)
    reports.write_json(os.path.join(out, "reproduce_summary.json"), summary)
    if cfg.figures:
        reports.render_reproduce_figures(out, eq2_cells, eq1_rows, sup_table,
                                         delta_cells)
    if failures:
        reports.write_json(os.path.join(out, "failures.json"),
                           {"schema_version": reports.SCHEMA_VERSION,
                            "command": "reproduce", "failures": failures})

    print(f"eq2: max |value + 1/6| = {summary['eq2_max_deviation']:.3e} "
          f"over {len(mollifiers) * len(eps_list)} cells")
    print(f"power identities: max deviation {power_max_dev:.3e}")
    print(f"eq1: all pairings vanish = {all_vanish}; "
          f"{order_pass_count} pairings decay with order ~1")
    print(f"implication (3) fails = {implication3_fails} "
          f"(sup-norm stays at 1/4 while pairings vanish)")
    print(f"runtime: {runtime:.2f} s; wrote {out}/reproduce.csv")
    if failures:
        print(f"{len(failures)} gate failure(s); see {out}/failures.json",
              file=sys.stderr)
        return 1
    return 0


def _block_problem(block, coupling, t):
    fock = FockSpec(block.dimension, block.omega)
    interaction = InteractionSpec(block.potential, coupling, block.counterterm)
    initial = StateVector.basis(block.initial, block.dimension)
    final = StateVector.basis(block.final, block.dimension)
    return TransitionProblem(fock, interaction, initial, final, t)


def _validate_rabi_block(block):
    if (block.dimension != 2 or block.omega != 0.0
            or tuple(block.potential) != (0.0, 1.0)
            or {block.initial, block.final} != {0, 1}):
        raise ConfigError(
            f"[qft:{block.name}] expect_rabi requires the bare two-level "
            "problem: dimension=2, omega=0, potential=0,1, states 0 and 1")


def cmd_qft(cfg):
    """Run the Fock-space problem blocks; returns the process exit code."""
    qft_rows = []
    dyson_rows = []
    failures = []
    block_summaries = {}
    dyson_figs = {}
    sweep_figs = {}
    rabi_points = []

    for block in cfg.qft_blocks:
        summary = {}
        if block.expect_rabi:
            _validate_rabi_block(block)

        if block.sweep:
            problem = _block_problem(block, block.coupling, block.time)
            cells = []
            for eps in (float(e) for e in cfg.grid.values()):
                res = transition_report(problem, eps)
                qft_rows.append((block.name, eps, block.dimension, block.time,
                                 res.probability, res.unitarity_defect))
                cells.append((eps, res.probability))
                if res.unitarity_defect > UNITARITY_GATE:
                    failures.append({
                        "problem": block.name, "epsilon": eps,
                        "message": f"unitarity defect {res.unitarity_defect:.3e}",
                    })
            sweep_figs[block.name] = cells
            cls = classify(_gen_number_from_table(cells, f"P[{block.name}]"),
                           cfg.grid)
            summary["sweep_classification"] = cls.to_dict()
            if block.coupling_text.endswith("log(1/eps)") or "eps" in block.coupling_text:
                summary["note"] = (
                    "growing-coupling sweep; a stand-in for couplings that "
                    "would make a perturbation series nonrenormalizable-like")
            if block.expect_constant_in_eps:
                spread = max(p for _, p in cells) - min(p for _, p in cells)
                summary["probability_spread"] = spread
                if spread > PHASE_SPREAD_GATE:
                    failures.append({
                        "problem": block.name,
                        "message": f"identity-counterterm sweep spread "
                                   f"{spread:.3e} exceeds {PHASE_SPREAD_GATE}",
                    })
        else:
            couplings = block.couplings if block.couplings else (None,)
            times = block.times if block.times else (block.time,)
            first_problem = None
            for g in couplings:
                coupling = block.coupling if g is None else float(g)
                for t in times:
                    problem = _block_problem(block, coupling, float(t))
                    if first_problem is None:
                        first_problem = problem
                    res = transition_report(problem, block.epsilon)
                    qft_rows.append((block.name, block.epsilon, block.dimension,
                                     float(t), res.probability,
                                     res.unitarity_defect))
                    if res.unitarity_defect > UNITARITY_GATE:
                        failures.append({
                            "problem": block.name, "time": t,
                            "message": f"unitarity defect {res.unitarity_defect:.3e}",
                        })
                    if block.expect_rabi:
                        g_eff = coupling.at(block.epsilon) if g is None else float(g)
                        expected = math.sin(g_eff * t) ** 2
                        rabi_points.append((g_eff * t, res.probability))
                        if abs(res.probability - expected) > RABI_GATE:
                            failures.append({
                                "problem": block.name, "g": g_eff, "time": t,
                                "message": f"|P - sin^2(gt)| = "
                                           f"{abs(res.probability - expected):.3e}",
                            })

            completeness = sum(
                transition_probability(
                    TransitionProblem(first_problem.fock,
                                      first_problem.interaction,
                                      first_problem.initial,
                                      StateVector.basis(k, block.dimension),
                                      first_problem.time),
                    block.epsilon)
                for k in range(block.dimension))
            summary["completeness_sum"] = completeness
            if abs(completeness - 1.0) > COMPLETENESS_GATE:
                failures.append({
                    "problem": block.name,
                    "message": f"completeness sum {completeness!r} off by "
                               f"{abs(completeness - 1.0):.3e}",
                })

            if block.dims:
                previous = None
                converged_at = None
                for dim in block.dims:
                    problem = _block_problem(block, block.coupling, block.time)
                    problem = problem.with_dimension(dim)
                    res = transition_report(problem, block.epsilon)
                    qft_rows.append((block.name, block.epsilon, dim, block.time,
                                     res.probability, res.unitarity_defect))
                    if (previous is not None and converged_at is None
                            and abs(res.probability - previous) < 1e-6):
                        converged_at = dim
                    previous = res.probability
                summary["truncation_converged_at"] = converged_at

            if block.dyson_orders is not None:
                problem = _block_problem(block, block.coupling, block.time)
                sums = dyson_partial_sums(problem, block.epsilon,
                                          block.dyson_orders, block.dyson_steps)
                exact = exact_amplitude(problem, block.epsilon)
                exact_p = abs(exact) ** 2
                partial_probs = [abs(s) ** 2 for s in sums]
                for k, p in enumerate(partial_probs):
                    dyson_rows.append((block.name, k, p, exact_p))
                first_div = first_divergence_order(sums, exact)
                summary["first_divergence_order"] = first_div
                summary["exact_probability"] = exact_p
                dyson_figs[block.name] = (list(range(len(sums))),
                                          partial_probs, exact_p)
                if block.expect_divergence and first_div is None:
                    failures.append({
                        "problem": block.name,
                        "message": "expected the partial sums to diverge; "
                                   "none exceeded the threshold",
                    })
                if block.expect_order4_match:
                    dev = abs(partial_probs[min(4, len(partial_probs) - 1)]
                              - exact_p)
                    summary["order4_deviation"] = dev
                    if dev > ORDER4_GATE:
                        failures.append({
                            "problem": block.name,
                            "message": f"order-4 partial sum deviates from the "
                                       f"exact probability by {dev:.3e}",
                        })

        block_summaries[block.name] = summary

    payload = {
        "schema_version": reports.SCHEMA_VERSION,
        "blocks": block_summaries,
        "gates_passed": not failures,
    }
    out = cfg.out_dir
    reports.write_csv(os.path.join(out, "qft.csv"),
                      reports.QFT_CSV_COLUMNS, qft_rows)
    reports.write_csv(os.path.join(out, "dyson.csv"),
                      reports.DYSON_CSV_COLUMNS, dyson_rows)
    reports.write_json(os.path.join(out, "qft_summary.json"), payload)
    if cfg.figures:
        reports.render_qft_figures(out, dyson_figs, sweep_figs, rabi_points)
    if failures:
        reports.write_json(os.path.join(out, "failures.json"),
                           {"schema_version": reports.SCHEMA_VERSION,
                            "command": "qft", "failures": failures})

    print(f"qft: {len(qft_rows)} probability rows, {len(dyson_rows)} "
          f"partial-sum rows; wrote {out}/qft.csv and {out}/dyson.csv")
    for name, s in block_summaries.items():
        if "first_divergence_order" in s:
            print(f"  {name}: first divergence order = "
                  f"{s['first_divergence_order']}, exact probability = "
                  f"{s['exact_probability']:.6g}")
        if "sweep_classification" in s:
            print(f"  {name}: sweep verdict = "
                  f"{s['sweep_classification']['verdict']}")
    if failures:
        print(f"{len(failures)} gate failure(s); see {out}/failures.json",
              file=sys.stderr)
        return 1
    return 0


def cmd_eval(cfg, text, classify_only=False):
    """Evaluate (or classify) an expression over the configured grid."""
    ast = parse_genexpr(text)
    mollifier = cfg.mollifier.build()
    suite = standard_test_suite(cfg.suite_count, cfg.suite_seed)
    report = eval_genexpr(ast, mollifier, cfg.grid, suite, tol=cfg.tol_sweep)

    if classify_only and report.kind != NUM:
        print("classify requires a number-valued expression; wrap it in "
              "int(...) or pair(...)", file=sys.stderr)
        return 2

    print(f"expression: {report.text}")
    if report.kind == NUM:
        print(f"{'epsilon':>24}  {'value':>24}")
        for eps, value in report.samples:
            print(f"{eps:>24.17g}  {value:>24.17g}")
        cls = report.classification
        print(f"classification: {cls.verdict}", end="")
        if cls.order is not None:
            print(f", order {cls.order:.4g}", end="")
        if cls.coefficient is not None:
            print(f", coefficient {cls.coefficient:.8g}", end="")
        if cls.limit is not None:
            print(f", limit {cls.limit:.12g} +- {cls.limit_error:.2g}", end="")
        if cls.fit_quality is not None:
            print(f", R^2 {cls.fit_quality:.6f}", end="")
        print()
        if cfg.out_dir:
            reports.write_csv(os.path.join(cfg.out_dir, "eval.csv"),
                              ("epsilon", "value"), report.samples)
            reports.write_json(os.path.join(cfg.out_dir, "classify.json"), {
                "schema_version": reports.SCHEMA_VERSION,
                "expression": report.text,
                "classification": cls.to_dict(),
            })
    else:
        print(f"function-valued: {len(report.function_table)} sampled points "
              f"across {cfg.grid.count} epsilon values")
        if cfg.out_dir:
            reports.write_csv(os.path.join(cfg.out_dir, "eval.csv"),
                              ("epsilon", "x", "value"), report.function_table)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a configuration file")
    common.add_argument("--out", help="output directory (default from config)")
    common.add_argument("--seed", type=int, help="test-function suite seed")
    common.add_argument("--grid", help="epsilon grid as eps0,ratio,count")
    common.add_argument("--mollifier",
                        help="mollifier as kind[:key=value,...], e.g. "
                             "bump:radius=1,skew=0.2")
    common.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")

    parser = argparse.ArgumentParser(
        prog="genfun",
        description="numerical algebra of generalized functions and "
                    "desk-scale nonperturbative transition probabilities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("reproduce", parents=[common],
                   help="run the identity/paradox reproduction suite")
    p_eval = sub.add_parser("eval", parents=[common],
                            help="evaluate an expression over the grid")
    p_eval.add_argument("expr")
    sub.add_parser("qft", parents=[common],
                   help="run the Fock-space problem blocks")
    p_cls = sub.add_parser("classify", parents=[common],
                           help="classify a number-valued expression")
    p_cls.add_argument("expr")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                cfg = load_config(fh.read())
        else:
            cfg = default_config()
        cfg = apply_overrides(cfg, args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "reproduce":
            return cmd_reproduce(cfg)
        if args.command == "qft":
            return cmd_qft(cfg)
        if args.command == "eval":
            return cmd_eval(cfg, args.expr)
        if args.command == "classify":
            return cmd_eval(cfg, args.expr, classify_only=True)
    except (ExprSyntaxError, ExprTypeError, ConfigError) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (ExprEvalError, QuadratureError, NoLimitError, GenfunError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
