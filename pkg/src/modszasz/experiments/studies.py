"""Numerical studies of S_n: convergence, Voronovskaja limit, direct and
inverse estimates, the comparison figures and a moment audit."""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np

from ..errors import DomainError, EvaluationError, TruncationError
from ..moments import (
    build_table,
    central_moment,
    coefficient_identity_check,
    raw_moment,
)
from ..operator import EvalConfig, custom, evaluate, monomial, parse_function
from ..sequences import parse_sequence
from ..smoothness import (
    WeightedSpace,
    fit_loglog_slope,
    lipschitz_alpha_estimate,
    modulus2_many,
    steklov_second_derivative,
    _gauss_legendre,
)
from . import figures
from .report import new_report

MAX_REFINEMENTS = 3
REFINE_RTOL = 0.01
MODULUS_FLOOR = 1e-14
EVAL_ERRORS = (TruncationError, EvaluationError, DomainError)


def _noise_floor(cfg):
    return max(1e3 * cfg.tol, 1e-12)


def _weighted_error(f, b, xs, space, cfg):
    return space.weight(xs) * np.abs(evaluate(f, b, xs, cfg) - f(xs))


def sup_weighted_error(f, b, x_max, points, space, cfg, refine=True):
    """sup over [0, x_max] of w_N(x)|S(f;x) - f(x)| with adaptive refinement.

    The grid is halved (midpoints added) until the sup moves by less than 1%,
    at most three times. Returns (sup, argmax x, final grid).
    """
    xs = np.linspace(0.0, x_max, points)
    err = _weighted_error(f, b, xs, space, cfg)
    sup = float(np.max(err))
    if refine:
        for _ in range(MAX_REFINEMENTS):
            mids = 0.5 * (xs[:-1] + xs[1:])
            err_mid = _weighted_error(f, b, mids, space, cfg)
            merged_x = np.empty(xs.size + mids.size)
            merged_e = np.empty_like(merged_x)
            merged_x[0::2], merged_x[1::2] = xs, mids
            merged_e[0::2], merged_e[1::2] = err, err_mid
            xs, err = merged_x, merged_e
            new_sup = float(np.max(err))
            moved = abs(new_sup - sup) > REFINE_RTOL * sup if sup > 0 else new_sup > 0
            sup = new_sup
            if not moved:
                break
    return sup, float(xs[int(np.argmax(err))]), xs


def _slope(bs, values, drop_first=True):
    bs = np.asarray(bs, dtype=float)
    values = np.asarray(values, dtype=float)
    if drop_first and bs.size > 2:
        bs, values = bs[1:], values[1:]
    ok = np.isfinite(values) & (values > 0)
    if ok.sum() < 2:
        return float("nan")
    return fit_loglog_slope(bs[ok], values[ok])


def run_converge(spec):
    """Weighted sup error of S_n f - f over [0, a] along the n ladder."""
    f, space, cfg = spec.function, spec.space, spec.eval
    rows = []
    for n in spec.n_ladder:
        b = spec.sequence.value(n)
        row = {"n": n, "b_n": b}
        try:
            sup, x_at, xs = sup_weighted_error(f, b, spec.window, spec.x_points, space, cfg, spec.refine)
            prediction = float(np.max(space.weight(xs) * xs / b))
            row.update(
                sup_error=sup,
                x_at_sup=x_at,
                grid_points=xs.size,
                predicted=prediction,
                ratio=sup / prediction if prediction > 0 else float("nan"),
                status="ok",
            )
        except EVAL_ERRORS as exc:
            row.update(sup_error=float("nan"), x_at_sup=float("nan"), grid_points=0,
                       predicted=float("nan"), ratio=float("nan"), status=f"error: {exc}")
        rows.append(row)
    errors = [r["sup_error"] for r in rows]
    ok = [e for e in errors if math.isfinite(e)]
    summary = {
        "strictly_decreasing": all(b < a for a, b in zip(ok, ok[1:])),
        "final_sup_error": ok[-1] if ok else float("nan"),
    }
    flags = []
    if f.kind == "exp":
        flags.append("function outside every C_gamma (exponential growth)")
    return new_report(spec, rows, summary, flags=flags)


def _second_derivative(f, xs):
    if f.second_derivative is not None:
        return np.asarray(f.second_derivative(xs), dtype=float)
    return steklov_second_derivative(f, 1e-3, xs)


def run_voronovskaja(spec):
    """b_n [S_n f(x) - f(x)] against (x/2) f''(x) on a grid over [0, a]."""
    f, cfg = spec.function, spec.eval
    xs = np.linspace(0.0, spec.window, spec.x_points)
    target = 0.5 * xs * _second_derivative(f, xs)
    rows, per_n = [], []
    for n in spec.n_ladder:
        b = spec.sequence.value(n)
        try:
            scaled = b * (evaluate(f, b, xs, cfg) - f(xs))
            status = "ok"
        except EVAL_ERRORS as exc:
            scaled = np.full(xs.shape, np.nan)
            status = f"error: {exc}"
        residual = scaled - target
        for x, s, t, r in zip(xs, scaled, target, residual):
            rows.append({"n": n, "b_n": b, "x": float(x), "scaled_error": float(s),
                         "limit": float(t), "residual": float(r), "status": status})
        finite = np.abs(residual[np.isfinite(residual)])
        per_n.append({"n": n, "b_n": b, "max_residual": float(finite.max()) if finite.size else float("nan")})
    maxima = [p["max_residual"] for p in per_n]
    shrink = [a / b if b > 0 else float("inf") for a, b in zip(maxima, maxima[1:])]
    return new_report(spec, rows, {"per_n": per_n, "shrink_factors": shrink})


def run_direct_bound(spec):
    """Ratio of the (weighted) error to omega^2_N(f, sqrt(mu_2(x))) per (n, x).

    mu_2 comes from the exact moment table. x = 0 is skipped since both the
    error and the modulus argument vanish there.
    """
    f, space, cfg = spec.function, spec.space, spec.eval
    table = build_table(4)
    xs = np.linspace(0.0, spec.window, spec.x_points)[1:]
    noise = _noise_floor(cfg)
    cells = []
    for n in spec.n_ladder:
        b = spec.sequence.value(n)
        try:
            err = space.weight(xs) * np.abs(evaluate(f, b, xs, cfg) - f(xs))
            status = "ok"
        except EVAL_ERRORS as exc:
            err = np.full(xs.shape, np.nan)
            status = f"error: {exc}"
        mu2 = np.array([central_moment(table, 2, x, b) for x in xs])
        cells.append((n, b, err, np.sqrt(mu2), status))
    all_deltas = np.concatenate([c[3] for c in cells])
    moduli = modulus2_many(f, space, all_deltas, spec.h_samples).reshape(len(cells), xs.size)

    rows, per_n = [], []
    for (n, b, err, delta, status), mod in zip(cells, moduli):
        ratios = []
        for x, e, d, m in zip(xs, err, delta, mod):
            if not math.isfinite(e):
                ratio, flag = float("nan"), "evaluation_error"
            elif e <= noise:
                ratio, flag = 0.0, "below_noise"
            elif m < MODULUS_FLOOR:
                ratio, flag = float("inf"), "unbounded"
            else:
                ratio, flag = float(e / m), "ok"
            if flag in ("ok", "below_noise"):
                ratios.append(ratio)
            rows.append({"n": n, "b_n": b, "x": float(x), "error": float(e), "delta": float(d),
                         "modulus": float(m), "ratio": ratio, "flag": flag, "status": status})
        per_n.append({"n": n, "b_n": b, "max_ratio": max(ratios) if ratios else float("nan")})
    maxima = [p["max_ratio"] for p in per_n]
    finite = [m for m in maxima if math.isfinite(m)]
    summary = {
        "per_n": per_n,
        "C_hat": max(finite) if finite else float("nan"),
        "loglog_slope": _slope([p["b_n"] for p in per_n], maxima),
        "unbounded_rows": sum(r["flag"] == "unbounded" for r in rows),
    }
    return new_report(spec, rows, summary)


def run_alpha_inverse(spec):
    """Two independent exponent estimates for f.

    s1: slope of log sup_x w_N|S_n f - f| against log b_n (about -alpha/2).
    s2: slope of log omega^2_N(f, delta) against log delta (about alpha).
    """
    f, space, cfg = spec.function, spec.space, spec.eval
    rows = []
    for n in spec.n_ladder:
        b = spec.sequence.value(n)
        try:
            sup, x_at, xs = sup_weighted_error(f, b, spec.window, spec.x_points, space, cfg, spec.refine)
            rows.append({"n": n, "b_n": b, "sup_error": sup, "x_at_sup": x_at,
                         "grid_points": xs.size, "status": "ok"})
        except EVAL_ERRORS as exc:
            rows.append({"n": n, "b_n": b, "sup_error": float("nan"), "x_at_sup": float("nan"),
                         "grid_points": 0, "status": f"error: {exc}"})
    errors = np.array([r["sup_error"] for r in rows])
    error_saturated = bool(np.all(errors[np.isfinite(errors)] <= _noise_floor(cfg)))
    s1 = float("nan") if error_saturated else _slope([r["b_n"] for r in rows], errors)
    lip = lipschitz_alpha_estimate(f, space, spec.deltas, spec.h_samples)
    s2 = lip.alpha
    summary = {
        "decay_slope": s1,
        "modulus_slope": s2,
        "consistency_gap": abs(-2.0 * s1 - s2) if math.isfinite(s1) and math.isfinite(s2) else float("nan"),
        "error_saturated": error_saturated,
        "modulus_saturated": lip.saturated,
        "moduli": [{"delta": d, "modulus": m} for d, m in zip(lip.deltas, lip.moduli)],
    }
    return new_report(spec, rows, summary)


def _curve_label(seq_spec, n):
    family = {figures.CLASSICAL: "M", figures.HARMONIC: "S_harmonic", figures.ROOT: "S_root"}[seq_spec]
    return f"{family}_n{n}"


def run_figures(spec):
    """Curve bundles for the e^x / sin x comparison figures.

    Every curve is S_n(f; x) truncated at the setting's k. The deep-truncation
    regime, where the partial sum loses most of its mass, is part of what the
    figures show and is recorded rather than treated as an error.
    """
    names = spec.settings or tuple(figures.SETTINGS)
    unknown = [name for name in names if name not in figures.SETTINGS]
    if unknown:
        raise DomainError(f"unknown figure settings {unknown}")
    rows, bundles = [], {}
    for name in names:
        setting = figures.SETTINGS[name]
        f = parse_function(setting["function"])
        lo, hi = setting["interval"] or figures.DEFAULT_INTERVAL
        k = setting["k"] if setting["k"] is not None else spec.eval.fixed_k
        cfg = replace(spec.eval, fixed_k=k)
        xs = np.linspace(lo, hi, spec.figure_points)
        target = f(xs)
        header, columns = ["x", "target"], [xs, target]
        for seq_spec, ns in setting["curves"]:
            seq = parse_sequence(seq_spec)
            for n in ns:
                b = seq.value(n)
                label = _curve_label(seq_spec, n)
                try:
                    values = evaluate(f, b, xs, cfg)
                    status = "ok"
                except EVAL_ERRORS as exc:
                    values = np.full(xs.shape, np.nan)
                    status = f"error: {exc}"
                header.append(label)
                columns.append(values)
                rows.append({"setting": name, "curve": label, "sequence": seq_spec, "n": n, "b_n": b,
                             "k": k, "x_lo": lo, "x_hi": hi,
                             "sup_error": float(np.max(np.abs(values - target))), "status": status})
        bundles[name] = (header, columns)

    summary = {"curves": {name: len(bundles[name][0]) - 2 for name in bundles}}
    if "F5b" in bundles:
        summary["cross_family"] = _cross_family(rows)
    report = new_report(spec, rows, summary)
    report.bundles = bundles
    return report


def _cross_family(rows):
    """Root-sum sequence at n = 130 against the classical operator at n = 30 (F5b)."""
    lookup = {(r["setting"], r["curve"]): r["sup_error"] for r in rows}
    root = lookup.get(("F5b", "S_root_n130"))
    classical = lookup.get(("F5b", "M_n30"))
    if root is None or classical is None:
        return {}
    return {"root_n130": root, "classical_n30": classical, "ratio": root / classical}


def inverse_distance_integral(x, h, quad_points=32):
    """int_0^h int_0^h ds dt / (x + s + t), x >= 0, h > 0.

    Reduced to int_0^{2h} (h - |u - h|) / (x + u) du and split at u = h; the
    integrand stays bounded even at x = 0.
    """
    if not h > 0 or x < 0:
        raise DomainError("need x >= 0 and h > 0")
    z, w = _gauss_legendre(quad_points)
    total = 0.0
    for lo, hi in ((0.0, h), (h, 2.0 * h)):
        u = lo + (hi - lo) * (z + 1.0) / 2.0
        total += float(np.sum(w * (hi - lo) / 2.0 * (h - np.abs(u - h)) / (x + u)))
    return total


def _closed_forms(i, x, b):
    """S_n(e_i; x), i <= 4, written out explicitly."""
    return (
        1.0,
        x,
        (b * x**2 + x) / b,
        (b**2 * x**3 + 3 * b * x**2 + x) / b**2,
        (b**3 * x**4 + 6 * b**2 * x**3 + 7 * b * x**2 + x) / b**3,
    )[i]


def _central_closed_forms(m, x, b):
    return (1, 0, x / b, x / b**2, 3 * x**2 / b**2 + x / b**3)[m]


def _check(rows, check, b, x, order, expected, measured, rtol, atol=0.0):
    err = abs(measured - expected)
    passed = bool(err <= max(atol, rtol * abs(expected)))
    rows.append({"check": check, "b": b, "x": x, "order": order, "expected": float(expected),
                 "measured": float(measured), "abs_error": float(err), "passed": passed})


def run_moment_audit(spec):
    """Cross-check the moment table against the truncated series, the
    coefficient identities, and the weight bounds used for global estimates."""
    cfg = spec.eval
    table = build_table(20)
    rows = []
    for b in spec.b_values:
        for x in spec.x_values:
            for i in range(5):
                measured = evaluate(monomial(i), b, x, cfg)
                _check(rows, "test_function", b, x, i, _closed_forms(i, x, b), measured, 1e-10)
            for r in range(1, 9):
                measured = evaluate(monomial(r), b, x, cfg)
                _check(rows, "raw_moment", b, x, r, raw_moment(table, r, x, b), measured, 1e-9)
            for m in range(5):
                exact = central_moment(table, m, x, b, exact=True)
                closed = _central_closed_forms(m, Fraction(x), Fraction(b))
                _check(rows, "central_exact", b, x, m, float(closed), float(exact), 0.0)
                rows[-1]["passed"] = exact == closed
                shifted = custom(lambda t, m=m, x=x: (t - x) ** m, growth_gamma=float(m),
                                 bound=max(1.0, x) ** m)
                measured = evaluate(shifted, b, x, cfg)
                _check(rows, "central_series", b, x, m, float(exact), measured, 1e-9,
                       atol=1e-9 * max(1.0, x) ** m)

    for N in range(2, table.r_max - 1):
        ok = coefficient_identity_check(table, N)
        rows.append({"check": "coefficient_identity", "order": N, "expected": 1.0,
                     "measured": float(table.a[N + 2][N + 1] - 2 * table.a[N + 1][N] + table.a[N][N - 1]),
                     "abs_error": 0.0 if ok else 1.0, "passed": ok})
    for r in range(1, table.r_max):
        ok = table.a[r + 1][r] == r * (r + 1) // 2
        rows.append({"check": "subdiagonal_closed_form", "order": r, "expected": float(r * (r + 1) // 2),
                     "measured": float(table.a[r + 1][r]), "abs_error": 0.0 if ok else 1.0, "passed": ok})

    summary = {"weight_bounds": _weight_bounds(spec, table, rows)}
    summary["integral_inequality"] = _integral_inequality(rows)
    summary["failed"] = sum(1 for r in rows if not r["passed"])
    return new_report(spec, rows, summary)


def _weight_bounds(spec, table, rows):
    """Fitted constants for w_N S_n(1/w_N) <= M and w_N S_n((t-x)^2/w_N) <= M x/b."""
    cfg = spec.eval
    fitted = {}
    for N in range(4):
        space = WeightedSpace(N=N)
        inv_w = custom(lambda t, N=N: 1.0 + t**N if N else np.ones_like(t), growth_gamma=float(N), bound=2.0)
        m1, m2 = 0.0, 0.0
        for b in spec.b_values:
            for x in spec.x_values:
                w = float(space.weight(x))
                value = w * evaluate(inv_w, b, x, cfg)
                exact = w * (1.0 + raw_moment(table, N, x, b)) if N else 1.0
                _check(rows, f"weight_bound_N{N}", b, x, N, exact, value, 1e-10)
                m1 = max(m1, value)
                if x > 0:
                    sq = custom(lambda t, N=N, x=x: (t - x) ** 2 * (1.0 + t**N if N else 1.0),
                                growth_gamma=float(N + 2), bound=2.0 * (1.0 + x) ** 2)
                    ratio = w * evaluate(sq, b, x, cfg) / (x / b)
                    m2 = max(m2, ratio)
                    if N == 1:
                        _check(rows, "second_moment_bound_N1", b, x, 1, 1.0 + 1.0 / (b * (1.0 + x)),
                               ratio, 1e-9)
                        rows[-1]["passed"] = rows[-1]["passed"] and ratio <= 2.0
        fitted[f"N{N}"] = {"M_hat_weight": m1, "M_hat_second_moment": m2}
    return fitted


def _integral_inequality(rows):
    worst = 0.0
    for h in (1.0, 0.5, 0.1, 0.01):
        for x in np.linspace(0.0, 10.0, 41):
            lhs = inverse_distance_integral(float(x), h)
            rhs = 6 * h**2 / (x + 2 * h)
            ok = lhs <= rhs
            worst = max(worst, lhs / rhs)
            rows.append({"check": "inverse_distance_integral", "b": None, "x": float(x), "order": h,
                         "expected": float(rhs), "measured": lhs, "abs_error": max(0.0, lhs - rhs),
                         "passed": bool(ok)})
    return {"max_lhs_over_rhs": float(worst)}


RUNNERS = {
    "converge": run_converge,
    "voronovskaja": run_voronovskaja,
    "direct_bound": run_direct_bound,
    "alpha_inverse": run_alpha_inverse,
    "figures": run_figures,
    "moment_audit": run_moment_audit,
}


def run(spec):
    return RUNNERS[spec.study](spec)


__all__ = [
    "EvalConfig",
    "run",
    "run_converge",
    "run_voronovskaja",
    "run_direct_bound",
    "run_alpha_inverse",
    "run_figures",
    "run_moment_audit",
    "inverse_distance_integral",
    "sup_weighted_error",
]
