"""Command-line experiment runner.

Each subcommand runs one experiment, writes CSV files into ``--out`` and
exits 0 when every invariant holds, 1 when one fails and 2 on a bad config.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import orthopoly as op
from .errors import ConfigError, SpecDecayError
from .expansion import (
    CoefficientSequence,
    OperatorPowerNorms,
    analyze,
    carleman_partial_sums,
    gram_matrix,
    hermite_line,
    jacobi_compact,
    laguerre_function_gram,
    laguerre_radial,
    operator_norms,
    parseval_norm,
)
from .quadrature import CompactJacobi, RadialLaguerre, gauss_rule
from . import ingham, kernels, spaces, uncertainty

THREADS_ENV = "SPECDECAY_THREADS"

THETAS = {
    "inverse_sqrt": uncertainty.DecayProfile.inverse_sqrt,
    "inverse_log": uncertainty.DecayProfile.inverse_log,
    "constant": uncertainty.DecayProfile.constant,
}

SCHEMAS: dict[str, dict[str, object]] = {
    "orthocheck": {"K": 128, "M": 64, "norming_K": 64, "n_max": 3, "tol": 1e-8, "norming_tol": 1e-10},
    "parseval": {"K": 96, "M": 48, "tol": 1e-10},
    "chernoff-demo": {"M": 60, "tail_from": 40, "tail_tol": 1e-6},
    "moments": {"trials": 100, "K": 40, "m_max": 20, "j": 2, "theta": "inverse_sqrt",
                "space": "Sphere(2)", "m_min": 5, "m_top": 20},
    "spaces-verify": {"N": 256},
    "kernel-bounds": {"n": 2, "k_max": 10, "pairs": 50, "oracle_tol": 1e-8, "trace_tol": 1e-6,
                      "envelope_k_max": 60, "diagonal_k_max": 40, "grid_points": 2501},
    "ingham-build": {"N": 12, "theta": "inverse_sqrt", "xi_max": 64.0, "xi_points": 257,
                     "fourier_tol": 1e-6, "c0_min": 0.1},
    "jacobi-transfer": {"N": 12, "theta": "inverse_sqrt", "space": "Sphere(2)", "M": 256,
                        "check_M": 128, "s_points": 2049, "outside_tol": 1e-4, "roundtrip_tol": 1e-6},
    "splhermite-decay": {"n": 1, "K": 128, "z_support": 0.1, "t_half_width": 1.0, "bump_power": 4,
                         "agree_tol": 1e-6},
    "hermite-transfer": {"K": 30, "support": 0.25, "bump_power": 4, "angles": 128, "tol": 1e-6,
                         "odd_n": 2, "odd_K": 10},
    "fourier-decay": {"K": 400, "psi_power": 0.75, "xi_max": 12.0, "grid_points": 512,
                      "calibration_points": 4096, "margin": 1.01},
}

CSV_HELP = {
    "orthocheck": "gram.csv: family,parameter,K,max_offdiag,max_diag_err; norming.csv: n,k,computed,expected,rel_err",
    "parseval": "parseval.csv: basis,K,parseval,direct,rel_err",
    "chernoff-demo": "carleman.csv: case,m,term,partial_sum",
    "moments": "moments.csv: trial,log_convex,cs_violations; growth.csv: m,log2_a,log2_bound,carleman_partial",
    "spaces-verify": "catalog.csv: name,d,m,rho,alpha,beta,parity; identity.csv: name,N,max_defect,max_jacobi_defect,sandwich,increasing",
    "kernel-bounds": "oracle.csv: k,x1,x2,y1,y2,kernel,brute,rel_err; envelope.csv: delta,k,C,violations; diagonal.csv: n,C,gamma,points,violations",
    "ingham-build": "profile.csv: x,f; decay.csv: xi,log_abs_fhat,envelope; fourier.csv: xi,closed,grid,abs_err",
    "jacobi-transfer": "transfer.csv: m,htilde,certificate; synthesis.csv: s,h",
    "splhermite-decay": "splhermite.csv: k,R,norm,norm_expansion,envelope",
    "hermite-transfer": "even.csv: level,formula,oracle,rel_err; odd.csv: k,slice_norm,full_norm",
    "fourier-decay": "fourier_decay.csv: xi,abs_fhat,bound,head,tail",
}


# ---------------------------------------------------------------------------
# config

@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def canonical(self) -> str:
        return "".join(f"{k} = {_fmt(self.values[k])}\n" for k in sorted(self.values))


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _coerce(raw: str, default, line: int, column: int):
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError
            return raw.lower() == "true"
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot read {raw!r} as {type(default).__name__}", line, column) from None
    return raw


def parse_config(text: str, experiment: str) -> ExperimentConfig:
    """Parse flat ``key = value`` text against the experiment's schema."""
    schema = SCHEMAS[experiment]
    values = dict(schema)
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ConfigError("expected 'key = value'", lineno, col)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not key:
            raise ConfigError("missing key", lineno, key_col)
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for {experiment}", lineno, key_col)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", lineno, key_col)
        raw = value_part.strip()
        value_col = len(key_part) + 2 + len(value_part) - len(value_part.lstrip())
        if not raw:
            raise ConfigError(f"missing value for {key!r}", lineno, value_col)
        values[key] = _coerce(raw, schema[key], lineno, value_col)
        seen.add(key)
    return ExperimentConfig(experiment, values)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive")
    return n


# ---------------------------------------------------------------------------
# output

class Run:
    """Collects named invariants and writes CSV files."""

    def __init__(self, out: Path, seed: int, quiet: bool, threads: int):
        self.out = out
        self.seed = seed
        self.quiet = quiet
        self.threads = threads
        self.results: list[tuple[str, bool, str]] = []

    def check(self, name: str, ok: bool, detail: str = ""):
        ok = bool(ok)
        self.results.append((name, ok, detail))
        if not self.quiet:
            print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))

    def write(self, filename: str, header, rows):
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / filename, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])

    @property
    def failures(self):
        return [r for r in self.results if not r[1]]


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_, bool)):
        return int(bool(v))
    return v


def _theta(name: str) -> uncertainty.DecayProfile:
    if name not in THETAS:
        raise SpecDecayError(f"unknown theta family {name!r}")
    return THETAS[name]()


# ---------------------------------------------------------------------------
# experiments

def _orthocheck(cfg, run: Run):
    K, M, tol = cfg["K"], cfg["M"], cfg["tol"]
    rows = []

    def record(family, param, G):
        off = float(np.max(np.abs(G - np.diag(np.diag(G)))))
        diag = float(np.max(np.abs(np.diag(G) - 1.0)))
        rows.append((family, param, G.shape[0] - 1, off, diag))
        run.check(f"gram[{family}:{param}]", off <= tol and diag <= tol, f"off={off:.2e} diag={diag:.2e}")

    record("hermite", "", gram_matrix(hermite_line(K)))
    for delta in (0.0, 0.5, 1.0):
        record("laguerre_function", repr(delta), laguerre_function_gram(delta, K))
    for n in range(1, cfg["n_max"] + 1):
        record("laguerre_psi", str(n), gram_matrix(laguerre_radial(n, K)))
    for entry in spaces.standard_entries():
        record("jacobi", entry.name, gram_matrix(entry.basis(M // entry.step)))
    run.write("gram.csv", ["family", "parameter", "K", "max_offdiag", "max_diag_err"], rows)

    nrows = []
    worst = 0.0
    Kn = cfg["norming_K"]
    for n in range(1, cfg["n_max"] + 1):
        rule = gauss_rule(RadialLaguerre(n), 2 * Kn + 16)
        T = op.laguerre_psi_table(rule.nodes, Kn, n)
        computed = (T * T) @ rule.transformed_weights
        for k in range(Kn + 1):
            expected = 2.0 ** (n - 1) * math.factorial(n - 1) * op.binomial_ratio(k, n)
            rel = abs(computed[k] - expected) / expected
            worst = max(worst, rel)
            nrows.append((n, k, float(computed[k]), expected, rel))
    run.write("norming.csv", ["n", "k", "computed", "expected", "rel_err"], nrows)
    run.check("psi_norming", worst <= cfg["norming_tol"], f"max rel {worst:.2e}")


def _parseval(cfg, run: Run):
    K, M, tol = cfg["K"], cfg["M"], cfg["tol"]
    rows = []
    # Hermite line: exp(-x^2/4), squared norm sqrt(2 pi)
    seq = analyze(lambda x: np.exp(-0.25 * x * x), hermite_line(K))
    rows.append(("hermite", K, parseval_norm(seq), math.sqrt(math.sqrt(2 * math.pi))))
    # radial: exp(-r^2/8), squared norm int exp(-r^2/4) r^(2n-1) dr = 2^(2n-1) (n-1)!
    for n in (1, 2, 3):
        seq = analyze(lambda r: np.exp(-0.125 * r * r), laguerre_radial(n, K))
        rows.append((f"laguerre_psi(n={n})", K, parseval_norm(seq),
                     math.sqrt(2.0 ** (2 * n - 1) * math.factorial(n - 1))))
    # Jacobi: a polynomial in cos s, whose norm is taken by a separate Gauss rule
    for entry in spaces.standard_entries():
        a, b = float(entry.alpha), float(entry.beta)
        f = lambda s: (1.0 + np.cos(s)) ** 3 + 0.5 * np.cos(2 * s)
        basis = jacobi_compact(a, b, M)
        seq = analyze(f, basis)
        rule = gauss_rule(CompactJacobi(a, b), 3 * M + 7)
        direct = math.sqrt(math.fsum(rule.weights * f(rule.nodes) ** 2))
        rows.append((f"jacobi({entry.name})", M, parseval_norm(seq), direct))
    out = []
    for name, k, p, d in rows:
        rel = abs(p - d) / d
        out.append((name, k, p, d, rel))
        run.check(f"parseval[{name}]", rel <= tol, f"rel {rel:.2e}")
    run.write("parseval.csv", ["basis", "K", "parseval", "direct", "rel_err"], out)


def _chernoff(cfg, run: Run):
    M = cfg["M"]
    seq = CoefficientSequence(hermite_line(8), np.array([1.0]))
    gauss = carleman_partial_sums(operator_norms(seq, M))
    m = np.arange(1, M + 1)
    run.check("gaussian_partial_sums_equal_M", np.array_equal(gauss.partial_sums, m.astype(float)))
    fast = carleman_partial_sums(OperatorPowerNorms.from_log(np.arange(M + 1, dtype=float) ** 2))
    tail = float(fast.partial_sums[-1] - fast.partial_sums[cfg["tail_from"] - 1])
    # geometric remainder beyond M: sum_{m > M} e^{-m/2}
    tail += math.exp(-(M + 1) / 2) / (1 - math.exp(-0.5))
    run.check("fast_growth_converges", tail < cfg["tail_tol"], f"tail {tail:.2e}")
    rows = [("gaussian", i + 1, float(gauss.terms[i]), float(gauss.partial_sums[i])) for i in range(M)]
    rows += [("exp_m_squared", i + 1, float(fast.terms[i]), float(fast.partial_sums[i])) for i in range(M)]
    run.write("carleman.csv", ["case", "m", "term", "partial_sum"], rows)


def _moments(cfg, run: Run):
    rng = np.random.default_rng(run.seed)
    K, m_max, j = cfg["K"], cfg["m_max"], cfg["j"]
    basis = laguerre_radial(1, K)
    draws = [(rng.uniform(0.2, 3.0), rng.standard_normal(K + 1)) for _ in range(cfg["trials"])]

    def trial(args):
        rate, signs = args
        coeffs = signs * np.exp(-rate * np.arange(K + 1))
        seq = CoefficientSequence(basis, coeffs)
        ms = uncertainty.moments(seq, m_max)
        bad = sum(not uncertainty.moment_cs_bound(seq, m, j).holds for m in range(1, m_max + 1))
        return ms.is_log_convex(), bad

    with ThreadPoolExecutor(max_workers=run.threads) as pool:
        results = list(pool.map(trial, draws))
    rows = [(i, lc, bad) for i, (lc, bad) in enumerate(results)]
    run.write("moments.csv", ["trial", "log_convex", "cs_violations"], rows)
    run.check("moments_log_convex", all(r[1] for r in rows))
    run.check("cauchy_schwarz_chain", sum(r[2] for r in rows) == 0)

    entry = spaces.catalog(cfg["space"])
    rep = uncertainty.growth_bound_check(_theta(cfg["theta"]), float(entry.rho), entry.growth_exponent,
                                         range(cfg["m_min"], cfg["m_top"] + 1))
    run.write("growth.csv", ["m", "log2_a", "log2_bound", "carleman_partial"], rep.rows())
    run.check("growth_sequence_bound", rep.holds, f"C={rep.C:.4g}")


def _spaces(cfg, run: Run):
    N = cfg["N"]
    (run.out).mkdir(parents=True, exist_ok=True)
    (run.out / "catalog.csv").write_text(spaces.catalog_csv())
    rows = []
    for entry in spaces.standard_entries():
        rep = spaces.verify_rho_identity(entry, N, strict=False)
        rows.append((entry.name, N, str(rep.max_defect), str(rep.max_jacobi_defect),
                     rep.sandwich_ok, rep.increasing))
        run.check(f"rho_identity[{entry.name}]", rep.ok)
    run.write("identity.csv", ["name", "N", "max_defect", "max_jacobi_defect", "sandwich", "increasing"], rows)


def _kernel(cfg, run: Run):
    rng = np.random.default_rng(run.seed)
    n = cfg["n"]
    if n != 2:
        raise SpecDecayError("the brute-force oracle is implemented for n = 2")
    rows = []
    worst = 0.0
    for k in range(cfg["k_max"] + 1):
        X = 1.5 * rng.standard_normal((cfg["pairs"], 2))
        Y = 1.5 * rng.standard_normal((cfg["pairs"], 2))
        H = [op.hermite_table(v, k) for v in (X[:, 0], X[:, 1], Y[:, 0], Y[:, 1])]
        brute = sum(H[0][a] * H[1][k - a] * H[2][a] * H[3][k - a] for a in range(k + 1))
        val = kernels.phi_kernel_radial(2, k, np.linalg.norm(X + Y, axis=1), np.linalg.norm(X - Y, axis=1))
        rel = np.abs(val - brute) / np.abs(brute)
        worst = max(worst, float(rel.max()))
        rows += [(k, *X[i], *Y[i], val[i], brute[i], rel[i]) for i in range(X.shape[0])]
    run.write("oracle.csv", ["k", "x1", "x2", "y1", "y2", "kernel", "brute", "rel_err"], rows)
    run.check("kernel_oracle", worst <= cfg["oracle_tol"], f"max rel {worst:.2e}")
    tr = max(abs(kernels.kernel_trace(2, k) / (k + 1) - 1) for k in range(cfg["k_max"] + 1))
    run.check("kernel_trace", tr <= cfg["trace_tol"], f"max rel {tr:.2e}")

    grid = np.concatenate([np.geomspace(3e-5, 2.0, cfg["grid_points"] // 7),
                           np.geomspace(2.0, 3000.0, cfg["grid_points"])[1:]])
    erows = []
    total = 0
    for delta in (0.0, 0.5, 1.0):
        v, detail = kernels.envelope_check((delta,), cfg["envelope_k_max"], grid)
        total += v
        per_k = {}
        for d, k, _, L, b in detail:
            per_k[k] = per_k.get(k, 0) + int(np.sum(L > b + 1e-12))
        erows += [(delta, k, kernels.envelope_constant(delta), per_k[k]) for k in sorted(per_k)]
    run.write("envelope.csv", ["delta", "k", "C", "violations"], erows)
    run.check("laguerre_envelope", total == 0, f"{total} violations, gamma={kernels.ENVELOPE_GAMMA}")

    radii = np.sqrt(np.geomspace(0.5, 4.0 * (2 * cfg["diagonal_k_max"] + n) + 4.0, cfg["grid_points"]))
    rep = kernels.diagonal_bound_check(n, range(cfg["diagonal_k_max"] + 1), radii)
    run.write("diagonal.csv", ["n", "C", "gamma", "points", "violations"],
              [(n, rep.C, rep.gamma, rep.points, rep.violations)])
    run.check("diagonal_bound", rep.violations == 0 and not rep.vacuous and rep.gamma > 0,
              f"{rep.points} points")


def _ingham_build(cfg, run: Run):
    f = ingham.ingham_product(_theta(cfg["theta"]), cfg["N"])
    x, fx = f.samples()
    outside = np.abs(x) > f.support_radius
    run.check("zero_outside_support", np.all(fx[outside] == 0.0), f"A={f.support_radius!r}")
    run.write("profile.csv", ["x", "f"], zip(x, fx))
    xi = np.linspace(0.0, cfg["xi_max"], cfg["xi_points"])
    closed = f.fourier(xi)
    grid = f.grid_fourier(xi)
    err = np.abs(closed - grid)
    run.write("fourier.csv", ["xi", "closed", "grid", "abs_err"], zip(xi, closed, grid, err))
    run.check("closed_product_vs_grid", float(err.max()) <= cfg["fourier_tol"], f"max {err.max():.2e}")
    env = ingham.verify_ingham_decay(f)
    run.write("decay.csv", ["xi", "log_abs_fhat", "envelope"], env.rows())
    run.check("fitted_envelope", env.c0 >= cfg["c0_min"] and env.c1 > 0, f"c0={env.c0:.4f} c1={env.c1:.4g}")


def _jacobi_transfer(cfg, run: Run):
    entry = spaces.catalog(cfg["space"])
    f = ingham.ingham_product(_theta(cfg["theta"]), cfg["N"])
    seq = ingham.jacobi_transfer(f, float(entry.alpha), float(entry.beta), cfg["M"])
    bound = seq.C * seq.certificate()
    run.check("transfer_certificate", np.all(np.abs(seq.coeffs) <= bound * (1 + 1e-12)), f"C={seq.C:.4g}")
    run.write("transfer.csv", ["m", "htilde", "certificate"], seq.rows())
    s = np.linspace(0.0, math.pi, cfg["s_points"])
    syn = ingham.jacobi_synthesize(seq, s)
    run.write("synthesis.csv", ["s", "h"], zip(s, syn.values))
    run.check("outside_support_window", syn.outside_relative <= cfg["outside_tol"],
              f"rel {syn.outside_relative:.2e}")
    back = ingham.jacobi_coefficients(ingham.jacobi_series(seq), seq.alpha, seq.beta, seq.M)
    mc = cfg["check_M"]
    rel = float(np.max(np.abs(back[: mc + 1] - seq.coeffs[: mc + 1])) / np.max(np.abs(seq.coeffs)))
    run.check("reanalysis_round_trip", rel <= cfg["roundtrip_tol"], f"rel {rel:.2e}")


def _splhermite(cfg, run: Run):
    bz = ingham.smooth_bump(cfg["z_support"], cfg["bump_power"])
    bt = ingham.smooth_bump(cfg["t_half_width"], cfg["bump_power"])
    T = cfg["t_half_width"]
    g = ingham.periodize_t(lambda r, t: bz(r) * bt(t), cfg["z_support"], (-T, T))
    n, K = cfg["n"], cfg["K"]
    rep = ingham.splhermite_decay_report(g, n, K)
    alt = ingham.splhermite_norms_via_expansion(g, n, K)
    rel = float(np.max(np.abs(alt - rep.norms)) / np.max(rep.norms))
    t = np.sqrt(2.0 * rep.k + n)
    s = t * rep.c0 / np.sqrt(1.0 + rep.c1 * t)
    p = rep.anchor
    env = rep.norms[p] * np.exp(-(s - s[p]))
    run.write("splhermite.csv", ["k", "R", "norm", "norm_expansion", "envelope"],
              zip(rep.k, np.real(rep.R), rep.norms, alt, env))
    run.check("independent_path_agreement", rel <= cfg["agree_tol"], f"rel {rel:.2e}")
    run.check("positive_floor", rep.floor > 0 and not rep.degenerate, f"a={rep.floor:.4g}")


def _hermite_transfer(cfg, run: Run):
    K, support = cfg["K"], cfg["support"]
    g = ingham.RadialProfile(ingham.smooth_bump(support, cfg["bump_power"]), support)
    even = ingham.hermite_even_transfer(g, 1, K)
    oracle = ingham.tensor_hermite_level_norms(lambda r: g(math.sqrt(2.0) * r), support / math.sqrt(2.0),
                                               2 * K, angles=cfg["angles"])
    ev = even.norms_sq[0::2]
    rel = np.abs(oracle[0::2] - ev) / np.abs(ev)
    rows = [(j, even.norms_sq[j], oracle[j], rel[j // 2] if j % 2 == 0 else 0.0) for j in range(2 * K + 1)]
    run.write("even.csv", ["level", "formula", "oracle", "rel_err"], rows)
    run.check("even_transfer_vs_tensor_oracle", float(rel.max()) <= cfg["tol"], f"max rel {rel.max():.2e}")
    run.check("odd_levels_zero", np.all(even.norms_sq[1::2] == 0.0))

    rng = np.random.default_rng(run.seed)
    shape = (cfg["odd_K"] + 1,) * (cfg["odd_n"] + 1)
    odd = ingham.hermite_odd_transfer(rng.standard_normal(shape))
    run.write("odd.csv", ["k", "slice_norm", "full_norm"],
              zip(range(odd.slice_norms.size), odd.slice_norms, odd.full_norms))
    run.check("odd_transfer_domination", odd.dominated)


def _fourier_decay(cfg, run: Run):
    p = cfg["psi_power"]
    psi = lambda t: np.asarray(t, dtype=float) ** p
    seq = kernels.prescribed_hermite_sequence(psi, cfg["K"])
    xi = np.linspace(-cfg["xi_max"], cfg["xi_max"], cfg["grid_points"])
    cal = np.linspace(-cfg["xi_max"], cfg["xi_max"], cfg["calibration_points"])
    rep = kernels.hermite_fourier_decay(seq, psi, xi, cal, cfg["margin"])
    run.write("fourier_decay.csv", ["xi", "abs_fhat", "bound", "head", "tail"],
              zip(rep.xi, rep.fhat_abs, rep.C * rep.envelope, rep.head, rep.tail))
    run.check("fourier_decay_bound", rep.violations == 0, f"C={rep.C:.4g}, {xi.size} points")


EXPERIMENTS = {
    "orthocheck": _orthocheck,
    "parseval": _parseval,
    "chernoff-demo": _chernoff,
    "moments": _moments,
    "spaces-verify": _spaces,
    "kernel-bounds": _kernel,
    "ingham-build": _ingham_build,
    "jacobi-transfer": _jacobi_transfer,
    "splhermite-decay": _splhermite,
    "hermite-transfer": _hermite_transfer,
    "fourier-decay": _fourier_decay,
}


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specdecay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        keys = ", ".join(f"{k}={_fmt(v)}" for k, v in SCHEMAS[name].items())
        p = sub.add_parser(name, help=CSV_HELP[name],
                           description=f"CSV output: {CSV_HELP[name]}. Config keys: {keys}.")
        p.add_argument("--config", type=Path, help="flat 'key = value' file")
        p.add_argument("--out", type=Path, default=Path("specdecay-out"), help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
        p.add_argument("--quiet", action="store_true", help="only report failures")
        p.add_argument("--dump-config", action="store_true", help="print the canonical config and exit")
    return parser


def run(command: str, config: ExperimentConfig, out: Path, seed: int = 0, quiet: bool = False) -> int:
    """Run one experiment and return its exit code."""
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    r = Run(Path(out), seed, quiet, _threads())
    r.out.mkdir(parents=True, exist_ok=True)
    (r.out / "config.txt").write_text(config.canonical())
    EXPERIMENTS[command](config, r)
    for name, _, detail in r.failures:
        print(f"invariant violated: {name}" + (f" ({detail})" if detail else ""), file=sys.stderr)
    return 1 if r.failures else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config else ""
        cfg = parse_config(text, args.command)
        if args.dump_config:
            sys.stdout.write(cfg.canonical())
            return 0
        return run(args.command, cfg, args.out, args.seed, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpecDecayError as exc:
        print(f"invariant violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
