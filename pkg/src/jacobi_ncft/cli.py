"""Command-line front end: ``jacobi-ncft <command> [options]``.

Every command prints one JSON object (or a CSV table) on stdout.  Exit code
0 means all reported residuals are within ``--tol``, 1 means an invariant
failed, 2 means the configuration was rejected.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import re
import sys
from fractions import Fraction
from importlib import resources

import numpy as np

from . import jacobi_core as jc
from . import ncft_gauge as ng
from . import orthopoly as op
from . import spectral_measure as sm
from . import spectral_triple as st

TOL_ENV = "JACOBI_NCFT_TOL"
DEFAULT_TOL = 1e-8
COMMANDS = ("spectrum", "eigvecs", "propagator", "measure", "vacuum", "tadpole",
            "triple-check", "verify-all")

# formula anchors attached to outputs
REFS = {
    "spectrum": "lambda_k = 2 mu^2 (1 - cos((k+1) pi/(N+1))), k = 0..N-1",
    "zeros": "spec(J^N) = zeros of P_N",
    "eigvec": "v_p = sqrt(2/(N+1)) sin((p+1)(m+1) pi/(N+1)) = f U_p((2+lambda)/2)",
    "embedding": "||G (v, 0) - lambda (v, 0)|| = mu^2 |v_{N-1}|",
    "propagator": "P_ml = (1/(pi mu^2)) int sqrt((1+x)/(1-x)) U_m U_l dx = (min(m,l)+1)/mu^2",
    "propagator_identity": "sum_l G_ml P_lr = delta_mr",
    "christoffel_darboux": "(t-z) sum_k P_k(t) P_k(z) = a_n (P_{n+1}(t) P_n(z) - P_n(t) P_{n+1}(z))",
    "favard": "int t P_m P_l dmu = J_ml, J = -G/mu^2",
    "gauss": "nodes = spec(J^K), weights = (first eigenvector component)^2",
    "perron": "mu([a,b]) = lim (1/pi) int_a^b Im w(t + i nu) dt",
    "stieltjes": "w(z) = int dmu(x)/(x-z) = -sum s_n / z^(n+1)",
    "vacuum": "a_m ((3W-1)(a_{m+1}^2 + a_{m-1}^2) + 2(1+W) a_m^2 + 2 kappa) = 0",
    "kinetic": "G_mn;kl at W = 1/3: -kappa (2 d_ml d_nk - d_k,n+1 d_m,l+1 - d_n,k+1 d_l,m+1)",
    "tadpole": "c_N(k) = sum_{l<N} (2 P_ll - P_l,l+1) + P_kk + P_k+1,k+1 - P_k,k+1 = (N(N+1)/2 + k + 2)/mu^2",
    "sigma": "sigma = i (2/3) sqrt(3 mu^2)",
    "dirac": "D = sum sqrt(lambda_k) |v_k><v_k|, D^2 = G^N",
    "ko": "J^2 = -1, JD = DJ, J Gamma = -Gamma J, Gamma^2 = 1, D Gamma = -Gamma D",
    "commutant": "[D, |v_k><v_k|] = 0 with |v_k><v_k| non-scalar",
    "hs": "||[D,a]|| <= ||[D,a]||_2 <= 2 ||D|| ||a||_2, ||a R(z)||_2 <= ||a||_2 ||R(z)||",
}


class ConfigError(ValueError):
    pass


def schema_path():
    return resources.files("jacobi_ncft") / "schema" / "output.schema.json"


def load_schema() -> dict:
    return json.loads(schema_path().read_text())


def _number(text: str):
    """Rationals like ``1/3`` stay exact, everything else is a float."""
    try:
        if "/" in text:
            return Fraction(text)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{TOL_ENV}={raw!r} is not a number")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mu-sq", type=_number, default=1.0, help="mass scale mu^2 = -kappa")
    common.add_argument("--omega-sq", type=_number, default=Fraction(1, 3))
    common.add_argument("--kappa", type=_number, default=None,
                        help="vacuum kappa (defaults to -mu^2)")
    common.add_argument("--alpha", type=_number, default=0.0)
    common.add_argument("--N", type=int, default=8, help="truncation size / cutoff")
    common.add_argument("--K", type=int, default=None, help="quadrature nodes")
    common.add_argument("--tol", type=float, default=None,
                        help=f"residual tolerance (default ${TOL_ENV} or {DEFAULT_TOL})")
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--m", type=int, default=0)
    common.add_argument("--l", type=int, default=0)
    common.add_argument("--k", type=int, default=0)
    common.add_argument("--family", choices=("chebyshev-u", "kinetic"), default="kinetic")
    common.add_argument("--nu", type=float, default=1e-4, help="Perron regularization")
    common.add_argument("--interval", type=float, nargs=2, default=None, metavar=("A", "B"))

    parser = argparse.ArgumentParser(prog="jacobi-ncft", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _validate(ns) -> None:
    if ns.tol is None:
        ns.tol = _default_tol()
    if not ns.tol > 0:
        raise ConfigError(f"tol must be > 0, got {ns.tol}")
    if ns.N < 1:
        raise ConfigError(f"N must be >= 1, got {ns.N}")
    if not ns.mu_sq > 0:
        raise ConfigError(f"mu^2 must be > 0, got {ns.mu_sq}")
    if ns.K is not None and ns.K < 1:
        raise ConfigError(f"K must be >= 1, got {ns.K}")
    if ns.seed < 0:
        raise ConfigError("seed must be >= 0")
    if min(ns.m, ns.l, ns.k) < 0:
        raise ConfigError("indices --m, --l, --k must be >= 0")
    if not ns.nu > 0:
        raise ConfigError("nu must be > 0")


def _plain(x):
    """JSON-ready copy: arrays to lists, Fractions to floats, complex to {re, im}."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, complex):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (float, Fraction, np.floating)):
        return float(x)
    return x


class Job:
    """Collects results, residuals (with tolerances) and formula anchors."""

    def __init__(self, command: str, params: dict, tol: float):
        self.command = command
        self.params = params
        self.tol = tol
        self.results: dict = {}
        self.residuals: dict = {}
        self.limits: dict = {}
        self.refs: dict = {}
        self.table: list = []

    def check(self, name: str, value: float, ref: str, limit: float | None = None):
        self.residuals[name] = float(value)
        self.limits[name] = self.tol if limit is None else limit
        self.refs[name] = REFS[ref]

    def failures(self) -> list:
        return [n for n, v in self.residuals.items() if not v <= self.limits[n]]

    def document(self) -> dict:
        return {
            "command": self.command,
            "params": _plain(self.params),
            "results": _plain(self.results),
            "residuals": _plain(self.residuals),
            "paper_refs": dict(self.refs),
        }


# ---------------------------------------------------------------- commands

def _spectrum(job: Job, ns):
    N, mu = ns.N, float(ns.mu_sq)
    closed = ng.spectrum_closed_form(mu, N)
    sturm = op.eigenvalues(ng.kinetic_reduced(mu, N).truncation)
    job.results["eigenvalues"] = closed
    job.results["sturm"] = sturm
    job.check("sturm_vs_closed_form", np.max(np.abs(sturm - closed)), "spectrum")
    job.table = [{"k": k, "closed_form": closed[k], "sturm": sturm[k]} for k in range(N)]


def _eigvecs(job: Job, ns):
    N, mu = ns.N, float(ns.mu_sq)
    V = ng.eigenvector_matrix(N)
    lam = ng.spectrum_closed_form(mu, N)
    job.results["eigenvalues"] = lam
    job.results["vectors"] = V.T
    res = max(ng.eigen_residual(N, m, mu) for m in range(N))
    job.check("eigen_residual_over_mu_sq", res / mu, "eigvec")
    job.check("gram_deviation", np.linalg.norm(V.T @ V - np.eye(N)), "eigvec")
    emb = max(abs(ng.embedding_residual(N, m, mu) - mu * abs(V[N - 1, m])) for m in range(N))
    job.check("embedding_vs_formula", emb, "embedding")
    job.results["embedding_residuals"] = [ng.embedding_residual(N, m, mu) for m in range(N)]
    job.table = [{"m": m, "lambda": lam[m], **{f"v{p}": V[p, m] for p in range(N)}}
                 for m in range(N)]


def _propagator(job: Job, ns):
    mu, m, l = float(ns.mu_sq), ns.m, ns.l
    K = ng.PROPAGATOR_K if ns.K is None else ns.K
    P = ng.propagator_entry(mu, m, l, K)
    exact = ng.closed_form_propagator(mu, m, l)
    job.results["P"] = P
    job.results["closed_form"] = exact
    job.check("relative_error", abs(P - exact) / abs(exact), "propagator")
    job.table = [{"m": m, "l": l, "P": P, "closed_form": exact}]


def _family(name: str):
    if name == "chebyshev-u":
        return jc.chebyshev_u_coefficients(), sm.chebyshev_u_measure()
    return jc.shifted_chebyshev_coefficients(), sm.kinetic_measure()


def _measure(job: Job, ns):
    coeffs, meas = _family(ns.family)
    K = 16 if ns.K is None else ns.K
    rule = sm.gauss_rule(coeffs, K)
    fam = op.RecurrencePolynomials(coeffs)
    n_mom = min(2 * K - 1, 12)
    job.results["nodes"] = rule.nodes
    job.results["weights"] = rule.weights
    job.results["moments"] = [sm.moments(meas, rule, n) for n in range(n_mom + 1)]
    job.check("total_mass", abs(rule.weights.sum() - 1.0), "gauss")
    a, b = coeffs.arrays(K)
    worst = 0.0
    for m in range(K - 1):
        worst = max(worst, abs(sm.matrix_element(coeffs, fam, meas, rule, m, m, "t") - b[m]),
                    abs(sm.matrix_element(coeffs, fam, meas, rule, m, m + 1, "t") - a[m]))
    job.check("favard_round_trip", worst, "favard")
    lo, hi = meas.support
    A, B = (lo, hi) if ns.interval is None else ns.interval
    if not A < B:
        raise ConfigError("interval needs A < B")
    job.results["perron"] = {"interval": [A, B], "nu": ns.nu,
                             "value": sm.perron_inversion(meas, A, B, ns.nu)}
    z = complex(hi + 1.0)
    quad = sm.stieltjes_transform(meas, rule, z)
    job.results["stieltjes"] = {"z": z, "quadrature": quad, "closed_form": meas.transform(z)}
    job.check("stieltjes_quadrature_vs_closed_form", abs(quad - meas.transform(z)), "stieltjes")
    job.table = [{"i": i, "node": rule.nodes[i], "weight": rule.weights[i]} for i in range(K)]


def _vacuum_params(ns) -> ng.VacuumParams:
    kappa = -ns.mu_sq if ns.kappa is None else ns.kappa
    try:
        return ng.VacuumParams(ns.omega_sq, kappa, ns.alpha)
    except ng.InvalidVacuumError as exc:
        raise ConfigError(str(exc)) from exc


def _vacuum(job: Job, ns):
    p = _vacuum_params(ns)
    try:
        seq = ng.vacuum_sequence(p)
        u = [seq.u(m) for m in range(ns.N + 1)]
        worst = max(ng.eom_residual(seq, p, m) for m in range(ns.N))
    except ng.InvalidVacuumError as exc:
        raise ConfigError(str(exc)) from exc
    job.results["regime"] = p.regime
    if not p.is_critical:
        job.results["r"] = p.r
    job.results["u"] = u[: ns.N]
    job.results["a"] = [seq.a(m) for m in range(ns.N)]
    job.check("eom_residual_over_abs_kappa", worst / abs(float(p.kappa)), "vacuum")
    job.table = [{"m": m, "u": u[m], "a": job.results["a"][m]} for m in range(ns.N)]


def _tadpole(job: Job, ns):
    mu = ns.mu_sq
    try:
        c, sigma = ng.tadpole_coefficient(mu, ns.k, ns.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    exact = ng.tadpole_closed_form(mu, ns.k, ns.N)
    job.results["coefficient"] = c
    job.results["closed_form"] = exact
    job.results["sigma"] = sigma
    job.refs["sigma"] = REFS["sigma"]
    job.check("direct_vs_closed_form", abs(c - exact), "tadpole")
    job.table = [{"k": ns.k, "N": ns.N, "coefficient": c, "closed_form": exact,
                  "sigma_im": sigma.imag}]


def _triple(job: Job, ns, samples: int = 100):
    N, mu = ns.N, float(ns.mu_sq)
    G = ng.kinetic_reduced(mu, N)
    dec = st.decompose(G)
    rng = np.random.default_rng(ns.seed)
    signs = rng.choice([-1, 1], size=N)
    D = st.dirac_sqrt(dec)
    Ds = st.dirac_sqrt(dec, signs)
    job.check("reconstruction", st.reconstruction_residual(dec, G), "dirac")
    job.check("D_squared_minus_G", np.linalg.norm(D.matrix @ D.matrix - G.to_dense()), "dirac")
    job.check("D_squared_minus_G_random_signs",
              np.linalg.norm(Ds.matrix @ Ds.matrix - G.to_dense()), "dirac")
    Jiso = st.isometry_J(dec, signs)
    job.check("isometry_square", np.max(np.abs(Jiso @ Jiso - np.eye(N))), "dirac")
    job.check("isometry_commutes", np.max(np.abs(Jiso @ D.matrix - D.matrix @ Jiso)), "dirac")
    cl = st.clifford_rep()
    job.check("clifford", cl.anticommutator_residual(), "ko")
    for name, val in st.ko_relations(D, cl).items():
        job.check(f"ko: {name}", val, "ko")
    if N >= 2:
        _, comm, dist = st.commutant_witness(dec, 0, D)
        job.check("commutant_witness", comm, "commutant")
        job.results["witness_distance_to_scalars"] = dist
    slack = math.inf
    spec = np.linalg.eigvalsh(D.matrix)
    for _ in range(samples):
        a = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        z = complex(rng.uniform(-1, 1) * spec[-1], rng.uniform(0.1, 1.0))
        slack = min(slack, st.hs_bound_check(D.matrix, a, z).min_slack)
    job.results["hs_min_slack"] = slack
    job.check("hs_negative_slack", max(0.0, -slack), "hs")
    job.results["dirac"] = D.matrix


def _verify_all(job: Job, ns):
    N, mu, tol = ns.N, float(ns.mu_sq), ns.tol
    rng = np.random.default_rng(ns.seed)
    summary = {}

    _spectrum(job, ns)
    T = ng.kinetic_reduced(mu, N).truncation
    fam = op.RecurrencePolynomials(jc.shifted_chebyshev_coefficients())
    z = op.zeros(fam, N).zeros
    job.check("zeros_vs_eigenvalues", np.max(np.abs(-mu * z[::-1] - op.eigenvalues(T))), "zeros")
    _eigvecs(job, ns)

    n = min(N, 65)
    P = ng.propagator_matrix(mu, n)
    idx = np.arange(n)
    exact = (np.minimum.outer(idx, idx) + 1) / mu
    job.check("propagator_relative", np.max(np.abs(P - exact) / exact), "propagator")
    if n >= 3:
        job.check("propagator_identity", ng.propagator_identity_residual(mu, n, P),
                  "propagator_identity")

    worst = 0.0
    for _ in range(100):
        deg = int(rng.integers(0, N + 1))
        t, w = rng.uniform(-4.5, 0.5, size=2)
        r = op.christoffel_darboux_residual(fam, deg, t, w, relative=True)
        worst = max(worst, r.summation, r.confluent)
    job.check("christoffel_darboux_relative", worst, "christoffel_darboux")

    coeffs, meas = _family("kinetic")
    rule = sm.gauss_rule(coeffs, N + 1)
    fav = 0.0
    for m in range(N):
        for l in (m, m + 1):
            if l < N:
                target = -2.0 if l == m else 1.0
                fav = max(fav, abs(sm.matrix_element(coeffs, fam, meas, rule, m, l, "t") - target))
    job.check("favard_round_trip", fav, "favard")
    cheb = sm.chebyshev_u_measure()
    nu = tol / 100.0
    true_mass = 1.0 / 3.0 + math.sqrt(3.0) / (2.0 * math.pi)
    job.check("perron_interval",
              abs(sm.perron_inversion(cheb, -0.5, 0.5, nu, tol=nu) - true_mass), "perron")
    job.check("perron_total_mass",
              abs(sm.perron_inversion(cheb, -2.0, 2.0, nu, tol=nu) - 1.0), "perron")
    crule = sm.gauss_rule(jc.chebyshev_u_coefficients(), 40)
    zz = 3.0 + 0j
    job.check("stieltjes_series_vs_quadrature",
              abs(sm.stieltjes_series(cheb, crule, zz, 40) - sm.stieltjes_transform(cheb, crule, zz)),
              "stieltjes")

    regimes = [ng.VacuumParams(0.1, -1.0), ng.VacuumParams(Fraction(1, 3), -mu),
               ng.VacuumParams(0.6, -1.0), ng.VacuumParams(1.0, -4.0)]
    for p in regimes:
        seq = ng.vacuum_sequence(p)
        res = max(ng.eom_residual(seq, p, m) for m in range(101)) / abs(float(p.kappa))
        job.check(f"vacuum_{p.regime}", res, "vacuum")

    p13 = ng.VacuumParams(Fraction(1, 3), Fraction(-4, 3))
    seq = ng.vacuum_sequence(p13)
    bad = 0
    for _ in range(1000):
        m_, n_, k_, l_ = (int(x) for x in rng.integers(0, 2 * N + 2, size=4))
        got = ng.kinetic_4index(seq, p13, m_, n_, k_, l_, a_minus1=seq.a(0))
        bad += got != ng.kinetic13(p13.kappa, m_, n_, k_, l_)
    job.check("kinetic_reduction_mismatches", bad, "kinetic")

    _triple(job, ns)

    if N >= 2:
        c, _ = ng.tadpole_coefficient(Fraction(mu), 0, N)
        job.check("tadpole_exact", abs(c - ng.tadpole_closed_form(Fraction(mu), 0, N)), "tadpole")

    for name in job.residuals:
        summary[name] = job.residuals[name] <= job.limits[name]
    job.results = {"passed": summary, "n_checks": len(summary)}
    job.table = [{"check": k, "residual": job.residuals[k], "ok": summary[k]} for k in summary]


HANDLERS = {
    "spectrum": _spectrum,
    "eigvecs": _eigvecs,
    "propagator": _propagator,
    "measure": _measure,
    "vacuum": _vacuum,
    "tadpole": _tadpole,
    "triple-check": _triple,
    "verify-all": _verify_all,
}


def _write_csv(rows: list, stream) -> None:
    plain = [_plain(r) for r in rows]
    if not plain:
        return
    fields = list(plain[0])
    w = csv.DictWriter(stream, fieldnames=fields, lineterminator="\r\n")
    w.writeheader()
    for r in plain:
        w.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in r.items()})


_NEG_RATIO = re.compile(r"^-\d+/\d+$")


def _glue_negative_ratios(argv: list) -> list:
    # argparse takes "-4/3" for a flag; "--kappa -4/3" becomes "--kappa=-4/3"
    out = []
    for tok in argv:
        if _NEG_RATIO.match(tok) and out and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = _glue_negative_ratios(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(ns)
        params = {"mu_sq": ns.mu_sq, "N": ns.N, "tol": ns.tol, "seed": ns.seed}
        if ns.K is not None:
            params["K"] = ns.K
        if ns.command == "vacuum":
            params.update(omega_sq=ns.omega_sq, kappa=-ns.mu_sq if ns.kappa is None else ns.kappa,
                          alpha=ns.alpha)
        if ns.command == "propagator":
            params.update(m=ns.m, l=ns.l)
        if ns.command == "tadpole":
            params.update(k=ns.k)
        if ns.command == "measure":
            params.update(family=ns.family)
        job = Job(ns.command, params, ns.tol)
        HANDLERS[ns.command](job, ns)
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=stderr)
        return 2
    except (ng.QuadratureError, op.BracketError) as exc:
        print(f"invariant violated: {exc}", file=stderr)
        return 1

    if ns.output == "json":
        stdout.write(json.dumps(job.document(), indent=2, allow_nan=False) + "\n")
    else:
        buf = io.StringIO()
        _write_csv(job.table, buf)
        stdout.write(buf.getvalue())

    failed = job.failures()
    for name in failed:
        print(f"invariant violated: {name} = {job.residuals[name]:.3e} > {job.limits[name]:.1e} "
              f"[{job.refs[name]}]", file=stderr)
    return 1 if failed else 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
