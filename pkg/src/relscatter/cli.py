"""Command-line front end: kernel evaluation, solves, far-field fits, check suites and reports."""
import argparse
from dataclasses import asdict, dataclass, field, fields, replace
import io
import json
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from . import farfield as _ff
from . import grids as _grids
from . import kernels as _kernels
from . import operators as _ops
from . import solver as _solver
from . import verify as _verify
from .errors import ConfigurationError, RelScatterError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2
MODES = ("born", "nystrom-radial")
SUITES = ("kernels", "operators", "radiation", "spectral", "farfield")


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class GridConfig:
    R_dom: float = 8.0
    N_r: int = 32
    N_ang: int = 16
    N_phi: int = 32


@dataclass(frozen=True)
class PotentialConfig:
    C: float = 0.05
    sigma: float = 4.0
    profile: str = "power"
    coupling: float = 1.0


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "nystrom-radial"
    lam: float = 1.0
    sign: str = "+"
    tol: float = 1e-8
    max_iter: int = 200
    relaxation: float = 1.0


@dataclass(frozen=True)
class FarfieldConfig:
    outer_radius: float = 200.0
    r_min: float = 10.0
    sample_ratio: float = 1.2


@dataclass(frozen=True)
class VerifyConfig:
    suites: tuple = SUITES
    kernel_rel_tol: float = 1e-8
    operator_split_tol: float = 1e-10
    radiation_min_gain: float = 1.8
    radiation_max_wrong_gain: float = 0.3
    spectral_tol: float = 1e-12


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "relscatter-out"


_SECTIONS = dict(grid=GridConfig, potential=PotentialConfig, solver=SolverConfig,
                 farfield=FarfieldConfig, verify=VerifyConfig, output=OutputConfig)


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    farfield: FarfieldConfig = field(default_factory=FarfieldConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self, needs_solver=False):
        tols = [self.solver.tol, self.verify.kernel_rel_tol, self.verify.operator_split_tol,
                self.verify.spectral_tol]
        if any(not t > 0 for t in tols):
            raise ConfigurationError("all tolerances must be positive")
        if self.solver.mode not in MODES:
            raise ConfigurationError(f"solver mode must be one of {MODES}")
        unknown = set(self.verify.suites) - set(SUITES)
        if unknown:
            raise ConfigurationError(f"unknown suites {sorted(unknown)}")
        _kernels.parse_sign(self.solver.sign)
        if needs_solver and not self.potential.sigma > 2:
            raise ConfigurationError(
                f"sigma = {self.potential.sigma} rejected: solving requires sigma > 2 "
                "(the admission rule for the Lippmann-Schwinger equation)")
        return self

    def to_dict(self):
        out = {}
        for name in _SECTIONS:
            sec = asdict(getattr(self, name))
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in sec.items()}
        return out

    @classmethod
    def from_dict(cls, data):
        sections = {}
        for name, typ in _SECTIONS.items():
            raw = dict(data.get(name, {}))
            known = {f.name: f for f in fields(typ)}
            extra = set(raw) - set(known)
            if extra:
                raise ConfigurationError(f"unknown keys in [{name}]: {sorted(extra)}")
            default = typ()
            for key, value in raw.items():
                want = type(getattr(default, key))
                if want is tuple:
                    raw[key] = tuple(value)
                elif want is float and isinstance(value, int) and not isinstance(value, bool):
                    raw[key] = float(value)
                elif not isinstance(value, want) or isinstance(value, bool) != (want is bool):
                    raise ConfigurationError(f"[{name}].{key} must be {want.__name__}")
            sections[name] = typ(**raw)
        extra = set(data) - set(_SECTIONS)
        if extra:
            raise ConfigurationError(f"unknown sections {sorted(extra)}")
        return cls(**sections)

    def to_toml(self):
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_toml(cls, text):
        try:
            return cls.from_dict(tomllib.loads(text))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"malformed configuration: {exc}") from exc

    @classmethod
    def load(cls, path):
        try:
            with open(path, "rb") as fh:
                text = fh.read().decode("utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
        return cls.from_toml(text)

    def potential_obj(self):
        p = self.potential
        return _solver.Potential(C=p.C, sigma=p.sigma, profile=p.profile, coupling=p.coupling)


# ---------------------------------------------------------------- serialization

def format_number(x):
    return "%.17g" % x


def csv_text(header, rows):
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else format_number(v) for v in row) + "\n")
    return buf.getvalue()


def write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_line(obj):
    return json.dumps(obj, sort_keys=True)


# ---------------------------------------------------------------- subcommands

def _cmd_eval_kernel(args, cfg, out):
    lam = args.lam
    rows = []
    for r in args.r:
        kv = _kernels.g_boundary(lam, args.sign, r)
        rows.append(dict(**{"lambda": lam}, sign=args.sign, r=r, riesz=kv.riesz,
                         wave_re=kv.wave.real, wave_im=kv.wave.imag, correction=kv.correction,
                         total_re=kv.total.real, total_im=kv.total.imag))
    for row in rows:
        out.write(_json_line(row) + "\n")
    return EXIT_OK


def _solve(cfg):
    cfg.validate(needs_solver=True)
    g, s = cfg.grid, cfg.solver
    V = cfg.potential_obj()
    if s.mode == "nystrom-radial":
        grid = _grids.build_radial_grid(g.R_dom, g.N_r, g.N_ang, g.N_phi)
        return _solver.nystrom_solve_radial(s.lam, s.sign, V, grid, tol=s.tol), V
    grid = _grids.build_ball_grid(g.R_dom, g.N_r, g.N_ang, g.N_phi)
    k = np.array([0.0, 0.0, s.lam])
    sol = _solver.born_iterate(k, s.sign, V, grid, tol=s.tol, max_iter=s.max_iter, relaxation=s.relaxation)
    return sol, V


def _cmd_solve(args, cfg, out):
    sol, _ = _solve(cfg)
    pts = sol.points
    rows = [(p[0], p[1], p[2], f.real, f.imag, q.real, q.imag) for p, f, q in zip(pts, sol.phi, sol.psi)]
    base = os.path.join(cfg.output.directory, "solution")
    write_text(base + ".csv", csv_text(["x", "y", "z", "phi_re", "phi_im", "psi_re", "psi_im"], rows))
    meta = dict(mode=sol.metadata.get("mode"), residual=sol.residual, size=int(sol.phi.size),
                k=[float(c) for c in sol.k], sign=sol.sign)
    if "iterations" in sol.metadata:
        meta["iterations"] = sol.metadata["iterations"]
    write_text(base + ".json", json.dumps(meta, indent=2, sort_keys=True) + "\n")
    out.write(_json_line(meta) + "\n")
    return EXIT_OK


def _cmd_farfield(args, cfg, out):
    if cfg.solver.mode != "nystrom-radial":
        raise ConfigurationError("the far-field command needs solver mode nystrom-radial")
    sol, V = _solve(cfg)
    f = cfg.farfield
    field_ = _ff.TwoZoneField(sol, V, f.outer_radius)
    radii = _ff.sample_radii(f.outer_radius / 2, f.r_min, f.sample_ratio)
    rays = _ff.default_rays(sol.omega_k)
    fits, rows = [], []
    for i, ray in enumerate(rays):
        amp = field_.amplitude(ray)
        pw = _ff.planewave_diff_decay(field_, ray, radii)
        fe = _ff.farfield_error_decay(field_, amp, ray, radii)
        fits.append(dict(ray=[float(c) for c in ray], amplitude=[amp.real, amp.imag],
                         planewave=asdict(pw), farfield=asdict(fe)))
        psi = field_.scattered(radii[:, None] * ray)
        err = psi - amp * np.exp(-1j * sol.sign * sol.lam * radii) / radii
        rows.extend((float(i), r, abs(p), abs(e)) for r, p, e in zip(radii, psi, err))
    d = cfg.output.directory
    write_text(os.path.join(d, "farfield.csv"), csv_text(["ray", "r", "abs_psi", "abs_farfield_error"], rows))
    write_text(os.path.join(d, "farfield.json"), json.dumps(fits, indent=2, sort_keys=True) + "\n")
    for fit in fits:
        out.write(_json_line(fit) + "\n")
    return EXIT_OK


def _check(suite, name, value, bound, passed, theory=None):
    return dict(suite=suite, check=name, value=float(value), bound=float(bound), theory=theory, **{"pass": bool(passed)})


def _suite_kernels(cfg):
    tol = cfg.verify.kernel_rel_tol
    worst = 0.0
    for zr in np.linspace(-3, -0.5, 5):
        for zi in np.linspace(-2, 2, 5):
            for a in np.geomspace(0.1, 20, 5):
                ref = _kernels.laplace_oracle(complex(zr, zi), a)
                got = _kernels.g_z(complex(zr, zi), a)
                worst = max(worst, abs(got - ref) / abs(ref))
    out = [_check("kernels", "laplace_identity_max_rel", worst, tol, worst <= tol)]
    z = complex(-1.0, 0.3)
    refl = abs(_kernels.g_z(z.conjugate(), 2.0) - np.conj(_kernels.g_z(z, 2.0)))
    out.append(_check("kernels", "conjugate_reflection", refl, tol, refl <= tol))
    return out


def _suite_operators(cfg):
    tol = cfg.verify.operator_split_tol
    grid = _grids.build_ball_grid(6.0, 10, 10, 20)
    r = np.linalg.norm(grid.nodes, axis=1)
    u = _ops.GridFunction(grid, (1 + r * r) ** -2 * np.exp(1j * grid.nodes[:, 2]))
    whole = _ops.apply_G_boundary(1.0, "+", u).values
    parts = (_ops.apply_G0(u).values + _ops.apply_K(1.0, "+", u).values + _ops.apply_M(1.0, u).values)
    mismatch = float(np.max(np.abs(whole - parts)))
    return [_check("operators", "boundary_split_sup", mismatch, tol, mismatch <= tol)]


def _suite_radiation(cfg):
    edges = np.geomspace(10.0, 1000.0, 31)
    out = []
    for lam in (0.5, 1.0, 2.0):
        good = _verify.radiation_functional(_verify.kernel_field(lam, "+"), lam, "+", 0.75, edges).decay_gain()
        bad = _verify.radiation_functional(_verify.kernel_field(lam, "-"), lam, "+", 0.75, edges).decay_gain()
        lo, hi = cfg.verify.radiation_min_gain, cfg.verify.radiation_max_wrong_gain
        out.append(_check("radiation", f"outgoing_gain_lam_{lam:g}", good, lo, good >= lo, theory=2.0))
        out.append(_check("radiation", f"wrong_sign_gain_lam_{lam:g}", bad, hi, bad <= hi, theory=0.0))
    return out


def _suite_spectral(cfg):
    tol = cfg.verify.spectral_tol
    box = _verify.PeriodicBox(4.0, 16)
    rng = np.random.default_rng(0)
    worst = worst2 = 0.0
    for _ in range(20):
        k = box.lattice_vector(rng.integers(-7, 8, size=3))
        e = box.plane_wave(k)
        nk = np.linalg.norm(k)
        worst = max(worst, np.max(np.abs(_verify.sqrt_laplacian_apply(box, e) - nk * e)) / max(nk, 1.0))
        twice = _verify.sqrt_laplacian_apply(box, _verify.sqrt_laplacian_apply(box, e))
        worst2 = max(worst2, np.max(np.abs(twice - _verify.laplacian_multiplier_apply(box, e))) / max(nk * nk, 1.0))
    z = rng.uniform(1, 2, 10000) + 1j * rng.uniform(-0.5, 0.5, 10000)
    z[z.imag == 0] += 1e-3j
    xi = rng.normal(size=(10000, 3)) * rng.uniform(0, 4, 10000)[:, None]
    sym = _verify.symbol_identity_check(z, xi, 1.0, 2.0)
    margin = min(sym.inner_margin, sym.outer_margin)
    return [_check("spectral", "plane_wave_multiplier", worst, tol, worst <= tol),
            _check("spectral", "double_application", worst2, tol, worst2 <= tol),
            _check("spectral", "symbol_identity", sym.identity_error, tol, sym.identity_error <= tol),
            _check("spectral", "cutoff_margin", margin, 0.0, margin >= 0)]


def _suite_farfield(cfg):
    r = _ff.sample_radii(100.0)
    fit = _ff.fit_decay_exponent(r, r ** -2.0)
    out = [_check("farfield", "synthetic_power_law", fit.exponent, 1e-6, abs(fit.exponent - 2) <= 1e-6, theory=2.0)]
    worst = 0.0
    for sigma in (3.5, 4.0):
        env = _ff.splitting_envelopes(sigma)
        for a in (0.5, 1.0, 2.0):
            for rho in (10.0, 100.0, 1000.0):
                parts = _ff.splitting_integrals(a, rho, sigma)
                ratios = [abs(parts[k]) / env[k](rho) for k in parts]
                ratios[2] /= abs(a)
                worst = max(worst, max(ratios))
    out.append(_check("farfield", "splitting_envelope_ratio", worst, 5.0, worst <= 5.0))
    return out


_SUITE_FUNCS = dict(kernels=_suite_kernels, operators=_suite_operators, radiation=_suite_radiation,
                    spectral=_suite_spectral, farfield=_suite_farfield)


def run_suites(cfg, names):
    results = []
    for name in names:
        results.extend(_SUITE_FUNCS[name](cfg))
    return results


def _cmd_verify(args, cfg, out):
    names = args.suite or list(cfg.verify.suites)
    bad = [n for n in names if n not in SUITES]
    if bad:
        raise ConfigurationError(f"unknown suites {bad}; choose from {SUITES}")
    results = run_suites(cfg, names)
    text = json.dumps(results, indent=2, sort_keys=True) + "\n"
    if args.out:
        write_text(args.out, text)
    out.write(text)
    return EXIT_OK if all(r["pass"] for r in results) else EXIT_CHECK_FAILED


def merge_reports(paths, warn=None):
    """Merge suite result files; a repeated (suite, check) keeps the last entry."""
    if not paths:
        raise ConfigurationError("report needs at least one results file")
    merged = {}
    for path in paths:
        try:
            with open(path, encoding="utf-8") as fh:
                rows = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read results file {path}: {exc}") from exc
        for row in rows:
            key = (row["suite"], row["check"])
            if key in merged and warn is not None:
                warn(f"duplicate check {key[0]}/{key[1]}: keeping the entry from {path}")
            merged[key] = row
    return list(merged.values())


def summary_table(rows):
    head = ("suite", "check", "theory", "measured", "tolerance", "pass")
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in rows:
        theory = "" if r.get("theory") is None else f"{r['theory']:g}"
        lines.append(f"| {r['suite']} | {r['check']} | {theory} | {r['value']:.6g} | {r['bound']:.6g} | "
                     f"{'PASS' if r['pass'] else 'FAIL'} |")
    return "\n".join(lines) + "\n"


def _cmd_report(args, cfg, out):
    rows = merge_reports(args.paths, warn=lambda msg: print(f"warning: {msg}", file=sys.stderr))
    text = summary_table(rows)
    if args.out:
        write_text(args.out, text)
    out.write(text)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_CHECK_FAILED


# ---------------------------------------------------------------- entry points

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser():
    p = _Parser(prog="relscatter", description="Scattering for the square-root Laplacian with a decaying potential.")
    p.add_argument("--config", help="TOML run configuration")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    ek = sub.add_parser("eval-kernel", help="boundary kernel g_lam^+- as JSON rows")
    ek.add_argument("--lambda", dest="lam", type=float, required=True)
    ek.add_argument("--sign", choices=("+", "-"), default="+")
    ek.add_argument("--r", type=float, action="append", required=True)

    for name, helptext in (("solve", "solve the integral equation"), ("farfield", "far-field decay fits")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--sigma", type=float)
        sp.add_argument("--C", type=float)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--sign", choices=("+", "-"))
        sp.add_argument("--mode", choices=MODES)
        sp.add_argument("--out-dir")

    vf = sub.add_parser("verify", help="run check suites")
    vf.add_argument("--suite", action="append", choices=SUITES)
    vf.add_argument("--out")

    rp = sub.add_parser("report", help="merge suite results into a table")
    rp.add_argument("paths", nargs="*")
    rp.add_argument("--out")
    return p


def _apply_overrides(cfg, args):
    pot, sol, outp = {}, {}, {}
    if getattr(args, "sigma", None) is not None:
        pot["sigma"] = args.sigma
    if getattr(args, "C", None) is not None:
        pot["C"] = args.C
    if getattr(args, "lam", None) is not None and args.command != "eval-kernel":
        sol["lam"] = args.lam
    if getattr(args, "sign", None) is not None and args.command != "eval-kernel":
        sol["sign"] = args.sign
    if getattr(args, "mode", None) is not None:
        sol["mode"] = args.mode
    if getattr(args, "out_dir", None) is not None:
        outp["directory"] = args.out_dir
    try:
        return replace(cfg, potential=replace(cfg.potential, **pot), solver=replace(cfg.solver, **sol),
                       output=replace(cfg.output, **outp))
    except RelScatterError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc


_COMMANDS = {"eval-kernel": _cmd_eval_kernel, "solve": _cmd_solve, "farfield": _cmd_farfield,
             "verify": _cmd_verify, "report": _cmd_report}


def run_command(argv, out=None):
    """Run one subcommand; returns 0 on success, 1 when a check fails, 2 on configuration errors."""
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigurationError("a subcommand is required: " + ", ".join(_COMMANDS))
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        cfg = _apply_overrides(cfg, args).validate()
        return _COMMANDS[args.command](args, cfg, out)
    except ConfigurationError as exc:
        print(f"relscatter: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RelScatterError as exc:
        print(f"relscatter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
