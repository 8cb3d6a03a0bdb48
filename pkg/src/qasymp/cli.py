"""Command-line front end: ``qasymp eval | verify | scan | sweep | ortho``.

Every command writes a table.  CSV output starts with one ``#``-prefixed JSON
line of run metadata, followed by a header row; ``--format json`` emits one
JSON document instead.  Floats are printed with ``repr`` (shortest
round-trip form), so a row can be fed back to ``eval`` and reproduced.

Exit codes: 0 success, 2 bad configuration (error JSON on stderr),
3 a verification or tolerance failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import click

from . import asymptotics as asy
from . import core, diophantine, qfunctions, qpolynomials, theta
from .errors import CaseNotStated, QAsympError
from .regimes import Regime

VERSION = "0.1.0"


class ConfigError(click.ClickException):
    exit_code = 2


class VerificationFailed(Exception):
    """Raised after the output is written, to select exit code 3."""


# ---------------------------------------------------------------------------
# parsing helpers


def parse_complex(text) -> complex:
    """``"1"``, ``"0.5-2i"``, ``"1i"``; ``j`` is accepted too."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise ConfigError(f"not a complex number: {text!r}") from exc


def parse_n_range(text) -> list[int]:
    """``"5..50"``, ``"5..50:5"``, ``"16,81,256"`` or a single integer."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(v) for v in text]
    out: list[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                lo, _, rest = part.partition("..")
                hi, _, step = rest.partition(":")
                out.extend(range(int(lo), int(hi) + 1, int(step) if step else 1))
            elif part:
                out.append(int(part))
    except ValueError as exc:
        raise ConfigError(f"bad n range {text!r}") from exc
    if not out:
        raise ConfigError(f"empty n range {text!r}")
    return out


def parse_real(text):
    """Exact where possible: ``"1/3"`` is a fraction, ``"sqrt(2)-1"`` symbolic."""
    if text is None:
        return None
    try:
        return diophantine.as_real(text if isinstance(text, str) else str(text))
    except QAsympError as exc:
        raise ConfigError(str(exc)) from exc


def _jobs(value) -> int:
    if value is None:
        env = os.environ.get("QASYMP_JOBS")
        if env:
            try:
                value = int(env)
            except ValueError as exc:
                raise ConfigError(f"QASYMP_JOBS must be an integer, got {env!r}") from exc
        else:
            value = os.cpu_count() or 1
    value = int(value)
    if value < 1:
        raise ConfigError("--jobs must be at least 1")
    return value


# ---------------------------------------------------------------------------
# config merging and output


def _settings(ctx: click.Context, defaults: dict) -> dict:
    """Flags given on the command line win over ``--config``, which wins over defaults."""
    file_cfg: dict = {}
    path = ctx.params.get("config")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    out = dict(defaults)
    known = set(ctx.params)
    for key, val in file_cfg.items():
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = val
    for key, val in ctx.params.items():
        source = ctx.get_parameter_source(key)
        if source is not None and source.name != "DEFAULT" and val is not None:
            out[key] = val
        elif key not in out:
            out[key] = val
    return out


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, diophantine.SymbolicReal):
        return v.expr
    if isinstance(v, complex):
        return f"{v.real!r}{'+' if v.imag >= 0 or math.isnan(v.imag) else '-'}{abs(v.imag)!r}i"
    return v


def _cell(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return repr(float(v))  # numpy scalars repr with their type name
    return str(_plain(v))


def _json_value(v):
    if isinstance(v, float):
        v = float(v)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return _plain(v)


def emit(settings: dict, meta: dict, columns: list[str], rows: list[dict]) -> None:
    meta = {"tool": "qasymp", "version": VERSION, **meta}
    if settings.get("format") == "json":
        doc = {"meta": _json_value(meta), "columns": columns, "rows": [_json_value(r) for r in rows]}
        text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + json.dumps(_json_value(meta), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        text = buf.getvalue()
    out = settings.get("output")
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


_COMMON = [
    click.option("--config", type=click.Path(dir_okay=False), default=None, help="JSON file with option values."),
    click.option("--format", "format", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
    click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout."),
]


def common(f):
    for opt in reversed(_COMMON):
        f = opt(f)
    return f


@click.group()
@click.version_option(VERSION, prog_name="qasymp")
def cli() -> None:
    """q-series numerics and certified Plancherel-Rotach asymptotics."""


# ---------------------------------------------------------------------------
# eval

_FNS = ["eq_euler", "aq", "jnu", "qpoch", "theta", "eta", "im", "sw", "ql", "qgamma"]


def _lc_row(value: core.LogComplex, **extra) -> dict:
    # re/im only where binary64 can hold the value
    lin = value.to_complex() if value.log_mag < 709 else complex(math.nan, math.nan)
    return {**extra, "log_mag": value.log_mag, "phase": value.phase, "re": lin.real, "im": lin.imag}


@cli.command("eval")
@click.option("--fn", type=click.Choice(_FNS), default=None)
@click.option("--q", default=None, help="Base q, or a regime such as power:a=0.25 with --n.")
@click.option("--z", default=None, help="Complex argument, e.g. 1 or 0.5+2i.")
@click.option("--a", default=None, help="q-Pochhammer parameter a.")
@click.option("--n", default=None, help="Index or range; for qpoch omit it for (a;q)_inf.")
@click.option("--nu", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--idx", type=int, default=None, help="Theta index 1-4.")
@click.option("--v", default=None, help="Theta argument v.")
@click.option("--tau", default=None, help="Modular variable, e.g. 1i.")
@click.option("--x", default=None, help="Polynomial argument (xi for im: h_n(sinh xi)).")
@common
@click.pass_context
def cmd_eval(ctx, **_):
    """Evaluate one function, one row per grid point."""
    s = _settings(ctx, {})
    fn = s["fn"]
    if fn is None:
        raise ConfigError("--fn is required")

    def need(key):
        if s.get(key) is None:
            raise ConfigError(f"--{key} is required for {fn}")
        return s[key]

    def qval() -> float:
        try:
            return float(need("q"))
        except ValueError as exc:
            raise ConfigError(f"bad q {s['q']!r}") from exc

    rows = []
    if fn == "theta":
        v, tau = parse_complex(need("v")), parse_complex(need("tau"))
        rows.append(_lc_row(theta.theta_sum(need("idx"), v, tau), v=v, tau=tau))
    elif fn == "eta":
        tau = parse_complex(need("tau"))
        rows.append(_lc_row(theta.dedekind_eta(tau), tau=tau))
    elif fn == "qpoch":
        a, q = parse_complex(need("a")), qval()
        if s.get("n") is None:
            rows.append(_lc_row(core.qpoch_infinite(a, q), a=a, n="inf"))
        for n in parse_n_range(s["n"]) if s.get("n") is not None else []:
            rows.append(_lc_row(core.qpoch_finite(a, q, n), a=a, n=n))
    elif fn in ("eq_euler", "aq", "jnu"):
        z, q = parse_complex(need("z")), qval()
        if fn == "eq_euler":
            val = qfunctions.eq_euler(z, q)
        elif fn == "aq":
            val = qfunctions.aq_ramanujan(z, q)
        else:
            val = qfunctions.jackson_bessel2(float(need("nu")), z, q)
        rows.append(_lc_row(val, z=z))
    elif fn == "qgamma":
        x, q = float(need("x")), qval()
        rows.append(_lc_row(core.qgamma(x, q), x=x))
    else:
        x, q = parse_complex(need("x")), qval()
        for n in parse_n_range(need("n")):
            if fn == "im":
                val = qpolynomials.ismail_masson(n, x, q)
            elif fn == "sw":
                val = qpolynomials.stieltjes_wigert(n, x, q)
            else:
                val = qpolynomials.q_laguerre(n, float(need("alpha")), x, q)
            rows.append(_lc_row(val, n=n, x=x))
    inputs = [k for k in ("n", "a", "x", "z", "v", "tau") if any(k in r for r in rows)]
    meta = {"command": "eval", "fn": fn, "q": s.get("q"), "nu": s.get("nu"), "alpha": s.get("alpha"), "idx": s.get("idx")}
    emit(s, meta, inputs + ["log_mag", "phase", "re", "im"], rows)


# ---------------------------------------------------------------------------
# verify


def _z_from(s: dict, fam: asy.Family) -> complex:
    if s.get("z") is not None and s.get("u") is not None:
        raise ConfigError("give --z or --u, not both")
    if s.get("u") is not None:
        u = float(s["u"])
        # the same exponential parametrisation as the corollaries
        scale = math.pi if fam.tag is asy.FamilyTag.ISMAIL_MASSON else 2 * math.pi
        return complex(math.exp(scale * u))
    return parse_complex(s.get("z") if s.get("z") is not None else "1")



@cli.command("verify")
@click.option("--family", default=None, help="qexp, rf, qb:nu=0.5, im, sw, ql:alpha=0.5")
@click.option("--case", "case", type=int, default=None)
@click.option("--q", type=float, default=None)
@click.option("--tau", default=None)
@click.option("--theta", default=None)
@click.option("--z", default=None)
@click.option("--u", type=float, default=None, help="z = e^{2 pi u} (e^{pi u} for im).")
@click.option("--n", default=None, help="Explicit indices; default: the first --count admissible ones.")
@click.option("--lam", default=None)
@click.option("--lam1", default=None)
@click.option("--beta", default=None)
@click.option("--beta1", default=None)
@click.option("--beta2", default=None)
@click.option("--rho", type=float, default=None)
@click.option("--count", type=int, default=None)
@click.option("--n-max", "n_max", type=int, default=None)
@click.option("--jobs", type=int, default=None)
@common
@click.pass_context
def cmd_verify(ctx, **_):
    """Check the remainder bound of one theorem case along admissible indices."""
    s = _settings(
        ctx,
        {"q": 0.5, "tau": None, "theta": "0", "rho": 1.0, "count": 5, "n_max": 100000},
    )
    if s.get("family") is None or s.get("case") is None:
        raise ConfigError("--family and --case are required")
    fam = asy.as_family(s["family"])
    case = int(s["case"])
    if case not in asy._REQUIRED:
        raise ConfigError(f"--case must be 1..7, got {case}")
    if s.get("tau") is None:
        s["tau"] = "1" if case == 1 else "0"
    spec = asy.ScalingSpec(parse_real(s["tau"]), parse_real(s["theta"]), fam)
    q = float(s["q"])
    z = _z_from(s, fam)
    if s.get("n") is not None:
        kw = {k: parse_real(s.get(k)) for k in ("lam", "lam1", "beta", "beta1", "beta2") if s.get(k) is not None}
        for k in asy._REQUIRED[case]:
            kw.setdefault(k, Fraction(0))
        cp = asy.CaseParams(case, rho=float(s["rho"]), **kw)
        work = [(n, cp) for n in parse_n_range(s["n"])]
    else:
        kw = {k: parse_real(s.get(k)) for k in asy._REQUIRED[case] if s.get(k) is not None}
        work = asy.admissible_cases(
            fam, spec, case, q, count=int(s["count"]), n_max=int(s["n_max"]), rho=float(s["rho"]), **kw
        )
        if not work:
            raise ConfigError("no admissible n found; raise --n-max or change the targets")
    reports = asy.verify_sweep(fam, spec, work, z, q, jobs=_jobs(s.get("jobs")))
    rows = [
        {
            "n": r.n,
            "residual": r.residual,
            "bound": r.bound,
            "satisfied": r.satisfied,
            "status": r.status.value,
            "precision": r.precision,
            "remainder_label": r.remainder_label,
        }
        for r in reports
    ]
    counts = {st.value: sum(r.status is st for r in reports) for st in asy.Status}
    meta = {
        "command": "verify",
        "family": fam.describe(),
        "case": case,
        "q": q,
        "tau": spec.tau,
        "theta": spec.theta,
        "z": z,
        "summary": counts,
    }
    emit(s, meta, ["n", "residual", "bound", "satisfied", "status", "precision", "remainder_label"], rows)
    if counts[asy.Status.VIOLATED.value]:
        raise VerificationFailed(f"{counts['violated']} hard bound violation(s)")


# ---------------------------------------------------------------------------
# scan


@cli.command("scan")
@click.option("--mode", type=click.Choice(["admissible", "joint", "crt"]), default=None)
@click.option("--theta", default=None)
@click.option("--beta", default=None)
@click.option("--tau", default=None)
@click.option("--beta1", default=None)
@click.option("--beta2", default=None)
@click.option("--lam", default=None)
@click.option("--lam1", default=None)
@click.option("--rho", type=float, default=None)
@click.option("--n-max", "n_max", type=int, default=None)
@click.option("--count", type=int, default=None, help="Progression terms listed in crt mode.")
@common
@click.pass_context
def cmd_scan(ctx, **_):
    """List admissible indices: a single scan, a joint scan, or a CRT progression."""
    s = _settings(ctx, {"mode": "admissible", "rho": 1.0, "n_max": 1000, "count": 10, "beta": "0"})
    mode = s["mode"]
    meta: dict = {"command": "scan", "mode": mode}
    if mode == "crt":
        for k in ("tau", "theta", "lam", "lam1"):
            if s.get(k) is None:
                raise ConfigError(f"--{k} is required for crt mode")
        prog = diophantine.crt_joint_rational(s["tau"], s["theta"], s["lam"], s["lam1"])
        meta.update(n0=prog.n0, L=prog.L, tau=s["tau"], theta=s["theta"], lam=s["lam"], lam1=s["lam1"])
        rows = [{"k": k, "n": n} for k, n in enumerate(prog.take(int(s["count"])))]
        emit(s, meta, ["k", "n"], rows)
        return
    if s.get("theta") is None:
        raise ConfigError("--theta is required")
    if mode == "admissible":
        hits = diophantine.scan_admissible(parse_real(s["theta"]), parse_real(s["beta"]), float(s["rho"]), int(s["n_max"]))
    else:
        if s.get("tau") is None:
            raise ConfigError("--tau is required for joint mode")
        hits = diophantine.scan_joint(
            parse_real(s["tau"]),
            parse_real(s["theta"]),
            parse_real(s.get("beta1") or "0"),
            parse_real(s.get("beta2") or "0"),
            float(s["rho"]),
            int(s["n_max"]),
        )
    meta.update({k: s.get(k) for k in ("theta", "beta", "tau", "beta1", "beta2", "rho", "n_max")})
    rows = [{"n": h.n, "m": h.m, "m1": h.m1, "a_n": h.a_n, "b_n": h.b_n} for h in hits]
    emit(s, meta, ["n", "m", "m1", "a_n", "b_n"], rows)


# ---------------------------------------------------------------------------
# sweep


@cli.command("sweep")
@click.option("--family", default=None)
@click.option("--case", "case", type=int, default=None)
@click.option("--regime", default=None, help="power:a=0.25,gamma=1 or log:gamma=1")
@click.option("--u", type=float, default=None)
@click.option("--tau", default=None)
@click.option("--lam", default=None)
@click.option("--n", default=None)
@click.option("--max-c", "max_c", type=float, default=None, help="Fail when the fitted constant exceeds this.")
@click.option("--jobs", type=int, default=None)
@common
@click.pass_context
def cmd_sweep(ctx, **_):
    """Ratio of the corollary error to its printed rate along an n-sweep."""
    s = _settings(ctx, {"u": 0.0, "max_c": 100.0, "regime": "power:a=0.25,gamma=1"})
    for k in ("family", "case", "tau", "n"):
        if s.get(k) is None:
            raise ConfigError(f"--{k} is required")
    fam = asy.as_family(s["family"])
    regime = Regime.parse(s["regime"])
    rows_ = asy.corollary_check(
        fam,
        int(s["case"]),
        float(s["u"]),
        regime,
        parse_n_range(s["n"]),
        parse_real(s["tau"]),
        parse_real(s.get("lam")),
        jobs=_jobs(s.get("jobs")),
    )
    c_fit = asy.fitted_constant(rows_)
    rows = [
        {
            "n": r.n,
            "actual_log_mag": r.actual.log_mag,
            "actual_phase": r.actual.phase,
            "predicted_log_mag": r.predicted.log_mag,
            "predicted_phase": r.predicted.phase,
            "ratio": r.ratio,
        }
        for r in rows_
    ]
    meta = {
        "command": "sweep",
        "family": fam.describe(),
        "case": int(s["case"]),
        "regime": regime.describe(),
        "u": float(s["u"]),
        "tau": s["tau"],
        "lam": s.get("lam"),
        "fitted_C": c_fit,
        "max_C": float(s["max_c"]),
    }
    emit(s, meta, ["n", "actual_log_mag", "actual_phase", "predicted_log_mag", "predicted_phase", "ratio"], rows)
    if not c_fit <= float(s["max_c"]):
        raise VerificationFailed(f"fitted constant {c_fit!r} exceeds {s['max_c']!r}")


# ---------------------------------------------------------------------------
# ortho


@cli.command("ortho")
@click.option("--family", type=click.Choice(["im", "sw"]), default=None)
@click.option("--q", type=float, default=None)
@click.option("--size", type=int, default=None, help="Gram matrix is size x size (degrees 0..size-1).")
@click.option("--tol", type=float, default=None)
@common
@click.pass_context
def cmd_ortho(ctx, **_):
    """Gram matrix of an orthogonal family against its predicted norms."""
    s = _settings(ctx, {"q": 0.5, "size": 4, "tol": 1e-6})
    if s.get("family") is None:
        raise ConfigError("--family is required")
    kind = qpolynomials.PolyKind.ISMAIL_MASSON if s["family"] == "im" else qpolynomials.PolyKind.STIELTJES_WIGERT
    q, size, tol = float(s["q"]), int(s["size"]), float(s["tol"])
    if size < 1:
        raise ConfigError("--size must be positive")
    gram = [[qpolynomials.orthogonality_integral(kind, m, n, q) for n in range(size)] for m in range(size)]
    target = [qpolynomials.orthogonality_target(kind, n, q) for n in range(size)]
    rows, worst = [], 0.0
    for m in range(size):
        for n in range(size):
            if m == n:
                err = abs(gram[m][n] / target[n] - 1)
            else:
                err = abs(gram[m][n]) / math.sqrt(target[m] * target[n])
            worst = max(worst, err)
            rows.append({"m": m, "n": n, "value": gram[m][n], "target": target[n] if m == n else 0.0, "rel_err": err})
    meta = {"command": "ortho", "family": kind.value, "q": q, "size": size, "tol": tol, "worst": worst}
    emit(s, meta, ["m", "n", "value", "target", "rel_err"], rows)
    if not worst <= tol:
        raise VerificationFailed(f"Gram matrix off by {worst!r} > {tol!r}")


# ---------------------------------------------------------------------------
# entry point


def _error_json(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="qasymp", standalone_mode=False)
    except VerificationFailed as exc:
        _error_json("VerificationFailed", str(exc))
        return 3
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        _error_json(type(exc).__name__, exc.format_message())
        return 2
    except (QAsympError, ValueError, CaseNotStated) as exc:
        _error_json(type(exc).__name__, str(exc))
        return 2
    except click.exceptions.Abort:
        return 1
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

