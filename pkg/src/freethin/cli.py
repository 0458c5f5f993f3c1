"""Command-line entry point.

JSON goes to stdout (and to ``--json FILE`` when given); errors go to stderr
as a JSON object. Exit codes: 0 success, 1 verification failure or numerical
error, 2 usage error, 3 resource bound exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import Config, RunManifest
from .errors import FreeThinError, NumericalError, PreconditionError, ResourceBoundError, SingularPivotError
from .scalars import parse_list, parse_scalar, to_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _report_error("usage", message)
        sys.exit(EXIT_USAGE)


def _report_error(kind: str, message: str, **extra) -> None:
    print(json.dumps({"error": kind, "message": message, **extra}, sort_keys=True), file=sys.stderr)


class _Run:
    """Output plumbing for one invocation."""

    def __init__(self, args, cfg: Config, argv: list):
        self.args = args
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.manifest = RunManifest(command=argv, config=vars(cfg).copy(), seed=cfg.seed)

    def path(self, name: str) -> Path:
        p = Path(name)
        if not p.is_absolute():
            p = self.out / p
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text)
        self.manifest.add(p)
        return p

    def emit(self, payload) -> None:
        text = json.dumps(to_json(payload), indent=2, sort_keys=True) + "\n"
        sys.stdout.write(text)
        target = getattr(self.args, "json", None)
        if target:
            self.write_text(target, text)

    def finish(self) -> None:
        if self.manifest.outputs:
            self.manifest.write(self.path(f"manifest-{self.args.command}.json"))


# nc ------------------------------------------------------------------------


def cmd_nc(run: _Run) -> int:
    from .nc_lattice import NonCrossingPartition, enumerate_nc, kreweras, moebius

    a = run.args
    if a.action == "enum":
        table = enumerate_nc(a.n, run.cfg.cap)
        if a.format == "text":
            sys.stdout.write("".join(f"{p}\n" for p in table))
            return EXIT_OK
        payload = {"n": a.n, "count": len(table)}
        if a.list:
            payload["elements"] = [str(p) for p in table]
        run.emit(payload)
    elif a.action == "kreweras":
        pi = NonCrossingPartition.parse(a.pi, a.n)
        run.emit({"pi": str(pi), "kreweras": str(kreweras(pi))})
    else:
        pi = NonCrossingPartition.parse(a.pi, a.n)
        sigma = NonCrossingPartition.parse(a.sigma, pi.n)
        run.emit({"pi": str(pi), "sigma": str(sigma), "moebius": moebius(pi, sigma, run.cfg.cap)})
    return EXIT_OK


# cumulants -------------------------------------------------------------------


def cmd_cumulants(run: _Run) -> int:
    from .cumulants import cumulants_to_moments, moments_to_cumulants

    a = run.args
    values = parse_list(a.values)
    if a.action == "m2k":
        run.emit({"moments": values, "cumulants": list(moments_to_cumulants(values, run.cfg.cap).values)})
    else:
        run.emit({"cumulants": values, "moments": list(cumulants_to_moments(values, run.cfg.cap).values)})
    return EXIT_OK


# model -----------------------------------------------------------------------


def parse_word(text: str) -> tuple:
    """``"P,B,1-B,C:2"``: family ids, ``1-`` for the complement, ``:k`` for a generator."""
    from .free_models import Letter

    out = []
    for tok in text.split(","):
        tok = tok.strip()
        comp = tok.startswith("1-")
        if comp:
            tok = tok[2:]
        fid, _, gen = tok.partition(":")
        letter = Letter(fid, int(gen) if gen else 0)
        out.append(letter.complement() if comp else letter)
    return tuple(out)


def _load_spec(text: str, cap: int):
    from .free_models import FreeFamilySpec

    p = Path(text)
    data = json.loads(p.read_text()) if p.exists() else json.loads(text)
    return FreeFamilySpec.from_json(data, cap=cap)


def cmd_model(run: _Run) -> int:
    from .free_models import DerivedMoments, word_moment

    a = run.args
    spec = _load_spec(a.spec, run.cfg.cap)
    w = parse_word(a.word)
    payload = {"word": [str(x) for x in w], "moment": word_moment(spec, w)}
    if a.cumulant:
        # cumulant of the letters themselves as separate variables
        dm = DerivedMoments(spec, [(x,) for x in w])
        payload["cumulant"] = dm.cumulant(tuple(range(len(w))))
    run.emit(payload)
    return EXIT_OK


# thin ------------------------------------------------------------------------


def _parse_value(text: str):
    """Exact scalar, complex float, or an algebraic expression such as ``(1+sqrt(-7))/2``."""
    try:
        return parse_scalar(text)
    except ValueError:
        import sympy

        try:
            return sympy.sympify(text, rational=True)
        except (sympy.SympifyError, TypeError) as exc:
            raise PreconditionError(f"cannot parse value {text!r}") from exc


def cmd_thin(run: _Run) -> int:
    from .thinning import categorical_thinning, reconstruct_from_marginal, reconstruct_rate_one, verify_thinning

    a = run.args
    order = a.order or run.cfg.order
    if a.action == "verify":
        rep = verify_thinning(parse_scalar(a.rate), parse_scalar(a.jump), parse_scalar(a.p), order, a.mixed_order, run.cfg.cap)
        run.emit(rep.to_dict())
        return EXIT_OK if (rep.free or not a.expect_free) else EXIT_FAIL
    if a.action == "categorical":
        rep = categorical_thinning(parse_scalar(a.rate), parse_list(a.probs), order, parse_scalar(a.jump), a.mixed_order, run.cfg.cap)
        run.emit(rep.to_dict())
        return EXIT_OK if (rep.free or not a.expect_free) else EXIT_FAIL
    if a.marginal:
        trace = reconstruct_from_marginal(parse_scalar(a.z), parse_scalar(a.jump), order, run.cfg.cap)
    else:
        trace = reconstruct_rate_one(_parse_value(a.z), order, cap=run.cfg.cap)
    run.emit(trace.to_dict())
    return EXIT_OK


# roots -----------------------------------------------------------------------


def cmd_roots(run: _Run) -> int:
    from .qn_roots import figure1_rows, root_checks, rows_to_csv, rows_to_svg

    a = run.args
    eps = a.eps or run.cfg.eps_root
    if a.action == "figure1":
        rows = figure1_rows(a.nmax, eps)
        csv_path = run.write_text(a.csv, rows_to_csv(rows))
        svg_path = run.write_text(a.svg, rows_to_svg(rows, version=__version__))
        run.emit({"nmax": a.nmax, "rows": len(rows), "csv": str(csv_path), "svg": str(svg_path)})
        return EXIT_OK
    rep = root_checks(a.nmax, eps, n_limit=max(64, a.nmax) if a.force else 64)
    run.emit(
        {
            "ok": rep.ok,
            "rows": [
                {
                    "n": r.n,
                    "roots": r.n_roots,
                    "real_roots": [z.real for z in r.real_roots],
                    "real_ok": r.real_ok,
                    "half_line_count": r.half_line_count,
                    "half_line_required": r.half_line_required,
                    "half_line_ok": r.half_line_ok,
                    "r_leading_negative": r.r_leading_negative,
                    "r_residual": r.r_residual,
                }
                for r in rep.rows
            ],
        }
    )
    return EXIT_OK if rep.ok else EXIT_FAIL


# rmt -------------------------------------------------------------------------


def cmd_rmt(run: _Run) -> int:
    from dataclasses import asdict

    from .rmt import EnsembleConfig, converse_sweep, parse_spectrum, run_experiment

    a = run.args
    c = run.cfg
    spectrum = parse_spectrum(a.spectrum) if a.spectrum else None
    base = EnsembleConfig(
        n=a.n or c.mc_n,
        m=a.m or c.mc_m,
        p=a.p,
        trials=a.trials or c.mc_trials,
        seed=c.seed if a.seed is None else a.seed,
        entry_law=a.entry_law,
        spectrum=spectrum,
        workers=a.workers,
    )
    if a.action == "run":
        rep = run_experiment(base, a.K, c.cap)
        payload = rep.to_dict()
        payload.pop("seconds")  # keep the JSON byte-identical across runs
        run.emit(payload)
        return EXIT_OK
    sizes = [int(s) for s in a.sizes.split(",")]
    spectra = [spectrum] if spectrum is not None else [None]
    rows = converse_sweep(base, spectra, sizes, K=a.K)
    run.emit({"rows": [asdict(r) for r in rows]})
    return EXIT_OK


# classical -------------------------------------------------------------------


def cmd_classical(run: _Run) -> int:
    from .classical import CountDistribution, categorical_split, compound, parse_pmf, split_joint

    a = run.args
    N = CountDistribution.parse(a.dist, a.cutoff)
    if a.action == "split":
        probs = parse_list(a.p)
        rep = split_joint(N, probs[0], a.cutoff) if len(probs) == 1 else categorical_split(N, probs, a.cutoff)
        run.emit(rep.to_dict())
    else:
        run.emit(compound(N, parse_pmf(a.x), a.cutoff).to_dict())
    return EXIT_OK


# verify-all ------------------------------------------------------------------


def cmd_verify_all(run: _Run) -> int:
    from .acceptance import run_all

    ids = [s.strip() for s in run.args.only.split(",")] if run.args.only else None
    results = run_all(quick=run.args.quick, ids=ids)
    for r in results:
        print(r.line(), file=sys.stderr)
    payload = {"quick": run.args.quick, "criteria": [r.to_dict() for r in results], "passed": all(r.passed for r in results)}
    for c in payload["criteria"]:
        c.pop("seconds")
    run.emit(payload)
    return EXIT_OK if payload["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="freethin", description="Free Poisson thinning toolkit")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output directory (default from config: out)")
    p.add_argument("--cap", type=int, help="lattice enumeration cap")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def json_opt(sp):
        sp.add_argument(
            "--json", nargs="?", const="", default=None, metavar="FILE",
            help="JSON is always printed; with FILE it is also written there (relative to --out)",
        )

    nc = sub.add_parser("nc", help="non-crossing partitions")
    ncs = nc.add_subparsers(dest="action", required=True, parser_class=_Parser)
    e = ncs.add_parser("enum")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--list", action="store_true", help="include all elements")
    e.add_argument("--format", choices=["json", "text"], default="json")
    k = ncs.add_parser("kreweras")
    k.add_argument("--pi", required=True, help='blocks like "1,3|2|4"')
    k.add_argument("--n", type=int)
    m = ncs.add_parser("moebius")
    m.add_argument("--pi", required=True)
    m.add_argument("--sigma", required=True)
    m.add_argument("--n", type=int)
    for sp in (e, k, m):
        json_opt(sp)

    cu = sub.add_parser("cumulants", help="moment <-> free cumulant transforms")
    cus = cu.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("m2k", "k2m"):
        sp = cus.add_parser(name)
        sp.add_argument("--values", required=True, help='comma list, e.g. "1,2,5"')
        json_opt(sp)

    mo = sub.add_parser("model", help="word moments in free families")
    mos = mo.add_subparsers(dest="action", required=True, parser_class=_Parser)
    wm = mos.add_parser("word-moment")
    wm.add_argument("--spec", required=True, help="family spec: JSON file or inline JSON")
    wm.add_argument("--word", required=True, help='e.g. "P,B,P,1-B" or "C:1,C:2"')
    wm.add_argument("--cumulant", action="store_true", help="also report the free cumulant of the letters")
    json_opt(wm)

    th = sub.add_parser("thin", help="free thinning verifiers")
    ths = th.add_subparsers(dest="action", required=True, parser_class=_Parser)
    v = ths.add_parser("verify")
    v.add_argument("--rate", default="1")
    v.add_argument("--jump", default="1")
    v.add_argument("--p", required=True)
    v.add_argument("--order", type=int)
    v.add_argument("--mixed-order", type=int)
    v.add_argument("--expect-free", action="store_true", help="exit 1 when mixed cumulants do not vanish")
    r = ths.add_parser("reconstruct")
    r.add_argument("--p", "--z", dest="z", required=True, help="phi(b), may be complex or algebraic; with --marginal, the thinning probability")
    r.add_argument("--order", type=int)
    r.add_argument("--marginal", action="store_true", help="solve from the marginal of p*b instead")
    r.add_argument("--jump", default="1")
    c = ths.add_parser("categorical")
    c.add_argument("--rate", default="1")
    c.add_argument("--jump", default="1")
    c.add_argument("--p", "--probs", dest="probs", required=True, help='probability vector, e.g. "1/2,1/3,1/6"')
    c.add_argument("--order", type=int)
    c.add_argument("--mixed-order", type=int)
    c.add_argument("--expect-free", action="store_true")
    for sp in (v, r, c):
        json_opt(sp)

    ro = sub.add_parser("roots", help="zeros of 1 - z^n - (1-z)^n")
    ros = ro.add_subparsers(dest="action", required=True, parser_class=_Parser)
    f1 = ros.add_parser("figure1")
    f1.add_argument("--nmax", type=int, default=32)
    f1.add_argument("--csv", default="figure1.csv")
    f1.add_argument("--svg", default="figure1.svg")
    f1.add_argument("--eps", type=float)
    ck = ros.add_parser("check")
    ck.add_argument("--nmax", type=int, default=32)
    ck.add_argument("--eps", type=float)
    ck.add_argument("--force", action="store_true", help="allow nmax above 64")
    for sp in (f1, ck):
        json_opt(sp)

    rm = sub.add_parser("rmt", help="Monte Carlo quadratic forms")
    rms = rm.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("run", "sweep"):
        sp = rms.add_parser(name)
        sp.add_argument("--n", type=int)
        sp.add_argument("--m", type=int)
        sp.add_argument("--p", type=float, default=0.5)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--K", type=int, default=4 if name == "run" else 2)
        sp.add_argument("--spectrum", help='diagonal of B as "value:weight,..."')
        sp.add_argument("--entry-law", default="gaussian", choices=["gaussian", "rademacher"])
        sp.add_argument("--workers", type=int, default=1)
        if name == "sweep":
            sp.add_argument("--sizes", default="200,400")
        json_opt(sp)

    cl = sub.add_parser("classical", help="exact classical thinning tables")
    cls = cl.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = cls.add_parser("split")
    s.add_argument("--dist", required=True, help="poisson:2, geometric:0.5 or custom:...")
    s.add_argument("--p", required=True, help="one probability, or a comma list for a k-way split")
    s.add_argument("--cutoff", type=int, default=60)
    co = cls.add_parser("compound")
    co.add_argument("--dist", required=True)
    co.add_argument("--x", required=True, help='pmf of X as "value:prob,..."')
    co.add_argument("--cutoff", type=int, default=80)
    for sp in (s, co):
        json_opt(sp)

    va = sub.add_parser("verify-all", help="run the acceptance criteria")
    va.add_argument("--quick", action="store_true", help="shrink the Monte Carlo checks")
    va.add_argument("--only", help="comma list of criterion ids")
    json_opt(va)
    return p


COMMANDS = {
    "nc": cmd_nc,
    "cumulants": cmd_cumulants,
    "model": cmd_model,
    "thin": cmd_thin,
    "roots": cmd_roots,
    "rmt": cmd_rmt,
    "classical": cmd_classical,
    "verify-all": cmd_verify_all,
}


def main(argv: list | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = Config.load(args.config, out=args.out, cap=args.cap)
        run = _Run(args, cfg, argv)
        code = COMMANDS[args.command](run)
        run.finish()
        return code
    except ResourceBoundError as exc:
        _report_error("resource_bound", str(exc))
        return EXIT_RESOURCE
    except SingularPivotError as exc:
        _report_error("singular_pivot", str(exc), step=exc.step)
        return EXIT_FAIL
    except NumericalError as exc:
        _report_error("numerical", str(exc), diagnostics=to_json(exc.diagnostics))
        return EXIT_FAIL
    except (PreconditionError, ValueError, json.JSONDecodeError) as exc:
        _report_error("usage", str(exc))
        return EXIT_USAGE
    except FreeThinError as exc:
        _report_error("failure", str(exc))
        return EXIT_FAIL
    except OSError as exc:
        _report_error("io", str(exc))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
