"""Command-line front end: ``fresnel-tomo <subcommand> ...``.

Exit codes: 0 success, 1 a verification or invariant check failed, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import checks
from .fockspace import fresnel_operator, vector_to_json
from .gridtransform import Grid, GridWavefunction, fresnel_transform
from .phasespace import (
    MOMENTUM,
    POSITION,
    TomogramCurve,
    inverse_radon_fbp,
    radon,
    rotation_sinogram,
    save_sinogram,
    tomogram_via_fresnel,
    wigner,
)
from .states import StateSpec, make_state
from .symplectic import RayMatrix, SRPair, abcd_to_sr, compose, elementary, identity, sr_to_abcd

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

WIGNER_BOUND_SLACK = 1e-6
WIGNER_NORM_TOL = 1e-6
MIN_ANGLES = 8


class UsageError(Exception):
    pass


def _floats(text: str, count: int, what: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {count} comma-separated numbers, got {text!r}")
    if len(values) != count:
        raise UsageError(f"{what}: expected {count} comma-separated numbers, got {len(values)}")
    return values


def parse_matrix(kind: str, text: str) -> RayMatrix:
    """Turn one ``--matrix``, ``--sr`` or ``--elementary`` value into a RayMatrix."""
    if kind == "matrix":
        return RayMatrix(*_floats(text, 4, "--matrix"))
    if kind == "sr":
        sre, sim, rre, rim = _floats(text, 4, "--sr")
        return sr_to_abcd(SRPair(complex(sre, sim), complex(rre, rim)))
    name, _, param = text.partition(":")
    try:
        return elementary(name, float(param) if param else None)
    except TypeError as exc:
        raise UsageError(f"--elementary {text!r}: {exc}")


def parse_grid(text: str) -> Grid:
    L, n = _floats(text, 2, "--grid")
    if n != int(n):
        raise UsageError(f"--grid: point count must be an integer, got {n}")
    return Grid(L=L, n=int(n))


class _MatrixAction(argparse.Action):
    # all matrix flags append to one ordered list so compose sees them in order
    def __call__(self, parser, namespace, values, option_string=None):
        items = list(getattr(namespace, "matrices", None) or [])
        items.append((self.const, values))
        namespace.matrices = items


def _add_state_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--state", help="vacuum | fock:n | coherent:re[,im] | squeezed:lam | cat:re[,im]")
    p.add_argument(
        "--state-file",
        help="state spec JSON ({'kind': ...}) or a wavefunction file (CSV x,re,im or JSON)",
    )


def _add_matrix_args(p: argparse.ArgumentParser) -> None:
    common = dict(action=_MatrixAction, dest="matrices", default=[])
    p.add_argument("--matrix", const="matrix", metavar="A,B,C,D", help="ray matrix entries", **common)
    p.add_argument("--sr", const="sr", metavar="Re s,Im s,Re r,Im r", help="(s, r) parameters", **common)
    p.add_argument(
        "--elementary",
        const="elementary",
        metavar="NAME[:PARAM]",
        help="identity, rotation:theta, free:lambda, lens:kappa, scale:mu",
        **common,
    )


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", default=None, metavar="L,n", help="grid extent and point count (default 10,1024)")
    p.add_argument("--fock-dim", type=int, default=None, metavar="N", help="Fock-space dimension")
    p.add_argument("--out", default=None, metavar="PATH", help="output file (default: stdout where sensible)")
    p.add_argument("--json", action="store_true", help="print a machine-readable summary")
    p.add_argument("--seed", type=int, default=checks.DEFAULT_SEED, help="seed for random matrix suites")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fresnel-tomo",
        description="Fresnel transforms, Wigner functions and tomograms of single-mode states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wigner", help="Wigner function of a state on the (x, p) grid")
    _add_state_args(p)
    _add_common(p)

    p = sub.add_parser("tomogram", help="quadrature distribution for a ray matrix")
    _add_state_args(p)
    _add_matrix_args(p)
    _add_common(p)
    p.add_argument("--route", choices=["fresnel", "radon", "both"], default="fresnel")
    p.add_argument("--mode", choices=[POSITION, MOMENTUM], default=POSITION)

    p = sub.add_parser("radon", help="line integrals of the Wigner function for a ray matrix")
    _add_state_args(p)
    _add_matrix_args(p)
    _add_common(p)
    p.add_argument("--mode", choices=[POSITION, MOMENTUM], default=POSITION)

    p = sub.add_parser("fresnel-apply", help="apply the Fresnel transform of a ray matrix to a state")
    _add_state_args(p)
    _add_matrix_args(p)
    _add_common(p)
    p.add_argument(
        "--representation",
        choices=["grid", "fock"],
        default="grid",
        help="transform the sampled wavefunction or the Fock coefficients",
    )

    p = sub.add_parser("compose", help="compose ray matrices left to right (first flag is leftmost)")
    _add_matrix_args(p)
    _add_common(p)

    p = sub.add_parser("verify", help="run the acceptance checks and report")
    _add_common(p)
    p.add_argument(
        "--check",
        action="append",
        choices=checks.CHECK_NAMES,
        default=None,
        help="run only this check (repeatable; default: all)",
    )

    p = sub.add_parser("reconstruct", help="filtered back-projection from rotation tomograms")
    _add_state_args(p)
    _add_common(p)
    p.add_argument("-m", "--angles", type=int, default=180, help="number of rotation angles in [0, pi)")
    p.add_argument("--route", choices=["fresnel", "radon"], default="fresnel")
    p.add_argument("--sinogram-dir", default=None, help="also write the tomograms here")
    return parser


def _grid(args) -> Grid:
    return Grid() if args.grid is None else parse_grid(args.grid)


def _state(args, grid: Grid) -> GridWavefunction:
    if (args.state is None) == (args.state_file is None):
        raise UsageError("give exactly one of --state or --state-file")
    if args.state is not None:
        return make_state(StateSpec.parse(args.state), grid)
    path = Path(args.state_file)
    if path.suffix == ".json":
        obj = json.loads(path.read_text())
        if "kind" in obj:
            return make_state(StateSpec.from_dict(obj), grid)
        return GridWavefunction.from_json(path.read_text())
    return GridWavefunction.from_csv(path)


def _state_spec(args) -> StateSpec:
    if (args.state is None) == (args.state_file is None):
        raise UsageError("give exactly one of --state or --state-file")
    if args.state is not None:
        return StateSpec.parse(args.state)
    obj = json.loads(Path(args.state_file).read_text())
    if "kind" not in obj:
        raise UsageError("--representation fock needs a state spec, not sampled values")
    return StateSpec.from_dict(obj)


def _single_matrix(args) -> RayMatrix:
    if len(args.matrices) != 1:
        raise UsageError("give exactly one of --matrix, --sr or --elementary")
    return parse_matrix(*args.matrices[0])


def _emit(args, summary: dict, text: str) -> None:
    print(json.dumps(summary) if args.json else text)


def _write_curve(curve: TomogramCurve, out, extra: str | None = None) -> None:
    if out is None:
        curve.write_csv(sys.stdout)
        if extra:
            sys.stdout.write(extra + "\n")
        return
    with open(out, "w", newline="") as fh:
        curve.write_csv(fh)
        if extra:
            fh.write(extra + "\n")


def cmd_wigner(args) -> int:
    grid = _grid(args)
    W = wigner(_state(args, grid))
    if args.out:
        W.save(args.out)
    norm = W.normalization()
    summary = {
        "normalization": norm,
        "min": float(W.values.min()),
        "max": float(W.values.max()),
        "out": args.out,
    }
    ok = abs(norm - 1) <= WIGNER_NORM_TOL and np.abs(W.values).max() <= 1 / np.pi + WIGNER_BOUND_SLACK
    summary["pass"] = bool(ok)
    _emit(args, summary, f"normalization={norm:.12f} min={summary['min']:.12f} max={summary['max']:.12f}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_tomogram(args) -> int:
    grid = _grid(args)
    psi = _state(args, grid)
    m = _single_matrix(args)
    fresnel_curve = None
    if args.route in ("fresnel", "both"):
        fresnel_curve = tomogram_via_fresnel(psi, m, args.mode)
    extra = None
    summary = {"route": args.route, "mode": args.mode, "matrix": m.to_list()}
    if args.route in ("radon", "both"):
        radon_curve = radon(wigner(psi), m, args.mode)
        if fresnel_curve is not None:
            deviation = float(np.max(np.abs(fresnel_curve.values - radon_curve.values)))
            extra = f"# max_deviation={deviation!r}"
            summary["max_deviation"] = deviation
        curve = fresnel_curve if fresnel_curve is not None else radon_curve
    else:
        curve = fresnel_curve
    summary.update(mean=curve.mean(), variance=curve.variance(), normalization=curve.normalization())
    if args.out is None and not args.json:
        _write_curve(curve, None, extra)
    else:
        if args.out:
            _write_curve(curve, args.out, extra)
        _emit(args, summary, json.dumps(summary))
    return EXIT_OK


def cmd_radon(args) -> int:
    grid = _grid(args)
    m = _single_matrix(args)
    curve = radon(wigner(_state(args, grid)), m, args.mode)
    if args.out is None and not args.json:
        _write_curve(curve, None)
    else:
        if args.out:
            _write_curve(curve, args.out)
        summary = {
            "mode": args.mode,
            "matrix": m.to_list(),
            "mean": curve.mean(),
            "variance": curve.variance(),
            "normalization": curve.normalization(),
        }
        _emit(args, summary, json.dumps(summary))
    return EXIT_OK


def cmd_fresnel_apply(args) -> int:
    m = _single_matrix(args)
    if args.representation == "fock":
        N = args.fock_dim or 64
        v = fresnel_operator(m, N) @ make_state(_state_spec(args), N)
        text = vector_to_json(v)
        if args.out:
            Path(args.out).write_text(text)
        else:
            print(text)
        return EXIT_OK
    grid = _grid(args)
    out = fresnel_transform(m, _state(args, grid))
    if args.out:
        out.save(args.out)
    summary = {"matrix": m.to_list(), "norm": out.norm(), "out": args.out}
    if args.out is None and not args.json:
        print(out.to_json())
    else:
        _emit(args, summary, f"norm={out.norm():.12f}")
    return EXIT_OK


def cmd_compose(args) -> int:
    if not args.matrices:
        raise UsageError("give at least one --matrix, --sr or --elementary")
    result = identity()
    for kind, text in args.matrices:
        result = compose(result, parse_matrix(kind, text))
    sr = abcd_to_sr(result)
    summary = {"matrix": result.to_list(), "sr": sr.to_list()}
    if args.out:
        Path(args.out).write_text(json.dumps(summary))
    _emit(
        args,
        summary,
        "A,B,C,D = " + ",".join(repr(v) for v in result.to_list()) + f"\ns = {sr.s!r}\nr = {sr.r!r}",
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    grid = _grid(args)
    results = checks.run_all(seed=args.seed, fock_dim=args.fock_dim, grid=grid, only=args.check)
    report = [r.to_dict() for r in results]
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2))
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        for r in results:
            print(r.line())
            for message in r.warnings:
                print(f"      warning: {message}")
    failed = [r.check for r in results if not r.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    if args.angles < MIN_ANGLES:
        raise UsageError(f"--angles must be at least {MIN_ANGLES}, got {args.angles}")
    grid = _grid(args)
    psi = _state(args, grid)
    W = wigner(psi)
    curves = rotation_sinogram(psi, args.angles, route=args.route, W=W)
    if args.sinogram_dir:
        save_sinogram(curves, args.sinogram_dir)
    recon = inverse_radon_fbp(curves, grid)
    if args.out:
        recon.save(args.out)
    linf = float(np.max(np.abs(recon.values - W.values)))
    center = float(recon.value_at(0.0, 0.0))
    summary = {"angles": args.angles, "linf_error": linf, "center_value": center, "out": args.out}
    _emit(args, summary, f"angles={args.angles} linf_error={linf:.6e} W(0,0)={center:.6f}")
    return EXIT_OK


COMMANDS = {
    "wigner": cmd_wigner,
    "tomogram": cmd_tomogram,
    "radon": cmd_radon,
    "fresnel-apply": cmd_fresnel_apply,
    "compose": cmd_compose,
    "verify": cmd_verify,
    "reconstruct": cmd_reconstruct,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"fresnel-tomo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
