"""Command line front end.

Exit codes: 0 success, 1 invalid input, 2 a mathematical certificate failed,
3 input/output error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .complex import Complex, ComplexError, simplex, simplex_boundary, sphere0, point, validate_complex
from .conley import morse_inequalities, stiefel_orientation
from .flow import (
    BarycentricPoint, FlowError, asymptotic_pair_sample, flow_limits, normal_slice_intersection,
    slice_threshold, trajectory,
)
from .gap import (
    GapError, Subspace, coordinate_graph, decay_bound_check, flow_subspace, gap,
    grassmann_graph_flow, random_subspace, siv_model_demo,
)
from .homology import betti_numbers, torsion
from .orientation import Orientation, OrientationError, orientation_from_order, validate_orientation
from .posetmorse import (
    CWFacePoset, Poset, PosetError, c_plus_minus, check_admissible, cminus_morse_report,
    coherence, face_poset, regular_points,
)

EXIT_OK, EXIT_INVALID, EXIT_FALSIFIED, EXIT_IO = 0, 1, 2, 3


class InvalidInput(Exception):
    pass


class Falsified(Exception):
    def __init__(self, message: str, output: str) -> None:
        super().__init__(message)
        self.output = output


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- loading

def _read_json(path: str) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_complex(spec: str) -> Complex:
    """A JSON file with "facets" (and optional "vertices"), or builtin:NAME.

    Builtins: point, sphere0, simplex:N, boundary:N.
    """
    if spec.startswith("builtin:"):
        name, _, arg = spec[len("builtin:"):].partition(":")
        try:
            if name == "point":
                return point()
            if name == "sphere0":
                return sphere0()
            if name == "simplex":
                return simplex(int(arg))
            if name == "boundary":
                return simplex_boundary(int(arg))
        except ValueError as exc:
            raise InvalidInput(str(exc)) from None
        raise InvalidInput(f"unknown builtin complex {spec!r}")
    data = _read_json(spec)
    if not isinstance(data, dict) or "facets" not in data:
        raise InvalidInput(f"{spec}: expected an object with a 'facets' list")
    return validate_complex(data["facets"], data.get("vertices"))


def load_orientation(K: Complex, args: argparse.Namespace) -> Orientation:
    if getattr(args, "orientation", None):
        data = _read_json(args.orientation)
        return validate_orientation(K, data["edges"])
    if getattr(args, "order", None):
        order = [v.strip() for v in args.order.split(",")]
        if sorted(order) != sorted(K.vertices):
            raise InvalidInput("--order must list every vertex exactly once")
        return orientation_from_order(K, order)
    return orientation_from_order(K, K.vertices)


def parse_times(spec: str) -> list[float]:
    """Either "start:stop:count" or a comma separated list."""
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        return [float(x) for x in spec.split(",")]
    except ValueError:
        raise InvalidInput(f"bad time specification {spec!r}") from None


# ---------------------------------------------------------------- output

def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def dump_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], footer: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def svg_plot(header: Sequence[str], rows: np.ndarray, width: int = 640, height: int = 400) -> str:
    """Polylines of every column against the first; log10 scale for wide positive ranges."""
    rows = np.asarray(rows, dtype=float)
    x = rows[:, 0]
    ys = rows[:, 1:]
    log = bool(np.all(ys > 0) and ys.max() / ys.min() > 1e3)
    if log:
        ys = np.log10(ys)
    pad = 40
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(ys.min()), float(ys.max())
    sx = (width - 2 * pad) / (x1 - x0 or 1.0)
    sy = (height - 2 * pad) / (y1 - y0 or 1.0)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
           'fill="none" stroke="#888"/>']
    for j in range(ys.shape[1]):
        pts = " ".join(f"{pad + (xi - x0) * sx:.2f},{height - pad - (yi - y0) * sy:.2f}"
                       for xi, yi in zip(x, ys[:, j]))
        c = colors[j % len(colors)]
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{pad + 5}" y="{pad + 15 * (j + 1)}" fill="{c}" font-size="12">'
                   f'{header[j + 1]}</text>')
    scale = "log10" if log else "linear"
    out.append(f'<text x="{pad}" y="{height - 10}" font-size="12">{header[0]} '
               f'[{x0:g}, {x1:g}]; y {scale} [{y0:.3g}, {y1:.3g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands

def cmd_complex_info(args: argparse.Namespace) -> str:
    K = load_complex(args.complex)
    rep = {
        "dim": K.dim,
        "f": list(K.f_vector),
        "betti": betti_numbers(K),
        "euler": K.euler_characteristic,
        "torsion": {str(k): v for k, v in torsion(K).items()},
    }
    return dump_json(rep)


def _load_point(K: Complex, args: argparse.Namespace) -> BarycentricPoint:
    if args.point:
        data = _read_json(args.point)
        return BarycentricPoint(tuple(data["carrier"]), tuple(data["coords"]))
    if args.barycenter:
        face = [v.strip() for v in args.barycenter.split(",")]
        return BarycentricPoint.barycenter(K.canonical(face))
    raise InvalidInput("give --point or --barycenter")


def cmd_flow_trace(args: argparse.Namespace) -> str:
    K = load_complex(args.complex)
    O = load_orientation(K, args)
    p = _load_point(K, args)
    rows = trajectory(K, O, p, parse_times(args.times))
    fwd, bwd = flow_limits(K, O, p)
    header = ["t", *K.vertices]
    if args.format == "json":
        return dump_json({"columns": header, "rows": rows.tolist(),
                          "forward_limit": fwd, "backward_limit": bwd})
    return dump_csv(header, rows, [f"forward_limit={fwd}", f"backward_limit={bwd}"])


def cmd_conley(args: argparse.Namespace) -> str:
    K = load_complex(args.complex)
    if args.stiefel:
        st = stiefel_orientation(K)
        K, O = st.subdivision, st.orientation
    else:
        O = load_orientation(K, args)
    rep = morse_inequalities(K, O, star_restricted=not args.literal_link)
    out = rep.to_json()
    out["sum_poly_pretty"] = repr(rep.sum_poly)
    out["space_poly_pretty"] = repr(rep.space_poly)
    text = dump_json(out)
    if not rep.ok:
        raise Falsified("Morse inequality certificate does not exist", text)
    return text


def _load_poset_inputs(args: argparse.Namespace) -> tuple[Poset, CWFacePoset | None, dict]:
    fp = None
    if args.face_poset_of:
        fp = face_poset(load_complex(args.face_poset_of))
        P = fp.poset
    elif args.poset:
        data = _read_json(args.poset)
        P = Poset.from_covers(data["elements"], data["covers"])
        if args.cw:
            cw = _read_json(args.cw)
            fp = CWFacePoset.build(P, cw["dim"], cw.get("meets"))
    else:
        raise InvalidInput("give a poset file or --face-poset-of")
    if args.dim_function:
        if fp is None:
            raise InvalidInput("--dim-function needs a face poset")
        f = {x: float(d) for x, d in fp.dim.items()}
    elif args.function:
        f = _read_json(args.function)["values"]
    else:
        raise InvalidInput("give --function or --dim-function")
    return P, fp, f


def cmd_poset_morse(args: argparse.Namespace) -> str:
    P, fp, f = _load_poset_inputs(args)
    vals = check_admissible(P, f)
    coh = coherence(P, vals)
    cc = c_plus_minus(P, vals)
    reg = regular_points(P, vals)
    out: dict[str, Any] = {
        "admissible": True,
        "coherent": coh.coherent,
        "omega": coh.omega,
        "incoherent_intervals": [list(p) for p in coh.failures],
        "C_plus": cc.c_plus,
        "C_minus": cc.c_minus,
        "regular": {x: r.verdict.value for x, r in reg.items()},
    }
    falsified = False
    if fp is not None:
        try:
            rep = cminus_morse_report(fp, vals)
            out["cminus"] = rep.to_json()
            falsified = not rep.ok
        except PosetError as exc:
            out["cminus"] = {"error": str(exc)}
    text = dump_json(out)
    if falsified:
        raise Falsified("Morse inequality certificate does not exist", text)
    return text


def _matrix(text: str | None) -> np.ndarray | None:
    if text is None:
        return None
    try:
        return np.array(json.loads(text), dtype=float)
    except (json.JSONDecodeError, ValueError):
        raise InvalidInput(f"bad matrix literal {text!r}") from None


def cmd_gap_demo(args: argparse.Namespace) -> str:
    rng = np.random.default_rng(args.seed)
    tgrid = np.round(np.arange(0.0, args.tmax + 0.5 * args.dt, args.dt), 12)
    if args.kind == "siv":
        rep = siv_model_demo(args.a, tgrid)
        header, rows = list(rep.columns), rep.rows
        footer = [f"closed_form_error={rep.closed_form_error!r}",
                  f"ratio_increasing_on_tail={rep.ratio_increasing}"]
    elif args.kind == "decay":
        A = _matrix(args.matrix)
        if A is None:
            if args.random:
                B = rng.standard_normal((args.random, args.random))
                A = B + B.T
                V = random_subspace(args.random, args.random // 2 + 1, rng)
            else:
                A = np.diag([1.0, -1.0])
                V = Subspace.span([1.0, 1.0])
        else:
            V = random_subspace(A.shape[0], A.shape[0] // 2 + 1, rng)
        rep = decay_bound_check(A, V, tgrid)
        header, rows = ["t", "gap", "bound"], rep.rows
        footer = [f"rate={rep.rate!r}", f"slope_norm={rep.slope_norm!r}", f"bound_holds={rep.ok}"]
        if not rep.ok:
            raise Falsified("decay bound violated", dump_csv(header, rows, footer))
    else:
        lam = [float(x) for x in args.lambdas.split(",")]
        I = [int(i) for i in args.index.split(",")]
        n = len(lam)
        S = _matrix(args.S)
        if S is None:
            S = rng.standard_normal((n - len(I), len(I)))
        St = grassmann_graph_flow(I, S, lam, args.t)
        L = coordinate_graph(I, S, n)
        check = gap(coordinate_graph(I, St, n), flow_subspace(np.diag(lam), L, args.t))
        header = ["row", *[f"col{i}" for i in I]]
        rows = [[a, *St[r]] for r, a in enumerate(x for x in range(n) if x not in I)]
        footer = [f"t={args.t!r}", f"gap_vs_flow_subspace={check!r}"]
        if args.format == "json":
            return dump_json({"S_t": St.tolist(), "gap_vs_flow_subspace": check})
        return dump_csv(header, rows, footer)
    if args.format == "svg":
        return svg_plot(header, rows)
    if args.format == "json":
        return dump_json({"columns": header, "rows": np.asarray(rows).tolist(), "notes": footer})
    return dump_csv(header, rows, footer)


def cmd_asymptotic(args: argparse.Namespace) -> str:
    if not 0 <= args.m <= 6:
        raise InvalidInput("m must be between 0 and 6")
    rep = asymptotic_pair_sample(args.m, args.count, args.T, args.seed)
    out = rep.to_json()
    rng = np.random.default_rng(args.seed)
    checks = []
    for k in range(1, args.m):
        wp = np.zeros(args.m + 1)
        wp[k:] = rng.dirichlet(np.ones(args.m + 1 - k))
        wm = np.zeros(args.m + 1)
        wm[: k + 1] = rng.dirichlet(np.ones(k + 1))
        t = max(8.0, slice_threshold(wp, wm, k) + 1.0)
        s = normal_slice_intersection(wp, wm, k, t, tol=args.tol)
        checks.append({"k": k, "t": t, "graph_residual": s.graph_residual,
                       "threshold": s.threshold})
    out["slice_checks"] = checks
    text = dump_json(out)
    if rep.violations:
        raise Falsified(f"{rep.violations} samples with l < k", text)
    return text


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    common.add_argument("--tol", type=float, default=1e-8, help="numerical tolerance")
    common.add_argument("--out", help="write the report into this directory instead of stdout")

    p = _Parser(prog="tameflows", description="Simplicial flows, Conley indices and poset Morse theory.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("complex-info", parents=[common], help="f-vector, Betti numbers, Euler characteristic")
    s.add_argument("complex", help="complex JSON file or builtin:NAME")
    s.add_argument("--format", choices=["json"], default="json")
    s.set_defaults(func=cmd_complex_info)

    def orient_opts(s: argparse.ArgumentParser) -> None:
        g = s.add_mutually_exclusive_group()
        g.add_argument("--orientation", help='JSON file {"edges": [["u", "v"], ...]} meaning u flows to v')
        g.add_argument("--order", help="comma separated vertices, lowest (sink) first")

    s = sub.add_parser("flow-trace", parents=[common], help="trajectory of a point as CSV")
    s.add_argument("complex")
    orient_opts(s)
    s.add_argument("--point", help='JSON file {"carrier": [...], "coords": [...]}')
    s.add_argument("--barycenter", help="comma separated face whose barycenter to flow")
    s.add_argument("--times", default="0:10:11", help='"start:stop:count" or a comma list')
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=cmd_flow_trace)

    s = sub.add_parser("conley", parents=[common], help="unstable links, Morse polynomials, inequalities")
    s.add_argument("complex")
    orient_opts(s)
    s.add_argument("--stiefel", action="store_true", help="use the flow on the barycentric subdivision")
    s.add_argument("--literal-link", action="store_true",
                   help="full subcomplex on the lower neighbours instead of the star-restricted link")
    s.add_argument("--format", choices=["json"], default="json")
    s.set_defaults(func=cmd_conley)

    s = sub.add_parser("poset-morse", parents=[common], help="Morse theory of a function on a poset")
    s.add_argument("poset", nargs="?", help='JSON {"elements": [...], "covers": [["a", "b"], ...]}')
    s.add_argument("--function", help='JSON {"values": {"a": 3.0, ...}}')
    s.add_argument("--cw", help='JSON {"dim": {...}, "meets": [["a", "b", "c"], ...]}')
    s.add_argument("--face-poset-of", help="use the face poset of this complex")
    s.add_argument("--dim-function", action="store_true", help="use f = dim")
    s.add_argument("--format", choices=["json"], default="json")
    s.set_defaults(func=cmd_poset_morse)

    s = sub.add_parser("gap-demo", parents=[common], help="gap tables: decay, siv or grass")
    s.add_argument("kind", choices=["decay", "siv", "grass"])
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--tmax", type=float, default=5.0)
    s.add_argument("--dt", type=float, default=0.5)
    s.add_argument("--matrix", help="symmetric matrix as a JSON literal (decay)")
    s.add_argument("--random", type=int, default=0, help="random symmetric operator of this size (decay)")
    s.add_argument("--lambdas", default="0,1,2,3", help="eigenvalues (grass)")
    s.add_argument("--index", default="0,1", help="index set I (grass)")
    s.add_argument("--S", help="graph matrix as a JSON literal (grass)")
    s.add_argument("--t", type=float, default=1.0, help="time (grass)")
    s.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    s.set_defaults(func=cmd_gap_demo)

    s = sub.add_parser("asymptotic", parents=[common], help="classify limits of (x, flow_T x) pairs")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--T", type=float, default=20.0)
    s.add_argument("--format", choices=["json"], default="json")
    s.set_defaults(func=cmd_asymptotic)
    return p


def _emit(text: str, args: argparse.Namespace) -> None:
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{args.command}.{args.format}").write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
        _emit(text, args)
        return EXIT_OK
    except Falsified as exc:
        try:
            _emit(exc.output, args)
        except OSError:
            pass
        print(f"tameflows: certificate failed: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except OSError as exc:
        print(f"tameflows: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidInput, ComplexError, OrientationError, FlowError, PosetError, GapError,
            KeyError, TypeError, ValueError) as exc:
        print(f"tameflows: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
