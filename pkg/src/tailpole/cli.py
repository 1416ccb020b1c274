"""``tailpole`` command line: pole tables, tail comparisons, contour data and
random-walk checks as CSV or JSON.

Exit status is 0 on success, 2 for bad input or configuration and 3 when a
numerical routine fails. Output is assembled in memory and written only after
every computation succeeded, so a failing run leaves no partial file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import distkit, dpa, exact, grw, roots, scaling
from .errors import InputError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
METHODS = ("exact", "dpa", "corrected", "grw")
THREADS_ENV = "TAILPOLE_THREADS"


class UsageError(InputError):
    pass


@dataclass
class RunConfig:
    command: str
    dist_path: str | None = None
    n: int | None = None
    s: int | None = None
    beta: float | None = None
    k_max: int = 0
    M: int = 0
    N_list: list[int] = field(default_factory=list)
    methods: tuple[str, ...] = ()
    betas: list[float] = field(default_factory=list)
    points: int = 1024
    seeds_only: bool = False
    out_path: str = "-"
    format: str = "csv"
    threads: int | None = None

    def validate(self) -> None:
        if self.command == "tail":
            if not self.N_list:
                raise UsageError("the N list is empty")
            if not self.methods:
                raise UsageError("no methods selected")
            if "corrected" in self.methods and self.M > self.k_max:
                raise UsageError(f"M = {self.M} exceeds k_max = {self.k_max}")
        if self.command == "grw" and not self.betas:
            raise UsageError("no beta values given")
        if self.k_max < 0 or self.M < 0:
            raise UsageError("k_max and M must be nonnegative")


# ---- parsing helpers -------------------------------------------------------

def parse_int_list(text: str) -> list[int]:
    """``"5,10,15"`` or an inclusive range ``"0:20"`` / ``"0:20:5"``;
    pieces may be mixed with commas."""
    out: list[int] = []
    for piece in filter(None, (t.strip() for t in text.split(","))):
        try:
            if ":" in piece:
                parts = [int(x) for x in piece.split(":")]
                if len(parts) not in (2, 3):
                    raise ValueError
                lo, hi, step = parts[0], parts[1], parts[2] if len(parts) == 3 else 1
                if step <= 0:
                    raise ValueError
                out.extend(range(lo, hi + 1, step))
            else:
                out.append(int(piece))
        except ValueError:
            raise UsageError(f"bad integer list item {piece!r}") from None
    if any(v < 0 for v in out):
        raise UsageError("N values must be nonnegative")
    return out


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def resolve_threads(flag: str | None) -> int | None:
    raw = os.environ.get(THREADS_ENV) or flag
    if raw is None:
        return None
    if raw == "auto":
        return os.cpu_count() or 1
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"threads must be an integer or 'auto', got {raw!r}") from None
    if val < 1:
        raise UsageError("threads must be at least 1")
    return val


def _num(x) -> str:
    """Round-trip float text; blanks for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, str)):
        return str(x)
    return repr(float(x))


def _render(rows: list[dict], fmt: str, preamble: dict | None = None) -> str:
    if fmt == "json":
        body = rows if preamble is None else {**preamble, "samples": rows}
        return json.dumps(body, indent=1, allow_nan=False) + "\n"
    buf = io.StringIO()
    if preamble is not None:
        buf.write("# " + ",".join(f"{k}={_num(v)}" for k, v in preamble.items()) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0]) if rows else []
    w.writerow(cols)
    for r in rows:
        w.writerow([_num(r[c]) for c in cols])
    return buf.getvalue()


# ---- commands --------------------------------------------------------------

def _system(cfg: RunConfig) -> scaling.SystemParams:
    d = distkit.load_distribution(cfg.dist_path)
    s = cfg.s if cfg.s is not None else scaling.capacity_for(cfg.n, cfg.beta, d)
    return scaling.derive_params(cfg.n, s, d)


def _pole_row(kind, index, z, residual, asym):
    z, asym = complex(z), complex(asym)
    return {
        "kind": kind, "index": index, "re": z.real, "im": z.imag, "residual": residual,
        "asym_re": asym.real, "asym_im": asym.imag, "abs_err": abs(z - asym),
    }


def _seed_residual(p, z, m):
    return abs(roots.log_equation(p, z, m)[0])


def cmd_poles(cfg: RunConfig) -> str:
    p = _system(cfg)
    zsp_hat, _ = scaling.asym_landmarks(p)
    rows = []
    if cfg.seeds_only:
        for j in range(p.s):
            z = scaling.asym_interior_zero(p, j)
            rows.append(_pole_row("interior", j, z, _seed_residual(p, z, j), z))
        for k in range(-cfg.k_max, cfg.k_max + 1):
            z = scaling.asym_exterior_zero(p, k)
            rows.append(_pole_row("exterior", k, z, _seed_residual(p, z, k), z))
        rows.append(_pole_row("saddle", 0, zsp_hat, None, zsp_hat))
        return _render(rows, cfg.format)
    poles = roots.find_poles(p, cfg.k_max, workers=cfg.threads)
    for z in poles.interior:
        rows.append(_pole_row("interior", z.index, z.value, z.residual,
                              scaling.asym_interior_zero(p, z.index)))
    for z in poles.exterior:
        rows.append(_pole_row("exterior", z.index, z.value, z.residual,
                              scaling.asym_exterior_zero(p, z.index)))
    sp = poles.saddle
    rows.append(_pole_row("saddle", 0, sp.value, sp.residual, zsp_hat))
    return _render(rows, cfg.format)


def _rel(approx, ref):
    if approx is None or ref is None or ref == 0:
        return None
    return abs(approx / ref - 1.0)


def cmd_tail(cfg: RunConfig) -> str:
    p = _system(cfg)
    want = set(cfg.methods)
    need_poles = bool(want & {"dpa", "corrected"})
    k_max = cfg.M if "corrected" in want else 0
    poles = roots.find_poles(p, k_max, workers=cfg.threads) if need_poles else None
    front = {}
    if poles is not None:
        for k in range(-k_max, k_max + 1):
            front[k] = dpa.front_factor_exact(p, poles, k)
    sd = exact.stationary_lindley(p) if "exact" in want else None
    corr_col = f"corrected_M{cfg.M}"
    rows = []
    for N in cfg.N_list:
        beta, K, L = grw.map_scalings(p, N)
        ex = exact.tail_exact(sd, N) if sd is not None else None
        dp = dpa.tail_dpa(p, front[0], poles.Z0, N).value if "dpa" in want else None
        co = (dpa.tail_corrected(p, poles, N, cfg.M, front).value
              if "corrected" in want else None)
        gw = grw.grw_tail(beta, K) if "grw" in want else None
        rows.append({
            "N": N, "L": L, "exact": ex, "dpa": dp, corr_col: co, "grw": gw,
            "rel_err_dpa": _rel(dp, ex), "rel_err_corrected": _rel(co, ex),
            "rel_err_grw": _rel(gw, ex),
        })
    return _render(rows, cfg.format)


def cmd_contour(cfg: RunConfig) -> str:
    p = _system(cfg)
    ks = dpa.build_contour_K(p, cfg.points)
    ratios = dpa.bound_ratios(p, ks)
    npts = ks.segment_points.size
    rows = [
        {"piece": "segment" if i < npts else "arc", "re": z.real, "im": z.imag,
         "bound_ratio": float(r)}
        for i, (z, r) in enumerate(zip(ks.points, ratios))
    ]
    head = {"x0": ks.x0, "y0": ks.y0, "xi": ks.xi, "R": ks.R,
            "min_bound_ratio": float(ratios.min())}
    return _render(rows, cfg.format, preamble=head)


def cmd_grw(cfg: RunConfig) -> str:
    rows = []
    for b in cfg.betas:
        if not b > 0 or not math.isfinite(b):
            raise UsageError(f"beta must be positive and finite, got {b!r}")
        spitzer = grw.spitzer_oracle(b)
        if b < grw.SERIES_EDGE:
            series, h = grw.prob_max_zero(b), grw.h_beta(b)
            diff = abs(series - spitzer)
        else:
            series = h = diff = "NA"
        rows.append({"beta": b, "p_max_zero_series": series, "p_max_zero_spitzer": spitzer,
                     "h_beta": h, "abs_diff": diff})
    if cfg.format == "json":
        for r in rows:
            for key, v in r.items():
                if v == "NA":
                    r[key] = None
    return _render(rows, cfg.format)


COMMANDS = {"poles": cmd_poles, "tail": cmd_tail, "contour": cmd_contour, "grw": cmd_grw}


# ---- argument parsing ------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default="-", help="output file, '-' for stdout")
    common.add_argument("--threads", default=None,
                        help=f"worker threads or 'auto'; ${THREADS_ENV} takes precedence")

    system = _Parser(add_help=False)
    system.add_argument("--dist", required=True, help='JSON file {"name": ..., "pmf": [...]}')
    system.add_argument("--n", type=int, required=True, help="number of sources")
    cap = system.add_mutually_exclusive_group(required=True)
    cap.add_argument("--s", type=int, help="capacity per slot")
    cap.add_argument("--beta", type=float, help="set s = ceil(n mu + beta sigma sqrt(n))")

    top = _Parser(prog="tailpole", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("poles", parents=[system, common], help="interior/exterior zeros and saddle")
    sp.add_argument("--k-max", type=int, default=3)
    sp.add_argument("--seed-asymptotics-only", action="store_true",
                    help="emit the asymptotic seeds without Newton polish")

    st = sub.add_parser("tail", parents=[system, common], help="compare tail approximations")
    st.add_argument("--N", dest="N_list", required=True,
                    help="levels: '5,10,20' or inclusive range '0:20[:step]'")
    st.add_argument("--methods", default="exact,dpa",
                    help="comma list from " + ",".join(METHODS) + " or 'all'")
    st.add_argument("--M", type=int, default=0, help="pole pairs for the corrected series")

    sc = sub.add_parser("contour", parents=[system, common], help="samples of the contour K")
    sc.add_argument("--points", type=int, default=1024, help="samples per piece (>= 1024)")

    sg = sub.add_parser("grw", parents=[common], help="random-walk series vs Spitzer")
    sg.add_argument("--beta", dest="betas", required=True, help="comma list of drifts")
    return top


def config_from_args(argv: Sequence[str] | None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command, out_path=ns.out, format=ns.format,
                    threads=resolve_threads(ns.threads))
    if ns.command == "grw":
        cfg.betas = parse_float_list(ns.betas)
    else:
        cfg.dist_path, cfg.n, cfg.s, cfg.beta = ns.dist, ns.n, ns.s, ns.beta
    if ns.command == "poles":
        cfg.k_max, cfg.seeds_only = ns.k_max, ns.seed_asymptotics_only
    elif ns.command == "tail":
        cfg.N_list = parse_int_list(ns.N_list)
        names = [m.strip() for m in ns.methods.split(",") if m.strip()]
        if names == ["all"]:
            names = list(METHODS)
        bad = [m for m in names if m not in METHODS]
        if bad:
            raise UsageError(f"unknown method(s): {', '.join(bad)}")
        cfg.methods = tuple(m for m in METHODS if m in names)
        cfg.M = ns.M
        cfg.k_max = ns.M
    elif ns.command == "contour":
        if ns.points < 1024:
            raise UsageError("--points must be at least 1024")
        cfg.points = ns.points
    cfg.validate()
    return cfg


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
        text = COMMANDS[cfg.command](cfg)
        _emit(text, cfg.out_path)
    except (InputError, OSError, ValueError) as exc:
        # JSONDecodeError is a ValueError
        print(f"tailpole: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - the exit-code contract has no other status
        print(f"tailpole: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
