"""Command-line interface: ``pareto-auction <command> [options]``.

Instances are read as JSON from ``--instance`` (default stdin). Exit status
is 0 on success, 2 when the requested mechanism does not exist (or GAP
returns no certificate), and 1 on any input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import errors
from .classic import lambda_optimal, myerson, randomized_tradeoff, vickrey
from .exact_dp import exact_witness
from .fptas import NoCertificate, eps_pareto, gap_query
from .generators import (
    gen_binary_partition,
    gen_exponential_pareto,
    gen_nonconvex,
    gen_partition_bicriterion,
    gen_partition_welfare,
)
from .matching import build_graph, export_edges
from .model import Instance, Mechanism, ObjectivePoint, format_fraction, to_fraction, validate_instance
from .oracle import count_feasible, mechanism_by_id, objective_cloud, oracle_pareto, upper_hull

EXIT_OK, EXIT_INPUT, EXIT_NONE = 0, 1, 2
FORMATS = ("csv", "json", "svg")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    instance: str = "-"
    output: str = "-"
    format: str = "csv"
    params: dict[str, Any] = field(default_factory=dict)
    plot: str | None = None
    emit_mechanisms: str | None = None


# ---------------------------------------------------------------------------
# I/O helpers


def _read_instance(path: str, stdin) -> Instance:
    try:
        text = stdin.read() if path == "-" else Path(path).read_text()
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read instance: {exc}") from exc
    return validate_instance(raw)


def _decimal(x: Fraction) -> float:
    with localcontext() as ctx:
        ctx.prec = 12
        return float(Decimal(x.numerator) / Decimal(x.denominator))


def _curve_csv(rows: list[tuple[ObjectivePoint, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["welfare", "revenue", "mechanism_id"])
    for p, mid in sorted(rows, key=lambda r: (r[0].welfare, -r[0].revenue)):
        w.writerow([format_fraction(p.welfare), format_fraction(p.revenue), mid])
    return buf.getvalue()


def _curve_json(rows) -> str:
    ordered = sorted(rows, key=lambda r: (r[0].welfare, -r[0].revenue))
    data = [
        {"welfare": format_fraction(p.welfare), "revenue": format_fraction(p.revenue), "mechanism_id": mid}
        for p, mid in ordered
    ]
    return json.dumps(data, indent=2) + "\n"


def render_svg(points: Sequence[ObjectivePoint], title: str = "") -> str:
    """Scatter of the points with their upper convex hull; decimals only here."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "pareto-auction"
    fig, ax = plt.subplots(figsize=(5, 4))
    xs = [_decimal(p.welfare) for p in points]
    ys = [_decimal(p.revenue) for p in points]
    ax.scatter(xs, ys, s=14, color="tab:blue", label="points", zorder=3)
    hull = upper_hull(points) if points else []
    if len(hull) > 1:
        ax.plot([_decimal(p.welfare) for p in hull], [_decimal(p.revenue) for p in hull], color="tab:orange", lw=1, label="upper hull")
    ax.set_xlabel("welfare")
    ax.set_ylabel("revenue")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _write(path: str, text: str, stdout) -> None:
    if path == "-":
        stdout.write(text)
    else:
        Path(path).write_text(text)


def _emit_mechanisms(directory: str, mechs: dict[Any, Mechanism]) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for mid, m in mechs.items():
        (d / f"{mid}.json").write_text(json.dumps(m.to_dict()) + "\n")


def _mechanism_payload(m: Mechanism) -> dict:
    out = m.to_dict()
    out["welfare"] = format_fraction(m.welfare)
    out["revenue"] = format_fraction(m.revenue)
    return out


# ---------------------------------------------------------------------------
# commands


def _param(cfg: RunConfig, name: str) -> Fraction:
    v = cfg.params.get(name)
    if v is None:
        raise InputError(f"--{name.replace('_', '-')} is required")
    return to_fraction(v)


def _single(cfg: RunConfig, m: Mechanism, stdout) -> int:
    if cfg.format == "json":
        _write(cfg.output, json.dumps(_mechanism_payload(m), indent=2) + "\n", stdout)
    elif cfg.format == "svg":
        _write(cfg.output, render_svg([m.objectives], cfg.command), stdout)
    else:
        _write(cfg.output, _curve_csv([(m.objectives, 0)]), stdout)
    if cfg.emit_mechanisms:
        _emit_mechanisms(cfg.emit_mechanisms, {0: m})
    if cfg.plot:
        Path(cfg.plot).write_text(render_svg([m.objectives], cfg.command))
    return EXIT_OK


def _curve(cfg: RunConfig, rows, mechs: dict | None, stdout) -> int:
    if cfg.format == "json":
        _write(cfg.output, _curve_json(rows), stdout)
    elif cfg.format == "svg":
        _write(cfg.output, render_svg([p for p, _ in rows], cfg.command), stdout)
    else:
        _write(cfg.output, _curve_csv(rows), stdout)
    if cfg.emit_mechanisms and mechs is not None:
        _emit_mechanisms(cfg.emit_mechanisms, mechs)
    if cfg.plot:
        Path(cfg.plot).write_text(render_svg([p for p, _ in rows], cfg.command))
    return EXIT_OK


GENERATORS = {
    "nonconvex": lambda nums, opts: gen_nonconvex(),
    "partition-welfare": lambda nums, opts: gen_partition_welfare([int(to_fraction(x)) for x in nums]),
    "partition-bicriterion": lambda nums, opts: gen_partition_bicriterion(nums, opts.get("construction_eps")),
    "exponential": lambda nums, opts: gen_exponential_pareto(int(nums[0]) if nums else 3),
    "binary-partition": lambda nums, opts: gen_binary_partition(nums),
}


def _run_gen(cfg: RunConfig, stdout) -> int:
    family = cfg.params["family"]
    if family not in GENERATORS:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(GENERATORS)}")
    gen = GENERATORS[family](cfg.params.get("numbers") or [], cfg.params)
    _write(cfg.output, json.dumps(gen.instance.to_dict(), indent=2) + "\n", stdout)
    targets = cfg.params.get("targets")
    if targets is None and cfg.output != "-":
        targets = str(Path(cfg.output).with_suffix(".targets.json"))
    if targets:
        sidecar = {"family": family, **gen.targets_dict()}
        Path(targets).write_text(json.dumps(sidecar, indent=2) + "\n")
    return EXIT_OK


def run(cfg: RunConfig, stdin=None, stdout=None) -> int:
    """Execute one command; returns the exit status."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    if cfg.format not in FORMATS:
        raise InputError(f"format must be one of {FORMATS}")
    cmd = cfg.command
    if cmd == "gen":
        return _run_gen(cfg, stdout)
    inst = _read_instance(cfg.instance, stdin)
    if cmd == "vickrey":
        return _single(cfg, vickrey(inst), stdout)
    if cmd == "myerson":
        return _single(cfg, myerson(inst), stdout)
    if cmd == "lambda":
        return _single(cfg, lambda_optimal(inst, _param(cfg, "lambda")), stdout)
    if cmd == "mix":
        mix = randomized_tradeoff(inst, _param(cfg, "target_welfare"))
        p = mix.objectives
        if cfg.format == "json":
            payload = {
                "welfare": format_fraction(p.welfare),
                "revenue": format_fraction(p.revenue),
                "components": [
                    {"probability": format_fraction(q), "mechanism": _mechanism_payload(m)} for m, q in mix.components
                ],
            }
            _write(cfg.output, json.dumps(payload, indent=2) + "\n", stdout)
        else:
            _write(cfg.output, _curve_csv([(p, "mix")]) if cfg.format == "csv" else render_svg([p], "mix"), stdout)
        if cfg.emit_mechanisms:
            _emit_mechanisms(cfg.emit_mechanisms, {k: m for k, (m, _) in enumerate(mix.components)})
        if cfg.plot:
            Path(cfg.plot).write_text(render_svg([p], "mix"))
        return EXIT_OK
    if cmd == "exact":
        objective = cfg.params.get("objective") or "welfare"
        m = exact_witness(inst, objective, _param(cfg, "value"))
        if m is None:
            print(f"no mechanism with {objective} exactly {cfg.params['value']}", file=sys.stderr)
            return EXIT_NONE
        return _single(cfg, m, stdout)
    if cmd == "gap":
        ans = gap_query(inst, (_param(cfg, "w"), _param(cfg, "r")), _param(cfg, "delta"))
        if isinstance(ans, NoCertificate):
            print("no mechanism beats (1 + delta) * (W0, R0)", file=sys.stderr)
            return EXIT_NONE
        return _single(cfg, ans, stdout)
    if cmd == "pareto":
        res = eps_pareto(inst, _param(cfg, "eps"))
        return _curve(cfg, [(p, k) for k, (_, p) in enumerate(res)], {k: m for k, (m, _) in enumerate(res)}, stdout)
    if cmd == "oracle-pareto":
        front = oracle_pareto(inst)
        mechs = {mid: mechanism_by_id(inst, mid) for _, mid in front} if cfg.emit_mechanisms else None
        return _curve(cfg, list(front), mechs, stdout)
    if cmd == "enumerate":
        if cfg.params.get("count_only"):
            _write(cfg.output, f"{count_feasible(inst)}\n", stdout)
            return EXIT_OK
        return _curve(cfg, objective_cloud(inst), None, stdout)
    if cmd == "graph":
        _write(cfg.output, export_edges(build_graph(inst)), stdout)
        return EXIT_OK
    raise InputError(f"unknown command {cmd!r}")  # pragma: no cover - argparse guards this


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pareto-auction", description="Revenue/welfare Pareto curves of single-item auctions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, curve=False):
        sp.add_argument("-i", "--instance", default="-", help="instance JSON (default: stdin)")
        sp.add_argument("-o", "--output", default="-", help="output path (default: stdout)")
        sp.add_argument("--format", choices=FORMATS, default="csv")
        sp.add_argument("--plot", metavar="SVG", help="also write a scatter plot")
        sp.add_argument("--emit-mechanisms", metavar="DIR", help="write allocation matrices as JSON")
        return sp

    common(sub.add_parser("vickrey", help="highest-value auction"))
    common(sub.add_parser("myerson", help="revenue-optimal auction"))
    common(sub.add_parser("lambda", help="maximize revenue + lambda * welfare")).add_argument(
        "--lambda", dest="lambda_", metavar="L", required=True
    )
    common(sub.add_parser("mix", help="best randomized mechanism at a welfare target")).add_argument(
        "--target-welfare", required=True
    )
    sp = common(sub.add_parser("exact", help="mechanism with an exact objective value"))
    sp.add_argument("--objective", choices=("welfare", "revenue"), default="welfare")
    sp.add_argument("--value", required=True)
    sp = common(sub.add_parser("gap", help="GAP query"))
    sp.add_argument("--w", required=True)
    sp.add_argument("--r", required=True)
    sp.add_argument("--delta", required=True)
    common(sub.add_parser("pareto", help="eps-Pareto set")).add_argument("--eps", required=True)
    common(sub.add_parser("oracle-pareto", help="exact Pareto set by enumeration"))
    common(sub.add_parser("enumerate", help="all feasible mechanisms")).add_argument("--count-only", action="store_true")
    sp = sub.add_parser("gen", help="generate an instance family")
    sp.add_argument("family", choices=sorted(GENERATORS))
    sp.add_argument("numbers", nargs="*", help="family parameters (B, A or k)")
    sp.add_argument("--construction-eps", help="perturbation size for partition-bicriterion")
    sp.add_argument("--targets", help="sidecar targets file")
    sp.add_argument("-o", "--output", default="-")
    sp = sub.add_parser("graph", help="matching graph edge list (binary bidders)")
    sp.add_argument("-i", "--instance", default="-")
    sp.add_argument("-o", "--output", default="-")
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    params = {
        "lambda": getattr(ns, "lambda_", None),
        "target_welfare": getattr(ns, "target_welfare", None),
        "objective": getattr(ns, "objective", None),
        "value": getattr(ns, "value", None),
        "w": getattr(ns, "w", None),
        "r": getattr(ns, "r", None),
        "delta": getattr(ns, "delta", None),
        "eps": getattr(ns, "eps", None),
        "count_only": getattr(ns, "count_only", False),
        "family": getattr(ns, "family", None),
        "numbers": getattr(ns, "numbers", None),
        "construction_eps": getattr(ns, "construction_eps", None),
        "targets": getattr(ns, "targets", None),
    }
    return RunConfig(
        command=ns.command,
        instance=getattr(ns, "instance", "-"),
        output=getattr(ns, "output", "-"),
        format=getattr(ns, "format", "csv"),
        params=params,
        plot=getattr(ns, "plot", None),
        emit_mechanisms=getattr(ns, "emit_mechanisms", None),
    )


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    try:
        return run(_config(ns))
    except (InputError, errors.AuctionError, TypeError, ValueError, OSError) as exc:
        print(f"pareto-auction: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
