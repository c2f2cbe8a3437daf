"""Command-line front end.

Subcommands: compute, sweep, report, partition, embed, synth. Every run
writes its artifacts into ``--out``; reruns on the same input produce
byte-identical files.

Exit codes: 0 success (warnings allowed), 1 usage error, 2 data error,
3 solver error. Errors are also written as JSON to stderr and to
``<out>/error.json``.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import reports, synth
from .embedding import diffusion_coordinates
from .errors import ComplexityError, DataError, TooDegenerateError
from .graph_partition import (
    BRUTE_FORCE_MAX_N,
    cut_value,
    eigengap,
    min_ncut_ties,
    ncut_value,
    partition_from_scores,
)
from .incidence import COMPARISONS, MEASURES, binarize, compute_scores, prune
from .ingestion import read_covariate, read_panel
from .spectral_core import build_mhat, build_mtilde, eci, eigenpairs, pci
from .stats import log_target, pearson

SYNTH_KINDS = ("nested", "blocks")


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    input: Path
    out: Path
    measure: str = "rca"
    threshold: float = 1.0
    comparison: str = "strict_greater"
    population: Path | None = None
    target: Path | None = None
    restrict_to_largest_component: bool = True
    seed: int = 0

    def validate(self):
        if self.threshold < 0:
            raise UsageError(f"--threshold must be >= 0, got {self.threshold}")
        if self.measure == "rca_pop" and self.population is None:
            raise UsageError("--measure rca_pop requires --population")
        if self.measure != "rca_pop" and self.population is not None:
            raise UsageError("--population is only used with --measure rca_pop")
        for name in ("input", "population", "target"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise DataError(f"--{name} file not found: {path}")

    def to_dict(self):
        return {
            "input": Path(self.input).name,
            "measure": self.measure,
            "threshold": self.threshold,
            "comparison": self.comparison,
            "population": None if self.population is None else Path(self.population).name,
            "target": None if self.target is None else Path(self.target).name,
            "restrict_to_largest_component": self.restrict_to_largest_component,
        }


def parse_thresholds(text):
    """``a:b:step`` (inclusive of ``b``), a comma list, or a single value."""
    try:
        if ":" in text:
            a, b, step = (float(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            count = int(np.floor((b - a) / step + 1e-9)) + 1
            values = [round(a + i * step, 12) for i in range(count)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --thresholds {text!r}; expected a:b:step with step > 0") from None
    if not values or any(v < 0 for v in values):
        raise UsageError(f"bad --thresholds {text!r}; values must be >= 0")
    return values


class Analysis:
    """Panel -> scores -> incidence -> pruned incidence -> spectra and indices."""

    def __init__(self, cfg: RunConfig, threshold=None, need_k=None):
        self.cfg = cfg
        self.panel, self.validation = read_panel(cfg.input)
        self.population = (
            read_covariate(cfg.population, "population") if cfg.population else None
        )
        self.target = read_covariate(cfg.target, "target") if cfg.target else None
        self.scores = compute_scores(self.panel, cfg.measure, self.population)
        self.need_k = need_k
        self.set_threshold(cfg.threshold if threshold is None else threshold)

    def set_threshold(self, threshold):
        self.threshold = threshold
        raw = binarize(self.scores, threshold, self.cfg.comparison)
        self.incidence, self.prune_report = prune(raw, self.cfg.restrict_to_largest_component)
        inc = self.incidence
        n_a, n_i = inc.shape
        k_a = min(n_a, max(6, self.need_k or 0))
        k_i = min(n_i, 6)
        self.spectrum_actor = eigenpairs(build_mtilde(inc), k=k_a, seed=self.cfg.seed)
        self.spectrum_item = eigenpairs(build_mhat(inc), k=k_i, seed=self.cfg.seed)
        self.eci = eci(inc, spectrum=self.spectrum_actor)
        self.pci = pci(inc, eci_scores=self.eci, spectrum=self.spectrum_item)

    def correlations(self):
        inc = self.incidence
        out = {"n_actors": inc.shape[0], "threshold": self.threshold}
        out["corr_eci_diversity"] = _safe_corr(self.eci.raw, inc.diversity)
        if self.target is not None:
            logt = log_target(self.target.aligned(inc.actor_labels))
            out["corr_eci_log_target"] = _safe_corr(self.eci.raw, logt)
            out["corr_diversity_log_target"] = _safe_corr(inc.diversity, logt)
        return out


def _safe_corr(x, y):
    try:
        return pearson(x, y)
    except DataError as exc:
        warnings.warn(f"correlation not reported: {exc}")
        return None


def _scores_doc(scores, degree, degree_name):
    return {
        "kind": scores.kind,
        "eigenvalue": scores.eigenvalue,
        "degenerate": bool(scores.degenerate),
        "top_multiplicity": int(scores.top_multiplicity),
        "scores": reports.scores_records(scores, degree, degree_name),
    }


def cmd_compute(cfg: RunConfig, args):
    an = Analysis(cfg)
    out = cfg.out
    inc = an.incidence
    reports.write_json(out / "scores_actors.json", _scores_doc(an.eci, inc.diversity, "diversity"))
    reports.write_json(out / "scores_items.json", _scores_doc(an.pci, inc.ubiquity, "ubiquity"))
    reports.write_json(
        out / "prune_report.json",
        {
            "config": cfg.to_dict(),
            "validation": an.validation.to_dict(),
            "prune": an.prune_report.to_dict(),
        },
    )
    gap = eigengap(an.spectrum_actor)
    reports.write_json(
        out / "spectrum.json",
        {
            "actor": an.spectrum_actor.to_dict(),
            "item": an.spectrum_item.to_dict(),
            "eigengap": gap.to_dict(),
        },
    )
    if an.target is not None:
        reports.write_json(out / "correlations.json", an.correlations())
    return 0


def cmd_sweep(cfg: RunConfig, args):
    thresholds = parse_thresholds(args.thresholds)
    an = None
    rows = []
    for th in thresholds:
        row = {"threshold": th}
        try:
            if an is None:
                an = Analysis(cfg, threshold=th)
            else:
                an.set_threshold(th)
        except TooDegenerateError as exc:
            row.update(error=str(exc), degenerate=None, n_actors=0, n_items=0)
            row.update(corr_eci_diversity=None, corr_eci_log_target=None)
            rows.append(row)
            continue
        corr = an.correlations()
        row.update(
            error=None,
            degenerate=bool(an.eci.degenerate),
            n_actors=an.incidence.shape[0],
            n_items=an.incidence.shape[1],
            corr_eci_diversity=corr["corr_eci_diversity"],
            corr_eci_log_target=corr.get("corr_eci_log_target"),
        )
        rows.append(row)
    if all(r["degenerate"] is not False for r in rows):
        warnings.warn("every threshold in the sweep is degenerate or failed")
    reports.write_json(
        cfg.out / "sweep.json", {"config": cfg.to_dict(), "rows": rows}
    )
    cols = [
        "threshold",
        "n_actors",
        "n_items",
        "degenerate",
        "corr_eci_log_target",
        "corr_eci_diversity",
        "error",
    ]
    reports.write_csv(
        cfg.out / "sweep.csv",
        cols,
        [["" if r[c] is None else r[c] for c in cols] for r in rows],
    )
    return 0


def cmd_report(cfg: RunConfig, args):
    an = Analysis(cfg)
    inc = an.incidence
    out = cfg.out
    if an.eci.degenerate or an.pci.degenerate:
        warnings.warn("degenerate scores: rankings suppressed")
    else:
        rows = []
        for side, scores, degree in (
            ("actor", an.eci, inc.diversity),
            ("item", an.pci, inc.ubiquity),
        ):
            for section, r in reports.top_bottom(reports.rankings(scores, degree), args.top_n):
                rows.append([side, section, r.rank, r.label, r.raw, r.standardized, r.degree])
        reports.write_csv(
            out / "rankings_top_bottom.csv",
            ["side", "section", "rank", "label", "raw", "standardized", "degree"],
            rows,
        )
    r_eci, c_pci = reports.eci_pci_order(inc, an.eci, an.pci)
    reports.write_csv(out / "matrix_eci_pci.csv", *reports.reordered_rows(inc, r_eci, c_pci))
    r_div, c_ubi = reports.diversity_ubiquity_order(inc)
    reports.write_csv(
        out / "matrix_diversity_ubiquity.csv", *reports.reordered_rows(inc, r_div, c_ubi)
    )
    (out / "heatmap.svg").write_text(
        reports.heatmap_svg(inc, r_eci, c_pci, title="M sorted by ECI (rows) and PCI (columns)"),
        encoding="utf-8",
    )
    (out / "heatmap_diversity_ubiquity.svg").write_text(
        reports.heatmap_svg(
            inc, r_div, c_ubi, title="M sorted by diversity (rows) and ubiquity (columns)"
        ),
        encoding="utf-8",
    )
    return 0


def _partition_doc(S, part):
    return {
        "side_a": part.side_a,
        "side_b": part.side_b,
        "cut": cut_value(S, part),
        "ncut": ncut_value(S, part),
    }


def cmd_partition(cfg: RunConfig, args):
    an = Analysis(cfg)
    S = build_mtilde(an.incidence).similarity
    part = partition_from_scores(an.eci)
    doc = {
        "labels": list(S.labels),
        "assignment": ["A" if x else "B" for x in part.assignment],
        "lambda2": an.eci.eigenvalue,
        "degenerate": bool(an.eci.degenerate),
        "spectral": _partition_doc(S, part),
        "brute_force": None,
        "eigengap": eigengap(an.spectrum_actor).to_dict(),
    }
    if S.n <= BRUTE_FORCE_MAX_N:
        ties, best = min_ncut_ties(S)
        doc["brute_force"] = {
            "ncut": best,
            "optimum": _partition_doc(S, ties[0]),
            "ties": [_partition_doc(S, t) for t in ties],
        }
    reports.write_json(cfg.out / "partition.json", doc)
    return 0


def cmd_embed(cfg: RunConfig, args):
    if args.t < 0:
        raise UsageError(f"--t must be >= 0, got {args.t}")
    if args.dims < 1:
        raise UsageError(f"--dims must be >= 1, got {args.dims}")
    an = Analysis(cfg, need_k=args.dims + 1)
    n = an.incidence.shape[0]
    if args.dims >= n:
        raise DataError(f"--dims must be <= n - 1 = {n - 1}, got {args.dims}")
    emb = diffusion_coordinates(an.spectrum_actor, args.t, args.dims)
    # every axis divided by |lambda_2|^t, the dominant scale
    scale = abs(an.spectrum_actor.eigenvalues[1]) ** args.t
    rescaled = emb.coordinates / scale if scale > 0 else np.full(emb.coordinates.shape, np.nan)
    dims = range(1, args.dims + 1)
    header = ["label"] + [f"dim{j}" for j in dims] + [f"dim{j}_rescaled" for j in dims]
    rows = [
        [lab] + emb.coordinates[i].tolist() + rescaled[i].tolist()
        for i, lab in enumerate(emb.labels)
    ]
    reports.write_csv(cfg.out / "embedding.csv", header, rows)
    reports.write_json(
        cfg.out / "embedding.json",
        {
            "construction": emb.construction,
            "t": emb.t,
            "dims": args.dims,
            "eigenvalues": emb.eigenvalues,
            "axis_scale": scale,
            "labels": list(emb.labels),
            "coordinates": emb.coordinates,
        },
    )
    return 0


def cmd_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "nested":
        panel, target, pop = synth.nested_panel(args.actors, args.items, args.seed)
        (out / "panel.csv").write_text(panel.to_csv(), encoding="utf-8")
        (out / "target.csv").write_text(target.to_csv(), encoding="utf-8")
        (out / "population.csv").write_text(pop.to_csv(), encoding="utf-8")
        files = ["panel.csv", "population.csv", "target.csv"]
        truth = None
    else:
        half = max(args.actors // 2, 2)
        panel, blocks = synth.planted_block_panel(
            (half, max(args.actors - half, 2)), max(args.items // 2, 2), args.cross, args.seed
        )
        (out / "panel.csv").write_text(panel.to_csv(), encoding="utf-8")
        files = ["panel.csv"]
        truth = dict(zip(panel.actor_labels, blocks.tolist()))
    reports.write_json(
        out / "synth.json",
        {
            "kind": args.kind,
            "seed": args.seed,
            "n_actors": panel.shape[0],
            "n_items": panel.shape[1],
            "files": files,
            "blocks": truth,
        },
    )
    return 0


COMMANDS = {
    "compute": cmd_compute,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "partition": cmd_partition,
    "embed": cmd_embed,
}


def _add_common(p):
    p.add_argument("--input", required=True, type=Path, help="long CSV panel: actor,item,value")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--measure", choices=MEASURES, default="rca")
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--comparison", choices=COMPARISONS, default="strict_greater")
    p.add_argument("--population", type=Path, help="entity,value CSV (required for rca_pop)")
    p.add_argument("--target", type=Path, help="entity,value CSV, e.g. income per capita")
    p.add_argument(
        "--no-largest-component",
        dest="largest",
        action="store_false",
        help="keep every connected component (the scores may then be degenerate)",
    )
    p.add_argument("--seed", type=int, default=0, help="seed of the iterative eigensolver")


def build_parser():
    parser = UsageParser(prog="econcomplex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    p = sub.add_parser("compute", help="ECI/PCI scores, spectrum and prune report")
    _add_common(p)
    p = sub.add_parser("sweep", help="correlations over a range of thresholds")
    _add_common(p)
    p.add_argument("--thresholds", required=True, help="a:b:step, inclusive")
    p = sub.add_parser("report", help="rankings, sorted matrices and heatmaps")
    _add_common(p)
    p.add_argument("--top-n", type=int, default=10)
    p = sub.add_parser("partition", help="spectral and brute-force normalized cuts")
    _add_common(p)
    p = sub.add_parser("embed", help="diffusion-map coordinates")
    _add_common(p)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--dims", type=int, default=2)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--kind", choices=SYNTH_KINDS, default="nested")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--actors", type=int, default=12)
    p.add_argument("--items", type=int, default=12)
    p.add_argument("--cross", type=float, default=0.0, help="off-block value scale (blocks)")
    return parser


def _report_error(exc, out, code):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("line", "entity", "top_multiplicity", "residuals"):
        if getattr(exc, attr, None) is not None:
            doc[attr] = getattr(exc, attr)
    report = getattr(exc, "report", None)
    if report is not None:
        doc["report"] = report.to_dict()
    text = reports.dumps_json(doc)
    sys.stderr.write(text)
    if out is not None:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "error.json").write_text(text, encoding="utf-8")
        except OSError:
            pass


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = getattr(args, "out", None)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if args.command == "synth":
                if args.actors < 2 or args.items < 2:
                    raise UsageError("--actors and --items must be >= 2")
                code = cmd_synth(args)
            else:
                cfg = RunConfig(
                    input=args.input,
                    out=args.out,
                    measure=args.measure,
                    threshold=args.threshold,
                    comparison=args.comparison,
                    population=args.population,
                    target=args.target,
                    restrict_to_largest_component=args.largest,
                    seed=args.seed,
                )
                cfg.validate()
                cfg.out.mkdir(parents=True, exist_ok=True)
                stale = cfg.out / "error.json"
                if stale.exists():
                    stale.unlink()
                code = COMMANDS[args.command](cfg, args)
        except UsageError as exc:
            parser.print_usage(sys.stderr)
            sys.stderr.write(f"econcomplex: error: {exc}\n")
            code = 1
        except ComplexityError as exc:
            code = exc.exit_code
            _report_error(exc, out, code)
        except OSError as exc:
            code = 2
            _report_error(DataError(str(exc)), out, code)
    seen = set()
    for w in caught:
        msg = f"warning: {w.message}"
        if msg not in seen:
            seen.add(msg)
            sys.stderr.write(msg + "\n")
    return code


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
