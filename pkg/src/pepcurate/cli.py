"""Command-line front end: one verb per curation stage.

Every verb reads files, writes files into ``--out-dir`` and updates the
run manifest there, so stages can be re-run or resumed from their outputs
alone. Warnings are logged to ``<verb>.log`` in the output directory and to
stderr.

Exit codes: 0 ok, 2 parse error, 3 empty result, 4 audit violation,
5 insufficient pool. Other toolkit errors exit with 1.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .cleanse import AlignmentParams, aggregate_duplicates, cluster_report_rows, greedy_cluster
from .config import PipelineConfig, RunManifest
from .enrich import EnrichmentParams, find_enriched_kmers, merge_motifs, write_enrichment_report
from .errors import AuditViolation, CurationError, EmptyClass, EmptyResultError, InputError
from .fingerprint import morgan_fingerprint
from .io import read_fasta, read_json, read_pairs, read_records, read_table, write_json, write_records, write_table
from .negsamp import (
    DistributionSpec,
    build_pool,
    expand_pool_external,
    feature_histogram,
    filter_pool,
    load_expert_groups,
    expert_exclusions_for,
    map_to_canonical,
    ppi_shuffle_negatives,
    run_bdnegsamp,
    shared_range,
    validate_distributions,
    write_handoff,
    write_js_report,
    write_negatives,
)
from .notation import assemble_molecule, convert, fasta_to_biln, parse_biln
from .seqcore import CANONICAL, DatasetRecord, Policy, scalar_features, validate_sequence
from .split import (
    PARTITIONS,
    SplitAssignment,
    SplitParams,
    assign_clusters,
    audit_leakage,
    cold_start_split,
    hybrid_groups,
    identity_groups,
    kmer_groups,
    random_split,
    similarity_components,
    write_audit,
    write_split,
)

log = logging.getLogger("pepcurate")

STRATEGIES = ("random", "identity", "kmer", "hybrid", "ecfp", "cold_start")


class Context:
    def __init__(self, args):
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if getattr(args, "task", None):
            overrides["task_type"] = args.task
        if getattr(args, "peptide_type", None):
            overrides["peptide_type"] = args.peptide_type
        self.config = PipelineConfig.load(args.config, overrides)
        self.out = Path(args.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.workers = max(1, args.workers)
        self.manifest = RunManifest(self.out, self.config)
        self.manifest.data["overrides"] = {k: overrides[k] for k in sorted(overrides)}
        self.warnings: list[str] = []

    def path(self, name: str) -> Path:
        return self.out / name

    def record(self, stage, inputs, outputs, extra=None):
        self.manifest.record(stage, inputs, outputs, self.warnings, extra)

    @property
    def align(self) -> AlignmentParams:
        c = self.config.clean
        return AlignmentParams(c.min_seq_id, c.min_cov, c.cov_mode)

    @property
    def spec(self) -> DistributionSpec:
        n = self.config.negsamp
        return DistributionSpec(n.bins, n.scalar_threshold, n.mer1_threshold, n.mer2_threshold)

    @property
    def enrich_params(self) -> EnrichmentParams:
        e = self.config.enrich
        return EnrichmentParams(e.k, e.alpha, e.min_score, e.min_support, e.min_pos, e.min_jaccard, e.fdr)

    def split_params(self, seed: int) -> SplitParams:
        s = self.config.split
        return SplitParams(s.frac_train, s.frac_valid, s.frac_test, seed)


# =============================================================================
# helpers
# =============================================================================


def _read_dataset(path) -> list[DatasetRecord]:
    try:
        return read_records(path)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None


def _is_binary(records) -> bool:
    labels = {r.label for r in records}
    return bool(labels) and labels <= {0, 1}


def _ensure_nonempty(items, what):
    if not items:
        raise EmptyResultError(f"{what} is empty")


def _motifs(ctx: Context, records):
    """Merged motif clusters from the dataset's own labels (empty if not binary)."""
    if not _is_binary(records):
        warnings.warn("labels are not binary 0/1; motif enrichment skipped", UserWarning)
        return [], []
    pos = [r.sequence for r in records if r.label == 1]
    neg = [r.sequence for r in records if r.label == 0]
    try:
        hits = find_enriched_kmers(pos, neg, ctx.enrich_params, pos_ids=[r.id for r in records if r.label == 1])
    except EmptyClass:
        warnings.warn("one class is empty; motif enrichment skipped", UserWarning)
        return [], []
    return hits, merge_motifs(hits, ctx.enrich_params.min_jaccard)


def _fingerprints(ctx: Context, seqs):
    fc = ctx.config.fingerprint
    out = []
    for s in seqs:
        doc = parse_biln(s) if ctx.config.peptide_type == "non-canonical" else fasta_to_biln(s)
        out.append(morgan_fingerprint(assemble_molecule(doc), fc.radius, fc.width))
    return out


def _read_pool_files(paths) -> dict[str, list[str]]:
    datasets: dict[str, list[str]] = {}
    for p in paths:
        p = Path(p)
        if p.suffix.lower() in (".fa", ".fasta", ".faa"):
            datasets.setdefault(p.stem, []).extend(s for _, s in read_fasta(p))
            continue
        for row in read_table(p):
            seq = (row.get("sequence") or "").strip()
            if not seq:
                continue
            src = (row.get("source") or "").strip() or p.stem
            datasets.setdefault(src, []).append(seq)
    return datasets


# =============================================================================
# verbs
# =============================================================================


def cmd_clean(ctx: Context, args) -> None:
    cfg = ctx.config
    task = cfg.task_type
    if task == "ppi":
        rows = read_pairs(args.input)
        _ensure_nonempty(rows, "input")
        seen, kept = set(), []
        for r in rows:
            key = (r["peptide"], r["protein"])
            if key not in seen:
                seen.add(key)
                kept.append(r)
        _ensure_nonempty(kept, "cleaned pair set")
        write_table(ctx.path("cleaned.csv"), ("id", "peptide", "protein", "label"),
                    ((r["id"], r["peptide"], r["protein"], r["label"]) for r in kept))
        report = {"total": len(rows), "duplicates_removed": len(rows) - len(kept), "unique": len(kept)}
        write_json(ctx.path("clean_report.json"), report)
        ctx.record("clean", {"records": len(rows)}, {"records": len(kept)}, {"report": report})
        return
    records = _read_dataset(args.input)
    _ensure_nonempty(records, "input")
    valid, dropped = [], 0
    policy = Policy(cfg.clean.policy)
    for r in records:
        if cfg.peptide_type == "non-canonical":
            valid.append(r)
            continue
        try:
            seq = validate_sequence(r.sequence, policy, r.id)
        except InputError:
            if policy is not Policy.DROP_RECORD:
                raise
            seq = None
        if seq is None or (cfg.clean.max_len and len(seq) > cfg.clean.max_len):
            dropped += 1
            continue
        valid.append(DatasetRecord(seq.residues, r.label, r.source, r.id, r.unit))
    if dropped:
        warnings.warn(f"{dropped} record(s) dropped by the sequence policy or length limit", UserWarning)
    if task == "regression":
        kept, stats, rows = aggregate_duplicates(valid)
        write_table(ctx.path("aggregation.csv"), ("sequence", "n_measurements", "n_removed", "label"), rows)
        report = {"total": stats.total, "outliers_removed": stats.removed, "unique": stats.unique,
                  "dropped_invalid": dropped}
    else:
        keep_idx: set[int] = set()
        cluster_rows = []
        counts = {}
        for label in sorted({r.label for r in valid}, key=str):
            idx = [i for i, r in enumerate(valid) if r.label == label]
            seqs = [valid[i].sequence for i in idx]
            ca = greedy_cluster(seqs, ctx.align, cfg.clean.linkage)
            keep_idx.update(idx[j] for j in ca.representatives)
            for rid, cid, rep, ident in cluster_report_rows([valid[i].id for i in idx], seqs, ca):
                cluster_rows.append((rid, label, f"{label}_{cid}", rep, ident))
            counts[label] = (len(idx), ca.n_clusters)
        kept = [r for i, r in enumerate(valid) if i in keep_idx]
        write_table(ctx.path("clusters.tsv"),
                    ("record_id", "label", "cluster_id", "representative_id", "identity_to_rep"),
                    cluster_rows, delimiter="\t")
        o_pos, n_pos = counts.get(1, (0, 0))
        o_neg, n_neg = counts.get(0, (0, 0))
        report = {"Origin_pos": o_pos, "New_pos": n_pos,
                  "Filt_ratio_pos": round(1 - n_pos / o_pos, 6) if o_pos else None,
                  "Exp_neg": o_neg, "New_exp_neg": n_neg,
                  "Filt_ratio_neg": round(1 - n_neg / o_neg, 6) if o_neg else None,
                  "dropped_invalid": dropped}
    _ensure_nonempty(kept, "cleaned dataset")
    write_records(ctx.path("cleaned.csv"), kept)
    write_json(ctx.path("clean_report.json"), report)
    ctx.record("clean", {"records": len(records)}, {"records": len(kept)}, {"report": report})


def cmd_negsamp(ctx: Context, args) -> None:
    cfg = ctx.config
    ns = cfg.negsamp
    if cfg.task_type == "ppi":
        rows = [r for r in read_pairs(args.input) if r["label"] in (None, 1)]
        _ensure_nonempty(rows, "positive pair set")
        pairs = [(r["peptide"], r["protein"]) for r in rows]
        neg = ppi_shuffle_negatives(pairs, ns.ppi_ratio, cfg.seed)
        out = [(r["id"], r["peptide"], r["protein"], 1) for r in rows]
        out += [(f"n{i}", p, q, 0) for i, (p, q) in enumerate(neg)]
        write_table(ctx.path("dataset.csv"), ("id", "peptide", "protein", "label"), out)
        ctx.record("negsamp", {"positives": len(rows)}, {"negatives": len(neg)})
        return
    records = _read_dataset(args.input)
    pos_records = [r for r in records if r.label in (None, 1)]
    _ensure_nonempty(pos_records, "positive set")
    raw_pos = [r.sequence for r in pos_records]
    canon_pos = map_to_canonical(raw_pos) if cfg.peptide_type == "non-canonical" else raw_pos
    target = args.target or Path(args.input).stem
    datasets = _read_pool_files(args.pool)
    groups = load_expert_groups(ns.expert_groups)
    expert = expert_exclusions_for(target, groups) | set(args.exclude or [])
    pool = build_pool(datasets, target, canon_pos, expert, ns.overlap_threshold, ctx.align)
    n_built = len(pool)
    pool = filter_pool(pool, canon_pos, ns.filter_identity, ctx.align)
    _ensure_nonempty(pool.sequences, "filtered sampling pool")
    expansion = {}
    if args.external:
        external = [s for _, s in read_fasta(args.external)]
        pool, expansion = expand_pool_external(pool, canon_pos, external, ns.external_coverage,
                                               identity_threshold=ns.filter_identity, params=ctx.align)
    result = run_bdnegsamp(pool, canon_pos, ns.ratio, ctx.spec, cfg.seed, ns.strategies,
                           ns.diversity_weight, ctx.workers)
    if not result.passed:
        warnings.warn("no strategy met every JS threshold; the lowest max-JS set was kept", UserWarning)
    write_negatives(ctx.path("negatives.csv"), result)
    write_js_report(ctx.path("js_report.json"), result)
    pool_report = {"excluded_datasets": pool.excluded_datasets, "raw_members": pool.n_raw,
                   "noncanonical_dropped": pool.n_noncanonical, "duplicates_dropped": pool.n_duplicates,
                   "redundant_dropped": pool.n_redundant, "after_redundancy": n_built,
                   "after_similarity_filter": len(pool) - sum(v["added"] for v in expansion.values()),
                   "external_expansion": {str(k): v for k, v in sorted(expansion.items())},
                   "final_pool": len(pool)}
    write_json(ctx.path("pool_report.json"), pool_report)
    combined = [DatasetRecord(s, 1, r.source or "positive", r.id) for s, r in zip(raw_pos, pos_records)]
    combined += [DatasetRecord(s, 0, src, f"neg{i}") for i, (s, src) in enumerate(zip(result.sequences,
                                                                                       result.sources))]
    write_records(ctx.path("dataset.csv"), combined)
    if cfg.peptide_type == "non-canonical":
        write_handoff(ctx.path("handoff.csv"), result.sequences)
    ctx.record("negsamp", {"positives": len(pos_records), "pool_datasets": len(datasets)},
               {"pool": len(pool), "negatives": len(result.sequences), "dataset": len(combined)},
               {"strategy": result.chosen.negatives.strategy, "pass": result.passed})


def _split_groups(ctx: Context, strategy, records, fps):
    """Clusters, stages and motifs shared by every repeat (clusters None when not cluster-based)."""
    sc = ctx.config.split
    if strategy in ("random", "cold_start"):
        return None, None, []
    if strategy == "ecfp":
        return similarity_components(fps, sc.tau), None, []
    seqs = [r.sequence for r in records]
    if ctx.config.peptide_type == "non-canonical":
        seqs = map_to_canonical(seqs)
    if strategy == "identity":
        return identity_groups(seqs, sc.identity_threshold, ctx.align), None, []
    _, motifs = _motifs(ctx, [DatasetRecord(s, r.label, id=r.id) for s, r in zip(seqs, records)])
    if strategy == "kmer":
        return kmer_groups(seqs, motifs), None, motifs
    clusters, stages = hybrid_groups(seqs, motifs, sc.identity_threshold, ctx.align)
    return clusters, stages, motifs


def cmd_split(ctx: Context, args) -> None:
    cfg = ctx.config
    strategy = args.strategy or cfg.split.strategy
    if strategy not in STRATEGIES:
        raise InputError(f"unknown split strategy {strategy!r}")
    repeats = args.repeats if args.repeats is not None else cfg.split.repeats
    if repeats < 1:
        raise InputError("--repeats must be >= 1")
    pairs = records = None
    if strategy == "cold_start":
        pairs = read_pairs(args.input)
        _ensure_nonempty(pairs, "input")
        ids = [p["id"] for p in pairs]
        seqs = [p["peptide"] for p in pairs]
    else:
        records = _read_dataset(args.input)
        _ensure_nonempty(records, "input")
        ids = [r.id for r in records]
        seqs = [r.sequence for r in records]
    fps = _fingerprints(ctx, seqs) if strategy == "ecfp" else None
    clusters, stages, motifs = _split_groups(ctx, strategy, records, fps)
    # what the audit checks: proteins for cold-start, fingerprints only for ECFP
    identity = cfg.split.identity_threshold
    if strategy == "cold_start":
        audit_seqs = [p["protein"] for p in pairs]
    elif strategy == "ecfp":
        audit_seqs, identity = seqs, None
    elif cfg.peptide_type == "non-canonical":
        audit_seqs = map_to_canonical(seqs)
    else:
        audit_seqs = seqs
    outputs = {}
    for r in range(repeats):
        params = ctx.split_params(cfg.seed + r)
        if strategy == "random":
            sa = random_split(len(seqs), params, ids)
        elif strategy == "cold_start":
            sa = cold_start_split(pairs, cfg.split.identity_threshold, params, ctx.align, ids)
        else:
            sa = assign_clusters(clusters, len(seqs), params, strategy, ids, stages)
        suffix = "" if repeats == 1 else f"_r{r}"
        write_split(ctx.path(f"split{suffix}.csv"), sa)
        report = audit_leakage(sa, audit_seqs, motifs, identity, cfg.split.tau, fingerprints=fps,
                               align=ctx.align)
        write_audit(ctx.path(f"audit{suffix}.json"), report)
        outputs[f"split{suffix}"] = {**sa.counts(), "clean": report["clean"]}
    ctx.record("split", {"records": len(seqs), "strategy": strategy, "repeats": repeats}, outputs)


def cmd_convert(ctx: Context, args) -> None:
    if args.text is not None:
        items = [args.text]
    elif args.input:
        with open(args.input, encoding="utf-8") as fh:
            items = [line.strip() for line in fh if line.strip()]
    else:
        raise InputError("convert needs an input file or --text")
    out = [convert(t, args.src, args.dst) for t in items]
    if args.output:
        Path(args.output).write_text("".join(o + "\n" for o in out), encoding="utf-8")
    else:
        sys.stdout.write("".join(o + "\n" for o in out))
    ctx.record("convert", {"items": len(items), "from": args.src}, {"items": len(out), "to": args.dst})


def cmd_enrich(ctx: Context, args) -> None:
    records = _read_dataset(args.input)
    _ensure_nonempty(records, "input")
    if not _is_binary(records):
        raise InputError("enrichment needs binary 0/1 labels")
    pos = [r for r in records if r.label == 1]
    neg = [r for r in records if r.label == 0]
    seqs_p = [r.sequence for r in pos]
    seqs_n = [r.sequence for r in neg]
    if ctx.config.peptide_type == "non-canonical":
        seqs_p, seqs_n = map_to_canonical(seqs_p), map_to_canonical(seqs_n)
    hits = find_enriched_kmers(seqs_p, seqs_n, ctx.enrich_params, pos_ids=[r.id for r in pos])
    clusters = merge_motifs(hits, ctx.enrich_params.min_jaccard)
    write_enrichment_report(ctx.path("enrichment.csv"), hits)
    write_json(ctx.path("motif_clusters.json"),
               [{"kmers": c.kmers, "support": sorted(str(x) for x in c.support)} for c in clusters])
    ctx.record("enrich", {"positives": len(pos), "negatives": len(neg)},
               {"hits": len(hits), "clusters": len(clusters)})


def cmd_stats(ctx: Context, args) -> None:
    records = _read_dataset(args.input)
    _ensure_nonempty(records, "input")
    seqs = [r.sequence for r in records]
    if ctx.config.peptide_type == "non-canonical":
        seqs = map_to_canonical(seqs)
    if _is_binary(records):
        groups = {"pos": [s for s, r in zip(seqs, records) if r.label == 1],
                  "neg": [s for s, r in zip(seqs, records) if r.label == 0]}
        groups = {k: v for k, v in groups.items() if v}
    else:
        groups = {"all": seqs}
    names = list(groups)
    feats = {g: scalar_features(v) for g, v in groups.items()}
    lengths = {g: Counter(len(s) for s in v) for g, v in groups.items()}
    all_len = sorted(set().union(*lengths.values()))
    write_table(ctx.path("stats_length.csv"), ["length"] + [f"count_{g}" for g in names],
                ([L] + [lengths[g].get(L, 0) for g in names] for L in all_len))
    aa = {}
    for g, v in groups.items():
        c = Counter("".join(v))
        tot = sum(c.values())
        aa[g] = {a: c.get(a, 0) / tot for a in CANONICAL}
    write_table(ctx.path("stats_aa.csv"), ["residue"] + [f"freq_{g}" for g in names],
                ([a] + [aa[g][a] for g in names] for a in CANONICAL))
    bins = ctx.config.negsamp.bins
    rows = []
    for j, feat in enumerate(("length", "charge", "hydrophobicity")):
        lo, hi = shared_range(*[feats[g][:, j] for g in names])
        hists = {g: feature_histogram(feats[g][:, j], bins, (lo, hi)) for g in names}
        edges = np.linspace(lo, hi, bins + 1)
        for b in range(bins):
            rows.append([feat, b, float(edges[b]), float(edges[b + 1])] + [float(hists[g][b]) for g in names])
    write_table(ctx.path("stats_properties.csv"), ["feature", "bin", "lo", "hi"] + [f"frac_{g}" for g in names],
                rows)
    extra = {}
    if set(names) == {"pos", "neg"}:
        rep = validate_distributions(groups["pos"], groups["neg"], ctx.spec, feats["pos"], feats["neg"])
        write_json(ctx.path("stats_js.json"), rep.to_dict())
        extra["js_pass"] = rep.passed
    ctx.record("stats", {"records": len(records)}, {g: len(v) for g, v in groups.items()}, extra)


def cmd_audit(ctx: Context, args) -> None:
    cfg = ctx.config
    rows = list(read_table(args.split))
    _ensure_nonempty(rows, "split file")
    part_of = {r["record_id"]: r["partition"] for r in rows}
    if args.pairs:
        items = read_pairs(args.input)
        ids = [p["id"] for p in items]
        seqs = [p["protein"] for p in items]
        records = None
    else:
        records = _read_dataset(args.input)
        ids = [r.id for r in records]
        seqs = [r.sequence for r in records]
    missing = [i for i in ids if i not in part_of]
    if missing:
        raise InputError(f"{len(missing)} record(s) missing from the split file, e.g. {missing[0]!r}")
    bad = sorted({p for p in part_of.values() if p not in PARTITIONS})
    if bad:
        raise InputError(f"unknown partition label(s) {bad}")
    sa = SplitAssignment([part_of[i] for i in ids], [0] * len(ids), rows[0].get("strategy", ""), ids)
    if cfg.peptide_type == "non-canonical" and records is not None:
        seqs_a = map_to_canonical(seqs)
    else:
        seqs_a = seqs
    if args.motifs:
        motifs = [m["kmers"] for m in read_json(args.motifs)]
    elif records is not None:
        _, motifs = _motifs(ctx, [DatasetRecord(s, r.label, id=r.id) for s, r in zip(seqs_a, records)])
    else:
        motifs = []
    fps = _fingerprints(ctx, seqs) if args.fingerprints else None
    report = audit_leakage(sa, seqs_a, motifs, cfg.split.identity_threshold, cfg.split.tau,
                           fingerprints=fps, align=ctx.align)
    write_audit(ctx.path("audit.json"), report)
    ctx.record("audit", {"records": len(ids)}, {"clean": report["clean"],
                                                 "motif_violations": len(report["motif_violations"]),
                                                 "identity_violations": report["n_identity_violations"],
                                                 "fingerprint_violations": report["n_fingerprint_violations"]})
    if not report["clean"]:
        raise AuditViolation(f"leakage found: {len(report['motif_violations'])} motif, "
                             f"{report['n_identity_violations']} identity, "
                             f"{report['n_fingerprint_violations']} fingerprint violation(s)")


COMMANDS = {
    "clean": cmd_clean, "negsamp": cmd_negsamp, "split": cmd_split, "convert": cmd_convert,
    "enrich": cmd_enrich, "stats": cmd_stats, "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration (keys override the defaults)")
    common.add_argument("--seed", type=int, help="random seed (default from the configuration, 42)")
    common.add_argument("--workers", type=int, default=1, help="worker threads; never changes outputs")
    common.add_argument("--out-dir", default=".", help="directory for outputs and the manifest")

    parser = argparse.ArgumentParser(prog="pepcurate", description="Peptide dataset curation pipeline.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("clean", parents=[common], help="redundancy removal or duplicate aggregation")
    p.add_argument("input")
    p.add_argument("--task", choices=("classification", "regression", "ppi"))
    p.add_argument("--peptide-type", choices=("canonical", "non-canonical"))

    p = sub.add_parser("negsamp", parents=[common], help="distribution-controlled negative sampling")
    p.add_argument("input", help="positives CSV (label 1 rows are used)")
    p.add_argument("--pool", action="append", default=[], help="pool CSV (sequence,source) or FASTA; repeatable")
    p.add_argument("--target", help="dataset name of the positives (default: input file stem)")
    p.add_argument("--exclude", action="append", help="extra dataset name to exclude; repeatable")
    p.add_argument("--external", help="FASTA used to top up under-covered length bins")
    p.add_argument("--task", choices=("classification", "regression", "ppi"))
    p.add_argument("--peptide-type", choices=("canonical", "non-canonical"))

    p = sub.add_parser("split", parents=[common], help="train/valid/test partitioning")
    p.add_argument("input")
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--repeats", type=int, help="number of seeded splits (seed, seed+1, ...)")
    p.add_argument("--peptide-type", choices=("canonical", "non-canonical"))

    p = sub.add_parser("convert", parents=[common], help="notation conversion")
    p.add_argument("input", nargs="?", help="file with one item per line")
    p.add_argument("--text")
    p.add_argument("--from", dest="src", required=True, choices=("fasta", "biln", "helm"))
    p.add_argument("--to", dest="dst", required=True, choices=("fasta", "biln", "helm", "smiles"))
    p.add_argument("--output")

    p = sub.add_parser("enrich", parents=[common], help="enriched k-mer report")
    p.add_argument("input")
    p.add_argument("--peptide-type", choices=("canonical", "non-canonical"))

    p = sub.add_parser("stats", parents=[common], help="length / residue / property histograms")
    p.add_argument("input")
    p.add_argument("--peptide-type", choices=("canonical", "non-canonical"))

    p = sub.add_parser("audit", parents=[common], help="leakage audit of a split")
    p.add_argument("input")
    p.add_argument("split")
    p.add_argument("--motifs", help="motif_clusters.json from the enrich verb")
    p.add_argument("--fingerprints", action="store_true", help="also check fingerprint similarity")
    p.add_argument("--pairs", action="store_true", help="input is a peptide,protein table (checks proteins)")
    p.add_argument("--peptide-type", choices=("canonical", "non-canonical"))
    return parser


def _setup_logging(out_dir: Path, verb: str) -> list[logging.Handler]:
    fmt = logging.Formatter("%(levelname)s %(message)s")
    fh = logging.FileHandler(out_dir / f"{verb}.log", mode="w", encoding="utf-8")
    sh = logging.StreamHandler(sys.stderr)
    for h in (fh, sh):
        h.setFormatter(fmt)
        log.addHandler(h)
    log.setLevel(logging.INFO)
    log.propagate = False
    return [fh, sh]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers: list[logging.Handler] = []
    try:
        ctx = Context(args)
        handlers = _setup_logging(ctx.out, args.verb)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                COMMANDS[args.verb](ctx, args)
            finally:
                for w in caught:
                    msg = f"{w.category.__name__}: {w.message}"
                    ctx.warnings.append(msg)
                    log.warning(msg)
        if ctx.warnings and args.verb in ctx.manifest.data["stages"]:
            ctx.manifest.data["stages"][args.verb]["warnings"] = list(ctx.warnings)
            write_json(ctx.manifest.path, ctx.manifest.data)
        return 0
    except CurationError as exc:
        if handlers:
            log.error(f"{type(exc).__name__}: {exc}")
        else:
            print(f"pepcurate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, UnicodeDecodeError) as exc:
        print(f"pepcurate: {exc}", file=sys.stderr)
        return 2
    finally:
        for h in handlers:
            log.removeHandler(h)
            h.close()


if __name__ == "__main__":
    sys.exit(main())
