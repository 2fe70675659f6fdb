"""Acceptance criteria 1-12, one test each.

Every test prints a single ``[acceptance N] PASS|FAIL: ...`` line (visible
with ``pytest -s`` or ``-v``) and then asserts, so a failing criterion is
reported both ways. Run just this file with
``pytest tests/test_acceptance.py -v -s``.
"""

import csv
import filecmp
import itertools
import time
import warnings
from fractions import Fraction
from math import comb
from statistics import median

import numpy as np
import pytest

from helpers import AA, BILN_CORPUS, isomorphic, twin_fixture
from pepcurate.cleanse import AlignmentParams, greedy_cluster, iqr_aggregate, pair_links
from pepcurate.cli import main
from pepcurate.enrich import (
    ContingencyTable,
    EnrichmentParams,
    bh_fdr,
    fisher_exact_greater,
    find_enriched_kmers,
    merge_motifs,
)
from pepcurate.errors import GiantComponentWarning
from pepcurate.fingerprint import Fingerprint, internal_diversity, morgan_fingerprint, novelty
from pepcurate.negsamp import SAMPLERS, js_divergence, sinkhorn, validate_distributions
from pepcurate.notation import (
    assemble_molecule,
    biln_to_helm,
    convert,
    default_library,
    fasta_to_biln,
    helm_to_biln,
    parse_biln,
    parse_helm,
    parse_smiles,
    serialize_helm,
    write_smiles,
)
from pepcurate.split import (
    PARTITIONS,
    SplitParams,
    audit_leakage,
    cold_start_split,
    ecfp_split,
    hybrid_split,
    identity_split,
    random_split,
    similarity_components,
)


def verdict(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def mutate(rng, s, k):
    s = list(s)
    for i in rng.choice(len(s), k, replace=False):
        s[i] = rng.choice([c for c in AA if c != s[i]])
    return "".join(s)


def components_bfs(n, linked):
    seen, comps = [False] * n, []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        queue, comp = [s], []
        while queue:
            x = queue.pop()
            comp.append(x)
            for y in range(n):
                if not seen[y] and linked(x, y):
                    seen[y] = True
                    queue.append(y)
        comps.append(sorted(comp))
    return sorted(comps)


# 1 ---------------------------------------------------------------------------


def test_01_iqr(capsys):
    values = [0.778, 0.602, 0.778, 1.792, 0.602]
    kept, mean = iqr_aggregate(values)
    times = []
    for _ in range(50):
        t = time.perf_counter()
        iqr_aggregate(values)
        times.append(time.perf_counter() - t)
    removed = sorted(set(values) - set(kept))
    ok = removed == [1.792] and len(kept) == 4 and abs(mean - 0.690) <= 1e-9 and median(times) < 1e-3
    verdict(capsys, 1, ok, f"removed={removed} mean={mean:.12f} median_runtime={median(times) * 1e3:.4f} ms")


# 2 ---------------------------------------------------------------------------


def fisher_tails(r1, r2, c1):
    """Exact upper tails P(X >= a) for one set of margins, keyed by a."""
    n = r1 + r2
    lo, hi = max(0, c1 - r2), min(r1, c1)
    total = comb(n, c1)
    tails, acc = {}, Fraction(0)
    for x in range(hi, lo - 1, -1):
        acc += Fraction(comb(r1, x) * comb(r2, c1 - x), total)
        tails[x] = acc
    return tails


def test_02_fisher_exhaustive(capsys):
    tables, expected = [], []
    for r1 in range(21):
        for r2 in range(21):
            for c1 in range(min(20, r1 + r2) + 1):
                if r1 + r2 - c1 > 20:
                    continue
                for a, p in fisher_tails(r1, r2, c1).items():
                    tables.append(ContingencyTable(a, r1 - a, c1 - a, r2 - c1 + a))
                    expected.append(float(p))
    t = time.perf_counter()
    got = [fisher_exact_greater(tb) for tb in tables]
    elapsed = time.perf_counter() - t
    err = max(abs(g - e) for g, e in zip(got, expected))
    ok = err < 1e-12 and elapsed < 5.0
    verdict(capsys, 2, ok, f"{len(tables)} tables, max |p - oracle| = {err:.2e}, runtime {elapsed:.2f} s")


# 3 ---------------------------------------------------------------------------


def bh_oracle(p, alpha):
    m = len(p)
    order = sorted(range(m), key=lambda i: p[i])
    kmax = 0
    for rank, i in enumerate(order, 1):
        if p[i] <= alpha * rank / m:
            kmax = rank
    return {order[r] for r in range(kmax)}


def test_03_bh(capsys):
    rng = np.random.default_rng(3)
    mismatches = 0
    for trial in range(1000):
        m = int(rng.integers(1, 51))
        p = rng.random(m) ** rng.uniform(1, 6)   # skew toward small p so rejections happen
        if trial % 4 == 0:
            p = np.round(p, 2)                    # ties
        alpha = float(rng.choice([0.01, 0.05, 0.1, 0.2]))
        rej, _ = bh_fdr(p, alpha)
        if set(np.flatnonzero(rej).tolist()) != bh_oracle(p.tolist(), alpha):
            mismatches += 1
    verdict(capsys, 3, mismatches == 0, f"1000 random p-vectors, {mismatches} rejection-set mismatches")


# 4 ---------------------------------------------------------------------------

ANTIFUNGAL = [
    "CIKNGNGCQPDGSQGNCCSRYCHKEPGWVAGYCR",
    "CIANRNGCQPDGSQGNCCSGYCHKEPGWVAGYCR",
    "CIKNGNGCQPNGSQGNCCSGCHKQPGWVAGYCRRK",
    "CIKNGNGCQPNGSQGNCCSGYCHKQPGWVAGYCRRK",
]


def test_04_clustering(capsys):
    params = AlignmentParams(0.9, 0.9)
    ca = greedy_cluster(ANTIFUNGAL, params)
    rng = np.random.default_rng(4)
    three_ok = four_ok = 0
    trials = 50
    for _ in range(trials):
        base = "".join(rng.choice(list(AA), 34))
        three_ok += pair_links(base, mutate(rng, base, 3), params)
        four_ok += not pair_links(base, mutate(rng, base, 4), params)
    ok = ca.n_clusters == 1 and three_ok == trials and four_ok == trials
    verdict(capsys, 4, ok, f"antifungal clusters={ca.n_clusters}; 34-mer 3-mismatch linked {three_ok}/{trials}, "
                           f"4-mismatch unlinked {four_ok}/{trials}")


# 5 ---------------------------------------------------------------------------


def motif_fixture(rng, n=500):
    """Half positives, 40% of them carrying a random planted 5-mer."""
    motif = "".join(rng.choice(list(AA), 5))
    seqs, labels = [], []
    for i in range(n):
        s = "".join(rng.choice(list(AA), int(rng.integers(12, 30))))
        lab = int(i < n // 2)
        if lab and rng.random() < 0.4:
            cut = int(rng.integers(0, len(s)))
            s = s[:cut] + motif + s[cut:]
        seqs.append(s)
        labels.append(lab)
    return seqs, labels


def test_05_leakage(capsys):
    rng = np.random.default_rng(5)
    hybrid_dirty, random_caught, n_motifs = 0, 0, []
    for f in range(50):
        seqs, labels = motif_fixture(rng)
        pos = [s for s, y in zip(seqs, labels) if y == 1]
        neg = [s for s, y in zip(seqs, labels) if y == 0]
        ids = [i for i, y in enumerate(labels) if y == 1]
        hits = find_enriched_kmers(pos, neg, EnrichmentParams(), pos_ids=ids)
        motifs = [c.kmers for c in merge_motifs(hits)]
        n_motifs.append(len(motifs))
        params = SplitParams(seed=f)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GiantComponentWarning)
            h = hybrid_split(seqs, motifs, params=params)
        rep = audit_leakage(h, seqs, motifs)
        hybrid_dirty += bool(rep["motif_violations"] or rep["n_identity_violations"])
        rr = audit_leakage(random_split(len(seqs), params), seqs, motifs)
        random_caught += bool(rr["motif_violations"])
    ok = hybrid_dirty == 0 and random_caught >= 48
    verdict(capsys, 5, ok, f"hybrid fixtures with violations {hybrid_dirty}/50; random fixtures with a motif "
                           f"violation {random_caught}/50; motif clusters per fixture {min(n_motifs)}-{max(n_motifs)}")


# 6 ---------------------------------------------------------------------------


def peptide_family_fps(rng, n):
    """Peptide fingerprints in families of point mutants, so tau=0.95 links exist."""
    fps = []
    while len(fps) < n:
        base = "".join(rng.choice(list(AA), int(rng.integers(20, 40))))
        for _ in range(int(rng.integers(1, 6))):
            s = base if rng.random() < 0.4 else mutate(rng, base, 1)
            fps.append(morgan_fingerprint(assemble_molecule(fasta_to_biln(s))))
    return fps[:n]


def test_06_ecfp_components(capsys):
    rng = np.random.default_rng(6)
    sizes = [1, 2, 5, 10, 25, 50, 100, 150, 200]
    bad, linked_pairs = [], 0
    for n in sizes:
        fps = peptide_family_fps(rng, n)
        bits = [set(f.on_bits()) for f in fps]

        def linked(i, j):
            return len(bits[i] & bits[j]) / len(bits[i] | bits[j]) >= 0.95
        linked_pairs += sum(linked(i, j) for i, j in itertools.combinations(range(n), 2))
        if sorted(similarity_components(fps, 0.95)) != components_bfs(n, linked):
            bad.append(n)
        a = ecfp_split(fps, 0.95)
        for comp in components_bfs(n, linked):
            if len({a.partition[i] for i in comp}) != 1:
                bad.append(("split", n))
    ok = not bad and linked_pairs > 0
    verdict(capsys, 6, ok, f"fixture sizes {sizes}, {linked_pairs} linked pairs, mismatches {bad}")


# 7 ---------------------------------------------------------------------------


def test_07_js_constraints(capsys):
    pos, pool, twins = twin_fixture(np.random.default_rng(7), 100)
    rows = []
    for name in sorted(SAMPLERS):
        res = SAMPLERS[name](pool, pos, 1.0, seed=42)
        rep = validate_distributions(pos, res.sequences)
        rows.append((name, rep.passed, rep.max_js))
    worked = (js_divergence([0.3, 0.7], [0.3, 0.7]), js_divergence([1, 0], [0, 1]),
              js_divergence([0.5, 0.5], [1, 0]))
    worked_ok = abs(worked[0]) < 1e-5 and abs(worked[1] - 1) < 1e-5 and abs(worked[2] - 0.31128) < 1e-5
    ok = all(r[1] for r in rows) and worked_ok
    detail = ", ".join(f"{n} {'pass' if p else 'FAIL'} (max JS {m:.4f})" for n, p, m in rows)
    verdict(capsys, 7, ok, f"{detail}; worked JS {tuple(round(w, 5) for w in worked)}")


# 8 ---------------------------------------------------------------------------


def test_08_sinkhorn(capsys):
    rng = np.random.default_rng(8)
    converged, worst = 0, 0.0
    for _ in range(200):
        m, n = int(rng.integers(2, 40)), int(rng.integers(2, 40))
        a, b = rng.random(m) + 0.05, rng.random(n) + 0.05
        a, b = a / a.sum(), b / b.sum()
        C = rng.random((m, n)) * rng.uniform(0.1, 20)
        eps = float(rng.choice([0.05, 0.1, 0.5, 1.0]))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = sinkhorn(a, b, C, eps, iters=5000)
        if res.converged:
            converged += 1
            worst = max(worst, np.abs(res.plan.sum(1) - a).sum() + np.abs(res.plan.sum(0) - b).sum())
    a, b = rng.random(10) + 0.1, rng.random(12) + 0.1
    a, b = a / a.sum(), b / b.sum()
    big = sinkhorn(a, b, rng.random((10, 12)), epsilon=1e4)
    outer_err = float(np.abs(big.plan - np.outer(a, b)).max())
    ok = converged > 0 and worst < 1e-6 and outer_err < 1e-3
    verdict(capsys, 8, ok, f"{converged}/200 converged, worst marginal violation {worst:.2e}; "
                           f"large-eps max |P - ab^T| = {outer_err:.2e}")


# 9 ---------------------------------------------------------------------------


def test_09_notation(capsys):
    g_ok = isomorphic(assemble_molecule(parse_biln("G")), parse_smiles("NCC(=O)O"))
    gg_ok = isomorphic(parse_smiles(convert("G-G", "biln", "smiles")), parse_smiles("NCC(=O)NCC(=O)O"))
    trips = 0
    for text in BILN_CORPUS:
        d = parse_biln(text)
        back = helm_to_biln(parse_helm(serialize_helm(biln_to_helm(d))))
        trips += isomorphic(assemble_molecule(d), assemble_molecule(back))
    lib = default_library()
    mono = sum(isomorphic(parse_smiles(write_smiles(m.graph)), m.graph) for m in lib)
    n_lib = len(lib.symbols)
    has_ss = sum("C(1,3)" in t for t in BILN_CORPUS)
    ok = g_ok and gg_ok and trips == len(BILN_CORPUS) == 20 and mono == n_lib and has_ss > 0
    verdict(capsys, 9, ok, f"G {g_ok}, G-G {gg_ok}; BILN<->HELM {trips}/{len(BILN_CORPUS)} isomorphic "
                           f"({has_ss} with disulfides); SMILES monomer round trips {mono}/{n_lib}")


# 10 --------------------------------------------------------------------------

MOLECULES = ["CCO", "c1ccccc1O", "NCC(=O)NCC(=O)O", "CC(C)CC(C(=O)O)N", "C1CC[N+](C)(C)C1", "OC(=O)c1ccc(cc1)N"]
PEPTIDES = ["K-W-K-L-F-K-K", "C(1,3)-G-F-C(1,3)", "[ac]-[meA]-K-[Orn]-[am]"]


def test_10_fingerprint_invariance(capsys):
    rng = np.random.default_rng(10)
    graphs = [parse_smiles(s) for s in MOLECULES] + [assemble_molecule(parse_biln(p)) for p in PEPTIDES]
    stable = 0
    for g in graphs:
        ref = morgan_fingerprint(g)
        stable += all(morgan_fingerprint(g.permuted(rng.permutation(len(g)).tolist())) == ref for _ in range(100))
    a, b = Fingerprint.from_bits([1, 2]), Fingerprint.from_bits([5])
    div = internal_diversity([a, a, b])
    ref = [Fingerprint.from_bits([i]) for i in range(4)]
    nov = novelty([ref[0]] + [Fingerprint.from_bits([10 + i]) for i in range(3)], ref)
    ok = stable == len(graphs) and div == 1 - 1 / 3 and nov == 0.75
    verdict(capsys, 10, ok, f"{stable}/{len(graphs)} molecules invariant over 100 permutations; "
                            f"diversity {div!r}, novelty {nov!r}")


# 11 --------------------------------------------------------------------------


def test_11_ratios(capsys):
    rng = np.random.default_rng(11)
    seqs = []
    while len(seqs) < 1000:   # families of near-duplicates plus singletons
        base = "".join(rng.choice(list(AA), int(rng.integers(15, 30))))
        seqs += [base] + [mutate(rng, base, 1) for _ in range(int(rng.integers(0, 8)))]
    seqs = seqs[:1000]
    motifs = [["WKWKW"]]
    for i in rng.choice(1000, 150, replace=False):
        seqs[i] = seqs[i][:5] + "WKWKW" + seqs[i][5:]
    params = SplitParams(seed=11)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GiantComponentWarning)
        splits = {"random": random_split(1000, params), "identity": identity_split(seqs, params=params),
                  "hybrid": hybrid_split(seqs, motifs, params=params)}
    lines, ok = [], True
    for name, sa in splits.items():
        largest = max(np.bincount(np.asarray(sa.cluster)))
        counts = sa.counts()
        dev = max(abs(counts[p] - f * 1000) for p, f in zip(PARTITIONS, (0.8, 0.1, 0.1)))
        ok &= dev <= largest
        lines.append(f"{name} {counts['train']}:{counts['valid']}:{counts['test']} (dev {dev:g} <= {largest})")
    proteins = ["".join(rng.choice(list(AA), int(rng.integers(60, 90)))) for _ in range(20)]
    proteins += [mutate(rng, p, 5) for p in proteins[:10]]   # homologs must travel together
    pairs = [("".join(rng.choice(list(AA), 10)), proteins[int(rng.integers(len(proteins)))]) for _ in range(1000)]
    cs = cold_start_split(pairs, params=params)
    train = {pairs[i][1] for i in cs.indices("train")}
    test = {pairs[i][1] for i in cs.indices("test")}
    exact = len(train & test)
    homolog = sum(pair_links(p, q, AlignmentParams(0.3)) for p in test for q in train)
    ok &= exact == 0 and homolog == 0
    lines.append(f"cold-start train proteins in test: {exact} exact, {homolog} homologous")
    verdict(capsys, 11, ok, "; ".join(lines))


# 12 --------------------------------------------------------------------------


def pipeline_inputs(d):
    rng = np.random.default_rng(12)
    rows = []
    for i in range(5000):
        s = "".join(rng.choice(list(AA), int(rng.integers(10, 40))))
        lab = int(i % 2 == 0)
        if lab and rng.random() < 0.3:
            cut = int(rng.integers(0, len(s)))
            s = s[:cut] + "WKWKW" + s[cut:]
        rows.append((f"r{i}", s, lab))
    pool = ["".join(rng.choice(list(AA), int(rng.integers(8, 45)))) for _ in range(5000)]
    with open(d / "data.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("id", "sequence", "label"))
        w.writerows(rows)
    with open(d / "pool.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("sequence", "source"))
        w.writerows((s, "bio") for s in pool)


def run_pipeline(d, out):
    o = str(out)
    steps = [["clean", str(d / "data.csv")],
             ["negsamp", f"{o}/cleaned.csv", "--pool", str(d / "pool.csv"), "--target", "data"],
             ["split", f"{o}/dataset.csv", "--strategy", "hybrid", "--repeats", "1"],
             ["audit", f"{o}/dataset.csv", f"{o}/split.csv"],
             ["stats", f"{o}/dataset.csv"]]
    t = time.perf_counter()
    codes = [main(s + ["--out-dir", o, "--seed", "42"]) for s in steps]
    return codes, time.perf_counter() - t


def same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    names = sorted(cmp.common_files)
    _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    return not (cmp.left_only or cmp.right_only or mismatch or errors), mismatch + cmp.left_only + cmp.right_only


@pytest.mark.slow
def test_12_end_to_end(capsys, tmp_path):
    pipeline_inputs(tmp_path)
    codes1, t1 = run_pipeline(tmp_path, tmp_path / "run1")
    codes2, t2 = run_pipeline(tmp_path, tmp_path / "run2")
    identical, diff = same_tree(tmp_path / "run1", tmp_path / "run2")
    n_files = len(list((tmp_path / "run1").iterdir()))
    ok = codes1 == codes2 == [0] * 5 and identical and max(t1, t2) < 60
    verdict(capsys, 12, ok, f"exit codes {codes1}; runtimes {t1:.1f} s / {t2:.1f} s; "
                            f"{n_files} output files byte-identical: {identical} {diff or ''}")
