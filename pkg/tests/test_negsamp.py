import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import AA, random_seqs, twin_fixture
from pepcurate.errors import (
    BackfillWarning,
    DegenerateBandwidth,
    EmptyPoolAfterExclusion,
    EmptySet,
    ExhaustedCombinations,
    InsufficientPool,
    NoConvergence,
)
from pepcurate.negsamp import (
    SAMPLERS,
    DistributionSpec,
    NegativeSet,
    SamplingPool,
    build_pool,
    expand_pool_external,
    expert_exclusions_for,
    feature_histogram,
    filter_pool,
    js_divergence,
    load_expert_groups,
    map_to_canonical,
    mean_composition,
    mmd2,
    nc_negsamp_bridge,
    overlap_ratio,
    ppi_shuffle_negatives,
    run_bdnegsamp,
    sample_kde_importance,
    sample_mmd_herding,
    sample_moment_matched,
    sample_nearest_neighbor,
    select_best,
    sequence_diversity,
    shared_range,
    sinkhorn,
    sinkhorn_capacity,
    validate_distributions,
)
from pepcurate.seqcore import scalar_features

mass = st.one_of(st.just(0.0), st.floats(1e-3, 10))
dists = st.lists(mass, min_size=2, max_size=12).filter(lambda v: sum(v) > 1e-3)


def norm(v):
    v = np.asarray(v, float)
    return v / v.sum()


def js_ref(p, q):
    """Base-2 Jensen-Shannon from the KL definition, summed term by term."""
    m = [(a + b) / 2 for a, b in zip(p, q)]
    kl = lambda x, y: sum(a * math.log2(a / b) for a, b in zip(x, y) if a > 0)
    return 0.5 * kl(p, m) + 0.5 * kl(q, m)


# --------------------------------------------------------------------------
# distributions


class TestJS:
    def test_worked(self):
        assert js_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0
        assert js_divergence([1, 0], [0, 1]) == pytest.approx(1.0, abs=1e-12)
        assert js_divergence([0.5, 0.5], [1, 0]) == pytest.approx(0.31128, abs=1e-5)
        assert js_divergence([0.5, 0.5], [1, 0]) == pytest.approx(js_ref([0.5, 0.5], [1, 0]), abs=1e-12)

    @given(dists, st.data())
    def test_properties(self, a, data):
        b = data.draw(st.lists(mass, min_size=len(a), max_size=len(a)).filter(lambda v: sum(v) > 1e-3))
        p, q = norm(a), norm(b)
        d = js_divergence(p, q)
        assert 0.0 <= d <= 1.0
        assert d == pytest.approx(js_divergence(q, p), abs=1e-12)
        assert d == pytest.approx(js_ref(p, q), abs=1e-9)
        assert js_divergence(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_not_normalized(self):
        with pytest.raises(Exception):
            js_divergence([0.5, 0.6], [0.5, 0.5])

    def test_dimension(self):
        with pytest.raises(Exception):
            js_divergence([1.0], [0.5, 0.5])


class TestHistogram:
    def test_constant(self):
        h = feature_histogram([3.0] * 10, 30)
        assert h.max() == 1.0 and np.count_nonzero(h) == 1

    def test_uniform_grid(self):
        h = feature_histogram(np.linspace(0, 1, 3000, endpoint=False), 30, (0, 1))
        assert np.allclose(h, 1 / 30, atol=1e-3)

    def test_last_bin_closed(self):
        h = feature_histogram([0.0, 1.0], 2, (0, 1))
        assert h.tolist() == [0.5, 0.5]

    def test_shared_range(self):
        assert shared_range(np.array([1.0, 2.0]), np.array([5.0])) == (1.0, 5.0)
        lo, hi = shared_range(np.array([2.0, 2.0]))
        assert lo < 2.0 < hi


class TestValidate:
    def test_self(self, rng):
        pos = random_seqs(rng, 50)
        rep = validate_distributions(pos, pos)
        assert all(v == 0.0 for v in rep.values) and rep.passed

    def test_disjoint_lengths(self, rng):
        pos = random_seqs(rng, 50, 5, 10)
        neg = random_seqs(rng, 50, 40, 50)
        rep = validate_distributions(pos, neg)
        assert rep.length > 0.95 and not rep.passed

    def test_report_shape(self, rng):
        d = validate_distributions(random_seqs(rng, 20), random_seqs(rng, 20)).to_dict()
        assert set(d) == {"Length_js", "Charge_js", "Hydrophobicity_js", "1mers_js", "2mers_js", "pass"}

    def test_thresholds(self):
        s = DistributionSpec()
        assert (s.bins, s.scalar_threshold, s.mer1_threshold, s.mer2_threshold) == (30, 0.2, 0.05, 0.15)

    def test_mean_composition_skips_short(self):
        v = mean_composition(["A", "AC"], 2)
        assert v.sum() == pytest.approx(1.0)


# --------------------------------------------------------------------------
# pool


class TestPool:
    def test_overlap(self):
        a = [f"A{i}" for i in range(10)]
        b = [f"B{i}" for i in range(19)] + ["A0"]
        assert overlap_ratio(a, b) == 0.1
        assert overlap_ratio(a, ["Z"]) == 0.0
        assert overlap_ratio(a[:3], a) == 1.0
        with pytest.raises(EmptySet):
            overlap_ratio([], a)

    def test_overlap_exclusion(self, rng):
        pos = random_seqs(rng, 100)
        x = random_seqs(rng, 50)
        y = random_seqs(rng, 92) + pos[:8]
        pool = build_pool({"T": pos, "X": x, "Y": y}, "T", expert_exclusions=[], redundancy=None)
        assert set(pool.sources) == {"X"} and pool.excluded_datasets == {"T": "target", "Y": "overlap"}

    def test_all_excluded(self, rng):
        with pytest.raises(EmptyPoolAfterExclusion):
            build_pool({"T": random_seqs(rng, 5), "X": random_seqs(rng, 5)}, "T", expert_exclusions=["X"])

    def test_duplicates(self):
        pool = build_pool({"T": ["KKKKKKKK"], "X": ["ACDEFGHIK"], "Y": ["ACDEFGHIK", "LMNPQRSTV"]}, "T",
                          expert_exclusions=[], redundancy=None)
        assert sorted(pool.sequences) == ["ACDEFGHIK", "LMNPQRSTV"] and pool.n_duplicates == 1

    def test_expert_groups(self):
        groups = load_expert_groups()
        assert len(groups) == 3
        excl = expert_exclusions_for("anticancer")
        assert "antimicrobial" in excl and "anticancer" not in excl
        assert expert_exclusions_for("unrelated_target") == set()

    def test_filter(self, rng):
        pos = random_seqs(rng, 20, 15, 20)
        pool = SamplingPool(pos[:5] + random_seqs(rng, 30, 15, 20), ["s"] * 35)
        out = filter_pool(pool, pos)
        assert not set(out.sequences) & set(pos) and len(out) <= 30

    def test_external_topup(self, rng):
        pos = random_seqs(rng, 5, 12, 12)
        pool = SamplingPool(random_seqs(rng, 2, 12, 12) + random_seqs(rng, 60, 20, 20), ["bio"] * 62)
        ext = random_seqs(rng, 200, 12, 12) + random_seqs(rng, 20, 20, 20)
        out, rep = expand_pool_external(pool, pos, ext)
        assert set(rep) == {11}
        assert rep[11]["target"] == 50 and rep[11]["before"] == 2
        assert rep[11]["added"] == 48 and rep[11]["shortfall"] == 0
        assert sum(1 for s in out.sequences if len(s) == 20) == 60
        assert out.sources.count("external") == 48

    def test_external_similarity_filter(self, rng):
        pos = ["KWKLFKKIGAVLKVLT"]
        near = "KWKLFKKIGAAAAAAA"   # 11/16 identical, about 0.69
        pool = SamplingPool(["DDDDEEEEGGGGSSSS"], ["bio"])
        out, rep = expand_pool_external(pool, pos, [near], coverage=2)
        assert near not in out.sequences and rep[15]["shortfall"] == 1


# --------------------------------------------------------------------------
# samplers


@pytest.fixture(scope="module")
def twins():
    return twin_fixture(np.random.default_rng(2), 40)


class TestSamplerContract:
    @pytest.mark.parametrize("name", sorted(SAMPLERS))
    def test_twins_pass(self, name, twins):
        pos, pool, tw = twins
        res = SAMPLERS[name](pool, pos, 1.0, seed=3)
        assert len(res) == 40 and len(set(res.indices)) == 40
        assert validate_distributions(pos, res.sequences).passed
        assert validate_distributions(pos, res.sequences).length == 0.0

    @pytest.mark.parametrize("name", sorted(SAMPLERS))
    def test_seeded(self, name, twins, rng):
        pos = random_seqs(rng, 30)
        pool = random_seqs(rng, 200)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = SAMPLERS[name](pool, pos, 1.0, seed=5)
            b = SAMPLERS[name](pool, pos, 1.0, seed=5)
        assert a.indices == b.indices

    @pytest.mark.parametrize("name", sorted(SAMPLERS))
    def test_insufficient(self, name, rng):
        pool = random_seqs(rng, 10)
        with pytest.raises(InsufficientPool) as exc:
            SAMPLERS[name](pool, random_seqs(rng, 50), 1.0)
        assert len(exc.value.partial) == 10

    @settings(max_examples=15, deadline=None)
    @given(st.sampled_from(sorted(SAMPLERS)), st.floats(0.3, 2.0), st.integers(0, 10**6))
    def test_size_and_membership(self, name, ratio, seed):
        r = np.random.default_rng(seed)
        pos = random_seqs(r, 20)
        pool = [s for s in random_seqs(r, 120) if s not in pos]
        k = math.floor(ratio * 20 + 0.5)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = SAMPLERS[name](pool, pos, ratio, seed=seed)
        assert len(res) == k and len(set(res.indices)) == k
        assert all(pool[i] == s for i, s in zip(res.indices, res.sequences))
        assert not set(res.sequences) & set(pos)

    def test_ratio_one_fifty(self, rng):
        pos = random_seqs(rng, 50)
        assert len(SAMPLERS["bin_matched"](random_seqs(rng, 500), pos, 1.0)) == 50


class TestSamplers:
    def test_bin_backfill(self, rng):
        pos = random_seqs(rng, 20, 10, 12)
        pool = random_seqs(rng, 30, 30, 40)
        with pytest.warns(BackfillWarning):
            res = SAMPLERS["bin_matched"](pool, pos, 1.0)
        assert res.info["backfilled"] == 20

    def test_kde_degenerate(self, rng):
        pos = ["".join(rng.permutation(list("KKAAGGLLWW"))) for _ in range(10)]  # constant features
        with pytest.warns(DegenerateBandwidth):
            res = sample_kde_importance(random_seqs(rng, 40), pos, 1.0)
        assert len(res) == 10

    def test_kde_uniform_pool(self, rng):
        pos = random_seqs(rng, 5)
        base = "KWKLFKKIGAVLKVL"
        perms = set()
        while len(perms) < 20:
            perms.add("".join(rng.permutation(list(base))))
        pool = sorted(perms)
        counts = np.zeros(20)
        for seed in range(400):
            counts[sample_kde_importance(pool, pos, 1.0, seed=seed).indices] += 1
        assert np.allclose(counts / 400, 5 / 20, atol=0.1)

    def test_kde_twins_weighted(self, twins):
        pos, pool, tw = twins
        res = sample_kde_importance(pool, pos, 1.0, seed=0)
        assert set(res.indices) == tw

    def test_herding_mmd_zero(self, twins):
        pos, pool, _ = twins
        res = sample_mmd_herding(pool, pos, 1.0)
        fp, fs = scalar_features(pos), scalar_features(res.sequences)
        mu, sd = fp.mean(0), fp.std(0)
        assert mmd2((fp - mu) / sd, (fs - mu) / sd, res.info["bandwidth"]) == pytest.approx(0.0, abs=1e-9)

    def test_nearest_neighbor_twins(self, twins):
        pos, pool, _ = twins
        res = sample_nearest_neighbor(pool, pos, 1.0, seed=4)
        assert max(res.info["distances"]) < 1e-6

    def test_nearest_neighbor_bruteforce(self, rng):
        for trial in range(20):
            pos = random_seqs(rng, 2)
            pool = random_seqs(rng, 2)
            res = sample_nearest_neighbor(pool, pos, 1.0, seed=trial)
            fp, fq = scalar_features(pos), scalar_features(pool)
            sd = fp.std(0)
            sd[sd == 0] = 1
            zp, zq = (fp - fp.mean(0)) / sd, (fq - fp.mean(0)) / sd
            first = res.info["positive_order"][0]
            d = ((zq - zp[first]) ** 2).sum(1)
            # the first positive takes its nearest, the second takes the remaining one
            expect = int(np.argmin(d)) if d[0] != d[1] else 0
            assert res.indices == [expect, 1 - expect]

    def test_moment_objective_zero(self, twins):
        pos, pool, tw = twins
        res = sample_moment_matched(pool, pos, 1.0, seed=1)
        assert res.info["objective"] < 1e-9 and res.info["local_minimum"]
        trace = res.info["trace"]
        assert all(a > b for a, b in zip(trace, trace[1:]))

    def test_sinkhorn_sampler_converges(self, twins):
        pos, pool, tw = twins
        res = SAMPLERS["sinkhorn_ot"](pool, pos, 1.0)
        assert res.info["converged"] and set(res.indices) == tw


# --------------------------------------------------------------------------
# Sinkhorn


class TestSinkhorn:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 12), st.integers(2, 12), st.integers(0, 10**6), st.sampled_from([0.05, 0.2, 1.0]))
    def test_marginals(self, m, n, seed, eps):
        r = np.random.default_rng(seed)
        a, b = norm(r.random(m) + 0.1), norm(r.random(n) + 0.1)
        C = r.random((m, n))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoConvergence)
            res = sinkhorn(a, b, C, eps, iters=5000)
        if res.converged:
            assert np.abs(res.plan.sum(1) - a).sum() + np.abs(res.plan.sum(0) - b).sum() < 1e-6
            assert res.violation < 1e-6

    def test_large_epsilon(self, rng):
        a, b = norm(rng.random(6) + 0.1), norm(rng.random(8) + 0.1)
        res = sinkhorn(a, b, rng.random((6, 8)), epsilon=1e4)
        assert np.abs(res.plan - np.outer(a, b)).max() < 1e-3

    def test_identical_points(self, rng):
        x = rng.normal(size=(10, 3))
        C = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
        res = sinkhorn(np.full(10, 0.1), np.full(10, 0.1), C / np.median(C), epsilon=0.002, iters=20000)
        assert np.allclose(np.diag(res.plan), 0.1, atol=1e-3)

    def test_log_domain(self, rng):
        a, b = norm(np.ones(5)), norm(np.ones(5))
        C = rng.random((5, 5)) + 10.0
        res = sinkhorn(a, b, C, epsilon=0.05)
        assert res.log_domain and res.converged
        assert np.abs(res.plan.sum(1) - a).sum() < 1e-6

    def test_log_and_kernel_agree(self, rng):
        a, b = norm(rng.random(5) + 0.1), norm(rng.random(7) + 0.1)
        C = rng.random((5, 7))
        plain = sinkhorn(a, b, C, epsilon=0.1)
        shifted = sinkhorn(a, b, C + 6.0, epsilon=0.1)   # constant shift leaves the plan unchanged
        assert shifted.log_domain and not plain.log_domain
        assert np.abs(plain.plan - shifted.plan).max() < 1e-6

    def test_no_convergence_warns(self, rng):
        a, b = norm(rng.random(5) + 0.1), norm(rng.random(5) + 0.1)
        with pytest.warns(NoConvergence):
            res = sinkhorn(a, b, rng.random((5, 5)), epsilon=0.001, iters=2)
        assert not res.converged

    def test_capacity(self, rng):
        a = np.full(4, 0.25)
        C = rng.random((4, 10))
        res = sinkhorn_capacity(a, 0.25, C, epsilon=0.05)
        assert res.converged
        assert np.abs(res.row_mass - a).sum() < 1e-6
        assert (res.column_mass <= 0.25 + 1e-6).all()
        with pytest.raises(ValueError):
            sinkhorn_capacity(a, 0.05, C)


# --------------------------------------------------------------------------
# selection


def nset(name, seqs):
    return NegativeSet(name, list(range(len(seqs))), list(seqs))


class TestSelect:
    def test_dominant(self, rng):
        pos = random_seqs(rng, 30)
        other = random_seqs(rng, 30, 40, 50)
        best, passed, board = select_best([nset("b", other), nset("a", pos)], pos)
        assert best.negatives.strategy == "a" and passed
        assert [r["strategy"] for r in board] == ["a", "b"]

    def test_fallback(self, rng):
        pos = random_seqs(rng, 30, 5, 8)
        far = random_seqs(rng, 30, 40, 50)
        farther = random_seqs(rng, 30, 80, 90)
        best, passed, _ = select_best([nset("x", farther), nset("y", far)], pos)
        assert not passed
        assert best.report.max_js == min(validate_distributions(pos, s).max_js for s in (far, farther))

    def test_tie_by_name(self, rng):
        pos = random_seqs(rng, 20)
        neg = random_seqs(rng, 20)
        best, _, _ = select_best([nset("zeta", neg), nset("alpha", neg)], pos)
        assert best.negatives.strategy == "alpha"

    def test_score_formula(self, twins):
        pos, pool, _ = twins
        cands = [SAMPLERS[n](pool, pos, 1.0, seed=0) for n in ("nearest_neighbor", "bin_matched", "kde_importance")]
        cands.append(nset("decoys", pool[-40:]))
        best, passed, board = select_best(cands, pos, weight=0.1)
        for row in board:
            assert row["score"] == pytest.approx(row["max_js"] - 0.1 * row["diversity"], abs=1e-12)
        eligible = [r for r in board if r["pass"]]
        assert passed and best.score == min(r["score"] for r in eligible)

    def test_diversity(self):
        assert sequence_diversity(["AAAA", "AAAA"]) == pytest.approx(0.0, abs=1e-12)
        assert sequence_diversity(["AAAA", "CCCC"]) == pytest.approx(1.0)
        seqs = ["ACDK", "KKLW", "AAAC"]

        def vec(s):
            v = np.zeros(420)
            for c in s:
                v[AA.index(c)] += 1
            for x, y in zip(s, s[1:]):
                v[20 + AA.index(x) * 20 + AA.index(y)] += 1
            return v / np.linalg.norm(v)

        vs = [vec(s) for s in seqs]
        pairs = [(0, 1), (0, 2), (1, 2)]
        expect = 1 - np.mean([vs[i] @ vs[j] for i, j in pairs])
        assert sequence_diversity(seqs) == pytest.approx(expect, abs=1e-12)

    def test_run_workers_invariant(self, twins):
        pos, pool, _ = twins
        sp = SamplingPool(pool, ["src"] * len(pool))
        a = run_bdnegsamp(sp, pos, seed=7, workers=1)
        b = run_bdnegsamp(sp, pos, seed=7, workers=4)
        assert a.sequences == b.sequences and a.scoreboard == b.scoreboard and a.passed

    def test_run_failures(self, rng):
        pos = random_seqs(rng, 10)
        sp = SamplingPool(random_seqs(rng, 5), ["s"] * 5)
        with pytest.raises(InsufficientPool):
            run_bdnegsamp(sp, pos)

    def test_unknown_strategy(self, rng):
        with pytest.raises(ValueError):
            run_bdnegsamp(SamplingPool(["AAA"], ["s"]), ["CCC"], strategies=["nope"])


# --------------------------------------------------------------------------
# PPI and non-canonical bridge


class TestPPI:
    def test_ratio(self, rng):
        peps, prots = random_seqs(rng, 10, 8, 12), random_seqs(rng, 10, 50, 60)
        pos = list(zip(peps, prots))
        neg = ppi_shuffle_negatives(pos, 5, seed=1)
        assert len(neg) == 50 and len(set(neg)) == 50 and not set(neg) & set(pos)
        assert neg == ppi_shuffle_negatives(pos, 5, seed=1)

    def test_exhausted(self):
        with pytest.raises(ExhaustedCombinations):
            ppi_shuffle_negatives([("AAAA", "KKKKKK")], 1)
        with pytest.raises(ExhaustedCombinations):
            ppi_shuffle_negatives([("A", "P"), ("B", "Q")], 2)

    def test_enumeration_branch(self):
        pos = [("A", "P"), ("B", "Q"), ("C", "R")]
        neg = ppi_shuffle_negatives(pos, 2, seed=0)   # 6 of 6 free pairs
        assert sorted(neg) == sorted({(p, q) for p in "ABC" for q in "PQR"} - set(pos))


class TestBridge:
    def test_mapping(self):
        assert map_to_canonical(["[meA]-K-K", "AKK", "A-G"]) == ["AKK", "AKK", "AG"]

    def test_canonical_identical(self, twins):
        pos, pool, _ = twins
        sp = SamplingPool(pool, ["s"] * len(pool))
        res, mapped = nc_negsamp_bridge(pos, sp, seed=2)
        assert mapped == pos
        assert res.sequences == run_bdnegsamp(sp, pos, seed=2).sequences

    def test_handoff(self, tmp_path, twins):
        pos, pool, _ = twins
        nc = ["[meA]-" + "-".join(p[1:]) for p in pos]
        path = tmp_path / "handoff.csv"
        res, mapped = nc_negsamp_bridge(nc, SamplingPool(pool, ["s"] * len(pool)), handoff_path=path,
                                        strategies=["nearest_neighbor"])
        assert mapped[0] == "A" + pos[0][1:]
        lines = path.read_text().splitlines()
        assert lines[0] == "canonical_sequence" and lines[1:] == res.sequences
