import numpy as np
import pytest

from helpers import chain_instance, dataset_dir, make_instance, parallel_instance, random_instance
from qdsched.cpm import attribute_csv, attribute_table, backward_pass, closures, forward_pass
from qdsched.experiments import discover_instances
from qdsched.instances import parse_instance_file


# --- independent oracles ----------------------------------------------------

def longest_path_to(inst, target):
    """Longest duration-weighted path from the source to `target` (memoized
    recursion over predecessors; written independently of the forward pass).
    """
    memo = {}

    def visit(j):
        if j in memo:
            return memo[j]
        best = 0
        for p in inst.predecessors[j]:
            best = max(best, visit(p) + inst.durations[p])
        memo[j] = best
        return best

    return visit(target)


def reachable_from(inst, start, edges):
    """Set of nodes reachable from `start` following `edges`, by plain DFS."""
    seen = set()
    stack = [start]
    while stack:
        j = stack.pop()
        for s in edges[j]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


# --- forward / backward pass ------------------------------------------------

class TestForwardPass:
    def test_chain(self, chain):
        es, ef = forward_pass(chain)
        assert es == (0, 0, 3, 5)
        assert ef == (0, 3, 5, 5)

    def test_parallel_branches_take_max(self, parallel):
        es, ef = forward_pass(parallel)
        assert ef[parallel.sink] == 5

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_longest_path_oracle(self, seed):
        inst = random_instance(seed)
        es, ef = forward_pass(inst)
        for j in range(inst.num_activities):
            assert es[j] == longest_path_to(inst, j)
        assert ef[inst.sink] == longest_path_to(inst, inst.sink)


class TestBackwardPass:
    def test_chain_has_zero_slack(self, chain):
        es, ef = forward_pass(chain)
        ls, lf = backward_pass(chain, ef[chain.sink])
        assert ls == es

    def test_parallel_slack_on_short_branch(self, parallel):
        es, ef = forward_pass(parallel)
        ls, lf = backward_pass(parallel, ef[parallel.sink])
        assert ls[1] == 2  # A(d=3) can slip to 2
        assert ls[2] == 0  # B(d=5) is critical

    @pytest.mark.parametrize("seed", range(40))
    def test_cpm_slack_nonnegative(self, seed):
        inst = random_instance(seed)
        es, ef = forward_pass(inst)
        ls, lf = backward_pass(inst, ef[inst.sink])
        assert all(ls[j] >= es[j] for j in range(inst.num_activities))
        assert all(lf[j] >= ef[j] for j in range(inst.num_activities))

    @pytest.mark.parametrize("seed", range(40))
    def test_anchored_backward_pass_touches_zero(self, seed):
        inst = random_instance(seed)
        es, ef = forward_pass(inst)
        ls, _ = backward_pass(inst, ef[inst.sink])
        assert min(ls) == 0


class TestClosures:
    def test_chain_counts(self, chain):
        preds, succs = closures(chain)
        assert succs[1] == 2  # B and the sink
        assert preds[2] == 2  # A and the source

    def test_parallel_counts(self, parallel):
        preds, succs = closures(parallel)
        assert succs[1] == 1  # just the sink

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_dfs_reachability_oracle(self, seed):
        inst = random_instance(seed)
        preds, succs = closures(inst)
        for j in range(inst.num_activities):
            assert succs[j] == len(reachable_from(inst, j, inst.successors))
            assert preds[j] == len(reachable_from(inst, j, inst.predecessors))

    @pytest.mark.parametrize("seed", range(40))
    def test_closure_antisymmetry(self, seed):
        inst = random_instance(seed)
        preds, succs = closures(inst)
        assert sum(preds) == sum(succs)
        for i in range(inst.num_activities):
            down = reachable_from(inst, i, inst.successors)
            for j in down:
                assert i in reachable_from(inst, j, inst.predecessors)


class TestAttributeTable:
    def test_resource_attributes_by_substitution(self):
        inst = make_instance(
            "two-res",
            durations=(0, 4, 0),
            requirements=((0, 0), (2, 0), (0, 0)),
            capacities=(4, 5),
            successors=((1,), (2,), ()),
        )
        attrs = attribute_table(inst)
        assert attrs.rr[1] == pytest.approx(0.5)
        assert attrs.avg_rreq[1] == pytest.approx(0.25)  # (2/4 + 0/5) / 2
        assert attrs.max_rreq[1] == pytest.approx(0.5)
        assert attrs.min_rreq[1] == pytest.approx(0.0)

    def test_sink_attains_normalized_es_of_one(self, chain):
        attrs = attribute_table(chain)
        assert attrs.es[chain.sink] == pytest.approx(1.0)

    def test_lower_bound_is_sink_earliest_finish(self, chain):
        attrs = attribute_table(chain)
        assert attrs.lower_bound == 5 == attrs.raw_ef[chain.sink]

    @pytest.mark.parametrize("seed", range(40))
    def test_all_attributes_in_unit_interval(self, seed):
        attrs = attribute_table(random_instance(seed))
        for name, col in attrs.columns.items():
            assert np.all(col >= 0.0), name
            assert np.all(col <= 1.0), name

    @pytest.mark.parametrize("seed", range(40))
    def test_time_columns_attain_one(self, seed):
        # every max-normalized column touches 1.0 when its raw max is positive
        attrs = attribute_table(random_instance(seed))
        for raw, col in (
            (attrs.raw_es, attrs.es),
            (attrs.raw_ef, attrs.ef),
            (attrs.raw_ls, attrs.ls),
            (attrs.raw_lf, attrs.lf),
        ):
            if max(raw) > 0:
                assert col.max() == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(40))
    def test_dummy_closure_normalization(self, seed):
        # the sink sees every other activity as a predecessor, so TPC tops at 1
        inst = random_instance(seed)
        attrs = attribute_table(inst)
        assert attrs.tpc[inst.sink] == pytest.approx(1.0)
        assert attrs.tsc[inst.source] == pytest.approx(1.0)

    def test_normalization_guard_on_zero_columns(self):
        # hand-built object path: zero raw maxima yield all-zero columns
        from qdsched.cpm import _scaled

        scaled = _scaled((0, 0, 0), 0)
        assert np.all(scaled == 0.0)

    def test_attribute_csv_round_trip(self, chain):
        import csv as csv_mod
        import io

        attrs = attribute_table(chain)
        text = attribute_csv(chain, attrs)
        rows = list(csv_mod.reader(io.StringIO(text)))
        assert rows[0][:3] == ["id", "activity", "ES"]
        assert len(rows) == 1 + chain.num_activities
        assert float(rows[-1][2]) == pytest.approx(1.0)  # sink ES


@pytest.mark.skipif(dataset_dir("j30") is None, reason="j30 data not fetched")
class TestOnRealData:
    def test_first_j30_instance_counts(self):
        path = discover_instances(dataset_dir("j30"))[0]
        inst = parse_instance_file(path)
        assert inst.num_activities == 32
        assert inst.num_resources == 4

    def test_lower_bound_matches_oracle_on_j30(self):
        for path in discover_instances(dataset_dir("j30"))[:10]:
            inst = parse_instance_file(path)
            attrs = attribute_table(inst)
            assert attrs.lower_bound == longest_path_to(inst, inst.sink)

    def test_closures_match_oracle_on_j30(self):
        path = discover_instances(dataset_dir("j30"))[0]
        inst = parse_instance_file(path)
        preds, succs = closures(inst)
        for j in range(inst.num_activities):
            assert succs[j] == len(reachable_from(inst, j, inst.successors))

    def test_attributes_in_unit_interval_on_j30(self):
        for path in discover_instances(dataset_dir("j30"))[:20]:
            attrs = attribute_table(parse_instance_file(path))
            for name, col in attrs.columns.items():
                assert np.all((col >= 0.0) & (col <= 1.0)), name
