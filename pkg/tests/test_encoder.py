import math
import random
from collections import Counter

import numpy as np
import pytest

from presmon.declare import Constraint, Family, Template
from presmon.encoder import (
    ConstraintUniverse,
    EncodedDataset,
    apriori_filter,
    build_universe,
    encode,
    load_dataset_cache,
    mutual_info_order,
    mutual_info_rank,
    mutual_info_scores,
    resolve_top_h,
    write_dataset_cache,
    write_dataset_csv,
)
from presmon.errors import EmptyUniverse
from test_logio import make_log

ALL_FAMILIES = {Family.E, Family.C, Family.PR, Family.NR}


def paper_response_universe():
    """The six response constraints of the worked encoding example, in order."""
    pairs = [("a", "b"), ("b", "a"), ("a", "c"), ("c", "a"), ("b", "c"), ("c", "b")]
    return ConstraintUniverse([Constraint(Template.RESPONSE, x, y) for x, y in pairs])


class TestBuildUniverse:
    def test_size_over_ten_activities(self):
        universe = build_universe([f"act{i}" for i in range(10)], ALL_FAMILIES, existence_ns={1})
        # 4 unary templates x 10 + 14 binary templates x 10*9 ordered pairs
        assert len(universe) == 4 * 10 + 14 * 90 == 1300

    def test_existence_family_two_activities(self):
        universe = build_universe({"a", "b"}, {Family.E}, existence_ns={1})
        assert len(universe) == 8
        assert universe.texts()[:4] == ["existence(a)", "existence(b)", "absence(a)", "absence(b)"]

    def test_empty_families(self):
        assert len(build_universe({"a"}, set())) == 0

    def test_deterministic_order(self):
        u1 = build_universe({"b", "a", "c"}, ALL_FAMILIES)
        u2 = build_universe({"c", "a", "b"}, ALL_FAMILIES)
        assert u1.texts() == u2.texts()

    def test_no_self_pairs(self):
        universe = build_universe({"a", "b"}, {Family.PR})
        assert all(c.activation != c.target for c in universe.constraints)

    def test_multiple_ns(self):
        universe = build_universe({"a"}, {Family.E}, existence_ns={1, 2})
        texts = universe.texts()
        assert "existence(a)" in texts and "existence(n=2, a)" in texts
        assert "absence(a)" in texts and "absence(n=3, a)" in texts


class TestAprioriFilter:
    def test_unary_threshold(self):
        # "a" in 3/4 traces, "b" in 1/4
        event_log = make_log([("c1", ["a"]), ("c2", ["a"]), ("c3", ["a", "b"]), ("c4", ["x"])])
        universe = build_universe({"a", "b", "x"}, {Family.E})
        kept = apriori_filter(universe, event_log, support=0.5)
        assert {c.activation for c in kept.constraints} == {"a"}

    def test_pair_copresence_any_order(self):
        event_log = make_log([("c1", ["a", "b"]), ("c2", ["b", "a"]), ("c3", ["a", "x"])])
        universe = build_universe({"a", "b", "x"}, {Family.PR})
        kept = apriori_filter(universe, event_log, support=0.5)
        pairs = {(c.activation, c.target) for c in kept.constraints}
        assert ("a", "b") in pairs and ("b", "a") in pairs
        assert not any("x" in p for p in pairs)

    def test_tiny_support_keeps_everything(self):
        event_log = make_log([("c1", ["a", "b"]), ("c2", ["b", "x"])])
        universe = build_universe({"a", "b", "x"}, {Family.E})
        kept = apriori_filter(universe, event_log, support=1e-9)
        assert kept.texts() == universe.texts()

    def test_monotone_in_support(self):
        rng = random.Random(5)
        event_log = make_log(
            [(f"c{i}", [rng.choice("abcde") for _ in range(rng.randrange(1, 6))]) for i in range(30)]
        )
        universe = build_universe(set("abcde"), ALL_FAMILIES)
        previous = None
        for support in (0.9, 0.5, 0.2, 0.05):
            try:
                kept = set(apriori_filter(universe, event_log, support).texts())
            except EmptyUniverse:
                kept = set()
            if previous is not None:
                assert previous <= kept
            previous = kept

    def test_empty_universe_raises(self):
        event_log = make_log([("c1", ["a"])])
        universe = build_universe({"zz"}, {Family.E})
        with pytest.raises(EmptyUniverse):
            apriori_filter(universe, event_log, support=0.9)


class TestEncode:
    TRACE = ["a", "b", "c", "a", "b", "c", "c", "a", "b"]

    def test_worked_example_complete(self):
        event_log = make_log([("c1", self.TRACE)])
        encoded = encode(event_log, paper_response_universe(), done=True)
        assert encoded.matrix.tolist() == [[1, 0, 0, 1, 0, 1]]

    def test_worked_example_prefix(self):
        event_log = make_log([("c1", self.TRACE)])
        encoded = encode(event_log, paper_response_universe(), done=False)
        assert encoded.matrix.tolist() == [[3, 2, 2, 3, 2, 3]]

    def test_complete_entries_are_binary(self):
        rng = random.Random(1)
        event_log = make_log(
            [(f"c{i}", [rng.choice("abc") for _ in range(rng.randrange(1, 7))]) for i in range(20)]
        )
        universe = build_universe(set("abc"), ALL_FAMILIES)
        encoded = encode(event_log, universe, done=True)
        assert set(np.unique(encoded.matrix)) <= {0, 1}

    def test_prefix_entries_use_all_codes(self):
        event_log = make_log([("c1", ["a"]), ("c2", ["b", "a", "b"]), ("c3", ["c", "c"])])
        universe = build_universe(set("abc"), ALL_FAMILIES)
        encoded = encode(event_log, universe, done=False)
        assert set(np.unique(encoded.matrix)) == {0, 1, 2, 3}

    def test_empty_universe_gives_zero_width(self):
        event_log = make_log([("c1", ["a"])])
        encoded = encode(event_log, ConstraintUniverse([]), done=True)
        assert encoded.matrix.shape == (1, 0)

    def test_column_independence_under_permutation(self):
        event_log = make_log([("c1", self.TRACE), ("c2", ["b", "a"])])
        universe = paper_response_universe()
        encoded = encode(event_log, universe, done=True)
        perm = [3, 0, 5, 1, 4, 2]
        permuted = encode(event_log, universe.subset(perm), done=True)
        assert permuted.matrix.tolist() == encoded.matrix[:, perm].tolist()

    def test_prefix_log_rows(self):
        event_log = make_log([("c1", ["a", "b", "c"])])
        event_log.traces[0].label = 1
        from presmon.logio import make_prefix_log

        prefix_log = make_prefix_log(event_log, 40)
        encoded = encode(prefix_log, paper_response_universe(), done=False)
        assert encoded.n_rows == 2
        assert encoded.row_index == [("c1", 1), ("c1", 2)]
        assert encoded.labels.tolist() == [1, 1]


def plugin_mi_oracle(column, labels):
    """Independent plug-in MI estimate from raw contingency counts."""
    n = len(labels)
    joint = Counter(zip(column, labels))
    px = Counter(column)
    py = Counter(labels)
    total = 0.0
    for (xv, yv), c in joint.items():
        pxy = c / n
        total += pxy * math.log(pxy / ((px[xv] / n) * (py[yv] / n)))
    return total


class TestMutualInformation:
    def make_dataset(self, matrix, labels):
        universe = ConstraintUniverse(
            [Constraint(Template.EXISTENCE, f"f{i}", n=1) for i in range(len(matrix[0]))]
        )
        return EncodedDataset(np.array(matrix), np.array(labels), universe, list(range(len(matrix))))

    def test_matches_bruteforce_oracle(self):
        rng = random.Random(9)
        matrix = [[rng.randrange(2) for _ in range(6)] for _ in range(50)]
        labels = [rng.randrange(2) for _ in range(50)]
        dataset = self.make_dataset(matrix, labels)
        scores = mutual_info_scores(dataset)
        for j in range(6):
            expected = plugin_mi_oracle([row[j] for row in matrix], labels)
            assert abs(scores[j] - expected) < 1e-12

    def test_label_copy_ranked_first(self):
        labels = [0, 1] * 10
        matrix = [[y, random.Random(i).randrange(2), 1] for i, y in enumerate(labels)]
        dataset = self.make_dataset(matrix, labels)
        order = mutual_info_order(dataset)
        assert order[0] == 0
        # perfect feature attains the label entropy
        assert abs(mutual_info_scores(dataset)[0] - math.log(2)) < 1e-12

    def test_constant_feature_scores_zero_and_ranks_last(self):
        labels = [0, 1, 0, 1]
        matrix = [[y, 1] for y in labels]
        dataset = self.make_dataset(matrix, labels)
        scores = mutual_info_scores(dataset)
        assert scores[1] == 0
        assert mutual_info_order(dataset).tolist() == [0, 1]

    def test_tie_break_by_column_order(self):
        labels = [0, 1, 0, 1]
        matrix = [[1, 1, y] for y in labels]
        assert mutual_info_order(self.make_dataset(matrix, labels)).tolist() == [2, 0, 1]

    def test_rank_keeps_top_half(self):
        labels = [0, 1] * 8
        rng = random.Random(2)
        matrix = [[y, rng.randrange(2), rng.randrange(2), 1] for y in labels]
        dataset = self.make_dataset(matrix, labels)
        kept = mutual_info_rank(dataset, "50%")
        assert len(kept) == 2
        assert kept.constraints[0].activation == "f0"


class TestTopHRule:
    def test_fifty_percent(self):
        assert resolve_top_h("50%", 48) == 24

    def test_thirty_percent(self):
        assert resolve_top_h("30%", 48) == 15  # ceil(14.4)

    def test_sqrt(self):
        assert resolve_top_h("sqrt", 48) == 7


class TestSerialization:
    def test_universe_json_round_trip(self):
        universe = build_universe({"a", "b"}, ALL_FAMILIES)
        again = ConstraintUniverse.from_json(universe.to_json())
        assert again.texts() == universe.texts()
        assert again.families_used == universe.families_used

    def test_dataset_csv(self, tmp_path):
        event_log = make_log([("c1", ["a", "b"])])
        event_log.traces[0].label = 1
        encoded = encode(event_log, paper_response_universe(), done=True)
        path = tmp_path / "enc.csv"
        write_dataset_csv(encoded, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith('row,"response(a, b)"')
        assert lines[0].endswith("label")
        assert lines[1].endswith(",1")

    def test_dataset_cache_round_trip(self, tmp_path):
        event_log = make_log([("c1", ["a", "b", "c"]), ("c2", ["b"])])
        for t in event_log.traces:
            t.label = 0
        encoded = encode(event_log, paper_response_universe(), done=False)
        path = tmp_path / "enc.npz"
        write_dataset_cache(encoded, path)
        again = load_dataset_cache(path)
        assert again.matrix.tolist() == encoded.matrix.tolist()
        assert again.labels.tolist() == encoded.labels.tolist()
        assert again.universe.texts() == encoded.universe.texts()
        assert again.row_index == encoded.row_index
