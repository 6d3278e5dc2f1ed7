import pytest

from presmon.declare import Family
from presmon.errors import ValidationError
from presmon.logio import LabelSpec
from presmon.ltlf import parse_ltlf
from presmon.pipeline import TrainConfig, evaluate_model, family_set, preprocess, train_model
from test_logio import make_log


def learnable_log(n=40):
    rows = []
    for i in range(n):
        if i % 2:
            rows.append((f"p{i}", ["start", "work", "ok", "end"]))
        else:
            rows.append((f"n{i}", ["start", "work", "end", "close"]))
    return make_log(rows)


@pytest.fixture(scope="module")
def trained():
    event_log = learnable_log()
    label = LabelSpec("ltlf_satisfaction", formula=parse_ltlf("F(ok)"))
    return event_log, label, train_model(event_log, label, TrainConfig(families="E", dataset_name="demo"))


class TestFamilySet:
    def test_codes(self):
        assert family_set("E") == {Family.E}
        assert family_set("C") == {Family.E, Family.C}
        assert family_set("PR") == {Family.E, Family.PR}
        assert family_set("nr") == {Family.E, Family.NR}
        assert family_set("A") == {Family.E, Family.C, Family.PR, Family.NR}

    def test_unknown(self):
        with pytest.raises(ValidationError):
            family_set("Z")


class TestPreprocess:
    def test_label_computed_before_cut(self):
        # the labeling activity is also the cut point: labels must come from
        # the complete trace, not the truncated one
        event_log = make_log([(f"c{i}", ["a", "stop", "b"]) for i in range(10)])
        label = LabelSpec("ltlf_satisfaction", formula=parse_ltlf("F(stop)"), cut_activities={"stop"})
        train, val, test, _ = preprocess(event_log, label, TrainConfig())
        for part in (train, val, test):
            for trace in part.traces:
                assert trace.label == 1
                assert "stop" not in trace.activities

    def test_cap_from_dataset_rule(self):
        event_log = learnable_log()
        label = LabelSpec("attribute", attribute_name="label")
        for trace in event_log.traces:
            trace.label = 1
        _, _, _, cap = preprocess(event_log, label, TrainConfig(dataset_name="traffic_fines"))
        assert cap == 9


class TestTrainModel:
    def test_bundle_metadata(self, trained):
        _, _, bundle = trained
        assert bundle.metadata["dataset"] == "demo"
        assert bundle.metadata["label_spec"] == {"kind": "ltlf_satisfaction", "formula": "F(ok)"}
        assert bundle.metadata["prefix_cap"] >= 1
        assert bundle.families == ["E"]
        assert bundle.th_fit in [0.55, 0.65, 0.75, 0.85]

    def test_learns_the_rule(self, trained):
        _, _, bundle = trained
        texts = [c.text() for c in bundle.universe.constraints]
        assert any("ok" in t for t in texts)

    def test_alphabet_from_training_partition(self, trained):
        event_log, _, bundle = trained
        assert set(bundle.alphabet) <= event_log.alphabet


class TestEvaluateModel:
    def test_uses_stored_label_spec(self, trained):
        event_log, _, bundle = trained
        report = evaluate_model(event_log, bundle)  # label=None -> stored spec
        assert report.average_f() == 1.0

    def test_no_split_evaluates_everything(self, trained):
        event_log, label, bundle = trained
        whole = evaluate_model(event_log, bundle, label, split=False)
        part = evaluate_model(event_log, bundle, label, split=True)
        assert sum(cm.total for cm in whole.per_k.values()) > sum(cm.total for cm in part.per_k.values())
