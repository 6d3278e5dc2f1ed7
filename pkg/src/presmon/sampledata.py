"""Bundled demo data: a hand-built sepsis exploration model and a synthetic log.

The public 4TU sepsis event log cannot be redistributed here, so the
generator below produces a statistically similar stand-in: 782 cases over
24 activity names whose control flow correlates with (a) intensive-care
admission and (b) the release type, the two outcome definitions used by
the demo datasets. Everything is seeded and deterministic.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from random import Random

from .declare import Template, parse_constraint
from .dtree import DecisionTree, Hyperparameters, Leaf, Split, _impurity
from .encoder import ConstraintUniverse
from .logio import Event, EventLog, Trace, cut_traces_before
from .model import ModelBundle
from .recommender import LambdaWeights

FREQUENT_ACTIVITIES = [
    "ER Registration",
    "ER Triage",
    "ER Sepsis Triage",
    "CRP",
    "LacticAcid",
    "Leucocytes",
    "IV Liquid",
    "IV Antibiotics",
    "Admission NC",
    "Release A",
    "Return ER",
    "Release B",
]

RARE_ACTIVITIES = [
    "Admission IC",
    "Release C",
    "Release D",
    "Release E",
    "Blood Culture",
    "X Ray",
    "ECG",
    "Consult Internist",
    "Dialysis",
    "Transfer Ward",
    "Vitals Check",
    "Discharge Planning",
]

SIGMA_15 = [
    "ER Sepsis Triage",
    "ER Registration",
    "ER Triage",
    "CRP",
    "LacticAcid",
    "Leucocytes",
    "IV Antibiotics",
    "IV Liquid",
    "Admission NC",
    "CRP",
    "Leucocytes",
    "Admission NC",
    "CRP",
    "Leucocytes",
    "Release B",
]

SIGMA_5 = ["IV Liquid", "ER Registration", "ER Triage", "ER Sepsis Triage", "IV Antibiotics"]


def fixture_tree() -> DecisionTree:
    """The five-leaf exploration tree used throughout the docs and tests.

    Three positive paths: a heavy one on existence(Release A) satisfied
    (460 of 540 positives), a pure three-step one (37), and an impure
    four-step one (36 vs 15, entropy 0.874 bits).
    """
    c_release_a = parse_constraint("existence(Release A)")
    c_admission = parse_constraint("existence(Admission NC)")
    c_release_b = parse_constraint("exactly(Release B)")
    c_return_er = parse_constraint("existence(Return ER)")

    def entropy(pos, neg):
        return _impurity("entropy", pos, neg)

    root = Split(
        column=0,
        constraint=c_release_a,
        satisfied=Leaf(1, 0.0, 460, 0),
        violated=Split(
            column=1,
            constraint=c_admission,
            satisfied=Split(
                column=2,
                constraint=c_release_b,
                satisfied=Leaf(1, 0.0, 37, 0),
                violated=Split(
                    column=3,
                    constraint=c_return_er,
                    satisfied=Leaf(0, entropy(3, 20), 3, 20),
                    violated=Leaf(1, entropy(36, 15), 36, 15),
                ),
            ),
            violated=Leaf(0, entropy(4, 50), 4, 50),
        ),
    )
    universe = ConstraintUniverse(
        [c_release_a, c_admission, c_release_b, c_return_er],
        families_used={Template.EXISTENCE.family},
        source_alphabet=set(FREQUENT_ACTIVITIES),
    )
    return DecisionTree(root, universe, Hyperparameters(criterion="entropy", max_depth=4))


def fixture_model() -> ModelBundle:
    return ModelBundle(
        tree=fixture_tree(),
        weights=LambdaWeights(0.4, 0.4, 0.2),
        th_fit=0.75,
        alphabet=FREQUENT_ACTIVITIES,
        families=["E"],
        metadata={"dataset": "sepsis-demo", "trained_at": "2015-01-01T00:00:00+00:00"},
    )


# --- synthetic log ------------------------------------------------------------

_T0 = datetime(2014, 1, 1, 8, 0, tzinfo=timezone.utc)


# calibration of the synthetic cohort: the overlap between intensive-care
# trajectories and ordinary ones caps how well any control-flow model can do
_P_INTENSIVE = 0.14
_P_RELEASE_BEFORE_IC = 0.25   # intensive cases released once before the transfer
_P_NO_RELEASE_RECORDED = 0.15  # ordinary cases that end without a release event
_P_LACTIC = {True: 0.90, False: 0.42}      # per lab round
_P_WARD_ADMISSION = {True: 0.85, False: 0.50}  # per treatment round
_ROUNDS = {True: (1, 3), False: (0, 2)}    # extra treatment rounds (uniform incl.)


def _pick(rng: Random, pool):
    roll = rng.random()
    acc = 0.0
    for name, weight in pool:
        acc += weight
        if roll <= acc:
            return name
    return pool[-1][0]


def _case_activities(rng: Random) -> tuple[list[str], bool]:
    """One synthetic hospitalization; returns (activities, went_to_intensive_care)."""
    intensive = rng.random() < _P_INTENSIVE
    trace: list[str] = []

    triage = ["ER Registration", "ER Triage", "ER Sepsis Triage"]
    if rng.random() < 0.10:
        rng.shuffle(triage)
    trace += triage

    def lab_round():
        block = ["CRP"]
        if rng.random() < 0.85:
            block.append("Leucocytes")
        if rng.random() < _P_LACTIC[intensive]:
            block.append("LacticAcid")
        rng.shuffle(block)
        return block

    trace += lab_round()
    if rng.random() < 0.80:
        trace.append("IV Antibiotics")
    if rng.random() < 0.65:
        trace.append("IV Liquid")

    low, high = _ROUNDS[intensive]
    for _ in range(rng.randint(low, high)):
        if rng.random() < _P_WARD_ADMISSION[intensive]:
            trace.append("Admission NC")
        trace += lab_round()

    for rare in ("Blood Culture", "X Ray", "ECG", "Consult Internist", "Dialysis",
                 "Transfer Ward", "Vitals Check"):
        if rng.random() < 0.03:
            trace.insert(rng.randrange(3, len(trace) + 1), rare)

    normal_release = [("Release A", 0.845), ("Release B", 0.07), ("Release C", 0.035),
                      ("Release D", 0.025), ("Release E", 0.025)]
    if intensive:
        if rng.random() < _P_RELEASE_BEFORE_IC:
            trace.append(_pick(rng, normal_release))
            trace += lab_round()
        trace.append("Admission IC")
        trace += lab_round()
        if rng.random() < 0.5:
            trace.append("Admission NC")
        if rng.random() < 0.80:
            trace.append(_pick(rng, [("Release A", 0.40), ("Release B", 0.25),
                                     ("Release C", 0.15), ("Release D", 0.10),
                                     ("Release E", 0.10)]))
    elif rng.random() > _P_NO_RELEASE_RECORDED:
        trace.append(_pick(rng, normal_release))
        if rng.random() < 0.04:
            trace.append("Discharge Planning")
        if rng.random() < 0.10:
            trace.append("Return ER")
    return trace, intensive


def synth_sepsis_base(n_cases: int = 782, seed: int = 77) -> EventLog:
    """The uncut synthetic log; intensive-care admission recorded as an attribute."""
    rng = Random(seed)
    traces = []
    for i in range(n_cases):
        activities, intensive = _case_activities(rng)
        start = _T0 + timedelta(hours=5 * i + rng.randrange(0, 4))
        ts = start
        events = []
        case_id = f"S{i:04d}"
        for activity in activities:
            events.append(Event(activity, case_id, ts))
            ts += timedelta(minutes=rng.randrange(30, 360))
        traces.append(Trace(case_id, events, attributes={"intensive_care": str(int(intensive))}))
    return EventLog(traces)


def synth_sepsis_dataset(variant: str, n_cases: int = 782, seed: int = 77) -> EventLog:
    """Labeled demo dataset.

    variant "2": desired outcome = the patient never goes to intensive care;
    cases are cut right before the admission so the outcome never leaks
    into the features.
    variant "3": outcome = the case ends with the most common release type.
    """
    base = synth_sepsis_base(n_cases, seed)
    if variant in ("2", "sepsis_cases_2"):
        for trace in base.traces:
            trace.label = 1 - int(trace.attributes["intensive_care"])
        return cut_traces_before(base, {"Admission IC"})
    if variant in ("3", "sepsis_cases_3"):
        for trace in base.traces:
            trace.label = int("Release A" in trace.activities)
        return base
    raise ValueError(f"unknown variant {variant!r}")
