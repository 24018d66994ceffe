import pytest
from hypothesis import given, settings, strategies as st

from ctruth.checker import (
    Budget,
    Probe,
    SynthesisFailed,
    check_code,
    check_realizability,
    check_witness,
    synthesize_sigma03,
)
from ctruth.formula import parse
from ctruth.vm import program
from ctruth.witness import IOPair, Numeral, Prefix, TRIVIAL, WitnessStream

from oracles import holds

DOUBLING = parse("A x. E y. y=2*x")
B = Budget(pull_limit=64, numeral_bound=3, vm_steps=4000)


def _check(text, f, budget=B):
    return check_witness(WitnessStream.from_text(text), f, budget)


def test_sample_witness_accepted():
    v = _check("(:) (0:0) (1:2) (2:4) (3:6)", DOUBLING)
    assert v.status == "accepted_up_to"
    assert v.exit_code() == 0


def test_missing_instance_pends():
    v = _check("(:) (0:0) (1:2)", DOUBLING)
    assert v.status == "pending"
    assert v.exit_code() == 1


def test_wrong_content_rejected():
    v = _check("(:) (0:0) (1:2) (2:5) (3:6)", DOUBLING)
    assert v.status == "rejected"
    assert v.exit_code() == 2
    assert "(2:5)" in v.line()


def test_functionality_conflict_rejected():
    v = _check("(:) (0:0) (0:1)", DOUBLING)
    assert v.status == "rejected"


def test_shape_error_rejected():
    v = _check("(: 12)", DOUBLING)
    assert v.status == "rejected"


def test_budget_fields_reported():
    v = _check("(:) (0:0) (1:2) (2:4) (3:6)", DOUBLING)
    assert "pulls=64" in v.line() and "numerals=3" in v.line()


def test_implication_unprobed_is_vacuous():
    f = parse("(E x. x=5) -> (E x. x=9)")
    v = _check("(:)", f)
    assert v.status == "accepted_up_to"


def test_trusted_probe_refutes_transformer():
    f = parse("(E x. x=5) -> (E x. x=9)")
    lead = Prefix(tuple(WitnessStream.from_text("(:5)").pull(1)))
    w = WitnessStream.from_items([TRIVIAL, IOPair((lead,), (Numeral(8),))])
    probe = Probe(parse("E x. x=5"), WitnessStream.from_text("(:5)"), trusted=True)
    v = check_witness(w, f, B, probes=(probe,))
    assert v.status == "rejected"


def test_trusted_probe_passes_honest_transformer():
    f = parse("(E x. x=5) -> (E x. x=9)")
    lead = Prefix(tuple(WitnessStream.from_text("(:5)").pull(1)))
    w = WitnessStream.from_items([TRIVIAL, IOPair((lead,), (Numeral(9),))])
    probe = Probe(parse("E x. x=5"), WitnessStream.from_text("(:5)"), trusted=True)
    v = check_witness(w, f, B, probes=(probe,))
    assert v.status == "accepted_up_to"


def test_check_code_runs_a_machine():
    p = program(
        "(prog (seq (emit 1) (set n 0) (while 1 (seq"
        " (emit (+ 1 (pair (+ 1 (pair (* 3 n) 0)) (+ 1 (pair (* 3 (* 2 n)) 0)))))"
        " (set n (+ n 1))))))"
    )
    assert check_code(p, DOUBLING, B).status == "accepted_up_to"


def test_check_realizability_feeds_named_inputs():
    ident = program(
        "(prog (seq (emit 1) (set k 0) (while (< k 8) (seq"
        " (let e (query 0) (if e (emit (+ 1 (pair (+ 1 (pair 2 (fst (- e 1))))"
        " (snd (- e 1))))) (emit 0))) (set k (+ k 1))))))"
    )
    f = parse("(E x. x=2) -> (E x. x=2)")
    ante = WitnessStream.from_text("(: 2)")
    probe = Probe(parse("E x. x=2"), ante.copy(), trusted=True)
    v = check_realizability(f, ident, B, inputs={"0": ante.copy()}, probes=(probe,))
    assert v.status == "accepted_up_to"


def test_synthesize_matches_oracle_on_samples():
    budget = Budget(32, 3, 4000)
    # relativized=True marks sentences whose truth survives cutting the
    # domain at 40 (the successor one needs one value past any cut)
    samples = [
        ("E x. x=3", True),
        ("A x. E y. y=x+1", False),
        ("A x. (x=0 \\/ 0<x)", True),
        ("0=0", True),
    ]
    for text, relativized in samples:
        f = parse(text)
        if relativized:
            assert holds(f, {}, range(40)), text
        w = synthesize_sigma03(f, budget)
        assert check_witness(w, f, budget).status == "accepted_up_to", text


def test_synthesize_false_exhausts():
    for text in ["0=1", "E x. x=x+1", "A x. x<3"]:
        f = parse(text)
        assert not holds(f, {}, range(40)), text
        with pytest.raises(SynthesisFailed):
            synthesize_sigma03(f, Budget(16, 3, 2000))


def test_synthesize_rejects_wrong_shape():
    with pytest.raises(ValueError):
        synthesize_sigma03(parse("A x. E y. A z. z=z"), B)
    with pytest.raises(ValueError):
        synthesize_sigma03(parse("(0=0) -> (0=0)"), B)


def test_synthesized_leads_with_trivial_on_universal_root():
    w = synthesize_sigma03(parse("A x. E y. y=x"), Budget(16, 2, 1000))
    assert w.pull(1) == (TRIVIAL,)


@given(st.integers(min_value=0, max_value=5), st.integers(min_value=0, max_value=5))
@settings(max_examples=30, deadline=None)
def test_synthesis_check_agreement_on_linear_family(a, b):
    # E x. a*x = b style sentences: solvable iff oracle says so
    f = parse(f"E x. {a}*x={b}")
    budget = Budget(24, 4, 2000)
    truth = holds(f, {}, range(25))
    if truth:
        w = synthesize_sigma03(f, budget)
        assert check_witness(w, f, budget).status == "accepted_up_to"
    else:
        with pytest.raises(SynthesisFailed):
            synthesize_sigma03(f, budget)
