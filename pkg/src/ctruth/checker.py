"""Budgeted acceptance of witness streams.

A check pulls finitely many items, validates their shape, enforces the
output discipline (equal or extending inputs demand the same outputs),
rejects any pair whose asserted content is refutable within the budget,
and then walks the statement's input space to see whether every demand
the budget can express has been answered.  The three outcomes:

    accepted_up_to   no fault found and all bounded demands answered
    rejected         a pair is malformed, conflicting, or provably wrong
    pending          no fault, but some bounded demand is unanswered

Rejection is sound: it needs a definite refutation, never a timeout.
Acceptance is always relative to the stated budget.
"""

from dataclasses import dataclass, field

from . import vm
from .formula import (
    FALSE,
    Formula,
    Implies,
    eval3,
    numeral,
    print_formula,
    subst_term,
)
from .witness import (
    END,
    IN_NUM,
    IN_PREFIX,
    IN_SEL,
    IOPair,
    Numeral,
    OUT_CODE,
    OUT_NUM,
    OUT_SEL,
    Prefix,
    Selector,
    ShapeMismatch,
    TRIVIAL,
    WitnessStream,
    is_pair,
    pair_complete,
    semantic_content,
    serialize_item,
    serialize_token,
    shape_check,
    slot,
)


@dataclass(frozen=True)
class Budget:
    pull_limit: int = 32
    numeral_bound: int = 8
    vm_steps: int = 10000

    @property
    def search_bound(self) -> int:
        """How far value searches go; at least as far as the pull limit."""
        return max(self.numeral_bound, self.pull_limit)


@dataclass(frozen=True)
class Probe:
    """A supplied antecedent witness, matched to implication slots by
    the antecedent statement itself (syntactic equality).  A trusted
    probe's pairs may be assumed correct when judging an implication."""

    formula: Formula
    stream: WitnessStream
    trusted: bool = True


@dataclass(frozen=True)
class Verdict:
    status: str  # accepted_up_to | rejected | pending
    budget: Budget
    pair: IOPair = None
    conflict: IOPair = None
    reason: object = None  # a statement (refuted content) or a text
    missing: tuple = None  # input tokens locating the unanswered demand

    def __bool__(self):
        return self.status == "accepted_up_to"

    def exit_code(self) -> int:
        return {"accepted_up_to": 0, "pending": 1, "rejected": 2}[self.status]

    def line(self) -> str:
        if self.status == "accepted_up_to":
            return (
                f"VERDICT accepted_up_to pulls={self.budget.pull_limit}"
                f" numerals={self.budget.numeral_bound}"
            )
        if self.status == "rejected":
            reason = (
                print_formula(self.reason)
                if isinstance(self.reason, Formula)
                else str(self.reason)
            )
            if self.conflict is not None:
                return (
                    f"VERDICT rejected pair={serialize_item(self.pair)}"
                    f" conflict={serialize_item(self.conflict)} reason={reason}"
                )
            return f"VERDICT rejected pair={serialize_item(self.pair)} reason={reason}"
        toks = ",".join(serialize_token(t) for t in self.missing)
        return f"VERDICT pending missing=({toks})"


def _accepted(budget):
    return Verdict("accepted_up_to", budget)


def _rejected(budget, pair, reason, conflict=None):
    return Verdict("rejected", budget, pair=pair, conflict=conflict, reason=reason)


def _pending(budget, path):
    return Verdict("pending", budget, missing=tuple(path))


# ---------------------------------------------------------------------------
# output discipline along the joint spine


def _joint_conflict(f: Formula, p: IOPair, q: IOPair):
    """None, or the discipline broken by q against p.

    Walks both pairs along the statement jointly while their inputs
    agree (prefix inputs may extend one another).  Wherever inputs have
    agreed, the outputs must be the same tokens; a pair falling silent
    at an output slot where the other speaks breaks the rule too, since
    giving too little output cannot be repaired by a later pair.
    """
    if (not p.inputs and not p.outputs) or (not q.inputs and not q.outputs):
        return None  # the trivial pair asserts nothing
    ins_p, outs_p = list(p.inputs), list(p.outputs)
    ins_q, outs_q = list(q.inputs), list(q.outputs)
    g = f
    extended = False
    while True:
        s = slot(g)
        kind = s[0]
        if kind == END:
            return None
        if kind in (IN_NUM, IN_SEL, IN_PREFIX):
            if not ins_p or not ins_q:
                return None  # one pair stops demanding; nothing to compare
            a, b = ins_p.pop(0), ins_q.pop(0)
            if kind == IN_PREFIX:
                if a != b:
                    if a.extends(b) or b.extends(a):
                        extended = True
                    else:
                        return None
                g = s[2]
            elif a != b:
                return None
            elif kind == IN_NUM:
                g = s[2]  # slot kinds below do not depend on the value
            else:
                g = s[1 + a.choice]
            continue
        # an output slot, inputs in agreement so far
        if not outs_p and not outs_q:
            return None
        if not outs_p or not outs_q:
            return "monotonicity" if extended else "functionality"
        a, b = outs_p.pop(0), outs_q.pop(0)
        if a != b:
            return "monotonicity" if extended else "functionality"
        if kind == OUT_NUM:
            g = s[2]
        elif kind == OUT_SEL:
            g = s[1 + a.choice]
        else:  # OUT_CODE ends the pair
            return None


# ---------------------------------------------------------------------------
# coverage walk

_REJ = "rej"
_PEND = "pend"


@dataclass
class _Cursor:
    pair: IOPair  # as originally seen, for reporting
    ins: list
    outs: list


def _walk(g, cursors, path, budget, probes):
    """First unmet demand or definite fault under g, else None.

    Returns (_PEND, path) or (_REJ, pair, reason).  `cursors` are the
    pairs still walking this subtree, already past `path`'s tokens.
    """
    s = slot(g)
    kind = s[0]
    if kind == END:
        return None if cursors else (_PEND, path)
    if kind == IN_NUM:
        _, var, body = s
        for n in range(budget.numeral_bound + 1):
            tok = Numeral(n)
            branch = [
                _Cursor(c.pair, c.ins[1:], c.outs)
                for c in cursors
                if c.ins and c.ins[0] == tok
            ]
            if not branch:
                return (_PEND, path + [tok])
            r = _walk(subst_term(body, var, numeral(n)), branch, path + [tok], budget, probes)
            if r:
                return r
        return None
    if kind == IN_SEL:
        for choice in (0, 1):
            tok = Selector(choice)
            branch = [
                _Cursor(c.pair, c.ins[1:], c.outs)
                for c in cursors
                if c.ins and c.ins[0] == tok
            ]
            if not branch:
                return (_PEND, path + [tok])
            r = _walk(s[1 + choice], branch, path + [tok], budget, probes)
            if r:
                return r
        return None
    if kind == IN_PREFIX:
        ante, cons = s[1], s[2]
        for probe in probes:
            if probe.formula != ante:
                continue
            observed = Prefix(probe.stream.pull(budget.pull_limit))
            branch = [
                _Cursor(c.pair, c.ins[1:], c.outs)
                for c in cursors
                if c.ins and isinstance(c.ins[0], Prefix) and observed.extends(c.ins[0])
            ]
            if not branch:
                return (_PEND, path + [observed])
            r = _walk(cons, branch, path + [observed], budget, probes)
            if r:
                return r
        return None  # no probe, no demand to meet
    # output slots: follow the stream's own (unique) choice
    speaking = [c for c in cursors if c.outs]
    if not speaking:
        return (_PEND, path)
    tok = speaking[0].outs[0]
    if kind == OUT_NUM:
        _, var, body = s
        branch = [_Cursor(c.pair, c.ins, c.outs[1:]) for c in speaking]
        return _walk(subst_term(body, var, numeral(tok.value)), branch, path, budget, probes)
    if kind == OUT_SEL:
        branch = [_Cursor(c.pair, c.ins, c.outs[1:]) for c in speaking]
        return _walk(s[1 + tok.choice], branch, path, budget, probes)
    # OUT_CODE: decode, run, and check the emitted stream against the body
    try:
        prog = vm.godel_decode(tok.value)
    except vm.DecodeError as e:
        return (_REJ, speaking[0].pair, f"code does not decode: {e}")
    inner = vm.run_stream(prog, {}, budget.vm_steps)
    v = check_witness(inner, s[1], budget)
    if v.status == "rejected":
        return (_REJ, speaking[0].pair, f"decoded program fails: {v.line()}")
    if v.status == "pending":
        return (_PEND, list(v.missing) if v.missing else path)
    return None


# ---------------------------------------------------------------------------
# the checker

# hard ceiling on the enumeration work a single content decision may take
_DECISION_ALLOWANCE = 200_000


def _decision_cost(f: Formula, budget: Budget) -> int:
    """Upper bound on the points eval3 would visit deciding f."""
    from .formula import And, Atom, Box, Exists, Forall, Not, Or

    if isinstance(f, Atom):
        return 1
    if isinstance(f, (Not, Box)):
        return 1 + _decision_cost(f.body, budget)
    if isinstance(f, (And, Or, Implies)):
        return 1 + _decision_cost(f.left, budget) + _decision_cost(f.right, budget)
    bound = budget.numeral_bound if isinstance(f, Forall) else budget.search_bound
    inner = _decision_cost(f.body, budget)
    return 1 + (bound + 1) * inner


def _refuted(content: Formula, budget: Budget) -> bool:
    """Definite refutation of a pair's content, declined when deciding
    it would blow the enumeration allowance.  Declining keeps the
    checker sound: it only ever rejects on a decision it completed."""
    if _decision_cost(content, budget) > _DECISION_ALLOWANCE:
        return False
    return eval3(content, {}, budget.numeral_bound, budget.search_bound) is FALSE


def check_witness(w: WitnessStream, f: Formula, budget: Budget, probes=()) -> Verdict:
    """Judge a stream against a statement within the given budget."""
    items = w.pull(budget.pull_limit)
    pairs = []
    for item in items:
        if not is_pair(item):
            continue
        try:
            pairs.append((item, shape_check(f, item)))
        except ShapeMismatch as e:
            return _rejected(budget, item, str(e))

    # output discipline, pairwise in scan order
    for j in range(len(pairs)):
        for i in range(j):
            kind = _joint_conflict(f, pairs[i][1], pairs[j][1])
            if kind:
                return _rejected(budget, pairs[j][0], kind, conflict=pairs[i][0])

    # per-pair content, rejected only on a definite refutation
    for raw, p in pairs:
        content = semantic_content(f, p)
        if _refuted(content, budget):
            return _rejected(budget, raw, content)
        if isinstance(f, Implies) and p.inputs and isinstance(p.inputs[0], Prefix):
            lead = p.inputs[0]
            for probe in probes:
                if not probe.trusted or probe.formula != f.left:
                    continue
                observed = Prefix(probe.stream.pull(len(lead.items)))
                if not observed.extends(lead):
                    continue
                rest = semantic_content(f.right, IOPair(p.inputs[1:], p.outputs))
                if _refuted(rest, budget):
                    return _rejected(budget, raw, rest)

    cursors = [_Cursor(raw, list(p.inputs), list(p.outputs)) for raw, p in pairs]
    r = _walk(f, cursors, [], budget, list(probes))
    if r is None:
        return _accepted(budget)
    if r[0] == _PEND:
        return _pending(budget, r[1])
    return _rejected(budget, r[1], r[2])


def check_code(code, f: Formula, budget: Budget, inputs=None, probes=()) -> Verdict:
    """Decode (if needed) and run a program, then judge its stream."""
    if isinstance(code, vm.WCode):
        prog = code
    else:
        value = code.value if isinstance(code, Numeral) else int(code)
        prog = vm.godel_decode(value)
    stream = vm.run_stream(prog, inputs or {}, budget.vm_steps)
    return check_witness(stream, f, budget, probes)


def check_realizability(f: Formula, code, budget: Budget, inputs=None, probes=()) -> Verdict:
    """Run witness-machine code under the budget and judge its stream.

    Boxed positions keep their usual demand for further codes, and
    transformer programs are exercised by naming their input streams
    (keys of inputs, queried by number from inside the machine) and
    supplying matching trusted probes.
    """
    return check_code(code, f, budget, inputs=inputs, probes=probes)


# ---------------------------------------------------------------------------
# synthesis for the low-complexity fragment

EXHAUSTED = object()


class SynthesisFailed(Exception):
    """The bounded search could not certify the statement."""


def synthesize_sigma03(f: Formula, budget: Budget) -> WitnessStream:
    """Search out a canonical witness for a low-complexity sentence.

    Universal inputs are answered for every numeral up to the bound,
    existential outputs take the least value that survives checking at
    the full bound, and boxed parts become literal emitter programs.
    Pairs come out in input order; input-rooted statements lead with
    the trivial pair.  Raises SynthesisFailed when some search runs out
    of budget, and ValueError outside the recognized shape.
    """
    from .formula import classify

    if not classify(f).sigma03_shape:
        raise ValueError("statement is not in the recognized low-complexity shape")
    suffixes = _synth(f, budget)
    if suffixes is EXHAUSTED:
        raise SynthesisFailed(
            f"no witness found within numerals<={budget.search_bound}: {print_formula(f)}"
        )
    items = []
    if slot(f)[0] in (IN_NUM, IN_SEL, IN_PREFIX):
        items.append(TRIVIAL)
    items.extend(IOPair(tuple(i), tuple(o)) for i, o in suffixes)
    return WitnessStream.from_items(items)


def _desk_true(f: Formula, budget: Budget) -> bool:
    """Bounded classical truth: the decision the synthesizer trusts."""
    from .formula import And, Atom, Box, Exists, Forall, Not, Or, eval_term

    if isinstance(f, Atom):
        a, b = eval_term(f.left, {}), eval_term(f.right, {})
        return a == b if f.rel == "=" else a < b
    if isinstance(f, Not):
        return not _desk_true(f.body, budget)
    if isinstance(f, And):
        return _desk_true(f.left, budget) and _desk_true(f.right, budget)
    if isinstance(f, Or):
        return _desk_true(f.left, budget) or _desk_true(f.right, budget)
    if isinstance(f, Implies):
        return (not _desk_true(f.left, budget)) or _desk_true(f.right, budget)
    if isinstance(f, Forall):
        return all(
            _desk_true(subst_term(f.body, f.var, numeral(n)), budget)
            for n in range(budget.numeral_bound + 1)
        )
    if isinstance(f, Exists):
        return any(
            _desk_true(subst_term(f.body, f.var, numeral(n)), budget)
            for n in range(budget.search_bound + 1)
        )
    if isinstance(f, Box):
        return _desk_true(f.body, budget)
    raise TypeError(f"not a statement: {f!r}")


def _synth(g: Formula, budget: Budget):
    s = slot(g)
    kind = s[0]
    if kind == END:
        return [((), ())] if _desk_true(g, budget) else EXHAUSTED
    if kind == IN_NUM:
        _, var, body = s
        out = []
        for n in range(budget.numeral_bound + 1):
            sub = _synth(subst_term(body, var, numeral(n)), budget)
            if sub is EXHAUSTED:
                return EXHAUSTED
            out.extend(((Numeral(n),) + i, o) for i, o in sub)
        return out
    if kind == IN_SEL:
        out = []
        for choice in (0, 1):
            sub = _synth(s[1 + choice], budget)
            if sub is EXHAUSTED:
                return EXHAUSTED
            out.extend(((Selector(choice),) + i, o) for i, o in sub)
        return out
    if kind == IN_PREFIX:
        raise ValueError("implications are outside the synthesizable shape")
    if kind == OUT_NUM:
        _, var, body = s
        for v in range(budget.search_bound + 1):
            inst = subst_term(body, var, numeral(v))
            if not _desk_true(inst, budget):
                continue
            sub = _synth(inst, budget)
            if sub is EXHAUSTED:
                continue
            return [(i, (Numeral(v),) + o) for i, o in sub]
        return EXHAUSTED
    if kind == OUT_SEL:
        for choice in (0, 1):
            side = s[1 + choice]
            if not _desk_true(side, budget):
                continue
            sub = _synth(side, budget)
            if sub is EXHAUSTED:
                continue
            return [(i, (Selector(choice),) + o) for i, o in sub]
        return EXHAUSTED
    # OUT_CODE: bake the body's witness into a literal emitter program
    body = s[1]
    sub = _synth(body, budget)
    if sub is EXHAUSTED:
        return EXHAUSTED
    inner = []
    if slot(body)[0] in (IN_NUM, IN_SEL, IN_PREFIX):
        inner.append(TRIVIAL)
    inner.extend(IOPair(tuple(i), tuple(o)) for i, o in sub)
    emits = " ".join(f"(emit {vm.encode_item(it)})" for it in inner)
    prog = vm.program(f"(prog (seq {emits}))")
    return [((), (Numeral(prog.godel()),))]
