"""Witness extraction from constructive proofs.

Proof terms are a small natural deduction calculus over the formula
language: hypotheses by index (0 is the innermost binder), lambda and
application for implication, pairing and projections, injections and
case split, generalization and instantiation, existential introduction,
induction, a search rule turning no-counterexample premises into
decidable existentials, and a fixed table of arithmetic axioms.

Extraction first normalizes the proof, then compiles it to a witness
stream.  Statements whose spine only ever demands input (universal
quantifiers, conjunction sides, implication prefixes feeding an
input-only consequent, atoms) need no computation at all: a proof of
one certifies its truth, so a plain enumerator of input paths is a
correct witness, and that enumerator also exists as machine code.
Genuinely productive forms (existential values, disjunct choices,
induction with content, search) compile to stream transformations.
"""

import itertools
from dataclasses import dataclass

from . import vm
from .checker import Budget, _desk_true, _synth, EXHAUSTED
from .combinators import apply_implication, decompose, project_forall
from .formula import (
    Add,
    And,
    Atom,
    Box,
    Exists,
    Forall,
    Formula,
    Implies,
    Mul,
    Not,
    One,
    Or,
    Term,
    Var,
    Zero,
    eval_term,
    free_vars,
    numeral,
    numeral_value,
    parse,
    parse_term,
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
    OUT_SEL,
    Prefix,
    Selector,
    TRIVIAL,
    WS,
    WitnessStream,
    is_pair,
    shape_check,
    slot,
)


class ProofError(Exception):
    """The proof term does not typecheck."""


class ExtractionError(Exception):
    """The proof typechecks but falls outside the compilable forms."""


# ---------------------------------------------------------------------------
# proof terms


@dataclass(frozen=True)
class Hyp:
    index: int


@dataclass(frozen=True)
class Lam:
    ante: Formula
    body: "Proof"


@dataclass(frozen=True)
class App:
    fn: "Proof"
    arg: "Proof"


@dataclass(frozen=True)
class Pair:
    left: "Proof"
    right: "Proof"


@dataclass(frozen=True)
class Fst:
    arg: "Proof"


@dataclass(frozen=True)
class Snd:
    arg: "Proof"


@dataclass(frozen=True)
class Inl:
    arg: "Proof"
    other: Formula  # the right disjunct, not proved


@dataclass(frozen=True)
class Inr:
    other: Formula  # the left disjunct, not proved
    arg: "Proof"


@dataclass(frozen=True)
class Case:
    scrut: "Proof"
    left: "Proof"  # binds hypothesis 0 = left disjunct
    right: "Proof"  # binds hypothesis 0 = right disjunct


@dataclass(frozen=True)
class Gen:
    var: str
    body: "Proof"


@dataclass(frozen=True)
class Inst:
    fn: "Proof"
    term: Term


@dataclass(frozen=True)
class Exi:
    target: Formula  # the existential statement introduced
    term: Term
    body: "Proof"


@dataclass(frozen=True)
class Ind:
    var: str
    motive: Formula
    base: "Proof"  # proves motive[0]
    step: "Proof"  # binds hypothesis 0 = motive, proves motive[var+1]


@dataclass(frozen=True)
class Markov:
    body: "Proof"  # proves (A x. (D -> absurd)) -> absurd, D quantifier-free


@dataclass(frozen=True)
class Ax:
    name: str


Proof = (
    Hyp,
    Lam,
    App,
    Pair,
    Fst,
    Snd,
    Inl,
    Inr,
    Case,
    Gen,
    Inst,
    Exi,
    Ind,
    Markov,
    Ax,
)


_AXIOM_TEXT = {
    "refl": "A x. x=x",
    "sym": "A x. A y. (x=y -> y=x)",
    "trans": "A x. A y. A z. (x=y -> (y=z -> x=z))",
    "plus_zero": "A x. x+0=x",
    "plus_succ": "A x. A y. x+(y+1)=(x+y)+1",
    "mul_zero": "A x. x*0=0",
    "mul_succ": "A x. A y. x*(y+1)=x*y+x",
    "succ_inj": "A x. A y. (x+1=y+1 -> x=y)",
    "zero_ne_succ": "A x. (~(x+1=0))",
    "lt_succ": "A x. x<x+1",
    "lt_trans": "A x. A y. A z. (x<y -> (y<z -> x<z))",
    "add_comm": "A x. A y. x+y=y+x",
    "eq_dec": "A x. A y. (x=y \\/ ~(x=y))",
}

AXIOMS = {name: parse(text) for name, text in _AXIOM_TEXT.items()}


# ---------------------------------------------------------------------------
# typing


def _term_vars(t: Term) -> set:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, (Add, Mul)):
        return _term_vars(t.left) | _term_vars(t.right)
    return set()


def _binder_vars(f: Formula) -> set:
    if isinstance(f, (Forall, Exists)):
        return {f.var} | _binder_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return _binder_vars(f.left) | _binder_vars(f.right)
    if isinstance(f, (Not, Box)):
        return _binder_vars(f.body)
    return set()


def _no_capture(body: Formula, t: Term):
    hit = _binder_vars(body) & _term_vars(t)
    if hit:
        raise ProofError(f"instantiation would capture {sorted(hit)}")


def _quantifier_free(f: Formula) -> bool:
    if isinstance(f, Atom):
        return True
    if isinstance(f, Not):
        return _quantifier_free(f.body)
    if isinstance(f, (And, Or)):
        return _quantifier_free(f.left) and _quantifier_free(f.right)
    return False  # implications, boxes and quantifiers stay out of search


def _absurd_atom(f: Formula) -> bool:
    """A closed atom that evaluates false (the stand-in for absurdity)."""
    if not isinstance(f, Atom) or _term_vars(f.left) | _term_vars(f.right):
        return False
    a, b = eval_term(f.left, {}), eval_term(f.right, {})
    return not (a == b if f.rel == "=" else a < b)


def infer(p, hyps: tuple = ()) -> Formula:
    """The statement a proof term establishes, given hypothesis types.

    hyps[0] is the innermost binder.  Raises ProofError on any misfit.
    """
    if isinstance(p, Hyp):
        if not 0 <= p.index < len(hyps):
            raise ProofError(f"hypothesis {p.index} is not in scope")
        return hyps[p.index]
    if isinstance(p, Lam):
        return Implies(p.ante, infer(p.body, (p.ante,) + hyps))
    if isinstance(p, App):
        ft = infer(p.fn, hyps)
        if not isinstance(ft, Implies):
            raise ProofError(f"applying a non-implication: {print_formula(ft)}")
        at = infer(p.arg, hyps)
        if at != ft.left:
            raise ProofError(
                f"argument proves {print_formula(at)}, wanted {print_formula(ft.left)}"
            )
        return ft.right
    if isinstance(p, Pair):
        return And(infer(p.left, hyps), infer(p.right, hyps))
    if isinstance(p, Fst):
        t = infer(p.arg, hyps)
        if not isinstance(t, And):
            raise ProofError("projecting a non-conjunction")
        return t.left
    if isinstance(p, Snd):
        t = infer(p.arg, hyps)
        if not isinstance(t, And):
            raise ProofError("projecting a non-conjunction")
        return t.right
    if isinstance(p, Inl):
        return Or(infer(p.arg, hyps), p.other)
    if isinstance(p, Inr):
        return Or(p.other, infer(p.arg, hyps))
    if isinstance(p, Case):
        st = infer(p.scrut, hyps)
        if not isinstance(st, Or):
            raise ProofError("case split on a non-disjunction")
        lt = infer(p.left, (st.left,) + hyps)
        rt = infer(p.right, (st.right,) + hyps)
        if lt != rt:
            raise ProofError("case branches prove different statements")
        return lt
    if isinstance(p, Gen):
        for h in hyps:
            if p.var in free_vars(h):
                raise ProofError(f"{p.var} is free in an open hypothesis")
        return Forall(p.var, infer(p.body, hyps))
    if isinstance(p, Inst):
        t = infer(p.fn, hyps)
        if not isinstance(t, Forall):
            raise ProofError("instantiating a non-universal")
        _no_capture(t.body, p.term)
        return subst_term(t.body, t.var, p.term)
    if isinstance(p, Exi):
        if not isinstance(p.target, Exists):
            raise ProofError("existential introduction needs an existential target")
        _no_capture(p.target.body, p.term)
        want = subst_term(p.target.body, p.target.var, p.term)
        got = infer(p.body, hyps)
        if got != want:
            raise ProofError(
                f"body proves {print_formula(got)}, wanted {print_formula(want)}"
            )
        return p.target
    if isinstance(p, Ind):
        for h in hyps:
            if p.var in free_vars(h):
                raise ProofError(f"{p.var} is free in an open hypothesis")
        want0 = subst_term(p.motive, p.var, numeral(0))
        got0 = infer(p.base, hyps)
        if got0 != want0:
            raise ProofError(
                f"base proves {print_formula(got0)}, wanted {print_formula(want0)}"
            )
        wants = subst_term(p.motive, p.var, Add(Var(p.var), One()))
        gots = infer(p.step, (p.motive,) + hyps)
        if gots != wants:
            raise ProofError(
                f"step proves {print_formula(gots)}, wanted {print_formula(wants)}"
            )
        return Forall(p.var, p.motive)
    if isinstance(p, Markov):
        # body : (A x. (D -> absurd)) -> absurd, for a closed false atom
        t = infer(p.body, hyps)
        ok = (
            isinstance(t, Implies)
            and isinstance(t.left, Forall)
            and isinstance(t.left.body, Implies)
            and t.left.body.right == t.right
            and _absurd_atom(t.right)
        )
        if not ok:
            raise ProofError("search needs a no-counterexample-implies-absurdity premise")
        ex = Exists(t.left.var, t.left.body.left)
        if not _quantifier_free(ex.body):
            raise ProofError("search needs a quantifier-free matrix")
        return ex
    if isinstance(p, Ax):
        if p.name not in AXIOMS:
            raise ProofError(f"unknown axiom {p.name!r}")
        return AXIOMS[p.name]
    raise ProofError(f"not a proof term: {p!r}")


# ---------------------------------------------------------------------------
# normalization


def _shift(p, d: int, cutoff: int = 0):
    if isinstance(p, Hyp):
        return Hyp(p.index + d) if p.index >= cutoff else p
    if isinstance(p, Lam):
        return Lam(p.ante, _shift(p.body, d, cutoff + 1))
    if isinstance(p, App):
        return App(_shift(p.fn, d, cutoff), _shift(p.arg, d, cutoff))
    if isinstance(p, Pair):
        return Pair(_shift(p.left, d, cutoff), _shift(p.right, d, cutoff))
    if isinstance(p, Fst):
        return Fst(_shift(p.arg, d, cutoff))
    if isinstance(p, Snd):
        return Snd(_shift(p.arg, d, cutoff))
    if isinstance(p, Inl):
        return Inl(_shift(p.arg, d, cutoff), p.other)
    if isinstance(p, Inr):
        return Inr(p.other, _shift(p.arg, d, cutoff))
    if isinstance(p, Case):
        return Case(
            _shift(p.scrut, d, cutoff),
            _shift(p.left, d, cutoff + 1),
            _shift(p.right, d, cutoff + 1),
        )
    if isinstance(p, Gen):
        return Gen(p.var, _shift(p.body, d, cutoff))
    if isinstance(p, Inst):
        return Inst(_shift(p.fn, d, cutoff), p.term)
    if isinstance(p, Exi):
        return Exi(p.target, p.term, _shift(p.body, d, cutoff))
    if isinstance(p, Ind):
        return Ind(p.var, p.motive, _shift(p.base, d, cutoff), _shift(p.step, d, cutoff + 1))
    if isinstance(p, Markov):
        return Markov(_shift(p.body, d, cutoff))
    return p


def _hsubst(p, j: int, q):
    """Substitute q for hypothesis j, closing that binder."""
    if isinstance(p, Hyp):
        if p.index == j:
            return _shift(q, j)
        return Hyp(p.index - 1) if p.index > j else p
    if isinstance(p, Lam):
        return Lam(p.ante, _hsubst(p.body, j + 1, q))
    if isinstance(p, App):
        return App(_hsubst(p.fn, j, q), _hsubst(p.arg, j, q))
    if isinstance(p, Pair):
        return Pair(_hsubst(p.left, j, q), _hsubst(p.right, j, q))
    if isinstance(p, Fst):
        return Fst(_hsubst(p.arg, j, q))
    if isinstance(p, Snd):
        return Snd(_hsubst(p.arg, j, q))
    if isinstance(p, Inl):
        return Inl(_hsubst(p.arg, j, q), p.other)
    if isinstance(p, Inr):
        return Inr(p.other, _hsubst(p.arg, j, q))
    if isinstance(p, Case):
        return Case(
            _hsubst(p.scrut, j, q),
            _hsubst(p.left, j + 1, q),
            _hsubst(p.right, j + 1, q),
        )
    if isinstance(p, Gen):
        return Gen(p.var, _hsubst(p.body, j, q))
    if isinstance(p, Inst):
        return Inst(_hsubst(p.fn, j, q), p.term)
    if isinstance(p, Exi):
        return Exi(p.target, p.term, _hsubst(p.body, j, q))
    if isinstance(p, Ind):
        return Ind(p.var, p.motive, _hsubst(p.base, j, q), _hsubst(p.step, j + 1, q))
    if isinstance(p, Markov):
        return Markov(_hsubst(p.body, j, q))
    return p


def _tsubst(t: Term, var: str, repl: Term) -> Term:
    if isinstance(t, Var):
        return repl if t.name == var else t
    if isinstance(t, Add):
        return Add(_tsubst(t.left, var, repl), _tsubst(t.right, var, repl))
    if isinstance(t, Mul):
        return Mul(_tsubst(t.left, var, repl), _tsubst(t.right, var, repl))
    return t


def _psubst(p, var: str, t: Term):
    """Substitute a term for a free first-order variable across a proof."""
    if isinstance(p, Hyp):
        return p
    if isinstance(p, Lam):
        return Lam(subst_term(p.ante, var, t), _psubst(p.body, var, t))
    if isinstance(p, App):
        return App(_psubst(p.fn, var, t), _psubst(p.arg, var, t))
    if isinstance(p, Pair):
        return Pair(_psubst(p.left, var, t), _psubst(p.right, var, t))
    if isinstance(p, Fst):
        return Fst(_psubst(p.arg, var, t))
    if isinstance(p, Snd):
        return Snd(_psubst(p.arg, var, t))
    if isinstance(p, Inl):
        return Inl(_psubst(p.arg, var, t), subst_term(p.other, var, t))
    if isinstance(p, Inr):
        return Inr(subst_term(p.other, var, t), _psubst(p.arg, var, t))
    if isinstance(p, Case):
        return Case(
            _psubst(p.scrut, var, t),
            _psubst(p.left, var, t),
            _psubst(p.right, var, t),
        )
    if isinstance(p, Gen):
        if p.var == var:
            return p
        if p.var in _term_vars(t):
            raise ProofError(f"substitution would capture {p.var}")
        return Gen(p.var, _psubst(p.body, var, t))
    if isinstance(p, Inst):
        return Inst(_psubst(p.fn, var, t), _tsubst(p.term, var, t))
    if isinstance(p, Exi):
        return Exi(
            subst_term(p.target, var, t),
            _tsubst(p.term, var, t),
            _psubst(p.body, var, t),
        )
    if isinstance(p, Ind):
        if p.var == var:
            return p
        if p.var in _term_vars(t):
            raise ProofError(f"substitution would capture {p.var}")
        return Ind(
            p.var,
            subst_term(p.motive, var, t),
            _psubst(p.base, var, t),
            _psubst(p.step, var, t),
        )
    if isinstance(p, Markov):
        return Markov(_psubst(p.body, var, t))
    return p


def _step(p):
    """One bottom-up rewrite pass."""
    if isinstance(p, App):
        fn, arg = _step(p.fn), _step(p.arg)
        if isinstance(fn, Lam):
            return _hsubst(fn.body, 0, arg)
        return App(fn, arg)
    if isinstance(p, Fst):
        a = _step(p.arg)
        return a.left if isinstance(a, Pair) else Fst(a)
    if isinstance(p, Snd):
        a = _step(p.arg)
        return a.right if isinstance(a, Pair) else Snd(a)
    if isinstance(p, Case):
        s = _step(p.scrut)
        if isinstance(s, Inl):
            return _hsubst(_step(p.left), 0, s.arg)
        if isinstance(s, Inr):
            return _hsubst(_step(p.right), 0, s.arg)
        return Case(s, _step(p.left), _step(p.right))
    if isinstance(p, Inst):
        fn = _step(p.fn)
        if isinstance(fn, Gen):
            return _psubst(fn.body, fn.var, p.term)
        if isinstance(fn, Ind):
            n = numeral_value(p.term)
            if n is not None:
                cur = fn.base
                for k in range(n):
                    step_k = _psubst(fn.step, fn.var, numeral(k))
                    cur = _hsubst(step_k, 0, cur)
                return cur
        return Inst(fn, p.term)
    if isinstance(p, Lam):
        return Lam(p.ante, _step(p.body))
    if isinstance(p, Pair):
        return Pair(_step(p.left), _step(p.right))
    if isinstance(p, Inl):
        return Inl(_step(p.arg), p.other)
    if isinstance(p, Inr):
        return Inr(p.other, _step(p.arg))
    if isinstance(p, Gen):
        return Gen(p.var, _step(p.body))
    if isinstance(p, Exi):
        return Exi(p.target, p.term, _step(p.body))
    if isinstance(p, Ind):
        return Ind(p.var, p.motive, _step(p.base), _step(p.step))
    if isinstance(p, Markov):
        return Markov(_step(p.body))
    return p


def normalize(p, fuel: int = 1000):
    for _ in range(fuel):
        q = _step(p)
        if q == p:
            return p
        p = q
    raise ProofError("proof does not normalize within the fuel bound")


# ---------------------------------------------------------------------------
# input-only statements and their enumerators


def _demand_only(f: Formula) -> bool:
    """True when the spine never produces: such statements are witnessed
    by enumerating input paths (the proof already certifies truth)."""
    kind = slot(f)[0]
    if kind == END:
        return True
    if kind == IN_NUM:
        return _demand_only(slot(f)[2])
    if kind == IN_SEL:
        return _demand_only(slot(f)[1]) and _demand_only(slot(f)[2])
    if kind == IN_PREFIX:
        return _demand_only(slot(f)[2])  # never answers, so never owes output
    return False


def _effective(f: Formula) -> bool:
    """Demand-only up to disjunctions that bounded evaluation decides."""
    kind = slot(f)[0]
    if kind == END:
        return True
    if kind == IN_NUM:
        return _effective(slot(f)[2])
    if kind == IN_SEL:
        return _effective(slot(f)[1]) and _effective(slot(f)[2])
    if kind == IN_PREFIX:
        return _effective(slot(f)[2])
    if kind == OUT_SEL:
        return _quantifier_free(f)
    return False


def _enum_tokens(f: Formula, k: int):
    """Decode index k into the k-th answered pair of f, or None.

    Input slots branch on k; a decided disjunction contributes the true
    side's selector as output.  Returns (input tokens, output tokens).
    """
    s = slot(f)
    kind = s[0]
    if kind == END:
        return ([], []) if k == 0 else None
    if kind == IN_NUM:
        v, rest = vm.uncantor(k)
        sub = _enum_tokens(subst_term(s[2], s[1], numeral(v)), rest)
        return None if sub is None else ([Numeral(v)] + sub[0], sub[1])
    if kind == IN_SEL:
        side = s[1 + (k % 2)]
        sub = _enum_tokens(side, k // 2)
        return None if sub is None else ([Selector(k % 2)] + sub[0], sub[1])
    if kind == IN_PREFIX:
        sub = _enum_tokens(s[2], k)
        return None if sub is None else ([Prefix(())] + sub[0], sub[1])
    # OUT_SEL over a decidable matrix: assert the side that holds
    tiny = Budget(pull_limit=0, numeral_bound=0, vm_steps=0)
    choice = 0 if _desk_true(s[1], tiny) else 1
    sub = _enum_tokens(s[1 + choice], k)
    return None if sub is None else (sub[0], [Selector(choice)] + sub[1])


def _enum_stream(f: Formula) -> WitnessStream:
    def items():
        if slot(f)[0] in (IN_NUM, IN_SEL, IN_PREFIX):
            yield TRIVIAL
        for k in itertools.count():
            toks = _enum_tokens(f, k)
            yield WS if toks is None else IOPair(tuple(toks[0]), tuple(toks[1]))

    return WitnessStream(items)


def _vm_ins(f: Formula, i: int) -> str:
    s = slot(f)
    kind = s[0]
    if kind == END:
        return "0"
    if kind == IN_NUM:
        inner = _vm_ins(s[2], i + 1)
        return (
            f"(let v{i} (fst k{i}) (let k{i + 1} (snd k{i})"
            f" (+ 1 (cantor (* 3 v{i}) {inner}))))"
        )
    if kind == IN_SEL:
        left = _vm_ins(s[1], i + 1)
        right = _vm_ins(s[2], i + 1)
        return (
            f"(let b{i} (mod k{i} 2) (let k{i + 1} (div k{i} 2)"
            f" (if (= b{i} 0) (+ 1 (cantor 1 {left})) (+ 1 (cantor 4 {right})))))"
        )
    # IN_PREFIX: the empty prefix has token code 2 and consumes no index
    inner = _vm_ins(s[2], i)
    return f"(+ 1 (cantor 2 {inner}))"


def _vm_valid(f: Formula, i: int) -> str:
    s = slot(f)
    kind = s[0]
    if kind == END:
        return f"(= k{i} 0)"
    if kind == IN_NUM:
        return f"(let k{i + 1} (snd k{i}) {_vm_valid(s[2], i + 1)})"
    if kind == IN_SEL:
        left = _vm_valid(s[1], i + 1)
        right = _vm_valid(s[2], i + 1)
        return (
            f"(let b{i} (mod k{i} 2) (let k{i + 1} (div k{i} 2)"
            f" (if (= b{i} 0) {left} {right})))"
        )
    return _vm_valid(s[2], i)


def _enum_code(f: Formula) -> vm.WCode:
    item = f"(if {_vm_valid(f, 0)} (+ 1 (cantor {_vm_ins(f, 0)} 0)) 0)"
    lead = "(emit 1) " if slot(f)[0] != END else ""
    text = (
        "(prog (def cantor (a b) (+ (div (* (+ a b) (+ (+ a b) 1)) 2) b))"
        f" (seq {lead}(set k0 0) (while 1 (seq (emit {item}) (set k0 (+ k0 1))))))"
    )
    return vm.program(text)


# ---------------------------------------------------------------------------
# stream surgery helpers


def _prepend_in(tok, item):
    if not is_pair(item):
        return item
    return IOPair((tok,) + item.inputs, item.outputs)


def _prepend_out(tok, item):
    if not is_pair(item):
        return item
    return IOPair(item.inputs, (tok,) + item.outputs)


def _map_stream(src: WitnessStream, fn) -> WitnessStream:
    def items():
        i = 0
        while True:
            got = src.pull(i + 1)
            if len(got) <= i:
                return
            yield fn(got[i])
            i += 1

    return WitnessStream(items)


def _interleave_tagged(left: WitnessStream, right: WitnessStream) -> WitnessStream:
    def items():
        i = 0
        while True:
            lg = left.pull(i + 1)
            rg = right.pull(i + 1)
            if len(lg) <= i and len(rg) <= i:
                return
            yield _prepend_in(Selector(0), lg[i]) if len(lg) > i else WS
            yield _prepend_in(Selector(1), rg[i]) if len(rg) > i else WS
            i += 1

    return WitnessStream(items)


# ---------------------------------------------------------------------------
# compilation to streams


def _close(f: Formula, env: dict) -> Formula:
    for name, val in env.items():
        f = subst_term(f, name, numeral(val))
    return f


def _realize(p, ctx, env):
    """A witness stream (or, for implications, a stream transformer).

    ctx is the hypothesis list, innermost first, as (statement, stream)
    with the statement as written (open); env carries the numeric values
    of the first-order variables currently generalized over.
    """
    target = _close(infer(p, tuple(f for f, _ in ctx)), env)
    if _effective(target):
        return _enum_stream(target)
    if isinstance(p, Hyp):
        got = ctx[p.index][1]
        return got.copy() if isinstance(got, WitnessStream) else got
    if isinstance(p, Lam):
        ante = p.ante

        def transformer(xs: WitnessStream) -> WitnessStream:
            return _stream(p.body, [(ante, xs)] + ctx, env)

        return transformer
    if isinstance(p, App):
        fn = _realize(p.fn, ctx, env)
        arg = _stream(p.arg, ctx, env)
        if callable(fn):
            return fn(arg)
        return apply_implication(fn, arg)
    if isinstance(p, Pair):
        return _interleave_tagged(_stream(p.left, ctx, env), _stream(p.right, ctx, env))
    if isinstance(p, Fst):
        whole = _close(infer(p.arg, tuple(f for f, _ in ctx)), env)
        return decompose(_stream(p.arg, ctx, env), whole)[0]
    if isinstance(p, Snd):
        whole = _close(infer(p.arg, tuple(f for f, _ in ctx)), env)
        return decompose(_stream(p.arg, ctx, env), whole)[1]
    if isinstance(p, Inl):
        return _map_stream(_stream(p.arg, ctx, env), lambda it: _prepend_out(Selector(0), it))
    if isinstance(p, Inr):
        return _map_stream(_stream(p.arg, ctx, env), lambda it: _prepend_out(Selector(1), it))
    if isinstance(p, Case):
        return _realize_case(p, ctx, env)
    if isinstance(p, Gen):
        return _dovetail(lambda n: _stream(p.body, ctx, {**env, p.var: n}))
    if isinstance(p, Inst):
        whole = _close(infer(p.fn, tuple(f for f, _ in ctx)), env)
        v = eval_term(p.term, env)
        return project_forall(_stream(p.fn, ctx, env), whole, v)
    if isinstance(p, Exi):
        v = eval_term(p.term, env)
        return _map_stream(
            _stream(p.body, ctx, env), lambda it: _prepend_out(Numeral(v), it)
        )
    if isinstance(p, Ind):
        return _realize_ind(p, ctx, env)
    if isinstance(p, Markov):
        ex = target
        return _search_stream(ex)
    raise ExtractionError(f"no compilation for this stuck form: {type(p).__name__}")


def _stream(p, ctx, env) -> WitnessStream:
    r = _realize(p, ctx, env)
    if callable(r):
        raise ExtractionError("an implication value cannot be used as a stream here")
    return r


def _dovetail(instantiate) -> WitnessStream:
    """Fair merge of instance streams, tagging each item with its input."""
    cache = {}

    def inst(n):
        if n not in cache:
            cache[n] = instantiate(n)
        return cache[n]

    def items():
        for k in itertools.count():
            n, r = vm.uncantor(k)
            got = inst(n).pull(r + 1)
            yield _prepend_in(Numeral(n), got[r]) if len(got) > r else WS

    return WitnessStream(items)


def _realize_ind(p: Ind, ctx, env) -> WitnessStream:
    cores: dict = {}

    def core(n: int) -> WitnessStream:
        if n in cores:
            return cores[n]
        for k in range(n + 1):
            if k in cores:
                continue
            if k == 0:
                cores[0] = _stream(p.base, ctx, env)
            else:
                hyp_ctx = [(p.motive, cores[k - 1])] + ctx
                cores[k] = _stream(p.step, hyp_ctx, {**env, p.var: k - 1})
        return cores[n]

    return _dovetail(core)


def _realize_case(p: Case, ctx, env) -> WitnessStream:
    whole = _close(infer(p.scrut, tuple(f for f, _ in ctx)), env)
    scrut = _stream(p.scrut, ctx, env)

    def items():
        choice = None
        r = 0
        while choice is None:
            got = scrut.pull(r + 1)
            if len(got) <= r:
                if scrut.exhausted_at(r + 1):
                    return  # the scrutinee never commits; nothing to emit
                continue
            item = got[r]
            r += 1
            if is_pair(item):
                try:
                    norm = shape_check(whole, item)
                except Exception:
                    norm = None
                if norm is not None and norm.outputs:
                    choice = norm.outputs[0].choice
                    break
            yield WS

        def project(it):
            if not is_pair(it):
                return WS
            try:
                norm = shape_check(whole, it)
            except Exception:
                return WS
            if norm.outputs and norm.outputs[0] == Selector(choice):
                return IOPair(norm.inputs, norm.outputs[1:])
            if not norm.inputs and not norm.outputs:
                return TRIVIAL
            return WS

        side = _map_stream(scrut.copy(), project)
        branch = p.left if choice == 0 else p.right
        side_formula = slot(whole)[1 + choice]
        out = _stream(branch, [(side_formula, side)] + ctx, env)
        i = 0
        while True:
            got = out.pull(i + 1)
            if len(got) <= i:
                return
            yield got[i]
            i += 1

    return WitnessStream(items)


def _search_stream(ex: Exists) -> WitnessStream:
    """Unbounded least-value search for a decidable existential."""
    tiny = Budget(pull_limit=4, numeral_bound=4, vm_steps=100)

    def items():
        for v in itertools.count():
            inst = subst_term(ex.body, ex.var, numeral(v))
            if not _desk_true(inst, tiny):
                yield WS
                continue
            sub = _synth(inst, tiny)
            if sub is EXHAUSTED:
                yield WS
                continue
            for i, o in sub:
                yield IOPair(tuple(i), (Numeral(v),) + tuple(o))
            return

    return WitnessStream(items)


def _vm_term(t: Term, var: str) -> str:
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, One):
        return "1"
    if isinstance(t, Var):
        if t.name != var:
            raise ExtractionError(f"term mentions {t.name}, only {var} is available")
        return var
    if isinstance(t, Add):
        return f"(+ {_vm_term(t.left, var)} {_vm_term(t.right, var)})"
    if isinstance(t, Mul):
        return f"(* {_vm_term(t.left, var)} {_vm_term(t.right, var)})"
    raise ExtractionError(f"no machine form for {t!r}")


def _search_code(ex: Exists):
    """Machine code for the search, for atomic or negated-atomic matrices."""
    body = ex.body
    negated = False
    if isinstance(body, Not):
        body, negated = body.body, True
    if not isinstance(body, Atom):
        return None
    try:
        a = _vm_term(body.left, ex.var)
        b = _vm_term(body.right, ex.var)
    except ExtractionError:
        return None
    test = f"(= {a} {b})" if body.rel == "=" else f"(< {a} {b})"
    if negated:
        test = f"(- 1 {test})"
    x = ex.var
    return vm.program(
        "(prog (def cantor (a b) (+ (div (* (+ a b) (+ (+ a b) 1)) 2) b))"
        f" (seq (set {x} 0)"
        f" (while (= {test} 0) (seq (emit 0) (set {x} (+ {x} 1))))"
        f" (emit (+ 1 (cantor 0 (+ 1 (cantor (* 3 {x}) 0)))))))"
    )


# ---------------------------------------------------------------------------
# compilation to machine code
#
# Productive proofs compile to a program computing the i-th item of the
# realized stream directly from i, then emitting them in an endless
# loop.  Each construct contributes one wrapper around its subproof's
# item expression, mirroring the stream combinators above: universal
# generalization splits the index into (instance, position) and tags
# inputs, existential introduction and injections prepend output
# tokens, pairing alternates, induction dispatches on the instance.
# Statements whose spine only demands input fall back to the plain
# enumerator regardless of how they were proved.

_CODE_PRELUDE = (
    "(def cantor (a b) (+ (div (* (+ a b) (+ (+ a b) 1)) 2) b)) "
    "(def prein (t e) (if e (+ 1 (cantor (+ 1 (cantor t (fst (- e 1)))) (snd (- e 1)))) 0)) "
    "(def preout (t e) (if e (+ 1 (cantor (fst (- e 1)) (+ 1 (cantor t (snd (- e 1)))))) 0))"
)


def _uses_hyp(p, j: int) -> bool:
    if isinstance(p, Hyp):
        return p.index == j
    if isinstance(p, Lam):
        return _uses_hyp(p.body, j + 1)
    if isinstance(p, App):
        return _uses_hyp(p.fn, j) or _uses_hyp(p.arg, j)
    if isinstance(p, Pair):
        return _uses_hyp(p.left, j) or _uses_hyp(p.right, j)
    if isinstance(p, (Fst, Snd, Inl, Inr)):
        return _uses_hyp(p.arg, j)
    if isinstance(p, Markov):
        return _uses_hyp(p.body, j)
    if isinstance(p, Case):
        return (
            _uses_hyp(p.scrut, j)
            or _uses_hyp(p.left, j + 1)
            or _uses_hyp(p.right, j + 1)
        )
    if isinstance(p, Gen):
        return _uses_hyp(p.body, j)
    if isinstance(p, Inst):
        return _uses_hyp(p.fn, j)
    if isinstance(p, Exi):
        return _uses_hyp(p.body, j)
    if isinstance(p, Ind):
        return _uses_hyp(p.base, j) or _uses_hyp(p.step, j + 1)
    return False


def _vm_term_env(t: Term, env: dict) -> str:
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, One):
        return "1"
    if isinstance(t, Var):
        if t.name not in env:
            raise ExtractionError(f"term mentions {t.name}, which no loop binds")
        return env[t.name]
    if isinstance(t, Add):
        return f"(+ {_vm_term_env(t.left, env)} {_vm_term_env(t.right, env)})"
    if isinstance(t, Mul):
        return f"(* {_vm_term_env(t.left, env)} {_vm_term_env(t.right, env)})"
    raise ExtractionError(f"no machine form for {t!r}")


def _item_expr(p, hyps: tuple, env: dict, idx: str, d: int) -> str:
    """A machine expression for the idx-th item of p's realized stream.

    env maps generalized first-order variables to the machine symbols
    holding their current instance; d keeps generated names fresh.
    """
    target = infer(p, hyps)
    if _demand_only(target):
        return (
            f"(let k0 {idx} (if {_vm_valid(target, 0)}"
            f" (+ 1 (cantor {_vm_ins(target, 0)} 0)) 0))"
        )
    if isinstance(p, Exi):
        v = _vm_term_env(p.term, env)
        return f"(preout (* 3 {v}) {_item_expr(p.body, hyps, env, idx, d)})"
    if isinstance(p, Inl):
        return f"(preout 1 {_item_expr(p.arg, hyps, env, idx, d)})"
    if isinstance(p, Inr):
        return f"(preout 4 {_item_expr(p.arg, hyps, env, idx, d)})"
    if isinstance(p, Pair):
        left = _item_expr(p.left, hyps, env, f"j{d}", d + 1)
        right = _item_expr(p.right, hyps, env, f"j{d}", d + 1)
        return (
            f"(let j{d} (div {idx} 2)"
            f" (if (= (mod {idx} 2) 0) (prein 1 {left}) (prein 4 {right})))"
        )
    if isinstance(p, Gen):
        sym = f"u{d}"
        inner = _item_expr(p.body, hyps, {**env, p.var: sym}, f"j{d}", d + 1)
        return (
            f"(let {sym} (fst {idx}) (let j{d} (snd {idx})"
            f" (prein (* 3 {sym}) {inner})))"
        )
    if isinstance(p, Ind):
        if _uses_hyp(p.step, 0):
            raise ExtractionError("a step that consumes its hypothesis has no direct code")
        sym = f"u{d}"
        base = _item_expr(p.base, hyps, env, f"j{d}", d + 1)
        step = _item_expr(p.step, (p.motive,) + hyps, {**env, p.var: sym}, f"j{d}", d + 1)
        return (
            f"(let n{d} (fst {idx}) (let j{d} (snd {idx})"
            f" (prein (* 3 n{d})"
            f" (if (= n{d} 0) {base} (let {sym} (- n{d} 1) {step})))))"
        )
    raise ExtractionError(f"no machine form for {type(p).__name__} here")


def _compile_code(p, target: Formula) -> vm.WCode:
    item = _item_expr(p, (), {}, "i", 0)
    lead = "(emit 1) " if slot(target)[0] in (IN_NUM, IN_SEL, IN_PREFIX) else ""
    return vm.program(
        "(prog "
        + _CODE_PRELUDE
        + f" (seq {lead}(set i 0) (while 1 (seq (emit {item}) (set i (+ 1 i))))))"
    )


def identity_code(horizon: int = 16) -> vm.WCode:
    """An implication transformer as machine code.

    Echoes input stream 0, leading every answer with the exact
    transcript prefix that prompted it, so applying the emitted stream
    to the same antecedent gives the antecedent back, item for item.
    The transcript is carried as a coded list whose size doubles per
    recorded item, so the echo stops listening after horizon items and
    pads with whitespace; answers prompted earlier stay good.
    """
    return vm.program(
        "(prog (def app (l e)"
        " (if l (+ 1 (pair (fst (- l 1)) (app (snd (- l 1)) e))) (+ 1 (pair e 0))))"
        " (seq (emit 1) (set tr 0) (set k 0)"
        f" (while (< k {horizon}) (seq (let e (query 0)"
        " (seq (set tr (app tr e))"
        " (if e"
        " (emit (+ 1 (pair (+ 1 (pair (+ 2 (* 3 tr)) (fst (- e 1)))) (snd (- e 1)))))"
        " (emit 0))))"
        " (set k (+ k 1))))"
        " (while 1 (emit 0))))"
    )


# ---------------------------------------------------------------------------
# the public face


@dataclass
class Extraction:
    """What a proof yields: the statement, and its realizer.

    For implication statements the realizer is a transformer from
    antecedent streams to consequent streams (use .apply); otherwise it
    is a stream.  .code is a machine program computing the same witness
    when one of the compilable shapes applies, else None.
    """

    formula: Formula
    stream: WitnessStream
    transform: object
    code: vm.WCode

    def apply(self, xs: WitnessStream) -> WitnessStream:
        if self.transform is None:
            raise ExtractionError("this realizer is not a transformer")
        return self.transform(xs)


def extract(proof) -> Extraction:
    """Typecheck, normalize and compile a closed proof."""
    target = infer(proof, ())
    normal = normalize(proof)
    r = _realize(normal, [], {})
    if callable(r):
        code = None
        if normal == Lam(normal.ante, Hyp(0)):
            code = identity_code()
        return Extraction(target, None, r, code)
    if _demand_only(target):
        return Extraction(target, r, None, _enum_code(target))
    if isinstance(normal, Markov) and isinstance(target, Exists):
        return Extraction(target, r, None, _search_code(target))
    try:
        code = _compile_code(normal, target)
    except ExtractionError:
        code = None
    return Extraction(target, r, None, code)


def search_realizer(ex: Exists) -> Extraction:
    """The searching realizer for a decidable existential, proof aside."""
    if not isinstance(ex, Exists) or not _quantifier_free(ex.body):
        raise ExtractionError("search needs an existential with a decidable matrix")
    return Extraction(ex, _search_stream(ex), None, _search_code(ex))


def decider_code(matrix: Formula, var: str) -> vm.WCode:
    """Code answering every n with a selector: (n : 0) when the atomic
    (or negated-atomic) property holds there, (n : 1) when it fails."""
    body, negated = matrix, False
    if isinstance(body, Not):
        body, negated = body.body, True
    if not isinstance(body, Atom):
        raise ExtractionError("only atoms and their negations decide this way")
    a = _vm_term(body.left, var)
    b = _vm_term(body.right, var)
    test = f"(= {a} {b})" if body.rel == "=" else f"(< {a} {b})"
    if negated:
        test = f"(- 1 {test})"
    return vm.program(
        "(prog (def cantor (a b) (+ (div (* (+ a b) (+ (+ a b) 1)) 2) b))"
        f" (seq (emit 1) (set {var} 0) (while 1 (seq"
        f" (emit (+ 1 (cantor (+ 1 (cantor (* 3 {var}) 0))"
        f" (+ 1 (cantor (if {test} 1 4) 0)))))"
        f" (set {var} (+ {var} 1))))))"
    )


def markov_realizer(decider, nonempty_evidence=None, vm_steps: int = 10000) -> WitnessStream:
    """Unbounded search over a decidability witness.

    The decider is machine code (or a ready stream) for a statement of
    the form A x. (A(x) \\/ ~A(x)): pairs (n : c, ...) with c = 0
    meaning the property holds at n, the remaining outputs witnessing
    it.  The search asks about n = 0, 1, 2, ... in order and, at the
    first hit, re-emits that instance's pairs with the selector shed
    and the found value prepended, witnessing E x. A(x).  The
    nonempty_evidence argument is the caller's no-counterexample
    obligation; nothing is ever demanded of it.
    """
    src = vm.run_stream(decider, {}, vm_steps) if isinstance(decider, vm.WCode) else decider

    def verdict_of(item):
        if (
            is_pair(item)
            and item.inputs
            and isinstance(item.inputs[0], Numeral)
            and item.outputs
            and isinstance(item.outputs[0], Selector)
        ):
            return item.inputs[0].value, item.outputs[0].choice
        return None

    def items():
        # one pass over the decider transcript, advancing the candidate
        # past every refusal, until the candidate itself gets a yes
        target = 0
        verdicts = {}
        r = 0
        while True:
            got = src.pull(r + 1)
            if len(got) <= r:
                if src.exhausted_at(r + 1):
                    return  # the decider fell silent; nothing to assert
                yield WS
                continue
            seen = verdict_of(got[r])
            r += 1
            if seen is not None:
                verdicts.setdefault(seen[0], seen[1])
                while verdicts.get(target) == 1:
                    target += 1
                if verdicts.get(target) == 0:
                    break
            yield WS
        tag = Numeral(target)
        k = 0
        while True:
            got = src.pull(k + 1)
            if len(got) <= k:
                if src.exhausted_at(k + 1):
                    return
                yield WS
                continue
            item = got[k]
            k += 1
            if not (is_pair(item) and item.inputs[:1] == (tag,)):
                yield WS
            elif item.outputs and item.outputs[0] == Selector(0):
                yield IOPair(item.inputs[1:], (tag,) + item.outputs[1:])
            elif not item.outputs:
                yield IOPair(item.inputs[1:], (tag,))
            else:
                yield WS

    return WitnessStream(items)


def ti_realizer(tasks) -> WitnessStream:
    """Schedule demand-driven tasks into a stream of answers.

    Each task exposes demands(round, answered) returning ("answer", v)
    or ("need", ids).  The scheduler sweeps the unanswered tasks in
    index order, records answers as (index : value) pairs, and keeps
    sweeping until everything is answered; the emission order is then a
    linear extension of the demand order.  A sweep with no progress
    emits one whitespace and retries with a larger round; after as many
    stalled sweeps as there are tasks, the stream ends unfinished.
    """
    tasks = list(tasks)

    def items():
        answered: dict = {}
        rounds = 0
        stalls = 0
        while len(answered) < len(tasks):
            progress = False
            for i, task in enumerate(tasks):
                if i in answered:
                    continue
                got = task.demands(rounds, dict(answered))
                if got[0] == "answer":
                    answered[i] = got[1]
                    progress = True
                    yield IOPair((Numeral(i),), (Numeral(got[1]),))
            rounds += 1
            if progress:
                stalls = 0
                continue
            stalls += 1
            if stalls > len(tasks):
                return
            yield WS

    return WitnessStream(items)


# ---------------------------------------------------------------------------
# proof text


def parse_proof_text(text: str):
    """Read a proof file: first line the statement, then one proof term.

    Proof syntax: (hyp N), (lam {A} p), (app p q), (pair p q), (fst p),
    (snd p), (inl p {B}), (inr {A} p), (case p l r), (gen x p),
    (inst p {t}), (exi {E} {t} p), (ind x {B} base step), (markov p),
    (ax name).  Braces hold formula or term text; names bound by gen or
    ind are in scope inside the braces.  The parsed proof is checked to
    prove the stated line.
    """
    lines = text.strip().splitlines()
    if not lines:
        raise ProofError("empty proof text")
    claimed = parse(lines[0])
    toks = _proof_tokens("\n".join(lines[1:]))
    proof, pos = _parse_proof(toks, 0, ())
    if pos != len(toks):
        raise ProofError(f"trailing proof text: {toks[pos:]}")
    got = infer(proof, ())
    if got != claimed:
        raise ProofError(
            f"proof establishes {print_formula(got)}, file claims {print_formula(claimed)}"
        )
    return claimed, proof


def _proof_tokens(text: str):
    toks = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()":
            toks.append(c)
            i += 1
            continue
        if c == "{":
            j = text.index("}", i)
            toks.append(("brace", text[i + 1 : j].strip()))
            i = j + 1
            continue
        j = i
        while j < len(text) and not text[j].isspace() and text[j] not in "(){}":
            j += 1
        toks.append(text[i:j])
        i = j
    return toks


def _expect_brace(toks, pos):
    if pos >= len(toks) or not isinstance(toks[pos], tuple):
        raise ProofError(f"expected {{...}} at token {pos}")
    return toks[pos][1], pos + 1


def _parse_proof(toks, pos, bound):
    if pos >= len(toks):
        raise ProofError("unexpected end of proof")
    t = toks[pos]
    if t != "(":
        raise ProofError(f"expected ( at token {pos}, found {t!r}")
    head = toks[pos + 1]
    pos += 2
    if head == "hyp":
        idx = int(toks[pos])
        node, pos = Hyp(idx), pos + 1
    elif head == "lam":
        text, pos = _expect_brace(toks, pos)
        ante = parse(text, free=bound)
        body, pos = _parse_proof(toks, pos, bound)
        node = Lam(ante, body)
    elif head == "app":
        fn, pos = _parse_proof(toks, pos, bound)
        arg, pos = _parse_proof(toks, pos, bound)
        node = App(fn, arg)
    elif head == "pair":
        a, pos = _parse_proof(toks, pos, bound)
        b, pos = _parse_proof(toks, pos, bound)
        node = Pair(a, b)
    elif head == "fst":
        a, pos = _parse_proof(toks, pos, bound)
        node = Fst(a)
    elif head == "snd":
        a, pos = _parse_proof(toks, pos, bound)
        node = Snd(a)
    elif head == "inl":
        a, pos = _parse_proof(toks, pos, bound)
        text, pos = _expect_brace(toks, pos)
        node = Inl(a, parse(text, free=bound))
    elif head == "inr":
        text, pos = _expect_brace(toks, pos)
        a, pos = _parse_proof(toks, pos, bound)
        node = Inr(parse(text, free=bound), a)
    elif head == "case":
        s, pos = _parse_proof(toks, pos, bound)
        l, pos = _parse_proof(toks, pos, bound)
        r, pos = _parse_proof(toks, pos, bound)
        node = Case(s, l, r)
    elif head == "gen":
        var = toks[pos]
        body, pos = _parse_proof(toks, pos + 1, bound + (var,))
        node = Gen(var, body)
    elif head == "inst":
        fn, pos = _parse_proof(toks, pos, bound)
        text, pos = _expect_brace(toks, pos)
        node = Inst(fn, parse_term(text, free=bound))
    elif head == "exi":
        ftext, pos = _expect_brace(toks, pos)
        ttext, pos = _expect_brace(toks, pos)
        body, pos = _parse_proof(toks, pos, bound)
        node = Exi(parse(ftext, free=bound), parse_term(ttext, free=bound), body)
    elif head == "ind":
        var = toks[pos]
        pos += 1
        mtext, pos = _expect_brace(toks, pos)
        motive = parse(mtext, free=bound + (var,))
        base, pos = _parse_proof(toks, pos, bound)
        step, pos = _parse_proof(toks, pos, bound + (var,))
        node = Ind(var, motive, base, step)
    elif head == "markov":
        a, pos = _parse_proof(toks, pos, bound)
        node = Markov(a)
    elif head == "ax":
        node, pos = Ax(toks[pos]), pos + 1
    else:
        raise ProofError(f"unknown proof form {head!r}")
    if pos >= len(toks) or toks[pos] != ")":
        raise ProofError(f"expected ) after {head} at token {pos}")
    return node, pos + 1
