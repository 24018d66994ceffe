"""Adversarial witness games at desk scale.

Finite prefix-closed binary trees are arithmetized through tables:
membership, length, incomparability and labelling become finite
disjunctions of equalities over coded sequences, so every move a
player makes is an ordinary witness item that the budgeted checker
can judge.  Strategies are reactive objects; a play alternates one
adversary item and one defender item per round and the referee then
checks the produced streams.

Four games live here:

  * the branching game (``play_theorem1``): the defender asserts
    that arbitrarily deep decided nodes yield two incompatible
    decided nodes, against an adversary who delivers nodes along a
    designated branch and withholds the labels of everything else;
  * the implication-chain game (``prop3_duality``): witnesses for a
    chain of implications are composed behaviourally and the
    propositional combination extracted from the wiring is checked
    for tautology, honest chains against broken ones;
  * the descending-branch encoder (``pi11_encode``): a witness that
    hunts for a dead end by greedy descent and, once found, encodes
    the visited nodes as whitespace delays before answering;
  * narrow replay (``narrow_play``): scripted spawn/copy/feed/pull
    runs that compare instances sharing a fed transcript, flagging
    outputs that depend on anything beyond it.
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from . import vm
from .checker import Budget, Probe, check_witness
from .combinators import apply_implication, normalize_strict
from .formula import (
    And,
    Implies,
    Var,
    disj_all,
    eq,
    exists,
    forall,
    numeral,
    print_formula,
)
from .witness import (
    IOPair,
    Numeral,
    Prefix,
    Selector,
    TRIVIAL,
    WS,
    Whitespace,
    WitnessStream,
)


# ---------------------------------------------------------------------------
# tree presentations


def seq_code(bits) -> int:
    """Code a binary sequence as a number, via the pairing list code."""
    return vm.list_encode(list(bits))


def seq_decode(code: int):
    return tuple(vm.list_decode(code))


@lru_cache(maxsize=4096)
def _num(value: int):
    return numeral(value)


@dataclass(frozen=True)
class TreePresentation:
    """A finite prefix-closed set of binary sequences, root included."""

    nodes: frozenset

    def __post_init__(self):
        if () not in self.nodes:
            raise ValueError("presentation must contain the root")
        for node in self.nodes:
            if node[:-1] not in self.nodes:
                raise ValueError("presentation must be prefix closed")

    @classmethod
    def from_sequences(cls, seqs) -> "TreePresentation":
        closed = {()}
        for s in seqs:
            s = tuple(int(b) for b in s)
            for i in range(len(s) + 1):
                closed.add(s[:i])
        return cls(frozenset(closed))

    def contains(self, bits) -> bool:
        return tuple(bits) in self.nodes

    def sorted_nodes(self):
        return sorted(self.nodes, key=lambda n: (len(n), n))

    def depth(self) -> int:
        return max(len(n) for n in self.nodes)

    def designated_branch(self):
        """The lexicographically first maximal path, as a node list."""
        path = ()
        out = [path]
        while True:
            for b in (0, 1):
                if path + (b,) in self.nodes:
                    path = path + (b,)
                    out.append(path)
                    break
            else:
                return out

    def incomparable_pairs(self):
        """Ordered pairs of nodes neither of which extends the other."""
        ns = self.sorted_nodes()
        out = []
        for a in ns:
            for b in ns:
                if a != b and a[: len(b)] != b and b[: len(a)] != a:
                    out.append((a, b))
        return out

    def is_chain(self) -> bool:
        return not self.incomparable_pairs()


def subtrees_of_depth(depth: int):
    """Every nonempty prefix-closed subtree of the full binary tree."""

    def build(d):
        if d == 0:
            return [frozenset({()})]
        subs = build(d - 1)
        out = []
        for left in [None] + subs:
            for right in [None] + subs:
                nodes = {()}
                if left is not None:
                    nodes |= {(0,) + t for t in left}
                if right is not None:
                    nodes |= {(1,) + t for t in right}
                out.append(frozenset(nodes))
        return out

    return [TreePresentation(n) for n in build(depth)]


# ---------------------------------------------------------------------------
# finite-table arithmetization


def inlen_table(n_term, s_term, tree):
    """n is a length realized in the tree and s is a node of that length."""
    return disj_all(
        And(eq(n_term, _num(len(node))), eq(s_term, _num(seq_code(node))))
        for node in tree.sorted_nodes()
    )


def incomp_table(s_term, u_term, tree):
    return disj_all(
        And(eq(s_term, _num(seq_code(a))), eq(u_term, _num(seq_code(b))))
        for a, b in tree.incomparable_pairs()
    )


def label_table(s_term, b_term, tree, labels):
    return disj_all(
        And(eq(s_term, _num(seq_code(node))), eq(b_term, _num(labels[node])))
        for node in tree.sorted_nodes()
    )


def antecedent_formula(tree, labels):
    """Every length is realized by a decided in-tree node."""
    n, s, b = Var("n"), Var("s"), Var("b")
    matrix = And(inlen_table(n, s, tree), label_table(s, b, tree, labels))
    return forall("n", exists("s", exists("b", matrix)))


def consequent_formula(tree, labels):
    """Two incomparable nodes exist, both decided."""
    s, u, b, c = Var("s"), Var("u"), Var("b"), Var("c")
    matrix = And(
        And(incomp_table(s, u, tree), label_table(s, b, tree, labels)),
        label_table(u, c, tree, labels),
    )
    return exists("s", exists("u", exists("b", exists("c", matrix))))


def game_formula(tree, labels):
    return Implies(antecedent_formula(tree, labels), consequent_formula(tree, labels))


def _or_path(n_disjuncts: int, index: int):
    """Selector outputs reaching a disjunct of a left-folded chain."""
    if n_disjuncts <= 1:
        return []
    path = [Selector(0)] * (n_disjuncts - 1 - index)
    if index > 0:
        path.append(Selector(1))
    return path


def _table_pairs(lead_ins, lead_outs, branch, size, index, conjunct_pair=True):
    """Items answering one branch of a conjunction of tables.

    branch is the selector input path to the table, size/index locate
    the disjunct, and a disjunct that is itself a conjunction of two
    equalities needs one item per side.
    """
    sels = _or_path(size, index)
    legs = (Selector(0), Selector(1)) if conjunct_pair and size > 0 else (None,)
    out = []
    for leg in legs:
        ins = list(lead_ins) + [Selector(b) for b in branch]
        if leg is not None:
            ins.append(leg)
        out.append(IOPair(tuple(ins), tuple(lead_outs) + tuple(sels)))
    return out


def delivery_items(tree, labels, n, node):
    """Adversary items answering demand n with the given decided node.

    Selector paths are read off the table positions, so building a
    delivery never evaluates anything.
    """
    index = tree.sorted_nodes().index(node)
    size = len(tree.nodes)
    lead_ins = [Numeral(n)]
    lead_outs = [Numeral(seq_code(node)), Numeral(labels[node])]
    return _table_pairs(lead_ins, lead_outs, (0,), size, index) + _table_pairs(
        lead_ins, lead_outs, (1,), size, index
    )


def claim_items(tree, prefix_items, s_node, u_node, b_val, c_val):
    """Defender items asserting the consequent for the given values.

    The selector paths depend only on table shape, never on the label
    values, so a defender can always produce structurally valid items;
    whether their content survives the checker is another matter.
    """
    nodes = tree.sorted_nodes()
    size = len(nodes)
    pairs = tree.incomparable_pairs()
    try:
        ip = pairs.index((s_node, u_node))
    except ValueError:
        ip = 0  # claimed pair is not incomparable; any disjunct refutes it
    lead = [Prefix(tuple(prefix_items))]
    outs = [
        Numeral(seq_code(s_node)),
        Numeral(seq_code(u_node)),
        Numeral(b_val),
        Numeral(c_val),
    ]
    items = _table_pairs(lead, outs, (0, 0), len(pairs), ip)
    items += _table_pairs(lead, outs, (0, 1), size, nodes.index(s_node))
    items += _table_pairs(lead, outs, (1,), size, nodes.index(u_node))
    return items


def delivered_nodes(items):
    """Parse (demand, node, label) triples out of adversary items."""
    seen = {}
    for it in items:
        if not isinstance(it, IOPair) or len(it.inputs) < 1 or len(it.outputs) < 2:
            continue
        head, s, b = it.inputs[0], it.outputs[0], it.outputs[1]
        if not (
            isinstance(head, Numeral)
            and isinstance(s, Numeral)
            and isinstance(b, Numeral)
        ):
            continue
        seen.setdefault(head.value, (seq_decode(s.value), b.value))
    return [(n, node, lab) for n, (node, lab) in sorted(seen.items())]


# ---------------------------------------------------------------------------
# strategies


class Adversary:
    def reset(self, tree):
        raise NotImplementedError

    def move(self, r, defender_items):
        raise NotImplementedError


class DesignatedBranchAdversary(Adversary):
    """Feeds decided nodes along the first maximal branch, nothing else.

    Labels every node 1 in its commitment; since only branch nodes are
    ever delivered, a defender who fabricates a label for an off-branch
    node asserts content the tables refute.
    """

    def reset(self, tree):
        self.tree = tree
        self.labels = {node: 1 for node in tree.sorted_nodes()}
        queue = [TRIVIAL]
        for n, node in enumerate(tree.designated_branch()):
            queue.extend(delivery_items(tree, self.labels, n, node))
        self.queue = queue

    def move(self, r, defender_items):
        return self.queue.pop(0) if self.queue else WS


class GenerousAdversary(Adversary):
    """Delivers an incomparable decided pair whenever lengths permit.

    Demands are answered one node per length, so incomparability can
    only be exhibited through nodes of distinct lengths.
    """

    def reset(self, tree):
        self.tree = tree
        self.labels = {node: 1 for node in tree.sorted_nodes()}
        special = {}
        for a, b in tree.incomparable_pairs():
            if len(a) != len(b):
                special = {len(a): a, len(b): b}
                break
        by_len = {}
        for node in tree.sorted_nodes():
            by_len.setdefault(len(node), node)
        by_len.update(special)
        queue = [TRIVIAL]
        for n in sorted(by_len):
            queue.extend(delivery_items(tree, self.labels, n, by_len[n]))
        self.queue = queue

    def move(self, r, defender_items):
        return self.queue.pop(0) if self.queue else WS


class Defender:
    def reset(self, tree):
        self.tree = tree

    def move(self, r, antecedent_items):
        return WS


class SilentDefender(Defender):
    """Never speaks.  Correct exactly when the consequent is never owed."""


class WaitingCopier(Defender):
    """Echoes delivered nodes back once two of them are incomparable."""

    delay = 0

    def reset(self, tree):
        super().reset(tree)
        self.queue = [TRIVIAL]
        self.committed = False
        self.ready_since = None

    def _witnessed(self, antecedent_items):
        got = delivered_nodes(antecedent_items)
        for i, (_, a, la) in enumerate(got):
            for _, b, lb in got[i + 1 :]:
                if a[: len(b)] != b and b[: len(a)] != a:
                    return a, b, la, lb
        return None

    def move(self, r, antecedent_items):
        if not self.committed:
            found = self._witnessed(antecedent_items)
            if found is not None:
                if self.ready_since is None:
                    self.ready_since = r
                if r - self.ready_since >= self.delay:
                    a, b, la, lb = found
                    self.queue.extend(
                        claim_items(self.tree, antecedent_items, a, b, la, lb)
                    )
                    self.committed = True
        return self.queue.pop(0) if self.queue else WS


class DelayedCopier(WaitingCopier):
    """Same as the copier, five rounds late."""

    delay = 5


class EagerCommitter(Defender):
    """Commits on the first two delivered nodes, compatible or not."""

    def reset(self, tree):
        super().reset(tree)
        self.queue = [TRIVIAL]
        self.committed = False

    def move(self, r, antecedent_items):
        if not self.committed:
            got = delivered_nodes(antecedent_items)
            if len(got) >= 2:
                (_, a, la), (_, b, lb) = got[0], got[1]
                self.queue.extend(
                    claim_items(self.tree, antecedent_items, a, b, la, lb)
                )
                self.committed = True
        return self.queue.pop(0) if self.queue else WS


class TableGuesser(Defender):
    """Reads an incomparable pair off the public tree and guesses labels 0."""

    def reset(self, tree):
        super().reset(tree)
        self.queue = [TRIVIAL]
        self.committed = False

    def move(self, r, antecedent_items):
        if not self.committed and r >= 1:
            pairs = self.tree.incomparable_pairs()
            if pairs:
                a, b = pairs[0]
                self.queue.extend(
                    claim_items(self.tree, antecedent_items, a, b, 0, 0)
                )
            self.committed = True
        return self.queue.pop(0) if self.queue else WS


class CopierWithGuess(WaitingCopier):
    """Copies honestly, but loses patience and guesses after a while."""

    patience = 6

    def move(self, r, antecedent_items):
        item = super().move(r, antecedent_items)
        if not self.committed and r >= self.patience:
            pairs = self.tree.incomparable_pairs()
            if pairs:
                a, b = pairs[0]
                self.queue.extend(
                    claim_items(self.tree, antecedent_items, a, b, 0, 0)
                )
            self.committed = True
        return item


def defender_library():
    return [
        WaitingCopier(),
        DelayedCopier(),
        SilentDefender(),
        EagerCommitter(),
        TableGuesser(),
        CopierWithGuess(),
    ]


# ---------------------------------------------------------------------------
# the branching game


@dataclass
class GameTrace:
    kind: str
    outcome: str
    reason: str
    rounds: int
    antecedent_items: tuple
    defender_items: tuple
    verdicts: tuple = ()

    def accepted(self) -> bool:
        return self.outcome == "accept"


def play_theorem1(tree, defender, adversary, horizon=10000, budget=None) -> GameTrace:
    """One full play of the branching game, refereed by the checker.

    The defender is accepted when its stream is never rejected against
    the implication and, should the adversary actually deliver an
    incomparable decided pair, the applied output stands as a witness
    for the consequent.  A play on which the consequent is never owed
    is accepted vacuously.
    """
    if budget is None:
        budget = Budget(pull_limit=64, numeral_bound=2, vm_steps=200)
    adversary.reset(tree)
    defender.reset(tree)
    ante, mine = [], []
    quiet = 0
    rounds = 0
    while rounds < horizon and quiet < 6:
        a = adversary.move(rounds, tuple(mine))
        ante.append(a)
        d = defender.move(rounds, tuple(ante))
        mine.append(d)
        quiet = quiet + 1 if isinstance(a, Whitespace) and isinstance(d, Whitespace) else 0
        rounds += 1

    labels = adversary.labels
    a_formula = antecedent_formula(tree, labels)
    c_formula = consequent_formula(tree, labels)
    g_formula = Implies(a_formula, c_formula)
    a_stream = WitnessStream.from_items(ante)
    d_stream = WitnessStream.from_items(mine)

    direct = check_witness(
        d_stream, g_formula, budget, probes=(Probe(a_formula, a_stream, trusted=True),)
    )
    verdicts = [direct.line()]
    if direct.status == "rejected":
        return GameTrace(
            "theorem1", "defeat", "rejected", rounds, tuple(ante), tuple(mine), tuple(verdicts)
        )

    got = delivered_nodes(ante)
    owed = any(
        a[: len(b)] != b and b[: len(a)] != a
        for i, (_, a, _) in enumerate(got)
        for _, b, _ in got[i + 1 :]
    )
    if not owed:
        return GameTrace(
            "theorem1", "accept", "vacuous", rounds, tuple(ante), tuple(mine), tuple(verdicts)
        )

    applied = check_witness(apply_implication(d_stream, a_stream), c_formula, budget)
    verdicts.append(applied.line())
    if applied.status == "accepted_up_to":
        return GameTrace(
            "theorem1", "accept", "effective", rounds, tuple(ante), tuple(mine), tuple(verdicts)
        )
    return GameTrace(
        "theorem1",
        "defeat",
        "consequent-missing",
        rounds,
        tuple(ante),
        tuple(mine),
        tuple(verdicts),
    )


def dichotomy_row(tree, horizon=10000, budget=None):
    """Outcomes of the whole defender library against the designated
    adversary, as (defender class name, outcome, reason) triples."""
    row = []
    for d in defender_library():
        trace = play_theorem1(tree, d, DesignatedBranchAdversary(), horizon, budget)
        row.append((type(d).__name__, trace.outcome, trace.reason))
    return row


# ---------------------------------------------------------------------------
# implication chains and their propositional shadow


def chain_link_formula(i: int):
    y = Var("y")
    return Implies(
        exists("y", eq(y, _num(i))), exists("y", eq(y, _num(i + 1)))
    )


def chain_link_witness(i: int, fake_antecedent=None) -> WitnessStream:
    """A witness for the i-th link.  With fake_antecedent set, the link
    listens for the wrong answer and never fires on honest input."""
    expect = fake_antecedent if fake_antecedent is not None else i
    head = IOPair((), (Numeral(expect),))
    pair = IOPair((Prefix((head,)),), (Numeral(i + 1),))
    return WitnessStream.from_items([TRIVIAL, pair])


def build_chain(length: int, break_at=None):
    """Link descriptions (antecedent, consequent, witness) for a chain.

    A broken link advertises the same statement but its witness waits
    for an antecedent nobody produces.
    """
    links = []
    for i in range(length):
        fake = i + 100 if break_at == i else None
        links.append(
            (
                exists("y", eq(Var("y"), _num(i if fake is None else fake))),
                exists("y", eq(Var("y"), _num(i + 1))),
                chain_link_witness(i, fake),
            )
        )
    return links


def extract_combination(links, start, goal):
    """The propositional shape of a chain wiring.

    Distinct statements become distinct atoms; the combination says
    the conjunction of the links plus the start entails the goal.
    """
    atoms = {}

    def atom(f):
        key = print_formula(f)
        if key not in atoms:
            atoms[key] = ("var", len(atoms))
        return atoms[key]

    parts = [("imp", atom(a), atom(c)) for a, c, _ in links]
    parts.append(atom(start))
    left = parts[0]
    for p in parts[1:]:
        left = ("and", left, p)
    return ("imp", left, atom(goal)), len(atoms)


class TooManyAtoms(Exception):
    pass


def _pe(f, env):
    """Partial evaluation of a propositional formula; None is unknown."""
    tag = f[0]
    if tag == "var":
        return env.get(f[1])
    if tag == "const":
        return f[1]
    if tag == "not":
        v = _pe(f[1], env)
        return None if v is None else not v
    a, b = _pe(f[1], env), _pe(f[2], env)
    if tag == "and":
        if a is False or b is False:
            return False
        return True if a is True and b is True else None
    if tag == "or":
        if a is True or b is True:
            return True
        return False if a is False and b is False else None
    if tag == "imp":
        if a is False or b is True:
            return True
        return False if a is True and b is False else None
    raise ValueError(f"unknown connective {tag!r}")


def _vars_of(f, acc):
    if f[0] == "var":
        acc.add(f[1])
    elif f[0] == "not":
        _vars_of(f[1], acc)
    elif f[0] != "const":
        _vars_of(f[1], acc)
        _vars_of(f[2], acc)


def dpll_tautology(f, cap=24) -> bool:
    """Splitting tautology check with partial-evaluation pruning."""
    names = set()
    _vars_of(f, names)
    if len(names) > cap:
        raise TooManyAtoms(f"{len(names)} atoms exceeds the cap of {cap}")
    order = sorted(names)

    def solve(env):
        v = _pe(f, env)
        if v is not None:
            return v
        x = next(n for n in order if n not in env)
        return solve({**env, x: False}) and solve({**env, x: True})

    return solve({})


def prop3_duality(length: int, break_at=None, budget=None):
    """Play a chain behaviourally and extract its propositional shadow.

    Returns a report with the final verdict of the composed stream and
    the tautology status of the extracted combination.  Honest chains
    come out tautological and accepted; a broken chain is neither.
    """
    if budget is None:
        budget = Budget(pull_limit=48, numeral_bound=4, vm_steps=100)
    links = build_chain(length, break_at)
    stream = WitnessStream.from_items([IOPair((), (Numeral(0),))])
    for i, (_, _, w) in enumerate(links):
        stage = exists("y", eq(Var("y"), _num(i + 1)))
        stream = normalize_strict(apply_implication(w, stream), stage)
    goal = exists("y", eq(Var("y"), _num(length)))
    verdict = check_witness(stream, goal, budget)
    start = exists("y", eq(Var("y"), _num(0)))
    combination, n_atoms = extract_combination(links, start, goal)
    return {
        "length": length,
        "broken_at": break_at,
        "atoms": n_atoms,
        "tautological": dpll_tautology(combination),
        "combination": combination,
        "verdict": verdict.line(),
        "accepted": verdict.status == "accepted_up_to",
    }


# ---------------------------------------------------------------------------
# descending-branch encoding


def leaf_table(s_term, tree):
    leaves = [
        n
        for n in tree.sorted_nodes()
        if n + (0,) not in tree.nodes and n + (1,) not in tree.nodes
    ]
    return disj_all(eq(s_term, _num(seq_code(n))) for n in leaves)


def deadend_formula(tree):
    return exists("s", leaf_table(Var("s"), tree))


def pi11_encode(presentation, guess_horizon=64) -> WitnessStream:
    """Hunt for a dead end by greedy descent and encode the visit.

    The visited node codes are spelt out as whitespace delays: the
    first gap before a trivial pair gives the count, then each code c
    appears as a gap of c+1 before the next trivial pair.  The answer
    pairs for the dead-end statement follow.  A presentation that
    keeps offering children within the horizon produces nothing but
    whitespace: the encoder is still waiting.
    """
    path = ()
    visited = [path]
    dead_end = None
    for _ in range(guess_horizon):
        for b in (0, 1):
            if presentation.contains(path + (b,)):
                path = path + (b,)
                visited.append(path)
                break
        else:
            dead_end = path
            break

    def items():
        if dead_end is None:
            while True:
                yield WS
        codes = [seq_code(n) for n in visited]
        for _ in range(len(codes)):
            yield WS
        yield TRIVIAL
        for c in codes:
            for _ in range(c + 1):
                yield WS
            yield TRIVIAL
        leaves = [
            n
            for n in presentation.sorted_nodes()
            if n + (0,) not in presentation.nodes
            and n + (1,) not in presentation.nodes
        ]
        lead_out = [Numeral(seq_code(dead_end))]
        for p in _table_pairs(
            [], lead_out, (), len(leaves), leaves.index(dead_end), conjunct_pair=False
        ):
            yield p

    return WitnessStream(items)


def pi11_decode(stream: WitnessStream, pull=512):
    """Invert the delay encoding: (visited codes, remaining items)."""
    items = stream.pull(pull)
    gaps, rest = [], []
    run = 0
    cursor = 0
    for cursor, it in enumerate(items):
        if isinstance(it, Whitespace):
            run += 1
        elif it == TRIVIAL and not rest:
            gaps.append(run)
            run = 0
        else:
            rest = items[cursor:]
            break
    if not gaps:
        return [], []
    count = gaps[0]
    codes = [g - 1 for g in gaps[1 : 1 + count]]
    return codes, [it for it in rest if not isinstance(it, Whitespace)]


# ---------------------------------------------------------------------------
# narrow replay


@dataclass
class NarrowReport:
    status: str
    compared: int
    conflicts: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)


class _Instance:
    def __init__(self, factory):
        self.strategy = factory()
        self.feeds = []
        self.pulls = []  # (feeds snapshot, overall index, item)

    def feed(self, item):
        self.strategy.feed(item)
        self.feeds.append(item)

    def pull(self):
        item = self.strategy.pull()
        self.pulls.append((tuple(self.feeds), len(self.pulls), item))
        return item


def parse_script(text: str):
    events = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 2)
        op = parts[0].upper()
        if op == "SPAWN" and len(parts) == 2:
            events.append(("spawn", parts[1]))
        elif op == "COPY" and len(parts) == 3:
            events.append(("copy", parts[1], parts[2].strip()))
        elif op == "FEED" and len(parts) == 3:
            items = WitnessStream.from_text(parts[2]).pull(256)
            events.append(("feed", parts[1], items))
        elif op == "FEEDWS" and len(parts) == 3:
            events.append(("feedws", parts[1], int(parts[2])))
        elif op == "PULL" and len(parts) == 3:
            events.append(("pull", parts[1], int(parts[2])))
        else:
            raise ValueError(f"bad script line: {raw!r}")
    return events


def narrow_play(factory, script_text: str) -> NarrowReport:
    """Drive instances of a candidate by script and compare replays.

    COPY rebuilds an instance from the fed transcript alone, the
    point being that a narrow candidate cannot tell the difference.
    Violation means two instances with prefix-comparable transcripts
    disagreed on a settled (non-whitespace) output at the same index.
    """
    events = parse_script(script_text)
    instances = {}
    for ev in events:
        name = ev[1]
        if ev[0] == "spawn":
            instances[name] = _Instance(factory)
        elif ev[0] == "copy":
            src, fresh = instances[name], _Instance(factory)
            for item in src.feeds:
                fresh.feed(item)
            instances[ev[2]] = fresh
        elif ev[0] == "feed":
            for item in ev[2]:
                instances[name].feed(item)
        elif ev[0] == "feedws":
            for _ in range(ev[2]):
                instances[name].feed(WS)
        elif ev[0] == "pull":
            for _ in range(ev[2]):
                instances[name].pull()

    compared = 0
    conflicts = []
    names = sorted(instances)
    for i, x in enumerate(names):
        for y in names[i + 1 :]:
            a, b = instances[x], instances[y]
            fa, fb = tuple(a.feeds), tuple(b.feeds)
            if fa[: len(fb)] != fb and fb[: len(fa)] != fa:
                continue
            for (_, ia, va) in a.pulls:
                for (_, ib, vb) in b.pulls:
                    if ia != ib:
                        continue
                    if isinstance(va, Whitespace) or isinstance(vb, Whitespace):
                        continue
                    compared += 1
                    if va != vb:
                        conflicts.append((x, y, ia, str(va), str(vb)))
    status = (
        "violated" if conflicts else "met_so_far" if compared else "undetermined"
    )
    outputs = {
        n: [str(v) for (_, _, v) in inst.pulls] for n, inst in instances.items()
    }
    return NarrowReport(status, compared, conflicts, outputs)


class NarrowEcho:
    """Reference narrow candidate: the k-th output is the k-th fed item."""

    def __init__(self):
        self.feeds = []
        self.cursor = 0

    def feed(self, item):
        self.feeds.append(item)

    def pull(self):
        if self.cursor < len(self.feeds):
            item = self.feeds[self.cursor]
            self.cursor += 1
            return item
        return WS


class MoodyCounter:
    """Deliberately non-narrow: remembers how often it was pulled before
    its first feed, which a transcript replay cannot reproduce."""

    def __init__(self):
        self.early_pulls = 0
        self.fed = False

    def feed(self, item):
        self.fed = True

    def pull(self):
        if not self.fed:
            self.early_pulls += 1
        return IOPair((), (Numeral(self.early_pulls),))
