"""Query grounding: expand a logic query into a memoized proof graph.

A proof state is a list of pending goals plus the bindings accumulated for
the query's variables. Expansion resolves the leftmost goal, either against
the rules (alternatives in source order) or, for builtin predicates, directly
against the knowledge graph. States are canonicalized (goals fully
substituted, remaining variables renumbered by first occurrence) so that
convergent derivations merge; the result is a graph, possibly cyclic.

Depth accounting: each rule expansion costs one step, builtin lookups are
free. A path therefore pays once per rule application, which makes the
default budget of 6 correspond to similarity chains of about three hops.
Expansion stops at ``max_depth`` steps per path or ``max_nodes`` states
total, whichever comes first; hitting a limit sets the ``truncated`` flag
instead of raising.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .kg import KnowledgeGraph, FEEDBACK_PREDICATES
from .rules import BUILTIN_ARITIES, Constant, Literal, RuleSet, Variable, format_literal


class GroundingError(Exception):
    pass


@dataclass(frozen=True)
class Limits:
    max_depth: int = 6
    max_nodes: int = 20000

    def validate(self) -> None:
        if self.max_depth < 1 or self.max_nodes < 1:
            raise GroundingError("limits must be positive")


# Internal literal form: (predicate, arg0, arg1, ...) with str constants and
# int variables. States hold canonical forms only.


def _canonicalize(goals, answer):
    mapping: dict[int, int] = {}
    new_goals = []
    for lit in goals:
        out = list(lit)
        for i in range(1, len(out)):
            a = out[i]
            if type(a) is int:
                na = mapping.get(a)
                if na is None:
                    na = len(mapping)
                    mapping[a] = na
                out[i] = na
        new_goals.append(tuple(out))
    new_answer = list(answer)
    for i, a in enumerate(new_answer):
        if type(a) is int:
            na = mapping.get(a)
            if na is None:
                na = len(mapping)
                mapping[a] = na
            new_answer[i] = na
    return tuple(new_goals), tuple(new_answer), len(mapping)


def _walk(smap: dict, value):
    """Resolve a state variable through the substitution chain."""
    while type(value) is int:
        nxt = smap.get(value)
        if nxt is None:
            return value
        value = nxt
    return value


_FRESH_BASE = 1 << 20  # above any canonical variable index in play


def _one_var_template(rest, answer, hole: int):
    """Canonical child template for a single-variable builtin resolution.

    The hole variable becomes a constant in every child, so it takes no
    canonical index; remaining variables are renumbered exactly as
    _canonicalize would after substitution. Hole positions are None.
    """
    mapping: dict[int, int] = {}
    tgoals = []
    n_holes = 0
    for lit in rest:
        out = list(lit)
        has_hole = False
        for i in range(1, len(out)):
            a = out[i]
            if type(a) is int:
                if a == hole:
                    out[i] = None
                    has_hole = True
                else:
                    na = mapping.get(a)
                    if na is None:
                        na = len(mapping)
                        mapping[a] = na
                    out[i] = na
        tgoals.append((tuple(out), has_hole))
        n_holes += has_hole
    tans = list(answer)
    ans_hole = False
    for i, a in enumerate(tans):
        if type(a) is int:
            if a == hole:
                tans[i] = None
                ans_hole = True
            else:
                na = mapping.get(a)
                if na is None:
                    na = len(mapping)
                    mapping[a] = na
                tans[i] = na
    return tgoals, n_holes, tuple(tans), ans_hole


class ProofGraph:
    """Memoized grounding of one query.

    Nodes are canonical proof states (node 0 is the query state), edges are
    single resolution steps labeled ``("rule", index)`` or
    ``("fact", ground_literal)``. Solution nodes have no pending goals.
    """

    def __init__(self, query: Literal, query_vars: tuple[str, ...]):
        self.query = query
        self.query_vars = query_vars
        self.node_goals: list[tuple] = []
        self.node_answers: list[tuple] = []
        self.depths: list[int] = []
        self.edges: list[tuple[int, int, tuple]] = []
        self.solutions: list[tuple[int, dict[str, str]]] = []
        self.truncated = False

    @property
    def start(self) -> int:
        return 0

    def __len__(self) -> int:
        return len(self.node_goals)

    def state_goals(self, node: int) -> tuple[Literal, ...]:
        """Pending goals of a node, with variables shown as V0, V1, ..."""
        out = []
        for lit in self.node_goals[node]:
            args = tuple(
                Variable(f"V{a}") if type(a) is int else Constant(a) for a in lit[1:]
            )
            out.append(Literal(predicate=lit[0], args=args))
        return tuple(out)

    def state_bindings(self, node: int) -> dict[str, str]:
        """Query-variable bindings accumulated at a node (bound ones only)."""
        answer = self.node_answers[node]
        return {
            name: value
            for name, value in zip(self.query_vars, answer)
            if type(value) is not int
        }


def solutions(pg: ProofGraph, variables) -> list[dict[str, str]]:
    """Bindings of the solution states, restricted to the requested variables.

    One entry per distinct solution state, ordered lexicographically by the
    bound constants.
    """
    names = [v.name if isinstance(v, Variable) else str(v) for v in variables]
    unknown = [n for n in names if n not in pg.query_vars]
    if unknown:
        raise ValueError(f"not query variables: {unknown}")
    rows = []
    for node, bindings in pg.solutions:
        rows.append(
            (
                tuple(bindings.get(n, "") for n in names),
                tuple(sorted(bindings.items())),
                {n: bindings[n] for n in names if n in bindings},
            )
        )
    rows.sort(key=lambda r: (r[0], r[1]))
    return [row[2] for row in rows]


def _query_internal(query: Literal):
    """Convert the query literal to internal form; returns (lit, var names)."""
    names: list[str] = []
    args = []
    for term in query.args:
        if isinstance(term, Variable):
            if term.name not in names:
                names.append(term.name)
            args.append(names.index(term.name))
        else:
            args.append(term.value)
    return (query.predicate, *args), tuple(names)


def _compile_rules(ruleset: RuleSet) -> dict[str, list[tuple]]:
    """Index rules by head predicate in internal form.

    Each entry is (source_index, head_args, body_literals, n_vars) where
    rule variables are ints 0..n_vars-1 and constants stay strings.
    """
    compiled: dict[str, list[tuple]] = {}
    for idx, rule in enumerate(ruleset.rules):
        var_index: dict[str, int] = {}

        def conv(term):
            if isinstance(term, Constant):
                return term.value
            slot = var_index.get(term.name)
            if slot is None:
                slot = len(var_index)
                var_index[term.name] = slot
            return slot

        head = tuple(conv(t) for t in rule.head.args)
        body = [(lit.predicate,) + tuple(conv(t) for t in lit.args) for lit in rule.body]
        compiled.setdefault(rule.head.predicate, []).append(
            (idx, head, body, len(var_index))
        )
    return compiled


class _Grounder:
    def __init__(self, rules: RuleSet, kg: KnowledgeGraph, limits: Limits):
        self.rules = rules
        self.kg = kg
        self.limits = limits
        self.compiled = _compile_rules(rules)

    def run(self, query: Literal) -> ProofGraph:
        self.limits.validate()
        if not self.rules.defines(query.predicate):
            raise GroundingError(f"unknown predicate: {query.predicate!r}")
        expected = self.rules.arities.get(query.predicate)
        if expected is not None and expected != len(query.args):
            raise GroundingError(
                f"predicate {query.predicate!r} has arity {expected}, "
                f"query uses {len(query.args)}"
            )
        for term in query.args:
            if isinstance(term, Constant) and term.value not in self.kg.entities:
                raise GroundingError(f"unknown constant in query: {term.value!r}")

        qlit, qvars = _query_internal(query)
        pg = ProofGraph(query, qvars)
        self.pg = pg
        self.index: dict[tuple, int] = {}
        self.expanded: list[bool] = []

        goals, answer, _ = _canonicalize([qlit], tuple(range(len(qvars))))
        self._add_state(goals, answer, 0)

        queue: deque[tuple[int, int]] = deque([(0, 0)])
        max_depth = self.limits.max_depth
        while queue:
            node, dist = queue.popleft()
            if self.expanded[node] or dist > pg.depths[node]:
                continue
            self.expanded[node] = True
            if not pg.node_goals[node]:
                continue  # solution state, nothing to resolve
            if self._expand(node, queue, max_depth):
                pg.truncated = True
                break
        return pg

    def _add_state(self, goals, answer, depth) -> int:
        pg = self.pg
        node = len(pg.node_goals)
        pg.node_goals.append(goals)
        pg.node_answers.append(answer)
        pg.depths.append(depth)
        self.expanded.append(False)
        self.index[(goals, answer)] = node
        if not goals:
            pg.solutions.append((node, pg.state_bindings(node)))
        return node

    def _child(self, parent: int, goals, answer, depth, label, queue, cost) -> bool:
        """Record one resolution edge; returns True when the node cap is hit."""
        pg = self.pg
        key = (goals, answer)
        node = self.index.get(key)
        if node is None:
            if len(pg.node_goals) >= self.limits.max_nodes:
                return True
            node = self._add_state(goals, answer, depth)
            if cost == 0:
                queue.appendleft((node, depth))
            else:
                queue.append((node, depth))
        elif depth < pg.depths[node]:
            pg.depths[node] = depth
            if cost == 0:
                queue.appendleft((node, depth))
            else:
                queue.append((node, depth))
        pg.edges.append((parent, node, label))
        return False

    def _expand(self, node: int, queue, max_depth: int) -> bool:
        pg = self.pg
        goals = pg.node_goals[node]
        answer = pg.node_answers[node]
        depth = pg.depths[node]
        goal = goals[0]
        rest = goals[1:]
        predicate = goal[0]

        if predicate in BUILTIN_ARITIES:
            mode = self._builtin_matches(goal)
            kind = mode[0]
            if kind == "ground":
                if mode[1]:
                    cg, ca, _ = _canonicalize(rest, answer)
                    return self._child(node, cg, ca, depth, ("fact", goal), queue, 0)
                return False
            if kind == "one":
                _, hole, targets = mode
                if not targets:
                    return False
                tgoals, n_holes, tans, ans_hole = _one_var_template(rest, answer, hole)
                fact_tpl = tuple(
                    None if (type(a) is int and a == hole) else a for a in goal
                )
                if n_holes == 0:
                    shared_goals = tuple(lit for lit, _ in tgoals)
                for value in targets:
                    if n_holes:
                        cg = tuple(
                            (lit[0],) + tuple(value if a is None else a for a in lit[1:])
                            if has_hole
                            else lit
                            for lit, has_hole in tgoals
                        )
                    else:
                        cg = shared_goals
                    ca = (
                        tuple(value if a is None else a for a in tans)
                        if ans_hole
                        else tans
                    )
                    fact = tuple(value if a is None else a for a in fact_tpl)
                    if self._child(node, cg, ca, depth, ("fact", fact), queue, 0):
                        return True
                return False
            # two distinct unbound variables: general substitution path
            _, va, vb, pairs = mode
            for first, second in pairs:
                bind = {va: first, vb: second}
                new_goals = [
                    (lit[0],)
                    + tuple(bind.get(a, a) if type(a) is int else a for a in lit[1:])
                    for lit in rest
                ]
                new_answer = tuple(
                    bind.get(a, a) if type(a) is int else a for a in answer
                )
                cg, ca, _ = _canonicalize(new_goals, new_answer)
                fact = (goal[0],) + tuple(
                    bind.get(a, a) if type(a) is int else a for a in goal[1:]
                )
                if self._child(node, cg, ca, depth, ("fact", fact), queue, 0):
                    return True
            return False

        alternatives = self.compiled.get(predicate)
        if not alternatives:
            return False  # underivable predicate: dead end
        if depth >= max_depth:
            pg.truncated = True  # rule children would exceed the per-path budget
            return False
        for compiled_rule in alternatives:
            resolved = self._resolve_rule(goal, rest, answer, compiled_rule)
            if resolved is None:
                continue
            cg, ca, _ = resolved
            label = ("rule", compiled_rule[0])
            if self._child(node, cg, ca, depth + 1, label, queue, 1):
                return True
        return False

    def _resolve_rule(self, goal, rest, answer, compiled_rule):
        """Unify the goal with the rule head; build the substituted child state."""
        _, head, body, nvars = compiled_rule
        smap: dict[int, object] = {}  # state var -> constant or state var
        rvals: list = [None] * nvars  # rule var slot -> constant or state var

        for garg, harg in zip(goal[1:], head):
            g = _walk(smap, garg) if type(garg) is int else garg
            if type(harg) is str:
                if type(g) is int:
                    smap[g] = harg
                elif g != harg:
                    return None
            else:
                prior = rvals[harg]
                if prior is None:
                    rvals[harg] = g
                    continue
                p = _walk(smap, prior) if type(prior) is int else prior
                if type(p) is int:
                    if type(g) is int:
                        if p != g:
                            smap[p] = g
                    else:
                        smap[p] = g
                elif type(g) is int:
                    smap[g] = p
                elif g != p:
                    return None

        fresh = _FRESH_BASE
        new_goals = []
        for blit in body:
            out = list(blit)
            for i in range(1, len(out)):
                a = out[i]
                if type(a) is int:
                    v = rvals[a]
                    if v is None:
                        fresh += 1
                        v = fresh
                        rvals[a] = v
                    elif type(v) is int:
                        v = _walk(smap, v)
                    out[i] = v
            new_goals.append(tuple(out))
        if smap:
            for lit in rest:
                out = list(lit)
                for i in range(1, len(out)):
                    a = out[i]
                    if type(a) is int:
                        out[i] = _walk(smap, a)
                new_goals.append(tuple(out))
            new_answer = tuple(
                _walk(smap, a) if type(a) is int else a for a in answer
            )
        else:
            new_goals.extend(rest)
            new_answer = answer
        return _canonicalize(new_goals, new_answer)

    def _builtin_matches(self, goal):
        """Match a builtin goal against the KG.

        Returns one of, with targets/pairs in deterministic (sorted) order:
          ("ground", holds)          all arguments bound
          ("one", var, targets)      one distinct unbound variable
          ("pairs", va, vb, pairs)   two distinct unbound variables
        """
        kg = self.kg
        predicate = goal[0]
        args = goal[1:]
        if predicate == "isMovie":
            (a,) = args
            if type(a) is int:
                return ("one", a, kg.movies())
            return ("ground", a in kg.entities and kg.entities[a].is_movie)

        a, b = args
        if predicate == "link":
            if type(a) is not int:
                targets = kg.link_targets(a)
                if type(b) is not int:
                    return ("ground", b in targets)
                return ("one", b, targets)
            if type(b) is not int:
                return ("one", a, kg.link_targets(b))
            if a == b:  # link(X,X): self-loops only
                return ("one", a, [e for e in sorted(kg.entities) if e in kg.link_targets(e)])
            pairs = [
                (src, dst) for src in sorted(kg.entities) for dst in kg.link_targets(src)
            ]
            return ("pairs", a, b, pairs)

        if predicate in FEEDBACK_PREDICATES:
            if type(a) is not int:
                targets = kg.feedback_targets(a, predicate)
                if type(b) is not int:
                    return ("ground", b in targets)
                return ("one", b, sorted(targets))
            pairs = kg.feedback.pairs(predicate)
            if type(b) is not int:
                return ("one", a, [u for u, t in pairs if t == b])
            if a == b:
                return ("one", a, [u for u, t in pairs if u == t])
            return ("pairs", a, b, pairs)
        raise GroundingError(f"unhandled builtin: {predicate!r}")


def ground(
    query: Literal,
    rules: RuleSet,
    kg: KnowledgeGraph,
    limits: Limits = Limits(),
) -> ProofGraph:
    """Ground a query into a proof graph against the rules and the KG."""
    return _Grounder(rules, kg, limits).run(query)


# --- DOT export ----------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _edge_label(label: tuple, rules: RuleSet) -> str:
    kind, payload = label
    if kind == "rule":
        return f"rule {payload + 1} ({rules.rules[payload].head.predicate})"
    return f"{payload[0]}({', '.join(payload[1:])})"


def to_dot(pg: ProofGraph, rules: RuleSet, name: str = "proof") -> str:
    """Render the proof graph in DOT format.

    Solution nodes are double-circled and annotated with their bindings; the
    start node is drawn bold.
    """
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  node [shape=box, fontsize=10];']
    solution_nodes = {node for node, _ in pg.solutions}
    for node in range(len(pg)):
        if node in solution_nodes:
            bindings = pg.state_bindings(node)
            text = "solution"
            if bindings:
                text += "\\n" + "\\n".join(
                    f"{k} = {_dot_escape(v)}" for k, v in sorted(bindings.items())
                )
            attrs = f'label="{text}", shape=doublecircle'
        else:
            goals = ", ".join(format_literal(lit) for lit in pg.state_goals(node))
            attrs = f'label="{_dot_escape(goals)}"'
        if node == pg.start:
            attrs += ", style=bold"
        lines.append(f"  n{node} [{attrs}];")
    for src, dst, label in pg.edges:
        lines.append(f'  n{src} -> n{dst} [label="{_dot_escape(_edge_label(label, rules))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
