import random

import pytest

from numlab.expr import Binary, Call, Constant, Unary, Variable

_CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the summary lines."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        _CRITERIA[name] = (bool(ok), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: int(s.split()[0])):
        ok, detail = _CRITERIA[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def random_tree(r: random.Random, depth: int, names=("x",)):
    """Random expression over ``names`` that stays inside every function's domain.

    Denominators are shifted squares, log/sqrt arguments are positive and
    tan arguments stay away from its poles.
    """
    if depth == 0 or r.random() < 0.2:
        if r.random() < 0.6:
            return Variable(r.choice(names))
        return Constant(round(r.uniform(-2, 2), 2))
    sub = lambda: random_tree(r, depth - 1, names)  # noqa: E731
    kind = r.choice(["neg", "add", "sub", "mul", "div", "pow", "exp", "log", "sin", "cos", "tan", "sqrt"])
    if kind == "neg":
        return Unary("neg", sub())
    if kind in ("add", "sub", "mul"):
        return Binary(kind, sub(), sub())
    if kind == "div":
        return Binary("div", sub(), Binary("add", Binary("pow", sub(), Constant(2)), Constant(1)))
    if kind == "pow":
        return Binary("pow", sub(), Constant(r.randint(0, 3)))
    if kind in ("log", "sqrt"):
        return Call(kind, Binary("add", Binary("pow", sub(), Constant(2)), Constant(0.5)))
    if kind == "tan":
        return Call("tan", Binary("mul", Constant(0.5), Call("sin", sub())))
    return Call(kind, sub())


@pytest.fixture
def tree_rng():
    return random.Random(20240611)


def central_difference(fn, x, step=1e-6):
    return (fn(x + step) - fn(x - step)) / (2 * step)


def derivative_cases(r: random.Random, n_trees=100, n_points=10, max_depth=6):
    """Yield (tree, x, symbolic, finite_difference) with |x| <= 2.

    Points where the function is large (>1e3) are redrawn: the 1e-6 central
    difference loses too many digits there to serve as an oracle.
    """
    from numlab.expr import EvaluationError, differentiate, evaluate

    trees = 0
    while trees < n_trees:
        e = random_tree(r, r.randint(1, max_depth))
        d = differentiate(e, "x")
        cases = []
        for _ in range(100):
            x = r.uniform(-2, 2)
            try:
                fn = lambda t: evaluate(e, {"x": t})  # noqa: E731
                if max(abs(fn(x + s)) for s in (-2e-6, 0.0, 2e-6)) > 1e3:
                    continue
                cases.append((e, x, evaluate(d, {"x": x}), central_difference(fn, x)))
            except EvaluationError:
                continue
            if len(cases) == n_points:
                break
        if len(cases) < n_points:
            continue
        trees += 1
        yield from cases
