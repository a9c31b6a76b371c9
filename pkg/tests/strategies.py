"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from encbel.frame import Scope, Variable
from encbel.massfn import MassFunction


def variable(name="W", min_size=1, max_size=4, order=0):
    return st.integers(min_size, max_size).map(
        lambda n: Variable(name, tuple(f"{name.lower()}{i}" for i in range(n)), order=order))


@st.composite
def mass_functions(draw, scope: Scope, max_focal=5, allow_empty=True):
    lo = 0 if allow_empty else 1
    keys = draw(st.lists(st.integers(lo, scope.full), min_size=1,
                         max_size=min(max_focal, scope.full + 1 - lo), unique=True))
    weights = draw(st.lists(st.integers(1, 1000), min_size=len(keys), max_size=len(keys)))
    total = sum(weights)
    return MassFunction(scope, {k: w / total for k, w in zip(keys, weights)})


@st.composite
def scoped_masses(draw, n=1, max_size=4, allow_empty=True):
    """A scope on one variable plus ``n`` mass functions on it."""
    scope = Scope.of(draw(variable(max_size=max_size)))
    return (scope, *[draw(mass_functions(scope, allow_empty=allow_empty)) for _ in range(n)])
