"""Shared builders and hypothesis strategies for the test suite."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rmcda.core import Category, Criterion, DecisionMatrix, Sense


def make_matrix(values, senses=None, categories=None) -> DecisionMatrix:
    values = np.asarray(values, dtype=float)
    m, n = values.shape
    senses = senses or [Sense.BENEFIT] * n
    categories = categories or [Category.PERFORMANCE] * n
    criteria = tuple(
        Criterion(f"C{j + 1}", f"criterion {j + 1}", senses[j], categories[j]) for j in range(n)
    )
    return DecisionMatrix(tuple(f"A{i}" for i in range(m)), criteria, values)


positive = st.floats(0.5, 100.0, allow_nan=False, allow_infinity=False)


@st.composite
def matrices(draw, min_m=2, max_m=8, min_n=1, max_n=6, distinct=True):
    """Random strictly positive decision matrices with mixed senses.

    ``distinct`` keeps every column non-constant (values are spread apart) so
    min-max and the dispersion-based weights are defined.
    """
    m = draw(st.integers(min_m, max_m))
    n = draw(st.integers(min_n, max_n))
    vals = draw(arrays(np.float64, (m, n), elements=positive))
    if distinct:
        # add a strictly increasing offset in a random row order per column
        for j in range(n):
            order = draw(st.permutations(range(m)))
            vals[:, j] += 0.25 * np.asarray(order, dtype=float)
    senses = draw(st.lists(st.sampled_from(list(Sense)), min_size=n, max_size=n))
    cats = draw(st.lists(st.sampled_from(list(Category)), min_size=n, max_size=n))
    return make_matrix(vals, senses, cats)
