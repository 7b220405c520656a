import numpy as np
import pytest
from numpy.polynomial import Polynomial as P

from fracgreen import OperatorSpec

#: polynomial-coefficient operators used across the suite
CORPUS = {
    "t_half": OperatorSpec((1.5, 0.5), (P([0, 1]),)),
    "t2_t3": OperatorSpec((1.5, 0.5, 0.0), (P([0, 0, 1]), P([0, 0, 0, 1]))),
    "relaxation": OperatorSpec((1.0, 0.0), (1.0,)),
    "second_order": OperatorSpec((2.0, 1.2), (P([1, -1]),)),
    "subdiffusive": OperatorSpec((0.7, 0.3), (P([0.5, 1]),)),
    "three_terms": OperatorSpec((2.5, 1.5, 0.4), (P([1]), P([0, 2]))),
}


@pytest.fixture(params=sorted(CORPUS))
def corpus_op(request):
    return CORPUS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)
