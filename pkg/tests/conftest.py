import numpy as np
import pytest

from d2fa_compress import Dfa, compile_regex_set, generate_clustered_dfa
from d2fa_compress.pipelines import ALGORITHMS, AlgoSpec, compress
from d2fa_compress.graphs import LshParams

# ToyDFA T1 over {a, b} = {0, 1}
T1_TABLE = [[1, 0], [1, 2], [1, 3], [1, 0]]
THREE_RULES = ".*((ab+c+)|(cd+)|(bd+e))"


def make_t1():
    return Dfa(np.array(T1_TABLE), 0, frozenset({3}))


def make_three_rules():
    return compile_regex_set([THREE_RULES], 5, symbols="abcde")


@pytest.fixture
def t1():
    return make_t1()


@pytest.fixture
def three_rules():
    return make_three_rules()


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    tiny = generate_clustered_dfa(32, 16, 4, 0.1, 0)
    for algo in ALGORITHMS:
        compress(tiny, AlgoSpec(algo, lsh=LshParams(k=4, r=2)))
