import pytest

from primequot.oracles import ClassParams, PrimeQuotientOracle, make_sqrt_like
from primequot.primes import sieve_upto


@pytest.fixture(scope="session")
def table():
    # large enough that prime indices up to 2*10**5 are available
    return sieve_upto(3_000_000)


@pytest.fixture(scope="session")
def prime_oracle(table):
    return PrimeQuotientOracle(table)


@pytest.fixture(scope="session")
def sqrt1():
    return make_sqrt_like(1)


@pytest.fixture(scope="session")
def params_sqrt():
    return ClassParams(0, 1, 1)


@pytest.fixture(scope="session")
def params_prime():
    return ClassParams(1, 1, 11)
