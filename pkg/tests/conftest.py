from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from cliffko.scalars import Scalar

settings.register_profile("pinned", derandomize=True, deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pinned")

small_fraction = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def scalars(draw, max_terms: int = 3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        key = (draw(st.integers(0, 1)), draw(st.integers(0, 1)), draw(st.integers(-2, 2)),
               draw(st.integers(-4, 4)))
        terms[key] = draw(small_fraction)
    return Scalar(terms)


@st.composite
def rationals(draw):
    return Scalar.const(draw(small_fraction))


def frac(x) -> Fraction:
    return Fraction(x)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
