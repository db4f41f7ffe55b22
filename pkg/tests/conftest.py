import numpy as np
import pytest

from nonlocal_musielak import DomainSpec, MusielakFamily, ProblemSpec, ReactionFamily

BOX1 = ((0.0, 1.0),)


def make_problem(p=3.0, q=2.0, s=0.3, beta=1.0, lam=0.0, h=1 / 32, R=0.5, kind="power", reaction="pure_power", box=BOX1, **fam_kw):
    fam = getattr(MusielakFamily, kind)(p, box=box, **fam_kw)
    rf = ReactionFamily(reaction, q, box=box)
    return ProblemSpec.build(DomainSpec(box, R, h), fam, rf, s, beta=beta, lam=lam)


@pytest.fixture(scope="session")
def prob1d():
    return make_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("#")[1].split()[0])):
            terminalreporter.write_line(line)
