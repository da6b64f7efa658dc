import numpy as np
import pytest

from dirichlet_nls.basis import DomainSpec, SpectralField, build_basis


@pytest.fixture(scope="session")
def cube():
    return build_basis(DomainSpec("cube", 8))


@pytest.fixture(scope="session")
def ball():
    return build_basis(DomainSpec("ball", 24))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_field(basis, rng, decay=0.0):
    """Complex Gaussian coefficients damped by (1 + lambda)^(-decay/2), unit L2."""
    c = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    c *= (1.0 + basis.eigenvalues) ** (-decay / 2)
    return SpectralField(basis, c / np.linalg.norm(c))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
