import pytest

from hardyrank import BlaschkeProduct, certify_rank

N, BUFFER, TOL, TRIALS, SEED = 32, 8, 1e-8, 100, 0

_z = BlaschkeProduct.monomial

ROSTER = [
    ("z,w", _z(1), _z(1)),
    ("z^2,w", _z(2), _z(1)),
    ("z,w^2", _z(1), _z(2)),
    ("a=0.5,w", BlaschkeProduct((0.5,)), _z(1)),
    ("a=0.5;-0.3,b=0.2i", BlaschkeProduct((0.5, -0.3)), BlaschkeProduct((0.2j,))),
]

# every distinct inner function appearing in the roster
ROSTER_FUNCTIONS = {}
for _name, _phi, _psi in ROSTER:
    for _theta in (_phi, _psi):
        ROSTER_FUNCTIONS.setdefault(_theta.zeros, _theta)
ROSTER_FUNCTIONS = list(ROSTER_FUNCTIONS.values())

_certs = {}


def roster_certificate(name):
    """Certificate at the reference settings, computed once per session."""
    if name not in _certs:
        _, phi, psi = next(r for r in ROSTER if r[0] == name)
        import time

        t0 = time.perf_counter()
        cert = certify_rank(phi, psi, N, BUFFER, TOL, TRIALS, SEED)
        _certs[name] = (cert, time.perf_counter() - t0)
    return _certs[name]


CRITERIA_LINES = []


@pytest.fixture
def record():
    def _record(number, ok, detail):
        CRITERIA_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(CRITERIA_LINES[-1])
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
