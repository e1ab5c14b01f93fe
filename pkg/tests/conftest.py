import numpy as np
import pytest

# single-site operators in the (down, up) = (bit 0, bit 1) ordering
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([-1.0, 1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def site_op(op, i, L):
    """Kronecker embedding; the leftmost factor is the most significant bit (site L-1)."""
    out = np.ones((1, 1), dtype=complex)
    for j in range(L - 1, -1, -1):
        out = np.kron(out, op if j == i else I2)
    return out


def kron_hamiltonian(model, L, h=0.0, gamma=0.0, J=1.0, J2=0.0, g=0.0, fields=None):
    """Independent dense construction straight from the Pauli-string definition."""
    hs = np.full(L, h) if fields is None else np.asarray(fields)
    Zs = [site_op(Z, i, L) for i in range(L)]
    Xs = [site_op(X, i, L) for i in range(L)]
    H = np.zeros((1 << L, 1 << L), dtype=complex)
    for i in range(L):
        H -= J * Zs[i] @ Zs[(i + 1) % L]
        if J2:
            H -= J2 * Zs[i] @ Zs[(i + 2) % L]
        if model == "longitudinal_measured":
            H -= 1j * gamma / 4 * Zs[i]
            H -= hs[i] * Xs[i]
        else:
            H -= g * Zs[i]
            H -= (hs[i] + 1j * gamma / 4) * Xs[i]
    return H


def multiset_close(a, b, tol):
    """Greedy matching of two complex multisets."""
    a = list(np.asarray(a))
    b = np.asarray(b).copy()
    if len(a) != len(b):
        return False
    used = np.zeros(len(b), dtype=bool)
    for z in a:
        d = np.abs(b - z)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol:
            return False
        used[j] = True
    return True


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion; the lines are
    repeated in the terminal summary."""
    store = request.config.stash.setdefault(_VERDICTS, {})

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        store[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_VERDICTS, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for n in sorted(store):
            terminalreporter.write_line(store[n])
