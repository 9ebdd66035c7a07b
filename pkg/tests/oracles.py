"""Independent reference implementations used by the test suite."""

import math

import numpy as np
from scipy.linalg import expm


def dense_feature_state(x, n_qubits=3, depth=2, pairs=((0, 1), (1, 2))):
    """Statevector by explicit matrices: U = expm(i G) with G built from
    Kronecker products of Pauli Z, then (U H^n)^d |0>. Qubit j is bit j of
    the basis index, i.e. the (n-1-j)-th Kronecker factor."""
    Z = np.diag([1.0, -1.0])
    I = np.eye(2)
    H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)

    def op(factors):
        out = np.array([[1.0]])
        for q in reversed(range(n_qubits)):
            out = np.kron(out, factors.get(q, I))
        return out

    G = sum(x[j] * op({j: Z}) for j in range(n_qubits))
    for j, k in pairs:
        G = G + (math.pi - x[j]) * (math.pi - x[k]) * op({j: Z, k: Z})
    U = expm(1j * G)
    Hn = op({q: H for q in range(n_qubits)})
    psi = np.zeros(2 ** n_qubits, dtype=complex)
    psi[0] = 1.0
    for _ in range(depth):
        psi = U @ (Hn @ psi)
    return psi


def dense_fidelity(x, x2, **kw):
    return abs(np.vdot(dense_feature_state(x2, **kw), dense_feature_state(x, **kw))) ** 2


def project_box_hyperplane(v, y, C):
    """Exact Euclidean projection onto {0 <= a <= C, y.a = 0}.

    g(lam) = y . clip(v - lam y, 0, C) is piecewise linear and
    nonincreasing, so the root lies between two breakpoints."""
    bps = np.unique(np.concatenate([y * v, y * (v - C)]))
    f = np.clip(v[None, :] - bps[:, None] * y[None, :], 0, C) @ y
    k = int(np.searchsorted(-f, 0.0))
    if k == 0:
        lam = bps[0]
    elif k == len(bps):
        lam = bps[-1]
    else:
        l0, l1, f0, f1 = bps[k - 1], bps[k], f[k - 1], f[k]
        lam = l1 if f1 == f0 else l0 + (l1 - l0) * f0 / (f0 - f1)
    return np.clip(v - lam * y, 0, C)


def dual_qp_fista(K, y, C, iters=200_000, tol=1e-14):
    """Accelerated projected gradient on min 1/2 a'Qa - 1'a over the SVM
    dual feasible set."""
    y = np.asarray(y, dtype=float)
    Q = (y[:, None] * y[None, :]) * K
    L = np.linalg.eigvalsh(Q).max()
    a = np.zeros(len(y))
    z = a.copy()
    t = 1.0
    for i in range(iters):
        a_new = project_box_hyperplane(z - (Q @ z - 1.0) / L, y, C)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        z = a_new + (t - 1) / t_new * (a_new - a)
        done = i > 100 and np.max(np.abs(a_new - a)) < tol * C
        a, t = a_new, t_new
        if done:
            break
    return a


def rk4(f, y0, t1, steps):
    h = t1 / steps
    y = y0
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def strata_counts(column, n):
    """Count points per stratum [k/n, (k+1)/n) by explicit comparisons."""
    column = np.asarray(column)
    return [int(np.sum((column >= k / n) & (column < (k + 1) / n))) for k in range(n)]
