"""Independent brute-force oracles used by the tests."""
import numpy as np
from scipy.optimize import minimize, minimize_scalar


def direct_resolvent(spec, c, shift_mode, e):
    """|(c.A - s + e)^{-1} c.v|^2 by a dense solve."""
    cA, cv = spec.combine(c)
    lam_min = np.linalg.eigvalsh(cA)[0]
    s = min(lam_min, 0.0) if shift_mode == "lambda_m" else lam_min
    y = np.linalg.solve(cA - (s - e) * np.eye(spec.n), cv)
    return float(np.real(np.vdot(y, y)))


def sphere_min_oracle(spec, c, z):
    """Brute-force min of c.f(x) over the real sphere |x|^2 = z for n <= 3.

    Dense angular grid, then local polish of the best few grid points.
    """
    c = np.asarray(c, dtype=float)
    C = np.tensordot(c, spec.A.real, axes=1)
    w = c @ spec.v.real
    r = np.sqrt(z)
    n = spec.n

    def batch(X):
        return np.einsum("ki,ij,kj->k", X, C, X) - 2 * X @ w

    def one(x):
        return float(x @ C @ x - 2 * x @ w)

    if n == 1:
        return min(one(np.array([r])), one(np.array([-r])))
    if n == 2:
        def to_x(t):
            return r * np.stack([np.cos(t), np.sin(t)], axis=-1)

        th = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
        vals = batch(to_x(th))
        best = float(vals.min())
        step = th[1]
        for i in np.argsort(vals)[:4]:
            res = minimize_scalar(lambda t: one(to_x(t)), bounds=(th[i] - step, th[i] + step),
                                  method="bounded", options={"xatol": 1e-12})
            best = min(best, float(res.fun))
        return best
    if n == 3:
        def to_x(p):
            p = np.asarray(p)
            t, f = p[..., 0], p[..., 1]
            return r * np.stack([np.sin(t) * np.cos(f), np.sin(t) * np.sin(f), np.cos(t)], axis=-1)

        T, P = np.meshgrid(np.linspace(0, np.pi, 181), np.linspace(0, 2 * np.pi, 360, endpoint=False))
        pts = np.stack([T.ravel(), P.ravel()], axis=1)
        vals = batch(to_x(pts))
        best = float(vals.min())
        for i in np.argsort(vals)[:4]:
            res = minimize(lambda p: one(to_x(p)), pts[i], method="Nelder-Mead",
                           options={"xatol": 1e-11, "fatol": 1e-14, "maxfev": 4000})
            best = min(best, float(res.fun))
        return best
    raise ValueError("oracle supports n <= 3")

def _unit_rows(rng, k, n):
    X = rng.normal(size=(k, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _polish(fun, x0, maxfev=3000):
    """Nelder-Mead maximization of fun(x/|x|) from x0 (unconstrained, normalized inside)."""
    res = minimize(lambda x: -fun(x / np.linalg.norm(x)), x0, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13, "maxfev": maxfev})
    return -float(res.fun)


def lmax_dual_sphere(A, samples, rng):
    """max over the unit dual sphere of lambda_max(c.A)."""
    m = A.shape[0]
    C = _unit_rows(rng, samples, m)
    vals = np.linalg.eigvalsh(np.tensordot(C, A, axes=1))[:, -1]

    def f(c):
        return float(np.linalg.eigvalsh(np.tensordot(c, A, axes=1))[-1])

    best = float(vals.max())
    if m > 1:
        for i in np.argsort(-vals)[:3]:
            best = max(best, _polish(f, C[i]))
    return best


def lmax_one_sphere(A, samples, rng):
    """max over unit x of ||(x^T A_i x)_i||."""
    n = A.shape[1]
    X = _unit_rows(rng, samples, n)
    vals = np.linalg.norm(np.einsum("ki,mij,kj->km", X, A, X), axis=1)

    def f(x):
        return float(np.linalg.norm(np.einsum("i,mij,j->m", x, A, x)))

    best = float(vals.max())
    if n > 1:
        for i in np.argsort(-vals)[:3]:
            best = max(best, _polish(f, X[i]))
    return best


def lmax_two_spheres(A, samples, rng):
    """max over unit x1, x2 of ||(x1^T A_i x2)_i||."""
    n = A.shape[1]
    X1 = _unit_rows(rng, samples, n)
    X2 = _unit_rows(rng, samples, n)
    vals = np.linalg.norm(np.einsum("ki,mij,kj->km", X1, A, X2), axis=1)

    def f(x1, x2):
        return float(np.linalg.norm(np.einsum("i,mij,j->m", x1, A, x2)))

    def g(z):
        return f(z[:n] / np.linalg.norm(z[:n]), z[n:] / np.linalg.norm(z[n:]))

    best = float(vals.max())
    for i in np.argsort(-vals)[:3]:
        res = minimize(lambda z: -g(z), np.concatenate([X1[i], X2[i]]), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxfev": 6000})
        best = max(best, -float(res.fun))
    return best
