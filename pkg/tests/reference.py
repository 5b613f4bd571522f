"""Independent reference implementations and frozen values for the tests.

Nothing here imports the package. The oracles are deliberately naive
(loops, dense solves, exact Fourier multipliers) so that they share no
code path with the implementation they check.

Frozen values were computed once with the oracles below at high
resolution (adaptive quadrature split at every kernel node, symbolic
differentiation) and are pinned as literals.
"""

import math

import numpy as np

# (1/2) int |V_N| dx by adaptive quadrature on 8N subintervals
VP_L1 = {
    2: 1.2732395447351623,
    4: 1.3297274257428515,
    8: 1.373255828806027,
    16: 1.4013242375212416,
    32: 1.4176666499790664,
    64: 1.426555242930345,
}
# (1/2) int max(V_N, 0) dx, same method
VP_BETA_PLUS = {
    2: 1.1366197723675813,
    4: 1.1648637128714259,
    8: 1.1866279144003464,
    16: 1.2006621187609583,
    32: 1.2088333249891305,
    64: 1.2132776214650822,
}
D1_L1 = 1.0 / 3.0 + 2.0 * math.sqrt(3.0) / math.pi

# symbolic derivatives of exp(1/(x^2 - 1)) at x = 0, 0.3, 0.5, -0.7
MOLLIFIER_1D = {
    0: (0.36787944117144233, 0.33323707715622386, 0.26359713811572677, 0.1407479870412307),
    1: (0.0, -0.24144698260322944, -0.4686171344279587, 0.757582398530269),
    2: (-0.7357588823428847, -0.9482744472325041, -1.3537828327918806, -1.1638149990054165),
    3: (0.0, -1.498978363971499, -2.3141586885331296, -10.611571952349461),
}
MOLLIFIER_POINTS = (0.0, 0.3, 0.5, -0.7)
# sup |Psi^(k)| over (-1, 1) on a 400001-point grid
MOLLIFIER_SUP = {0: 0.36787944117144233, 1: 0.7984297518012484, 2: 7.749704932831226}
# exp(1/(x^2+y^2-1)) partials at (0.1, 0.2) and (0.3, -0.4)
MOLLIFIER_2D = {
    (1, 0): (-0.07734472486012632, -0.28117028065677524),
    (0, 1): (-0.15468944972025264, 0.37489370754236695),
    (1, 1): (-0.03085218941788973, 0.1999433106892624),
    (2, 0): (-0.788873343310208, -1.0871917518728642),
    (0, 2): (-0.8351516274370425, -1.2038253497749338),
}
MOLLIFIER_2D_POINTS = ((0.1, 0.2), (0.3, -0.4))


def soc_ref(t, x):
    return math.sin(t * math.pi * x) if t > 0 else math.cos(t * math.pi * x)


def features_ref(N, d, x):
    """Tensor-product soc features by explicit loops in row-major order."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = []
    for idx in np.ndindex(*([2 * N + 1] * d)):
        v = 1.0
        for j, k in enumerate(idx):
            v *= soc_ref(k - N, x[j])
        out.append(v)
    return np.array(out)


def soc_derivative_ref(t, x, order):
    """``d^k/dx^k`` of soc via the phase shift ``(w)^k f(w x + k pi/2)``."""
    w = abs(t) * math.pi
    base = math.sin if t > 0 else math.cos
    return w**order * base(w * x + order * math.pi / 2)


def trig_eval_ref(N, theta, x, alpha=0):
    t = np.arange(-N, N + 1)
    return sum(th * soc_derivative_ref(int(k), x, alpha) for k, th in zip(t, theta))


def dirichlet_ref(N, x):
    return 1.0 + 2.0 * sum(math.cos(t * math.pi * x) for t in range(1, N + 1))


def vp_ref(N, x):
    return sum(dirichlet_ref(k, x) for k in range(N // 2, N + 1)) / (N // 2 + 1)


def vp_multiplier(N, t):
    """Fourier multiplier of V_N on frequency |t| under dmu-convolution."""
    t = abs(t)
    if t <= N // 2:
        return 1.0
    if t <= N:
        return (N + 1 - t) / (N // 2 + 1)
    return 0.0


def vp_convolve_exact(N, theta, x):
    """``V_N * f`` for a 1-d soc polynomial via exact multipliers."""
    Nf = (len(theta) - 1) // 2
    t = np.arange(-Nf, Nf + 1)
    scaled = np.array([th * vp_multiplier(N, int(k)) for k, th in zip(t, theta)])
    return np.array([trig_eval_ref(Nf, scaled, xi) for xi in np.atleast_1d(x)])


def leverage_ref(F, weights):
    """Max leverage over rows of ``F`` from a dense inverse."""
    sigma = sum(w * np.outer(f, f) for f, w in zip(F, weights) if w > 0)
    inv = np.linalg.inv(sigma)
    return max(float(f @ inv @ f) for f in F)


def nw_ref(x, y, x0, h, kernel="epanechnikov"):
    num = den = 0.0
    for xi, yi in zip(x, y):
        u = (xi - x0) / h
        if kernel == "epanechnikov":
            k = 0.75 * (1 - u * u) if abs(u) <= 1 else 0.0
        elif kernel == "uniform":
            k = 0.5 if abs(u) <= 1 else 0.0
        else:
            k = math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
        num += k * yi
        den += k
    return num / den if den >= 1e-12 else 0.0


def lpe_ref(x, y, x0, h, order, alpha):
    """Weighted least squares in the raw variable ``x - x0`` via lstsq."""
    u = np.asarray(x) - x0
    w = np.where(np.abs(u / h) <= 1, 0.75 * (1 - (u / h) ** 2), 0.0)
    A = np.vander(u, order + 1, increasing=True) * np.sqrt(w)[:, None]
    b = np.asarray(y) * np.sqrt(w)
    coef = np.linalg.lstsq(A, b, rcond=None)[0]
    return math.factorial(alpha) * coef[alpha]


def periodic_spline_ref(values, xq):
    """Periodic cubic spline through equispaced knots on [-1, 1].

    Solves the cyclic system for knot second derivatives
    ``M_{i-1} + 4 M_i + M_{i+1} = 6 (v_{i+1} - 2 v_i + v_{i-1}) / h^2``
    densely and evaluates the standard piecewise cubic.
    """
    v = np.asarray(values, dtype=float)
    L = v.shape[0]
    h = 2.0 / L
    A = np.zeros((L, L))
    rhs = np.zeros(L)
    for i in range(L):
        A[i, i] = 4.0
        A[i, (i - 1) % L] += 1.0
        A[i, (i + 1) % L] += 1.0
        rhs[i] = 6.0 * (v[(i + 1) % L] - 2 * v[i] + v[(i - 1) % L]) / h**2
    M = np.linalg.solve(A, rhs)
    out = []
    for x in np.atleast_1d(xq):
        s = (x + 1.0) / h
        i = min(int(math.floor(s)), L - 1)
        a = x - (-1.0 + i * h)
        b = h - a
        j = (i + 1) % L
        val = (M[i] * b**3 + M[j] * a**3) / (6 * h) + (v[i] / h - M[i] * h / 6) * b + (v[j] / h - M[j] * h / 6) * a
        out.append(val)
    return np.array(out)


def kl_gauss(v, sigma):
    return v * v / (2 * sigma * sigma)
