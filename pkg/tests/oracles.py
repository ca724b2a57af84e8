"""Independent verification routes used by the tests.

``dense_solve`` is a plain Gaussian elimination with partial pivoting.
``quadrature_system`` assembles the step systems by per-element Gauss
quadrature of the weak forms, evaluating all geometry from nodal data at
quadrature points and applying interpolation operators explicitly.  Neither
shares code with the package's coefficient-formula assembler or its sparse
solver.
"""

import numpy as np

from elastica.scheme import DirichletScheme, ExtendedScheme

# Three-point Gauss rule on [0, 1]; exact for polynomials up to degree 5
# (the integrands here are at most quadratic per element).
_G = np.sqrt(3.0 / 5.0)
GAUSS_S = 0.5 * (1.0 + np.array([-_G, 0.0, _G]))
GAUSS_W = 0.5 * np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])


def dense_solve(matrix, rhs):
    """Gaussian elimination with partial pivoting on a dense copy."""
    a = np.array(matrix, dtype=float)
    b = np.array(rhs, dtype=float)
    dim = a.shape[0]
    for k in range(dim):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            raise ZeroDivisionError(f"zero pivot in column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]
    z = np.empty(dim)
    for k in range(dim - 1, -1, -1):
        z[k] = (b[k] - a[k, k + 1:] @ z[k + 1:]) / a[k, k]
    return z


def quadrature_system(x, y, params, grid, terms=None):
    """Dense step system assembled by element-wise quadrature.

    Returns ``(matrix, rhs)`` in the package's unknown ordering
    (positions first, then curvature, vertex-major).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n_vertices, n = x.shape
    nn = n_vertices * n
    dim = 2 * nn
    matrix = np.zeros((dim, dim))
    rhs = np.zeros(dim)
    extended = isinstance(params, ExtendedScheme)
    if terms is None:
        terms = (
            {"mass", "bending", "transport", "length", "monitor", "curvature"}
            if extended
            else {"mass", "bending", "transport", "dirichlet", "curvature"}
        )
    delta = params.delta
    nodes = grid.nodes
    eye = np.eye(n)
    monitor_nodal = params.monitor(x) if extended and "monitor" in terms else None

    def xdof(v, c):
        return v * n + c

    def ydof(v, c):
        return nn + v * n + c

    for e in range(n_vertices):
        left = (e - 1) % n_vertices
        right = e
        if e >= 1:
            width = nodes[e] - nodes[e - 1]
        else:
            width = nodes[n_vertices] - nodes[n_vertices - 1]
        x_l, x_r = x[left], x[right]
        y_l, y_r = y[left], y[right]
        deriv = {left: -1.0 / width, right: 1.0 / width}
        ends = (left, right)
        for s, w in zip(GAUSS_S, GAUSS_W):
            du = w * width
            shape = {left: 1.0 - s, right: s}
            x_u = (x_r - x_l) / width
            speed = np.linalg.norm(x_u)
            tau = x_u / speed
            proj = eye - np.outer(tau, tau)
            ysq_interp = (y_l @ y_l) * (1.0 - s) + (y_r @ y_r) * s

            for a in ends:
                for c in range(n):
                    row = xdof(a, c)
                    if "mass" in terms and not extended:
                        # interpolant of (v . phi) has a single nonzero node
                        coeff = shape[a] * speed * du / delta
                        matrix[row, xdof(a, c)] += coeff
                        rhs[row] += coeff * x[a, c]
                    if "mass" in terms and extended:
                        aniso = proj + params.epsilon * np.outer(tau, tau)
                        for b in ends:
                            for k in range(n):
                                coeff = aniso[c, k] * shape[b] * shape[a] * speed * du / delta
                                matrix[row, xdof(b, k)] += coeff
                                rhs[row] += coeff * x[b, k]
                    if "bending" in terms:
                        for b in ends:
                            for k in range(n):
                                matrix[row, ydof(b, k)] -= (
                                    proj[c, k] * deriv[b] * deriv[a] / speed * du
                                )
                    if "transport" in terms:
                        for b in ends:
                            matrix[row, xdof(b, c)] -= (
                                0.5 * ysq_interp * deriv[b] * deriv[a] / speed * du
                            )
                    if "dirichlet" in terms and not extended:
                        for b in ends:
                            matrix[row, xdof(b, c)] += params.lam * deriv[b] * deriv[a] * du
                    if "length" in terms and extended:
                        for b in ends:
                            matrix[row, xdof(b, c)] += (
                                params.lam_tilde * deriv[b] * deriv[a] / speed * du
                            )
                    if "monitor" in terms and extended:
                        m_interp = (
                            monitor_nodal[left] * (1.0 - s) + monitor_nodal[right] * s
                        )
                        for b in ends:
                            matrix[row, xdof(b, c)] += (
                                params.epsilon * m_interp * deriv[b] * deriv[a] * du
                            )
                    if "curvature" in terms:
                        yrow = ydof(a, c)
                        matrix[yrow, ydof(a, c)] += shape[a] * speed * du
                        for b in ends:
                            matrix[yrow, xdof(b, c)] += deriv[b] * deriv[a] / speed * du
    return matrix, rhs
