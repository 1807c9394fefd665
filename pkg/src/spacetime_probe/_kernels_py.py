"""Pure-Python series kernels.

Same signatures as the compiled ``_kernels`` extension, which is preferred
when it imports.
"""


def bessel1_series(z, tol=1e-17, max_terms=400):
    """Power series pieces of J1 and Y1.

    Returns ``(j, s, n)`` with ``j = J1(z)`` and
    ``s = sum_k (-1)^k [psi(k+1) + psi(k+2)] (z/2)^(2k+1) / (k! (k+1)!)``.
    """
    h = 0.5 * z
    q = -h * h
    term = h
    psi_sum = -2.0 * 0.57721566490153286061 + 1.0
    j = term
    s = term * psi_sum
    for k in range(1, max_terms):
        term = term * q / (k * (k + 1.0))
        psi_sum += 1.0 / k + 1.0 / (k + 1.0)
        j += term
        t = term * psi_sum
        s += t
        if abs(t) <= tol * abs(s) and abs(term) <= tol * abs(j):
            return j, s, k + 1
    return j, s, max_terms


def hyp2f1_series(a, b, c, z, tol=1e-17, max_terms=20000):
    """Direct Gauss series. Returns ``(value, n_terms)``; ``n_terms < 0`` on non-convergence."""
    term = 1.0 + 0j
    total = 1.0 + 0j
    for n in range(max_terms):
        term = term * (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if term == 0 or (abs(term) <= tol * abs(total) and n > 2):
            return total, n + 1
    return total, -max_terms


def hyp2f1_log_series(a, b, m, w, logw, psi_a, psi_b, psi_1, psi_m1,
                      tol=1e-17, max_terms=20000):
    """Logarithmic sum of the degenerate z -> 1 - z connection formula.

    ``sum_n (a)_n (b)_n / (n! (n+m)!) w^n [log w - psi(n+1) - psi(n+m+1)
    + psi(a+n) + psi(b+n)]``, with the digamma values at ``n = 0`` supplied.
    """
    coef = 1.0 + 0j
    for k in range(1, m + 1):
        coef /= k
    pa, pb, p1, pm = psi_a, psi_b, psi_1, psi_m1
    total = coef * (logw - p1 - pm + pa + pb)
    for n in range(max_terms):
        coef = coef * (a + n) * (b + n) / ((n + 1.0) * (n + m + 1.0)) * w
        pa += 1.0 / (a + n)
        pb += 1.0 / (b + n)
        p1 += 1.0 / (n + 1.0)
        pm += 1.0 / (n + m + 1.0)
        t = coef * (logw - p1 - pm + pa + pb)
        total += t
        if coef == 0 or (abs(t) <= tol * abs(total) and n > 2):
            return total, n + 1
    return total, -max_terms
