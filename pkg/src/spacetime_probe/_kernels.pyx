# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled series kernels. Mirrors ``_kernels_py`` term for term."""

cdef extern from "complex.h":
    double cabs(double complex z) nogil


def bessel1_series(double complex z, double tol=1e-17, int max_terms=400):
    cdef double complex h = 0.5 * z
    cdef double complex q = -h * h
    cdef double complex term = h
    cdef double psi_sum = -2.0 * 0.57721566490153286061 + 1.0
    cdef double complex j = term
    cdef double complex s = term * psi_sum
    cdef double complex t
    cdef int k
    for k in range(1, max_terms):
        term = term * q / (k * (k + 1.0))
        psi_sum += 1.0 / k + 1.0 / (k + 1.0)
        j += term
        t = term * psi_sum
        s += t
        if cabs(t) <= tol * cabs(s) and cabs(term) <= tol * cabs(j):
            return j, s, k + 1
    return j, s, max_terms


def hyp2f1_series(double a, double b, double c, double complex z,
                  double tol=1e-17, int max_terms=20000):
    cdef double complex term = 1.0
    cdef double complex total = 1.0
    cdef int n
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total += term
        if term == 0 or (cabs(term) <= tol * cabs(total) and n > 2):
            return total, n + 1
    return total, -max_terms


def hyp2f1_log_series(double a, double b, int m, double complex w,
                      double complex logw, double psi_a, double psi_b,
                      double psi_1, double psi_m1,
                      double tol=1e-17, int max_terms=20000):
    cdef double complex coef = 1.0
    cdef double complex t, total
    cdef double pa = psi_a, pb = psi_b, p1 = psi_1, pm = psi_m1
    cdef int k, n
    for k in range(1, m + 1):
        coef = coef / k
    total = coef * (logw - p1 - pm + pa + pb)
    for n in range(max_terms):
        coef = coef * ((a + n) * (b + n) / ((n + 1.0) * (n + m + 1.0))) * w
        pa += 1.0 / (a + n)
        pb += 1.0 / (b + n)
        p1 += 1.0 / (n + 1.0)
        pm += 1.0 / (n + m + 1.0)
        t = coef * (logw - p1 - pm + pa + pb)
        total += t
        if coef == 0 or (cabs(t) <= tol * cabs(total) and n > 2):
            return total, n + 1
    return total, -max_terms
