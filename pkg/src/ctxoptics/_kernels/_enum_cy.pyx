# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Gray-code enumeration of +/-1 assignments, exact int64 arithmetic.

Assignment index ``k``: bit ``i`` set means ``a_i = -1``. Within a block the
high ``n - nlow`` bits are fixed to ``prefix``; the low bits are walked in
Gray-code order so each step flips one variable and updates the objective in
O(degree).
"""
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, free

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


def best_in_block(const int64_t[::1] vertex, const int64_t[::1] indptr,
                  const int64_t[::1] nbr, const int64_t[::1] wt,
                  int nlow, long long prefix):
    """Return ``(max value, smallest index attaining it)`` over one block."""
    cdef Py_ssize_t n = vertex.shape[0]
    cdef Py_ssize_t i, p, b
    cdef int64_t value, field_b, best
    cdef uint64_t base = (<uint64_t>prefix) << nlow
    cdef uint64_t t, steps = (<uint64_t>1) << nlow
    cdef uint64_t g, best_idx
    cdef signed char *a = <signed char *>malloc(n * sizeof(signed char))
    if a == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                a[i] = -1 if (base >> i) & 1 else 1
            value = 0
            for i in range(n):
                value += vertex[i] * a[i]
                for p in range(indptr[i], indptr[i + 1]):
                    if nbr[p] > i:
                        value += wt[p] * a[i] * a[nbr[p]]
            best = value
            best_idx = base
            for t in range(1, steps):
                b = __builtin_ctzll(t)
                field_b = vertex[b]
                for p in range(indptr[b], indptr[b + 1]):
                    field_b += wt[p] * a[nbr[p]]
                value -= 2 * a[b] * field_b
                a[b] = -a[b]
                g = base | (t ^ (t >> 1))
                if value > best or (value == best and g < best_idx):
                    best = value
                    best_idx = g
    finally:
        free(a)
    return int(best), int(best_idx)
