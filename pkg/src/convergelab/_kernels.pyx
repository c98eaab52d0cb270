# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels. Behaviour must match ``_pykernels`` bit for bit."""

from libc.stdint cimport uint64_t
from libc.math cimport floor

cdef extern from "_ecfield.h":
    ctypedef struct cl_field:
        uint64_t p[4]
        uint64_t n0
        uint64_t r2[4]
        uint64_t one[4]
        uint64_t a[4]
    int cl_scalar_mul(const cl_field *F, const uint64_t *x, const uint64_t *y,
                      const uint64_t *k, uint64_t *X, uint64_t *Y, uint64_t *Z) nogil
    uint64_t cl_splitmix64(uint64_t *state)
    double cl_unit_double(uint64_t z)

BACKEND = "compiled"

cdef object _MASK = (1 << 64) - 1
cdef dict _fields = {}


cdef void _limbs(object value, uint64_t *out):
    cdef int i
    for i in range(4):
        out[i] = <uint64_t>(value & _MASK)
        value >>= 64


cdef object _from_limbs(const uint64_t *v):
    cdef object out = 0
    cdef int i
    for i in range(3, -1, -1):
        out = (out << 64) | v[i]
    return out


cdef class _Field:
    cdef cl_field f


cdef _Field _field_for(object p, object a):
    key = (p, a)
    cached = _fields.get(key)
    if cached is not None:
        return <_Field>cached
    cdef _Field fld = _Field()
    R = 1 << 256
    _limbs(p, fld.f.p)
    fld.f.n0 = <uint64_t>((-pow(p, -1, 1 << 64)) % (1 << 64))
    _limbs((R * R) % p, fld.f.r2)
    _limbs(R % p, fld.f.one)
    _limbs(((a % p) * R) % p, fld.f.a)
    if len(_fields) > 64:
        _fields.clear()
    _fields[key] = fld
    return fld


def scalar_mul_jacobian(k, x, y, a, p):
    """Return k*(x, y) in affine form, or None for the point at infinity."""
    if p.bit_length() > 256 or p % 2 == 0 or k < 0 or k.bit_length() > 256:
        raise ValueError("compiled kernel needs an odd prime below 2^256 and 0 <= k < 2^256")
    cdef _Field fld = _field_for(p, a)
    cdef uint64_t xl[4]
    cdef uint64_t yl[4]
    cdef uint64_t kl[4]
    cdef uint64_t X[4]
    cdef uint64_t Y[4]
    cdef uint64_t Z[4]
    _limbs(x % p, xl)
    _limbs(y % p, yl)
    _limbs(k, kl)
    cdef int inf
    with nogil:
        inf = cl_scalar_mul(&fld.f, xl, yl, kl, X, Y, Z)
    if inf:
        return None
    zx = _from_limbs(Z)
    zinv = pow(zx, -1, p)
    zinv2 = zinv * zinv % p
    return (_from_limbs(X) * zinv2 % p, _from_limbs(Y) * zinv2 * zinv % p)


def splitmix_uniforms(uint64_t key, int count):
    """First ``count`` unit-interval draws of the splitmix64 stream at ``key``."""
    cdef uint64_t state = key
    return [cl_unit_double(cl_splitmix64(&state)) for _ in range(count)]


def contention_slots(uint64_t key, double busy, int cw_min, int cw_max):
    """Backoff slot count and final contention window for one frame."""
    cdef uint64_t state = key
    cdef int cw = cw_min
    cdef double u
    while cw < cw_max:
        u = cl_unit_double(cl_splitmix64(&state))
        if u >= busy:
            break
        cw = 2 * cw + 1
        if cw > cw_max:
            cw = cw_max
    u = cl_unit_double(cl_splitmix64(&state))
    return <long>floor(u * (cw + 1)), cw


def zoh_running_mean(times, values):
    """Running time-weighted mean of a zero-order-hold series."""
    cdef Py_ssize_t n = len(times)
    if n != len(values):
        raise ValueError("times and values differ in length")
    if n == 0:
        return []
    cdef double[:] t = memoryview(_as_doubles(times))
    cdef double[:] v = memoryview(_as_doubles(values))
    out = [0.0] * n
    cdef double acc
    cdef Py_ssize_t i
    if t[0] > 0.0:
        acc = v[0] * t[0]
    else:
        acc = 0.0
    out[0] = v[0]
    for i in range(1, n):
        acc = acc + v[i - 1] * (t[i] - t[i - 1])
        out[i] = acc / t[i]
    return out


def _as_doubles(seq):
    from array import array
    return array("d", seq)
