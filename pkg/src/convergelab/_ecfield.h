/* 4x64-limb Montgomery arithmetic and Jacobian point operations for
 * short-Weierstrass curves over odd primes below 2^256. */
#ifndef CONVERGELAB_ECFIELD_H
#define CONVERGELAB_ECFIELD_H

#include <stdint.h>
#include <string.h>

typedef unsigned __int128 cl_u128;

typedef struct {
    uint64_t p[4];
    uint64_t n0;      /* -p^-1 mod 2^64 */
    uint64_t r2[4];   /* R^2 mod p, R = 2^256 */
    uint64_t one[4];  /* R mod p */
    uint64_t a[4];    /* curve a, Montgomery form */
} cl_field;

typedef struct {
    uint64_t X[4], Y[4], Z[4];
    int inf;
} cl_jpoint;

static inline int cl_is_zero(const uint64_t *x)
{
    return (x[0] | x[1] | x[2] | x[3]) == 0;
}

static inline int cl_geq(const uint64_t *x, const uint64_t *y)
{
    for (int i = 3; i >= 0; i--) {
        if (x[i] != y[i])
            return x[i] > y[i];
    }
    return 1;
}

static inline void cl_sub_raw(uint64_t *r, const uint64_t *x, const uint64_t *y, uint64_t *borrow_out)
{
    uint64_t borrow = 0;
    for (int i = 0; i < 4; i++) {
        cl_u128 d = (cl_u128)x[i] - y[i] - borrow;
        r[i] = (uint64_t)d;
        borrow = (uint64_t)(d >> 64) & 1;
    }
    *borrow_out = borrow;
}

static inline void cl_add_raw(uint64_t *r, const uint64_t *x, const uint64_t *y, uint64_t *carry_out)
{
    uint64_t carry = 0;
    for (int i = 0; i < 4; i++) {
        cl_u128 s = (cl_u128)x[i] + y[i] + carry;
        r[i] = (uint64_t)s;
        carry = (uint64_t)(s >> 64);
    }
    *carry_out = carry;
}

static inline void cl_fadd(uint64_t *r, const uint64_t *x, const uint64_t *y, const cl_field *F)
{
    uint64_t carry, borrow, t[4];
    cl_add_raw(t, x, y, &carry);
    if (carry || cl_geq(t, F->p))
        cl_sub_raw(t, t, F->p, &borrow);
    memcpy(r, t, sizeof t);
}

static inline void cl_fsub(uint64_t *r, const uint64_t *x, const uint64_t *y, const cl_field *F)
{
    uint64_t borrow, carry, t[4];
    cl_sub_raw(t, x, y, &borrow);
    if (borrow)
        cl_add_raw(t, t, F->p, &carry);
    memcpy(r, t, sizeof t);
}

/* CIOS Montgomery multiplication: r = x*y*R^-1 mod p */
static void cl_fmul(uint64_t *r, const uint64_t *x, const uint64_t *y, const cl_field *F)
{
    uint64_t t[6] = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 4; i++) {
        cl_u128 c = 0;
        for (int j = 0; j < 4; j++) {
            c = (cl_u128)t[j] + (cl_u128)x[j] * y[i] + (uint64_t)(c >> 64);
            t[j] = (uint64_t)c;
        }
        c = (cl_u128)t[4] + (uint64_t)(c >> 64);
        t[4] = (uint64_t)c;
        t[5] = (uint64_t)(c >> 64);

        uint64_t m = t[0] * F->n0;
        c = (cl_u128)t[0] + (cl_u128)m * F->p[0];
        for (int j = 1; j < 4; j++) {
            c = (cl_u128)t[j] + (cl_u128)m * F->p[j] + (uint64_t)(c >> 64);
            t[j - 1] = (uint64_t)c;
        }
        c = (cl_u128)t[4] + (uint64_t)(c >> 64);
        t[3] = (uint64_t)c;
        t[4] = t[5] + (uint64_t)(c >> 64);
    }
    uint64_t borrow;
    if (t[4] || cl_geq(t, F->p))
        cl_sub_raw(t, t, F->p, &borrow);
    memcpy(r, t, 4 * sizeof(uint64_t));
}

static inline void cl_fsqr(uint64_t *r, const uint64_t *x, const cl_field *F)
{
    cl_fmul(r, x, x, F);
}

static void cl_double(cl_jpoint *R, const cl_jpoint *P, const cl_field *F)
{
    if (P->inf || cl_is_zero(P->Y)) {
        R->inf = 1;
        return;
    }
    uint64_t XX[4], YY[4], YYYY[4], ZZ[4], S[4], M[4], T[4], X3[4], Y3[4], Z3[4];
    cl_fsqr(XX, P->X, F);
    cl_fsqr(YY, P->Y, F);
    cl_fsqr(YYYY, YY, F);
    cl_fsqr(ZZ, P->Z, F);

    cl_fmul(S, P->X, YY, F);
    cl_fadd(S, S, S, F);
    cl_fadd(S, S, S, F);

    cl_fsqr(T, ZZ, F);
    cl_fmul(T, T, F->a, F);
    cl_fadd(M, XX, XX, F);
    cl_fadd(M, M, XX, F);
    cl_fadd(M, M, T, F);

    cl_fsqr(X3, M, F);
    cl_fsub(X3, X3, S, F);
    cl_fsub(X3, X3, S, F);

    cl_fsub(T, S, X3, F);
    cl_fmul(Y3, M, T, F);
    cl_fadd(T, YYYY, YYYY, F);
    cl_fadd(T, T, T, F);
    cl_fadd(T, T, T, F);
    cl_fsub(Y3, Y3, T, F);

    cl_fmul(Z3, P->Y, P->Z, F);
    cl_fadd(Z3, Z3, Z3, F);

    memcpy(R->X, X3, sizeof X3);
    memcpy(R->Y, Y3, sizeof Y3);
    memcpy(R->Z, Z3, sizeof Z3);
    R->inf = 0;
}

/* R = P + (x2, y2) with the second operand affine (Montgomery form). */
static void cl_add_affine(cl_jpoint *R, const cl_jpoint *P, const uint64_t *x2, const uint64_t *y2, const cl_field *F)
{
    if (P->inf) {
        memcpy(R->X, x2, 4 * sizeof(uint64_t));
        memcpy(R->Y, y2, 4 * sizeof(uint64_t));
        memcpy(R->Z, F->one, 4 * sizeof(uint64_t));
        R->inf = 0;
        return;
    }
    uint64_t Z1Z1[4], U2[4], S2[4], H[4], Rr[4], HH[4], HHH[4], V[4], T[4], X3[4], Y3[4], Z3[4];
    cl_fsqr(Z1Z1, P->Z, F);
    cl_fmul(U2, x2, Z1Z1, F);
    cl_fmul(S2, y2, P->Z, F);
    cl_fmul(S2, S2, Z1Z1, F);
    cl_fsub(H, U2, P->X, F);
    cl_fsub(Rr, S2, P->Y, F);
    if (cl_is_zero(H)) {
        if (cl_is_zero(Rr)) {
            cl_double(R, P, F);
        } else {
            R->inf = 1;
        }
        return;
    }
    cl_fsqr(HH, H, F);
    cl_fmul(HHH, H, HH, F);
    cl_fmul(V, P->X, HH, F);

    cl_fsqr(X3, Rr, F);
    cl_fsub(X3, X3, HHH, F);
    cl_fsub(X3, X3, V, F);
    cl_fsub(X3, X3, V, F);

    cl_fsub(T, V, X3, F);
    cl_fmul(Y3, Rr, T, F);
    cl_fmul(T, P->Y, HHH, F);
    cl_fsub(Y3, Y3, T, F);

    cl_fmul(Z3, P->Z, H, F);

    memcpy(R->X, X3, sizeof X3);
    memcpy(R->Y, Y3, sizeof Y3);
    memcpy(R->Z, Z3, sizeof Z3);
    R->inf = 0;
}

/* Left-to-right double-and-add. Inputs and outputs in normal (non-Montgomery)
 * form; returns 1 when the result is the point at infinity. */
static int cl_scalar_mul(const cl_field *F, const uint64_t *x, const uint64_t *y, const uint64_t *k,
                         uint64_t *X, uint64_t *Y, uint64_t *Z)
{
    uint64_t xm[4], ym[4], unit[4] = {1, 0, 0, 0};
    cl_fmul(xm, x, F->r2, F);
    cl_fmul(ym, y, F->r2, F);

    cl_jpoint acc;
    acc.inf = 1;
    for (int i = 255; i >= 0; i--) {
        if (!acc.inf)
            cl_double(&acc, &acc, F);
        if ((k[i / 64] >> (i % 64)) & 1)
            cl_add_affine(&acc, &acc, xm, ym, F);
    }
    if (acc.inf)
        return 1;
    cl_fmul(X, acc.X, unit, F);
    cl_fmul(Y, acc.Y, unit, F);
    cl_fmul(Z, acc.Z, unit, F);
    return 0;
}

/* splitmix64 step; the caller owns the state word. */
static inline uint64_t cl_splitmix64(uint64_t *state)
{
    uint64_t z = (*state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

static inline double cl_unit_double(uint64_t z)
{
    return (double)(z >> 11) * (1.0 / 9007199254740992.0);
}

#endif
