"""Compiled kernels for the +/-1 move chain on the n x n x n incidence cube.

State is a dense int8 cube ``A`` plus ``st = [proper, r, c, s, steps]``
where (r, c, s) is the -1 cell of an improper state.  Random words are
read from ``buf`` starting at ``pos``; each bounded draw takes one word.
"""

import numpy as np
from numba import njit

# a single step never needs this many words unless rejection strikes ~60 times
STEP_RESERVE = 64


@njit(cache=True)
def _below(buf, pos, m):
    # Lemire multiply-shift on the top 32 bits; divides only on the rare path
    prod = np.int64(buf[pos] >> np.uint64(32)) * m
    pos += 1
    low = prod & 0xFFFFFFFF
    if low < m:
        t = (4294967296 - m) % m
        while low < t:
            prod = np.int64(buf[pos] >> np.uint64(32)) * m
            pos += 1
            low = prod & 0xFFFFFFFF
    return prod >> 32, pos


@njit(cache=True)
def _move(A, r, c, s, s1, c1, r1):
    A[r, c, s] += 1
    A[r, c, s1] -= 1
    A[r, c1, s] -= 1
    A[r1, c, s] -= 1
    A[r, c1, s1] += 1
    A[r1, c, s1] += 1
    A[r1, c1, s] += 1
    A[r1, c1, s1] -= 1


@njit(cache=True)
def check_cube(A, st):
    """True iff every line sums to 1, entries lie in {-1,0,1}, and the -1
    count matches the proper flag."""
    n = A.shape[0]
    neg = 0
    for a in range(n):
        for b in range(n):
            t0 = 0
            t1 = 0
            t2 = 0
            for t in range(n):
                v = A[a, b, t]
                if v < -1 or v > 1:
                    return False
                if v == -1:
                    neg += 1
                t0 += v
                t1 += A[a, t, b]
                t2 += A[t, a, b]
            if t0 != 1 or t1 != 1 or t2 != 1:
                return False
    if st[0] == 1:
        return neg == 0
    return neg == 1 and A[st[1], st[2], st[3]] == -1


@njit(cache=True)
def run_steps(A, st, buf, pos, nsteps, check_every):
    """Advance up to ``nsteps`` moves; returns (done, pos, ok)."""
    n = A.shape[0]
    done = 0
    while done < nsteps and pos + STEP_RESERVE <= buf.shape[0]:
        if n == 1:
            done += 1
            st[4] += 1
            continue
        if st[0] == 1:
            r, pos = _below(buf, pos, n)
            c, pos = _below(buf, pos, n)
            k, pos = _below(buf, pos, n - 1)
            s1 = 0
            for t in range(n):
                if A[r, c, t] == 1:
                    s1 = t
                    break
            s = k if k < s1 else k + 1
            c1 = 0
            for t in range(n):
                if A[r, t, s] == 1:
                    c1 = t
                    break
            r1 = 0
            for t in range(n):
                if A[t, c, s] == 1:
                    r1 = t
                    break
        else:
            r = st[1]
            c = st[2]
            s = st[3]
            pick, pos = _below(buf, pos, 2)
            s1 = -1
            for t in range(n):
                if A[r, c, t] == 1:
                    if pick == 0:
                        s1 = t
                        break
                    pick -= 1
            pick, pos = _below(buf, pos, 2)
            c1 = -1
            for t in range(n):
                if A[r, t, s] == 1:
                    if pick == 0:
                        c1 = t
                        break
                    pick -= 1
            pick, pos = _below(buf, pos, 2)
            r1 = -1
            for t in range(n):
                if A[t, c, s] == 1:
                    if pick == 0:
                        r1 = t
                        break
                    pick -= 1
        _move(A, r, c, s, s1, c1, r1)
        if A[r1, c1, s1] == -1:
            st[0] = 0
            st[1] = r1
            st[2] = c1
            st[3] = s1
        else:
            st[0] = 1
        done += 1
        st[4] += 1
        if check_every > 0 and st[4] % check_every == 0:
            if not check_cube(A, st):
                return done, pos, False
    return done, pos, True


@njit(cache=True)
def cube_to_cells(A):
    n = A.shape[0]
    out = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            for t in range(n):
                if A[a, b, t] == 1:
                    out[a, b] = t
                    break
    return out


@njit(cache=True)
def intercalates_of(cells):
    """Intercalate count of a square given as an int array (O(n^3))."""
    n = cells.shape[0]
    col = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        for x in range(n):
            col[i, cells[i, x]] = x
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            for x in range(n):
                y = col[i, cells[j, x]]
                if y > x and col[i, cells[j, y]] == x:
                    total += 1
    return total
