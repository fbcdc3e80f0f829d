"""Pure-Python exact rank of sparse integer matrices.

Rows are lists of (column, value) pairs sorted by column with nonzero
integer values.  Elimination is fraction-free: a row is reduced against the
stored pivot row with the same leading column by ``a*row - b*pivot`` and then
divided by the gcd of its entries, which keeps entries small in practice.
"""
from math import gcd


def _primitive(row):
    g = 0
    for _, v in row:
        g = gcd(g, v)
        if g == 1:
            break
    if row[0][1] < 0:
        g = -g
    if g != 1:
        row = [(c, v // g) for c, v in row]
    return row


def _combine(a, row, b, pivot):
    """a*row - b*pivot, both sorted sparse rows, dropping zeros."""
    out = []
    i = j = 0
    n, m = len(row), len(pivot)
    while i < n and j < m:
        ci, vi = row[i]
        cj, vj = pivot[j]
        if ci == cj:
            v = a * vi - b * vj
            if v:
                out.append((ci, v))
            i += 1
            j += 1
        elif ci < cj:
            out.append((ci, a * vi))
            i += 1
        else:
            out.append((cj, -b * vj))
            j += 1
    while i < n:
        out.append((row[i][0], a * row[i][1]))
        i += 1
    while j < m:
        out.append((pivot[j][0], -b * pivot[j][1]))
        j += 1
    return out


def rank_int_rows(rows):
    """Rank over Q of the matrix whose rows are sparse integer rows."""
    pivots = {}
    for row in sorted((r for r in rows if r), key=len):
        row = _primitive(row)
        while row:
            lead = row[0][0]
            piv = pivots.get(lead)
            if piv is None:
                pivots[lead] = row
                break
            a, b = piv[0][1], row[0][1]
            g = gcd(a, b)
            row = _combine(a // g, row, b // g, piv)
            if row:
                row = _primitive(row)
    return len(pivots)
