"""Independent assembly of the 2-cell unit-square Poisson system.

Square (0,0),(1,0),(1,1),(0,1) split by the (0,0)-(1,1) diagonal into
T0 = (0,1,2) and T1 = (0,2,3); homogeneous Dirichlet data on every side.
Prints A (row major), the Cramer solution for f = 1, and the diamond area
of the diagonal.
"""
from fractions import Fraction as F
import numpy as np

P = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
tris = [(0, 1, 2), (0, 2, 3)]
cent = [P[list(t)].mean(axis=0) for t in tris]
area = [0.5, 0.5]


def rot_cw(v):
    return np.array([v[1], -v[0]])


# Every node lies on the Dirichlet boundary, so node values are the
# boundary data (zero) and only enter the right-hand side. The weights
# below are what interior nodes would use and are kept for reference.
dirichlet_node = {0: True, 1: True, 2: True, 3: True}

# Vertex weights: nodes 0 and 2 see both centroids at equal distance; a
# two-point stencil is collinear, so inverse-distance weights apply.
w = {0: {0: 0.5, 1: 0.5}, 1: {0: 1.0}, 2: {0: 0.5, 1: 0.5}, 3: {1: 1.0}}

faces = []  # (a, b, left, right or None)
for c, t in enumerate(tris):
    for e in range(3):
        a, b = t[e], t[(e + 1) % 3]
        faces.append((a, b, c))
uniq = {}
for a, b, c in faces:
    key = tuple(sorted((a, b)))
    if key in uniq:
        uniq[key] = (uniq[key][0], uniq[key][1], uniq[key][2], c)
    else:
        uniq[key] = (a, b, c, None)

A = np.zeros((2, 2))
for (a, b, l, r) in uniq.values():
    A_, B_ = P[a], P[b]
    n = rot_cw(B_ - A_)
    length = np.linalg.norm(n)
    n /= length
    L = cent[l]
    R = cent[r] if r is not None else 0.5 * (A_ + B_)
    lr = rot_cw(R - L)
    lr_len = np.linalg.norm(R - L)
    lr /= lr_len
    two_mu = np.dot(R - L, n) * length
    across = length * length / two_mu
    along = lr_len * np.dot(lr, n) * length / two_mu
    # flux = across (P_R - P_L) + along (P_A - P_B); row l gets -flux.
    A[l, l] += across
    if r is not None:
        A[l, r] -= across
        A[r, r] += across
        A[r, l] -= across
    for cc, ww in ({} if dirichlet_node[a] else w[a]).items():
        A[l, cc] -= along * ww
        if r is not None:
            A[r, cc] += along * ww
    for cc, ww in ({} if dirichlet_node[b] else w[b]).items():
        A[l, cc] += along * ww
        if r is not None:
            A[r, cc] -= along * ww
    if r is not None:
        quad = [L, A_, R, B_]
        s = sum(q[0] * p[1] - p[0] * q[1] for q, p in zip(quad, quad[1:] + quad[:1]))
        print("diagonal diamond area", repr(abs(s) / 2))

print("A", [repr(x) for x in A.ravel()])
b = np.array(area)  # f = 1
det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
x0 = (b[0] * A[1, 1] - A[0, 1] * b[1]) / det
x1 = (A[0, 0] * b[1] - b[0] * A[1, 0]) / det
print("cramer", repr(x0), repr(x1))
