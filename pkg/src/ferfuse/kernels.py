"""Hot numeric kernels, each in a numba and a pure-numpy build.

The ``*_nb`` variants are ``@njit`` compiled; the ``*_np`` variants are the
vectorized numpy fallback.  The unsuffixed module-level name is the active
build chosen by :mod:`ferfuse.accel` (``FERFUSE_NUMBA=0`` selects numpy).
``benchmarks/bench_kernels.py`` times both sides of every pair.
"""

import numpy as np

from .accel import njit, pick

INF = np.inf

# ---------------------------------------------------------------------------
# pairwise squared euclidean distances
#
# Direct differences rather than the (x^2 + y^2 - 2xy) expansion: identical
# rows must come out at exactly 0.0 so that coincident points and the
# exact-match short circuit in out-of-sample transforms behave.


@njit
def pairwise_sq_nb(x, y):
    n, d = x.shape
    m = y.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - y[j, k]
                acc += diff * diff
            out[i, j] = acc
    return out


def pairwise_sq_np(x, y, chunk=64):
    n = x.shape[0]
    out = np.empty((n, y.shape[0]), dtype=np.float64)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = x[start:stop, None, :] - y[None, :, :]
        out[start:stop] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


pairwise_sq = pick(pairwise_sq_nb, pairwise_sq_np)


# ---------------------------------------------------------------------------
# hamming distances between packed bit rows (uint8, 8 bits per byte)

_POPCOUNT = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)


@njit
def hamming_matrix_nb(a, b):
    n, w = a.shape
    m = b.shape[0]
    out = np.empty((n, m), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            acc = 0
            for k in range(w):
                acc += _POPCOUNT[a[i, k] ^ b[j, k]]
            out[i, j] = acc
    return out


def hamming_matrix_np(a, b):
    xor = a[:, None, :] ^ b[None, :, :]
    return _POPCOUNT[xor].sum(axis=2).astype(np.int64)


hamming_matrix = pick(hamming_matrix_nb, hamming_matrix_np)


# ---------------------------------------------------------------------------
# cyclic Jacobi eigensolver for dense symmetric matrices
#
# Both builds sweep the strict upper triangle row by row and apply two-sided
# rotations; V accumulates the eigenvectors as columns.  Convergence is
# measured by the Frobenius norm of the off-diagonal part relative to the
# Frobenius norm of the input.  Returns (diag, V, sweeps, converged).


@njit
def _offdiag_norm_nb(A):
    n = A.shape[0]
    off = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            off += A[i, j] * A[i, j]
    return np.sqrt(2.0 * off)


@njit
def jacobi_eig_nb(a, tol, max_sweeps):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += A[i, j] * A[i, j]
    fro = np.sqrt(fro)
    threshold = tol * fro if fro > 0.0 else tol
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        if _offdiag_norm_nb(A) <= threshold:
            converged = True
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    if not converged:
        converged = _offdiag_norm_nb(A) <= threshold
    diag = np.empty(n)
    for i in range(n):
        diag[i] = A[i, i]
    return diag, V, sweeps, converged


def jacobi_eig_np(a, tol, max_sweeps):
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n)
    fro = np.sqrt((a * a).sum())
    threshold = tol * fro if fro > 0.0 else tol

    def offdiag(A):
        return np.sqrt(2.0 * (np.triu(A, 1) ** 2).sum())

    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        if offdiag(A) <= threshold:
            converged = True
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    if not converged:
        converged = offdiag(A) <= threshold
    return np.diag(A).copy(), V, sweeps, converged


jacobi_eig = pick(jacobi_eig_nb, jacobi_eig_np)


# ---------------------------------------------------------------------------
# all-sources Dijkstra on a CSR adjacency (undirected graphs are stored with
# both edge directions).  O(V^2) selection per source: fine at k-NN sparsity
# and the point counts this package targets.


@njit
def dijkstra_all_nb(indptr, indices, weights, n):
    dist = np.empty((n, n), dtype=np.float64)
    for src in range(n):
        d = dist[src]
        for i in range(n):
            d[i] = INF
        d[src] = 0.0
        visited = np.zeros(n, dtype=np.bool_)
        for _ in range(n):
            u = -1
            best = INF
            for i in range(n):
                if not visited[i] and d[i] < best:
                    best = d[i]
                    u = i
            if u < 0:
                break
            visited[u] = True
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                nd = d[u] + weights[e]
                if nd < d[v]:
                    d[v] = nd
    return dist


def dijkstra_all_np(indptr, indices, weights, n):
    dist = np.full((n, n), INF)
    for src in range(n):
        d = dist[src]
        d[src] = 0.0
        visited = np.zeros(n, dtype=bool)
        scan = d.copy()
        for _ in range(n):
            u = int(np.argmin(scan))
            if scan[u] == INF:
                break
            visited[u] = True
            scan[u] = INF
            lo, hi = indptr[u], indptr[u + 1]
            nbrs = indices[lo:hi]
            nd = d[u] + weights[lo:hi]
            better = nd < d[nbrs]
            upd = nbrs[better]
            d[upd] = nd[better]
            scan[upd] = np.where(visited[upd], INF, nd[better])
    return dist


dijkstra_all = pick(dijkstra_all_nb, dijkstra_all_np)


# ---------------------------------------------------------------------------
# FAST segment test; returns a response map (0 where the test fails).
# Circle of 16 pixels at radius 3, standard Bresenham order.

CIRCLE_DX = np.array(
    [0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1], dtype=np.int64
)
CIRCLE_DY = np.array(
    [-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3], dtype=np.int64
)


@njit
def fast_response_nb(img, threshold, n_contig):
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            p = img[y, x]
            hi = p + threshold
            lo = p - threshold
            bright_run = 0
            dark_run = 0
            best_bright = 0
            best_dark = 0
            # doubled circle catches wrap-around runs
            for t in range(32):
                idx = t & 15
                v = img[y + CIRCLE_DY[idx], x + CIRCLE_DX[idx]]
                if v > hi:
                    bright_run += 1
                    if bright_run > best_bright:
                        best_bright = bright_run
                else:
                    bright_run = 0
                if v < lo:
                    dark_run += 1
                    if dark_run > best_dark:
                        best_dark = dark_run
                else:
                    dark_run = 0
            if best_bright >= n_contig or best_dark >= n_contig:
                sum_bright = 0.0
                sum_dark = 0.0
                for t in range(16):
                    v = img[y + CIRCLE_DY[t], x + CIRCLE_DX[t]]
                    if v > hi:
                        sum_bright += v - hi
                    elif v < lo:
                        sum_dark += lo - v
                score = sum_bright if sum_bright > sum_dark else sum_dark
                out[y, x] = score
    return out


def fast_response_np(img, threshold, n_contig):
    h, w = img.shape
    if h < 7 or w < 7:
        return np.zeros((h, w), dtype=np.float64)
    inner = img[3 : h - 3, 3 : w - 3]
    ring = np.empty((16,) + inner.shape, dtype=np.float64)
    for t in range(16):
        dy = CIRCLE_DY[t]
        dx = CIRCLE_DX[t]
        ring[t] = img[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx]
    hi = inner + threshold
    lo = inner - threshold
    bright = ring > hi
    dark = ring < lo
    out = np.zeros((h, w), dtype=np.float64)

    def has_run(mask):
        doubled = np.concatenate([mask, mask], axis=0).astype(np.int64)
        csum = np.cumsum(doubled, axis=0)
        pad = np.zeros((1,) + mask.shape[1:], dtype=np.int64)
        csum = np.concatenate([pad, csum], axis=0)
        win = csum[n_contig:] - csum[:-n_contig]
        return (win == n_contig).any(axis=0)

    corner = has_run(bright) | has_run(dark)
    sum_bright = np.where(bright, ring - hi, 0.0).sum(axis=0)
    sum_dark = np.where(dark, lo - ring, 0.0).sum(axis=0)
    score = np.maximum(sum_bright, sum_dark)
    out[3 : h - 3, 3 : w - 3] = np.where(corner, score, 0.0)
    return out


fast_response = pick(fast_response_nb, fast_response_np)


# ---------------------------------------------------------------------------
# t-SNE gradient: student-t low-dim kernel, returns (grad, kl)


@njit
def tsne_grad_nb(y, p):
    n, d = y.shape
    num = np.empty((n, n), dtype=np.float64)
    qsum = 0.0
    for i in range(n):
        num[i, i] = 0.0
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = y[i, k] - y[j, k]
                acc += diff * diff
            v = 1.0 / (1.0 + acc)
            num[i, j] = v
            num[j, i] = v
            qsum += 2.0 * v
    grad = np.zeros((n, d), dtype=np.float64)
    kl = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            pij = p[i, j]
            q = num[i, j] / qsum
            if q < 1e-12:
                q = 1e-12
            if pij > 0.0:
                kl += pij * np.log(pij / q)
            coeff = 4.0 * (pij - q) * num[i, j]
            for k in range(d):
                grad[i, k] += coeff * (y[i, k] - y[j, k])
    return grad, kl


def tsne_grad_np(y, p):
    n = y.shape[0]
    sq = pairwise_sq_np(y, y)
    num = 1.0 / (1.0 + sq)
    np.fill_diagonal(num, 0.0)
    qsum = num.sum()
    q = np.maximum(num / qsum, 1e-12)
    pq = (p - q) * num
    grad = 4.0 * ((np.diag(pq.sum(axis=1)) - pq) @ y)
    mask = p > 0.0
    kl = float((p[mask] * np.log(p[mask] / q[mask])).sum())
    return grad, kl


tsne_grad = pick(tsne_grad_nb, tsne_grad_np)


# ---------------------------------------------------------------------------
# UMAP stochastic-descent epoch.
#
# The per-edge schedule and all random draws are planned outside (see
# reduction.umap) so both builds consume identical inputs and stay
# deterministic; this kernel only applies the sequential updates.


@njit
def umap_epoch_nb(y, head, tail, edge_ids, neg_targets, neg_offsets, a, b, alpha):
    d = y.shape[1]
    for e in range(edge_ids.shape[0]):
        i = head[edge_ids[e]]
        j = tail[edge_ids[e]]
        dist_sq = 0.0
        for k in range(d):
            diff = y[i, k] - y[j, k]
            dist_sq += diff * diff
        if dist_sq > 0.0:
            pd = dist_sq**b
            coeff = (-2.0 * a * b * pd) / (dist_sq * (a * pd + 1.0))
        else:
            coeff = 0.0
        for k in range(d):
            g = coeff * (y[i, k] - y[j, k])
            if g > 4.0:
                g = 4.0
            elif g < -4.0:
                g = -4.0
            y[i, k] += alpha * g
            y[j, k] -= alpha * g
        for t in range(neg_offsets[e], neg_offsets[e + 1]):
            m = neg_targets[t]
            if m == i:
                continue
            dist_sq = 0.0
            for k in range(d):
                diff = y[i, k] - y[m, k]
                dist_sq += diff * diff
            if dist_sq > 0.0:
                pd = dist_sq**b
                coeff = (2.0 * b) / ((0.001 + dist_sq) * (a * pd + 1.0))
            else:
                coeff = 0.0
            for k in range(d):
                if coeff > 0.0:
                    g = coeff * (y[i, k] - y[m, k])
                    if g > 4.0:
                        g = 4.0
                    elif g < -4.0:
                        g = -4.0
                else:
                    g = 4.0
                y[i, k] += alpha * g
    return y


def umap_epoch_np(y, head, tail, edge_ids, neg_targets, neg_offsets, a, b, alpha):
    # Same sequential semantics as the numba build: the updates interact,
    # so this cannot be vectorized without changing the result.
    d = y.shape[1]
    for e in range(edge_ids.shape[0]):
        i = head[edge_ids[e]]
        j = tail[edge_ids[e]]
        yi = y[i]
        yj = y[j]
        diff = yi - yj
        dist_sq = float(diff @ diff)
        if dist_sq > 0.0:
            pd = dist_sq**b
            coeff = (-2.0 * a * b * pd) / (dist_sq * (a * pd + 1.0))
            g = np.clip(coeff * diff, -4.0, 4.0)
        else:
            g = np.zeros(d)
        y[i] = yi + alpha * g
        y[j] = yj - alpha * g
        for t in range(neg_offsets[e], neg_offsets[e + 1]):
            m = neg_targets[t]
            if m == i:
                continue
            yi = y[i]
            diff = yi - y[m]
            dist_sq = float(diff @ diff)
            if dist_sq > 0.0:
                pd = dist_sq**b
                coeff = (2.0 * b) / ((0.001 + dist_sq) * (a * pd + 1.0))
                g = np.clip(coeff * diff, -4.0, 4.0)
            else:
                g = np.full(d, 4.0)
            y[i] = yi + alpha * g
    return y


umap_epoch = pick(umap_epoch_nb, umap_epoch_np)


# ---------------------------------------------------------------------------
# best gini split over a feature subset (random forest inner loop)
#
# Returns (feature_position, threshold, weighted_child_gini, found).  Ties
# resolve to the earlier feature position, then the smaller threshold.


@njit
def best_split_nb(x, y, n_classes):
    n, f = x.shape
    best_feat = -1
    best_thresh = 0.0
    best_score = INF
    for j in range(f):
        order = np.argsort(x[:, j], kind="mergesort")
        left = np.zeros(n_classes, dtype=np.int64)
        right = np.zeros(n_classes, dtype=np.int64)
        for i in range(n):
            right[y[i]] += 1
        for i in range(n - 1):
            c = y[order[i]]
            left[c] += 1
            right[c] -= 1
            vi = x[order[i], j]
            vn = x[order[i + 1], j]
            if vi == vn:
                continue
            nl = i + 1
            nr = n - nl
            sl = 0.0
            sr = 0.0
            for cc in range(n_classes):
                sl += left[cc] * left[cc]
                sr += right[cc] * right[cc]
            gini_l = 1.0 - sl / (nl * nl)
            gini_r = 1.0 - sr / (nr * nr)
            score = (nl * gini_l + nr * gini_r) / n
            if score < best_score:
                best_score = score
                best_feat = j
                best_thresh = 0.5 * (vi + vn)
    return best_feat, best_thresh, best_score, best_feat >= 0


def best_split_np(x, y, n_classes):
    n, f = x.shape
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y] = 1
    totals = onehot.sum(axis=0)
    best_feat = -1
    best_thresh = 0.0
    best_score = INF
    for j in range(f):
        order = np.argsort(x[:, j], kind="stable")
        v = x[order, j]
        cum = np.cumsum(onehot[order], axis=0)[:-1]
        boundaries = v[:-1] < v[1:]
        if not boundaries.any():
            continue
        nl = np.arange(1, n, dtype=np.float64)
        nr = n - nl
        gini_l = 1.0 - (cum.astype(np.float64) ** 2).sum(axis=1) / nl**2
        gini_r = 1.0 - ((totals - cum).astype(np.float64) ** 2).sum(axis=1) / nr**2
        score = (nl * gini_l + nr * gini_r) / n
        score[~boundaries] = INF
        pos = int(np.argmin(score))
        if score[pos] < best_score:
            best_score = float(score[pos])
            best_feat = j
            best_thresh = 0.5 * (v[pos] + v[pos + 1])
    return best_feat, best_thresh, best_score, best_feat >= 0


best_split = pick(best_split_nb, best_split_np)


# Every dual-build kernel pair, for the benchmark and equivalence tests.
KERNEL_PAIRS = {
    "pairwise_sq": (pairwise_sq_nb, pairwise_sq_np),
    "hamming_matrix": (hamming_matrix_nb, hamming_matrix_np),
    "jacobi_eig": (jacobi_eig_nb, jacobi_eig_np),
    "dijkstra_all": (dijkstra_all_nb, dijkstra_all_np),
    "fast_response": (fast_response_nb, fast_response_np),
    "tsne_grad": (tsne_grad_nb, tsne_grad_np),
    "umap_epoch": (umap_epoch_nb, umap_epoch_np),
    "best_split": (best_split_nb, best_split_np),
}
