"""Pure-Python tree builder, used when the compiled extension is unavailable.

Split search is vectorised with numpy per candidate feature; everything that
influences the result (random stream, visiting order, integer class-count
arithmetic, tie-breaking) matches the compiled builder exactly.
"""

import numpy as np

_MASK = (1 << 64) - 1


class SplitMix64:
    """64-bit SplitMix generator; the builder's only source of randomness."""

    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n):
        return self.next() % n


def _best_split_on(values, classes, n_classes, total, sq_parent, min_leaf):
    """Best (score, threshold) for one feature, or None when no split is legal."""
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    vs = values[order]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), classes[order]] = 1
    left = np.cumsum(onehot, axis=0)[:-1]
    right = total[None, :] - left
    n_l = np.arange(1, n, dtype=np.int64)
    n_r = n - n_l
    sq_l = (left * left).sum(axis=1)
    sq_r = (right * right).sum(axis=1)
    valid = (vs[:-1] < vs[1:]) & (n_l >= min_leaf) & (n_r >= min_leaf)
    if not valid.any():
        return None
    score = sq_l / n_l + sq_r / n_r
    score[~valid] = -np.inf
    i = int(np.argmax(score))
    a, b = float(vs[i]), float(vs[i + 1])
    thr = 0.5 * (a + b)
    if thr >= b:
        thr = a
    return float(score[i]), thr


def build_tree(Xt, y, sample, n_classes, mtry, max_depth, min_leaf, seed):
    p = Xt.shape[0]
    m = sample.shape[0]
    cap = 2 * m + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    counts = np.zeros((cap, n_classes), dtype=np.int64)

    idx = np.array(sample, dtype=np.intp)
    feats = list(range(p))
    rng = SplitMix64(seed)
    node_count = 1
    stack = [(0, 0, m, 0)]
    while stack:
        node, start, end, depth = stack.pop()
        n = end - start
        rows = idx[start:end]
        cls = y[rows]
        total = np.bincount(cls, minlength=n_classes).astype(np.int64)
        counts[node] = total
        sq_parent = int((total * total).sum())
        if n < 2 * min_leaf or np.count_nonzero(total) <= 1 or (
            max_depth >= 0 and depth >= max_depth
        ):
            continue

        parent_score = sq_parent / n
        best_score, best_f, best_thr = -1.0, -1, 0.0
        visited = 0
        j = 0
        while j < p and visited < mtry:
            r = j + rng.below(p - j)
            feats[j], feats[r] = feats[r], feats[j]
            f = feats[j]
            j += 1
            values = Xt[f, rows]
            if values.min() == values.max():
                continue
            visited += 1
            found = _best_split_on(values, cls, n_classes, total, sq_parent, min_leaf)
            if found is not None and found[0] > best_score:
                best_score, best_thr = found
                best_f = f

        if best_f < 0 or not (best_score - parent_score > 1e-10 * parent_score):
            continue

        go_left = Xt[best_f, rows] <= best_thr
        n_left = int(go_left.sum())
        idx[start:end] = np.concatenate([rows[go_left], rows[~go_left]])
        mid = start + n_left
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = node_count
        right[node] = node_count + 1
        node_count += 2
        stack.append((right[node], mid, end, depth + 1))
        stack.append((left[node], start, mid, depth + 1))

    return (
        feature[:node_count].copy(),
        threshold[:node_count].copy(),
        left[:node_count].copy(),
        right[:node_count].copy(),
        counts[:node_count].copy(),
    )


def apply_tree(feature, threshold, left, right, X):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        rows = np.nonzero(active)[0]
        cur = node[rows]
        go_left = X[rows, feature[cur]] <= threshold[cur]
        node[rows] = np.where(go_left, left[cur], right[cur])
        active = feature[node] >= 0
    return node
