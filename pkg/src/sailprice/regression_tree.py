"""CART-style regression tree grown best-first under a leaf budget."""

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionMismatch, EmptyInput, SchemaMismatch, UsageError
from .serialize import fmt_float


@dataclass(frozen=True)
class Leaf:
    value: float
    region_id: int = 0


@dataclass(frozen=True)
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class TreeConfig:
    max_leaves: int = 8
    max_depth: int = 4
    min_samples_leaf: int = 5
    # Nodes this small get their root split by one-step lookahead when
    # max_leaves >= 3, which makes three-leaf trees optimal. Costs O(n^2 p^2).
    lookahead_rows: int = 16

    def __post_init__(self):
        for name in ("max_leaves", "max_depth", "min_samples_leaf"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be >= 1")
        if self.lookahead_rows < 0:
            raise UsageError("lookahead_rows must be >= 0")


@dataclass
class _Split:
    gain: float
    feature: int
    threshold: float
    left: np.ndarray
    right: np.ndarray


class _Grower:
    def __init__(self, X, targets, config, l2_leaf):
        self.X = X
        self.t = targets
        self.config = config
        self.n = targets.size
        self.penalty = l2_leaf * self.n
        self.order = [np.argsort(X[:, f], kind="stable") for f in range(X.shape[1])]

    def leaf_value(self, idx):
        if self.penalty == 0.0:
            return float(np.mean(self.t[idx]))
        return float(np.sum(self.t[idx]) / (idx.size + self.penalty))

    def _feature_gains(self, idx, f):
        """Candidate split positions of one feature: (gains, thresholds, sorted members)."""
        mask = np.zeros(self.n, dtype=bool)
        mask[idx] = True
        members = self.order[f][mask[self.order[f]]]
        m = members.size
        msl = self.config.min_samples_leaf
        if m < 2 * msl:
            return None
        x = self.X[members, f]
        t = self.t[members]
        if self.penalty == 0.0:
            # centred sums make constant targets give exactly zero gain
            t = t - t.mean()
        csum = np.cumsum(t)
        total = csum[-1]
        k = np.arange(msl, m - msl + 1)
        k = k[x[k - 1] < x[k]]
        if k.size == 0:
            return None
        left = csum[k - 1]
        right = total - left
        lam = self.penalty
        gains = left * left / (k + lam) + right * right / (m - k + lam) - total * total / (m + lam)
        thresholds = (x[k - 1] + x[k]) / 2.0
        return gains, thresholds, members, k

    def best_split(self, idx):
        best = None
        for f in range(self.X.shape[1]):
            res = self._feature_gains(idx, f)
            if res is None:
                continue
            gains, thresholds, members, k = res
            j = int(np.argmax(gains))
            if best is None or gains[j] > best.gain:
                best = _Split(float(gains[j]), f, float(thresholds[j]),
                              np.sort(members[:k[j]]), np.sort(members[k[j]:]))
        if best is None or not best.gain > 0.0:
            return None
        return best

    def lookahead_split(self, idx, child_depth_ok):
        """Root split maximizing its gain plus the best gain of one further child split."""
        best, best_total = None, 0.0
        for f in range(self.X.shape[1]):
            res = self._feature_gains(idx, f)
            if res is None:
                continue
            gains, thresholds, members, ks = res
            for gain, thr, k in zip(gains, thresholds, ks):
                left, right = np.sort(members[:k]), np.sort(members[k:])
                extra = 0.0
                if child_depth_ok:
                    for child in (left, right):
                        s = self.best_split(child)
                        if s is not None and s.gain > extra:
                            extra = s.gain
                total = gain + extra
                if total > best_total:
                    best_total = total
                    best = _Split(float(gain), f, float(thr), left, right)
        if best is None or not best.gain > 0.0:
            return None
        return best


def fit_tree(X, targets, config: TreeConfig = TreeConfig(), l2_leaf=0.0, _grower=None):
    """Greedy best-first regression tree.

    Repeatedly splits the leaf whose best split most reduces squared error,
    until ``max_leaves`` is reached or no leaf can split (depth, minimum leaf
    size, or zero gain). Thresholds are midpoints between consecutive distinct
    values; a row goes left when ``x <= threshold``. Equal gains resolve to
    the lowest feature index, then the lowest threshold, then the oldest leaf.

    Leaf values are ``sum / (count + l2_leaf * n)``, the plain mean when
    ``l2_leaf`` is 0. Split gains use the same shrunken objective.
    """
    rows = X.rows if hasattr(X, "rows") else np.asarray(X, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    t = np.asarray(targets, dtype=float).ravel()
    if t.size == 0 or rows.shape[0] == 0:
        raise EmptyInput("cannot fit a tree to zero rows")
    if rows.shape[0] != t.size:
        raise DimensionMismatch(f"{rows.shape[0]} rows vs {t.size} targets")
    if not np.all(np.isfinite(t)):
        raise UsageError("targets must be finite")
    g = _grower or _Grower(rows, t, config, l2_leaf)
    if _grower is not None:
        g.t = t
    root = {"idx": np.arange(t.size), "depth": 0}
    leaves = [root]

    def candidate(node, lookahead=False):
        if node["depth"] >= config.max_depth:
            return None
        if lookahead:
            return g.lookahead_split(node["idx"], node["depth"] + 1 < config.max_depth)
        return g.best_split(node["idx"])

    use_lookahead = (config.max_leaves >= 3 and config.max_depth >= 2
                     and 0 < t.size <= config.lookahead_rows)
    root["split"] = candidate(root, lookahead=use_lookahead)
    n_leaves = 1
    while n_leaves < config.max_leaves:
        pick = None
        for node in leaves:
            s = node.get("split")
            if s is not None and (pick is None or s.gain > pick["split"].gain):
                pick = node
        if pick is None:
            break
        s = pick["split"]
        pick["children"] = []
        leaves.remove(pick)
        for idx in (s.left, s.right):
            child = {"idx": idx, "depth": pick["depth"] + 1}
            child["split"] = candidate(child)
            pick["children"].append(child)
            leaves.append(child)
        n_leaves += 1

    counter = [0]

    def build(node):
        if "children" not in node:
            leaf = Leaf(g.leaf_value(node["idx"]), counter[0])
            counter[0] += 1
            return leaf
        s = node["split"]
        return Internal(s.feature, s.threshold, build(node["children"][0]),
                        build(node["children"][1]))

    return build(root)


def predict_tree(tree, row):
    row = np.asarray(row, dtype=float).ravel()
    node = tree
    while isinstance(node, Internal):
        if node.feature_index >= row.size:
            raise DimensionMismatch(f"row of width {row.size} lacks feature {node.feature_index}")
        node = node.left if row[node.feature_index] <= node.threshold else node.right
    return node.value


def _route(tree, rows, idx, out, attr):
    if isinstance(tree, Leaf):
        out[idx] = getattr(tree, attr)
        return
    go_left = rows[idx, tree.feature_index] <= tree.threshold
    _route(tree.left, rows, idx[go_left], out, attr)
    _route(tree.right, rows, idx[~go_left], out, attr)


def max_feature_index(tree):
    if isinstance(tree, Leaf):
        return -1
    return max(tree.feature_index, max_feature_index(tree.left), max_feature_index(tree.right))


def predict_tree_rows(tree, rows):
    """Vectorized ``predict_tree`` over an (n, p) array."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if max_feature_index(tree) >= rows.shape[1]:
        raise DimensionMismatch("rows are narrower than the tree's features")
    out = np.empty(rows.shape[0])
    _route(tree, rows, np.arange(rows.shape[0]), out, "value")
    return out


def leaf_ids(tree, rows):
    rows = np.asarray(rows, dtype=float)
    out = np.empty(rows.shape[0], dtype=int)
    _route(tree, rows, np.arange(rows.shape[0]), out, "region_id")
    return out


def iter_leaves(tree):
    if isinstance(tree, Leaf):
        yield tree
    else:
        yield from iter_leaves(tree.left)
        yield from iter_leaves(tree.right)


def leaf_count(tree):
    return sum(1 for _ in iter_leaves(tree))


def tree_depth(tree):
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def dump_tree(tree):
    """Preorder lines: ``split <feature_index> <threshold>`` or ``leaf <value>``."""
    if isinstance(tree, Leaf):
        return [f"leaf {fmt_float(tree.value)}"]
    return ([f"split {tree.feature_index} {fmt_float(tree.threshold)}"]
            + dump_tree(tree.left) + dump_tree(tree.right))


def load_tree(lines):
    it = iter(lines)
    counter = [0]

    def read():
        try:
            parts = next(it).split()
        except StopIteration:
            raise SchemaMismatch("truncated tree encoding") from None
        if parts[0] == "leaf" and len(parts) == 2:
            leaf = Leaf(float(parts[1]), counter[0])
            counter[0] += 1
            return leaf
        if parts[0] == "split" and len(parts) == 3:
            feature, threshold = int(parts[1]), float(parts[2])
            left = read()
            return Internal(feature, threshold, left, read())
        raise SchemaMismatch(f"bad tree line: {' '.join(parts)!r}")

    tree = read()
    rest = list(it)
    if any(line.strip() for line in rest):
        raise SchemaMismatch("trailing lines after tree encoding")
    return tree
