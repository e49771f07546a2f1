"""Pure-Python reference kernels.

Each routine mirrors the compiled implementation operation-for-operation so
the two backends agree (bit-for-bit for the forest, to float rounding for
the iterative routines). These run one to two orders of magnitude slower
than the compiled core; `benchmarks/bench_kernels.py` quantifies the gap.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


def splitmix_next(state: int) -> tuple[int, int]:
    """One step of splitmix64; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return state, z


# ---------------------------------------------------------------------------
# CART tree growing (weighted Gini, per-node feature subsampling)
# ---------------------------------------------------------------------------

def grow_tree(X, y, sample_idx, w_pos, w_neg, max_depth, min_leaf, mtry, seed):
    """Grow one CART tree on the bootstrap rows `sample_idx`.

    Splits minimize the class-weighted child Gini sum; candidate thresholds
    are midpoints between distinct sorted values; the partition rule is
    `x <= threshold` goes left. Feature subsets per node come from an
    in-kernel splitmix64 stream so tree growth is a pure function of
    (X, y, sample_idx, params, seed).

    Returns a dict of node arrays plus the per-feature raw impurity
    decrease for this tree.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int8)
    rows = np.array(sample_idx, dtype=np.int64)
    n_rows = len(rows)
    n_feat = X.shape[1]
    if n_rows == 0:
        raise ValueError("empty bootstrap sample")
    cap = 2 * n_rows + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    value = np.zeros(cap, dtype=np.float64)
    importance = np.zeros(n_feat, dtype=np.float64)
    feat_perm = np.arange(n_feat, dtype=np.int64)
    state = int(seed) & _MASK

    n_nodes = 0
    # stack entries: (lo, hi, depth, parent, is_left)
    stack = [(0, n_rows, 0, -1, False)]
    while stack:
        lo, hi, depth, parent, is_left = stack.pop()
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node
        seg = rows[lo:hi]
        yseg = y[seg]
        npos = int(np.count_nonzero(yseg))
        nneg = (hi - lo) - npos
        a = w_pos * npos
        b = w_neg * nneg
        t = a + b
        value[node] = a / t
        if (
            depth >= max_depth
            or npos == 0
            or nneg == 0
            or (hi - lo) < 2 * min_leaf
        ):
            continue
        g_node = ((2.0 * a) * b) / (t * t)

        best_score = math.inf
        best_feat = -1
        best_thr = 0.0
        for pick in range(mtry):
            state, z = splitmix_next(state)
            j = pick + (z % (n_feat - pick))
            feat_perm[pick], feat_perm[j] = feat_perm[j], feat_perm[pick]
            f = int(feat_perm[pick])
            vals = X[seg, f]
            order = np.argsort(vals, kind="quicksort")
            sv = vals[order]
            sy = yseg[order].astype(np.int64)
            bounds = np.flatnonzero(sv[1:] != sv[:-1]) + 1
            if len(bounds) == 0:
                continue
            valid = (bounds >= min_leaf) & ((hi - lo) - bounds >= min_leaf)
            bounds = bounds[valid]
            if len(bounds) == 0:
                continue
            cpos = np.cumsum(sy)
            lp = cpos[bounds - 1].astype(np.float64)
            ln_ = bounds.astype(np.float64) - lp
            al = w_pos * lp
            bl = w_neg * ln_
            tl = al + bl
            ar = a - al
            br = b - bl
            tr = ar + br
            gl = ((2.0 * al) * bl) / (tl * tl)
            gr = ((2.0 * ar) * br) / (tr * tr)
            score = tl * gl + tr * gr
            k = int(np.argmin(score))
            if score[k] < best_score:
                best_score = float(score[k])
                best_feat = f
                best_thr = (sv[bounds[k] - 1] + sv[bounds[k]]) / 2.0
        if best_feat < 0:
            continue
        vals = X[seg, best_feat]
        mask = vals <= best_thr
        nl = int(np.count_nonzero(mask))
        if nl == 0 or nl == (hi - lo):
            continue  # degenerate threshold; keep as leaf
        rows[lo:hi] = np.concatenate([seg[mask], seg[~mask]])
        feature[node] = best_feat
        threshold[node] = best_thr
        importance[best_feat] += t * g_node - best_score
        # push right first so the left child is materialized next (preorder)
        stack.append((lo + nl, hi, depth + 1, node, False))
        stack.append((lo, lo + nl, depth + 1, node, True))

    return {
        "feature": feature[:n_nodes].copy(),
        "threshold": threshold[:n_nodes].copy(),
        "left": left[:n_nodes].copy(),
        "right": right[:n_nodes].copy(),
        "value": value[:n_nodes].copy(),
        "importance": importance,
    }


def predict_forest(trees, X):
    """Mean leaf value over trees for each row of X (values in [0, 1])."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    total = np.zeros(len(X), dtype=np.float64)
    for tr in trees:
        feature = tr["feature"]
        threshold = tr["threshold"]
        left = tr["left"]
        right = tr["right"]
        value = tr["value"]
        node = np.zeros(len(X), dtype=np.int64)
        active = np.flatnonzero(feature[node] >= 0)
        while len(active):
            cur = node[active]
            f = feature[cur].astype(np.int64)
            go_left = X[active, f] <= threshold[cur]
            node[active] = np.where(go_left, left[cur], right[cur])
            active = active[feature[node[active]] >= 0]
        total += value[node]
    return total / len(trees)


# ---------------------------------------------------------------------------
# Skip-gram with negative sampling over a fixed walk corpus
# ---------------------------------------------------------------------------

def _sigmoid(z: float) -> float:
    if z > 35.0:
        z = 35.0
    elif z < -35.0:
        z = -35.0
    return 1.0 / (1.0 + math.exp(-z))


def train_skipgram(emb_in, emb_out, walks, window, negatives, neg_table,
                   lr0, lr_min, epochs, seed):
    """Sequential SGD over (center, context) pairs; trains emb_in/emb_out
    in place and returns the per-epoch mean loss."""
    walks = np.asarray(walks, dtype=np.int64)
    neg_table = np.asarray(neg_table, dtype=np.int64)
    tab_size = len(neg_table)
    n_walks, walk_len = walks.shape
    total_centers = max(1, epochs * n_walks * walk_len)
    state = int(seed) & _MASK
    processed = 0
    losses = []
    for _epoch in range(epochs):
        loss_sum = 0.0
        loss_cnt = 0
        for w in range(n_walks):
            walk = walks[w]
            for tpos in range(walk_len):
                lr = lr0 * (1.0 - processed / total_centers)
                if lr < lr_min:
                    lr = lr_min
                processed += 1
                c = int(walk[tpos])
                u = emb_in[c]
                lo_ctx = max(0, tpos - window)
                hi_ctx = min(walk_len - 1, tpos + window)
                for opos in range(lo_ctx, hi_ctx + 1):
                    if opos == tpos:
                        continue
                    o = int(walk[opos])
                    grad_u = np.zeros_like(u)
                    z = float(u @ emb_out[o])
                    p = _sigmoid(z)
                    loss_sum += -math.log(max(p, 1e-12))
                    g = (p - 1.0) * lr
                    grad_u += g * emb_out[o]
                    emb_out[o] -= g * u
                    for _k in range(negatives):
                        state, rz = splitmix_next(state)
                        nid = int(neg_table[rz % tab_size])
                        if nid == o:
                            continue
                        z = float(u @ emb_out[nid])
                        p = _sigmoid(z)
                        loss_sum += -math.log(max(1.0 - p, 1e-12))
                        g = p * lr
                        grad_u += g * emb_out[nid]
                        emb_out[nid] -= g * u
                    u -= grad_u
                    loss_cnt += 1
        losses.append(loss_sum / max(1, loss_cnt))
    return losses


# ---------------------------------------------------------------------------
# Shortest-path betweenness (Brandes) and Newman load, unweighted
# ---------------------------------------------------------------------------

def betweenness_and_load(indptr, indices, n):
    """Returns (betweenness, load), both normalized by (n-1)(n-2).

    Betweenness follows Brandes' dependency accumulation; load follows
    Newman's equal-split propagation from farthest nodes toward the source.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    bc = np.zeros(n, dtype=np.float64)
    load = np.zeros(n, dtype=np.float64)
    if n < 3:
        return bc, load
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    carry = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    pred_ptr = np.empty(n + 1, dtype=np.int64)
    pred_buf = np.empty(indices.shape[0], dtype=np.int64)
    pred_cnt = np.empty(n, dtype=np.int64)

    for s in range(n):
        dist.fill(-1)
        sigma.fill(0.0)
        pred_cnt.fill(0)
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail = 0, 1
        # first BFS pass: distances, path counts, predecessor counts
        while head < tail:
            v = order[head]
            head += 1
            for ei in range(indptr[v], indptr[v + 1]):
                wnode = indices[ei]
                if dist[wnode] < 0:
                    dist[wnode] = dist[v] + 1
                    order[tail] = wnode
                    tail += 1
                if dist[wnode] == dist[v] + 1:
                    sigma[wnode] += sigma[v]
                    pred_cnt[wnode] += 1
        pred_ptr[0] = 0
        for v in range(n):
            pred_ptr[v + 1] = pred_ptr[v] + pred_cnt[v]
        fill = pred_ptr[:n].copy()
        for qi in range(tail):
            v = order[qi]
            for ei in range(indptr[v], indptr[v + 1]):
                wnode = indices[ei]
                if dist[wnode] == dist[v] + 1:
                    pred_buf[fill[wnode]] = v
                    fill[wnode] += 1
        delta.fill(0.0)
        carry.fill(1.0)
        for qi in range(tail - 1, -1, -1):
            wnode = order[qi]
            if wnode == s:
                continue
            npred = pred_cnt[wnode]
            share = carry[wnode] / npred
            coeff = (1.0 + delta[wnode]) / sigma[wnode]
            for pi in range(pred_ptr[wnode], pred_ptr[wnode] + npred):
                v = pred_buf[pi]
                delta[v] += sigma[v] * coeff
                if v != s:
                    carry[v] += share
            bc[wnode] += delta[wnode]
            load[wnode] += carry[wnode] - 1.0
    scale = 1.0 / ((n - 1) * (n - 2))
    return bc * scale, load * scale


# ---------------------------------------------------------------------------
# Block-model local-move sweep (shared by SBM and DC-SBM MDL fitting)
# ---------------------------------------------------------------------------

def _lbinom(a: float, b: float) -> float:
    # ln C(a, b); relies on valid 0 <= b <= a from integer block stats
    return math.lgamma(a + 1.0) - math.lgamma(b + 1.0) - math.lgamma(a - b + 1.0)


def _pair_term_sbm(nr, ns, mrs, same):
    if same:
        slots = nr * (nr - 1) // 2
    else:
        slots = nr * ns
    return _lbinom(slots, mrs) + math.log(slots + 1.0)


def _pair_term_dc(dr, ds, mrs, same):
    if mrs == 0:
        return 0.0
    if same:
        e = 2.0 * mrs
        return -mrs * math.log(e / (float(dr) * float(dr)))
    return -mrs * math.log(mrs / (float(dr) * float(ds)))


def _move_delta(variant_dc, k, n_r, d_r, m_rs, e_i, di, r, s):
    """Description-length delta for moving one node (stats e_i, degree di)
    from block r to block s. Sums only the affected pair terms."""
    delta = 0.0
    nr_new = n_r[r] - 1
    ns_new = n_r[s] + 1
    dr_new = d_r[r] - di
    ds_new = d_r[s] + di
    eir = e_i[r]
    eis = e_i[s]
    for t in range(k):
        if t == r or t == s:
            continue
        if variant_dc:
            if m_rs[r, t] or e_i[t]:
                delta += _pair_term_dc(dr_new, d_r[t], m_rs[r, t] - e_i[t], False) \
                    - _pair_term_dc(d_r[r], d_r[t], m_rs[r, t], False)
            if m_rs[s, t] or e_i[t]:
                delta += _pair_term_dc(ds_new, d_r[t], m_rs[s, t] + e_i[t], False) \
                    - _pair_term_dc(d_r[s], d_r[t], m_rs[s, t], False)
        else:
            delta += _pair_term_sbm(nr_new, n_r[t], m_rs[r, t] - e_i[t], False) \
                - _pair_term_sbm(n_r[r], n_r[t], m_rs[r, t], False)
            delta += _pair_term_sbm(ns_new, n_r[t], m_rs[s, t] + e_i[t], False) \
                - _pair_term_sbm(n_r[s], n_r[t], m_rs[s, t], False)
    mrr_new = m_rs[r, r] - eir
    mss_new = m_rs[s, s] + eis
    mrs_new = m_rs[r, s] + eir - eis
    if variant_dc:
        delta += _pair_term_dc(dr_new, dr_new, mrr_new, True) - _pair_term_dc(d_r[r], d_r[r], m_rs[r, r], True)
        delta += _pair_term_dc(ds_new, ds_new, mss_new, True) - _pair_term_dc(d_r[s], d_r[s], m_rs[s, s], True)
        delta += _pair_term_dc(dr_new, ds_new, mrs_new, False) - _pair_term_dc(d_r[r], d_r[s], m_rs[r, s], False)
    else:
        delta += _pair_term_sbm(nr_new, nr_new, mrr_new, True) - _pair_term_sbm(n_r[r], n_r[r], m_rs[r, r], True)
        delta += _pair_term_sbm(ns_new, ns_new, mss_new, True) - _pair_term_sbm(n_r[s], n_r[s], m_rs[s, s], True)
        delta += _pair_term_sbm(nr_new, ns_new, mrs_new, False) - _pair_term_sbm(n_r[r], n_r[s], m_rs[r, s], False)
    return delta


def sbm_sweep(indptr, indices, degrees, assign, n_r, d_r, m_rs, order, variant_dc):
    """One pass of single-node moves in `order`; accepts strictly improving
    moves (ties toward the lower block index). Mutates assign/n_r/d_r/m_rs.

    Candidate target blocks are those adjacent to the node. Moves that would
    empty a block are skipped (merging is the caller's job). Returns
    (accepted_moves, total_delta).
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    k = len(n_r)
    moves = 0
    total = 0.0
    e_i = np.zeros(k, dtype=np.int64)
    for i in order:
        i = int(i)
        r = int(assign[i])
        if n_r[r] <= 1:
            continue
        nbrs = indices[indptr[i]:indptr[i + 1]]
        e_i.fill(0)
        for nb in nbrs:
            e_i[assign[nb]] += 1
        di = int(degrees[i])
        best_delta = -1e-9
        best_s = -1
        for s in range(k):
            if s == r or e_i[s] == 0:
                continue
            d = _move_delta(variant_dc, k, n_r, d_r, m_rs, e_i, di, r, s)
            if d < best_delta:
                best_delta = d
                best_s = s
        if best_s < 0:
            continue
        s = best_s
        assign[i] = s
        n_r[r] -= 1
        n_r[s] += 1
        d_r[r] -= di
        d_r[s] += di
        for t in range(k):
            if e_i[t] == 0:
                continue
            if t == r:
                m_rs[r, r] -= e_i[r]
                m_rs[r, s] += e_i[r]
                m_rs[s, r] = m_rs[r, s]
            elif t == s:
                m_rs[s, s] += e_i[s]
                m_rs[r, s] -= e_i[s]
                m_rs[s, r] = m_rs[r, s]
            else:
                m_rs[r, t] -= e_i[t]
                m_rs[t, r] = m_rs[r, t]
                m_rs[s, t] += e_i[t]
                m_rs[t, s] = m_rs[s, t]
        moves += 1
        total += best_delta
    return moves, total
