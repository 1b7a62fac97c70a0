"""Exact inference over head scores and label sequences.

Pure numpy/python, no gradient tracking: projective maximum spanning tree
decoding (Eisner's O(n^3) span dynamic program), linear-chain Viterbi,
thresholded semantic-graph decoding, and the BMES/BIO span codecs with
their documented repair rules. All tie-breaking is deterministic: the
lowest index wins, so repeated decodes are byte-stable.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError


def eisner(scores: np.ndarray, single_root: bool = False) -> list[int]:
    """Maximum-score projective dependency tree over ``scores[h][d]``.

    ``scores`` is (n+1)x(n+1) with position 0 the virtual root. Returns
    ``heads`` of length n where ``heads[d-1]`` is the head of word d.
    Ties prefer the smaller split/head index. With ``single_root`` the
    virtual root takes exactly one dependent.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1]:
        raise ContractError(f"scores must be square, got {scores.shape}")
    n = scores.shape[0] - 1
    if n < 1:
        raise ContractError("eisner needs at least one word")
    if not np.isfinite(scores).all():
        raise ContractError("eisner requires finite scores")

    N = n + 1
    icomp_r = np.full((N, N), -np.inf)  # arc s -> t
    icomp_l = np.full((N, N), -np.inf)  # arc t -> s
    comp_r = np.zeros((N, N))           # head s covers s..t
    comp_l = np.zeros((N, N))           # head t covers s..t
    b_ir = np.zeros((N, N), dtype=int)
    b_il = np.zeros((N, N), dtype=int)
    b_cr = np.zeros((N, N), dtype=int)
    b_cl = np.zeros((N, N), dtype=int)

    for length in range(1, N):
        for s in range(0, N - length):
            t = s + length
            # attach: both incomplete items share the same split of s..t
            vals = comp_r[s, s:t] + comp_l[s + 1:t + 1, t]
            r = int(np.argmax(vals))
            icomp_r[s, t] = vals[r] + scores[s, t]
            icomp_l[s, t] = vals[r] + scores[t, s]
            b_ir[s, t] = b_il[s, t] = s + r
            # complete rightward: s keeps collecting dependents
            vals = icomp_r[s, s + 1:t + 1] + comp_r[s + 1:t + 1, t]
            r = int(np.argmax(vals))
            comp_r[s, t] = vals[r]
            b_cr[s, t] = s + 1 + r
            # complete leftward: t keeps collecting dependents
            vals = comp_l[s, s:t] + icomp_l[s:t, t]
            r = int(np.argmax(vals))
            comp_l[s, t] = vals[r]
            b_cl[s, t] = s + r

    heads = [0] * N

    def walk_incomplete(s, t, right):
        if right:
            heads[t] = s
        else:
            heads[s] = t
        r = b_ir[s, t] if right else b_il[s, t]
        walk_complete(s, r, True)
        walk_complete(r + 1, t, False)

    def walk_complete(s, t, right):
        if s == t:
            return
        if right:
            r = b_cr[s, t]
            walk_incomplete(s, r, True)
            walk_complete(r, t, True)
        else:
            r = b_cl[s, t]
            walk_complete(s, r, False)
            walk_incomplete(r, t, False)

    if single_root:
        totals = [comp_l[1, r] + comp_r[r, n] + scores[0, r] for r in range(1, N)]
        root = 1 + int(np.argmax(totals))
        heads[root] = 0
        walk_complete(1, root, False)
        walk_complete(root, n, True)
    else:
        walk_complete(0, n, True)
    return [int(h) for h in heads[1:]]


def tree_violations(heads: list[int], single_root: bool = False) -> list[str]:
    """Structural problems with a head array; empty list means a valid tree."""
    n = len(heads)
    problems = []
    for d, h in enumerate(heads, start=1):
        if not 0 <= h <= n:
            problems.append(f"head of word {d} out of range: {h}")
        if h == d:
            problems.append(f"word {d} is its own head")
    if problems:
        return problems
    for d in range(1, n + 1):
        seen = set()
        node = d
        while node != 0:
            if node in seen:
                problems.append(f"cycle through word {d}")
                break
            seen.add(node)
            node = heads[node - 1]
    arcs = [(min(h, d), max(h, d)) for d, h in enumerate(heads, start=1)]
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            (l1, r1), (l2, r2) = arcs[i], arcs[j]
            if l1 < l2 < r1 < r2 or l2 < l1 < r2 < r1:
                problems.append(f"crossing arcs {arcs[i]} and {arcs[j]}")
    if single_root:
        roots = sum(1 for h in heads if h == 0)
        if roots != 1:
            problems.append(f"expected exactly one root child, found {roots}")
    return problems


def assign_labels(heads: list[int], label_scores: np.ndarray) -> list[int]:
    """Argmax relation per arc from an (L, n+1, n+1) score stack; tie -> lowest index."""
    label_scores = np.asarray(label_scores, dtype=np.float64)
    return [int(np.argmax(label_scores[:, h, d])) for d, h in enumerate(heads, start=1)]


def viterbi(emissions: np.ndarray, transitions: np.ndarray,
            start: np.ndarray, end: np.ndarray) -> list[int]:
    """Best label sequence under emissions + transitions + boundary scores.

    Ties resolve to the lowest label index at every decision, which yields
    a deterministic (lexicographically smallest under backpointing) path.
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    if emissions.ndim != 2 or emissions.shape[0] < 1:
        raise ContractError(f"emissions must be (n, L) with n >= 1, got {emissions.shape}")
    n, L = emissions.shape
    delta = start + emissions[0]
    backptr = np.zeros((n, L), dtype=int)
    for t in range(1, n):
        cand = delta[:, None] + transitions  # [from, to]
        backptr[t] = np.argmax(cand, axis=0)
        delta = cand[backptr[t], np.arange(L)] + emissions[t]
    best = int(np.argmax(delta + end))
    path = [best]
    for t in range(n - 1, 0, -1):
        path.append(int(backptr[t, path[-1]]))
    return path[::-1]


def sequence_score(labels: list[int], emissions: np.ndarray, transitions: np.ndarray,
                   start: np.ndarray, end: np.ndarray) -> float:
    """Unnormalized chain score of one label sequence."""
    total = float(start[labels[0]]) + float(end[labels[-1]])
    for t, y in enumerate(labels):
        total += float(emissions[t, y])
        if t > 0:
            total += float(transitions[labels[t - 1], y])
    return total


def sdp_decode(probs: np.ndarray, label_scores: np.ndarray | None = None
               ) -> list[tuple[int, int, int, float]]:
    """Semantic graph from edge probabilities: keep cells strictly above 0.5.

    A dependent left headless by the threshold attaches to its highest
    probability head instead (tie -> lowest head index), a deliberate
    deviation from the bare threshold rule so every word stays reachable.
    Returns (head, dependent, relation index, probability) tuples.
    """
    probs = np.asarray(probs, dtype=np.float64)
    n = probs.shape[0] - 1
    edges = []
    for d in range(1, n + 1):
        col = probs[:, d].copy()
        col[d] = -1.0  # no self-loops
        heads = [h for h in range(n + 1) if h != d and col[h] > 0.5]
        if not heads:
            heads = [int(np.argmax(col))]
        for h in heads:
            rel = 0
            if label_scores is not None:
                rel = int(np.argmax(label_scores[:, h, d]))
            edges.append((h, d, rel, float(probs[h, d])))
    return edges


# -- span codecs -------------------------------------------------------------

BMES = ("B", "M", "E", "S")


def bmes_to_spans(labels: list[str]) -> list[tuple[int, int]]:
    """Decode BMES character tags into half-open word spans.

    Repairs rather than fails: an M or E with no open word starts one,
    and a run left open at the end of the sequence is closed there.
    """
    spans: list[tuple[int, int]] = []
    open_start = None

    def close(at):
        nonlocal open_start
        if open_start is not None:
            spans.append((open_start, at))
            open_start = None

    for i, lab in enumerate(labels):
        if lab == "S":
            close(i)
            spans.append((i, i + 1))
        elif lab == "B":
            close(i)
            open_start = i
        elif lab == "M":
            if open_start is None:
                open_start = i
        elif lab == "E":
            if open_start is None:
                open_start = i
            spans.append((open_start, i + 1))
            open_start = None
        else:
            raise ContractError(f"not a BMES label: {lab!r}")
    close(len(labels))
    return spans


def spans_to_bmes(spans: list[tuple[int, int]]) -> list[str]:
    labels = []
    for start, end in spans:
        if end - start == 1:
            labels.append("S")
        else:
            labels.extend(["B"] + ["M"] * (end - start - 2) + ["E"])
    return labels


def bio_to_entities(labels: list[str]) -> list[tuple[int, int, str]]:
    """Decode BIO tags into (start, end, type) spans.

    An I-T with no matching open entity starts one (documented repair).
    """
    entities: list[tuple[int, int, str]] = []
    open_start = None
    open_type = None

    def close(at):
        nonlocal open_start, open_type
        if open_start is not None:
            entities.append((open_start, at, open_type))
            open_start = open_type = None

    for i, lab in enumerate(labels):
        if lab == "O":
            close(i)
        elif lab.startswith("B-"):
            close(i)
            open_start, open_type = i, lab[2:]
        elif lab.startswith("I-"):
            kind = lab[2:]
            if open_type != kind:
                close(i)
                open_start, open_type = i, kind
        else:
            raise ContractError(f"not a BIO label: {lab!r}")
    close(len(labels))
    return entities


def entities_to_bio(entities: list[tuple[int, int, str]], length: int) -> list[str]:
    labels = ["O"] * length
    for start, end, kind in entities:
        labels[start] = f"B-{kind}"
        for i in range(start + 1, end):
            labels[i] = f"I-{kind}"
    return labels
