"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
report. The distillation regression (criterion 6) trains six teachers and
a student on the bundled corpus and takes a few minutes of CPU.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from hanpipe import decoders, toydata
from hanpipe.autodiff import Tensor
from hanpipe.config import load_config
from hanpipe.data import format_corpus
from hanpipe.heads import CrfParams, crf_log_likelihood
from hanpipe.losses import arc_loss, chain_loss, edge_loss, tag_loss
from hanpipe.tasks import ADAPTERS
from hanpipe.trainer import (
    DistillationSchedule,
    TaskDataset,
    build_shared_vocab,
    load_task_datasets,
    sample_task,
    sampling_probabilities,
    train,
    train_metrics,
)
from hanpipe.vocabulary import build_vocab
from oracles import chain_score, enumerate_chains, enumerate_projective_heads, tree_score

REPO = Path(__file__).resolve().parent.parent
ALL_TASKS = ("cws", "pos", "ner", "dep", "sdp", "srl")


def report(n, text):
    print(f"\nACCEPTANCE {n} PASS: {text}")


def test_criterion_1_eisner_matches_enumeration():
    started = time.time()
    rng = np.random.default_rng(101)
    checked = 0
    for n in range(1, 9):
        table = enumerate_projective_heads(n)
        positions = np.arange(1, n + 1)
        for _ in range(200):
            scores = rng.uniform(-10.0, 10.0, size=(n + 1, n + 1))
            totals = scores[table, positions].sum(axis=1)
            best_tree = table[int(np.argmax(totals))]
            decoded = decoders.eisner(scores)
            # exactly-rounded sums make the equality independent of term order
            assert math.fsum(scores[decoded, positions]) == math.fsum(
                scores[best_tree, positions])
            checked += 1
    elapsed = time.time() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    report(1, f"eisner equals exhaustive enumeration on {checked} matrices "
              f"(n<=8) in {elapsed:.1f}s")


def test_criterion_2_crf_forward_viterbi_and_normalization():
    rng = np.random.default_rng(202)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        L = int(rng.integers(2, 5))
        crf = CrfParams(L)
        crf.params["trans"].data[...] = rng.uniform(-3, 3, size=(L, L))
        crf.params["start"].data[...] = rng.uniform(-3, 3, size=L)
        crf.params["end"].data[...] = rng.uniform(-3, 3, size=L)
        em = rng.uniform(-3, 3, size=(n, L))
        trans, start, end = crf.values()

        gold = [int(g) for g in rng.integers(0, L, size=n)]
        log_p = crf_log_likelihood(Tensor(em), crf, gold).item()
        log_z_impl = chain_score(gold, em, trans, start, end) - log_p

        scores = np.array([s for _, s in enumerate_chains(em, trans, start, end)])
        m = scores.max()
        log_z_oracle = m + math.log(np.exp(scores - m).sum())
        assert abs(log_z_impl - log_z_oracle) < 1e-8

        path = decoders.viterbi(em, trans, start, end)
        assert chain_score(path, em, trans, start, end) == float(scores.max())

        total_mass = float(np.exp(scores - log_z_impl).sum())
        assert abs(total_mass - 1.0) < 1e-8
        checked += 1
    report(2, f"CRF forward/viterbi/normalization verified against enumeration "
              f"on {checked} random chains (n<=6, L<=4)")


def _build_acceptance_model():
    sents = toydata.generate(16, seed=71)
    from hanpipe.config import config_from_dict

    config = config_from_dict({
        "seed": 23,
        "encoder": {"width": 16, "layers": 2, "heads": 2, "max_len": 64, "ffn_width": 32,
                    "dropout": 0.1},
        "train": {"teacher_epochs": 1, "student_steps": 10, "log_every": 100},
        "tasks": {},
    })
    datasets = {t: TaskDataset(task=t, sentences=sents,
                               labels=ADAPTERS[t].labels_from_corpus(sents))
                for t in ALL_TASKS}
    vocab = build_vocab([s.text for s in sents])
    model, _ = train(config, datasets, vocab, mode="student", total_steps=10)
    return model, datasets


def test_criterion_3_gradient_integrity_every_head():
    model, datasets = _build_acceptance_model()
    rng = np.random.default_rng(303)
    eps, rtol = 1e-4, 1e-4
    params = model.parameters()
    encoder_names = [k for k in params if k.startswith("encoder.")]
    checked = {}
    for task in ALL_TASKS:
        sent = datasets[task].sentences[0]
        target = datasets[task].targets[0]
        head_names = [k for k in params if k.startswith(f"{task}.")]
        if len(head_names) > 4:
            head_picks = [head_names[i]
                          for i in rng.choice(len(head_names), size=4, replace=False)]
        else:
            head_picks = head_names
        picks = list(head_picks)
        while len(picks) < 5:  # pad with distinct shared-encoder weights
            name = encoder_names[rng.integers(len(encoder_names))]
            if name not in picks:
                picks.append(name)

        def loss_value():
            return ADAPTERS[task].loss(model, sent, target).item()

        for p in params.values():
            p.zero_grad()
        loss = ADAPTERS[task].loss(model, sent, target)
        loss.backward()
        grads = {name: (params[name].grad.copy() if params[name].grad is not None else None)
                 for name in picks}
        for name in picks:
            tensor = params[name]
            flat_index = int(rng.integers(tensor.data.size))
            idx = np.unravel_index(flat_index, tensor.data.shape)
            orig = tensor.data[idx]
            tensor.data[idx] = orig + eps
            hi = loss_value()
            tensor.data[idx] = orig - eps
            lo = loss_value()
            tensor.data[idx] = orig
            fd = (hi - lo) / (2 * eps)
            got = 0.0 if grads[name] is None else float(grads[name][idx])
            denom = max(abs(fd), abs(got), 1e-3)
            assert abs(got - fd) / denom < rtol, (
                f"{task} {name}{idx}: grad {got} vs fd {fd}")
        for p in params.values():
            p.zero_grad()
        checked[task] = len(picks)
    report(3, "finite differences (eps=1e-4, rtol=1e-4) confirm gradients for "
              f"5 parameters per head (incl. one encoder weight): {checked}")


def test_criterion_4_sampling_law_100k_draws():
    datasets = []
    for name, size in (("a", 10000), ("b", 1000), ("c", 100)):
        ds = TaskDataset.__new__(TaskDataset)
        ds.task, ds.sentences, ds.labels, ds.targets = name, [None] * size, [], [None] * size
        datasets.append(ds)
    expected = sampling_probabilities(datasets)
    rng = np.random.default_rng(404)
    counts = np.zeros(3)
    draws = 100_000
    for _ in range(draws):
        counts[sample_task(datasets, rng)] += 1
    freqs = counts / draws
    assert np.all(np.abs(freqs - expected) < 0.01), f"{freqs} vs {expected}"
    report(4, f"empirical frequencies {np.round(freqs, 4).tolist()} match "
              f"|D|^0.75 probabilities {np.round(expected, 4).tolist()} within 1% "
              f"over {draws} draws")


def test_criterion_5_teacher_annealing_contract():
    total = 997
    schedule = DistillationSchedule(total_steps=total)
    for step in range(total + 1):
        schedule.current_step = step
        assert abs(schedule.lambda_at() - step / total) < 1e-12
    assert DistillationSchedule(total).lambda_at() == 0.0
    schedule.current_step = total
    assert schedule.lambda_at() == 1.0

    rng = np.random.default_rng(505)
    logits = Tensor(rng.normal(size=(6, 5)))
    teacher = rng.normal(size=(6, 5))
    gold = [int(g) for g in rng.integers(0, 5, size=6)]
    gold_ce = tag_loss(logits, gold).item()
    assert abs(tag_loss(logits, gold, teacher, 1.0).item() - gold_ce) < 1e-12
    probs = np.exp(teacher) / np.exp(teacher).sum(axis=1, keepdims=True)
    logp = logits.data - np.log(np.exp(logits.data).sum(axis=1, keepdims=True))
    teacher_ce = -(probs * logp).sum() / 6
    assert abs(tag_loss(logits, gold, teacher, 0.0).item() - teacher_ce) < 1e-12

    scores = Tensor(rng.normal(size=(5, 5)))
    t_scores = rng.normal(size=(5, 5))
    heads = [0, 1, 2, 0]
    assert abs(arc_loss(scores, heads, t_scores, 1.0).item()
               - arc_loss(scores, heads).item()) < 1e-12
    gold_m = (rng.random((4, 4)) > 0.5).astype(float)
    mask = np.ones((4, 4))
    s = Tensor(rng.normal(size=(4, 4)))
    t = rng.normal(size=(4, 4))
    assert abs(edge_loss(s, gold_m, mask, t, 1.0).item()
               - edge_loss(s, gold_m, mask).item()) < 1e-12
    crf = CrfParams(3, np.random.default_rng(1))
    ems = [Tensor(rng.normal(size=(3, 3))) for _ in range(3)]
    chains = [[0, 1, 2], [2, 1, 0], [1, 1, 1]]
    t_ems = [rng.normal(size=(3, 3)) for _ in range(3)]
    assert abs(chain_loss(ems, crf, chains, t_ems, 1.0).item()
               - chain_loss(ems, crf, chains).item()) < 1e-12
    report(5, "lambda(0)=0, lambda(T)=1, linear within 1e-12; every distillation "
              "loss collapses to gold CE at lambda=1 and teacher CE at lambda=0 "
              "within 1e-12")


def test_criterion_6_distilled_student_vs_teachers():
    started = time.time()
    config = load_config(REPO / "configs" / "toy.json")
    datasets = load_task_datasets(config)
    assert list(datasets) == list(ALL_TASKS)
    vocab = build_shared_vocab(config, datasets)

    teachers, teacher_scores = {}, {}
    for task in datasets:
        teacher, _ = train(config, {task: datasets[task]}, vocab, mode="teacher")
        teachers[task] = teacher
        teacher_scores[task] = train_metrics(teacher, {task: datasets[task]})[task]["headline"]

    student, _ = train(config, datasets, vocab, teachers=teachers, mode="student")
    student_scores = {t: train_metrics(student, {t: datasets[t]})[t]["headline"]
                      for t in datasets}

    elapsed = time.time() - started
    wins = 0
    lines = []
    for task in datasets:
        delta = student_scores[task] - teacher_scores[task]
        wins += delta > 0
        lines.append(f"{task}: teacher {teacher_scores[task]:.4f} "
                     f"student {student_scores[task]:.4f} ({100 * delta:+.2f} pts)")
        assert delta >= -0.01, f"{task}: student trails teacher by more than 1 point"
    assert wins >= 2, f"student must beat its teacher on >=2 tasks, won {wins}"
    assert elapsed < 600.0, f"took {elapsed:.0f}s"
    report(6, "distilled student within 1 point of every teacher and above on "
              f"{wins}/6 tasks in {elapsed:.0f}s\n  " + "\n  ".join(lines))


def test_criterion_7_structural_invariants_1000_annotations():
    model, _ = _build_acceptance_model()
    rng = np.random.default_rng(707)
    alphabet = model.vocab.tokens[4:] + ["量", "子", "鲸"]  # includes unseen chars
    violations = 0
    for _ in range(1000):
        length = int(rng.integers(0, 20))
        text = "".join(rng.choice(alphabet, size=length)) if length else ""
        sent = model.annotate(text, validate=False)
        problems = sent.violations()
        if sent.words is not None and sent.heads is not None and sent.words:
            problems += decoders.tree_violations(sent.heads)
        violations += len(problems)
    assert violations == 0
    report(7, "1000 randomized annotations produced zero violations of tree "
              "validity, span partition, probability bounds or BIO form")


def test_criterion_8_determinism_bit_identical(tmp_path):
    from hanpipe.config import config_from_dict

    sents = toydata.generate(15, seed=81)
    from hanpipe.data import write_corpus

    write_corpus(sents, tmp_path / "train.conllu", "conllu")
    config = config_from_dict({
        "seed": 27,
        "output_dir": str(tmp_path / "run"),
        "encoder": {"width": 32, "layers": 1, "heads": 2, "max_len": 64, "ffn_width": 64},
        "train": {"teacher_epochs": 4, "student_steps": 50, "log_every": 100},
        "tasks": {"cws": {"train": str(tmp_path / "train.conllu")},
                  "dep": {"train": str(tmp_path / "train.conllu")}},
    })
    datasets = load_task_datasets(config)
    vocab = build_shared_vocab(config, datasets)

    checkpoints = []
    for run in ("one", "two"):
        model, _ = train(config, datasets, vocab, mode="student", total_steps=50)
        model.save(tmp_path / run)
        checkpoints.append(tmp_path / run)
    for name in ("params.bin", "model.json", "vocab.txt", "labels/cws.txt", "labels/dep.txt"):
        a = (checkpoints[0] / name).read_bytes()
        b = (checkpoints[1] / name).read_bytes()
        assert a == b, f"{name} differs between identically seeded runs"

    from hanpipe.pipeline import PipelineModel

    reloaded = PipelineModel.load(checkpoints[0])
    texts = [s.text for s in sents[:5]]
    first = format_corpus([reloaded.annotate(t) for t in texts], "json")
    second = format_corpus([reloaded.annotate(t) for t in texts], "json")
    assert first.encode() == second.encode()
    report(8, "identical seeds give bit-identical checkpoints; repeated "
              "annotation is byte-identical")
