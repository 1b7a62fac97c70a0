"""Training engine: size-weighted task sampling, warmup/decay AdamW,
global-norm clipping, and annealed teacher distillation.

One task is sampled per optimizer step with probability proportional to
|D|^0.75. With teachers present the per-step loss mixes gold and teacher
targets as ``lam * gold + (1 - lam) * teacher`` where ``lam`` climbs
linearly from 0 to 1 over the whole run, so training starts by imitating
the teachers and ends on gold labels alone. Teachers are frozen: their
outputs enter losses as plain arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import Tensor
from .config import PipelineConfig, TASK_INDEX
from .data import AnnotatedSentence, read_corpus
from .errors import ContractError, DataError, TrainingDivergedError
from .metrics import evaluate, headline
from .pipeline import PipelineModel
from .rngs import DATA, DROPOUT, SAMPLING, derived_rng
from .tasks import ADAPTERS
from .vocabulary import Vocab, build_vocab


@dataclass
class TaskDataset:
    task: str
    sentences: list[AnnotatedSentence]
    labels: list[str]
    targets: list = field(default_factory=list)

    def __post_init__(self):
        if not self.sentences:
            raise ContractError(f"task {self.task!r} has an empty dataset")
        if not self.targets:
            adapter = ADAPTERS[self.task]
            self.targets = [adapter.prepare(s, self.labels) for s in self.sentences]

    @property
    def size(self) -> int:
        return len(self.sentences)


def sample_task(datasets: list[TaskDataset], rng: np.random.Generator) -> int:
    """Index of the next task to train on, P(t) proportional to |D_t|^0.75."""
    if not datasets:
        raise ContractError("sample_task needs at least one dataset")
    return int(rng.choice(len(datasets), p=sampling_probabilities(datasets)))


def sampling_probabilities(datasets: list[TaskDataset]) -> np.ndarray:
    weights = np.array([ds.size for ds in datasets], dtype=np.float64) ** 0.75
    return weights / weights.sum()


@dataclass
class DistillationSchedule:
    """Linear gold-vs-teacher mixing curriculum over the whole run."""

    total_steps: int
    current_step: int = 0

    def __post_init__(self):
        if self.total_steps <= 0:
            raise ContractError("total_steps must be positive")

    def lambda_at(self) -> float:
        if not 0 <= self.current_step <= self.total_steps:
            raise ContractError(f"step {self.current_step} outside [0, {self.total_steps}]")
        return self.current_step / self.total_steps

    def advance(self) -> None:
        self.current_step += 1


def lr_at(step: int, total_steps: int, warmup_proportion: float, base_lr: float = 1.0) -> float:
    """Linear warmup to base_lr, then linear decay to zero at total_steps."""
    if step < 0:
        raise ContractError("step must be nonnegative")
    warmup = warmup_proportion * total_steps
    if step <= warmup:
        return base_lr * step / warmup
    return base_lr * max(0.0, (total_steps - step) / (total_steps - warmup))


def clip_gradients(params: list[Tensor], max_norm: float = 1.0) -> float:
    """Scale all gradients so the global L2 norm is at most max_norm.

    Returns the pre-clip norm; direction is preserved.
    """
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float((p.grad * p.grad).sum())
    norm = math.sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return norm


class AdamW:
    """Adam with decoupled weight decay and bias correction.

    Defaults (documented in the config schema): beta1=0.9, beta2=0.999,
    eps=1e-6, weight_decay=0.01. Layer-norm gains/biases, plain biases and
    CRF scores are not decayed.
    """

    def __init__(self, params: dict[str, Tensor], base_lr: float, crf_names: set[str],
                 crf_lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-6, weight_decay: float = 0.01):
        self.entries = []
        for name, p in params.items():
            lr = crf_lr if name in crf_names else base_lr
            decay = weight_decay if (p.data.ndim >= 2 and ".crf." not in name) else 0.0
            self.entries.append((p, lr, decay))
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p.data) for p, _, _ in self.entries]
        self.v = [np.zeros_like(p.data) for p, _, _ in self.entries]
        self.t = 0

    def zero_grad(self) -> None:
        for p, _, _ in self.entries:
            p.grad = None

    def step(self, lr_factor: float) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for (p, base_lr, decay), m, v in zip(self.entries, self.m, self.v):
            if p.grad is None:
                continue
            g = p.grad
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            lr = base_lr * lr_factor
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if decay:
                update = update + decay * p.data
            p.data -= lr * update


def load_task_datasets(config: PipelineConfig) -> dict[str, TaskDataset]:
    out = {}
    for task in config.task_names():
        settings = config.tasks[task]
        sentences = read_corpus(settings.train, settings.format)
        adapter = ADAPTERS[task]
        labels = settings.labels or adapter.labels_from_corpus(sentences)
        try:
            out[task] = TaskDataset(task=task, sentences=sentences, labels=labels)
        except (ContractError, KeyError) as exc:
            raise DataError(f"task {task}: cannot build targets from "
                            f"{settings.train}: {exc}") from exc
    return out


def build_shared_vocab(config: PipelineConfig,
                       datasets: dict[str, TaskDataset]) -> Vocab:
    """One character vocabulary over every task corpus; shared by all models."""
    texts = [s.text for ds in datasets.values() for s in ds.sentences]
    return build_vocab(texts, min_count=config.vocab_min_count)


class _ExampleStream:
    """Cyclic shuffled iterator over one task's examples."""

    def __init__(self, dataset: TaskDataset, rng: np.random.Generator):
        self.dataset = dataset
        self.rng = rng
        self.order: list[int] = []
        self.pos = 0

    def next(self):
        if self.pos >= len(self.order):
            self.order = list(self.rng.permutation(self.dataset.size))
            self.pos = 0
        i = self.order[self.pos]
        self.pos += 1
        return self.dataset.sentences[i], self.dataset.targets[i]


def train(config: PipelineConfig, datasets: dict[str, TaskDataset], vocab: Vocab,
          teachers: dict[str, PipelineModel] | None = None, mode: str = "student",
          total_steps: int | None = None) -> tuple[PipelineModel, list[dict]]:
    """Train one model over the given tasks; the core loop for both regimes.

    ``mode`` picks the base learning rate; teacher training is this same
    loop over a single task. Everything random derives from config.seed,
    so identical configs give bit-identical weights.
    """
    tasks = list(datasets)
    ordered = [datasets[t] for t in tasks]
    labels = {t: datasets[t].labels for t in tasks}
    model = PipelineModel(config, vocab, labels, tasks)

    if total_steps is None:
        if mode == "teacher":
            total_steps = config.train.teacher_epochs * sum(d.size for d in ordered)
        else:
            total_steps = config.train.student_steps
    opt = config.optimizer
    base_lr = opt.lr_teacher if mode == "teacher" else opt.lr_student
    optimizer = AdamW(model.parameters(), base_lr, model.crf_parameter_names(),
                      opt.lr_crf, opt.beta1, opt.beta2, opt.eps, opt.weight_decay)

    sample_rng = derived_rng(config.seed, SAMPLING)
    dropout_rng = derived_rng(config.seed, DROPOUT)
    streams = {t: _ExampleStream(datasets[t], derived_rng(config.seed, DATA, TASK_INDEX[t]))
               for t in tasks}
    schedule = DistillationSchedule(total_steps)
    params = list(model.parameters().values())

    history: list[dict] = []
    window_loss, window_n = 0.0, 0
    epoch_size = sum(d.size for d in ordered)
    for step in range(total_steps):
        task = tasks[sample_task(ordered, sample_rng)]
        sent, target = streams[task].next()
        lam = schedule.lambda_at() if teachers else 1.0
        teacher = teachers.get(task) if teachers else None
        loss = ADAPTERS[task].loss(model, sent, target, lam=lam, teacher=teacher,
                                   training=True, rng=dropout_rng)
        value = loss.item()
        if not math.isfinite(value):
            raise TrainingDivergedError(
                f"non-finite loss {value} at step {step} on task {task}")
        optimizer.zero_grad()
        loss.backward()
        clip_gradients(params, opt.grad_clip)
        optimizer.step(lr_at(step, total_steps, opt.warmup_proportion))
        schedule.advance()

        window_loss += value
        window_n += 1
        boundary = (step + 1) % epoch_size == 0 if mode == "teacher" else (
            (step + 1) % config.train.log_every == 0)
        if boundary or step + 1 == total_steps:
            entry = {"step": step + 1, "mean_loss": window_loss / max(1, window_n)}
            if mode == "teacher":
                entry["epoch"] = (step + 1) // epoch_size
            history.append(entry)
            window_loss, window_n = 0.0, 0
    optimizer.zero_grad()
    return model, history


def train_metrics(model: PipelineModel, datasets: dict[str, TaskDataset]) -> dict[str, dict]:
    """Training-set scores per task, decoding with gold segmentation."""
    out = {}
    for task, dataset in datasets.items():
        preds = [predict_task(model, task, s) for s in dataset.sentences]
        scores = evaluate(task, dataset.sentences, preds)
        scores["headline"] = headline(task, scores)
        out[task] = scores
    return out


def predict_task(model: PipelineModel, task: str, gold: AnnotatedSentence) -> AnnotatedSentence:
    """Predict one task's layer, reusing gold segmentation for word-level heads."""
    adapter = ADAPTERS[task]
    pred = AnnotatedSentence(text=gold.text, words=gold.words)
    enc = model.encode(gold.text)
    decoded = adapter.decode(model, enc, gold.words) if adapter.word_level else \
        adapter.decode(model, enc)
    adapter.apply(pred, decoded)
    return pred


def save_run(directory, model: PipelineModel, history: list[dict],
             metrics: dict[str, dict]) -> None:
    directory = Path(directory)
    model.save(directory)
    with open(directory / "metrics.jsonl", "w", encoding="utf-8") as fh:
        for entry in history:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
        fh.write(json.dumps({"train_metrics": metrics}, ensure_ascii=False) + "\n")
