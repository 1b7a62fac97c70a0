"""Command line entry points: train, annotate, eval, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
Set HANPIPE_LOG=debug|info|warning to control verbosity (default info).
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from . import __version__
from .config import TASKS, load_config, save_config
from .data import format_corpus, read_corpus, write_corpus
from .errors import DataError, HanpipeError, ModelError
from .metrics import evaluate
from .pipeline import PipelineModel
from .trainer import (
    build_shared_vocab,
    load_task_datasets,
    save_run,
    train,
    train_metrics,
)

log = logging.getLogger("hanpipe")

TASK_DEFAULT_FORMAT = {"cws": "conllu", "pos": "conllu", "dep": "conllu",
                       "sdp": "conllu", "ner": "column-bio", "srl": "srl-columns"}


@click.group()
@click.version_option(version=__version__, prog_name="hanpipe")
def cli():
    """Six-task Chinese NLP pipeline: one shared encoder, six decoders."""


@cli.command("train")
@click.option("--config", "config_path", required=True, type=click.Path(), help="Pipeline config JSON.")
@click.option("--mode", required=True,
              help="single:<task> to train one teacher, joint for gold-only multi-task, "
                   "distill for multi-task with teacher distillation.")
@click.option("--out", default=None, type=click.Path(),
              help="Checkpoint directory (defaults derive from the config's output_dir).")
def cmd_train(config_path, mode, out):
    """Train a model and write a checkpoint plus metrics log."""
    config = load_config(config_path)
    datasets = load_task_datasets(config)
    if not datasets:
        raise DataError("config lists no tasks")
    vocab = build_shared_vocab(config, datasets)
    output_dir = Path(config.output_dir)

    if mode.startswith("single:"):
        task = mode.split(":", 1)[1]
        if task not in TASKS:
            raise click.UsageError(f"unknown task {task!r}; valid: {', '.join(TASKS)}")
        if task not in datasets:
            raise DataError(f"task {task!r} has no dataset in the config")
        target = Path(out) if out else config.resolved_teacher_dir() / task
        log.info("training single-task teacher for %s", task)
        model, history = train(config, {task: datasets[task]}, vocab, mode="teacher")
        metrics = train_metrics(model, {task: datasets[task]})
    elif mode == "joint":
        target = Path(out) if out else output_dir / "joint"
        log.info("training joint model on %s without teachers", list(datasets))
        model, history = train(config, datasets, vocab, mode="student")
        metrics = train_metrics(model, datasets)
    elif mode == "distill":
        teacher_dir = config.resolved_teacher_dir()
        missing = [t for t in datasets if not (teacher_dir / t / "model.json").exists()]
        if missing:
            raise ModelError(
                f"distill mode needs a teacher checkpoint per task under {teacher_dir}; "
                f"missing: {', '.join(missing)}")
        teachers = {t: PipelineModel.load(teacher_dir / t) for t in datasets}
        target = Path(out) if out else output_dir / "student"
        log.info("training distilled student on %s", list(datasets))
        model, history = train(config, datasets, vocab, teachers=teachers, mode="student")
        metrics = train_metrics(model, datasets)
    else:
        raise click.UsageError(f"unknown mode {mode!r}; use single:<task>, joint or distill")

    save_run(target, model, history, metrics)
    save_config(config, target / "train_config.json")
    for task, scores in metrics.items():
        log.info("train metrics %s: %s", task,
                 {k: round(v, 4) for k, v in scores.items()})
    click.echo(str(target))


@cli.command("annotate")
@click.option("--model", "model_dir", required=True, type=click.Path(), help="Checkpoint directory.")
@click.option("--input", "input_path", required=True, type=click.Path(),
              help="UTF-8 text file, one sentence per non-blank line.")
@click.option("--format", "fmt", type=click.Choice(["json", "conllu"]), default="json",
              show_default=True)
@click.option("--output", "output_path", default=None, type=click.Path(),
              help="Output file (default: stdout).")
def cmd_annotate(model_dir, input_path, fmt, output_path):
    """Annotate raw text with every task the model provides."""
    model = PipelineModel.load(model_dir)
    try:
        lines = Path(input_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {input_path}: {exc}") from exc
    sentences = [model.annotate(line.strip()) for line in lines if line.strip()]
    if output_path:
        write_corpus(sentences, output_path, fmt)
    else:
        click.echo(format_corpus(sentences, fmt), nl=False)


@cli.command("eval")
@click.option("--task", required=True, type=click.Choice(list(TASKS)))
@click.option("--gold", "gold_path", required=True, type=click.Path())
@click.option("--pred", "pred_path", required=True, type=click.Path())
@click.option("--format", "fmt", default="auto", show_default=True,
              help="Corpus format, or 'auto': .json files as json, else the task default.")
def cmd_eval(task, gold_path, pred_path, fmt):
    """Score predictions against gold; prints a JSON metric report."""
    def resolve(path):
        if fmt != "auto":
            return fmt
        return "json" if str(path).endswith(".json") else TASK_DEFAULT_FORMAT[task]

    gold = read_corpus(gold_path, resolve(gold_path))
    pred = read_corpus(pred_path, resolve(pred_path))
    scores = evaluate(task, gold, pred)
    click.echo(json.dumps({"task": task, **{k: round(v, 6) for k, v in scores.items()}},
                          indent=2))


@cli.command("serve")
@click.option("--model", "model_dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def cmd_serve(model_dir, host, port):
    """Serve the annotation API over HTTP."""
    import uvicorn

    from .service import create_app

    app = create_app(PipelineModel.load(model_dir))
    uvicorn.run(app, host=host, port=port, log_level="info")


def entry(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("HANPIPE_LOG", "info").upper(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except ModelError as exc:
        click.echo(f"model error: {exc}", err=True)
        return 3
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except HanpipeError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


def main() -> None:
    sys.exit(entry())


if __name__ == "__main__":
    main()
