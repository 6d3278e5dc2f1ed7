"""Command-line interface: train, evaluate, recommend, serve, demo-data.

Any option can also come from a JSON config file via --config; explicit
command-line flags win. Validation problems exit with status 2.
"""

from __future__ import annotations

import json
import logging
import sys
import urllib.request
from pathlib import Path

import click

from . import __version__
from .errors import ValidationError
from .evaluator import emit_report
from .logio import LabelSpec, parse_csv, parse_xes, write_csv, write_xes
from .model import ModelBundle
from .pipeline import TrainConfig, evaluate_model, train_model
from .recommender import generate
from .sampledata import fixture_model, synth_sepsis_base, synth_sepsis_dataset


def load_log(path: str):
    path = Path(path)
    if path.suffix.lower() == ".xes":
        return parse_xes(path)
    return parse_csv(path)


def load_label_spec(spec: str | None) -> LabelSpec | None:
    """Accept inline JSON or a path to a JSON file."""
    if spec is None:
        return None
    text = spec
    candidate = Path(spec)
    if spec.startswith("@"):
        text = Path(spec[1:]).read_text()
    elif not spec.lstrip().startswith("{") and candidate.exists():
        text = candidate.read_text()
    try:
        return LabelSpec.from_json(json.loads(text))
    except json.JSONDecodeError as err:
        raise ValidationError(f"label spec is not valid JSON: {err}") from err


def config_option(f):
    def load_config(ctx, param, value):
        if value:
            ctx.default_map = {**json.loads(Path(value).read_text()), **(ctx.default_map or {})}
        return value

    return click.option(
        "--config",
        type=click.Path(exists=True, dir_okay=False),
        callback=load_config,
        is_eager=True,
        expose_value=False,
        help="JSON file supplying defaults for any option",
    )(f)


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="log progress details")
def main(verbose):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@config_option
@click.option("--log", "log_path", required=True, type=click.Path(exists=True), help="event log (CSV or XES)")
@click.option("--label", "label_spec", required=True, help="label spec: inline JSON or a file path")
@click.option("--families", default="E", show_default=True, help="constraint families: E|C|PR|NR|A")
@click.option("--out", "out_path", required=True, type=click.Path(), help="where to write the model JSON")
@click.option("--dataset-name", default=None, help="dataset name (drives the prefix-length cap rule)")
@click.option("--support", default=0.05, show_default=True, help="apriori support threshold")
@click.option("--seed", default=2023, show_default=True, help="seed for fold assignment")
@click.option("--min-path-samples", default=3, show_default=True)
def train(log_path, label_spec, families, out_path, dataset_name, support, seed, min_path_samples):
    """Train a model from a labeled event log."""
    event_log = load_log(log_path)
    label = load_label_spec(label_spec)
    cfg = TrainConfig(
        families=families,
        dataset_name=dataset_name or Path(log_path).stem,
        apriori_support=support,
        seed=seed,
        min_path_samples=min_path_samples,
    )
    bundle = train_model(event_log, label, cfg)
    bundle.save(out_path)
    click.echo(f"model written to {out_path}")


@main.command()
@config_option
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--report", "report_dir", required=True, type=click.Path())
@click.option("--label", "label_spec", default=None, help="override the label spec stored in the model")
@click.option("--no-split", is_flag=True, help="evaluate on the whole log instead of its test partition")
def evaluate(model_path, log_path, report_dir, label_spec, no_split):
    """Run the offline what-if evaluation and write report files."""
    bundle = ModelBundle.load(model_path)
    event_log = load_log(log_path)
    report = evaluate_model(event_log, bundle, load_label_spec(label_spec), split=not no_split)
    files = emit_report(report, report_dir)
    click.echo(f"average cumulative F-score: {100 * report.average_f():.2f}")
    for path in files:
        click.echo(f"wrote {path}")


@main.command()
@config_option
@click.option("--model", "model_path", type=click.Path(exists=True), help="model JSON (in-process)")
@click.option("--prefix", required=True, help="comma-separated activities of the ongoing case")
@click.option("--url", default=None, help="query a running service instead of loading the model")
def recommend(model_path, prefix, url):
    """Print prioritized recommendations for an ongoing case prefix."""
    activities = [a.strip() for a in prefix.split(",") if a.strip()]
    if not activities:
        raise ValidationError("prefix is empty")
    if url:
        request = urllib.request.Request(
            url.rstrip("/") + "/recommend",
            data=json.dumps({"activities": activities}).encode(),
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request) as response:
            click.echo(response.read().decode())
        return
    if not model_path:
        raise ValidationError("either --model or --url is required")
    bundle = ModelBundle.load(model_path)
    result = generate(activities, bundle.tree, bundle.weights, bundle.min_path_samples)
    click.echo(json.dumps(result.to_json(), indent=2))


@main.command()
@config_option
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--sessions-file", default=None, type=click.Path(), help="snapshot sessions here on shutdown")
@click.option("--cors-origin", multiple=True, default=("*",), help="allowed CORS origins")
def serve(model_path, port, host, sessions_file, cors_origin):
    """Serve the model over HTTP for interactive what-if exploration."""
    import uvicorn

    from .service import create_app

    app = create_app(model_path=model_path, cors_origins=tuple(cors_origin), sessions_file=sessions_file)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("demo-data")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--cases", default=782, show_default=True)
@click.option("--seed", default=77, show_default=True)
def demo_data(out_dir, cases, seed):
    """Generate the bundled synthetic hospital logs and a demo model."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_xes(synth_sepsis_base(cases, seed), out / "sepsis_base.xes")
    for variant in ("2", "3"):
        write_csv(synth_sepsis_dataset(variant, cases, seed), out / f"sepsis_cases_{variant}.csv")
    fixture_model().save(out / "demo_model.json")
    click.echo(f"wrote sepsis_base.xes, sepsis_cases_2.csv, sepsis_cases_3.csv, demo_model.json to {out}")


def entrypoint():
    try:
        main(standalone_mode=False)
    except ValidationError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    except click.ClickException as err:
        err.show()
        sys.exit(err.exit_code)
    except click.Abort:
        sys.exit(1)


if __name__ == "__main__":
    entrypoint()
