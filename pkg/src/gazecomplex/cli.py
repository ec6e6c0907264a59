"""Command-line interface.

Every subcommand builds the same request model the HTTP API accepts and
either executes it in-process (default) or POSTs it to a running service
(``--server URL``), so local and remote runs are interchangeable.  Exit
codes: 0 success, 1 invalid input, 2 internal error.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys

import click

from .errors import WorkbenchError
from .service import handlers, schemas


@click.group()
@click.option("--server", default=None, envvar="GAZECOMPLEX_SERVER", metavar="URL",
              help="Send requests to a running service instead of executing "
                   "in-process.")
@click.pass_context
def cli(ctx: click.Context, server: str | None):
    """Sentence complexity, eye-tracking metrics, and reading-cost models."""
    ctx.obj = {"server": server}


def _call(ctx: click.Context, endpoint: str, handler, request) -> dict:
    server = (ctx.obj or {}).get("server")
    if not server:
        return handler(request).model_dump()
    import httpx

    response = httpx.post(server.rstrip("/") + endpoint,
                          json=request.model_dump(), timeout=600.0)
    if response.status_code == 422:
        detail = response.json()
        raise WorkbenchError(f"{detail.get('error', 'validation')}: "
                             f"{detail.get('detail', response.text)}")
    response.raise_for_status()
    return response.json()


def _read_file(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@cli.command()
@click.argument("conllu", type=click.Path(exists=True, dir_okay=False))
@click.argument("lexicon", type=click.Path(exists=True, dir_okay=False))
@click.option("--lang", default="und", help="Language code recorded on the corpus.")
@click.option("-o", "--output", type=click.Path(dir_okay=False),
              help="Write the profile CSV here instead of stdout.")
@click.pass_context
def profile(ctx, conllu, lexicon, lang, output):
    """Compute the nine complexity features per sentence."""
    req = schemas.ProfileRequest(conllu=_read_file(conllu),
                                 lexicon=_read_file(lexicon), lang=lang)
    result = _call(ctx, "/v1/profile", handlers.profile, req)
    _emit(result["csv"], output)


@cli.command("gaze-aggregate")
@click.option("--fixations", type=click.Path(exists=True, dir_okay=False),
              help="Raw fixation CSV (participant_id, sentence_id, seq, "
                   "token_index, duration_ms).")
@click.option("--metrics", type=click.Path(exists=True, dir_okay=False),
              help="Precomputed sentence-level metric CSV.")
@click.option("--scale/--no-scale", default=True,
              help="Min-max scale each metric to 0-100 over the dataset.")
@click.option("-o", "--output", type=click.Path(dir_okay=False),
              help="Write the metric CSV here instead of stdout.")
@click.option("--scaler-out", type=click.Path(dir_okay=False),
              help="Write the per-metric (min, max) scaler as JSON.")
@click.pass_context
def gaze_aggregate(ctx, fixations, metrics, scale, output, scaler_out):
    """Aggregate fixations to per-sentence metrics, average, and scale."""
    req = schemas.GazeAggregateRequest(
        fixations_csv=_read_file(fixations) if fixations else None,
        metrics_csv=_read_file(metrics) if metrics else None,
        scale=scale,
    )
    result = _call(ctx, "/v1/gaze/aggregate", handlers.gaze_aggregate, req)
    _emit(result["csv"], output)
    if scaler_out:
        with open(scaler_out, "w", encoding="utf-8") as fh:
            json.dump(result["scaler"], fh, indent=2, sort_keys=True)
            fh.write("\n")


@cli.command()
@click.argument("input_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, required=True, help="Shuffle seed.")
@click.option("--text", "is_text", is_flag=True,
              help="Input is plain text (one sentence per line), not CoNLL-U.")
@click.option("--format", "output_format", type=click.Choice(["plain", "conllu"]),
              default="plain", help="Output format (plain suits the exporter).")
@click.option("--pin-final-punct", is_flag=True,
              help="Keep sentence-final punctuation in place.")
@click.option("--lang", default="und")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.pass_context
def scramble(ctx, input_file, seed, is_text, output_format, pin_final_punct,
             lang, output):
    """Randomize word order per sentence (parse annotations are dropped)."""
    content = _read_file(input_file)
    req = schemas.ScrambleRequest(
        conllu=None if is_text else content,
        text=content if is_text else None,
        seed=seed, lang=lang, pin_final_punct=pin_final_punct,
        output_format=output_format,
    )
    result = _call(ctx, "/v1/scramble", handlers.scramble, req)
    _emit(result["output"], output)


@cli.command("train-svr")
@click.option("--profiles", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="total_fixation_duration", show_default=True)
@click.option("--group", default="ALL", show_default=True,
              help="Feature group: LENGTH, FREQUENCY, STRUCTURAL, or ALL.")
@click.option("--svr-c", "c_value", type=float, default=1.0, show_default=True)
@click.option("--epsilon", type=float, default=0.1, show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True)
@click.option("--max-iter", type=int, default=10000, show_default=True)
@click.option("--standardize/--no-standardize", default=True)
@click.option("--scale/--no-scale", default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--folds", type=int, default=None,
              help="Also report out-of-fold scores over this many folds.")
@click.option("--model-out", type=click.Path(dir_okay=False),
              help="Write the fitted model as JSON.")
@click.pass_context
def train_svr(ctx, profiles, metrics, metric, group, c_value, epsilon, tol,
              max_iter, standardize, scale, seed, folds, model_out):
    """Train the epsilon-insensitive SVR on complexity features."""
    req = schemas.SvrTrainRequest(
        profiles_csv=_read_file(profiles), metrics_csv=_read_file(metrics),
        metric=metric, group=group, C=c_value, epsilon=epsilon, tol=tol,
        max_iter=max_iter, standardize=standardize, scale=scale, seed=seed,
        folds=folds,
    )
    result = _call(ctx, "/v1/svr/train", handlers.train_svr_handler, req)
    if model_out:
        with open(model_out, "w", encoding="utf-8") as fh:
            json.dump(result["model"], fh, indent=2)
            fh.write("\n")
    train = result["train_scores"]
    click.echo(f"train: EV {train['explained_variance']:.4f} "
               f"R2 {train['r_squared']:.4f} (n={train['n']})")
    if result.get("oof_scores"):
        oof = result["oof_scores"]
        click.echo(f"out-of-fold: EV {oof['explained_variance']:.4f} "
                   f"R2 {oof['r_squared']:.4f} (n={oof['n']})")
    if not result["converged"]:
        click.echo(f"warning: not converged after {result['n_epochs']} epochs",
                   err=True)


@cli.command("train-head")
@click.option("--embeddings", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--batch", type=int, default=32, show_default=True)
@click.option("--epochs", type=int, default=15, show_default=True)
@click.option("--eval-every", type=int, default=40, show_default=True)
@click.option("--patience", type=int, default=5, show_default=True)
@click.option("--validation-fraction", type=float, default=0.1, show_default=True)
@click.option("--scale/--no-scale", default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--model-out", type=click.Path(dir_okay=False))
@click.option("--loss-out", type=click.Path(dir_okay=False),
              help="Write the evaluation-loss log as CSV.")
@click.pass_context
def train_head(ctx, embeddings, metrics, lr, batch, epochs, eval_every, patience,
               validation_fraction, scale, seed, model_out, loss_out):
    """Train the multi-task linear head on sentence embeddings."""
    req = schemas.HeadTrainRequest(
        embeddings=_read_file(embeddings), metrics_csv=_read_file(metrics),
        lr=lr, batch=batch, epochs=epochs, eval_every=eval_every,
        patience=patience, validation_fraction=validation_fraction,
        scale=scale, seed=seed,
    )
    result = _call(ctx, "/v1/head/train", handlers.train_head_handler, req)
    if model_out:
        with open(model_out, "w", encoding="utf-8") as fh:
            json.dump(result["model"], fh, indent=2)
            fh.write("\n")
    if loss_out:
        with open(loss_out, "w", encoding="utf-8") as fh:
            fh.write("step,loss\n")
            for step, loss in result["loss_log"]:
                fh.write(f"{step},{loss!r}\n")
    for name, pair in result["train_scores"].items():
        click.echo(f"{name}: EV {pair['explained_variance']:.4f} "
                   f"R2 {pair['r_squared']:.4f}")


@cli.command()
@click.option("--pre", "emb_pre", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Embedding file for the first (reference) condition.")
@click.option("--ft", "emb_ft", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Embedding file for the second (comparison) condition.")
@click.option("--profiles", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--epochs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--lr", type=float, default=None,
              help="Probe-head learning rate (defaults to the module's).")
@click.option("--language", default="und")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.pass_context
def probe(ctx, emb_pre, emb_ft, profiles, folds, epochs, seed, lr, language, output):
    """Probe how recoverable each complexity feature is from embeddings."""
    req = schemas.ProbeRequest(
        embeddings_pre=_read_file(emb_pre), embeddings_ft=_read_file(emb_ft),
        profiles_csv=_read_file(profiles), folds=folds, epochs=epochs,
        seed=seed, lr=lr, language=language,
    )
    result = _call(ctx, "/v1/probe", handlers.probe_handler, req)
    _emit(result["csv"], output)


@cli.command()
@click.option("--predictions", type=click.Path(exists=True, dir_okay=False),
              help="CSV with columns y,yhat to score.")
@click.option("--profiles", type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", type=click.Path(exists=True, dir_okay=False))
@click.option("--scale/--no-scale", default=True)
@click.option("--correlation-out", type=click.Path(dir_okay=False),
              help="Write the feature/metric correlation CSV here.")
@click.pass_context
def evaluate(ctx, predictions, profiles, metrics, scale, correlation_out):
    """Score predictions and/or emit the feature-metric correlation matrix."""
    y = yhat = None
    if predictions:
        reader = csv.DictReader(io.StringIO(_read_file(predictions)))
        if not reader.fieldnames or not {"y", "yhat"} <= set(reader.fieldnames):
            raise WorkbenchError("predictions CSV needs columns y,yhat")
        pairs = [(float(row["y"]), float(row["yhat"])) for row in reader]
        y = [p[0] for p in pairs]
        yhat = [p[1] for p in pairs]
    req = schemas.EvaluateRequest(
        y=y, yhat=yhat,
        profiles_csv=_read_file(profiles) if profiles else None,
        metrics_csv=_read_file(metrics) if metrics else None,
        scale=scale,
    )
    result = _call(ctx, "/v1/evaluate", handlers.evaluate, req)
    if result.get("scores"):
        pair = result["scores"]
        click.echo(f"EV {pair['explained_variance']:.6f} "
                   f"R2 {pair['r_squared']:.6f} (n={pair['n']})")
    if result.get("correlation_csv"):
        _emit(result["correlation_csv"], correlation_out)


@cli.command()
@click.option("--profiles", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", default="total_fixation_duration", show_default=True)
@click.option("--group", default="ALL", show_default=True)
@click.option("--seeds", default="0,1,2,3,4", show_default=True,
              help="Comma-separated permutation seeds.")
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Fold-plan seed.")
@click.option("--scale/--no-scale", default=True)
@click.option("--shuffle/--no-shuffle", default=True,
              help="--no-shuffle is the identity-permutation control.")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.pass_context
def baseline(ctx, profiles, metrics, metric, group, seeds, folds, seed, scale,
             shuffle, output):
    """Random-pairing control: retrain on permuted targets, score out-of-fold."""
    seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    req = schemas.BaselineRequest(
        profiles_csv=_read_file(profiles), metrics_csv=_read_file(metrics),
        metric=metric, group=group, seeds=seed_list, folds=folds, seed=seed,
        scale=scale, shuffle=shuffle,
    )
    result = _call(ctx, "/v1/baseline", handlers.baseline, req)
    if output:
        _emit(result["csv"], output)
    click.echo(f"mean over {len(seed_list)} seeds: "
               f"EV {result['mean_explained_variance']:.4f} "
               f"R2 {result['mean_r_squared']:.4f}")


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def run(ctx, config):
    """Run a config-driven experiment and write its report bundle."""
    req = schemas.RunRequest(config=_read_file(config),
                             base_dir=os.path.dirname(os.path.abspath(config)))
    result = _call(ctx, "/v1/run", handlers.run, req)
    click.echo(f"bundle: {result['out_dir']}")
    for name in result["files"]:
        click.echo(f"  {name}")


@cli.command("validate-embeddings")
@click.argument("embeddings", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def validate_embeddings(ctx, embeddings):
    """Check an embedding file against the format grammar."""
    req = schemas.ValidateEmbeddingsRequest(embeddings=_read_file(embeddings))
    result = _call(ctx, "/v1/embeddings/validate", handlers.validate_embeddings, req)
    click.echo(f"ok: {result['n_vectors']} vectors, dim {result['dim']}, "
               f"provenance {result['provenance']!r}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except WorkbenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001 - boundary: anything else is internal
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
