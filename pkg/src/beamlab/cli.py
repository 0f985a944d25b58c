"""Command-line front-end.

Subcommands map one-to-one onto the pipeline handlers that also back the
HTTP service. Exit codes: 0 success, 2 configuration error, 3 data error,
4 numeric failure.
"""

from __future__ import annotations

import logging
import sys

import click

from .errors import ConfigError, DataError, NumericError
from .service import schemas


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
@click.option("--seed", type=int, default=None,
              help="Override the config seed of the invoked stage.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker threads for dataset generation.")
@click.pass_context
def cli(ctx, verbose, seed, threads):
    """Desk-scale mmWave beam-alignment laboratory."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = {"seed": seed, "threads": threads}


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--n-samples", type=int, default=None,
              help="Override the configured sample count.")
@click.pass_context
def gen(ctx, config_path, out_path, n_samples):
    """Generate a labeled dataset and write it as a .bmal file."""
    from . import pipeline

    resp = pipeline.run_generate(schemas.GenerateRequest(
        config_path=config_path, out_path=out_path, n_samples=n_samples,
        seed=ctx.obj["seed"], threads=ctx.obj["threads"]))
    click.echo(f"wrote {resp.out_path}: {resp.n_samples} samples, "
               f"{resp.distinct_labels} distinct labels, scene {resp.scene_hash}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--model", "model", required=True, type=click.Choice(["gnn", "dnn"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.pass_context
def train(ctx, config_path, data_path, model, out_path):
    """Train a model on the training split of a dataset."""
    from . import pipeline

    resp = pipeline.run_train(schemas.TrainRequest(
        config_path=config_path, data_path=data_path, model=model,
        out_path=out_path, seed=ctx.obj["seed"]))
    click.echo(f"trained {resp.model} on {resp.train_samples} samples: "
               f"{resp.epochs_run} epochs (best {resp.best_epoch}), "
               f"final loss {resp.final_train_loss:.4f}, "
               f"{resp.parameter_count} parameters -> {resp.out_path}")


@cli.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--nb", "nb", required=True,
              help="Comma-separated candidate-set sizes, e.g. 1,2,5.")
@click.option("--out", "out_csv", required=True, type=click.Path())
@click.option("--split", type=click.Choice(["test", "train", "all"]), default="test",
              show_default=True)
@click.option("--train-fraction", type=float, default=0.8, show_default=True)
def eval_cmd(model_path, data_path, nb, out_csv, split, train_fraction):
    """Evaluate a checkpoint: misalignment, ESE, and RSS per candidate count."""
    from . import pipeline

    try:
        n_b = [int(part) for part in nb.split(",") if part.strip()]
    except ValueError as err:
        raise ConfigError(f"--nb must be comma-separated integers: {err}") from err
    if not n_b:
        raise ConfigError("--nb must name at least one candidate-set size")
    resp = pipeline.run_evaluate(schemas.EvaluateRequest(
        model_path=model_path, data_path=data_path, n_b=n_b, out_csv=out_csv,
        split=split, train_fraction=train_fraction))
    for row in resp.rows:
        click.echo(f"{row.model} n_b={row.n_b}: misalignment {row.misalignment:.4f}, "
                   f"ese {row.ese_bps_hz:.3f} bit/s/Hz, rss {row.rss_dbm:.2f} dBm")
    click.echo(f"wrote {resp.out_csv}")


@cli.command()
@click.option("--kind", required=True, type=click.Choice(["size", "noise", "antenna"]))
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def sweep(ctx, kind, config_path, out_dir):
    """Run a sweep (dataset size, pose noise, or array size) into a directory."""
    from . import pipeline

    resp = pipeline.run_sweep(schemas.SweepRequest(
        kind=kind, config_path=config_path, out_dir=out_dir,
        threads=ctx.obj["threads"]))
    click.echo(f"sweep {kind}: {resp.n_rows} result rows -> {resp.csv_path}")


@cli.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--out", "out_csv", default=None, type=click.Path(),
              help="Also write the report as CSV.")
def complexity(config_path, out_csv):
    """Report inference multiplications and trainable parameters."""
    from . import pipeline

    resp = pipeline.run_complexity(schemas.ComplexityRequest(
        config_path=config_path, out_csv=out_csv))
    for e in resp.entries:
        click.echo(f"{e.method}: {e.multiplications} multiplications, "
                   f"{e.parameters} parameters")
    if resp.out_csv:
        click.echo(f"wrote {resp.out_csv}")


@cli.command("export-csv")
@click.option("--data", "data_path", required=True, type=click.Path())
@click.option("--out", "out_csv", required=True, type=click.Path())
@click.option("--rss", "include_rss", is_flag=True,
              help="Include one column per beam-pair RSS entry.")
def export_csv(data_path, out_csv, include_rss):
    """Export a dataset to CSV (pose, label, optionally the full RSS matrix)."""
    from . import pipeline

    resp = pipeline.run_export_csv(schemas.ExportCsvRequest(
        data_path=data_path, out_csv=out_csv, include_rss=include_rss))
    click.echo(f"wrote {resp.out_csv}: {resp.n_rows} rows")


@cli.command()
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--side", type=click.Choice(["tx", "rx"]), default="tx", show_default=True)
@click.option("--out", "out_csv", required=True, type=click.Path())
def graph(config_path, side, out_csv):
    """Export one array's beam graph as a src,dst,delta edge list."""
    from . import pipeline

    resp = pipeline.run_graph_export(schemas.GraphExportRequest(
        config_path=config_path, side=side, out_csv=out_csv))
    click.echo(f"{resp.side} graph: {resp.node_count} nodes, "
               f"{len(resp.edges)} edges -> {resp.out_csv}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.ClickException as err:
        err.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(1)
    except ConfigError as err:
        click.echo(f"config error: {err}", err=True)
        sys.exit(2)
    except (DataError, FileNotFoundError) as err:
        click.echo(f"data error: {err}", err=True)
        sys.exit(3)
    except NumericError as err:
        click.echo(f"numeric failure: {err}", err=True)
        sys.exit(4)
    except ValueError as err:
        click.echo(f"invalid input: {err}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
