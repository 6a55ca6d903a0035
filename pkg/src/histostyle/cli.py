"""Command-line entry points: stylize, colorize, crop, report, review serve."""

from __future__ import annotations

import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List

import click

from .errors import HistostyleError
from .evaluation import build_report, parse_scores
from .images import (
    ColorMode,
    RgbImage,
    center_crop,
    colorize,
    load_image,
    partition,
    save_image,
)
from .style import StyleTransferConfig, run_style_transfer
from .vgg import load_weights

log = logging.getLogger("histostyle")

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp"}


def _collect_inputs(path: Path) -> List[Path]:
    if path.is_file():
        return [path]
    found = sorted(
        p for p in path.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not found:
        raise click.ClickException(f"no image files found in {path}")
    return found


def _prepare_out_dir(out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


@click.group()
@click.option("--verbose", is_flag=True, help="Log at debug level.")
def main(verbose: bool):
    """Histology-style transfer and review tooling."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@main.command()
@click.option("--content", "content_path", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="Content image or directory of images.")
@click.option("--style", "style_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--weights", "weights_path", required=True,
              type=click.Path(path_type=Path))
@click.option("--alpha", type=float, default=100.0, show_default=True,
              help="Style weight relative to content.")
@click.option("--iterations", type=int, default=1600, show_default=True)
@click.option("--init", "init_mode", type=click.Choice(["content", "noise"]),
              default="content", show_default=True)
@click.option("--pooling", type=click.Choice(["max", "average"]),
              default="max", show_default=True)
@click.option("--no-style-normalization", "no_style_normalization", is_flag=True,
              help="Use raw Gram differences instead of size-normalized ones.")
@click.option("--seed", type=int, default=None,
              help="RNG seed for noise initialization.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Images optimized in parallel.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def stylize(content_path, style_path, weights_path, alpha, iterations, init_mode,
            pooling, no_style_normalization, seed, jobs, out_dir):
    """Batch style transfer; one PNG plus one JSON sidecar per input."""
    try:
        weights = load_weights(weights_path)
    except (HistostyleError, OSError, EOFError) as exc:
        raise click.ClickException(f"cannot load weights: {exc}")
    try:
        style_image = load_image(style_path)
    except HistostyleError as exc:
        raise click.ClickException(f"cannot load style image: {exc}")
    config = StyleTransferConfig(
        alpha=alpha,
        iterations=iterations,
        init_mode=init_mode,
        pooling=pooling,
        style_normalization=not no_style_normalization,
        seed=seed,
    )
    inputs = _collect_inputs(content_path)
    _prepare_out_dir(out_dir)

    def stylize_one(source: Path) -> bool:
        try:
            content = load_image(source)
        except (HistostyleError, OSError) as exc:
            log.warning("skipping %s: %s", source, exc)
            return False
        result = run_style_transfer(content.pixels, style_image.pixels, weights, config)
        output = out_dir / f"{source.stem}.png"
        save_image(RgbImage(result.image), output)
        sidecar = {
            "source": str(source),
            "output": output.name,
            **result.metadata,
            "trace": [
                {
                    "content_loss": point.content_loss,
                    "style_loss_per_layer": list(point.style_loss_per_layer),
                    "total": point.total,
                }
                for point in result.trace
            ],
        }
        (out_dir / f"{source.stem}.json").write_text(
            json.dumps(sidecar, indent=2) + "\n"
        )
        if result.line_search_warning:
            log.warning("%s: line search stalled; kept best iterate", source)
        log.info("stylized %s -> %s", source.name, output.name)
        return True

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(stylize_one, inputs))
    else:
        outcomes = [stylize_one(source) for source in inputs]

    succeeded = sum(outcomes)
    click.echo(f"stylized {succeeded}/{len(inputs)} images -> {out_dir}")
    if succeeded == 0:
        raise click.ClickException("all inputs failed")


@main.command("colorize")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--mode", "mode_name",
              type=click.Choice([m.value for m in ColorMode]), default=None,
              help="Color coding applied to every input.")
@click.option("--partition", "group_count", type=int, default=None,
              help="Split inputs into N groups, one color mode per group.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Shuffle seed for --partition.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def colorize_cmd(input_path, mode_name, group_count, seed, out_dir):
    """Apply a color coding, or partition inputs across the four codings."""
    if (mode_name is None) == (group_count is None):
        raise click.UsageError("pass exactly one of --mode or --partition")
    inputs = _collect_inputs(input_path)
    _prepare_out_dir(out_dir)

    if mode_name is not None:
        assignment = {source: ColorMode(mode_name) for source in inputs}
    else:
        modes = list(ColorMode)
        if not 1 <= group_count <= len(modes):
            raise click.UsageError(
                f"--partition must be between 1 and {len(modes)} (one mode per group)"
            )
        by_name = {source.name: source for source in inputs}
        groups = partition(sorted(by_name), group_count, seed)
        assignment = {
            by_name[name]: modes[index]
            for index, group in enumerate(groups)
            for name in group
        }
        manifest = {
            "seed": seed,
            "groups": {
                modes[index].value: sorted(group) for index, group in enumerate(groups)
            },
        }
        (out_dir / "partition.json").write_text(json.dumps(manifest, indent=2) + "\n")

    for source in inputs:
        mode = assignment[source]
        image = load_image(source)
        save_image(colorize(image, mode), out_dir / f"{source.stem}.{mode.value}.png")
    click.echo(f"colorized {len(inputs)} images -> {out_dir}")


@main.command()
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--center", is_flag=True, required=True,
              help="Crop around the image center (the only supported anchor).")
@click.option("--size", type=int, required=True, help="Square crop side length.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def crop(input_path, center, size, out_dir):
    """Center-crop every input image to size x size."""
    inputs = _collect_inputs(input_path)
    _prepare_out_dir(out_dir)
    for source in inputs:
        image = load_image(source)
        try:
            cropped = center_crop(image, size)
        except ValueError as exc:
            raise click.ClickException(f"{source.name}: {exc}")
        save_image(cropped, out_dir / f"{source.stem}.png")
    click.echo(f"cropped {len(inputs)} images to {size}x{size} -> {out_dir}")


@main.command()
@click.option("--scores", "scores_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--welch", is_flag=True,
              help="Also report the unpaired Welch t variant.")
def report(scores_path, out_path, welch):
    """Aggregate a scores CSV into the report JSON."""
    try:
        records = parse_scores(scores_path.read_bytes())
    except HistostyleError as exc:
        raise click.ClickException(str(exc))
    data = build_report(records, include_welch=welch)
    out_path.write_text(json.dumps(data, indent=2) + "\n")
    click.echo(f"report over {len(records)} records -> {out_path}")


@main.group()
def review():
    """Rater-facing review service."""


@review.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--scores", "scores_path", required=True,
              type=click.Path(path_type=Path),
              help="CSV the service appends to (created if missing).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(manifest_path, scores_path, host, port):
    """Serve image pairs and collect scores until interrupted."""
    import uvicorn

    from .service import ReviewManifest, ScoreStore, create_app

    try:
        manifest = ReviewManifest.load(manifest_path)
        store = ScoreStore(scores_path)
    except HistostyleError as exc:
        raise click.ClickException(str(exc))
    app = create_app(manifest, store)
    click.echo(
        f"serving {len(manifest.pairs)} pairs on {host}:{port} "
        f"(order seed {manifest.order_seed}, {store.record_count} scores on file)"
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
