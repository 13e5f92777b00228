"""Command-line front door.

Four subcommands: explain-tabular, explain-image, stability, evaluate.
Every parameter can come from a TOML config file (--config); explicit
flags override config values. All outputs are JSON (sorted keys) or PNG
and are byte-identical across runs with the same seed.
"""

from __future__ import annotations

import csv
import json
import os
import sys

import click
import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import blackbox
from .ecdf import DistanceMeasure
from .evaluation import GroundTruthMask, coverage, robustness_ratio, stability_experiment, weighted_coverage
from .explainers import (
    coefficients_to_pixels,
    explain_image,
    explain_tabular,
    render_heatmap,
    render_segment_overlay,
)
from .perturbation import TabularPerturbationConfig
from .segmentation import grid_segments, load_image, slic_segments
from .surrogate import KernelConfig, SurrogateFit, select_top_features

ALL_MEASURES = [m.value for m in DistanceMeasure]


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise click.UsageError(f"config file not found: {path}")
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _pick(flag_value, config: dict, key: str, default):
    """Flag beats config beats default. Flags left at None are unset."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError:
        raise click.UsageError(f"could not parse point: {text!r}")


def _build_tabular_model(spec: str, target_class):
    """mars | linear:<csv> | logistic:<csv> | biased[:bias_idx,unrel_idx]"""
    if spec == "mars":
        return blackbox.mars_model()
    if spec.startswith(("linear:", "logistic:")):
        kind, path = spec.split(":", 1)
        if not os.path.exists(path):
            raise click.UsageError(f"model data file not found: {path}")
        X, y, _, _ = blackbox.load_csv_dataset(path)
        task = "classification" if kind == "logistic" else "regression"
        if task == "classification":
            y = y.astype(np.int64)
        return blackbox.fit_linear_model(X, y, task=task)
    if spec.startswith("biased"):
        bias_idx, unrel_idx = 0, 1
        if ":" in spec:
            try:
                bias_idx, unrel_idx = (int(v) for v in spec.split(":", 1)[1].split(","))
            except ValueError:
                raise click.UsageError(f"bad biased model spec: {spec!r}")
        return blackbox.biased_model_with_unrelated_feature(bias_idx, unrel_idx)
    raise click.UsageError(f"unknown model: {spec!r}")


def _write_json(payload: dict, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


@click.group()
@click.option("--threads", type=int, envvar="SMILE_THREADS", default=None,
              help="Cap on worker threads; results never depend on it.")
def main(threads):
    """Local explanations weighted by ECDF statistical distances."""
    # Computation is accumulated in index order, so the thread cap can
    # only affect speed. The current pipelines run single-threaded.
    if threads is not None and threads < 1:
        raise click.UsageError("threads must be >= 1")


@main.command("explain-tabular")
@click.option("--config", "config_path", default=None, help="TOML config file; flags override it.")
@click.option("--model", "model_spec", default=None, help="mars | linear:<csv> | logistic:<csv> | biased[:i,j]")
@click.option("--point", default=None, help="Comma-separated feature vector to explain.")
@click.option("--measure", default=None, type=click.Choice(ALL_MEASURES))
@click.option("--n-primary", type=int, default=None, help="Primary perturbation count N (>= 2).")
@click.option("--m-local", type=int, default=None, help="Local samples per primary M (>= 1).")
@click.option("--sigma1", type=float, default=None, help="Primary perturbation std (> 0).")
@click.option("--sigma2", type=float, default=None, help="Local perturbation std (> 0, default 0.25*sigma1).")
@click.option("--kernel-width", type=float, default=None, help="Kernel sigma (> 0); default adapts to distances.")
@click.option("--lambda", "lambda_", type=float, default=None, help="Ridge penalty (>= 0).")
@click.option("--target-class", type=int, default=None, help="Class index (classifiers only).")
@click.option("--top-k", type=int, default=None, help="Rows in the printed feature table (>= 1).")
@click.option("--seed", type=int, default=None)
@click.option("--output", default=None, help="Path of the explanation JSON.")
def cmd_explain_tabular(config_path, model_spec, point, measure, n_primary, m_local, sigma1,
                        sigma2, kernel_width, lambda_, target_class, top_k, seed, output):
    """Explain one tabular prediction; writes JSON and prints a ranked table."""
    cfg = _load_config(config_path)
    model_spec = _pick(model_spec, cfg, "model", "mars")
    point = _pick(point, cfg, "point", None)
    if point is None:
        raise click.UsageError("missing required parameter: point")
    x = _parse_point(point) if isinstance(point, str) else np.asarray(point, dtype=np.float64)
    measure = DistanceMeasure.from_name(_pick(measure, cfg, "measure", "wasserstein"))
    target_class = _pick(target_class, cfg, "target_class", None)
    seed = int(_pick(seed, cfg, "seed", 0))
    lambda_ = float(_pick(lambda_, cfg, "lambda", 1e-6))
    top_k = int(_pick(top_k, cfg, "top_k", x.size))
    output = _pick(output, cfg, "output", "explanation.json")
    kw = _pick(kernel_width, cfg, "kernel_width", None)

    try:
        pcfg = TabularPerturbationConfig(
            n_primary=int(_pick(n_primary, cfg, "n_primary", 1000)),
            m_local=int(_pick(m_local, cfg, "m_local", 50)),
            sigma1=float(_pick(sigma1, cfg, "sigma1", 1.0)),
            sigma2=_pick(sigma2, cfg, "sigma2", None),
            seed=seed,
        )
        kernel = KernelConfig(width=float(kw)) if kw is not None else None
    except ValueError as exc:
        raise click.UsageError(str(exc))

    model = _build_tabular_model(model_spec, target_class)
    if model.is_classifier and target_class is None:
        target_class = 1 if model.n_classes == 2 else 0
    try:
        expl = explain_tabular(model, x, pcfg, measure=measure, kernel=kernel,
                               lambda_=lambda_, target_class=target_class)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    _write_json(expl.to_dict(), output)
    fit = SurrogateFit(expl.coefficients, expl.intercept, lambda_, expl.weighted_r2)
    click.echo(f"{'rank':>4}  {'feature':>7}  {'coefficient':>14}")
    for rank, (idx, coef) in enumerate(select_top_features(fit, top_k), start=1):
        click.echo(f"{rank:>4}  {idx:>7}  {coef:>14.6f}")
    click.echo(f"wrote {output}")


@main.command("explain-image")
@click.option("--config", "config_path", default=None)
@click.option("--image", "image_path", default=None, help="Input PNG/PPM/PGM.")
@click.option("--region", default=None, help="square-region model rectangle y0,x0,y1,x1.")
@click.option("--threshold", type=float, default=None, help="square-region intensity threshold.")
@click.option("--segmenter", default=None, help="grid:<rows>x<cols> | slic:<target>")
@click.option("--k-masks", type=int, default=None, help="Number of masks K (>= 2).")
@click.option("--keep-probability", type=float, default=None, help="Bernoulli keep probability in (0, 1).")
@click.option("--measure", default=None, type=click.Choice(ALL_MEASURES))
@click.option("--kernel-width", type=float, default=None)
@click.option("--lambda", "lambda_", type=float, default=None)
@click.option("--target-class", type=int, default=None)
@click.option("--top-m", type=int, default=None, help="Segments kept in the overlay (>= 1).")
@click.option("--seed", type=int, default=None)
@click.option("--output-prefix", default=None, help="Prefix for the JSON/heatmap/overlay outputs.")
def cmd_explain_image(config_path, image_path, region, threshold, segmenter, k_masks,
                      keep_probability, measure, kernel_width, lambda_, target_class,
                      top_m, seed, output_prefix):
    """Explain an image classification; writes JSON, heatmap, and overlay."""
    cfg = _load_config(config_path)
    image_path = _pick(image_path, cfg, "image", None)
    if image_path is None:
        raise click.UsageError("missing required parameter: image")
    if not os.path.exists(image_path):
        raise click.UsageError(f"image file not found: {image_path}")
    try:
        img = load_image(image_path)
    except Exception as exc:
        raise click.UsageError(f"unsupported image: {exc}")

    region = _pick(region, cfg, "region", None)
    if region is None:
        raise click.UsageError("missing required parameter: region (square-region model rectangle)")
    if isinstance(region, str):
        region = tuple(int(v) for v in region.split(","))
    threshold = float(_pick(threshold, cfg, "threshold", 0.5))
    segmenter = _pick(segmenter, cfg, "segmenter", "slic:50")
    measure = DistanceMeasure.from_name(_pick(measure, cfg, "measure", "wasserstein"))
    k_masks = int(_pick(k_masks, cfg, "k_masks", 1000))
    keep_probability = float(_pick(keep_probability, cfg, "keep_probability", 0.5))
    lambda_ = float(_pick(lambda_, cfg, "lambda", 1e-6))
    target_class = int(_pick(target_class, cfg, "target_class", 1))
    top_m = int(_pick(top_m, cfg, "top_m", 5))
    seed = int(_pick(seed, cfg, "seed", 0))
    prefix = _pick(output_prefix, cfg, "output_prefix", "image_explanation")
    kw = _pick(kernel_width, cfg, "kernel_width", None)

    if k_masks < 2:
        raise click.UsageError("k_masks must be >= 2")
    if not (0.0 < keep_probability < 1.0):
        raise click.UsageError("keep_probability must lie in (0, 1)")

    try:
        if segmenter.startswith("grid:"):
            rows, cols = (int(v) for v in segmenter[5:].split("x"))
            segments = grid_segments(img, rows, cols)
        elif segmenter.startswith("slic:"):
            segments = slic_segments(img, int(segmenter[5:]))
        else:
            raise click.UsageError(f"unknown segmenter: {segmenter!r}")
        kernel = KernelConfig(width=float(kw)) if kw is not None else None
    except ValueError as exc:
        raise click.UsageError(str(exc))

    model = blackbox.square_region_classifier(region, threshold)
    try:
        expl, top = explain_image(
            model, img, segments, k_masks=k_masks, measure=measure, kernel=kernel,
            lambda_=lambda_, target_class=target_class, top_m=top_m,
            keep_probability=keep_probability, seed=seed,
        )
        payload = expl.to_dict()
        payload["top_segments"] = [[idx, coef] for idx, coef in top]
        _write_json(payload, prefix + ".json")
        render_heatmap(expl, segments, prefix + "_heatmap.png")
        render_segment_overlay(img, segments, [idx for idx, _ in top], prefix + "_overlay.png")
        _save_segment_ids(segments, prefix + "_segments.png")
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"top segments: {[idx for idx, _ in top]}")
    click.echo(f"wrote {prefix}.json, {prefix}_heatmap.png, {prefix}_overlay.png, {prefix}_segments.png")


def _save_segment_ids(segments, path):
    from PIL import Image as PILImage

    if segments.n_segments > 256:
        raise ValueError("cannot store more than 256 segment ids in a PNG id map")
    PILImage.fromarray(segments.labels.astype(np.uint8), mode="L").save(path)


@main.command("stability")
@click.option("--config", "config_path", default=None)
@click.option("--model", "model_spec", default=None)
@click.option("--point", default=None)
@click.option("--measure", default=None, type=click.Choice(ALL_MEASURES))
@click.option("--sweep-measures", is_flag=True, default=False,
              help="Run every ECDF measure plus the Euclidean baseline.")
@click.option("--runs", type=int, default=None, help="Repetitions (>= 2).")
@click.option("--k", "top_k", type=int, default=None, help="Top-k set size (>= 1).")
@click.option("--n-primary", type=int, default=None)
@click.option("--m-local", type=int, default=None)
@click.option("--sigma1", type=float, default=None)
@click.option("--sigma2", type=float, default=None)
@click.option("--lambda", "lambda_", type=float, default=None)
@click.option("--target-class", type=int, default=None)
@click.option("--seed", type=int, default=None, help="Base seed; run i uses seed + i.")
@click.option("--output-dir", default=None)
def cmd_stability(config_path, model_spec, point, measure, sweep_measures, runs, top_k,
                  n_primary, m_local, sigma1, sigma2, lambda_, target_class, seed, output_dir):
    """Repeat an explanation across seeds and report top-k Jaccard stability."""
    cfg = _load_config(config_path)
    model_spec = _pick(model_spec, cfg, "model", "mars")
    point = _pick(point, cfg, "point", None)
    if point is None:
        raise click.UsageError("missing required parameter: point")
    x = _parse_point(point) if isinstance(point, str) else np.asarray(point, dtype=np.float64)
    runs = int(_pick(runs, cfg, "runs", 20))
    top_k = int(_pick(top_k, cfg, "k", 2))
    seed = int(_pick(seed, cfg, "seed", 0))
    lambda_ = float(_pick(lambda_, cfg, "lambda", 1e-6))
    target_class = _pick(target_class, cfg, "target_class", None)
    output_dir = _pick(output_dir, cfg, "output_dir", "stability_out")
    if runs < 2:
        raise click.UsageError("runs must be >= 2")
    try:
        pcfg = TabularPerturbationConfig(
            n_primary=int(_pick(n_primary, cfg, "n_primary", 1000)),
            m_local=int(_pick(m_local, cfg, "m_local", 50)),
            sigma1=float(_pick(sigma1, cfg, "sigma1", 1.0)),
            sigma2=_pick(sigma2, cfg, "sigma2", None),
            seed=seed,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))

    if sweep_measures or cfg.get("sweep_measures"):
        measures = [m for m in DistanceMeasure if m is not DistanceMeasure.COSINE]
    else:
        measures = [DistanceMeasure.from_name(_pick(measure, cfg, "measure", "wasserstein"))]

    model = _build_tabular_model(model_spec, target_class)
    if model.is_classifier and target_class is None:
        target_class = 1 if model.n_classes == 2 else 0
    os.makedirs(output_dir, exist_ok=True)
    seeds = [seed + i for i in range(runs)]
    for m in measures:
        try:
            report = stability_experiment(
                model, x, pcfg, m, runs, top_k, seeds, lambda_=lambda_, target_class=target_class
            )
        except Exception as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        tag = m.value.replace("-", "_")
        _write_json(report.to_dict(), os.path.join(output_dir, f"stability_{tag}.json"))
        with open(os.path.join(output_dir, f"coefficients_{tag}.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed"] + [f"coef_{i}" for i in range(x.size)])
            for s, row in zip(seeds, report.coefficients):
                writer.writerow([s] + row)
        click.echo(f"{m.value}: mean_jaccard={report.mean_jaccard:.4f} ({len(report.pairwise_jaccards)} pairs)")
    click.echo(f"wrote reports to {output_dir}")


@main.command("evaluate")
@click.option("--config", "config_path", default=None)
@click.option("--explanation", "expl_path", default=None, help="Explanation JSON to score.")
@click.option("--mask", "mask_path", default=None, help="Ground-truth PNG (pixel value = class id).")
@click.option("--segments", "segments_path", default=None, help="Segment id PNG from explain-image.")
@click.option("--coi", type=int, default=None, help="Class of interest id in the mask.")
@click.option("--unrelated-index", type=int, default=None, help="Feature index for the robustness ratio.")
@click.option("--output", default=None)
def cmd_evaluate(config_path, expl_path, mask_path, segments_path, coi, unrelated_index, output):
    """Score a saved explanation: coverage, weighted coverage, robustness ratio."""
    cfg = _load_config(config_path)
    expl_path = _pick(expl_path, cfg, "explanation", None)
    if expl_path is None:
        raise click.UsageError("missing required parameter: explanation")
    if not os.path.exists(expl_path):
        raise click.UsageError(f"explanation file not found: {expl_path}")
    with open(expl_path) as fh:
        expl = json.load(fh)
    coefs = np.asarray(expl["coefficients"], dtype=np.float64)

    mask_path = _pick(mask_path, cfg, "mask", None)
    segments_path = _pick(segments_path, cfg, "segments", None)
    coi = _pick(coi, cfg, "coi", None)
    unrelated_index = _pick(unrelated_index, cfg, "unrelated_index", None)
    output = _pick(output, cfg, "output", "metrics.json")
    if mask_path is None and unrelated_index is None:
        raise click.UsageError("supply a mask (with --coi) and/or an unrelated-index")

    metrics: dict = {"schema_version": 1}
    if mask_path is not None:
        if coi is None:
            raise click.UsageError("missing required parameter: coi")
        if not os.path.exists(mask_path):
            raise click.UsageError(f"mask file not found: {mask_path}")
        if segments_path is None:
            raise click.UsageError("missing required parameter: segments (segment id PNG)")
        from PIL import Image as PILImage

        mask_ids = np.asarray(PILImage.open(mask_path).convert("L"), dtype=np.int64)
        seg_ids = np.asarray(PILImage.open(segments_path).convert("L"), dtype=np.int64)
        if mask_ids.shape != seg_ids.shape:
            raise click.UsageError("mask dimensions do not match the segment map")
        try:
            from .segmentation import SuperpixelMap

            segments = SuperpixelMap(labels=seg_ids, n_segments=int(seg_ids.max()) + 1)
            gtm = GroundTruthMask(labels=mask_ids, coi=int(coi))
            pixels = coefficients_to_pixels(coefs, segments)
            metrics["coverage"] = coverage(pixels, gtm)
            metrics["weighted_coverage"] = weighted_coverage(pixels, gtm)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    if unrelated_index is not None:
        try:
            metrics["robustness_ratio"] = robustness_ratio(coefs, int(unrelated_index))
        except ValueError as exc:
            raise click.UsageError(str(exc))

    _write_json(metrics, output)
    for key in sorted(metrics):
        if key != "schema_version":
            click.echo(f"{key}: {metrics[key]:.6f}")
    click.echo(f"wrote {output}")


if __name__ == "__main__":  # pragma: no cover
    main()
