"""Command-line pipeline: synthdata -> extract -> train -> eval -> report.

Configuration resolves as defaults < config file < explicit flags, and the
fully resolved document is written next to the outputs. All randomness
derives from the single resolved seed. Exit codes: 0 success, 2 usage
error, 3 data/format error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import container
from .contrastive import (
    PairDataset,
    PairEntry,
    TrainConfig,
    cross_modal_retrieval,
    train,
)
from .cube import (
    DatasetManifest,
    ManifestEntry,
    load_manifest,
    read_cube,
    read_labels,
    save_manifest,
    write_cube,
    write_labels,
)
from .downstream import (
    ProbeConfig,
    classify_landcover,
    classify_pixels,
    compare_runs,
    forecast_index,
    labeled_pixel_set,
    merge_plot_sets,
    MetricsReport,
)
from .encoder import EncoderConfig, load_params
from .errors import ConfigError, DomainError, FormatError, NumericalError, PimcError
from .patches import Patch, load_series_set, save_series_set, slice_patches, extract_patch_series
from .recurrence import bilinear_resize, rp_batch
from .svg import bar_chart, line_chart
from .synth import synth_cube

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


# ---------------------------------------------------------------------------
# configuration resolution

DEFAULTS = {
    "seed": 0,
    "out": "runs/latest",
    "workers": 1,
    "regions": 3,
    "val_regions": 1,
    "test_regions": 1,
    "classes": 4,
    "series_len": 32,
    "size": 64,
    "noise": 0.02,
    "phase_jitter": 1.0,
    "freq_jitter": 1.0,
    "ps": 32,
    "pixels": 150,
    "mode": "hilbert",
    "epochs": 40,
    "batch": 64,
    "lr": 1e-3,
    "weight_decay": 1e-4,
    "temp_init": 0.07,
    "preset": "desk",
    "input_size": 32,
    "embed_dim": 64,
    "checkpoint_cadence": 20,
    "task": "pixel-cls",
    "probe": "frozen",
    "probe_epochs": 100,
    "pixels_per_cube": 200,
    "context": 32,
    "horizon": 10,
    "timestep": -1,
}


def _parse_value(raw: str):
    text = raw.strip()
    for caster in (int, float):
        try:
            return caster(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def load_config_file(path: str) -> dict:
    """Flat `key = value` document; '#' starts a comment."""
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                out[key.strip().replace("-", "_")] = _parse_value(value)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    unknown = set(out) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    file_cfg = load_config_file(args.config) if getattr(args, "config", None) else {}
    resolved = dict(DEFAULTS)
    resolved.update(file_cfg)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
    if resolved["mode"] not in ("hilbert", "random"):
        raise DomainError(f"--mode must be hilbert or random, got {resolved['mode']}")
    if resolved["workers"] != 1:
        resolved["workers"] = 1  # internal parallelism not enabled; keep runs deterministic
    return resolved


def write_resolved(cfg: dict, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    lines = [f"{k} = {cfg[k]}" for k in sorted(cfg)]
    with open(os.path.join(out_dir, "config.resolved"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# stages


def cmd_synthdata(cfg: dict) -> int:
    out_dir = os.path.join(cfg["out"], "cubes")
    os.makedirs(out_dir, exist_ok=True)
    total = cfg["regions"] + cfg["val_regions"] + cfg["test_regions"]
    splits = (
        ["train"] * cfg["regions"] + ["val"] * cfg["val_regions"] + ["test"] * cfg["test_regions"]
    )
    entries = []
    for i in range(total):
        region = f"region{i:02d}"
        cube, labels = synth_cube(
            seed=cfg["seed"] * 1000 + i,
            classes=cfg["classes"],
            t=cfg["series_len"],
            h=cfg["size"],
            w=cfg["size"],
            noise=cfg["noise"],
            phase_jitter=cfg["phase_jitter"],
            freq_jitter=cfg["freq_jitter"],
            region_id=region,
        )
        cube_file = f"{region}.pimc"
        label_file = f"{region}_labels.pimc"
        write_cube(cube, os.path.join(out_dir, cube_file))
        write_labels(labels, os.path.join(out_dir, label_file))
        entries.append(
            ManifestEntry(cube=cube_file, region_id=region, split=splits[i], labels=label_file)
        )
    save_manifest(DatasetManifest(entries=entries), os.path.join(out_dir, "manifest.json"))
    write_resolved(cfg, cfg["out"])
    print(f"wrote {total} cubes to {out_dir}")
    return EXIT_OK


def _cubes_dir(cfg):
    return cfg.get("data") or os.path.join(cfg["out"], "cubes")


def cmd_extract(cfg: dict) -> int:
    cubes_dir = _cubes_dir(cfg)
    manifest = load_manifest(os.path.join(cubes_dir, "manifest.json"))
    out_dir = os.path.join(cfg["out"], "extract")
    os.makedirs(out_dir, exist_ok=True)
    n_series = 0
    for entry in manifest.regions():
        if entry.split == "test":
            continue  # test pixels stay untouched until evaluation
        cube = read_cube(os.path.join(cubes_dir, entry.cube))
        grid = slice_patches(cube, cfg["ps"])
        region_dir = os.path.join(out_dir, entry.region_id)
        os.makedirs(region_dir, exist_ok=True)
        for pi, patch in enumerate(grid.patches):
            sset = extract_patch_series(
                cube, patch, cfg["ps"], cfg["mode"], cfg["pixels"], seed=[cfg["seed"], 5, pi]
            )
            base = os.path.join(region_dir, f"patch_{patch.row0:04d}_{patch.col0:04d}")
            save_series_set(sset, base + ".series.pimc")
            plots = rp_batch(sset)  # native n x n planes; resized at train time
            container.write_tensor(
                base + ".rp.pimc",
                plots,
                ["ndvi", "evi", "savi"],
                list(range(plots.shape[0])),
            )
            n_series += sset.m
    meta = {
        "ps": cfg["ps"],
        "pixels": cfg["pixels"],
        "mode": cfg["mode"],
        "seed": cfg["seed"],
        "cubes_dir": os.path.relpath(cubes_dir, out_dir),
    }
    with open(os.path.join(out_dir, "extract.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_resolved(cfg, cfg["out"])
    print(f"extracted {n_series} pixel series to {out_dir}")
    return EXIT_OK


def _load_pair_dataset(extract_dir: str, input_size: int, split: str) -> PairDataset:
    meta_path = os.path.join(extract_dir, "extract.json")
    if not os.path.isfile(meta_path):
        raise ConfigError(f"not an extract directory (missing extract.json): {extract_dir}")
    with open(meta_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    cubes_dir = os.path.normpath(os.path.join(extract_dir, meta["cubes_dir"]))
    manifest = load_manifest(os.path.join(cubes_dir, "manifest.json"))
    cubes, entries = {}, []
    for m_entry in manifest.regions(split):
        region_dir = os.path.join(extract_dir, m_entry.region_id)
        if not os.path.isdir(region_dir):
            continue
        cube = read_cube(os.path.join(cubes_dir, m_entry.cube))
        cubes[m_entry.region_id] = cube
        for fname in sorted(os.listdir(region_dir)):
            if not fname.endswith(".series.pimc"):
                continue
            sset = load_series_set(os.path.join(region_dir, fname))
            rp_path = os.path.join(region_dir, fname.replace(".series.pimc", ".rp.pimc"))
            plots, _, _ = container.read_tensor(rp_path)
            patch = Patch(m_entry.region_id, sset.patch.row0, sset.patch.col0)
            for k in range(sset.m):
                entries.append(
                    PairEntry(
                        patch=patch,
                        pixel=sset.pixels[k],
                        plot=bilinear_resize(plots[k], input_size),
                    )
                )
    if not entries:
        raise ConfigError(f"no extracted series for split '{split}' under {extract_dir}")
    return PairDataset(cubes, entries, meta["ps"], input_size)


def cmd_train(cfg: dict) -> int:
    extract_dir = cfg.get("data") or os.path.join(cfg["out"], "extract")
    if cfg["preset"] == "paper":
        encoder = EncoderConfig(input_size=cfg["input_size"], embed_dim=cfg["embed_dim"])
        epochs = cfg["epochs"] if cfg["epochs"] is not None else 400
    else:
        encoder = EncoderConfig.desk(input_size=cfg["input_size"], embed_dim=cfg["embed_dim"])
        epochs = cfg["epochs"]
    dataset = _load_pair_dataset(extract_dir, encoder.input_size, "train")
    try:
        val_dataset = _load_pair_dataset(extract_dir, encoder.input_size, "val")
    except ConfigError:
        val_dataset = None
    config = TrainConfig(
        epochs=epochs,
        lr=cfg["lr"],
        weight_decay=cfg["weight_decay"],
        batch_size=cfg["batch"],
        temp_init=cfg["temp_init"],
        seed=cfg["seed"],
        checkpoint_cadence=cfg["checkpoint_cadence"],
        encoder=encoder,
    )
    out_dir = os.path.join(cfg["out"], "train")
    result = train(dataset, config, out_dir=out_dir, val_dataset=val_dataset)
    write_resolved(cfg, cfg["out"])
    retrieval = None
    if val_dataset is not None:
        retrieval = cross_modal_retrieval(
            result.image_encoder, result.series_encoder, val_dataset, seed=cfg["seed"]
        )
        with open(os.path.join(out_dir, "retrieval.json"), "w", encoding="utf-8") as fh:
            json.dump({"val_top1": retrieval}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    last = result.state.loss_history[-1] if result.state.loss_history else float("nan")
    msg = f"trained {config.epochs} epochs, final loss {last:.4f}"
    if retrieval is not None:
        msg += f", val retrieval top-1 {retrieval:.3f}"
    print(msg)
    return EXIT_OK


def _load_encoder(path: str):
    if not os.path.isfile(path):
        raise ConfigError(f"checkpoint not found: {path}")
    encoder, meta = load_params(path)
    return encoder, meta


def _labeled_sets(cfg, cubes_dir, manifest, input_size, splits, exclude_hilbert):
    sets = []
    for entry in manifest.entries:
        if entry.split not in splits:
            continue
        if entry.labels is None:
            raise ConfigError(f"region '{entry.region_id}' has no label raster")
        cube = read_cube(os.path.join(cubes_dir, entry.cube))
        labels = read_labels(os.path.join(cubes_dir, entry.labels))
        sets.append(
            labeled_pixel_set(
                cube,
                labels,
                ps=cfg["ps"],
                input_size=input_size,
                pixels_per_cube=cfg["pixels_per_cube"],
                seed=cfg["seed"],
                exclude_hilbert_m=exclude_hilbert,
            )
        )
    if not sets:
        raise ConfigError(f"no regions in splits {splits}")
    return merge_plot_sets(sets)


def _landcover_arrays(cfg, cubes_dir, manifest, input_size, splits, rng):
    images, labels = [], []
    for entry in manifest.entries:
        if entry.split not in splits:
            continue
        cube = read_cube(os.path.join(cubes_dir, entry.cube))
        raster = read_labels(os.path.join(cubes_dir, entry.labels)) if entry.labels else None
        grid = slice_patches(cube, cfg["ps"])
        band_idx = [0, 1, 2]
        for patch in grid.patches:
            ts = int(rng.integers(0, cube.t))
            crop = cube.data[ts, band_idx, patch.row0 : patch.row0 + cfg["ps"], patch.col0 : patch.col0 + cfg["ps"]]
            images.append(bilinear_resize(crop, input_size))
            if raster is None:
                raise ConfigError("landcover evaluation without --images needs label rasters")
            window = raster[patch.row0 : patch.row0 + cfg["ps"], patch.col0 : patch.col0 + cfg["ps"]]
            labels.append(int(np.bincount(window.reshape(-1)).argmax()))
    return np.stack(images).astype(np.float32), np.asarray(labels, dtype=np.int64)


def cmd_eval(cfg: dict) -> int:
    task = cfg["task"]
    if task not in ("pixel-cls", "forecast", "landcover"):
        raise DomainError(f"--task must be pixel-cls, forecast, or landcover, got {task}")
    cubes_dir = _cubes_dir(cfg)
    manifest = load_manifest(os.path.join(cubes_dir, "manifest.json"))
    default_ckpt = "image_final.ckpt" if task == "landcover" else "series_final.ckpt"
    ckpt = cfg.get("checkpoint") or os.path.join(cfg["out"], "train", default_ckpt)
    encoder, _meta = _load_encoder(ckpt)
    probe = ProbeConfig(
        epochs=cfg["probe_epochs"],
        seed=cfg["seed"],
        finetune=(cfg["probe"] == "finetune"),
    )
    input_size = encoder.config.input_size
    if task == "pixel-cls":
        train_set = _labeled_sets(cfg, cubes_dir, manifest, input_size, ("train", "val"), cfg["pixels"])
        test_set = _labeled_sets(cfg, cubes_dir, manifest, input_size, ("test",), None)
        report = classify_pixels(encoder, train_set, test_set, probe, model=f"pimc-{cfg['probe']}")
    elif task == "forecast":
        train_set = _labeled_sets(cfg, cubes_dir, manifest, input_size, ("train", "val"), cfg["pixels"])
        test_set = _labeled_sets(cfg, cubes_dir, manifest, input_size, ("test",), None)
        report = forecast_index(
            encoder,
            train_set.series,
            test_set.series,
            probe,
            horizon=cfg["horizon"],
            context=cfg["context"],
            model=f"pimc-{cfg['probe']}",
        )
    else:
        if cfg.get("images"):
            from .importers import import_image_folder

            images, labels, _names = import_image_folder(cfg["images"], input_size)
            rng = np.random.default_rng([cfg["seed"], 23])
            order = rng.permutation(len(images))
            cut = max(1, int(0.8 * len(images)))
            tr, te = order[:cut], order[cut:]
            report = classify_landcover(
                encoder, images[tr], labels[tr], images[te], labels[te], probe,
                model=f"pimc-{cfg['probe']}",
            )
        else:
            rng = np.random.default_rng([cfg["seed"], 29])
            tr_imgs, tr_labels = _landcover_arrays(cfg, cubes_dir, manifest, input_size, ("train", "val"), rng)
            te_imgs, te_labels = _landcover_arrays(cfg, cubes_dir, manifest, input_size, ("test",), rng)
            report = classify_landcover(
                encoder, tr_imgs, tr_labels, te_imgs, te_labels, probe, model=f"pimc-{cfg['probe']}"
            )
    out_dir = os.path.join(cfg["out"], "eval", task)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "metrics.json"), "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8") as fh:
        fh.write(report.to_csv())
    if report.confusion is not None:
        with open(os.path.join(out_dir, "confusion.csv"), "w", encoding="utf-8") as fh:
            fh.write(report.confusion_csv())
    write_resolved(cfg, cfg["out"])
    headline = report.acc if report.acc is not None else report.mae
    print(f"{task}: wrote metrics to {out_dir} (headline {headline:.4f})")
    return EXIT_OK


def cmd_embed(cfg: dict) -> int:
    ckpt = cfg.get("checkpoint") or os.path.join(cfg["out"], "train", "image_final.ckpt")
    encoder, _ = _load_encoder(ckpt)
    source = cfg.get("input")
    if not source:
        raise DomainError("embed needs --input (a cube file or an image folder)")
    input_size = encoder.config.input_size
    from .downstream import embed_batches

    if os.path.isdir(source):
        from .importers import import_image_folder

        images, labels, names = import_image_folder(source, input_size)
        feats = embed_batches(encoder, images)
        meta = {"source": "image-folder", "classes": names, "labels": labels.tolist()}
    else:
        cube = read_cube(source)
        grid = slice_patches(cube, cfg["ps"])
        ts = cfg["timestep"] if cfg["timestep"] >= 0 else cube.t // 2
        crops = [
            bilinear_resize(
                cube.data[ts, :3, p.row0 : p.row0 + cfg["ps"], p.col0 : p.col0 + cfg["ps"]],
                input_size,
            )
            for p in grid.patches
        ]
        feats = embed_batches(encoder, np.stack(crops))
        meta = {
            "source": "cube-patches",
            "timestep": ts,
            "patches": [[p.row0, p.col0] for p in grid.patches],
        }
    os.makedirs(cfg["out"], exist_ok=True)
    path = os.path.join(cfg["out"], "embeddings.pimc")
    container.write_tensor(
        path,
        feats[:, :, None, None],
        [f"d{i}" for i in range(feats.shape[1])],
        list(range(len(feats))),
    )
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {feats.shape[0]} embeddings of dim {feats.shape[1]} to {path}")
    return EXIT_OK


def cmd_report(cfg: dict) -> int:
    inputs = cfg.get("inputs") or [cfg["out"]]
    reports: list[MetricsReport] = []
    loss_curves: dict[str, list[float]] = {}
    for root in inputs:
        for dirpath, _dirnames, filenames in sorted(os.walk(root)):
            if "metrics.json" in filenames:
                with open(os.path.join(dirpath, "metrics.json"), "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
                reports.append(MetricsReport(**doc))
            if "loss.csv" in filenames:
                losses = []
                with open(os.path.join(dirpath, "loss.csv"), "r", encoding="utf-8") as fh:
                    next(fh)
                    for line in fh:
                        losses.append(float(line.split(",")[2]))
                loss_curves[os.path.relpath(dirpath, root) or "train"] = losses
    out_dir = os.path.join(cfg["out"], "report")
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "comparison.csv"), "w", encoding="utf-8") as fh:
        fh.write(compare_runs(reports))
    if reports:
        acc_reports = [r for r in reports if r.acc is not None]
        if acc_reports:
            chart = bar_chart(
                [f"{r.task_id}:{r.model}" for r in acc_reports],
                [r.acc for r in acc_reports],
                "accuracy by run",
            )
            with open(os.path.join(out_dir, "accuracy.svg"), "w", encoding="utf-8") as fh:
                fh.write(chart)
    if loss_curves:
        with open(os.path.join(out_dir, "loss.svg"), "w", encoding="utf-8") as fh:
            fh.write(line_chart(loss_curves, "training loss"))
    print(f"report over {len(reports)} metric files -> {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument surface


def build_parser() -> argparse.ArgumentParser:
    # one stable flag surface shared by every stage; stages read the keys
    # they need from the resolved configuration
    stable = argparse.ArgumentParser(add_help=False)
    stable.add_argument("--config", help="key = value configuration file")
    stable.add_argument("--seed", type=int, help="root seed for the whole run")
    stable.add_argument("--out", help="output directory (default runs/latest)")
    stable.add_argument("--workers", type=int, help="worker count; 1 keeps runs fully deterministic")
    stable.add_argument("--ps", type=int, help="patch side in pixels")
    stable.add_argument("--pixels", type=int, help="sampled pixels per patch")
    stable.add_argument("--series-len", dest="series_len", type=int, help="timestamps per cube")
    stable.add_argument("--epochs", type=int)
    stable.add_argument("--batch", type=int)
    stable.add_argument("--lr", type=float)
    stable.add_argument("--weight-decay", dest="weight_decay", type=float)
    stable.add_argument("--temp-init", dest="temp_init", type=float)
    stable.add_argument("--mode", choices=("hilbert", "random"), help="pixel sampling mode")
    stable.add_argument("--task", choices=("pixel-cls", "forecast", "landcover"))
    stable.add_argument("--regions", type=int, help="number of train regions")
    stable.add_argument("--val-regions", dest="val_regions", type=int)
    stable.add_argument("--test-regions", dest="test_regions", type=int)
    stable.add_argument("--classes", type=int)
    stable.add_argument("--size", type=int, help="cube height and width")
    stable.add_argument("--noise", type=float)
    stable.add_argument("--phase-jitter", dest="phase_jitter", type=float)
    stable.add_argument("--freq-jitter", dest="freq_jitter", type=float)
    stable.add_argument("--preset", choices=("desk", "paper"))
    stable.add_argument("--input-size", dest="input_size", type=int)
    stable.add_argument("--embed-dim", dest="embed_dim", type=int)
    stable.add_argument("--checkpoint-cadence", dest="checkpoint_cadence", type=int)
    stable.add_argument("--probe", choices=("frozen", "finetune"))
    stable.add_argument("--probe-epochs", dest="probe_epochs", type=int)
    stable.add_argument("--pixels-per-cube", dest="pixels_per_cube", type=int)
    stable.add_argument("--context", type=int)
    stable.add_argument("--horizon", type=int)
    stable.add_argument("--timestep", type=int, help="cube timestep to embed (default middle)")

    parser = argparse.ArgumentParser(
        prog="pimc",
        description="pixel-wise multimodal contrastive pipeline over satellite image time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthdata", parents=[stable], help="generate synthetic labeled cubes")
    p = sub.add_parser("extract", parents=[stable], help="patch, sample, and build series + plots")
    p.add_argument("--data", help="cubes directory (default <out>/cubes)")
    p = sub.add_parser("train", parents=[stable], help="contrastive training of both encoders")
    p.add_argument("--data", help="extract directory (default <out>/extract)")
    p = sub.add_parser("eval", parents=[stable], help="downstream evaluation of a checkpoint")
    p.add_argument("--data", help="cubes directory (default <out>/cubes)")
    p.add_argument("--checkpoint", help="encoder checkpoint path")
    p.add_argument("--images", help="image folder for landcover (class subdirectories)")
    p = sub.add_parser("embed", parents=[stable], help="write embeddings for a cube or image folder")
    p.add_argument("--checkpoint", help="encoder checkpoint path")
    p.add_argument("--input", help="cube file or image folder")
    p = sub.add_parser("report", parents=[stable], help="comparison table and SVG plots")
    p.add_argument("--inputs", nargs="*", help="run directories to scan (default <out>)")

    return parser


COMMANDS = {
    "synthdata": cmd_synthdata,
    "extract": cmd_extract,
    "train": cmd_train,
    "eval": cmd_eval,
    "embed": cmd_embed,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        for passthrough in ("data", "checkpoint", "images", "input", "inputs"):
            if getattr(args, passthrough, None) is not None:
                cfg[passthrough] = getattr(args, passthrough)
        return COMMANDS[args.command](cfg)
    except DomainError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FormatError, ConfigError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_DATA
    except PimcError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
