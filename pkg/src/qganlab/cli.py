"""Command-line pipeline: ingest, train, analyze, render.

Subcommands
-----------
ingest   parse IDX or CSV image data into the QGDS dataset container
train    fit one of the three architectures, writing params.json,
         loss.csv and generated-image snapshots at the logging cadence
bounds   build the class density matrix, evaluate the distinguishability
         report against a trained or eigenvector generator
toy      run the classical-vs-quantum toy comparison
render   decode a trained generator into a PGM image
probe    push a seeded random feature draw through a PCA inverse map

``train`` accepts a flat ``key=value`` config file (``--config``); flags
override file values, unknown keys are rejected by name.  Every command
is deterministic given its seed, exits 0 only on success, and reports
errors with the failing file or key.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .bounds import BoundReport, best_pure_generator, bound_report
from .datapipe import (
    ImageDataset,
    filter_classes,
    load_csv,
    load_dataset,
    load_idx,
    load_pca,
    pca_fit,
    pca_from_json,
    pca_inverse,
    pca_to_json,
    pca_transform,
    random_inverse_probe,
    save_dataset,
    save_pca,
    write_pgm,
)
from .embedding import angle_decode, qubit_marginal_features, state_matrix_from_angles
from .models import (
    IqganModel,
    ProductIqgan,
    QuganModel,
    generator_state,
    model_from_json,
    model_to_json,
    product_iqgan_image,
)
from .qcore import StateVector
from .toycompare import run_comparison
from .training import TrainConfig, train_iqgan, train_product, train_qugan

ARCHES = ("iqgan", "qugan", "product")


# ---------------------------------------------------------------------------
# run configuration: flat key=value file merged with flag overrides
# ---------------------------------------------------------------------------


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_classes(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(c) for c in text]
    try:
        return [int(part) for part in str(text).split(",") if part.strip() != ""]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None


CONFIG_KEYS = {
    "arch": str,
    "dataset": str,
    "out": str,
    "classes": _parse_classes,
    "pca": int,
    "qubits": int,
    "depth": int,
    "topology": str,
    "angle_scale": float,
    "trainable_encoder": _parse_bool,
    "disc_steps": int,
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
    "optimizer": str,
    "beta1": float,
    "beta2": float,
    "adam_eps": float,
    "seed": int,
    "log_every_batches": int,
    "noise": str,
    "init_scale": float,
    "rescale_swap": _parse_bool,
    "saturating": _parse_bool,
}

TRAIN_CONFIG_KEYS = (
    "epochs",
    "batch_size",
    "learning_rate",
    "optimizer",
    "beta1",
    "beta2",
    "adam_eps",
    "seed",
    "log_every_batches",
    "noise",
    "init_scale",
    "rescale_swap",
    "saturating",
)


def read_config_file(path) -> dict:
    """Parse a flat key=value document; unknown keys are rejected by name."""
    doc: dict = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, value = stripped.partition("=")
            if not sep:
                raise ValueError(
                    f"{path}:{lineno}: expected key=value, got {stripped!r}"
                )
            key = key.strip()
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                doc[key] = CONFIG_KEYS[key](value.strip())
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: config key {key!r}: {exc}") from None
    return doc


def merge_run_config(file_doc: dict, overrides: dict) -> dict:
    """File values first, explicit flag values on top."""
    for key in file_doc:
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
    merged = dict(file_doc)
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        merged[key] = value
    return merged


def _train_config(doc: dict) -> TrainConfig:
    kwargs = {key: doc[key] for key in TRAIN_CONFIG_KEYS if key in doc}
    return TrainConfig(**kwargs)


def _require(doc: dict, key: str, command: str):
    if doc.get(key) is None:
        raise ValueError(f"{command} requires --{key.replace('_', '-')} (config key {key!r})")
    return doc[key]


def _conflict(doc: dict, key: str, arch: str, why: str) -> None:
    if doc.get(key) is not None:
        raise ValueError(f"config conflict: {key!r} with arch={arch!r} ({why})")


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    if args.csv is not None and (args.idx_images or args.idx_labels):
        raise ValueError("config conflict: --csv excludes --idx-images/--idx-labels")
    if args.csv is None and not (args.idx_images and args.idx_labels):
        raise ValueError("ingest needs --csv or both --idx-images and --idx-labels")
    if args.csv is not None:
        try:
            dataset = load_csv(args.csv)
        except ValueError as exc:
            raise ValueError(f"{args.csv}: {exc}") from None
    else:
        try:
            dataset = load_idx(args.idx_images, args.idx_labels)
        except ValueError as exc:
            raise ValueError(f"{args.idx_images}: {exc}") from None
    save_dataset(args.out, dataset)
    print(
        f"wrote {len(dataset.labels)} {dataset.width}x{dataset.height} "
        f"images to {args.out}"
    )
    return 0


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def _load_training_data(doc: dict) -> ImageDataset:
    dataset = load_dataset(_require(doc, "dataset", "train"))
    classes = doc.get("classes")
    if classes:
        dataset = filter_classes(dataset, classes)
    return dataset


def _register_width(doc: dict) -> int:
    """Reconcile the pca feature count with the register width."""
    pca_k, qubits = doc.get("pca"), doc.get("qubits")
    if pca_k is not None and qubits is not None and pca_k != qubits:
        raise ValueError(
            f"config conflict: pca={pca_k} but qubits={qubits} "
            "(the register holds one feature per qubit)"
        )
    width = pca_k if pca_k is not None else qubits
    return 4 if width is None else int(width)


def _snapshot_writer(out_dir, width, height, render):
    def on_log(batch: int, snapshot) -> None:
        pixels = np.clip(render(snapshot), 0.0, 1.0)
        write_pgm(
            os.path.join(out_dir, f"sample_{batch:06d}.pgm"),
            pixels.reshape(height, width),
        )

    return on_log


def _write_params(path, doc: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def cmd_train(args) -> int:
    file_doc = read_config_file(args.config) if args.config else {}
    overrides = {
        key: getattr(args, key, None)
        for key in CONFIG_KEYS
        if getattr(args, key, None) is not None
    }
    doc = merge_run_config(file_doc, overrides)
    arch = _require(doc, "arch", "train")
    if arch not in ARCHES:
        raise ValueError(f"unknown architecture {arch!r}, expected one of {ARCHES}")
    out_dir = _require(doc, "out", "train")
    dataset = _load_training_data(doc)
    cfg = _train_config(doc)
    os.makedirs(out_dir, exist_ok=True)

    if arch == "product":
        for key, why in (
            ("pca", "the product model trains on raw pixels"),
            ("qubits", "one qubit per pixel is implied"),
            ("depth", "the product model has a single rotation layer"),
            ("disc_steps", "the product model has no discriminator"),
            ("trainable_encoder", "the product model has no encoder register"),
        ):
            _conflict(doc, key, arch, why)
        model = ProductIqgan(
            dataset.width * dataset.height, doc.get("angle_scale", math.pi)
        )
        on_log = _snapshot_writer(
            out_dir,
            dataset.width,
            dataset.height,
            lambda theta: product_iqgan_image(model, theta),
        )
        theta, trace = train_product(model, dataset.pixels, cfg, on_log=on_log)
        params_doc = {
            "model": model_to_json(model),
            "params": theta.tolist(),
            "width": dataset.width,
            "height": dataset.height,
        }
    else:
        width = _register_width(doc)
        pca_model = pca_fit(dataset.pixels, width)
        feats = pca_transform(pca_model, dataset.pixels)
        save_pca(os.path.join(out_dir, "pca.json"), pca_model)
        depth = doc.get("depth", 2)
        common = dict(
            n_qubits=width,
            depth=depth,
            angle_scale=doc.get("angle_scale", math.pi),
            topology=doc.get("topology", "chain"),
        )

        def render_gen(gen_params):
            state = generator_state(model, gen_params)
            marginals = qubit_marginal_features(state, model.embedding.angle_scale)
            return pca_inverse(pca_model, marginals)

        if arch == "iqgan":
            _conflict(doc, "disc_steps", arch, "the swap test is the discriminator")
            model = IqganModel(
                trainable_encoder=doc.get("trainable_encoder", False), **common
            )
            on_log = _snapshot_writer(
                out_dir,
                dataset.width,
                dataset.height,
                lambda params: render_gen(params[: model.n_gen_params]),
            )
            params, trace = train_iqgan(model, feats, cfg, on_log=on_log)
            params_doc = {
                "model": model_to_json(model),
                "params": params.tolist(),
                "pca": pca_to_json(pca_model),
                "width": dataset.width,
                "height": dataset.height,
            }
        else:
            _conflict(doc, "trainable_encoder", arch, "qugan encodes data directly")
            model = QuganModel(**common)
            on_log = _snapshot_writer(
                out_dir,
                dataset.width,
                dataset.height,
                lambda snapshot: render_gen(snapshot[1]),
            )
            disc_params, gen_params, trace = train_qugan(
                model, feats, cfg, disc_steps=doc.get("disc_steps", 1), on_log=on_log
            )
            params_doc = {
                "model": model_to_json(model),
                "disc_params": disc_params.tolist(),
                "gen_params": gen_params.tolist(),
                "pca": pca_to_json(pca_model),
                "width": dataset.width,
                "height": dataset.height,
            }

    trace.to_csv(os.path.join(out_dir, "loss.csv"))
    _write_params(os.path.join(out_dir, "params.json"), params_doc)
    final = trace.rows[-1]
    print(
        f"trained {arch} for {cfg.epochs} epochs "
        f"({len(dataset.labels)} samples): final loss_g {final[2]:.6f}; "
        f"artifacts in {out_dir}"
    )
    return 0


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def _encoded_ensemble(dataset: ImageDataset, pca_k, raw: bool):
    """Encoded sample states (rows), their density matrix, and a pixel renderer."""
    if raw:
        pixels = dataset.pixels
        dim = 2 ** max(1, (pixels.shape[1] - 1).bit_length())
        padded = np.zeros((pixels.shape[0], dim))
        padded[:, : pixels.shape[1]] = pixels
        norms = np.linalg.norm(padded, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("cannot amplitude-embed an all-zero image")
        states = padded / norms[:, None]

        def to_pixels(vector: np.ndarray) -> np.ndarray:
            mags = np.abs(vector[: pixels.shape[1]])
            peak = mags.max()
            return mags / peak if peak > 0 else mags

        return states, to_pixels

    model = pca_fit(dataset.pixels, pca_k)
    feats = pca_transform(model, dataset.pixels)
    states = state_matrix_from_angles(math.pi * feats)

    def to_pixels(vector: np.ndarray) -> np.ndarray:
        state = StateVector(int(math.log2(len(vector))), vector.astype(complex))
        return pca_inverse(model, qubit_marginal_features(state))

    return states, to_pixels


def _generator_from_file(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if "model" not in doc:
        raise ValueError(f"{path}: missing 'model' entry")
    model = model_from_json(doc["model"])
    if isinstance(model, ProductIqgan):
        raise ValueError(
            f"{path}: the product model has no register generator to analyze"
        )
    if isinstance(model, QuganModel):
        gen_params = np.asarray(doc["gen_params"], dtype=float)
    else:
        gen_params = np.asarray(doc["params"], dtype=float)[: model.n_gen_params]
    return generator_state(model, gen_params).amplitudes


def cmd_bounds(args) -> int:
    if (args.pca is None) == (not args.raw):
        raise ValueError("bounds needs exactly one of --pca or --raw")
    if (args.generator is None) == (not args.eigen):
        raise ValueError("bounds needs exactly one of --generator or --eigen")
    dataset = load_dataset(args.dataset)
    if args.classes:
        dataset = filter_classes(dataset, _parse_classes(args.classes))
    states, to_pixels = _encoded_ensemble(dataset, args.pca, args.raw)
    rho = states.T @ states / len(states)

    lam_max, v_max = best_pure_generator(rho)
    if args.eigen:
        gamma = v_max.amplitudes
    else:
        gamma = _generator_from_file(args.generator)

    report = bound_report(rho, gamma, states)
    report.save(args.out)
    image_path = os.path.splitext(str(args.out))[0] + "_vmax.pgm"
    pixels = np.clip(to_pixels(v_max.amplitudes), 0.0, 1.0)
    write_pgm(image_path, pixels.reshape(dataset.height, dataset.width))
    print(report.format_table())
    print(f"report in {args.out}; leading-eigenvector image in {image_path}")
    return 0


# ---------------------------------------------------------------------------
# toy, render, probe
# ---------------------------------------------------------------------------


def cmd_toy(args) -> int:
    cfg = None
    if args.epochs is not None:
        cfg = TrainConfig(
            epochs=args.epochs, learning_rate=0.01, log_every_batches=40
        )
    report = run_comparison(
        args.seed, cfg=cfg, out_dir=args.out, net_depth=args.depth,
        ancillas=args.ancillas,
    )
    for name in sorted(report["mse_norm"]):
        print(
            f"{name}: params {report['param_counts'][name]}, "
            f"mse_norm {report['mse_norm'][name]:.3e}, "
            f"mse_raw {report['mse_raw'][name]:.3e}, "
            f"output_std {report['output_std'][name]:.3e}"
        )
    print(f"artifacts in {args.out}")
    return 0


def cmd_render(args) -> int:
    with open(args.params, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if "model" not in doc:
        raise ValueError(f"{args.params}: missing 'model' entry")
    arch = doc["model"].get("arch")
    if args.arch is not None and args.arch != arch:
        raise ValueError(
            f"config conflict: --arch {args.arch} but {args.params} holds {arch!r}"
        )
    model = model_from_json(doc["model"])
    width, height = doc.get("width"), doc.get("height")
    if width is None or height is None:
        raise ValueError(f"{args.params}: missing image dimensions")

    if isinstance(model, ProductIqgan):
        pixels = product_iqgan_image(model, np.asarray(doc["params"], dtype=float))
    else:
        if isinstance(model, QuganModel):
            gen_params = np.asarray(doc["gen_params"], dtype=float)
        else:
            gen_params = np.asarray(doc["params"], dtype=float)[: model.n_gen_params]
        state = generator_state(model, gen_params)
        try:
            feats = angle_decode(state, model.embedding.angle_scale)
        except ValueError:
            print(
                "note: generator state is entangled; rendering per-qubit marginals",
                file=sys.stderr,
            )
            feats = qubit_marginal_features(state, model.embedding.angle_scale)
        if "pca" not in doc:
            raise ValueError(f"{args.params}: missing 'pca' entry")
        pixels = pca_inverse(pca_from_json(doc["pca"]), feats)

    write_pgm(args.out, np.clip(pixels, 0.0, 1.0).reshape(height, width))
    print(f"rendered {arch} generator to {args.out}")
    return 0


def cmd_probe(args) -> int:
    model = load_pca(args.pca_model)
    features, pixels = random_inverse_probe(model, args.seed)
    print(
        json.dumps(
            {"features": features.tolist(), "pixels": pixels.tolist()},
            sort_keys=True,
        )
    )
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qganlab", description="quantum GAN training and analysis pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse IDX or CSV data into a QGDS container")
    p.add_argument("--idx-images", help="IDX image file (big-endian, u8 pixels)")
    p.add_argument("--idx-labels", help="IDX label file")
    p.add_argument("--csv", help="CSV file of label,p0,p1,... rows")
    p.add_argument("--out", required=True, help="output container path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train an architecture on a dataset container")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--arch", choices=ARCHES)
    p.add_argument("--dataset", help="QGDS container from ingest")
    p.add_argument("--classes", type=_parse_classes, help="labels to keep, e.g. 3,6,9")
    p.add_argument("--pca", type=int, help="number of PCA features")
    p.add_argument("--qubits", type=int, help="register width (defaults to pca)")
    p.add_argument("--depth", type=int, help="variational layers")
    p.add_argument("--topology", choices=("chain", "ring"))
    p.add_argument("--angle-scale", dest="angle_scale", type=float)
    p.add_argument(
        "--trainable-encoder",
        dest="trainable_encoder",
        action=argparse.BooleanOptionalAction,
        default=None,
    )
    p.add_argument("--disc-steps", dest="disc_steps", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--optimizer", choices=("adam", "sgd"))
    p.add_argument("--seed", type=int)
    p.add_argument("--log-every-batches", dest="log_every_batches", type=int)
    p.add_argument("--noise", help='"none", "uniform01" or "gaussian:<sigma>"')
    p.add_argument("--init-scale", dest="init_scale", type=float)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bounds", help="distinguishability report for a class ensemble")
    p.add_argument("--dataset", required=True, help="QGDS container")
    p.add_argument("--classes", help="labels to keep, e.g. 3")
    p.add_argument("--pca", type=int, help="angle-encode k PCA features")
    p.add_argument("--raw", action="store_true", help="amplitude-encode raw pixels")
    p.add_argument("--generator", help="params.json of a trained model")
    p.add_argument(
        "--eigen", action="store_true", help="use the leading-eigenvector generator"
    )
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("toy", help="classical-vs-quantum toy comparison")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--depth", type=int, default=2, help="classical net depth")
    p.add_argument("--ancillas", type=int, choices=(0, 6), default=6)
    p.add_argument("--epochs", type=int, help="override the default 2000 epochs")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("render", help="decode a trained generator to a PGM image")
    p.add_argument("--params", required=True, help="params.json from train")
    p.add_argument("--arch", choices=ARCHES, help="expected architecture (checked)")
    p.add_argument("--out", required=True, help="output PGM path")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("probe", help="seeded random draw through a PCA inverse map")
    p.add_argument("--pca-model", dest="pca_model", required=True, help="pca.json")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_probe)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
