"""Train the 4+4 qubit swap-test GAN on one digit class.

The generator learns a single pure state whose overlap with the encoded
data ensemble drives the swap-test loss.  A pure state can never exceed
the ensemble's top eigenvalue in fidelity, so the interesting number is
how close training gets to that ceiling — and how far the ceiling itself
sits below 1 for a genuinely mixed class.

Writes before/after decoded images next to the class average under
demos/out/iqgan/.  Needs scikit-learn for the digits corpus.
"""

from pathlib import Path

import numpy as np

from qganlab.bounds import best_pure_generator, overlap_fidelity
from qganlab.datapipe import (
    ImageDataset,
    class_average,
    filter_classes,
    pca_fit,
    pca_inverse,
    pca_transform,
    write_pgm,
)
from qganlab.embedding import qubit_marginal_features, state_matrix_from_angles
from qganlab.models import IqganModel, generator_state
from qganlab.training import TrainConfig, train_iqgan

LABEL = 3
PCA_K = 4
OUT = Path(__file__).parent / "out" / "iqgan"


def load_digits_dataset() -> ImageDataset:
    from sklearn.datasets import load_digits

    bunch = load_digits()
    return ImageDataset(8, 8, bunch.data / 16.0, bunch.target)


def decode_image(model, params, pca) -> np.ndarray:
    state = generator_state(model, params)
    feats = qubit_marginal_features(state)
    return pca_inverse(pca, feats).reshape(8, 8)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    ds = filter_classes(load_digits_dataset(), [LABEL])
    print(f"digit class {LABEL}: {len(ds.pixels)} images of {ds.width}x{ds.height}")

    pca = pca_fit(ds.pixels, PCA_K)
    feats = pca_transform(pca, ds.pixels)
    states = state_matrix_from_angles(np.pi * feats)
    rho = states.T @ states / len(states)
    lam_max, witness = best_pure_generator(rho)
    print(f"encoded ensemble: rank {np.linalg.matrix_rank(rho)}, "
          f"fidelity ceiling lambda_max = {lam_max:.4f}")

    model = IqganModel(PCA_K, depth=2)
    cfg = TrainConfig(epochs=120, batch_size=len(feats), learning_rate=0.05,
                      seed=0, log_every_batches=20)
    rng = np.random.default_rng(0)
    init = rng.uniform(-0.1, 0.1, model.n_params)
    write_pgm(OUT / "before.pgm", decode_image(model, init, pca))

    params, trace = train_iqgan(model, feats, cfg)
    for batch, _, loss_g in trace.rows[:: max(1, len(trace.rows) // 6)]:
        print(f"  batch {batch:4d}  generator loss {loss_g:.6f}")

    gamma = generator_state(model, params)
    fid = overlap_fidelity(gamma.amplitudes, rho)
    print(f"final overlap fidelity {fid:.4f} "
          f"({fid / lam_max:.1%} of the pure-state ceiling)")
    print(f"witness overlap |<gamma|v_max>|^2 = "
          f"{abs(np.vdot(gamma.amplitudes, witness.amplitudes))**2:.4f}")

    write_pgm(OUT / "after.pgm", decode_image(model, params, pca))
    write_pgm(OUT / "class_average.pgm", class_average(ds, LABEL).reshape(8, 8))
    print(f"wrote before/after/class_average PGMs to {OUT}")


if __name__ == "__main__":
    main()
