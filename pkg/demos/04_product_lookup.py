"""What a product-state generator actually learns: a per-pixel look-up.

With one RY angle per pixel and no entanglement, the swap-test loss
separates into 64 independent one-dimensional problems.  Training the
whole class through that model therefore converges to a per-pixel
compromise angle — a soft class template — rather than anything
sample-specific.  On a single image the minimizer is exact:
theta_p = pi * x_p reproduces the image bit for bit.

Writes the learned template next to the class average under
demos/out/product/.  Needs scikit-learn for the digits corpus.
"""

from pathlib import Path

import numpy as np

from qganlab.datapipe import ImageDataset, class_average, filter_classes, write_pgm
from qganlab.models import ProductIqgan, product_iqgan_image
from qganlab.training import TrainConfig, train_product

LABEL = 3
OUT = Path(__file__).parent / "out" / "product"


def load_digits_dataset() -> ImageDataset:
    from sklearn.datasets import load_digits

    bunch = load_digits()
    return ImageDataset(8, 8, bunch.data / 16.0, bunch.target)


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    ds = filter_classes(load_digits_dataset(), [LABEL])
    images = ds.pixels[:100]
    model = ProductIqgan(64)

    cfg = TrainConfig(epochs=400, batch_size=len(images), learning_rate=0.5,
                      optimizer="sgd", seed=0, log_every_batches=100)
    theta, trace = train_product(model, images, cfg)
    print(f"trained on {len(images)} images of class {LABEL}; "
          f"final loss {trace.rows[-1][2]:.6f}")

    template = product_iqgan_image(model, theta)
    average = class_average(ds, LABEL)
    print(f"learned template vs class average: "
          f"max |diff| {np.max(np.abs(template - average)):.4f}, "
          f"mean |diff| {np.mean(np.abs(template - average)):.4f}")
    write_pgm(OUT / "template.pgm", template.reshape(8, 8))
    write_pgm(OUT / "class_average.pgm", average.reshape(8, 8))

    single = images[:1]
    cfg = TrainConfig(epochs=800, batch_size=1, learning_rate=0.1,
                      optimizer="sgd", seed=0, log_every_batches=400)
    theta, _ = train_product(ProductIqgan(64), single, cfg)
    err = np.max(np.abs(theta - np.pi * single[0]))
    print(f"single image: max |theta - pi*x| = {err:.2e} (exact look-up)")
    write_pgm(OUT / "single_target.pgm", single[0].reshape(8, 8))
    write_pgm(OUT / "single_learned.pgm",
              product_iqgan_image(model, theta).reshape(8, 8))
    print(f"wrote PGMs to {OUT}")


if __name__ == "__main__":
    main()
