"""qganlab: statevector laboratory for fully quantum adversarial models.

Subpackages:

* ``qcore``      exact statevector / density-matrix simulation
* ``embedding``  classical-data encodings and decodings
* ``models``     swap-test adversaries (two-register GANs, product-form model)
* ``training``   losses, gradients, optimizers, training loops
* ``bounds``     distinguishability and fidelity bound calculations
* ``datapipe``   dataset loading, PCA, image serialization
* ``toycompare`` constrained classical net vs. variational circuits
* ``cli``        command-line entry points
"""

__version__ = "0.1.0"
