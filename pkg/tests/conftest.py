import numpy as np
import pytest

from fmreg.encoders import SyntheticWorld, synthetic_generate
from fmreg.features import FeaturesMatrix


@pytest.fixture
def small_store():
    world = SyntheticWorld(seed=11, n_classes=4, n_templates=6, dim=16,
                           n_per_class=8, sigma_template=0.2, sigma_image=0.2)
    return synthetic_generate(world, "train")


def random_fm(rng, t, k, d):
    x = rng.standard_normal((t, k, d))
    x /= np.linalg.norm(x, axis=-1, keepdims=True)
    return FeaturesMatrix(entries=x,
                          templates=tuple(f"tpl {i} {{}}" for i in range(t)),
                          class_names=tuple(f"c{i}" for i in range(k)))
