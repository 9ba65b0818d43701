# -*- coding: utf-8 -*-
import numpy as np
import pytest

import isim
from roomshift import Arir

SAMPLE_RATE = 48000.0


@pytest.fixture(scope="session")
def acceptance_box():
    return isim.acceptance_shoebox()


@pytest.fixture(scope="session")
def acceptance_arir(acceptance_box):
    n = int(0.1 * SAMPLE_RATE)
    h = isim.render_arir(acceptance_box, SAMPLE_RATE, n)
    return Arir(samples=h, sample_rate=SAMPLE_RATE)


@pytest.fixture(scope="session")
def small_arir():
    """Two clean events plus a short diffuse tail; fast to analyze."""
    box = isim.Shoebox(room=(5.0, 4.0, 3.0), receiver=(2.0, 2.0, 1.5),
                       source=(3.5, 2.8, 1.7))
    n = int(0.12 * SAMPLE_RATE)
    h = isim.render_arir(box, SAMPLE_RATE, n, tail_rms=0.01, seed=3)
    return Arir(samples=h, sample_rate=SAMPLE_RATE)


def fixture_corpus(count, length_s=0.15, seed=20):
    """Seeded list of shoebox ARIRs with noise tails."""
    rng = np.random.default_rng(seed)
    corpus = []
    n = int(length_s * SAMPLE_RATE)
    for k in range(count):
        box = isim.random_shoebox(rng)
        h = isim.render_arir(box, SAMPLE_RATE, n,
                             tail_rms=10 ** rng.uniform(-3, -1.5),
                             tail_decay_s=rng.uniform(0.02, 0.08),
                             seed=int(rng.integers(1 << 31)))
        corpus.append(Arir(samples=h, sample_rate=SAMPLE_RATE))
    return corpus
