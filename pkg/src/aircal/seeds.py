"""Named random substreams derived from a single master seed.

Every stochastic stage of the pipeline draws from its own named stream
(e.g. ``"scene/sources"``, ``"drift/realization-2/sensor-7/pm25"``), so
adding sensors or realizations never perturbs the draws of unrelated
stages.
"""

import hashlib

import numpy as np


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Return a generator keyed by (master_seed, name).

    The stream name is hashed into extra entropy words, so two distinct
    names give statistically independent streams while staying fully
    deterministic for a fixed master seed.
    """
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    seq = np.random.SeedSequence([int(master_seed), *words])
    return np.random.default_rng(seq)
