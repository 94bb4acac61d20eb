"""Deterministic seed derivation.

All randomness in the package flows from one master seed. Independent
streams (repetitions, bootstrap resamples, MCD starts) are derived by
hashing string/int labels into a ``SeedSequence``, so results do not
depend on execution order or parallel schedule.
"""

import hashlib

import numpy as np


def _label_entropy(label) -> int:
    digest = hashlib.sha256(repr(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(master_seed: int, *labels) -> int:
    """Derive a child seed from ``master_seed`` and a label path.

    The same (seed, labels) pair always yields the same child seed,
    on every platform.
    """
    seq = np.random.SeedSequence([int(master_seed)] + [_label_entropy(x) for x in labels])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def derive_rng(master_seed: int, *labels) -> np.random.Generator:
    """Generator seeded by :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(master_seed, *labels))
