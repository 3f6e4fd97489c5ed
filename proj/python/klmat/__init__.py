# SPDX-License-Identifier: Apache-2.0
"""KL-Mat: matrix factorization with a symmetrized KL fairness regularizer.

Thin Python wrapper over the C++ core. The training pipeline is:

    dataset = klmat.load_movielens(path, klmat.MovielensFormat.csv_small)
    split = klmat.split_dataset(dataset, ratio=0.9, seed=1)
    cfg = klmat.TrainConfig()
    vanilla = klmat.train_vanilla(split.train, cfg)
    ranks = klmat.item_popularity_ranks(vanilla, top_k=10)
    alpha = klmat.fit_alpha(vanilla, [float(r) for r in ranks.rank], lambda_=0.1)
    cfg.beta = 0.1
    fair = klmat.train_klmat(split.train, cfg, alpha, vanilla)
"""

from ._klmat import *  # noqa: F401,F403
from ._klmat import __doc__  # noqa: F401

__version__ = "0.1.0"
