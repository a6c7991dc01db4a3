"""Compare prospective and retrospective posteriors of beta on random instances.

Draws (data, conditioned prior) pairs on one-dimensional covariate spaces
and prints the relative L1 discrepancy between the two marginal posteriors
of the log odds ratio for each, plus the worst case.

    python scripts/equivalence_suite.py --instances 20 --seed 1
"""

import argparse
import json
import time

import numpy as np

from casecontrol import (ConditionedLogisticPrior, CountData, CovariateSpace, GFunction, PseudoCounts,
                         equivalence_report)


def random_instance(rng, sizes):
    m = int(rng.choice(sizes))
    space = CovariateSpace(np.sort(rng.normal(size=m) * 1.2)[:, None])
    counts = rng.poisson(rng.uniform(0.5, 8, size=(m, 2)))
    a = rng.uniform(0.3, 3.0, size=(m, 2))
    g = GFunction.gaussian([rng.normal()], [[rng.uniform(1, 25)]])
    return CountData(space, counts), ConditionedLogisticPrior(space, PseudoCounts(a), g)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=20)
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 3], help="|X| values to draw from")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.instances):
        data, prior = random_instance(rng, args.sizes)
        t0 = time.perf_counter()
        rep = equivalence_report(data, prior)
        rows.append({"instance": i, "levels": data.space.size, "n": int(data.counts.sum()),
                     "discrepancy": rep.max_relative_discrepancy, "verdict": rep.verdict,
                     "seconds": round(time.perf_counter() - t0, 3)})
        print(f"{i:3d}  |X|={rows[-1]['levels']}  n={rows[-1]['n']:3d}  "
              f"discrepancy={rep.max_relative_discrepancy:.3e}  {rep.verdict}")
    worst = max(r["discrepancy"] for r in rows)
    print(json.dumps({"instances": len(rows), "max_discrepancy": worst}))


if __name__ == "__main__":
    main()
