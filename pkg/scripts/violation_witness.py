"""Show that the posterior equivalence needs the conditioned prior family.

Runs the 2x2 table n = [[6, 2], [3, 4]] under the conditioned prior (the
two posteriors agree) and under independent N(0, 1) priors on alpha and
beta with a Dirichlet prior on the covariate marginal (they do not).

    python scripts/violation_witness.py
"""

import argparse

import numpy as np

from casecontrol import (ConditionedLogisticPrior, CountData, CovariateSpace, GFunction, PseudoCounts,
                         equivalence_report, independent_gaussian_law)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--counts", type=int, nargs=4, default=[6, 2, 3, 4], metavar=("N00", "N01", "N10", "N11"),
                        help="cell counts, row x, column y")
    parser.add_argument("--beta-sd", type=float, default=1.0)
    args = parser.parse_args(argv)

    space = CovariateSpace(np.array([[0.0], [1.0]]))
    data = CountData(space, np.array(args.counts).reshape(2, 2))
    conditioned = ConditionedLogisticPrior(space, PseudoCounts(np.ones((2, 2))),
                                           GFunction.gaussian([0.0], [[args.beta_sd ** 2]]))
    independent = independent_gaussian_law(space, beta_sd=args.beta_sd)
    for label, prior in (("conditioned", conditioned), ("independent gaussian", independent)):
        rep = equivalence_report(data, prior)
        pro, ret = rep.prospective, rep.retrospective
        print(f"{label:22s} discrepancy={rep.max_relative_discrepancy:.3e}  {rep.verdict:10s} "
              f"posterior mean beta: prospective {pro.mean():+.4f}, retrospective {ret.mean():+.4f}")


if __name__ == "__main__":
    main()
