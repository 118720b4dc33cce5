"""Print the uncertainty report for every corpus preparation as a table."""

import argparse

from uncertainty_lab.corpus import CORPUS_GRID, corpus, family
from uncertainty_lab.estimation import ErrorModel
from uncertainty_lab.uncertainty import analyze, schrodinger_robertson

COLUMNS = ("J_q", "E_p2", "E_q2", "Delta_p2", "sigma_p2", "sigma_q2", "ms_tradeoff")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, help="use the Lambda-modified error model")
    args = ap.parse_args()
    model = ErrorModel() if args.lam is None else ErrorModel.lambda_modified(args.lam)

    print(f"{'preparation':22s} {'family':9s}" + "".join(f"{c:>13s}" for c in COLUMNS)
          + f"{'hk_slack':>13s}{'sr_slack':>13s}")
    for name, prep in corpus(CORPUS_GRID).items():
        rep = analyze(prep, model)
        sr = schrodinger_robertson(prep).slack if model.variant == "standard" else float("nan")
        row = "".join(f"{getattr(rep, c):13.6g}" for c in COLUMNS)
        print(f"{name:22s} {family(name):9s}{row}{rep.hk_lhs - rep.hk_rhs_final:13.4g}{sr:13.4g}")


if __name__ == "__main__":
    main()
