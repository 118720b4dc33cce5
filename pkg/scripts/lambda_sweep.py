"""Sweep Lambda: the C functional, the modified trade-off and the audit leakage."""

import argparse

import numpy as np

from uncertainty_lab.audit import audit
from uncertainty_lab.corpus import CORPUS_GRID, PRODUCT_GRID, corpus
from uncertainty_lab.estimation import ErrorModel
from uncertainty_lab.preparation import build_product
from uncertainty_lab.uncertainty import analyze, modified_hk


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--prep", default="gauss-unit", help="corpus preparation name")
    ap.add_argument("--lam", type=float, nargs="+", default=list(np.linspace(-0.5, 3, 8)))
    args = ap.parse_args()
    prep = corpus(CORPUS_GRID)[args.prep]
    part = corpus(PRODUCT_GRID)[args.prep]
    pair = build_product(part, part)

    print(f"{'lambda':>8s}{'C':>14s}{'E_p2':>14s}{'mod_hk_slack':>14s}{'leakage':>14s}  verdict")
    for lam in args.lam:
        model = ErrorModel.lambda_modified(lam)
        rep = analyze(prep, model)
        aud = audit(pair, model, (1.0, -1.0))
        print(f"{lam:8.3g}{rep.C:14.6g}{rep.E_p2:14.6g}{modified_hk(rep).slack:14.4g}"
              f"{aud.normalized_leakage:14.4g}  {aud.verdict}")


if __name__ == "__main__":
    main()
