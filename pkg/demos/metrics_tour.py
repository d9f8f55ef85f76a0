"""A quick tour of the evaluation metrics on synthetic predictions.

Shows the micro-F1 = accuracy identity for single-label multiclass data, the
confusion matrix bookkeeping, and the three pairwise accuracies used for
image-caption verification (true vs. out-of-context, true vs. miscaptioned,
and the merged true-vs-false setup).

    python3 demos/metrics_tour.py
"""

import random

from claimcheck.bench import accuracy, confusion_matrix, micro_f1, verite_pairwise


def main():
    rng = random.Random(7)
    labels = ["supported", "refuted", "misleading", "nei"]
    golds = [rng.choice(labels) for _ in range(200)]
    preds = [g if rng.random() < 0.7 else rng.choice(labels) for g in golds]

    acc = accuracy(preds, golds)
    f1 = micro_f1(preds, golds)
    print(f"accuracy  = {acc:.6f}")
    print(f"micro-F1  = {f1:.6f}   (identical by construction: |diff| = {abs(acc - f1):.2e})")

    matrix = confusion_matrix(preds, golds, labels)
    print("\nconfusion (rows = gold, cols = predicted):")
    print("            " + "  ".join(f"{l[:9]:>9}" for l in labels))
    for label, row in zip(labels, matrix):
        print(f"{label:>11} " + "  ".join(f"{v:>9}" for v in row))
    print(f"\ndiagonal/n = {matrix.trace() / matrix.sum():.6f} (equals accuracy)")

    # pairwise accuracies: swapping the two negative classes cannot hurt
    # the merged true/false accuracy
    v_golds = ["true"] * 40 + ["ooc"] * 30 + ["miscaptioned"] * 30
    swap = {"true": "true", "ooc": "miscaptioned", "miscaptioned": "ooc"}
    v_preds = [swap[g] for g in v_golds]
    t_ooc, t_mc, t_f = verite_pairwise(v_preds, v_golds)
    print(f"\npairwise on an ooc<->miscaptioned swap: "
          f"T/OOC={t_ooc:.2f} T/MC={t_mc:.2f} T/F={t_f:.2f} "
          f"(3-class accuracy is only {accuracy(v_preds, v_golds):.2f})")


if __name__ == "__main__":
    main()
