"""Exact association-rule mining on a small market-basket database.

Loads the bundled CSV, enumerates every itemset with exact rational
supports, and prints the frequent itemsets and rules for a couple of
threshold choices. This is the ground truth the quantum estimator is
judged against in the other demos.
"""
from pathlib import Path

from qpdm import exact_mine, exact_support, parse_database

DB_PATH = Path(__file__).parent / "data" / "market.csv"


def main():
    db = parse_database(DB_PATH.read_text())
    print(f"database: {db.n_transactions} transactions over items {', '.join(db.item_names)}")
    print()

    for s, c in ((0.3, 0.6), (0.15, 0.5)):
        report = exact_mine(db, s, c)
        print(f"thresholds: support > {s}, confidence > {c}")
        print(f"  frequent itemsets ({len(report.frequent)}):")
        for rec in report.frequent:
            names = " + ".join(db.item_names[i - 1] for i in rec.items)
            print(f"    {names:<28} supp = {rec.estimate}")
        print(f"  rules ({len(report.rules)}):")
        for rule in report.rules:
            lhs = " + ".join(db.item_names[i - 1] for i in rule.antecedent)
            rhs = " + ".join(db.item_names[i - 1] for i in rule.consequent)
            print(f"    {lhs} => {rhs}: conf = {rule.confidence}, supp = {rule.support}")
        print()

    z = frozenset({1, 2})
    print(f"spot check: supp(bread, milk) = {exact_support(db, z)}")


if __name__ == "__main__":
    main()
