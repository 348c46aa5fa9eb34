"""Scan the standard corpus for e^n <= e_n + 2 and e^n <= n + 1; write results to an output directory."""
import argparse
import json

from lipext.lab import claim1_corpus, run, write_outputs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--random", type=int, default=30, help="number of random graphs")
    ap.add_argument("--out-dir", default="results/claim1")
    args = ap.parse_args()
    res = run(claim1_corpus(args.random))
    write_outputs(res, args.out_dir, "both")
    worst = min((r.values["slack"] for r in res.rows), default=float("nan"))
    print(json.dumps({**res.summary(), "min_slack": worst}, indent=1))
    return 0 if res.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
