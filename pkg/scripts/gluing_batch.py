"""Gluing traces on random graphs: achieved constant against the certified bound."""
import argparse

from lipext.lab import load_specs, run, write_outputs
from lipext.plotting import plot_data


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--out-dir", default="results/gluing")
    args = ap.parse_args()
    spec = {"id": "glue", "generator": {"kind": "random_graph", "n": 7, "edge_prob": 0.5,
                                        "weights": [1, 3], "seed": list(range(args.seeds))},
            "quantity": "glue_trace", "targets": ["simplex:3", "real", "euclidean:2"],
            "n": [1, 2], "delta": [0, 0.1, 0.5]}
    res = run(load_specs(spec))
    write_outputs(res, args.out_dir, "both")
    plot_data(res.rows, args.out_dir)
    ratios = [r.values["achieved"] / r.values["certified_bound"] for r in res.rows if r.values["certified_bound"] > 0]
    print(f"{len(res.rows)} traces, worst achieved/certified = {max(ratios, default=0):.4f}")
    return 0 if res.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
