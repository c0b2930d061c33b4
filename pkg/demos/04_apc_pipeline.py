"""Full command-line pipeline: synth -> apc train -> apc extract -> eval.

Runs every step through the same entry points the ``abxlab`` console
script uses and compares ABX error on raw noisy features against error
on features extracted by a small APC model trained on the clean corpus.
Everything lands in a temporary directory.
"""

import json
import tempfile
from pathlib import Path

from abxlab import cli


def run(*argv):
    print("$ abxlab " + " ".join(argv))
    rc = cli.main(list(argv))
    assert rc == 0, f"exit code {rc}"


def overall(out_dir):
    report = json.loads((Path(out_dir) / "report.json").read_text())
    return report["overall"]


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        run("synth", "--phones", "AE,EH,IY", "--dim", "4", "--speakers", "2",
            "--segments-per-cell", "3", "--noise-scale", "0", "--seed", "2",
            "--out", str(tmp / "clean"))
        run("synth", "--phones", "AE,EH,IY", "--dim", "4", "--speakers", "2",
            "--segments-per-cell", "3", "--noise-scale", "0.4", "--seed", "2",
            "--out", str(tmp / "noisy"))

        run("apc", "train", "--features", str(tmp / "clean" / "features"),
            "--n", "1", "--layers", "1", "--hidden-dim", "6",
            "--cell", "simple-rnn", "--epochs", "10", "--seed", "0",
            "--out", str(tmp / "model"))
        curve = (tmp / "model" / "loss_curve.csv").read_text().splitlines()
        print(f"loss curve: {curve[1]} ... {curve[-1]}")

        run("apc", "extract", "--model", str(tmp / "model" / "apc.ckpt"),
            "--features", str(tmp / "clean" / "features"),
            "--out", str(tmp / "apc_feats"))

        run("eval", "--features", str(tmp / "noisy" / "features"),
            "--items", str(tmp / "noisy" / "items.item"),
            "--mode", "within", "--out", str(tmp / "eval_raw"))
        run("eval", "--features", str(tmp / "apc_feats"),
            "--items", str(tmp / "clean" / "items.item"),
            "--mode", "within", "--out", str(tmp / "eval_apc"))

        print()
        print(f"raw noisy features:  ABX error {overall(tmp / 'eval_raw')}")
        print(f"APC on clean corpus: ABX error {overall(tmp / 'eval_apc')}")


if __name__ == "__main__":
    main()
