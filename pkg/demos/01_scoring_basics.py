"""ABX scoring on a corpus small enough to check by hand.

Two phones, one speaker, four segments.  With orthogonal one-hot
features every probe X lands closer to its own category, so the error
rate is exactly zero; with all-constant features every comparison is a
tie and the rate sits at chance, 0.5.
"""

import numpy as np

from abxlab.abx import score_corpus
from abxlab.corpus import FeatureArchive, ItemSegment

FRAME_PERIOD = 10000  # microseconds, i.e. 100 frames per second


def build_corpus(constant=False):
    frames = np.zeros((8, 3), dtype=np.float32)
    if constant:
        frames[:] = 1.0
    else:
        frames[0:2, 0] = 1.0  # AE occurrence 1
        frames[2:4, 1] = 1.0  # EH occurrence 1
        frames[4:6, 0] = 1.0  # AE occurrence 2
        frames[6:8, 1] = 1.0  # EH occurrence 2
    archive = FeatureArchive({"utt01": frames}, FRAME_PERIOD)
    segments = [
        ItemSegment("utt01", 0.00, 0.02, "AE", "S", "T", "spk1"),
        ItemSegment("utt01", 0.02, 0.04, "EH", "S", "T", "spk1"),
        ItemSegment("utt01", 0.04, 0.06, "AE", "S", "T", "spk1"),
        ItemSegment("utt01", 0.06, 0.08, "EH", "S", "T", "spk1"),
    ]
    return archive, segments


def show(title, report):
    print(f"--- {title}")
    print(f"overall error rate: {report.overall:.6f}")
    for cell in report.per_cell:
        print(
            f"cell {cell.category_x} vs {cell.category_y} "
            f"context {cell.context} speaker {cell.speaker_ab}: "
            f"eta_xy={cell.eta_xy:.3f} eta_yx={cell.eta_yx:.3f} "
            f"epsilon={cell.epsilon:.3f} over {cell.n_comparisons} comparisons"
        )
    print()


def main():
    archive, segments = build_corpus()
    show("separable one-hot features", score_corpus(archive, segments, "within", "phone"))

    archive, segments = build_corpus(constant=True)
    show("constant features (all ties)", score_corpus(archive, segments, "within", "phone"))

    # every comparison asks: is the probe X closer to the same-phone
    # segment A than to the other-phone segment B?  Ties count half.
    print("comparisons per cell = |Sx| * (|Sx| - 1) * |Sy| per direction,")
    print("here 2 * 1 * 2 = 4 each way, 8 in total.")


if __name__ == "__main__":
    main()
