"""Error rates degrade monotonically as synthetic feature noise grows.

Generates the same corpus layout at increasing noise levels (the seed
fixes segment counts and lengths, so only the frame values change) and
scores each one in both speaker conditions.
"""

from abxlab.abx import score_corpus
from abxlab.synth import SynthConfig, generate_corpus

NOISE_LEVELS = [0.0, 0.1, 0.2, 0.4, 0.8, 1.6]


def main():
    print(f"{'noise':>6}  {'within':>8}  {'across':>8}  comparisons")
    for noise in NOISE_LEVELS:
        cfg = SynthConfig(
            phones=("AE", "EH", "IY"),
            dim=4,
            n_speakers=2,
            noise_scale=noise,
            speaker_offset_scale=0.3,
            segments_per_cell=4,
            seed=11,
        )
        corpus = generate_corpus(cfg)
        row = []
        for mode in ("within", "across"):
            report = score_corpus(corpus.archive, corpus.segments, mode, "phone")
            row.append(report)
        print(
            f"{noise:>6.1f}  {row[0].overall:>8.4f}  {row[1].overall:>8.4f}  "
            f"{row[0].metadata['comparisons']}"
        )
    print()
    print("speaker offsets make the across condition harder than within;")
    print("at noise 0 the phones are exactly separable and both rates are 0.")


if __name__ == "__main__":
    main()
