#!/usr/bin/env python3
import os
import unittest

import numpy as np

from dlf_library.data import split, synth_blobs
from dlf_library.losses import BILINEAR, CROSS_ENTROPY, LossSpec
from dlf_library.meta import MetaConfig, train_student, train_teacher
from dlf_library.student import accuracy, forward_probs, predict

# ##################### variables begin ########################################
# these parameters may be changed to trade runtime against stability          #
# ##############################################################################

seeds = [0, 1, 2, 3, 4]
proportions = [0.8, 0.2]
separation = 2.0
n_examples = 1000
sizes = (600, 200, 200)
hidden = 16
inner_steps = 100
batch_size = 20
eta = 0.1
teacher_steps = 20
adam_alpha = 0.1
required_wins = 4
# the CE baseline must clear the majority rate by this much on average
baseline_margin = 0.02

# ##################### variables end ##########################################


def dev_predictions(student, dev):
    return predict(forward_probs(student, dev.inputs))


@unittest.skipUnless(os.environ.get("DLF_RUN_SLOW") == "1", "set DLF_RUN_SLOW=1 to run")
class TestTeacherImprovesStudent(unittest.TestCase):
    def test_imbalanced_binary_blobs(self):
        accuracy_wins = 0
        metric_wins = 0
        taught_accs, baseline_accs, majority_rates = [], [], []
        for seed in seeds:
            ds = synth_blobs(n_examples, 2, 2, separation, proportions, seed=seed)
            train, dev, _ = split(ds, sizes, seed=seed)
            cfg = MetaConfig(
                layer_sizes=(2, hidden, 2),
                T=inner_steps,
                batch_size=batch_size,
                eta=eta,
                teacher_steps=teacher_steps,
                student_seed=seed,
                batch_seed=seed,
                n_keys=2,
                teacher_seed=seed,
                adam_alpha=adam_alpha,
            )
            theta, history = train_teacher(cfg, train, dev, LossSpec(BILINEAR))
            taught, _ = train_student(cfg, train, dev, LossSpec(BILINEAR), theta)
            baseline, _ = train_student(cfg, train, dev, LossSpec(CROSS_ENTROPY))

            taught_preds = dev_predictions(taught, dev)
            taught_accs.append(accuracy(taught_preds, dev.labels))
            baseline_accs.append(accuracy(dev_predictions(baseline, dev), dev.labels))
            majority_rates.append(float(np.bincount(dev.labels, minlength=2).max()) / len(dev))

            # a constant predictor never counts as a win
            if taught_accs[-1] >= baseline_accs[-1] and len(np.unique(taught_preds)) > 1:
                accuracy_wins += 1
            if history[-1].dev_smoothed_metric >= history[0].dev_smoothed_metric:
                metric_wins += 1

        summary = "taught %s, baseline %s, majority %s" % (
            taught_accs,
            baseline_accs,
            majority_rates,
        )
        self.assertGreater(
            np.mean(baseline_accs), np.mean(majority_rates) + baseline_margin, summary
        )
        self.assertGreaterEqual(accuracy_wins, required_wins, summary)
        self.assertGreaterEqual(metric_wins, required_wins)


if __name__ == "__main__":
    unittest.main()
