import numpy as np
import pytest
from pydantic import ValidationError

from wsss_bed.core_types import ActivationStack, ImageLabelVector, SaliencyMap
from wsss_bed.errors import DimensionMismatch, NotBinarized, ThresholdOutOfRange
from wsss_bed.fusion import (
    FusionConfig,
    binarize_saliency,
    generate_pseudo_label,
    generate_threshold_label,
)


def _reference_label(planes, saliency, flags, tau):
    """Pixel-by-pixel argmax over [bg, fg_1 .. fg_C], first maximum wins."""
    c, h, w = planes.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for i in range(h):
        for j in range(w):
            s = float(saliency[i, j])
            cues = [1.0 - s]
            for k in range(c):
                v = float(planes[k, i, j])
                cues.append(v if flags[k] and v > tau else 0.0)
            best = 0
            for k in range(1, c + 1):
                if cues[k] > cues[best]:
                    best = k
            out[i, j] = 255 if (s == 1.0 and best == 0) else best
    return out


def _random_instance(rng):
    c = int(rng.integers(1, 6))
    h = int(rng.integers(1, 9))
    w = int(rng.integers(1, 9))
    planes = rng.integers(0, 11, size=(c, h, w)) / 10.0
    saliency = rng.integers(0, 2, size=(h, w)).astype(np.float64)
    flags = rng.integers(0, 2, size=c).astype(bool)
    if rng.random() < 0.5:
        tau = float(rng.choice(planes.ravel()))
    else:
        tau = float(rng.random())
    return planes, saliency, flags, tau


def test_fusion_worked_example():
    a = ActivationStack([[[0.9, 0.2], [0.05, 0.6]], [[0.1, 0.8], [0.0, 0.7]]])
    s = SaliencyMap([[1, 1], [0, 1]], binarized=True)
    y = ImageLabelVector([True, True])
    label = generate_pseudo_label(a, s, y, 0.5)
    assert label.values.tolist() == [[1, 2], [0, 2]]


def test_fusion_no_saliency_is_all_background():
    rng = np.random.default_rng(0)
    a = ActivationStack(rng.random((3, 6, 6)))
    s = SaliencyMap(np.zeros((6, 6)), binarized=True)
    label = generate_pseudo_label(a, s, ImageLabelVector([1, 1, 1]), 0.0)
    assert (label.values == 0).all()


def test_fusion_full_saliency_without_cues_is_ignored():
    a = ActivationStack(np.zeros((2, 3, 3)))
    s = SaliencyMap(np.ones((3, 3)), binarized=True)
    label = generate_pseudo_label(a, s, ImageLabelVector([1, 1]), 0.0)
    assert (label.values == 255).all()


def test_fusion_rejects_soft_saliency():
    a = ActivationStack(np.zeros((1, 2, 2)))
    with pytest.raises(NotBinarized):
        generate_pseudo_label(a, SaliencyMap(np.full((2, 2), 0.5)), ImageLabelVector([1]), 0.1)


def test_fusion_rejects_size_mismatch():
    a = ActivationStack(np.zeros((1, 2, 2)))
    s = SaliencyMap(np.ones((2, 3)), binarized=True)
    with pytest.raises(DimensionMismatch):
        generate_pseudo_label(a, s, ImageLabelVector([1]), 0.1)


def test_fusion_matches_pixel_reference():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        planes, saliency, flags, tau = _random_instance(rng)
        label = generate_pseudo_label(
            ActivationStack(planes),
            SaliencyMap(saliency, binarized=True),
            ImageLabelVector(flags),
            tau,
        )
        assert np.array_equal(label.values, _reference_label(planes, saliency, flags, tau))


def test_fusion_absent_classes_never_appear():
    rng = np.random.default_rng(2)
    for _ in range(200):
        planes, saliency, flags, tau = _random_instance(rng)
        label = generate_pseudo_label(
            ActivationStack(planes),
            SaliencyMap(saliency, binarized=True),
            ImageLabelVector(flags),
            tau,
        )
        for k in np.flatnonzero(~flags):
            assert not (label.values == k + 1).any()


def test_fusion_activation_equal_to_tau_is_not_a_cue():
    a = ActivationStack([[[0.4]]])
    s = SaliencyMap([[1.0]], binarized=True)
    y = ImageLabelVector([True])
    assert generate_pseudo_label(a, s, y, 0.4).values[0, 0] == 255
    assert generate_pseudo_label(a, s, y, 0.39).values[0, 0] == 1


def test_fusion_ignore_set_grows_with_tau():
    rng = np.random.default_rng(3)
    taus = np.linspace(0.0, 1.0, 11)
    for _ in range(100):
        planes, saliency, flags, _ = _random_instance(rng)
        args = (ActivationStack(planes), SaliencyMap(saliency, binarized=True), ImageLabelVector(flags))
        previous = None
        for tau in taus:
            ignored = generate_pseudo_label(*args, float(tau)).values == 255
            if previous is not None:
                assert (ignored | ~previous).all()
            previous = ignored


def test_binarize_is_inclusive():
    s = SaliencyMap([[0.49, 0.5, 0.51]])
    assert binarize_saliency(s, 0.5).values.tolist() == [[0.0, 1.0, 1.0]]
    assert binarize_saliency(SaliencyMap([[0.99, 1.0]]), 1.0).values.tolist() == [[0.0, 1.0]]


def test_binarize_is_idempotent():
    rng = np.random.default_rng(4)
    for _ in range(50):
        s = SaliencyMap(rng.random((5, 5)))
        t = float(rng.uniform(0.01, 1.0))
        once = binarize_saliency(s, t)
        assert once.binarized
        assert np.array_equal(binarize_saliency(once, t).values, once.values)


@pytest.mark.parametrize("threshold", [0.0, -0.1, 1.5])
def test_binarize_rejects_threshold(threshold):
    with pytest.raises(ThresholdOutOfRange):
        binarize_saliency(SaliencyMap([[0.5]]), threshold)


def test_threshold_label_never_ignores():
    rng = np.random.default_rng(5)
    for _ in range(100):
        planes, _, flags, tau = _random_instance(rng)
        label = generate_threshold_label(ActivationStack(planes), ImageLabelVector(flags), tau)
        assert not (label.values == 255).any()
        expected = _reference_label(planes, np.ones(planes.shape[1:]), flags, tau)
        expected[expected == 255] = 0
        assert np.array_equal(label.values, expected)


def test_fusion_config_validation():
    assert FusionConfig(tau=0.3).saliency_threshold == 0.5
    with pytest.raises(ValidationError):
        FusionConfig(tau=1.5)
    with pytest.raises(ValidationError):
        FusionConfig(tau=0.3, saliency_threshold=0.0)
