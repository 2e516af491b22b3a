import numpy as np
import pytest
from pydantic import ValidationError

from wsss_bed.core_types import ActivationStack, ConfusionMatrix, LabelMask, SaliencyMap
from wsss_bed.datasets import (
    ClassSubset,
    Manifest,
    ManifestEntry,
    png_path,
    read_actmap,
    read_gray_png,
    read_label_png,
    read_manifest,
    write_actmap,
    write_gray_png,
    write_label_png,
)
from wsss_bed.errors import (
    DimensionMismatch,
    MissingFile,
    MissingThreshold,
    NoValidClasses,
    WsssBedError,
)
from wsss_bed.experiments import (
    SweepGrid,
    convert_saliency_dataset,
    cross_matrix,
    degrade_saliency_dataset,
    evaluate_dataset,
    evaluate_predictions,
    evaluate_saliency_dataset,
    fuse_dataset,
    sweep,
)
from wsss_bed.fusion import FusionConfig, binarize_saliency, generate_pseudo_label
from wsss_bed.metrics import accumulate, finalize
from wsss_bed.reports import report_rows, write_report
from wsss_bed.synthetic import make_image, write_fixture


@pytest.fixture(scope="module")
def sparse(tmp_path_factory):
    return write_fixture(tmp_path_factory.mktemp("sparse"), 20, style="sparse")


@pytest.fixture(scope="module")
def saturated(tmp_path_factory):
    return write_fixture(tmp_path_factory.mktemp("saturated"), 20, style="saturated")


def _sequential_report(fx, tau, saliency_root=None):
    manifest = read_manifest(fx.manifest)
    saliency_root = fx.saliency if saliency_root is None else saliency_root
    m = None
    for entry in manifest:
        a = read_actmap(fx.actmaps / f"{entry.id}.actmap")
        s = binarize_saliency(read_gray_png(saliency_root / f"{entry.id}.png"), 0.5)
        y = entry.label_vector(a.class_count)
        gt = read_label_png(fx.gt / f"{entry.id}.png", a.class_count)
        if m is None:
            m = ConfusionMatrix.empty(a.class_count)
        m = accumulate(m, generate_pseudo_label(a, s, y, tau), gt)
    return finalize(m)


def _oracle_best(fx, grid):
    manifest = read_manifest(fx.manifest)
    best_tau, best_miou = None, None
    for tau in grid.values():
        miou = evaluate_dataset(
            manifest, fx.actmaps, fx.saliency, fx.gt, FusionConfig(tau=tau), jobs=1
        ).miou
        if best_miou is None or miou > best_miou:
            best_tau, best_miou = tau, miou
    return best_tau, best_miou


def test_synthetic_images_are_deterministic():
    first = make_image(3, "saturated", seed=11)
    second = make_image(3, "saturated", seed=11)
    assert first.image_id == "img_0003"
    assert np.array_equal(first.activations.planes, second.activations.planes)
    assert np.array_equal(first.ground_truth.values, second.ground_truth.values)


def test_evaluate_matches_sequential_reference(sparse):
    manifest = read_manifest(sparse.manifest)
    report = evaluate_dataset(
        manifest, sparse.actmaps, sparse.saliency, sparse.gt, FusionConfig(tau=0.2), jobs=4
    )
    assert report == _sequential_report(sparse, 0.2)


def test_evaluate_is_independent_of_jobs(sparse):
    manifest = read_manifest(sparse.manifest)
    reports = [
        evaluate_dataset(
            manifest, sparse.actmaps, sparse.saliency, sparse.gt, FusionConfig(tau=0.3), jobs=j
        )
        for j in (1, 2, 8)
    ]
    assert reports[0] == reports[1] == reports[2]


def test_evaluate_perfect_pseudo_labels(tmp_path):
    planes = np.zeros((2, 4, 4))
    planes[1, 1:3, 1:3] = 1.0
    write_actmap(ActivationStack(planes), tmp_path / "a.actmap")
    salient = np.zeros((4, 4))
    salient[1:3, 1:3] = 1.0
    write_gray_png(SaliencyMap(salient, binarized=True), tmp_path / "a.png")
    gt_dir = tmp_path / "gt"
    gt_dir.mkdir()
    write_label_png(LabelMask((salient * 2).astype(np.uint8), 2), gt_dir / "a.png")
    manifest = Manifest([ManifestEntry(id="a", labels=[1])])

    report = evaluate_dataset(manifest, tmp_path, tmp_path, gt_dir, FusionConfig(tau=0.5))
    assert report.miou == 1.0
    assert report.per_class_iou == [1.0, None, 1.0]


def test_evaluate_everything_ignored_has_no_valid_classes(tmp_path):
    write_actmap(ActivationStack(np.zeros((2, 3, 3))), tmp_path / "a.actmap")
    write_gray_png(SaliencyMap(np.ones((3, 3)), binarized=True), tmp_path / "a.png")
    gt_dir = tmp_path / "gt"
    gt_dir.mkdir()
    write_label_png(LabelMask(np.ones((3, 3), dtype=np.uint8), 2), gt_dir / "a.png")
    manifest = Manifest([ManifestEntry(id="a", labels=[0])])
    with pytest.raises(NoValidClasses):
        evaluate_dataset(manifest, tmp_path, tmp_path, gt_dir, FusionConfig(tau=0.1))


def test_evaluate_missing_saliency_names_the_image(sparse, tmp_path):
    manifest = read_manifest(sparse.manifest)
    partial = tmp_path / "saliency"
    partial.mkdir()
    for entry in manifest.entries[:-1]:
        (partial / f"{entry.id}.png").write_bytes((sparse.saliency / f"{entry.id}.png").read_bytes())
    with pytest.raises(MissingFile) as info:
        evaluate_dataset(manifest, sparse.actmaps, partial, sparse.gt, FusionConfig(tau=0.1))
    assert info.value.image_id == manifest.entries[-1].id


def test_evaluate_size_mismatch_names_the_image(sparse, tmp_path):
    manifest = read_manifest(sparse.manifest)
    image_id = manifest.entries[0].id
    small = tmp_path / "saliency"
    small.mkdir()
    for entry in manifest:
        (small / f"{entry.id}.png").write_bytes((sparse.saliency / f"{entry.id}.png").read_bytes())
    write_gray_png(SaliencyMap(np.zeros((5, 5))), small / f"{image_id}.png")
    with pytest.raises(DimensionMismatch) as info:
        evaluate_dataset(manifest, sparse.actmaps, small, sparse.gt, FusionConfig(tau=0.1), jobs=1)
    assert info.value.image_id == image_id


def test_evaluate_empty_manifest(sparse):
    with pytest.raises(WsssBedError):
        evaluate_dataset(Manifest([]), sparse.actmaps, sparse.saliency, sparse.gt, FusionConfig(tau=0.1))


def test_saliency_free_labels_ignore_nothing(sparse):
    manifest = read_manifest(sparse.manifest)
    report = evaluate_dataset(manifest, sparse.actmaps, None, sparse.gt, FusionConfig(tau=0.3))
    assert report.ignored_fraction == 0.0
    assert 0.0 < report.miou < 1.0


def test_sweep_grid_values():
    values = SweepGrid.default().values()
    assert len(values) == 19
    assert values[0] == 0.05 and values[-1] == 0.95
    assert 0.4 in values
    assert SweepGrid.parse("0.5:0.5:0.1").values() == [0.5]
    assert SweepGrid.parse("0:1:0.25").values() == [0.0, 0.25, 0.5, 0.75, 1.0]


@pytest.mark.parametrize("text", ["0.9:0.1:0.1", "0.1:0.5:0", "0.1:1.5:0.1", "0:1:1e-12"])
def test_sweep_grid_rejects_bad_ranges(text):
    with pytest.raises(ValidationError):
        SweepGrid.parse(text)


@pytest.mark.parametrize("text", ["0.1:0.5", "a:b:c"])
def test_sweep_grid_rejects_bad_format(text):
    with pytest.raises(ValueError):
        SweepGrid.parse(text)


def test_sweep_rows_match_single_evaluations(sparse):
    manifest = read_manifest(sparse.manifest)
    grid = SweepGrid.parse("0.1:0.5:0.2")
    result = sweep(manifest, sparse.actmaps, sparse.saliency, sparse.gt, grid, jobs=2)
    assert [row.tau for row in result.rows] == [0.1, 0.3, 0.5]
    for row in result.rows:
        single = evaluate_dataset(
            manifest, sparse.actmaps, sparse.saliency, sparse.gt, FusionConfig(tau=row.tau), jobs=1
        )
        assert row.miou == single.miou
        assert row.per_class_iou == single.per_class_iou
        assert row.ignored_fraction == single.ignored_fraction


def test_sparse_activations_prefer_low_thresholds(sparse):
    manifest = read_manifest(sparse.manifest)
    grid = SweepGrid.default()
    result = sweep(manifest, sparse.actmaps, sparse.saliency, sparse.gt, grid)
    assert (result.best_tau, result.best_miou) == _oracle_best(sparse, grid)
    assert result.best_tau <= 0.2


def test_saturated_activations_prefer_high_thresholds(saturated):
    manifest = read_manifest(saturated.manifest)
    grid = SweepGrid.default()
    result = sweep(manifest, saturated.actmaps, saturated.saliency, saturated.gt, grid)
    assert (result.best_tau, result.best_miou) == _oracle_best(saturated, grid)
    assert result.best_tau >= 0.4


def test_sweep_ignored_fraction_grows_with_tau(saturated):
    manifest = read_manifest(saturated.manifest)
    result = sweep(manifest, saturated.actmaps, saturated.saliency, saturated.gt, SweepGrid.default())
    fractions = [row.ignored_fraction for row in result.rows]
    assert fractions == sorted(fractions)


def test_degraded_saliency_lowers_miou(sparse, tmp_path):
    manifest = read_manifest(sparse.manifest)
    degraded = tmp_path / "degraded"
    degrade_saliency_dataset(manifest, sparse.saliency, degraded, 0.2, seed=0)
    config = FusionConfig(tau=0.1)
    clean = evaluate_dataset(manifest, sparse.actmaps, sparse.saliency, sparse.gt, config)
    worse = evaluate_dataset(manifest, sparse.actmaps, degraded, sparse.gt, config)
    assert worse.miou < clean.miou


def test_degrade_dataset_is_reproducible(sparse, tmp_path):
    manifest = read_manifest(sparse.manifest)
    degrade_saliency_dataset(manifest, sparse.saliency, tmp_path / "a", 0.3, seed=5, jobs=1)
    degrade_saliency_dataset(manifest, sparse.saliency, tmp_path / "b", 0.3, seed=5, jobs=4)
    for entry in manifest:
        assert (tmp_path / "a" / f"{entry.id}.png").read_bytes() == (
            tmp_path / "b" / f"{entry.id}.png"
        ).read_bytes()


def test_cross_single_cell_matches_evaluate(sparse):
    manifest = read_manifest(sparse.manifest)
    matrix = cross_matrix(
        {"cam": sparse.actmaps}, {"gt": sparse.saliency}, manifest, sparse.gt, {"cam": 0.15}
    )
    single = evaluate_dataset(
        manifest, sparse.actmaps, sparse.saliency, sparse.gt, FusionConfig(tau=0.15)
    )
    assert matrix.miou == [[single.miou]]
    assert matrix.cell("cam", "gt") == single.miou


def test_cross_two_by_two(sparse, saturated, tmp_path):
    manifest = read_manifest(sparse.manifest)
    degraded = tmp_path / "degraded"
    degrade_saliency_dataset(manifest, sparse.saliency, degraded, 0.2)
    methods = {"sparse": sparse.actmaps, "saturated": saturated.actmaps}
    taus = {"sparse": 0.1, "saturated": 0.4}
    saliencies = {"clean": sparse.saliency, "degraded": degraded}

    matrix = cross_matrix(methods, saliencies, manifest, sparse.gt, taus, jobs=2)
    for method, root in methods.items():
        for source, saliency_root in saliencies.items():
            expected = evaluate_dataset(
                manifest, root, saliency_root, sparse.gt, FusionConfig(tau=taus[method])
            )
            assert matrix.cell(method, source) == expected.miou

    swapped = cross_matrix(
        methods, {"degraded": degraded, "clean": sparse.saliency}, manifest, sparse.gt, taus
    )
    assert [list(reversed(row)) for row in swapped.miou] == matrix.miou


def test_cross_requires_a_tau_per_method(sparse):
    manifest = read_manifest(sparse.manifest)
    with pytest.raises(MissingThreshold):
        cross_matrix(
            {"a": sparse.actmaps, "b": sparse.actmaps}, {"s": sparse.saliency},
            manifest, sparse.gt, {"a": 0.1},
        )


def test_fuse_then_score_matches_evaluate(sparse, tmp_path):
    manifest = read_manifest(sparse.manifest)
    config = FusionConfig(tau=0.25)
    count = fuse_dataset(manifest, sparse.actmaps, sparse.saliency, tmp_path / "pred", config)
    assert count == len(manifest)
    scored = evaluate_predictions(manifest, tmp_path / "pred", sparse.gt, 5)
    direct = evaluate_dataset(manifest, sparse.actmaps, sparse.saliency, sparse.gt, config)
    assert scored == direct


def test_converted_saliency_matches_fixture(sparse, tmp_path):
    manifest = read_manifest(sparse.manifest)
    convert_saliency_dataset(manifest, sparse.gt, ClassSubset.full(5), tmp_path / "sal")
    for entry in manifest:
        converted = read_gray_png(png_path(tmp_path / "sal", entry.id))
        original = read_gray_png(png_path(sparse.saliency, entry.id))
        assert np.array_equal(converted.values, original.values)


def test_saliency_dataset_scores(sparse):
    manifest = read_manifest(sparse.manifest)
    report = evaluate_saliency_dataset(manifest, sparse.saliency, sparse.gt, ClassSubset.full(5))
    assert report.ids == manifest.ids
    assert report.mean_mae == 0.0
    assert report.mean_iou == 1.0


def test_sweep_report_is_deterministic(sparse, tmp_path):
    manifest = read_manifest(sparse.manifest)
    grid = SweepGrid.parse("0.1:0.9:0.2")
    for name, jobs in (("a.csv", 1), ("b.csv", 8)):
        result = sweep(manifest, sparse.actmaps, sparse.saliency, sparse.gt, grid, jobs=jobs)
        write_report(result, tmp_path / name)
    first = (tmp_path / "a.csv").read_bytes()
    assert first == (tmp_path / "b.csv").read_bytes()
    lines = first.decode("utf-8").split("\n")
    assert lines[0] == "tau,miou,ignored_fraction,iou_0,iou_1,iou_2,iou_3,iou_4,iou_5"
    assert lines[1].startswith("0.100000,")
    assert lines[-1] == ""
    assert len(lines) == 1 + 5 + 1


def test_cross_report_layout(sparse):
    manifest = read_manifest(sparse.manifest)
    matrix = cross_matrix(
        {"cam": sparse.actmaps}, {"gt": sparse.saliency}, manifest, sparse.gt, {"cam": 0.1}
    )
    rows = report_rows(matrix)
    assert rows[0] == ["method", "gt"]
    assert rows[1][0] == "cam"
    assert rows[1][1] == f"{matrix.miou[0][0]:.6f}"


def test_metric_report_marks_absent_classes_empty(tmp_path):
    planes = np.zeros((3, 2, 2))
    planes[0] = 1.0
    write_actmap(ActivationStack(planes), tmp_path / "a.actmap")
    write_gray_png(SaliencyMap(np.ones((2, 2)), binarized=True), tmp_path / "a.png")
    gt_dir = tmp_path / "gt"
    gt_dir.mkdir()
    write_label_png(LabelMask(np.ones((2, 2), dtype=np.uint8), 3), gt_dir / "a.png")
    manifest = Manifest([ManifestEntry(id="a", labels=[0])])
    report = evaluate_dataset(manifest, tmp_path, tmp_path, gt_dir, FusionConfig(tau=0.5))
    header, values = report_rows(report)
    row = dict(zip(header, values))
    assert row["miou"] == "1.000000"
    assert row["iou_1"] == "1.000000"
    assert row["iou_0"] == "" and row["iou_2"] == "" and row["iou_3"] == ""
