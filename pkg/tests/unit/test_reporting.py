"""Tests for segmentation analysis, ribbons and report output."""

import json

import numpy as np
import pytest
from lxml import etree

from phaseseg.config.settings import ReportConfig
from phaseseg.generators import PALETTE, ReportGenerator, phase_color
from phaseseg.metrics import aggregate, score_video
from phaseseg.processors import (
    FindingCategory,
    FindingLevel,
    SegmentationAnalyzer,
    confusion_pairs,
    diagnose_video,
)
from phaseseg.utils.exceptions import ConfigurationError, ParameterError
from phaseseg.utils.files import atomic_output_dir

SVG = {"svg": "http://www.w3.org/2000/svg"}


def parse_svg(text):
    return etree.fromstring(text.encode("utf-8"))


class TestDiagnostics:
    """Test per-video segment and transition diagnostics."""

    def test_counts(self):
        pred = np.array([0, 0, 1, 0, 1, 1, 1, 1])
        gt = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        d = diagnose_video("v", pred, gt, transition_window=1)
        assert d.predicted_segments == 4
        assert d.ground_truth_segments == 2
        assert d.segment_ratio == 2.0
        assert d.frames_near_transition == 3
        assert d.errors_near_transition == 0
        assert d.errors_elsewhere == 1
        assert d.far_error_rate == pytest.approx(20.0)

    def test_zero_window(self):
        d = diagnose_video("v", [0, 1, 1], [0, 0, 1], transition_window=0)
        assert d.frames_near_transition == 0
        assert d.near_error_rate == 0.0

    def test_confusion_pairs_ranked(self):
        pairs = [
            (np.array([1, 1, 2, 0]), np.array([0, 0, 0, 0])),
            (np.array([2, 2]), np.array([1, 1])),
        ]
        assert confusion_pairs(pairs, top=2) == [(0, 1, 2), (1, 2, 2)]
        assert confusion_pairs(pairs, top=5)[-1] == (0, 2, 1)


class TestSegmentationAnalyzer:
    """Test analysis findings."""

    def test_over_segmentation_finding(self):
        analyzer = SegmentationAnalyzer(ReportConfig(transition_window=1))
        report = analyzer.analyze([("v1", np.array([0, 1, 0, 1, 0, 1]), np.array([0, 0, 0, 1, 1, 1]))])
        found = report.get_findings_by_category(FindingCategory.OVER_SEGMENTATION)
        assert len(found) == 1
        assert found[0].video_id == "v1"
        assert found[0].level == FindingLevel.WARNING

    def test_transition_errors_finding(self):
        """Test errors next to a boundary are flagged."""
        analyzer = SegmentationAnalyzer(ReportConfig(transition_window=1), phase_names=["Prep", "Cut"])
        pred = np.array([0, 0, 0, 1, 1, 1, 1, 1])
        gt = np.array([0, 0, 0, 0, 1, 1, 1, 1])
        report = analyzer.analyze([("v1", pred, gt)])
        assert len(report.get_findings_by_category(FindingCategory.TRANSITION_ERRORS)) == 1
        assert report.error_share_near_transitions == 100.0
        assert report.confusions == [(0, 1, 1)]
        confusion = report.get_findings_by_category(FindingCategory.CONFUSION)[0]
        assert confusion.description == "Prep predicted as Cut on 1 frames"

    def test_perfect_prediction_has_no_warnings(self):
        gt = np.array([0, 0, 1, 1, 2, 2])
        report = SegmentationAnalyzer().analyze([("v1", gt.copy(), gt)])
        assert report.findings == []
        assert report.mean_segment_ratio == 1.0
        assert report.per_phase[1]["f1"] == 100.0

    def test_to_dict_is_json(self):
        report = SegmentationAnalyzer().analyze([("v1", np.array([0, 1, 1]), np.array([0, 0, 1]))])
        data = json.loads(json.dumps(report.to_dict()))
        assert data["summary"]["videos"] == 1
        assert data["per_phase"]["0"]["name"] == "Phase 0"


class TestRibbons:
    """Test SVG phase ribbons."""

    def test_palette(self):
        assert phase_color(0) == PALETTE[0]
        assert len(set(PALETTE)) == 20
        with pytest.raises(ParameterError):
            phase_color(20)

    def test_one_rect_per_segment(self, temp_dir):
        """Test each row spans T * px_per_frame pixels with one rect per segment."""
        generator = ReportGenerator(temp_dir, ReportConfig(px_per_frame=2.0))
        gt = np.array([0, 0, 0, 1, 1, 2])
        pred = np.array([0, 1, 0, 1, 1, 1])
        root = parse_svg(generator.render_ribbon("v1", gt, pred))
        assert root.get("data-frames") == "6"
        rows = {g.get("data-row"): g for g in root.xpath("//svg:g[@class='row']", namespaces=SVG)}
        assert set(rows) == {"ground_truth", "prediction"}

        gt_rects = rows["ground_truth"].xpath("svg:rect", namespaces=SVG)
        pred_rects = rows["prediction"].xpath("svg:rect", namespaces=SVG)
        assert len(gt_rects) == 3
        assert len(pred_rects) == 4
        for rects in (gt_rects, pred_rects):
            assert sum(float(r.get("width")) for r in rects) == pytest.approx(12.0)
        assert [r.get("fill") for r in gt_rects] == [PALETTE[0], PALETTE[1], PALETTE[2]]
        assert float(gt_rects[1].get("x")) == pytest.approx(6.0)
        assert gt_rects[1].get("data-start") == "3"

    def test_legend_lists_every_class(self, temp_dir):
        generator = ReportGenerator(temp_dir, phase_names=["A & B", "C"])
        root = parse_svg(generator.render_ribbon("v1", [0, 0], [1, 1], num_classes=4))
        swatches = root.xpath("//svg:rect[@class='swatch']", namespaces=SVG)
        assert [s.get("data-label") for s in swatches] == ["0", "1", "2", "3"]
        names = root.xpath("//svg:g[@class='legend']//svg:text/text()", namespaces=SVG)
        assert names == ["A & B", "C", "Phase 2", "Phase 3"]

    def test_thirteen_classes_get_distinct_colours(self, temp_dir):
        labels = np.repeat(np.arange(13), 3)
        root = parse_svg(ReportGenerator(temp_dir).render_ribbon("v1", labels, labels))
        swatches = root.xpath("//svg:rect[@class='swatch']/@fill", namespaces=SVG)
        assert len(set(swatches)) == 13
        assert swatches == list(PALETTE[:13])

    def test_rows_must_agree(self, temp_dir):
        with pytest.raises(ParameterError):
            ReportGenerator(temp_dir).render_ribbon("v1", [0, 0, 1], [0, 1])

    def test_generate_writes_all_artifacts(self, temp_dir):
        videos = [("v1", np.array([0, 1, 1]), np.array([0, 0, 1]))]
        report = aggregate([score_video(p, g, vid) for vid, p, g in videos], split="test")
        analysis = SegmentationAnalyzer().analyze(videos)
        written = ReportGenerator(temp_dir / "report").generate(videos, report, analysis)
        assert written["ribbons"][0] == temp_dir / "report" / "ribbons" / "v1.svg"
        assert {p.suffix for p in written["metrics"]} == {".json", ".csv"}
        assert json.loads(written["analysis"][0].read_text())["summary"]["videos"] == 1


class TestAtomicOutputDir:
    """Test staged output directories."""

    def test_moves_into_place(self, temp_dir):
        target = temp_dir / "out"
        with atomic_output_dir(target) as staging:
            (staging / "a.txt").write_text("x")
            assert not target.exists()
        assert (target / "a.txt").read_text() == "x"

    def test_failure_leaves_nothing(self, temp_dir):
        target = temp_dir / "out"
        with pytest.raises(RuntimeError):
            with atomic_output_dir(target) as staging:
                (staging / "a.txt").write_text("x")
                raise RuntimeError("boom")
        assert not target.exists()
        assert list(temp_dir.iterdir()) == []

    def test_non_empty_target_needs_force(self, temp_dir):
        target = temp_dir / "out"
        target.mkdir()
        (target / "old.txt").write_text("old")
        with pytest.raises(ConfigurationError):
            with atomic_output_dir(target):
                pass
        with atomic_output_dir(target, force=True) as staging:
            (staging / "new.txt").write_text("new")
        assert sorted(p.name for p in target.iterdir()) == ["new.txt"]
