"""Tests for data models and validation."""

import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from phaseseg.metrics import aggregate, score_video
from phaseseg.models.manifest import DatasetManifest, Split, VideoEntry
from phaseseg.models.report import METRIC_FIELDS, MetricReport
from phaseseg.models.sequences import PhaseSequence, Segment, SegmentList, segments_from_frames
from phaseseg.training.history import HISTORY_FIELDS, EpochRecord, TrainHistory
from phaseseg.utils.exceptions import DataError, EmptyInputError


class TestPhaseSequence:
    """Test PhaseSequence validation."""

    def test_valid_sequence(self):
        """Test valid sequence creation."""
        seq = PhaseSequence.from_list([0, 0, 1, 2], num_classes=3)
        assert len(seq) == 4
        assert seq.tolist() == [0, 0, 1, 2]
        assert seq.fps == Fraction(1)

    def test_labels_are_read_only(self):
        """Test labels cannot be modified after creation."""
        seq = PhaseSequence.from_list([0, 1], num_classes=2)
        with pytest.raises(ValueError):
            seq.labels[0] = 1

    def test_out_of_range_label(self):
        """Test the first bad frame is reported."""
        with pytest.raises(DataError) as exc_info:
            PhaseSequence.from_list([0, 1, 3, 5], num_classes=3)
        assert exc_info.value.index == 2

    def test_negative_label(self):
        with pytest.raises(DataError):
            PhaseSequence.from_list([0, -1], num_classes=3)

    def test_empty_sequence(self):
        """Test a sequence needs at least one frame."""
        with pytest.raises(EmptyInputError):
            PhaseSequence(np.array([], dtype=np.int64), num_classes=2)

    def test_non_integer_labels(self):
        with pytest.raises(DataError):
            PhaseSequence(np.array([0.0, 0.5]), num_classes=2)


class TestSegments:
    """Test run-length segment encoding."""

    def test_single_run(self):
        """Test a constant sequence is one segment."""
        assert list(segments_from_frames([0, 0, 0])) == [Segment(0, 0, 3)]

    def test_alternating_runs(self):
        """Test maximal runs."""
        assert list(segments_from_frames([0, 1, 1, 0])) == [(0, 0, 1), (1, 1, 3), (0, 3, 4)]

    def test_round_trip(self, rng):
        """Test expanding segments reconstructs the frames."""
        labels = rng.integers(0, 3, size=20)
        np.testing.assert_array_equal(segments_from_frames(labels).to_frames(), labels)

    def test_properties(self):
        segs = segments_from_frames(PhaseSequence.from_list([2, 2, 0, 1, 1, 1], num_classes=3))
        assert len(segs) == 3
        assert segs.labels == [2, 0, 1]
        assert segs.num_frames == 6
        assert segs[2].length == 3

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            segments_from_frames([])

    def test_gap_in_tiling(self):
        """Test segments must tile the timeline."""
        with pytest.raises(DataError):
            SegmentList(((0, 0, 2), (1, 3, 5)))

    def test_neighbours_share_label(self):
        """Test adjacent segments need different labels."""
        with pytest.raises(DataError) as exc_info:
            SegmentList(((0, 0, 2), (0, 2, 5)))
        assert exc_info.value.index == 1


class TestDatasetManifest:
    """Test dataset manifests."""

    def _manifest(self, videos):
        return DatasetManifest(num_classes=3, feature_dim=4, phase_names=["a", "b", "c"], videos=videos)

    def _entry(self, video_id, split):
        return VideoEntry(
            video_id=video_id,
            features=f"features/{video_id}.phsf",
            labels=f"labels/{video_id}.txt",
            split=split,
        )

    def test_splits(self):
        """Test filtering by split."""
        manifest = self._manifest([
            self._entry("v1", Split.TRAIN),
            self._entry("v2", Split.TRAIN),
            self._entry("v3", "test"),
        ])
        assert [v.video_id for v in manifest.split("train")] == ["v1", "v2"]
        assert manifest.split_counts() == {"train": 2, "val": 0, "test": 1}

    def test_duplicate_ids(self):
        """Test video ids must be unique."""
        with pytest.raises(ValueError):
            self._manifest([self._entry("v1", Split.TRAIN), self._entry("v1", Split.TEST)])

    def test_blank_video_id(self):
        with pytest.raises(ValueError):
            self._entry("  ", Split.TRAIN)

    def test_save_and_load(self, temp_dir):
        """Test the manifest round-trips through JSON and resolves relative paths."""
        manifest = self._manifest([self._entry("v1", Split.VAL)])
        path = manifest.save(temp_dir / "manifest.json")
        loaded = DatasetManifest.load(path, check_files=False)
        assert loaded.videos == manifest.videos
        assert loaded.root == temp_dir
        assert loaded.resolve("features/v1.phsf") == temp_dir / "features" / "v1.phsf"
        assert "root" not in json.loads(path.read_text())

    def test_missing_files(self, temp_dir):
        """Test referenced files are checked on load."""
        path = self._manifest([self._entry("v1", Split.TRAIN)]).save(temp_dir / "manifest.json")
        with pytest.raises(DataError) as exc_info:
            DatasetManifest.load(path)
        assert exc_info.value.field == "features"

    def test_invalid_json(self, temp_dir):
        path = temp_dir / "manifest.json"
        path.write_text("{not json")
        with pytest.raises(DataError):
            DatasetManifest.load(path)

    def test_invalid_content(self, temp_dir):
        path = temp_dir / "manifest.json"
        path.write_text(json.dumps({"num_classes": 1, "feature_dim": 4}))
        with pytest.raises(DataError):
            DatasetManifest.load(path, check_files=False)


class TestMetricReport:
    """Test metric report serialization."""

    @pytest.fixture
    def report(self) -> MetricReport:
        videos = [
            score_video([0, 0, 1, 1], [0, 1, 1, 1], "v1"),
            score_video([0, 1, 1, 1], [0, 1, 1, 1], "v2"),
        ]
        return aggregate(videos, split="test", stage=2)

    def test_json(self, report):
        """Test the JSON report carries per-video values and the aggregate."""
        data = json.loads(report.to_json())
        assert data["split"] == "test"
        assert data["stage"] == 2
        assert len(data["videos"]) == 2
        assert set(data["std"]) == set(METRIC_FIELDS)
        assert MetricReport(**data) == report

    def test_csv(self, report):
        """Test the CSV has one row per video then mean and std."""
        rows = list(csv.reader(io.StringIO(report.to_csv())))
        assert rows[0][:2] == ["video_id", "num_frames"]
        assert rows[0][2:10] == METRIC_FIELDS
        assert [r[0] for r in rows[1:]] == ["v1", "v2", "mean", "std"]
        assert float(rows[3][2]) == pytest.approx(report.mean.accuracy)

    def test_save(self, report, temp_dir):
        paths = report.save(temp_dir / "out", "metrics_stage2")
        assert paths["json"].name == "metrics_stage2.json"
        assert paths["csv"].is_file()

    def test_std_requires_every_metric(self, report):
        with pytest.raises(ValueError):
            MetricReport(videos=[], mean=report.mean, std={"accuracy": 0.0})


class TestTrainHistory:
    """Test per-epoch training records."""

    def _record(self, epoch, seconds=0.5):
        return EpochRecord(
            epoch=epoch,
            train_loss=1.0 / epoch,
            train_accuracy=50.0,
            val_accuracy=40.0 + epoch,
            val_edit=30.0,
            wall_clock_s=seconds,
        )

    def test_epochs_in_order(self):
        """Test epochs must be appended as 1, 2, 3, ..."""
        history = TrainHistory()
        history.append(self._record(1))
        with pytest.raises(DataError):
            history.append(self._record(3))

    def test_csv_round_trip(self, temp_dir):
        """Test the saved CSV loads back to the same values."""
        history = TrainHistory()
        for epoch in (1, 2, 3):
            history.append(self._record(epoch))
        path = history.save(temp_dir / "history.csv")
        assert path.read_text().splitlines()[0] == ",".join(HISTORY_FIELDS)
        loaded = TrainHistory.load(path)
        assert loaded.deterministic_view() == history.deterministic_view()
        assert loaded.record(2).val_accuracy == 42.0

    def test_deterministic_view_drops_wall_clock(self):
        a, b = TrainHistory(), TrainHistory()
        a.append(self._record(1, seconds=0.1))
        b.append(self._record(1, seconds=9.0))
        assert a.deterministic_view() == b.deterministic_view()
        assert "wall_clock_s" not in a.deterministic_view()[0]
