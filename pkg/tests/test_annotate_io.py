import json

import numpy as np
import pytest

from shipbench.annotate_io import (
    ClassVocabulary,
    ImageRecord,
    DatasetManifest,
    Detection,
    DetectionSet,
    GroundTruthBox,
    encode_yolo_line,
    load_yolo_dataset,
    manifest_from_json,
    manifest_to_json,
    parse_coco,
    parse_detections,
    parse_yolo_line,
    validate_manifest,
    write_coco,
    write_detections,
)
from shipbench.boxmath import Box2D, ImageDims
from shipbench.errors import (
    DanglingReferenceError,
    DuplicateStemError,
    MalformedRecordError,
    MissingDimsError,
    OutOfRangeError,
    ScoreOutOfRangeError,
)

VOCAB = ClassVocabulary.from_names(["spy_radar", "vls"])


def make_manifest(*records, vocab=VOCAB, split="val"):
    return DatasetManifest(vocab, tuple(records), split)


class TestVocabulary:
    def test_dense_ids(self):
        assert len(VOCAB) == 2
        assert VOCAB.name_of(0) == "spy_radar"
        assert VOCAB.name_of(1) == "vls"

    def test_rejects_duplicates_and_empties(self):
        with pytest.raises(ValueError):
            ClassVocabulary.from_names(["a", "a"])
        with pytest.raises(ValueError):
            ClassVocabulary.from_names(["a", ""])
        with pytest.raises(ValueError):
            ClassVocabulary.from_names([])

    def test_from_file(self, tmp_path):
        path = tmp_path / "classes.txt"
        path.write_text("spy_radar\n\nvls\n")
        assert ClassVocabulary.from_file(path).names == ("spy_radar", "vls")


class TestYoloLines:
    def test_parse_basic(self):
        gt = parse_yolo_line("1 0.5 0.5 0.25 0.5", ImageDims(100, 200))
        assert gt.class_id == 1
        assert gt.source_encoding == "normalized"
        assert gt.box.as_tuple() == pytest.approx((37.5, 50.0, 62.5, 150.0), abs=1e-9)

    def test_parse_accepts_crlf_and_whitespace(self):
        gt = parse_yolo_line("0  0.5\t0.5 0.5 0.5\r\n", ImageDims(10, 10))
        assert gt.class_id == 0

    def test_decoded_box_may_exceed_edges(self):
        gt = parse_yolo_line("0 0.1 0.5 0.5 0.5", ImageDims(100, 100))
        assert gt.box.x_min < 0.0  # not clipped on decode

    def test_malformed_arity(self):
        with pytest.raises(MalformedRecordError):
            parse_yolo_line("0 0.5 0.5 0.5", ImageDims(10, 10))
        with pytest.raises(MalformedRecordError):
            parse_yolo_line("0 0.5 0.5 0.5 0.5 0.5", ImageDims(10, 10))

    def test_malformed_types(self):
        with pytest.raises(MalformedRecordError):
            parse_yolo_line("cat 0.5 0.5 0.5 0.5", ImageDims(10, 10))
        with pytest.raises(MalformedRecordError):
            parse_yolo_line("0 0.5 x 0.5 0.5", ImageDims(10, 10))
        with pytest.raises(MalformedRecordError):
            parse_yolo_line("1.5 0.5 0.5 0.5 0.5", ImageDims(10, 10))

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            parse_yolo_line("0 1.5 0.5 0.5 0.5", ImageDims(10, 10))
        with pytest.raises(OutOfRangeError):
            parse_yolo_line("0 0.5 0.5 0.0 0.5", ImageDims(10, 10))
        with pytest.raises(OutOfRangeError):
            parse_yolo_line("-1 0.5 0.5 0.5 0.5", ImageDims(10, 10))

    def test_encode_parse_identity(self):
        rng = np.random.default_rng(11)
        dims = ImageDims(640, 480)
        for _ in range(200):
            w, h = (float(v) for v in rng.uniform(0.01, 1.0, 2))
            cx = float(w / 2 + rng.random() * (1 - w))
            cy = float(h / 2 + rng.random() * (1 - h))
            gt = parse_yolo_line(f"0 {cx!r} {cy!r} {w!r} {h!r}", dims)
            line = encode_yolo_line(gt, dims)
            back = parse_yolo_line(line, dims)
            assert back.box.as_tuple() == pytest.approx(gt.box.as_tuple(), abs=1e-6)


class TestYoloDataset:
    def test_load_matches_by_stem(self, tmp_path, make_png):
        images = tmp_path / "images"
        labels = tmp_path / "labels"
        labels.mkdir()
        make_png("b.png", 100, 100, images)
        make_png("a.png", 200, 100, images)
        (labels / "a.txt").write_text("0 0.5 0.5 0.5 0.5\n1 0.25 0.25 0.25 0.25\n")
        # b has no label file -> empty boxes
        manifest = load_yolo_dataset(images, labels, VOCAB, split_name="train")
        assert manifest.image_ids() == ["a", "b"]  # canonical order
        assert len(manifest.get("a").boxes) == 2
        assert manifest.get("b").boxes == ()
        assert manifest.get("a").dims == ImageDims(200, 100)

    def test_blank_lines_skipped(self, tmp_path, make_png):
        images = tmp_path / "images"
        labels = tmp_path / "labels"
        labels.mkdir()
        make_png("a.png", 64, 64, images)
        (labels / "a.txt").write_text("\n0 0.5 0.5 0.5 0.5\n\n\n")
        manifest = load_yolo_dataset(images, labels, VOCAB)
        assert len(manifest.get("a").boxes) == 1

    def test_duplicate_image_stem(self, tmp_path, make_png):
        images = tmp_path / "images"
        make_png("a.png", 32, 32, images)
        make_png("a.jpg", 32, 32, images)
        (tmp_path / "labels").mkdir()
        with pytest.raises(DuplicateStemError):
            load_yolo_dataset(images, tmp_path / "labels", VOCAB)

    def test_unreadable_image(self, tmp_path):
        images = tmp_path / "images"
        images.mkdir()
        (images / "bad.png").write_bytes(b"not an image at all")
        (tmp_path / "labels").mkdir()
        with pytest.raises(MissingDimsError):
            load_yolo_dataset(images, tmp_path / "labels", VOCAB)

    def test_parse_error_carries_file_and_line(self, tmp_path, make_png):
        images = tmp_path / "images"
        labels = tmp_path / "labels"
        labels.mkdir()
        make_png("a.png", 64, 64, images)
        (labels / "a.txt").write_text("0 0.5 0.5 0.5 0.5\n0 broken line here x\n")
        with pytest.raises(MalformedRecordError, match=r"a\.txt:2"):
            load_yolo_dataset(images, labels, VOCAB)

    def test_loader_is_order_independent(self, tmp_path, make_png):
        first = tmp_path / "one"
        second = tmp_path / "two"
        for root, order in ((first, ["c", "a", "b"]), (second, ["b", "c", "a"])):
            images = root / "images"
            labels = root / "labels"
            labels.mkdir(parents=True)
            for stem in order:
                make_png(f"{stem}.png", 64, 64, images)
                (labels / f"{stem}.txt").write_text("0 0.5 0.5 0.5 0.5\n")
        m1 = load_yolo_dataset(first / "images", first / "labels", VOCAB)
        m2 = load_yolo_dataset(second / "images", second / "labels", VOCAB)
        assert m1.image_ids() == m2.image_ids() == ["a", "b", "c"]


class TestCoco:
    def coco_doc(self):
        return {
            "images": [
                {"id": 10, "file_name": "imgs/x.png", "width": 640, "height": 480},
                {"id": 11, "file_name": "imgs/y.png", "width": 320, "height": 240},
            ],
            "annotations": [
                {"id": 1, "image_id": 10, "category_id": 7, "bbox": [10, 20, 30, 40]},
                {"id": 2, "image_id": 11, "category_id": 3, "bbox": [1, 2, 3, 4]},
            ],
            "categories": [{"id": 7, "name": "spy_radar"}, {"id": 3, "name": "vls"}],
        }

    def test_parse_bbox_conversion(self):
        manifest = parse_coco(json.dumps(self.coco_doc()))
        rec = manifest.get("x")
        assert rec.boxes[0].box.as_tuple() == (10.0, 20.0, 40.0, 60.0)
        assert rec.boxes[0].source_encoding == "pixel"

    def test_category_remap_is_source_order(self):
        manifest = parse_coco(self.coco_doc())
        assert manifest.vocabulary.names == ("spy_radar", "vls")
        assert manifest.get("x").boxes[0].class_id == 0  # category 7 -> 0
        assert manifest.get("y").boxes[0].class_id == 1  # category 3 -> 1

    def test_dangling_image_reference(self):
        doc = self.coco_doc()
        doc["annotations"][0]["image_id"] = 999
        with pytest.raises(DanglingReferenceError):
            parse_coco(doc)

    def test_dangling_category_reference(self):
        doc = self.coco_doc()
        doc["annotations"][0]["category_id"] = 999
        with pytest.raises(DanglingReferenceError):
            parse_coco(doc)

    def test_missing_dims_is_malformed(self):
        doc = self.coco_doc()
        del doc["images"][0]["width"]
        with pytest.raises(MalformedRecordError):
            parse_coco(doc)

    def test_bad_bbox_arity(self):
        doc = self.coco_doc()
        doc["annotations"][0]["bbox"] = [1, 2, 3]
        with pytest.raises(MalformedRecordError):
            parse_coco(doc)

    def test_round_trip(self):
        vocab = ClassVocabulary.from_names(["spy_radar", "vls", "helo_deck"])
        rng = np.random.default_rng(3)
        records = []
        for i in range(10):
            dims = ImageDims(int(rng.integers(64, 2000)), int(rng.integers(64, 2000)))
            boxes = []
            for _ in range(int(rng.integers(0, 6))):
                x0 = float(rng.uniform(0, dims.width - 2))
                y0 = float(rng.uniform(0, dims.height - 2))
                w = float(rng.uniform(0.5, dims.width - x0))
                h = float(rng.uniform(0.5, dims.height - y0))
                boxes.append(
                    GroundTruthBox(int(rng.integers(0, 3)), Box2D(x0, y0, x0 + w, y0 + h))
                )
            records.append(
                # image_id equals the path stem, as all tool-made manifests do
                ImageRecord(
                    f"img_{i:03d}", f"imgs/img_{i:03d}.png", dims, tuple(boxes)
                )
            )
        manifest = DatasetManifest(vocab, tuple(records), "fuzz")
        back = parse_coco(write_coco(manifest))
        assert back.split_name == "fuzz"
        assert back.image_ids() == manifest.image_ids()
        assert back.vocabulary.names == vocab.names
        for rec, orig in zip(back.images, manifest.images):
            assert rec.dims == orig.dims
            assert len(rec.boxes) == len(orig.boxes)
            for b, o in zip(rec.boxes, orig.boxes):
                assert b.class_id == o.class_id
                assert b.box.as_tuple() == pytest.approx(o.box.as_tuple(), abs=1e-6)


class TestNativeManifest:
    def test_round_trip_exact(self):
        manifest = make_manifest(
            ImageRecord(
                "a",
                "images/a.png",
                ImageDims(101, 57),
                (
                    GroundTruthBox(0, Box2D(0.123456789123, 1.5, 7.25, 33.0), "normalized"),
                    GroundTruthBox(1, Box2D(3, 4, 5, 6)),
                ),
                pose_ref="pose_0001",
            )
        )
        back = manifest_from_json(manifest_to_json(manifest))
        assert back == manifest  # bit-exact, including encodings and pose refs

    def test_schema_tag_checked(self):
        with pytest.raises(MalformedRecordError):
            manifest_from_json('{"schema": "something/else", "classes": ["a"], "images": []}')

    def test_rejects_duplicate_ids(self):
        rec = ImageRecord("a", "a.png", ImageDims(10, 10))
        with pytest.raises(ValueError):
            DatasetManifest(VOCAB, (rec, rec))


class TestDetectionExchange:
    def line(self, **overrides):
        rec = {"image_id": "img_a", "class_id": 0, "bbox": [1.0, 2.0, 3.0, 4.0], "score": 0.5}
        rec.update(overrides)
        return json.dumps(rec)

    def test_parse_groups_preserve_order(self):
        text = "\n".join(
            [
                self.line(score=0.2),
                self.line(image_id="img_b", score=0.9),
                self.line(score=0.8),
            ]
        )
        ds = parse_detections(text, producer="unit-test")
        assert ds.producer == "unit-test"
        assert len(ds) == 3
        assert [d.score for d in ds.for_image("img_a")] == [0.2, 0.8]

    def test_blank_lines_skipped(self):
        ds = parse_detections(self.line() + "\n\n" + self.line(score=0.25) + "\n")
        assert len(ds) == 2

    def test_score_bounds(self):
        with pytest.raises(ScoreOutOfRangeError):
            parse_detections(self.line(score=1.0000001))
        with pytest.raises(ScoreOutOfRangeError):
            parse_detections(self.line(score=-0.1))
        ds = parse_detections(self.line(score=0.0) + "\n" + self.line(score=1.0))
        assert len(ds) == 2  # inclusive endpoints are legal

    def test_malformed_records(self):
        bad_lines = [
            "not json",
            '["not", "an", "object"]',
            self.line(bbox=[1, 2, 3]),
            self.line(bbox=[3, 2, 1, 4]),  # x_min > x_max
            self.line(class_id=-1),
            self.line(class_id="zero"),
            self.line(image_id=""),
            json.dumps({"image_id": "a", "class_id": 0, "score": 0.5}),  # missing bbox
            self.line(score="high"),
            self.line(bbox=[1, 2, "x", 4]),
        ]
        for line in bad_lines:
            with pytest.raises(MalformedRecordError):
                parse_detections(line)

    def test_error_carries_line_number(self):
        text = self.line() + "\nbroken\n"
        with pytest.raises(MalformedRecordError, match="line 2"):
            parse_detections(text)

    def test_write_then_parse_round_trip(self):
        ds = parse_detections(
            "\n".join([self.line(), self.line(image_id="img_b", score=0.75), self.line(score=1.0)])
        )
        again = parse_detections(write_detections(ds))
        assert again.groups.keys() == ds.groups.keys()
        for image_id in ds.groups:
            assert again.groups[image_id] == ds.groups[image_id]

    def test_detection_validates_eagerly(self):
        with pytest.raises(ScoreOutOfRangeError):
            Detection("a", 0, Box2D(0, 0, 1, 1), 1.5)
        with pytest.raises(ValueError):
            Detection("a", -2, Box2D(0, 0, 1, 1), 0.5)

    def test_grouping_constructor(self):
        dets = [
            Detection("b", 0, Box2D(0, 0, 1, 1), 0.5),
            Detection("a", 0, Box2D(0, 0, 1, 1), 0.9),
            Detection("b", 1, Box2D(0, 0, 2, 2), 0.7),
        ]
        ds = DetectionSet.from_detections(dets, producer="p")
        assert ds.image_ids() == ["a", "b"]
        assert [d.score for d in ds.for_image("b")] == [0.5, 0.7]


class TestValidateManifest:
    def test_reports_violations_as_data(self):
        rec = ImageRecord(
            "a",
            "a.png",
            ImageDims(100, 100),
            (
                GroundTruthBox(7, Box2D(0, 0, 10, 10)),     # unknown class (K=2)
                GroundTruthBox(0, Box2D(5, 5, 5, 9)),       # degenerate
                GroundTruthBox(1, Box2D(50, 50, 120, 80)),  # out of bounds
                GroundTruthBox(0, Box2D(0, 0, 100, 100)),   # exactly at bounds: fine
            ),
        )
        violations = validate_manifest(make_manifest(rec))
        kinds = [(v.kind, v.box_index) for v in violations]
        assert kinds == [("unknown_class", 0), ("degenerate", 1), ("out_of_bounds", 2)]

    def test_clean_manifest_is_empty(self):
        rec = ImageRecord(
            "a", "a.png", ImageDims(100, 100), (GroundTruthBox(0, Box2D(1, 1, 9, 9)),)
        )
        assert validate_manifest(make_manifest(rec)) == []
