"""Tables, TSV exports, hard-topic selection, and figure rendering."""

import pytest

from grf.errors import ConfigError
from grf.evaluation import EvalReport
from grf.report import (
    format_delta_table,
    format_summary_table,
    hard_topic_ids,
    metric_deltas,
    render_delta_figure,
    render_histogram_figure,
    render_means_figure,
    write_delta_tsv,
    write_per_query_tsv,
)


def report_from(per_query):
    means = {}
    for metric in ("ndcg10", "map", "r1000"):
        values = [row[metric] for row in per_query.values() if row[metric] is not None]
        means[metric] = sum(values) / len(values) if values else 0.0
    return EvalReport(
        per_query=per_query,
        means=means,
        num_queries=len(per_query),
        no_positive_queries=[q for q, row in per_query.items() if row["map"] is None],
    )


SAMPLE = report_from(
    {
        "q1": {"ndcg10": 0.5, "map": 0.25, "r1000": 1.0},
        "q2": {"ndcg10": 0.75, "map": 0.5, "r1000": 0.5},
        "q3": {"ndcg10": 0.0, "map": None, "r1000": None},
    }
)


class TestSummaryTable:
    def test_contains_labels_and_means(self):
        text = format_summary_table([("bm25", SAMPLE)])
        assert "bm25" in text
        assert "0.4167" in text  # mean ndcg10 over three queries
        assert "NDCG@10" in text and "MAP" in text and "R@1000" in text
        assert text.splitlines()[1].endswith("3")

    def test_improvement_marker(self):
        text = format_summary_table(
            [("bm25", SAMPLE), ("grf", SAMPLE)], improved={"grf": {"ndcg10"}}
        )
        base_line, run_line = text.splitlines()[1:3]
        assert "+" not in base_line
        assert "0.4167+" in run_line


class TestPerQueryTsv:
    def test_exact_content(self, tmp_path):
        path = tmp_path / "per_query.tsv"
        write_per_query_tsv(path, SAMPLE)
        assert path.read_text() == (
            "qid\tndcg10\tmap\tr1000\n"
            "q1\t0.5000\t0.2500\t1.0000\n"
            "q2\t0.7500\t0.5000\t0.5000\n"
            "q3\t0.0000\tNA\tNA\n"
        )


class TestHardTopicIds:
    def make(self, scores):
        return report_from(
            {q: {"ndcg10": s, "map": s, "r1000": s} for q, s in scores.items()}
        )

    def test_bottom_fraction_by_ndcg(self):
        report = self.make({"a": 0.9, "b": 0.1, "c": 0.5, "d": 0.2, "e": 0.8})
        assert hard_topic_ids(report, 0.4) == ["b", "d"]

    def test_ties_break_lexicographically(self):
        report = self.make({"z": 0.1, "a": 0.1, "m": 0.9})
        assert hard_topic_ids(report, 1 / 3) == ["a"]

    def test_fraction_one_selects_everything(self):
        report = self.make({"a": 0.9, "b": 0.1})
        assert hard_topic_ids(report, 1.0) == ["b", "a"]

    def test_at_least_one_selected(self):
        report = self.make({"a": 0.9, "b": 0.1, "c": 0.5})
        assert hard_topic_ids(report, 0.01) == ["b"]

    def test_fraction_bounds(self):
        report = self.make({"a": 0.9})
        for bad in (0.0, -0.2, 1.5):
            with pytest.raises(ConfigError, match="fraction"):
                hard_topic_ids(report, bad)


class TestDeltas:
    A = report_from(
        {
            "q1": {"ndcg10": 0.5, "map": 0.4, "r1000": 1.0},
            "q2": {"ndcg10": 0.2, "map": None, "r1000": None},
        }
    )
    B = report_from(
        {
            "q1": {"ndcg10": 0.7, "map": 0.5, "r1000": 1.0},
            "q2": {"ndcg10": 0.1, "map": None, "r1000": None},
        }
    )

    def test_differences_are_b_minus_a(self):
        deltas = metric_deltas(self.A, self.B, ["q1", "q2"])
        assert deltas["q1"]["ndcg10"] == pytest.approx(0.2)
        assert deltas["q1"]["map"] == pytest.approx(0.1)
        assert deltas["q2"]["ndcg10"] == pytest.approx(-0.1)
        assert deltas["q2"]["map"] is None

    def test_table_has_mean_row_and_signs(self):
        deltas = metric_deltas(self.A, self.B, ["q1", "q2"])
        text = format_delta_table(deltas)
        assert "+0.2000" in text and "-0.1000" in text
        assert text.splitlines()[-1].startswith("mean")
        assert "+0.0500" in text.splitlines()[-1]

    def test_delta_tsv(self, tmp_path):
        deltas = metric_deltas(self.A, self.B, ["q1", "q2"])
        path = tmp_path / "deltas.tsv"
        write_delta_tsv(path, deltas)
        lines = path.read_text().splitlines()
        assert lines[0] == "qid\td_ndcg10\td_map\td_r1000"
        assert lines[1].startswith("q1\t+0.200000\t+0.100000")
        assert lines[2] == "q2\t-0.100000\tNA\tNA"


class TestFigures:
    def assert_png(self, path):
        assert path.exists()
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_means_figure(self, tmp_path):
        path = tmp_path / "means.png"
        render_means_figure(path, [("bm25", SAMPLE), ("grf", SAMPLE)])
        self.assert_png(path)

    def test_delta_figure(self, tmp_path):
        deltas = metric_deltas(TestDeltas.A, TestDeltas.B, ["q1", "q2"])
        path = tmp_path / "deltas.png"
        render_delta_figure(path, deltas)
        self.assert_png(path)

    def test_histogram_figure(self, tmp_path):
        path = tmp_path / "hist.png"
        render_histogram_figure(path, SAMPLE)
        self.assert_png(path)
